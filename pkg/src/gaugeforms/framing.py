"""Frames, the spin homomorphism, path lifting and monodromy.

A valid symbol factors through the Pauli basis as E^a = rho s^j e_j^a,
which identifies principal parts with frame fields.  Comparing the frames
of two symbols gives a rotation-valued (or restricted-Lorentz-valued)
transition field O(x); whether O lifts through the 2-to-1 spin
homomorphism to a single-valued SL(2,C)/SU(2) field on the torus is
detected by sign continuation of pointwise lifts around the generating
loops.  The per-axis closure signs are the monodromy data that separate
the special (SL/SU) gauge classes; with the abelian phase freedom of the
full unitary/general groups a single-valued lift always exists on tori and
is built here explicitly with half-angle compensator phases.

Conventions (frozen, verified by the test suite):
  * Pauli basis s^1, s^2, s^3 standard, s^4 = Id; eta = diag(1, 1, 1, -1).
  * spin_hom(X)[j, k] = (1/2) tr(s^j X s^k X*), a group homomorphism into
    SO(3) / SO+(3,1) with spin_hom(Id) = Id.
  * Frame transitions e~ = O e of a gauge pair satisfy
    O = (rho/rho~) spin_hom(R*), so gauges are reconstructed from lifts L
    of the normalized transition as R = mu L* with a scalar mu > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import PERIOD, Chart
from .errors import (
    ClosureFailure,
    DegenerateFrame,
    LiftVerificationFailed,
    NoLift,
    NotInGroup,
    SamplingTooCoarse,
)
from .geometry import MetricData, metric_density
from .symbol import FullSymbol

S1 = np.array([[0, 1], [1, 0]], dtype=complex)
S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
S3 = np.array([[1, 0], [0, -1]], dtype=complex)
S4 = np.eye(2, dtype=complex)

#: Upper-index basis of Hermitian 2x2 matrices; trace-orthogonal,
#: tr(s^j s^k) = 2 delta^{jk}.
S_UPPER = np.stack([S1, S2, S3, S4])

#: Minkowski matrix for frame orthonormality in 4D.
ETA = np.diag([1.0, 1.0, 1.0, -1.0])

FRAME_ORTH_TOL = 1e-9
GROUP_TOL = 1e-9
LIFT_VERIFY_TOL = 1e-8
DOMINANCE_FACTOR = 4.0  # squared-norm ratio ~ (factor 2 on norms)


def pauli_basis(dim: int) -> np.ndarray:
    return S_UPPER[:dim] if dim == 3 else S_UPPER


@dataclass
class Frame:
    """Orthonormal (co)tangent frame field; e[k, j, a] is e_j^a at point k."""

    e: np.ndarray
    dim: int

    def det(self) -> np.ndarray:
        return np.linalg.det(self.e)


def frame_components(Ev: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """e_j^a = tr(s^j E^a) / (2 rho) for stacked coefficients (m, K, 2, 2)."""
    m = Ev.shape[0]
    s = pauli_basis(m)
    e = np.einsum("jim,akmi->kja", s, Ev, optimize=True).real
    return e / (2.0 * rho[:, None, None])


def frame_from_symbol(symbol: FullSymbol, md: MetricData, check: bool = True) -> Frame:
    """Extract the frame field encoded in the principal part.

    With check=True, verifies Lorentz/Euclidean orthonormality
    g_{ab} e_j^a e_k^b = eta_{jk} (resp. delta_{jk}) and det e != 0.
    """
    e = frame_components(symbol.E_values(), md.rho)
    if check:
        dets = np.abs(np.linalg.det(e))
        if dets.min() <= 1e-10:
            raise DegenerateFrame(f"frame determinant vanishes: min |det| {dets.min():.3e}")
        gram = np.einsum("kab,kja,klb->kjl", md.g_down, e, e, optimize=True)
        target = ETA if symbol.dim == 4 else np.eye(3)
        dev = float(np.abs(gram - target).max())
        if dev > FRAME_ORTH_TOL:
            raise DegenerateFrame(f"frame is not orthonormal: max deviation {dev:.3e}")
    return Frame(e, symbol.dim)


def frame_at_points(symbol: FullSymbol, xs: np.ndarray) -> np.ndarray:
    """Frame values at arbitrary points (no orthonormality re-check)."""
    Ev = symbol.E_values_at(xs)
    gd = metric_density(Ev)
    det = np.linalg.det(gd)
    rho = det ** 0.25 if symbol.dim == 3 else (-det) ** (1.0 / 6.0)
    return frame_components(Ev, rho)


@dataclass
class FrameTransition:
    """The field O with e~_j = O_j^k e_k, split into a positive conformal
    factor lam and a normalized part in SO(3) or SO+(3,1)."""

    O: np.ndarray
    O_normalized: np.ndarray
    lam: np.ndarray
    dim: int
    group_dev: float


def transition(frame_e: Frame, frame_et: Frame) -> FrameTransition:
    """Solve e~ = O e pointwise and verify group membership.

    In 4D the conformal factor lam = (det O)^(1/4) is split off first; the
    normalized part must lie in SO+(3,1) (eta-orthogonal, det +1, time
    orientation preserved).  In 3D, O itself must lie in SO(3).
    """
    if frame_e.dim != frame_et.dim:
        raise NotInGroup("frames live on charts of different dimension")
    dim = frame_e.dim
    O = frame_et.e @ np.linalg.inv(frame_e.e)
    detO = np.linalg.det(O)
    if detO.min() <= 0:
        raise NotInGroup(
            "transition determinant is not positive (orientation/charge mismatch)")
    if dim == 4:
        lam = detO ** 0.25
        O0 = O / lam[:, None, None]
        gram = np.einsum("kaj,ab,kbl->kjl", O0, ETA, O0, optimize=True)
        dev = float(np.abs(gram - ETA).max())
        if O0[:, 3, 3].min() <= 0:
            raise NotInGroup("transition reverses time orientation")
    else:
        lam = np.ones(O.shape[0])
        O0 = O
        gram = np.einsum("kaj,kal->kjl", O0, O0, optimize=True)
        dev = float(np.abs(gram - np.eye(3)).max())
        dev = max(dev, float(np.abs(detO - 1.0).max()))
    if dev > GROUP_TOL:
        raise NotInGroup(f"transition is not in the frame group: max deviation {dev:.3e}")
    return FrameTransition(O, O0, lam, dim, dev)


# -- spin homomorphism ---------------------------------------------------------

def spin_hom(R: np.ndarray, dim: int = 4) -> np.ndarray:
    """O[j, k] = (1/2) tr(s^j R s^k R*) for stacked 2x2 matrices.

    A homomorphism GL(2,C) -> CSO+(3,1) restricting to
    SL(2,C) -> SO+(3,1) and (dim=3, R unitary) to SU(2) -> SO(3); its
    kernel on the special groups is {+1, -1}, and scalars act by
    spin_hom(c X) = |c|^2 spin_hom(X).
    """
    R = np.asarray(R, dtype=complex)
    s = pauli_basis(dim)
    out = 0.5 * np.einsum("jim,...mn,knr,...ir->...jk", s, R, s, np.conj(R), optimize=True)
    return out.real


# -- pointwise lifts -----------------------------------------------------------

def _quaternion_from_rotation(R: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of stacked 3x3 rotations, branch chosen
    by the largest of (trace, R00, R11, R22) for numerical stability."""
    R = np.asarray(R, dtype=float)
    K = R.shape[:-2]
    q = np.empty(K + (4,))
    t = np.einsum("...ii->...", R)
    choices = np.stack([t, R[..., 0, 0], R[..., 1, 1], R[..., 2, 2]])
    branch = np.argmax(choices, axis=0)

    def fill(mask, comps):
        if not np.any(mask):
            return
        for idx, val in enumerate(comps):
            q[mask, idx] = val

    m0 = branch == 0
    if np.any(m0):
        r = np.sqrt(1.0 + t[m0])
        Rm = R[m0]
        fill(m0, [0.5 * r,
                  (Rm[:, 2, 1] - Rm[:, 1, 2]) / (2 * r),
                  (Rm[:, 0, 2] - Rm[:, 2, 0]) / (2 * r),
                  (Rm[:, 1, 0] - Rm[:, 0, 1]) / (2 * r)])
    for axis in (0, 1, 2):
        mk = branch == axis + 1
        if not np.any(mk):
            continue
        Rm = R[mk]
        j, k = (axis + 1) % 3, (axis + 2) % 3
        r = np.sqrt(1.0 + Rm[:, axis, axis] - Rm[:, j, j] - Rm[:, k, k])
        vec = np.empty((Rm.shape[0], 3))
        vec[:, axis] = 0.5 * r
        vec[:, j] = (Rm[:, j, axis] + Rm[:, axis, j]) / (2 * r)
        vec[:, k] = (Rm[:, k, axis] + Rm[:, axis, k]) / (2 * r)
        w = (Rm[:, k, j] - Rm[:, j, k]) / (2 * r)
        fill(mk, [w, vec[:, 0], vec[:, 1], vec[:, 2]])
    return q


def _su2_from_so3(O3: np.ndarray) -> np.ndarray:
    """One of the two SU(2) preimages of stacked SO(3) matrices under
    spin_hom; spin_hom(W)[j,k] is the transpose of the standard
    column-action rotation of the quaternion, hence the transpose here."""
    q = _quaternion_from_rotation(np.swapaxes(O3, -1, -2))
    w = q[..., 0][..., None, None]
    v = q[..., 1:]
    vs = np.einsum("...a,aij->...ij", v, S_UPPER[:3])
    return w * np.eye(2) + 1j * vs


def _sqrt_psd2(P: np.ndarray) -> np.ndarray:
    """Square root of stacked Hermitian positive 2x2 matrices:
    sqrt(P) = (P + s Id) / sqrt(tr P + 2 s), s = sqrt(det P)."""
    det = np.linalg.det(P).real
    tr = np.einsum("...ii->...", P).real
    s = np.sqrt(det)
    denom = np.sqrt(tr + 2 * s)
    return (P + s[..., None, None] * np.eye(2)) / denom[..., None, None]


def lift_pointwise(O: np.ndarray, dim: int) -> np.ndarray:
    """A pointwise preimage of O under spin_hom, determinant one.

    3D: quaternion extraction (SU(2) result).  4D: split off the boost as
    the positive square root of L L* read from the last column of O, lift
    the remaining rotation block, and compose.  The result is verified to
    LIFT_VERIFY_TOL; the overall sign per point is the extraction branch.
    """
    O = np.asarray(O, dtype=float)
    single = O.ndim == 2
    if single:
        O = O[None]
    if dim == 3:
        L = _su2_from_so3(O)
    else:
        b = O[..., :, 3]
        P = np.einsum("...j,jkl->...kl", b, S_UPPER)
        H = _sqrt_psd2(P)
        detH = np.linalg.det(H)[..., None, None]
        Hinv = np.empty_like(H)
        Hinv[..., 0, 0] = H[..., 1, 1]
        Hinv[..., 0, 1] = -H[..., 0, 1]
        Hinv[..., 1, 0] = -H[..., 1, 0]
        Hinv[..., 1, 1] = H[..., 0, 0]
        Hinv = Hinv / detH
        O_rot = spin_hom(Hinv, dim=4) @ O
        U = _su2_from_so3(O_rot[..., :3, :3])
        L = H @ U
    dev = float(np.abs(spin_hom(L, dim) - O).max())
    if dev > LIFT_VERIFY_TOL:
        raise LiftVerificationFailed(
            f"spin_hom(lift) deviates from the input by {dev:.3e}")
    return L[0] if single else L


# -- monodromy over loops --------------------------------------------------------

def _pair_signs(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Relative branch sign between consecutive two-valued lifts.

    Requires the closer of B ~ +A / B ~ -A to win by a factor of two in
    norm, else the sampling cannot distinguish the branches.
    """
    dplus = (np.abs(B - A) ** 2).sum(axis=(-2, -1))
    dminus = (np.abs(B + A) ** 2).sum(axis=(-2, -1))
    hi = np.maximum(dplus, dminus)
    lo = np.minimum(dplus, dminus)
    if np.any(hi < DOMINANCE_FACTOR * lo):
        raise SamplingTooCoarse(
            "branch continuation is ambiguous; refine the sampling")
    return np.where(dplus <= dminus, 1.0, -1.0)


def loop_monodromy(O_loop: np.ndarray, dim: int) -> int:
    """Closure sign of the continued lift around one closed loop.

    O_loop has shape (n, m, m) with samples in traversal order; the wrap
    from the last sample back to the first is included, so the product of
    consecutive relative signs is the monodromy.
    """
    L = lift_pointwise(O_loop, dim)
    signs = _pair_signs(L, np.roll(L, -1, axis=0))
    return int(np.prod(signs))


def monodromy_signs(symbol_a: FullSymbol, symbol_b: FullSymbol,
                    n_samples: int | None = None) -> tuple[int, ...]:
    """Per-axis monodromy of the frame transition between two symbols.

    Frames are sampled along each generating circle of the torus; the
    transition is normalized to the frame group before lifting.  For
    grid-backed symbols the default sampling stays on the grid points,
    where the stored values are exact; expression-backed symbols are
    oversampled.
    """
    chart = symbol_a.chart
    if n_samples is None:
        if symbol_a.expression_backed and symbol_b.expression_backed:
            n_samples = max(64, 2 * chart.resolution)
        else:
            n_samples = chart.resolution
    n = n_samples
    out = []
    for axis in range(1, chart.dim + 1):
        ea = _loop_frames(symbol_a, axis, n)
        eb = _loop_frames(symbol_b, axis, n)
        O = eb @ np.linalg.inv(ea)
        det = np.linalg.det(O)
        if det.min() <= 0:
            raise NotInGroup("transition determinant is not positive along a loop")
        O0 = O / (det ** (1.0 / chart.dim))[:, None, None]
        out.append(loop_monodromy(O0, chart.dim))
    return tuple(out)


def _loop_frames(symbol: FullSymbol, axis: int, n: int) -> np.ndarray:
    Ev = symbol.E_loop_values(axis, n)
    gd = metric_density(Ev)
    det = np.linalg.det(gd)
    rho = det ** 0.25 if symbol.dim == 3 else (-det) ** (1.0 / 6.0)
    return frame_components(Ev, rho)


# -- global lift over the torus --------------------------------------------------

def global_lift_torus(O0: np.ndarray, signs, group: str, chart: Chart,
                      verify: bool = True) -> np.ndarray:
    """A continuous lift field L with spin_hom(L) = O0 over the whole torus.

    O0: (K, m, m) normalized transition samples on the chart grid, row-major.
    signs: per-axis monodromy; group: 'sl'/'su' demand all +1 (else NoLift),
    'gl'/'u' compensate each -1 axis with the half-angle phase
    exp(i x^a / 2), which is single-valued once multiplied against the
    sign-discontinuous branch.  Returns (K, 2, 2) with |det L| = 1.
    """
    m, n = chart.dim, chart.resolution
    group = group.lower()
    signs = tuple(int(s) for s in signs)
    if group in ("sl", "su") and any(s == -1 for s in signs):
        raise NoLift(f"monodromy {signs} obstructs a single-valued special lift")

    L = lift_pointwise(O0, m).reshape(chart.grid_shape + (2, 2))

    # branch continuation: axis 0 over the full grid, then each further axis
    # on the sub-grid where all earlier coordinates vanish, broadcast back
    for a in range(m):
        sub = L[(0,) * a]
        rel = _pair_signs(sub[:-1], sub[1:])
        s = np.cumprod(np.concatenate([np.ones((1,) + rel.shape[1:]), rel]), axis=0)
        L = L * s.reshape((1,) * a + s.shape + (1, 1))

    # interior continuity audit
    for a in range(m):
        fwd = np.roll(L, -1, axis=a)
        sl = tuple(slice(0, n - 1) if b == a else slice(None) for b in range(m))
        rel = _pair_signs(L[sl], fwd[sl])
        if np.any(rel < 0):
            raise SamplingTooCoarse("sign continuation failed inside the grid")

    # wrap faces fix the monodromy; they must be uniform and match `signs`
    for a in range(m):
        last = tuple(n - 1 if b == a else slice(None) for b in range(m))
        first = tuple(0 if b == a else slice(None) for b in range(m))
        rel = _pair_signs(L[last], L[first])
        if rel.min() != rel.max():
            raise ClosureFailure(f"wrap sign is not uniform across the face of axis {a + 1}")
        if int(rel.flat[0]) != signs[a]:
            raise ClosureFailure(
                f"face monodromy {int(rel.flat[0])} contradicts loop monodromy {signs[a]} "
                f"on axis {a + 1}")

    if group in ("gl", "u") and any(s == -1 for s in signs):
        xs = chart.grid_points()  # (m, K)
        kappa = np.array([1.0 if s == -1 else 0.0 for s in signs])
        phase = np.exp(0.5j * np.einsum("a,ak->k", kappa, xs))
        L = L * phase.reshape(chart.grid_shape)[..., None, None]

    L = L.reshape(chart.npoints, 2, 2)
    if verify:
        dev = float(np.abs(spin_hom(L, m) - O0).max())
        if dev > LIFT_VERIFY_TOL:
            raise LiftVerificationFailed(f"global lift verification failed: {dev:.3e}")
    return L

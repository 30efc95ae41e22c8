"""Coordinate model: flat tori with uniform periodic grids.

A chart is a torus T^m (m = 3 or 4) with period 2*pi along every axis and a
uniform grid of `resolution` points per axis.  All quadrature is the
trapezoidal rule, which on a periodic grid collapses to the rectangle rule
and integrates trigonometric polynomials of degree < N/2 exactly.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import BadAxis, BadDimension, BadResolution, SampleCountMismatch

PERIOD = 2.0 * np.pi

_DEFAULT_Q_REF = (0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Chart:
    """A flat torus T^dim with a uniform grid.

    dim         -- 3 or 4
    resolution  -- grid points per axis (N >= 8)
    q_ref       -- reference covector fixing the time orientation (4D only)
    """

    dim: int
    resolution: int
    q_ref: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.dim not in (3, 4):
            raise BadDimension(f"dim must be 3 or 4, got {self.dim}")
        if self.resolution < 8:
            raise BadResolution(f"resolution must be >= 8, got {self.resolution}")
        if self.dim == 3:
            if self.q_ref is not None:
                raise BadDimension("q_ref is a 4D-only parameter")
        else:
            q = _DEFAULT_Q_REF if self.q_ref is None else tuple(float(c) for c in self.q_ref)
            if len(q) != 4:
                raise BadDimension(f"q_ref must have 4 components, got {len(q)}")
            object.__setattr__(self, "q_ref", q)

    @property
    def npoints(self) -> int:
        return self.resolution ** self.dim

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return (self.resolution,) * self.dim

    @property
    def cell_volume(self) -> float:
        return (PERIOD / self.resolution) ** self.dim

    def axis_coords(self) -> np.ndarray:
        """Grid coordinates along one axis: 2*pi*k/N, k = 0..N-1."""
        return _axis_coords(self.resolution)

    def grid_points(self) -> np.ndarray:
        """All grid points, shape (dim, N**dim), row-major (C) order."""
        return _grid_points(self.dim, self.resolution)


@functools.lru_cache(maxsize=None)
def _axis_coords(n: int) -> np.ndarray:
    x = PERIOD * np.arange(n) / n
    x.flags.writeable = False
    return x

@functools.lru_cache(maxsize=8)
def _grid_points(dim: int, n: int) -> np.ndarray:
    axes = np.meshgrid(*(_axis_coords(n),) * dim, indexing="ij")
    pts = np.stack([a.reshape(-1) for a in axes])
    pts.flags.writeable = False
    return pts


@dataclass(frozen=True)
class Point:
    """A point on a torus; coordinates are reduced mod 2*pi."""

    coords: tuple[float, ...] = field()

    def __post_init__(self):
        reduced = tuple(float(np.mod(c, PERIOD)) for c in self.coords)
        object.__setattr__(self, "coords", reduced)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)


def make_chart(dim: int, resolution: int, q_ref=None) -> Chart:
    return Chart(dim, resolution, None if q_ref is None else tuple(q_ref))


def loop_samples(chart: Chart, axis: int, n: int) -> np.ndarray:
    """Points along the coordinate circle through the origin in direction `axis`.

    Returns an (n, dim) array whose axis-th coordinate runs through 2*pi*k/n,
    k = 0..n-1, with all other coordinates zero.  Axes are 1-based.
    """
    if not 1 <= axis <= chart.dim:
        raise BadAxis(f"axis must be in 1..{chart.dim}, got {axis}")
    if n < 16:
        raise SampleCountMismatch(f"need at least 16 loop samples, got {n}")
    pts = np.zeros((n, chart.dim))
    pts[:, axis - 1] = PERIOD * np.arange(n) / n
    return pts


def integrate_periodic(chart: Chart, samples: np.ndarray) -> complex | float:
    """Trapezoidal quadrature on the periodic grid or on a single loop.

    Accepts samples over the full grid (shape (N,)*dim or flat N**dim) or
    over one coordinate circle (any other 1-D length n).  Spectrally
    accurate for smooth integrands; exact for trigonometric polynomials of
    degree below the Nyquist limit.
    """
    a = np.asarray(samples)
    if a.shape == chart.grid_shape or (a.ndim == 1 and a.size == chart.npoints):
        return a.sum() * chart.cell_volume
    if a.ndim == 1 and a.size >= 2:
        return a.sum() * (PERIOD / a.size)
    raise SampleCountMismatch(
        f"expected {chart.grid_shape} grid samples or a 1-D loop, got shape {a.shape}"
    )


# -- spectral helpers on the periodic grid -----------------------------------

def _wavenumbers(n: int) -> np.ndarray:
    """Integer wavenumbers for derivative multipliers; Nyquist mode zeroed."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return k


def spectral_derivative(values: np.ndarray, axis: int) -> np.ndarray:
    """d/dx along `axis` (0-based) of values sampled on the periodic grid."""
    n = values.shape[axis]
    k = _wavenumbers(n)
    shape = [1] * values.ndim
    shape[axis] = n
    vhat = np.fft.fft(values, axis=axis)
    return np.fft.ifft(1j * k.reshape(shape) * vhat, axis=axis)


def trig_resample(values: np.ndarray, n: int) -> np.ndarray:
    """Resample a periodic sequence (leading axis) to n points by zero padding
    of the spectrum.  Exact for band-limited data."""
    m = values.shape[0]
    if n == m:
        return values.copy()
    vhat = np.fft.fft(values, axis=0)
    out = np.zeros((n,) + values.shape[1:], dtype=complex)
    half = m // 2
    if n > m:
        out[:half] = vhat[:half]
        out[-(m - half):] = vhat[half:]
        if m % 2 == 0:
            # split the Nyquist bin symmetrically
            out[half] = 0.5 * vhat[half]
            out[n - half] += 0.5 * vhat[half]
    else:
        hn = n // 2
        out[:hn] = vhat[:hn]
        out[-(n - hn):] = vhat[-(n - hn):]
    return np.fft.ifft(out, axis=0) * (n / m)


def fourier_interpolate(values: np.ndarray, chart: Chart, xs: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of grid samples at points xs.

    values: shape (N,)*dim (+ trailing component axes); xs: (dim, K).
    Returns shape (K,) + trailing.  O(K * N**dim); intended for small K.
    """
    dim = chart.dim
    grid_axes = values.shape[:dim]
    if grid_axes != chart.grid_shape:
        raise SampleCountMismatch(f"expected leading shape {chart.grid_shape}, got {grid_axes}")
    coeff = np.fft.fftn(values, axes=tuple(range(dim))) / chart.npoints
    k1 = np.fft.fftfreq(chart.resolution, d=1.0 / chart.resolution)
    kgrid = np.stack([a.reshape(-1) for a in np.meshgrid(*(k1,) * dim, indexing="ij")])
    phases = np.exp(1j * (xs.T @ kgrid))        # (K, N**dim)
    flat = coeff.reshape(chart.npoints, -1)
    out = phases @ flat
    return out.reshape((xs.shape[1],) + values.shape[dim:])

"""The standard basis of Hermitian 2x2 matrices and the Minkowski matrix.

tr(s^j s^k) = 2 delta^{jk} for all four basis elements, which makes
coefficient extraction a trace pairing throughout the package.
"""

import numpy as np

S1 = np.array([[0, 1], [1, 0]], dtype=complex)
S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
S3 = np.array([[1, 0], [0, -1]], dtype=complex)
S4 = np.eye(2, dtype=complex)

S_UPPER = np.stack([S1, S2, S3, S4])
S_UPPER.flags.writeable = False

ETA = np.diag([1.0, 1.0, 1.0, -1.0])
ETA.flags.writeable = False


def pauli_basis(dim: int) -> np.ndarray:
    """s^1..s^3 in 3D; s^1..s^4 in 4D."""
    return S_UPPER[:dim] if dim == 3 else S_UPPER

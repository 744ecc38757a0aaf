"""Exact 4x4 Dirac/Pauli matrix algebra.

Standard representation: alpha_k has the Pauli matrix sigma_k on the
off-diagonal 2x2 blocks, beta = diag(I2, -I2), gamma5 = -i a1 a2 a3 has
I2 off-diagonal blocks.  All matrices here have integer-valued entries
(up to factors of i), so the algebraic identities hold exactly in
floating point.
"""

import numpy as np

I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)

SIGMA = np.stack([
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
])

I4 = np.eye(4, dtype=complex)


def _block(a, b, c, d):
    return np.block([[a, b], [c, d]])


ALPHA = np.stack([_block(_Z2, s, s, _Z2) for s in SIGMA])
BETA = _block(I2, _Z2, _Z2, -I2)
GAMMA5 = -1j * ALPHA[0] @ ALPHA[1] @ ALPHA[2]

# elementary projectors (I +- beta)/2, used by the projected coupling
P_PLUS = 0.5 * (I4 + BETA)
P_MINUS = 0.5 * (I4 - BETA)

_C_MATRIX = 1j * BETA @ ALPHA[1]   # charge conjugation acts as f -> _C_MATRIX @ conj(f)
_T_MATRIX = GAMMA5 @ BETA


def dirac_matrices():
    """Return (alpha1, alpha2, alpha3, beta, gamma5) in the standard representation."""
    return ALPHA[0], ALPHA[1], ALPHA[2], BETA, GAMMA5


def alpha_dot(v):
    """Contraction sum_k v_k alpha_k for a (possibly complex) 3-vector v.

    Vectorized: v may have shape (..., 3); the result has shape (..., 4, 4).
    """
    v = np.asarray(v)
    return np.einsum('...k,kab->...ab', v.astype(complex), ALPHA)


def symmetry_transform(kind, f, normal=None):
    """Apply a discrete symmetry to a spinor value (or array of values).

    kind is "charge_conjugation" (antilinear, f -> i beta alpha2 conj(f),
    squares to +1) or "t_transform" (linear, f -> gamma5 beta f, squares
    to -1).  The normal argument is accepted for interface uniformity with
    surface-dependent transforms; neither transform uses it.
    """
    f = np.asarray(f, dtype=complex)
    if kind == "charge_conjugation":
        return np.einsum('ab,...b->...a', _C_MATRIX, np.conj(f))
    if kind == "t_transform":
        return np.einsum('ab,...b->...a', _T_MATRIX, f)
    raise ValueError(f"unknown symmetry kind: {kind!r}")


def charge_conjugation_matrix():
    """The linear factor of the (antilinear) charge conjugation.

    C(f) = M conj(f) with M the returned matrix.  Exposed for discrete
    operator-intertwining checks; C itself is never a matrix.
    """
    return _C_MATRIX.copy()


def t_transform_matrix():
    return _T_MATRIX.copy()

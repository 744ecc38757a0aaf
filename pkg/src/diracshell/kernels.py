"""Fundamental solutions of the free Dirac and Yukawa operators.

The spectral parameter z lives in C minus the rays (-inf,-m] u [m,inf).
The square root k = sqrt(z^2 - m^2) is taken on the branch with
Im k > 0; for z in the real gap (-m, m) this forces k = i sqrt(m^2-z^2),
which differs from the principal branch on part of the plane, so the
case split is explicit rather than delegated to numpy.
"""

from dataclasses import dataclass

import numpy as np

from .clifford import ALPHA, BETA, I4, alpha_dot


@dataclass(frozen=True)
class SpectralParameter:
    """Energy z and mass m > 0 with z off the essential-spectrum rays."""

    z: complex
    m: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("mass m must be positive")
        z = complex(self.z)
        if z.imag == 0.0 and abs(z.real) >= self.m:
            raise ValueError(
                f"z={z} lies on (-inf,-m] u [m,inf); no branch of sqrt(z^2-m^2) is chosen there"
            )

    @property
    def k(self):
        return sqrt_branch(self)


def sqrt_branch(p):
    """k = sqrt(z^2 - m^2) with Im k > 0 (k = i sqrt(m^2-z^2) on the real gap)."""
    z, m = complex(p.z), p.m
    if z.imag == 0.0:
        if abs(z.real) >= m:
            raise ValueError("z on the excluded rays")
        return 1j * np.sqrt(m * m - z.real * z.real)
    k = np.sqrt(z * z - m * m + 0j)
    return k if k.imag > 0 else -k


def phi_z(p, x):
    """Dirac fundamental-solution matrix phi^z(x), x != 0.

    Vectorized over leading axes of x (shape (..., 3) -> (..., 4, 4)).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("phi_z is singular at x = 0")
    k = sqrt_branch(p)
    psi = np.exp(1j * k * r) / (4 * np.pi * r)
    coef = psi * 1j * (1 - 1j * k * r) / r**2
    out = psi[..., None, None] * (p.z * I4 + p.m * BETA)
    out = out + coef[..., None, None] * alpha_dot(x)
    return out


def psi_z(p, x):
    """Scalar Yukawa/Helmholtz fundamental solution e^{ikr}/(4 pi r), x != 0."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("psi_z is singular at x = 0")
    k = sqrt_branch(p)
    return np.exp(1j * k * r) / (4 * np.pi * r)


def k_a_kernel(a, m, x, y, n_x, n_y):
    """Regularized anticommutator kernel K_a(x, y) for a in the gap.

    K_a(x,y) = phi^a(x-y) (alpha.(N(y)-N(x)))
               - e^{-tau r}/(2 i pi r^3) (1 + tau r) (N(x).(x-y)) I4,
    tau = sqrt(m^2-a^2).  Vanishes identically when both points sit on a
    common flat patch with equal normals.
    """
    if not (-m < a < m):
        raise ValueError("a must lie in the gap (-m, m)")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    d = x - y
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("K_a is singular at x = y")
    tau = np.sqrt(m * m - a * a)
    p = SpectralParameter(a, m)
    first = phi_z(p, d) @ alpha_dot(np.asarray(n_y, float) - np.asarray(n_x, float))
    nd = np.sum(np.asarray(n_x, float) * d, axis=-1)
    scal = -np.exp(-tau * r) / (2j * np.pi * r**3) * (1 + tau * r) * nd
    return first + scal[..., None, None] * I4


def dirac_apply_fd(field, z, m, x, h):
    """Centered-difference evaluation of (-i alpha.grad + m beta - z) field at x.

    field maps a point array (..., 3) to spinor values (..., 4).  Truncation
    error is O(h^2) for smooth fields, which is what the residual checks
    exercise.
    """
    x = np.asarray(x, dtype=float)
    grad = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        grad.append((field(x + e) - field(x - e)) / (2 * h))
    out = np.zeros(field(x).shape, dtype=complex)
    for j in range(3):
        out = out + -1j * np.einsum('ab,...b->...a', ALPHA[j], grad[j])
    out = out + np.einsum('ab,...b->...a', m * BETA - z * I4, field(x))
    return out


def laplace_apply_fd(field, z, m, x, h):
    """Centered-difference (Delta + m^2 - z^2) field at x, componentwise."""
    x = np.asarray(x, dtype=float)
    f0 = field(x)
    out = (m * m - z * z) * f0
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        out = out + (field(x + e) - 2 * f0 + field(x - e)) / h**2
    return out

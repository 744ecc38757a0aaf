"""Closed-form engine for the flat interface R^2 x {0}.

Everything here is exact arithmetic on 4x4 matrices: the Fourier symbol
of the boundary operator, its explicit inverse, the scalar obstruction
C, the threshold polynomial P, and the gap classification of the
essential spectrum.  The flat normal is (0, 0, -1) (outward of the
upper region), so the normal coupling term enters as +eta*alpha3.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .boundary_ops import ElectroScalar
from .clifford import ALPHA, BETA, I4, alpha_dot

_FLAT_NORMAL = np.array([0.0, 0.0, -1.0])
_CRITICAL_TOL = 1e-9


class UnsupportedCouplingError(ValueError):
    """Classification not stated for this coupling region."""


@dataclass(frozen=True)
class SymbolPoint:
    a: float
    m: float
    kappa: ElectroScalar
    xi: np.ndarray

    def __post_init__(self):
        if not abs(self.a) < self.m:
            raise ValueError("a must lie in the gap (-m, m)")
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).reshape(2))


def _gamma(m, a, xi):
    xi3 = np.array([xi[0], xi[1], 0.0])
    return alpha_dot(xi3) + m * BETA + a * I4


def _mass_block(kappa):
    return kappa.mu * BETA + kappa.eta * alpha_dot(_FLAT_NORMAL)


def symbol_pi(s, branch="plus"):
    """Multiplier matrix of Lambda^a_{+/-} at momentum xi."""
    sgn = s.kappa.sgn
    om = np.sqrt(s.xi @ s.xi + s.m**2 - s.a**2)
    b = +1.0 if branch == "plus" else -1.0
    return (s.kappa.eps * I4 - b * _mass_block(s.kappa)) / sgn + b * _gamma(s.m, s.a, s.xi) / (2 * om)


def symbol_pi_plus(s):
    return symbol_pi(s, "plus")


def symbol_pi_minus(s):
    return symbol_pi(s, "minus")


def c_scalar(a, m, kappa, xi_norm):
    """Scalar (4-sgn)/4 + (eps a + mu m)/sqrt(|xi|^2+m^2-a^2) controlling invertibility."""
    if not abs(a) < m:
        raise ValueError("a must lie in the gap")
    om = np.sqrt(xi_norm**2 + m * m - a * a)
    return (4.0 - kappa.sgn) / 4.0 + (kappa.eps * a + kappa.mu * m) / om


def symbol_inverse(s, singular_tol=1e-12):
    """Explicit inverse of the symbol; raises when the scalar C vanishes.

    One closed form covers both the generic and the critical coupling:
    with q = (eps a + mu m)/omega and B = eps + mu beta + eta (alpha.N),
    the inverse is C^{-1} [ (1+q) B - B Gamma B / (2 omega) ].
    """
    sgn = s.kappa.sgn
    om = np.sqrt(s.xi @ s.xi + s.m**2 - s.a**2)
    cval = c_scalar(s.a, s.m, s.kappa, np.linalg.norm(s.xi))
    if abs(cval) < singular_tol:
        raise ArithmeticError(
            f"symbol singular: C = {cval:.3e} at a={s.a}, |xi|={np.linalg.norm(s.xi):.6g}")
    q = (s.kappa.eps * s.a + s.kappa.mu * s.m) / om
    b = s.kappa.eps * I4 + _mass_block(s.kappa)
    g = _gamma(s.m, s.a, s.xi)
    return ((1 + q) * b - b @ g @ b / (2 * om)) / cval


def p_poly(a, m, kappa):
    """Threshold polynomial P: C = 0 at |xi|^2 = P(a) (under the sign condition)."""
    s4 = kappa.sgn - 4.0
    if s4 == 0.0:
        raise ValueError("P(a) undefined at the critical coupling sgn = 4")
    A = (s4 * s4 + 16 * kappa.eps**2) / (s4 * s4)
    B = 32 * kappa.eps * kappa.mu * m / (s4 * s4)
    C0 = -(s4 * s4 - 16 * kappa.mu**2) / (s4 * s4) * m * m
    return A * a * a + B * a + C0


def _p_coefficients(m, kappa):
    s4 = kappa.sgn - 4.0
    A = (s4 * s4 + 16 * kappa.eps**2) / (s4 * s4)
    B = 32 * kappa.eps * kappa.mu * m / (s4 * s4)
    C0 = -(s4 * s4 - 16 * kappa.mu**2) / (s4 * s4) * m * m
    return A, B, C0


def gap_thresholds(m, kappa):
    """Roots of P filtered nowhere: the raw threshold values a_-, a_+ (or a_*).

    Returns {"a_plus": .., "a_minus": ..} for distinct roots and
    {"a_star": ..} for the double root (eta = 0, sgn = -4).  Values lie
    in [-m, m] whenever real.
    """
    sgn = kappa.sgn
    if abs(sgn - 4.0) < _CRITICAL_TOL:
        raise ValueError("critical coupling: thresholds degenerate to the embedded point")
    s4 = sgn - 4.0
    den = s4 * s4 + 16 * kappa.eps**2
    rad = (sgn + 4.0) ** 2 + 16 * kappa.eta**2
    if kappa.eta == 0.0 and abs(sgn + 4.0) < _CRITICAL_TOL:
        return {"a_star": -16 * kappa.eps * kappa.mu * m / den}
    root = abs(s4) * np.sqrt(rad)
    return {"a_plus": m * (-16 * kappa.eps * kappa.mu + root) / den,
            "a_minus": m * (-16 * kappa.eps * kappa.mu - root) / den}


# ---------------------------------------------------------------------------
# spectrum sets

@dataclass
class SpectrumSet:
    rays: List[Tuple[float, float]] = field(default_factory=list)
    points: List[Tuple[float, str]] = field(default_factory=list)

    def normalized(self):
        rays = sorted((lo, hi) for lo, hi in self.rays)
        merged = []
        for lo, hi in rays:
            if merged and lo <= merged[-1][1] + 1e-15:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        pts = sorted(set(self.points))
        pts = [(v, t) for v, t in pts if not any(lo <= v <= hi for lo, hi in merged)]
        return SpectrumSet(rays=merged, points=pts)

    def interior_endpoints(self, m):
        """Finite ray endpoints strictly inside the gap (-m, m)."""
        out = []
        for lo, hi in self.rays:
            for v in (lo, hi):
                if np.isfinite(v) and abs(v) < m * (1 - 1e-12):
                    out.append(v)
        return sorted(out)

    def to_text(self):
        parts = []
        items = []
        for lo, hi in self.rays:
            items.append((lo if np.isfinite(lo) else -np.inf, ("ray", lo, hi)))
        for v, tag in self.points:
            items.append((v, ("pt", v, tag)))
        items.sort(key=lambda it: (it[0], 0 if it[1][0] == "ray" else 1))
        for _, item in items:
            if item[0] == "ray":
                lo, hi = item[1], item[2]
                if lo == -np.inf and hi == np.inf:
                    return "R"
                left = "(-inf," if lo == -np.inf else "[%.12g," % lo
                right = "inf)" if hi == np.inf else "%.12g]" % hi
                parts.append(left + right)
            else:
                parts.append("{%.12g:%s}" % (item[1], item[2]))
        return " U ".join(parts)

    @staticmethod
    def from_text(text):
        text = text.strip()
        if text == "R":
            return SpectrumSet(rays=[(-np.inf, np.inf)])
        out = SpectrumSet()
        for part in text.split(" U "):
            part = part.strip()
            if part.startswith("{"):
                body = part[1:-1]
                val, tag = body.split(":")
                out.points.append((float(val), tag))
            else:
                lo_s, hi_s = part.split(",")
                lo = -np.inf if lo_s == "(-inf" else float(lo_s[1:])
                hi = np.inf if hi_s == "inf)" else float(hi_s[:-1])
                out.rays.append((lo, hi))
        return out


def _intersect(iv1, iv2):
    lo = max(iv1[0], iv2[0])
    hi = min(iv1[1], iv2[1])
    return (lo, hi) if lo < hi else None


def _gap_singular_intervals(m, kappa):
    """Open intervals of the gap where the symbol is singular for some xi.

    The criterion is the sign condition 4(eps a + mu m)/(sgn-4) > 0
    together with P(a) >= 0; its closure contributes to the essential
    spectrum.
    """
    eps, mu = kappa.eps, kappa.mu
    s4 = kappa.sgn - 4.0
    gap = (-m, m)

    # sign-condition region
    if eps == 0.0:
        cond = [gap] if mu * s4 > 0 else []
    else:
        a_c = -mu * m / eps
        want_pos = s4 > 0
        right = (eps > 0) == want_pos   # region is {a > a_c} when True
        cond = [(a_c, np.inf)] if right else [(-np.inf, a_c)]
        cond = [iv for iv in (_intersect(cond[0], gap),) if iv]

    # P >= 0 region
    A, B, C0 = _p_coefficients(m, kappa)
    disc = B * B - 4 * A * C0
    if disc <= 0:
        pos = [(-np.inf, np.inf)]
    else:
        r1 = (-B - np.sqrt(disc)) / (2 * A)
        r2 = (-B + np.sqrt(disc)) / (2 * A)
        pos = [(-np.inf, r1), (r2, np.inf)]

    out = []
    for c_iv in cond:
        for p_iv in pos:
            iv = _intersect(c_iv, p_iv)
            if iv:
                out.append(_intersect(iv, gap))
    return [iv for iv in out if iv]


def essential_spectrum(m, kappa, nu=0.0):
    """Essential spectrum of the shell-coupled operator over a deformed plane.

    The classification is nu-independent; nu only selects the tag of the
    embedded critical point (an eigenvalue of infinite multiplicity at
    nu = 0, embedded essential spectrum otherwise).  Couplings with
    eta != 0 and sgn < 0 are not classified.
    """
    if not isinstance(kappa, ElectroScalar):
        raise TypeError("essential-spectrum classification requires an ElectroScalar coupling")
    if abs(kappa.sgn - 4.0) < _CRITICAL_TOL:
        tag = "eigenvalue_infinite_multiplicity" if nu == 0.0 else "embedded"
        point = -m * kappa.mu / kappa.eps
        return SpectrumSet(rays=[(-np.inf, -m), (m, np.inf)],
                           points=[(point, tag)]).normalized()
    if kappa.eta != 0.0 and kappa.sgn < 0:
        raise UnsupportedCouplingError(
            "essential-spectrum classification for eta != 0 is only stated for sgn(kappa) > 0")
    rays = [(-np.inf, -m), (m, np.inf)]
    for lo, hi in _gap_singular_intervals(m, kappa):
        rays.append((lo, hi))
    return SpectrumSet(rays=rays).normalized()


# ---------------------------------------------------------------------------
# critical point machinery

def _require_critical(kappa):
    if abs(kappa.sgn - 4.0) >= _CRITICAL_TOL:
        raise ValueError("operation requires the critical coupling sgn(kappa) = 4")


def theta1(xi_norm, m, kappa):
    """Nontrivial eigenvalue branch of the weighted symbol at the critical point.

    theta1 = <xi> (a/sqrt(|xi|^2+m^2-a^2) + eps/2) with a = -m mu/eps;
    its range over xi reports the spectrum endpoint eps/2 - mu/sqrt(eps^2-mu^2)
    for eps > 0.
    """
    _require_critical(kappa)
    a = -m * kappa.mu / kappa.eps
    om = np.sqrt(xi_norm**2 + m * m - a * a)
    return np.sqrt(1 + xi_norm**2) * (a / om + kappa.eps / 2.0)


def gamma_decay(xi, m, a, side):
    """Gamma_{+i}/Gamma_{-i}: Dirac symbol at complex momentum (xi, +-i omega)."""
    om = np.sqrt(xi[0]**2 + xi[1]**2 + m * m - a * a)
    vec = np.array([xi[0], xi[1], side * 1j * om])
    return alpha_dot(vec) + m * BETA + a * I4


def matching_matrix(kappa):
    """Lower-trace coefficient: psi_hat_- = Q psi_hat_+ fulfils the transmission condition.

    Q = -((eta + 2i)/(eps^2 - mu^2)) (eps + mu beta) alpha3.
    """
    _require_critical(kappa)
    return (-(kappa.eta + 2j) / (kappa.eps**2 - kappa.mu**2)
            * (kappa.eps * I4 + kappa.mu * BETA) @ ALPHA[2])


def flat_eigenfunction(m, kappa, psi_hat, points):
    """Eigenfunction samples at the embedded critical energy a = -m mu/eps.

    psi_hat is a list of (xi, coeff) atoms: a compactly supported spectral
    profile on finitely many momenta, coeff in C^4.  For x3 >= 0 the field
    is (1/2pi) sum_j e^{i x.xi_j} e^{-x3 w_j} Gamma_{+i}(xi_j) coeff_j;
    below the interface the matched profile Q coeff_j and Gamma_{-i} enter,
    which enforces the transmission condition by construction.
    """
    _require_critical(kappa)
    a = -m * kappa.mu / kappa.eps
    q = matching_matrix(kappa)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = np.zeros((len(pts), 4), dtype=complex)
    for xi, coeff in psi_hat:
        xi = np.asarray(xi, dtype=float).reshape(2)
        coeff = np.asarray(coeff, dtype=complex).reshape(4)
        om = np.sqrt(xi @ xi + m * m - a * a)
        gp = gamma_decay(xi, m, a, +1) @ coeff
        gm = gamma_decay(xi, m, a, -1) @ (q @ coeff)
        phase = np.exp(1j * (pts[:, 0] * xi[0] + pts[:, 1] * xi[1]))
        upper = pts[:, 2] >= 0
        vals[upper] += (phase[upper] * np.exp(-pts[upper, 2] * om))[:, None] * gp[None, :]
        vals[~upper] += (phase[~upper] * np.exp(pts[~upper, 2] * om))[:, None] * gm[None, :]
    vals /= 2 * np.pi
    return vals if np.asarray(points).ndim > 1 else vals[0]


def critical_energy(m, kappa):
    _require_critical(kappa)
    return -m * kappa.mu / kappa.eps

"""Gap eigenvalue search, Krein-resolvent evaluation and confinement checks.

The scan assembles Lambda^a_+ on a grid of gap energies and tracks its
smallest singular value; eigenvalue candidates are local minima below
10x the mesh tolerance, refined by golden-section search.  Eigenfunction
reconstruction returns the minimal right singular vector together with
an off-surface sampler of the layer potential.  The resolvent of the
coupled operator is evaluated through the boundary correction
phi^z - Phi^z (Lambda^z_+)^{-1} (trace of the free solution).
"""

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .boundary_ops import (AnomalousMagnetic, ElectroScalar, Projected,
                           alpha_normal_blocks, assemble_cauchy, assemble_lambda,
                           block_left, constant_blocks, density_to_vector,
                           evaluate_field, vector_to_density)
from .clifford import BETA, GAMMA5, I4, alpha_dot
from .kernels import SpectralParameter, phi_z
from .surface import mesh_tolerance

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class ScanReport:
    a_grid: np.ndarray
    sigma_min: np.ndarray
    candidates: List[dict]
    mesh_tol: float
    special_points: List[dict] = field(default_factory=list)

    def to_csv(self, path):
        cand = {round(c["a"], 12) for c in self.candidates}
        near = np.zeros(len(self.a_grid), dtype=int)
        for j, a in enumerate(self.a_grid):
            near[j] = int(any(abs(a - c["a"]) <= (self.a_grid[1] - self.a_grid[0] if len(self.a_grid) > 1 else 0)
                              for c in self.candidates))
        with open(path, "w") as f:
            f.write("a,sigma_min,candidate_flag\n")
            for a, s, fl in zip(self.a_grid, self.sigma_min, near):
                f.write("%.17g,%.17g,%d\n" % (a, s, fl))

    def to_json(self, path=None):
        payload = {
            "schema_version": 1,
            "mesh_tol": self.mesh_tol,
            "candidates": self.candidates,
            "special_points": self.special_points,
        }
        text = json.dumps(payload, indent=2, sort_keys=True)
        if path:
            with open(path, "w") as f:
                f.write(text)
        return text


@dataclass
class ResolventSample:
    z: complex
    source_point: np.ndarray
    eval_point: np.ndarray
    value: np.ndarray


def _sigma_min(mat):
    return float(np.linalg.svd(mat, compute_uv=False)[-1])


def _lambda_matrix(mesh, a, m, coupling):
    return assemble_lambda(mesh, SpectralParameter(a, m), coupling, "plus").matrix


def birman_schwinger_scan(mesh, m, coupling, grid, refine=True, refine_tol_factor=1e-8):
    """Smallest-singular-value scan of Lambda^a_+ over a grid of gap energies.

    Local minima below 10x the mesh tolerance are refined by golden-section
    minimization to a bracket of width refine_tol_factor * m.  For the
    electrostatic family with eps != 0 the energies +-m mu/eps are reported
    separately (at the critical coupling the minus point is essential
    spectrum, not an isolated eigenvalue).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty scan grid")
    if np.any(np.abs(grid) >= m):
        raise ValueError("scan grid must lie inside the gap (-m, m)")
    grid = np.sort(grid)
    tol = mesh_tolerance(mesh)

    special = []
    if isinstance(coupling, ElectroScalar) and coupling.eps != 0.0:
        for sgn_pt, lbl in ((-1, "minus_m_mu_over_eps"), (+1, "plus_m_mu_over_eps")):
            pt = sgn_pt * (-m * coupling.mu / coupling.eps) if sgn_pt < 0 else m * coupling.mu / coupling.eps
            if abs(pt) < m:
                special.append({"a": float(pt), "label": lbl,
                                "critical": bool(abs(coupling.sgn - 4.0) < 1e-9)})

    sig = np.array([_sigma_min(_lambda_matrix(mesh, a, m, coupling)) for a in grid])

    candidates = []
    threshold = 10.0 * tol
    for j in range(len(grid)):
        left = sig[j - 1] if j > 0 else np.inf
        right = sig[j + 1] if j + 1 < len(grid) else np.inf
        if sig[j] < threshold and sig[j] <= left and sig[j] <= right:
            if any(abs(grid[j] - sp["a"]) < 2 * (grid[1] - grid[0] if len(grid) > 1 else m)
                   and sp["critical"] for sp in special):
                continue
            lo = grid[j - 1] if j > 0 else grid[j]
            hi = grid[j + 1] if j + 1 < len(grid) else grid[j]
            if refine and lo < hi:
                a_ref, s_ref = _golden_section(
                    lambda a: _sigma_min(_lambda_matrix(mesh, a, m, coupling)),
                    lo, hi, refine_tol_factor * m)
                candidates.append({"a": float(a_ref), "sigma": float(s_ref), "refined": True})
            else:
                candidates.append({"a": float(grid[j]), "sigma": float(sig[j]), "refined": False})
    if len(candidates) > 4 * mesh.n:
        raise RuntimeError("candidate list exceeds the spectral counting bound")
    return ScanReport(a_grid=grid, sigma_min=sig, candidates=candidates,
                      mesh_tol=tol, special_points=special)


def _golden_section(f, lo, hi, width):
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > width:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def eigenfunction_from_kernel(mesh, a, m, coupling):
    """Kernel density of Lambda^a_+ at a refined candidate plus a field sampler.

    Returns (g, sigma, sampler): g is the right singular vector of the
    smallest singular value reshaped to (n, 4); sampler(points) evaluates
    the reconstructed eigenfunction Phi^a[g] off the surface.
    """
    p = SpectralParameter(a, m)
    lam = assemble_lambda(mesh, p, coupling, "plus").matrix
    _, svals, vh = np.linalg.svd(lam)
    sigma = float(svals[-1])
    if sigma >= 10 * mesh_tolerance(mesh):
        raise ValueError(f"candidate not converged: sigma_min = {sigma:.3e}")
    g = vector_to_density(vh[-1].conj(), mesh.n)

    def sampler(points):
        return evaluate_field(mesh, g, p, points)

    return g, sigma, sampler


def boundary_traces(mesh, g, p):
    """One-sided traces (t+ , t-) of Phi^z[g] from the Cauchy matrix and the jump."""
    cmat = assemble_cauchy(mesh, p).matrix
    aN = alpha_normal_blocks(mesh)
    gv = density_to_vector(g)
    base = cmat @ gv
    jump = 0.5j * block_left(aN, gv.reshape(-1, 1)).reshape(-1)
    return (vector_to_density(base - jump, mesh.n),
            vector_to_density(base + jump, mesh.n))


def krein_apply(mesh, z, m, coupling, source_point, polarization=None, eval_points=None):
    """Resolvent of the coupled operator applied to a point source.

    The free term phi^z(x - source) e is corrected by the layer potential
    of (Lambda^z_+)^{-1} applied to the trace of the free solution.  z must
    be nonreal; eval_points defaults to none, in which case a sampler is
    returned instead of ResolventSample values.
    """
    if complex(z).imag == 0.0:
        raise ValueError("resolvent application needs Im z != 0")
    p = SpectralParameter(z, m)
    pol = np.zeros(4, dtype=complex)
    pol[0] = 1.0
    if polarization is not None:
        pol = np.asarray(polarization, dtype=complex).reshape(4)
    source_point = np.asarray(source_point, dtype=float)
    lam = assemble_lambda(mesh, p, coupling, "plus").matrix
    trace = phi_z(p, mesh.nodes - source_point[None, :]) @ pol
    try:
        q = np.linalg.solve(lam, density_to_vector(trace))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"discrete Lambda^z_+ solve failed at z={z}: {exc}") from exc
    q = vector_to_density(q, mesh.n)

    def sampler(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        free = phi_z(p, pts - source_point[None, :]) @ pol
        corr = evaluate_field(mesh, q, p, pts)
        out = free - corr
        return out if np.asarray(points).ndim > 1 else out[0]

    if eval_points is None:
        return sampler
    pts = np.atleast_2d(np.asarray(eval_points, dtype=float))
    vals = sampler(pts)
    return [ResolventSample(z=z, source_point=source_point, eval_point=pt, value=v)
            for pt, v in zip(pts, vals)]


_CONFINEMENT_SOURCE = np.array([0.1, -0.05, 0.3])


def _is_confining(coupling):
    if isinstance(coupling, AnomalousMagnetic):
        return coupling.zeta == 0.0 and abs(coupling.upsilon) == 2.0
    if isinstance(coupling, ElectroScalar):
        return coupling.eta == 0.0 and abs(coupling.sgn + 4.0) < 1e-12
    return False


def confinement_leakage(mesh, m, coupling, z=None, require_confining=True,
                        probe_distance=0.5, n_probes=24, seed=3):
    """Exterior-to-free field ratio for a point source inside the sphere.

    Impenetrable couplings (eps^2 - mu^2 = -4 with eta = 0, or zeta = 0 and
    upsilon = +-2) predict a ratio that vanishes under mesh refinement; the
    returned number is max_p |field(p)| / max_p |free(p)| over a fixed
    pseudo-random probe set outside the surface.
    """
    if mesh.kind != "sphere":
        raise ValueError("leakage experiment requires a closed (sphere) surface")
    if require_confining and not _is_confining(coupling):
        raise ValueError("coupling is not on the confinement locus")
    if z is None:
        z = 0.9j * m
    src = _CONFINEMENT_SOURCE * mesh.radius
    sampler = krein_apply(mesh, z, m, coupling, src)
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_probes, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    probes = dirs * (mesh.radius + max(probe_distance * mesh.radius, mesh.h))
    total = sampler(probes)
    p = SpectralParameter(z, m)
    free = phi_z(p, probes - src[None, :]) @ np.array([1, 0, 0, 0], dtype=complex)
    return float(np.abs(total).max() / np.abs(free).max())


@dataclass
class TransmissionReport:
    residual: float
    zigzag_plus: Optional[float] = None
    zigzag_minus: Optional[float] = None


def transmission_residual(mesh, trace_plus, trace_minus, coupling):
    """Weighted L^2 norm of the transmission condition for the given traces.

    Electrostatic family: (1/2)(eps + mu beta + eta alpha.N)(t+ + t-)
    + i alpha.N (t+ - t-).  gamma5/anomalous family: the corresponding
    one-sided combination.  For zeta = 0, upsilon = +-2 the projector
    defects P_{-s} t+ and P_{+s} t- are reported as well.
    """
    tp = np.asarray(trace_plus, dtype=complex).reshape(mesh.n, 4)
    tm = np.asarray(trace_minus, dtype=complex).reshape(mesh.n, 4)
    if tp.shape != tm.shape:
        raise ValueError("trace length mismatch")
    aN = alpha_normal_blocks(mesh)

    def wnorm(vals):
        return float(np.sqrt(np.sum(mesh.weights[:, None] * np.abs(vals) ** 2)))

    if isinstance(coupling, (ElectroScalar, Projected)):
        if isinstance(coupling, Projected):
            eps, mu, eta = coupling.eps, coupling.sign * coupling.eps, 0.0
        else:
            eps, mu, eta = coupling.eps, coupling.mu, coupling.eta
        pot = eps * constant_blocks(I4, mesh.n) + mu * constant_blocks(BETA, mesh.n) + eta * aN
        comb = 0.5 * np.einsum('iab,ib->ia', pot, tp + tm) + 1j * np.einsum('iab,ib->ia', aN, tp - tm)
        return TransmissionReport(residual=wnorm(comb))

    zeta, ups = coupling.zeta, coupling.upsilon
    pot = zeta * constant_blocks(GAMMA5, mesh.n) + 1j * ups * np.einsum('ab,ibc->iac', BETA, aN)
    lhs = np.einsum('iab,ib->ia', 0.5 * pot + 1j * aN, tp)
    rhs = -np.einsum('iab,ib->ia', 0.5 * pot - 1j * aN, tm)
    rep = TransmissionReport(residual=wnorm(lhs - rhs))
    if zeta == 0.0 and abs(ups) == 2.0:
        p_min = 0.5 * (I4 - (ups / 2.0) * BETA)
        p_plus = 0.5 * (I4 + (ups / 2.0) * BETA)
        rep.zigzag_plus = wnorm(tp @ p_min.T)
        rep.zigzag_minus = wnorm(tm @ p_plus.T)
    return rep


def charge_conjugation_mirror_check(mesh, a, m, kappa):
    """Discrete intertwining Lambda^a_{+,k} C = -C conj(Lambda^{-a}_{+,k~}).

    Both operators are assembled on the same mesh; C acts nodewise as the
    antilinear charge conjugation.  Returns the max-entry defect, which is
    at roundoff level for the Nystrom matrices.
    """
    from .clifford import charge_conjugation_matrix
    cc = charge_conjugation_matrix()
    n = mesh.n
    lam1 = _lambda_matrix(mesh, a, m, kappa)
    lam2 = _lambda_matrix(mesh, -a, m, kappa.conjugated())
    cc_blocks = constant_blocks(cc, n)
    lhs = np.einsum('Jib,iba->Jia', lam1.reshape(-1, n, 4), cc_blocks).reshape(lam1.shape)
    rhs = -block_left(cc_blocks, np.conj(lam2))
    return float(np.abs(lhs - rhs).max())

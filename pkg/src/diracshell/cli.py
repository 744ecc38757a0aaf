"""Batch command-line front end.

Configuration is a flat key=value text file, overridable by flags; every
run emits a JSON summary (and CSV for array data) stamped with
schema_version, and prints the canonical spectrum text for the symbol
workflows.  Exit codes: 0 success, 1 identity residual above tolerance,
2 config error, 3 invalid coupling, 4 unsupported classification region,
5 runtime/conditioning failure.
"""

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .boundary_ops import AnomalousMagnetic, ElectroScalar, Projected, operator_identities
from .flat_symbol import SpectrumSet, UnsupportedCouplingError, essential_spectrum
from .spectral import birman_schwinger_scan, confinement_leakage
from .surface import BumpProfile, default_truncation_radius, make_graph, make_sphere, mesh_tolerance

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_IDENTITY_FAIL = 1
EXIT_CONFIG = 2
EXIT_COUPLING = 3
EXIT_UNSUPPORTED = 4
EXIT_RUNTIME = 5


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    m: float = 1.0
    coupling: str = "es"          # es | am | projected
    eps: float = 0.0
    mu: float = 0.0
    eta: float = 0.0
    zeta: float = 0.0
    upsilon: float = 0.0
    proj_sign: int = 1
    critical: bool = False        # acknowledge sgn(kappa) = 4 workflows
    surface: str = "sphere"       # sphere | graph
    radius: float = 1.0
    n: int = 512
    nu: float = 0.0
    bump_radius: float = 1.0
    bump_amplitude: float = 0.0
    r_trunc: float = 0.0          # 0 -> decay-rule default
    grid_count: int = 25
    grid_lo: float = -0.9
    grid_hi: float = 0.9
    z_re: float = 0.0
    z_im: float = 0.9
    a: float = 0.0                # identity-suite energy
    tol_coeff: float = 0.32
    out_prefix: str = "run"

    def coupling_object(self):
        if self.coupling == "es":
            if self.eps**2 - self.mu**2 - self.eta**2 == 0.0:
                raise ConfigError("sgn(kappa) = eps^2 - mu^2 - eta^2 must be nonzero")
            return ElectroScalar(self.eps, self.mu, self.eta)
        if self.coupling == "am":
            if self.zeta**2 + self.upsilon**2 == 0.0:
                raise ConfigError("zeta^2 + upsilon^2 must be nonzero")
            return AnomalousMagnetic(self.zeta, self.upsilon)
        if self.coupling == "projected":
            return Projected(self.eps, self.proj_sign)
        raise ConfigError(f"unknown coupling variant {self.coupling!r}")

    def mesh(self):
        if self.surface == "sphere":
            return make_sphere(self.radius, self.n)
        if self.surface == "graph":
            bump = BumpProfile(self.bump_radius, self.bump_amplitude)
            rt = self.r_trunc
            if rt <= 0:
                a_max = max(abs(self.grid_lo), abs(self.grid_hi)) * self.m
                rt = default_truncation_radius(self.bump_radius, self.m, a_max)
            return make_graph(self.nu, bump, self.n, rt)
        raise ConfigError(f"unknown surface kind {self.surface!r}")


_BOOL_KEYS = {"critical"}
_INT_KEYS = {"n", "grid_count", "proj_sign"}
_STR_KEYS = {"command", "coupling", "surface", "out_prefix"}
_ALL_KEYS = {f.name for f in fields(RunConfig)}


def _coerce(key, raw):
    if key in _STR_KEYS:
        return raw
    if key in _BOOL_KEYS:
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ConfigError(f"bad boolean for {key}: {raw!r}")
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def parse_config(path=None, overrides=None):
    """Build a validated RunConfig from a key=value file plus flag overrides."""
    cfg = RunConfig()
    items = []
    if path is not None:
        with open(path) as f:
            for line_no, line in enumerate(f, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected key=value")
                key, raw = (s.strip() for s in line.split("=", 1))
                items.append((key, raw))
    for key, raw in items + list(overrides or []):
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, _coerce(key, raw))
    validate_config(cfg)
    return cfg


def serialize_config(cfg):
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            v = "true" if v else "false"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def validate_config(cfg):
    if cfg.command not in ("symbol", "spectrum", "scan", "confine", "identities"):
        raise ConfigError(f"missing or unknown command {cfg.command!r}")
    if not cfg.m > 0:
        raise ConfigError("mass m must be positive")
    cfg.coupling_object()
    if cfg.coupling == "es":
        sgn = cfg.eps**2 - cfg.mu**2 - cfg.eta**2
        if abs(sgn - 4.0) < 1e-9 and not cfg.critical and cfg.command in ("symbol", "spectrum", "scan"):
            raise ConfigError("critical coupling sgn(kappa)=4: pass critical=true to run the critical path")
    if cfg.command == "scan":
        if cfg.grid_count < 1:
            raise ConfigError("scan grid must be nonempty")
        if not (-cfg.m < cfg.grid_lo <= cfg.grid_hi < cfg.m):
            raise ConfigError("scan grid bounds must lie inside the gap")
    if cfg.surface == "sphere" and cfg.n < 8:
        raise ConfigError("sphere mesh needs n >= 8")
    if cfg.command == "confine" and cfg.z_im == 0.0:
        raise ConfigError("confinement run needs a nonreal z")


def _fmt(v):
    return float("%.12g" % v)


def _write_json(path, payload):
    payload = dict(payload)
    payload["schema_version"] = SCHEMA_VERSION
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def run(cfg):
    """Dispatch a validated RunConfig; returns the process exit status."""
    if cfg.command in ("symbol", "spectrum"):
        try:
            spec = essential_spectrum(cfg.m, cfg.coupling_object(), nu=cfg.nu)
        except UnsupportedCouplingError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_UNSUPPORTED
        text = spec.to_text()
        print(text)
        _write_json(cfg.out_prefix + "_spectrum.json", {
            "command": cfg.command,
            "m": _fmt(cfg.m),
            "kappa": [_fmt(cfg.eps), _fmt(cfg.mu), _fmt(cfg.eta)],
            "spectrum": text,
            "interior_endpoints": [_fmt(v) for v in spec.interior_endpoints(cfg.m)],
        })
        return EXIT_OK

    if cfg.command == "scan":
        mesh = cfg.mesh()
        grid = np.linspace(cfg.grid_lo, cfg.grid_hi, cfg.grid_count)
        report = birman_schwinger_scan(mesh, cfg.m, cfg.coupling_object(), grid)
        report.to_csv(cfg.out_prefix + "_scan.csv")
        _write_json(cfg.out_prefix + "_scan.json", {
            "command": "scan",
            "mesh": {"kind": mesh.kind, "n": mesh.n, "h": _fmt(mesh.h)},
            "mesh_tol": _fmt(report.mesh_tol),
            "candidates": [{"a": _fmt(c["a"]), "sigma": _fmt(c["sigma"]), "refined": c["refined"]}
                           for c in report.candidates],
            "special_points": report.special_points,
        })
        for c in report.candidates:
            print("candidate a=%.12g sigma=%.3e" % (c["a"], c["sigma"]))
        return EXIT_OK

    if cfg.command == "confine":
        mesh = cfg.mesh()
        z = complex(cfg.z_re, cfg.z_im) * cfg.m
        ratio = confinement_leakage(mesh, cfg.m, cfg.coupling_object(), z=z,
                                    require_confining=False)
        print("leakage_ratio=%.6g" % ratio)
        _write_json(cfg.out_prefix + "_confine.json", {
            "command": "confine",
            "mesh": {"kind": mesh.kind, "n": mesh.n, "h": _fmt(mesh.h)},
            "z": [_fmt(z.real), _fmt(z.imag)],
            "leakage_ratio": _fmt(ratio),
        })
        return EXIT_OK

    if cfg.command == "identities":
        mesh = cfg.mesh()
        report = operator_identities(mesh, cfg.a, cfg.m, cfg.coupling_object())
        tol = mesh_tolerance(mesh, cfg.tol_coeff)
        ok = (report["anticomm_beta"] < tol and report["comm_gamma5"] < tol
              and report["product_es"] < 1e-12 and report["product_am"] < 1e-12)
        for key, val in sorted(report.items()):
            print("%s=%.6e" % (key, val))
        _write_json(cfg.out_prefix + "_identities.json", {
            "command": "identities",
            "mesh": {"kind": mesh.kind, "n": mesh.n, "h": _fmt(mesh.h)},
            "tolerance": _fmt(tol),
            "residuals": {k: _fmt(v) for k, v in report.items()},
            "pass": bool(ok),
        })
        return EXIT_OK if ok else EXIT_IDENTITY_FAIL

    raise ConfigError(f"unhandled command {cfg.command!r}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="diracshell",
        description="Spectral numerics for Dirac operators with delta-shell interactions")
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a single config key (repeatable)")
    for f in fields(RunConfig):
        parser.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None)
    args = parser.parse_args(argv)

    overrides = []
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return EXIT_CONFIG
        key, raw = item.split("=", 1)
        overrides.append((key.strip(), raw.strip()))
    for f in fields(RunConfig):
        v = getattr(args, f.name)
        if v is not None:
            overrides.append((f.name, v))

    try:
        cfg = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        return run(cfg)
    except UnsupportedCouplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COUPLING
    except RuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: energies, thresholds, flows, phase scans and verification.

Usage: ``rieszshape COMMAND [flags]`` or ``python3 -m rieszshape COMMAND [flags]``.
Outputs go to ``--out`` (written atomically) or to stdout.  Exit codes are
0 ok, 1 validation error, 2 numerical failure, 3 verification failure; on
errors a one-line JSON object is written to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import critical, specfun, verify
from .domain import DiskSystem, EllipseDomain, StarDomain, boundary_csv
from .errors import InvalidDomainError, ParameterError, RieszShapeError
from .minimize import FlowConfig, chain_ansatz_energy, chain_energy_bound, gradient_flow, phase_scan, phase_scan_csv
from .riesz import QuadratureConfig, disk_system_energy, potential_at, total_energy

__all__ = ["RunConfig", "UsageError", "parse_config", "execute", "main", "COMMANDS"]

COMMANDS = ("energy", "potential", "critical-table", "minimize", "phase-scan", "verify", "chain")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(ParameterError):
    """Malformed command line or config file."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: float = 1.0
    mass: float | None = None
    disk_radius: float | None = None
    eccentricity: float | None = None
    domain: dict | None = None
    domain_file: str | None = None
    points: tuple | None = None
    out: str | None = None
    seed: int = 12345
    panels: int = 256
    mc_samples: int = 200_000
    tol: float = 1e-8
    alpha_min: float = 0.1
    alpha_max: float = 1.9
    alpha_steps: int = 19
    m_min: float = 0.5
    m_max: float = 6.0
    m_steps: int = 12
    suite: str = "all"
    max_steps: int = 500
    mode_cap: int = 64
    flow: bool = False

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(
            boundary_panels=self.panels, mc_samples=self.mc_samples, mc_seed=self.seed, tol=self.tol
        )


_FIELDS = {f.name for f in fields(RunConfig)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rieszshape", description="Perimeter plus Riesz repulsion in the plane.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="JSON file whose keys mirror the flags (underscored)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--mass", type=float)
    p.add_argument("--disk-radius", type=float)
    p.add_argument("--eccentricity", type=float)
    p.add_argument("--domain-file")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--panels", type=int)
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--alpha-min", type=float)
    p.add_argument("--alpha-max", type=float)
    p.add_argument("--alpha-steps", "--steps", dest="alpha_steps", type=int)
    p.add_argument("--m-min", type=float)
    p.add_argument("--m-max", type=float)
    p.add_argument("--m-steps", type=int)
    p.add_argument("--suite", choices=verify.SUITES + ("all",))
    p.add_argument("--max-steps", type=int)
    p.add_argument("--mode-cap", type=int)
    p.add_argument("--flow", action="store_const", const=True, help="phase-scan: also run a gradient flow per cell")
    return p


def _read_json(path: str, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path!r} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{what} {path!r} must hold a JSON object")
    return data


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise UsageError(f"exactly one command is required, one of: {', '.join(COMMANDS)}")
    try:
        specfun.check_alpha(cfg.alpha)
    except ParameterError:
        raise ParameterError(
            f"--alpha {cfg.alpha!r} outside [{specfun.ALPHA_MIN}, {specfun.ALPHA_MAX}]"
        ) from None
    for name in ("mass", "disk_radius"):
        v = getattr(cfg, name)
        if v is not None and not (math.isfinite(v) and v > 0.0):
            raise ParameterError(f"--{name.replace('_', '-')} must be positive, got {v!r}")
    if cfg.eccentricity is not None and not 0.0 <= cfg.eccentricity < 1.0:
        raise ParameterError(f"--eccentricity must lie in [0, 1), got {cfg.eccentricity!r}")
    if cfg.command in ("critical-table", "phase-scan"):
        lo, hi = specfun.ALPHA_MIN, specfun.ALPHA_MAX
        if not (lo <= cfg.alpha_min <= cfg.alpha_max <= hi):
            raise ParameterError(f"alpha range [{cfg.alpha_min}, {cfg.alpha_max}] must lie inside [{lo}, {hi}]")
        if cfg.alpha_steps < 1:
            raise ParameterError("--alpha-steps must be at least 1")
    if cfg.command == "phase-scan":
        if not (0.0 < cfg.m_min <= cfg.m_max and math.isfinite(cfg.m_max)):
            raise ParameterError(f"mass range [{cfg.m_min}, {cfg.m_max}] must be positive and ordered")
        if cfg.m_steps < 1:
            raise ParameterError("--m-steps must be at least 1")
    if cfg.command == "chain" and cfg.mass is None:
        raise UsageError("chain needs --mass")
    cfg.quadrature()  # range checks on the quadrature overrides
    FlowConfig(max_steps=cfg.max_steps, mode_cap=cfg.mode_cap)
    return cfg


def parse_config(argv=None) -> RunConfig:
    """Merge defaults, the optional config file and the flags (flags win)."""
    ns = vars(_build_parser().parse_args(argv))
    merged: dict = {}
    config_path = ns.pop("config")
    if config_path is not None:
        data = _read_json(config_path, "config file")
        unknown = sorted(set(data) - _FIELDS)
        if unknown:
            raise UsageError(f"unknown config field(s): {', '.join(unknown)}")
        merged.update(data)
    merged.update({k: v for k, v in ns.items() if v is not None})
    if "command" not in merged:
        raise UsageError(f"exactly one command is required, one of: {', '.join(COMMANDS)}")
    if merged.get("points") is not None:
        merged["points"] = tuple(tuple(float(c) for c in p) for p in merged["points"])
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    return _validate(cfg)


# ----------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    """JSON text with every float at 17 significant digits; non-finite values become null."""
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if isinstance(x, (bool, np.bool_)) or x is None or isinstance(x, str):
        return json.dumps(x if not isinstance(x, np.bool_) else bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return format(x, ".17g") if math.isfinite(x) else "null"


def write_atomic(path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        write_atomic(cfg.out, text)


# ----------------------------------------------------------------------------
# commands


def _domain_from_json(data: dict):
    if "disks" in data:
        return DiskSystem(tuple(tuple(d) for d in data["disks"]))
    if "ellipse" in data:
        e = data["ellipse"]
        return EllipseDomain(e["R"], e.get("e", 0.0), tuple(e.get("center", (0.0, 0.0))))
    if "r0" in data:
        return StarDomain.from_json(data)
    raise InvalidDomainError("domain JSON needs one of the keys 'disks', 'ellipse' or 'r0'")


def _domain(cfg: RunConfig):
    """Domain from the file, inline JSON, or the radius/mass/eccentricity flags."""
    if cfg.domain_file is not None:
        return _domain_from_json(_read_json(cfg.domain_file, "domain file"))
    if cfg.domain is not None:
        return _domain_from_json(cfg.domain)
    if cfg.disk_radius is not None:
        R = cfg.disk_radius
    elif cfg.mass is not None:
        R = math.sqrt(cfg.mass / math.pi)
    else:
        R = 1.0
    if cfg.eccentricity:
        return EllipseDomain(R, cfg.eccentricity)
    return DiskSystem.single(R)


def _cmd_energy(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    if isinstance(dom, DiskSystem) and len(dom.disks) > 1:
        out = disk_system_energy(dom, cfg.alpha).to_json()
    else:
        out = total_energy(dom, cfg.alpha, cfg.quadrature()).to_json()
    _emit(cfg, _fmt(out) + "\n")
    return EXIT_OK


def _cmd_potential(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    if cfg.points is not None:
        pts = np.array(cfg.points, dtype=float).reshape(-1, 2)
    else:
        # default: 21 points on the positive x-axis
        r = np.linspace(0.0, 2.0, 21)
        pts = np.column_stack([r, np.zeros_like(r)])
    v = potential_at(dom, cfg.alpha, pts, cfg.quadrature())
    lines = ["x,y,v"] + [f"{x:.17g},{y:.17g},{val:.17g}" for (x, y), val in zip(pts, v)]
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def _alpha_grid(cfg: RunConfig) -> np.ndarray:
    # rounding keeps grid labels like 1.0 exact
    return np.round(np.linspace(cfg.alpha_min, cfg.alpha_max, cfg.alpha_steps), 12)


def _cmd_critical_table(cfg: RunConfig) -> int:
    lines = ["alpha,m_c1,m_c2,eps_c1,eps_c2"]
    for t in critical.critical_table(_alpha_grid(cfg)):
        lines.append(f"{t.alpha:.17g},{t.m_c1:.17g},{t.m_c2:.17g},{t.eps_c1:.17g},{t.eps_c2:.17g}")
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_minimize(cfg: RunConfig) -> int:
    m = cfg.mass if cfg.mass is not None else math.pi * (cfg.disk_radius or 1.0) ** 2
    eps = critical.eps_of_mass(m, cfg.alpha)
    if cfg.domain_file is not None or cfg.domain is not None:
        start = _domain(cfg)
        if not isinstance(start, StarDomain):
            raise InvalidDomainError("minimize needs a star domain (keys r0, a, b)")
    else:
        e = 0.05 if cfg.eccentricity is None else cfg.eccentricity
        start = StarDomain.from_ellipse(1.0, e, cfg.mode_cap)
    flow = FlowConfig(max_steps=cfg.max_steps, mode_cap=cfg.mode_cap, quadrature=cfg.quadrature())
    res = gradient_flow(start, cfg.alpha, eps, flow)
    out = res.to_json()
    out["mass"] = m
    out["energy_original_units"] = math.sqrt(m / math.pi) * res.energy
    out["disk_energy"] = critical.ball_total_energy(m, cfg.alpha)
    out["status"] = "candidate" if res.converged else "not-converged"
    _emit(cfg, _fmt(out) + "\n")
    if cfg.out is not None:
        write_atomic(str(Path(cfg.out).with_suffix(".boundary.csv")), boundary_csv(res.final))
    return EXIT_OK


def _cmd_phase_scan(cfg: RunConfig) -> int:
    m_grid = np.round(np.linspace(cfg.m_min, cfg.m_max, cfg.m_steps), 12)
    flow = FlowConfig(max_steps=cfg.max_steps, mode_cap=cfg.mode_cap, quadrature=cfg.quadrature()) if cfg.flow else None
    rows = phase_scan(_alpha_grid(cfg), m_grid, cfg.quadrature(), flow)
    _emit(cfg, phase_scan_csv(rows))
    bad = [r for r in rows if r.error is not None]
    if bad:
        sys.stderr.write(_fmt({"error": "CellFailures", "cells": [[r.alpha, r.m, r.error] for r in bad]}) + "\n")
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_verify(cfg: RunConfig) -> int:
    report = verify.run(cfg.suite, cfg.seed, cfg.quadrature())
    text = report.table()
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        write_atomic(cfg.out, text)
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_VERIFY


def _cmd_chain(cfg: RunConfig) -> int:
    e = chain_ansatz_energy(cfg.mass, cfg.alpha)
    out = e.to_json()
    out["bound"] = chain_energy_bound(cfg.mass, cfg.alpha)
    out["energy_per_mass"] = e.total / e.mass
    _emit(cfg, _fmt(out) + "\n")
    return EXIT_OK


_DISPATCH = {
    "energy": _cmd_energy,
    "potential": _cmd_potential,
    "critical-table": _cmd_critical_table,
    "minimize": _cmd_minimize,
    "phase-scan": _cmd_phase_scan,
    "verify": _cmd_verify,
    "chain": _cmd_chain,
}


def execute(cfg: RunConfig) -> int:
    return _DISPATCH[cfg.command](cfg)


def _fail(exc: BaseException, code: int) -> int:
    sys.stderr.write(_fmt({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except (ParameterError, InvalidDomainError) as exc:
        return _fail(exc, EXIT_VALIDATION)
    try:
        return execute(cfg)
    except (ParameterError, InvalidDomainError, KeyError) as exc:
        return _fail(exc, EXIT_VALIDATION)
    except (RieszShapeError, ArithmeticError, FloatingPointError) as exc:
        return _fail(exc, EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())

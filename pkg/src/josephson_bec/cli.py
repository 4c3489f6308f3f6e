"""Command-line front end.

Commands: phase-diagram, occupations, fluctuations, dynamics, converge.
Units are hbar = k_B = 1; a temperature given with --temp is converted to
beta = 1/T at this boundary and only beta is used internally.  Output is
CSV (default) or JSON, written atomically; numbers are printed in their
shortest round-trip form so identical configurations produce identical
bytes regardless of worker count.

Exit codes: 0 success, 1 usage error, 2 degenerate-regime request,
3 numerical-convergence failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .dynamics import autocorrelation_n, phi_current_trace
from .equilibrium import phase_diagram_sweep, solve_equilibrium
from .errors import (
    CondensateModelError,
    ConvergenceError,
    CrossCheckError,
    DegenerateStateError,
    DomainError,
)
from .fluctuations import relative_pair_report, relative_phase_report, total_pair_report
from .lattice import convergence_report
from .model import ModelParams, branch_point, dispersion
from .numerics import thermal_wavelength

COMMANDS = ("phase-diagram", "occupations", "fluctuations", "dynamics", "converge")
CONVERGE_QUANTITIES = ("density", "c_rel", "var_n_rel", "phase_variance")

_MODEL_KEYS = ("mass", "lambda", "gamma", "phi", "rho", "beta", "temp")
_COMMON_KEYS = _MODEL_KEYS + ("format", "workers")
_COMMAND_KEYS = {
    "phase-diagram": _COMMON_KEYS + ("rho-seq",),
    "occupations": _COMMON_KEYS + ("k-seq",),
    "fluctuations": _COMMON_KEYS + ("k",),
    "dynamics": _COMMON_KEYS + ("t-max", "t-steps"),
    "converge": _COMMON_KEYS + ("quantity", "L-seq"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with status 2
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: ModelParams
    out: Path | None
    fmt: str
    workers: int
    k: tuple[float, float, float] | None = None
    rho_seq: tuple[float, ...] | None = None
    k_seq: tuple[float, ...] | None = None
    l_seq: tuple[float, ...] | None = None
    t_max: float | None = None
    t_steps: int | None = None
    quantity: str | None = None


def _parse_seq(text: str, name: str) -> tuple[float, ...]:
    """Grid syntax: 'lo:hi:count' (inclusive linspace) or 'a,b,c'."""
    try:
        if ":" in text:
            lo_s, hi_s, n_s = text.split(":")
            lo, hi, n = float(lo_s), float(hi_s), int(n_s)
            if n < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError
            if n == 1:
                return (lo,)
            return tuple(float(v) for v in np.linspace(lo, hi, n))
        vals = tuple(float(v) for v in text.split(","))
        if not vals or not all(map(math.isfinite, vals)):
            raise ValueError
        return vals
    except (ValueError, TypeError):
        raise UsageError(f"invalid {name} grid {text!r}; use lo:hi:count or a,b,c")


def _parse_k(text: str) -> tuple[float, float, float]:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"invalid momentum {text!r}")
    if len(parts) == 1:
        parts = [parts[0], 0.0, 0.0]
    if len(parts) != 3 or not all(map(math.isfinite, parts)):
        raise UsageError(f"momentum must be kx,ky,kz or a single magnitude, got {text!r}")
    return (parts[0], parts[1], parts[2])


def _build_parser() -> _Parser:
    parser = _Parser(prog="josephson-bec", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_common(p):
        p.add_argument("--mass", type=float, default=None, help="particle mass m (default 1)")
        p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="mean-field strength (default 1)")
        p.add_argument("--gamma", type=float, default=None, help="tunnelling coupling > 0")
        p.add_argument("--phi", type=float, default=None,
                       help="condensate phase difference in radians (default 0)")
        p.add_argument("--rho", type=float, default=None, help="total density")
        p.add_argument("--beta", type=str, default=None,
                       help="inverse temperature; 'inf' selects the ground state")
        p.add_argument("--temp", type=str, default=None,
                       help="temperature T; converted to beta = 1/T")
        p.add_argument("--config", type=str, default=None,
                       help="flat JSON file with keys matching flag names")
        p.add_argument("--out", type=str, default=None, help="output path (default stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
        p.add_argument("--workers", type=int, default=None, help="worker count (default 1)")

    p = sub.add_parser("phase-diagram", help="equilibrium sweep over a density grid")
    add_common(p)
    p.add_argument("--rho-seq", type=str, default=None, help="density grid lo:hi:n or a,b,c")

    p = sub.add_parser("occupations", help="branch spectrum and occupations on a |k| grid")
    add_common(p)
    p.add_argument("--k-seq", type=str, default=None, help="|k| grid lo:hi:n or a,b,c")

    p = sub.add_parser("fluctuations", help="fluctuation report at one momentum")
    add_common(p)
    p.add_argument("--k", type=str, default=None, help="momentum kx,ky,kz (default 1,0,0)")

    p = sub.add_parser("dynamics", help="oscillation autocorrelation traces")
    add_common(p)
    p.add_argument("--t-max", type=str, default=None,
                   help="trace end time (default two periods, 2*pi/gamma)")
    p.add_argument("--t-steps", type=int, default=None, help="grid points (default 512)")

    p = sub.add_parser("converge", help="finite-volume convergence study")
    add_common(p)
    p.add_argument("quantity", choices=CONVERGE_QUANTITIES)
    p.add_argument("--L-seq", dest="l_seq", type=str, default=None,
                   help="box sides in units of the thermal wavelength (default 10,20,40)")

    return parser


def _load_config_file(path: str, command: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}")
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]  # accept a previous JSON output as the fragment
    if not isinstance(data, dict):
        raise UsageError(f"config file {path!r} must hold a JSON object")
    allowed = set(_COMMAND_KEYS[command])
    unknown = set(data) - allowed
    if unknown:
        raise UsageError(
            f"unknown config keys {sorted(unknown)!r}; allowed: {sorted(allowed)!r}"
        )
    return data


def _merged(flag_value, cfg: dict, key: str, default=None):
    if flag_value is not None:
        return flag_value
    if key in cfg and cfg[key] is not None:
        return cfg[key]
    return default


def _parse_beta(beta_raw, temp_raw) -> float:
    if beta_raw is not None and temp_raw is not None:
        raise UsageError("give either --beta or --temp, not both")
    if beta_raw is None and temp_raw is None:
        raise UsageError("an inverse temperature is required (--beta or --temp)")
    if beta_raw is not None:
        try:
            return float(beta_raw)
        except (TypeError, ValueError):
            raise UsageError(f"invalid beta {beta_raw!r}")
    try:
        temp = float(temp_raw)
    except (TypeError, ValueError):
        raise UsageError(f"invalid temperature {temp_raw!r}")
    if temp < 0.0 or math.isnan(temp):
        raise UsageError(f"temperature must be >= 0, got {temp!r}")
    return math.inf if temp == 0.0 else 1.0 / temp


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Parse argv (flags override config-file values) into a RunConfig."""
    parser = _build_parser()
    ns = parser.parse_args(list(argv))
    if ns.command is None:
        raise UsageError(f"a command is required: one of {', '.join(COMMANDS)}")
    cfg = _load_config_file(ns.config, ns.command) if ns.config else {}

    beta = _parse_beta(_merged(ns.beta, cfg, "beta"), _merged(ns.temp, cfg, "temp"))
    rho_seq = k_seq = l_seq = None
    k = None
    t_max = None
    t_steps = None
    quantity = None

    if ns.command == "phase-diagram":
        seq_raw = _merged(ns.rho_seq, cfg, "rho-seq")
        if seq_raw is None:
            raise UsageError("phase-diagram requires --rho-seq")
        rho_seq = _parse_seq(str(seq_raw), "rho")
        rho = _merged(ns.rho, cfg, "rho", rho_seq[0])
    else:
        rho = _merged(ns.rho, cfg, "rho")
        if rho is None:
            raise UsageError("a total density is required (--rho)")

    if ns.command == "occupations":
        k_seq = _parse_seq(str(_merged(ns.k_seq, cfg, "k-seq", "0.1:5.0:50")), "k")
        if any(v <= 0.0 for v in k_seq):
            raise UsageError("occupation grid magnitudes must be > 0")
    elif ns.command == "fluctuations":
        k = _parse_k(str(_merged(ns.k, cfg, "k", "1,0,0")))
    elif ns.command == "dynamics":
        t_max_raw = _merged(ns.t_max, cfg, "t-max")
        t_max = float(t_max_raw) if t_max_raw is not None else None
        t_steps = int(_merged(ns.t_steps, cfg, "t-steps", 512))
        if t_steps < 2:
            raise UsageError("dynamics needs at least 2 time steps")
    elif ns.command == "converge":
        quantity = _merged(ns.quantity, cfg, "quantity")
        l_seq = _parse_seq(str(_merged(ns.l_seq, cfg, "L-seq", "10,20,40")), "L")

    try:
        params = ModelParams(
            mass=float(_merged(ns.mass, cfg, "mass", 1.0)),
            lam=float(_merged(ns.lam, cfg, "lambda", 1.0)),
            gamma=_require_float(_merged(ns.gamma, cfg, "gamma"), "--gamma"),
            phi=float(_merged(ns.phi, cfg, "phi", 0.0)),
            rho=_require_float(rho, "--rho"),
            beta=beta,
        )
    except DomainError as exc:
        raise UsageError(str(exc))

    return RunConfig(
        command=ns.command,
        params=params,
        out=Path(ns.out) if ns.out else None,
        fmt=str(_merged(ns.fmt, cfg, "format", "csv")),
        workers=max(1, int(_merged(ns.workers, cfg, "workers", 1))),
        k=k,
        rho_seq=rho_seq,
        k_seq=k_seq,
        l_seq=l_seq,
        t_max=t_max,
        t_steps=t_steps,
        quantity=quantity,
    )


def _require_float(value, flag: str) -> float:
    if value is None:
        raise UsageError(f"{flag} is required")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for {flag}: {value!r}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip decimal
    return str(v)


def _config_mapping(config: RunConfig) -> dict:
    # worker count is scheduling, not physics: keeping it out of the output
    # is what makes runs byte-identical across --workers settings
    p = config.params
    out = {
        "mass": p.mass, "lambda": p.lam, "gamma": p.gamma, "phi": p.phi,
        "rho": p.rho, "beta": p.beta,
        "format": config.fmt,
    }
    if config.rho_seq is not None:
        out["rho-seq"] = ",".join(repr(v) for v in config.rho_seq)
    if config.k_seq is not None:
        out["k-seq"] = ",".join(repr(v) for v in config.k_seq)
    if config.l_seq is not None:
        out["L-seq"] = ",".join(repr(v) for v in config.l_seq)
    if config.k is not None:
        out["k"] = ",".join(repr(v) for v in config.k)
    if config.t_max is not None:
        out["t-max"] = config.t_max
    if config.t_steps is not None:
        out["t-steps"] = config.t_steps
    if config.quantity is not None:
        out["quantity"] = config.quantity
    return out


def _render_csv(config: RunConfig, columns, rows, trailer: str | None) -> str:
    cfg = _config_mapping(config)
    lines = [
        f"# josephson-bec {__version__}",
        f"# command={config.command}",
        "# " + " ".join(f"{k}={_fmt(v)}" for k, v in cfg.items()),
        ",".join(columns),
    ]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    if trailer:
        lines.append(f"# {trailer}")
    return "\n".join(lines) + "\n"


def _render_json(config: RunConfig, columns, rows, trailer: str | None) -> str:
    doc = {
        "tool": "josephson-bec",
        "version": __version__,
        "command": config.command,
        "config": _config_mapping(config),
        "columns": list(columns),
        "rows": [list(row) for row in rows],
    }
    if trailer:
        doc["note"] = trailer
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _emit(config: RunConfig, columns, rows, trailer: str | None = None) -> None:
    text = (_render_json if config.fmt == "json" else _render_csv)(
        config, columns, rows, trailer
    )
    if config.out is None:
        sys.stdout.write(text)
        return
    parent = config.out.parent
    parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=parent, prefix=config.out.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp_name, config.out)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _run_phase_diagram(config: RunConfig):
    sols = phase_diagram_sweep(
        config.params, "rho", config.rho_seq, max_workers=config.workers
    )
    columns = ("rho", "beta", "mu", "delta", "rho0", "rho_c", "condensed")
    rows = [
        (rho, config.params.beta, s.mu, s.delta, s.rho0, s.rho_c, s.condensed)
        for rho, s in zip(config.rho_seq, sols)
    ]
    return columns, rows, None


def _run_occupations(config: RunConfig):
    sol = solve_equilibrium(config.params)
    columns = ("k", "eps", "E_minus", "E_plus", "n_minus", "n_plus")
    rows = []
    for kmag in config.k_seq:
        kvec = (kmag, 0.0, 0.0)
        bp = branch_point(config.params, sol.mu, kvec)
        rows.append((kmag, dispersion(config.params, kvec),
                     bp.e_minus, bp.e_plus, bp.n_minus, bp.n_plus))
    return columns, rows, None


def _run_fluctuations(config: RunConfig):
    params = config.params
    sol = solve_equilibrium(params)
    total = total_pair_report(params, sol, config.k)
    rel = relative_pair_report(params, sol)
    var_phi_rel, link, j0_var = relative_phase_report(params, sol)
    columns = (
        "k", "var_n_tot", "var_phi_tot", "commutator_total", "uncertainty_product",
        "c_rel", "duhamel_nn", "var_n_rel", "var_j_rel", "var_phi_rel",
        "phase_link", "j0_variance",
    )
    kmag = math.sqrt(sum(v * v for v in config.k))
    rows = [(
        kmag, total.var_n_tot, total.var_phi_tot, total.commutator_scalar,
        total.uncertainty_product, rel.c_rel, rel.duhamel_nn, rel.var_n_rel,
        rel.var_j_rel, var_phi_rel, link, j0_var,
    )]
    return columns, rows, None


def _run_dynamics(config: RunConfig):
    params = config.params
    sol = solve_equilibrium(params)
    t_max = config.t_max if config.t_max is not None else 2.0 * math.pi / params.gamma
    steps = config.t_steps or 512
    times = [float(t) for t in np.linspace(0.0, t_max, steps)]
    trace = phi_current_trace(params, sol, times)
    columns = ("t", "corr_nn", "corr_jj_phi")
    rows = [
        (t, autocorrelation_n(params, sol, t), v)
        for t, v in zip(trace.times, trace.values)
    ]
    return columns, rows, None


def _run_converge(config: RunConfig):
    params = config.params
    if params.is_ground_state:
        raise DegenerateStateError(
            "the convergence study needs a finite temperature (thermal wavelength)"
        )
    lam_t = thermal_wavelength(params)
    sol = solve_equilibrium(params)
    report = convergence_report(
        config.quantity, params, sol, [m * lam_t for m in config.l_seq]
    )
    columns = ("L", "oracle", "closed_form", "abs_err")
    rows = [(r.L, r.oracle, r.closed_form, r.abs_err) for r in report.rows]
    trailer = f"verdict={'pass' if report.verdict else 'fail'}"
    return columns, rows, trailer, report.verdict


def run(config: RunConfig) -> int:
    """Execute a parsed configuration; returns the process exit status."""
    try:
        if config.command == "phase-diagram":
            columns, rows, trailer = _run_phase_diagram(config)
        elif config.command == "occupations":
            columns, rows, trailer = _run_occupations(config)
        elif config.command == "fluctuations":
            columns, rows, trailer = _run_fluctuations(config)
        elif config.command == "dynamics":
            columns, rows, trailer = _run_dynamics(config)
        elif config.command == "converge":
            columns, rows, trailer, verdict = _run_converge(config)
            _emit(config, columns, rows, trailer)
            if not verdict:
                print(
                    f"converge: {config.quantity} failed the convergence verdict",
                    file=sys.stderr,
                )
                return 3
            return 0
        else:  # pragma: no cover - parser restricts the choices
            raise UsageError(f"unknown command {config.command!r}")
    except DegenerateStateError as exc:
        print(f"josephson-bec: degenerate regime: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, CrossCheckError) as exc:
        print(f"josephson-bec: convergence failure: {exc}", file=sys.stderr)
        return 3
    _emit(config, columns, rows, trailer)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"josephson-bec: usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return run(config)
    except DegenerateStateError as exc:
        print(f"josephson-bec: degenerate regime: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, CrossCheckError) as exc:
        print(f"josephson-bec: convergence failure: {exc}", file=sys.stderr)
        return 3
    except CondensateModelError as exc:
        print(f"josephson-bec: error: {exc}", file=sys.stderr)
        return 1

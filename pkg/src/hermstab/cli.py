"""Command-line entry point: scenario runs, matrix dumps, CSV emission.

Configuration is plain key=value text (one pair per line, # comments);
command-line flags override file values, which override scenario defaults.
All real numbers are printed with 17 significant digits so identical
configurations produce byte-identical outputs.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .basis import BasisParams, VelocityGrid
from .gram import GramMatrix, gram_matrix_stable
from .integrator import (
    SOLVER_DENSE_LU,
    SOLVER_GMRES,
    CrankNicolson,
    LinearSolverConfig,
    NonConvergence,
    SingularSystem,
)
from .operators import (
    DEFAULT_EPSILON,
    METHOD_PENALIZED,
    METHOD_PROJECTION,
    METHOD_PROJECTION_CONSERVATIVE,
    METHOD_RAW,
    TransportOperator,
    build_B,
    build_B_penalized,
    build_B_projection,
    build_D,
    build_D_penalized,
    build_D_projection,
)
from .vlasov1d import (
    KineticState,
    SpatialGrid,
    XAdvection,
    diagnostics,
    init_advection,
    init_two_stream,
    poisson_solve,
    reconstruct_on_grid,
    strang_step,
)

__all__ = ["RunConfig", "ConfigError", "ParseError", "ValidationError", "parse_config", "run", "main"]

SCENARIOS = ("advection", "two_stream")
METHODS = (METHOD_RAW, METHOD_PROJECTION, METHOD_PROJECTION_CONSERVATIVE, METHOD_PENALIZED)

# CLI spelling -> internal method name
_METHOD_ALIASES = {"proj-cons": METHOD_PROJECTION_CONSERVATIVE}

NORMS_HEADER = "step,time,l2_A,l2_eps,mass,momentum,kinetic_energy,potential_energy"


class ConfigError(Exception):
    pass


class ParseError(ConfigError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line = line_no


class ValidationError(ConfigError):
    def __init__(self, field_name: str, constraint: str):
        super().__init__(f"{field_name}: {constraint}")
        self.field = field_name


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "advection"
    n_moments: int = 64
    temperature: float = 2.0
    dt: float = 0.1
    t_final: float = 9.0
    method: str = METHOD_PROJECTION
    epsilon: float = DEFAULT_EPSILON
    n_cells: int = 1
    domain_length: float = 1.0
    output_dir: str = "out"
    solver: str = SOLVER_DENSE_LU
    tolerance: float = 1e-12
    max_iterations: int = 5000
    restart: int = 50
    v_min: float = -8.0
    v_max: float = 8.0
    v_points: int = 401
    snapshot_every: int = 15


# the two-stream x-system (32 cells x 65 moments) is beyond the dense default
_SCENARIO_DEFAULTS = {
    "advection": RunConfig(),
    "two_stream": RunConfig(
        scenario="two_stream",
        dt=0.01,
        t_final=20.0,
        n_cells=32,
        domain_length=4.0 * math.pi,
        solver=SOLVER_GMRES,
        snapshot_every=1000,
    ),
}

_INT_KEYS = {"n_moments", "n_cells", "max_iterations", "restart", "v_points", "snapshot_every"}
_FLOAT_KEYS = {
    "temperature", "dt", "t_final", "epsilon", "domain_length",
    "tolerance", "v_min", "v_max",
}
_STR_KEYS = {"scenario", "method", "output_dir", "solver"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def _coerce(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ValidationError(key, f"cannot parse {raw!r}: {exc}") from exc


def parse_config_file(path) -> dict:
    """key=value pairs from a config file; # starts a comment."""
    values = {}
    text = Path(path).read_text()
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(line_no, f"expected key=value, got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _ALL_KEYS:
            raise ParseError(line_no, f"unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.scenario not in SCENARIOS:
        raise ValidationError("scenario", f"must be one of {SCENARIOS}, got {cfg.scenario!r}")
    if cfg.method not in METHODS:
        raise ValidationError("method", f"must be one of {METHODS}, got {cfg.method!r}")
    if cfg.solver not in (SOLVER_DENSE_LU, SOLVER_GMRES):
        raise ValidationError("solver", f"must be 'lu' or 'gmres', got {cfg.solver!r}")
    for name in ("temperature", "dt", "t_final", "domain_length", "tolerance"):
        if getattr(cfg, name) <= 0.0:
            raise ValidationError(name, "must be positive")
    for name in ("n_moments", "n_cells", "max_iterations", "restart", "v_points", "snapshot_every"):
        if getattr(cfg, name) <= 0:
            raise ValidationError(name, "must be positive")
    if cfg.method == METHOD_PENALIZED and cfg.epsilon <= 0.0:
        raise ValidationError("epsilon", "the penalized method requires epsilon > 0")
    if cfg.epsilon < 0.0:
        raise ValidationError("epsilon", "must be nonnegative")
    if cfg.v_min >= cfg.v_max:
        raise ValidationError("v_min", "must be below v_max")
    if not 0.0 < cfg.tolerance < 1.0:
        raise ValidationError("tolerance", "must be in (0, 1)")
    if cfg.restart > cfg.max_iterations:
        raise ValidationError("restart", "must not exceed max_iterations")
    return cfg


def parse_config(
    scenario: Optional[str] = None,
    config_path=None,
    overrides: Optional[dict] = None,
) -> RunConfig:
    """Resolve defaults, file values and flag overrides into a RunConfig."""
    file_values = parse_config_file(config_path) if config_path else {}
    merged = dict(file_values)
    if overrides:
        for key, val in overrides.items():
            if val is None:
                continue
            if key not in _ALL_KEYS:
                raise ValidationError(key, "unknown configuration key")
            merged[key] = val
    scen = scenario or merged.get("scenario") or "advection"
    if scen not in _SCENARIO_DEFAULTS:
        raise ValidationError("scenario", f"must be one of {SCENARIOS}, got {scen!r}")
    merged["scenario"] = scen
    merged.setdefault("method", _SCENARIO_DEFAULTS[scen].method)
    merged["method"] = _METHOD_ALIASES.get(merged["method"], merged["method"])
    cfg = replace(_SCENARIO_DEFAULTS[scen], **merged)
    return _validate(cfg)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def echo_config(cfg: RunConfig) -> str:
    lines = [f"{f.name} = {_fmt(getattr(cfg, f.name))}" for f in fields(cfg)]
    return "\n".join(lines) + "\n"


def _write_matrix_csv(path, matrix: np.ndarray):
    lines = [",".join(f"{x:.17g}" for x in row) for row in np.atleast_2d(matrix)]
    Path(path).write_text("\n".join(lines) + "\n")


def _solver_config(cfg: RunConfig) -> LinearSolverConfig:
    return LinearSolverConfig(
        method=cfg.solver,
        tolerance=cfg.tolerance,
        max_iterations=cfg.max_iterations,
        restart=cfg.restart,
    )


def _build_velocity_op(cfg: RunConfig, e: float, A: GramMatrix) -> TransportOperator:
    N = cfg.n_moments
    if cfg.method == METHOD_RAW:
        return build_D(N, e, cfg.temperature)
    if cfg.method == METHOD_PROJECTION:
        return build_D_projection(N, e, cfg.temperature)
    if cfg.method == METHOD_PROJECTION_CONSERVATIVE:
        return build_D_projection(N, e, cfg.temperature, conservative=True)
    return build_D_penalized(N, e, cfg.temperature, cfg.epsilon, A)


def _build_space_op(cfg: RunConfig, A: GramMatrix) -> TransportOperator:
    N = cfg.n_moments
    if cfg.method == METHOD_RAW:
        return build_B(N, cfg.temperature)
    if cfg.method == METHOD_PROJECTION:
        return build_B_projection(N, cfg.temperature)
    if cfg.method == METHOD_PROJECTION_CONSERVATIVE:
        return build_B_projection(N, cfg.temperature, conservative=True)
    return build_B_penalized(N, cfg.temperature, cfg.epsilon, A)


def _norms_row(step: int, time: float, diag: dict) -> str:
    vals = (
        diag["l2_A"], diag["l2_eps"], diag["mass"], diag["momentum"],
        diag["kinetic_energy"], diag["potential_energy"],
    )
    return f"{step},{time:.17g}," + ",".join(f"{v:.17g}" for v in vals)


def _write_snapshot(outdir: Path, step: int, state: KineticState, vgrid: VelocityGrid):
    f_xv = reconstruct_on_grid(state, vgrid)
    x = state.grid.cell_centers
    lines = ["x,v,f"]
    for j in range(state.grid.n_cells):
        xj = f"{x[j]:.17g}"
        for i, v in enumerate(vgrid.points):
            lines.append(f"{xj},{v:.17g},{f_xv[j, i]:.17g}")
    (outdir / f"snapshot_{step}.csv").write_text("\n".join(lines) + "\n")


def run_advection(cfg: RunConfig, outdir: Path) -> None:
    """Velocity advection with the sign of e reversed at t_final/2.

    e(t) is evaluated at the step midpoint and is right-continuous at the
    switch; 90 steps of 0.1 with reversal at 4.5 reproduce the published
    protocol.
    """
    basis = BasisParams(temperature=cfg.temperature, max_degree=cfg.n_moments)
    A = gram_matrix_stable(cfg.n_moments, cfg.temperature)
    eps = cfg.epsilon if cfg.method == METHOD_PENALIZED else 0.0
    solver = _solver_config(cfg)
    steppers = {
        e: CrankNicolson(_build_velocity_op(cfg, e, A), cfg.dt, solver) for e in (1.0, -1.0)
    }
    state = init_advection(basis)
    vgrid = VelocityGrid.uniform(cfg.v_min, cfg.v_max, cfg.v_points)
    t_switch = 0.5 * cfg.t_final
    n_steps = int(round(cfg.t_final / cfg.dt))
    rows = [NORMS_HEADER, _norms_row(0, 0.0, diagnostics(state, A, epsilon=eps))]
    _write_snapshot(outdir, 0, state, vgrid)
    U = state.moments[0]
    for n in range(n_steps):
        t_mid = (n + 0.5) * cfg.dt
        e = 1.0 if t_mid < t_switch else -1.0
        try:
            U = steppers[e].step(U, warm_start=U)
        except NonConvergence as exc:
            raise exc.with_context(f"advection step {n + 1}") from exc
        state.moments[0] = U
        state.time = (n + 1) * cfg.dt
        rows.append(_norms_row(n + 1, state.time, diagnostics(state, A, epsilon=eps)))
        if (n + 1) % cfg.snapshot_every == 0 or n + 1 == n_steps:
            _write_snapshot(outdir, n + 1, state, vgrid)
    (outdir / "norms.csv").write_text("\n".join(rows) + "\n")


def run_two_stream(cfg: RunConfig, outdir: Path) -> None:
    basis = BasisParams(temperature=cfg.temperature, max_degree=cfg.n_moments)
    A = gram_matrix_stable(cfg.n_moments, cfg.temperature)
    eps = cfg.epsilon if cfg.method == METHOD_PENALIZED else 0.0
    grid = SpatialGrid(length=cfg.domain_length, n_cells=cfg.n_cells)
    state = init_two_stream(grid, basis)
    unit_D = _build_velocity_op(cfg, 1.0, A)
    B_op = _build_space_op(cfg, A)
    x_stepper = XAdvection(grid, B_op, cfg.dt, _solver_config(cfg))
    vgrid = VelocityGrid.uniform(cfg.v_min, cfg.v_max, cfg.v_points)
    fieldstate = poisson_solve(state)
    n_steps = int(round(cfg.t_final / cfg.dt))
    rows = [NORMS_HEADER, _norms_row(0, 0.0, diagnostics(state, A, fieldstate, eps))]
    _write_snapshot(outdir, 0, state, vgrid)
    for n in range(n_steps):
        try:
            state, fieldstate = strang_step(state, unit_D, x_stepper, cfg.dt, fieldstate)
        except NonConvergence as exc:
            raise exc.with_context(f"two-stream step {n + 1}") from exc
        state.time = (n + 1) * cfg.dt
        rows.append(_norms_row(n + 1, state.time, diagnostics(state, A, fieldstate, eps)))
        if (n + 1) % cfg.snapshot_every == 0 or n + 1 == n_steps:
            _write_snapshot(outdir, n + 1, state, vgrid)
    (outdir / "norms.csv").write_text("\n".join(rows) + "\n")


def run(cfg: RunConfig) -> int:
    """Execute a scenario; returns the process exit status."""
    outdir = Path(cfg.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "config_echo").write_text(echo_config(cfg))
        if cfg.scenario == "advection":
            run_advection(cfg, outdir)
        else:
            run_two_stream(cfg, outdir)
    except (NonConvergence, SingularSystem) as exc:
        print(f"solver failure in scenario {cfg.scenario}: {exc}", file=sys.stderr)
        return 3
    return 0


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", default=None, help="key=value configuration file")
    p.add_argument("--scenario", choices=SCENARIOS, default=None)
    p.add_argument("--n", type=int, dest="n_moments", default=None, help="highest moment index N")
    p.add_argument("--temp", type=float, dest="temperature", default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-final", type=float, dest="t_final", default=None)
    p.add_argument("--method", choices=("raw", "proj", "proj-cons", "pen"), default=None)
    p.add_argument("--eps", type=float, dest="epsilon", default=None)
    p.add_argument("--cells", type=int, dest="n_cells", default=None)
    p.add_argument("--length", type=float, dest="domain_length", default=None)
    p.add_argument("--out", dest="output_dir", default=None)
    p.add_argument("--solver", choices=(SOLVER_DENSE_LU, SOLVER_GMRES), default=None)
    p.add_argument("--tol", type=float, dest="tolerance", default=None)
    p.add_argument("--snapshot-every", type=int, dest="snapshot_every", default=None)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hermstab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario")
    _add_run_flags(p_run)

    p_gram = sub.add_parser("gram", help="dump the Gram matrix A^N as CSV")
    p_gram.add_argument("--n", type=int, required=True)
    p_gram.add_argument("--temp", type=float, default=1.0)
    p_gram.add_argument("--out", required=True)

    p_op = sub.add_parser("op", help="dump a transport matrix as CSV")
    p_op.add_argument("--kind", choices=("d", "b"), required=True)
    p_op.add_argument("--method", choices=("raw", "proj", "proj-cons", "pen"), default="raw")
    p_op.add_argument("--n", type=int, required=True)
    p_op.add_argument("--temp", type=float, default=1.0)
    p_op.add_argument("--e", type=float, default=1.0)
    p_op.add_argument("--eps", type=float, default=DEFAULT_EPSILON)
    p_op.add_argument("--out", required=True)

    args = parser.parse_args(argv)

    try:
        if args.command == "gram":
            A = gram_matrix_stable(args.n, args.temp)
            _write_matrix_csv(args.out, A.entries)
            return 0
        if args.command == "op":
            method = _METHOD_ALIASES.get(args.method, args.method)
            A = gram_matrix_stable(args.n, args.temp)
            if args.kind == "d":
                if method == METHOD_RAW:
                    op = build_D(args.n, args.e, args.temp)
                elif method == METHOD_PENALIZED:
                    op = build_D_penalized(args.n, args.e, args.temp, args.eps, A)
                else:
                    op = build_D_projection(
                        args.n, args.e, args.temp,
                        conservative=method == METHOD_PROJECTION_CONSERVATIVE,
                    )
            else:
                if method == METHOD_RAW:
                    op = build_B(args.n, args.temp)
                elif method == METHOD_PENALIZED:
                    op = build_B_penalized(args.n, args.temp, args.eps, A)
                else:
                    op = build_B_projection(
                        args.n, args.temp,
                        conservative=method == METHOD_PROJECTION_CONSERVATIVE,
                    )
            _write_matrix_csv(args.out, op.matrix)
            return 0
        overrides = {
            key: getattr(args, key)
            for key in _ALL_KEYS
            if hasattr(args, key) and getattr(args, key) is not None
        }
        overrides.pop("scenario", None)
        cfg = parse_config(scenario=args.scenario, config_path=args.config, overrides=overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

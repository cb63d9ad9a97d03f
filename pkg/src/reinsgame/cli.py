"""Command-line front end: scenario presets, config parsing, and plot-ready
CSV outputs for the solver and the Monte Carlo validator.

Config files are flat ``key = value`` text with ``#`` comments; flags
override file values, and a preset scenario fills all model fields.  Floats
are serialized with shortest round-trip precision, and the distinguished
no-reinsurance control of excess-of-loss scenarios appears as the literal
token ``inf`` in policy.csv.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, ConvergenceError, SpecError
from .model import (
    Exponential,
    GameSpec,
    ParetoII,
    PayoffSpec,
    PremiumModel,
    PremiumPrinciple,
    RetentionKind,
    base_premium,
    xl_control_bound,
)
from .scenarios import SCENARIO_NAMES, make_scenario
from .simulate import check_dpp, default_t_max, estimate_J
from .solver import upper_lower_gap

logger = logging.getLogger(__name__)

#: Standard-error floor used in z-scores so exact cases divide cleanly.
STDERR_FLOOR = 1e-9


@dataclass
class RunConfig:
    """Validated run parameters; model fields are only set for scenario=custom."""

    scenario: str = "prop-var-exp"
    grid_n: int = 801
    control_m: int = 101
    tol: float = 1e-8
    epsilon: float = 1e-5
    max_rounds: int = 10
    mc_paths: int = 100_000
    mc_points: int = 11
    seed: int = 12345
    t_max: Optional[float] = None
    dpp_x0: float = 0.0
    dpp_horizons: tuple[float, ...] = (0.5, 1.0, 2.0)
    out: str = "out"
    strict: bool = False
    # custom-scenario model fields
    retention: Optional[str] = None
    a: Optional[float] = None
    b: Optional[float] = None
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    delta: Optional[float] = None
    eta1: Optional[float] = None
    eta2: Optional[float] = None
    theta1: Optional[float] = None
    theta2: Optional[float] = None
    claim1_kind: Optional[str] = None
    claim1_mu: Optional[float] = None
    claim1_alpha: Optional[float] = None
    claim1_beta: Optional[float] = None
    claim2_kind: Optional[str] = None
    claim2_mu: Optional[float] = None
    claim2_alpha: Optional[float] = None
    claim2_beta: Optional[float] = None
    payoff_kind: str = "test_functional"
    payoff_k: float = 1.0

    def __post_init__(self):
        for name in ("grid_n", "control_m", "max_rounds", "mc_paths", "mc_points"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("tol", "epsilon"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.t_max is not None and self.t_max <= 0.0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        if self.scenario not in SCENARIO_NAMES + ("custom",):
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; expected one of "
                f"{', '.join(SCENARIO_NAMES)} or 'custom'"
            )
        if self.payoff_kind not in ("test_functional", "constant_pair"):
            raise ConfigError(
                f"payoff_kind must be 'test_functional' or 'constant_pair', "
                f"got {self.payoff_kind!r}"
            )


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_KEYS = {"grid_n", "control_m", "max_rounds", "mc_paths", "mc_points", "seed"}
_BOOL_KEYS = {"strict"}
_STR_KEYS = {"scenario", "out", "retention", "claim1_kind", "claim2_kind", "payoff_kind"}
_TUPLE_KEYS = {"dpp_horizons"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if raw.lower() == "none":
        return None
    if key in _BOOL_KEYS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean {key} = {raw!r}")
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"cannot parse integer {key} = {raw!r}") from exc
    if key in _STR_KEYS:
        return raw
    if key in _TUPLE_KEYS:
        try:
            return tuple(float(part) for part in raw.split(",") if part.strip())
        except ValueError as exc:
            raise ConfigError(f"cannot parse list {key} = {raw!r}") from exc
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse number {key} = {raw!r}") from exc


def _read_config_file(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, raw)
    return values


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Build a RunConfig from an optional file plus flag overrides."""
    values: dict = {}
    if path is not None:
        values.update(_read_config_file(Path(path)))
    for key, val in (overrides or {}).items():
        if val is not None:
            values.update({key: val})
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_config(config: RunConfig, path: str) -> None:
    """Serialize a config so that load_config reads it back identically."""
    lines = [f"{f.name} = {_fmt(getattr(config, f.name))}" for f in fields(RunConfig)]
    Path(path).write_text("\n".join(lines) + "\n")


def _require(config: RunConfig, name: str):
    value = getattr(config, name)
    if value is None:
        raise ConfigError(f"custom scenario is missing required field {name!r}")
    return value


def _custom_claim(config: RunConfig, player: int):
    kind = _require(config, f"claim{player}_kind")
    if kind == "exponential":
        return Exponential(_require(config, f"claim{player}_mu"))
    if kind == "pareto":
        return ParetoII(
            _require(config, f"claim{player}_alpha"),
            _require(config, f"claim{player}_beta"),
        )
    raise ConfigError(
        f"claim{player}_kind must be 'exponential' or 'pareto', got {kind!r}"
    )


def build_spec(config: RunConfig) -> GameSpec:
    """The GameSpec the config describes (preset or custom)."""
    if config.scenario != "custom":
        return make_scenario(config.scenario)
    retention_raw = _require(config, "retention")
    try:
        retention = RetentionKind(retention_raw)
    except ValueError as exc:
        raise ConfigError(
            f"retention must be 'proportional' or 'excess_of_loss', got {retention_raw!r}"
        ) from exc
    claim1 = _custom_claim(config, 1)
    claim2 = _custom_claim(config, 2)
    lam1 = _require(config, "lambda1")
    lam2 = _require(config, "lambda2")
    if retention is RetentionKind.PROPORTIONAL:
        principle = PremiumPrinciple.VARIANCE_ON_PROPORTIONAL
        controls1 = (0.0, 1.0)
        controls2 = (0.0, 1.0)
    else:
        principle = PremiumPrinciple.EXPECTATION_ON_XL
        controls1 = (0.0, xl_control_bound(claim1))
        controls2 = (0.0, xl_control_bound(claim2))
    try:
        return GameSpec(
            lam1=lam1,
            lam2=lam2,
            claim1=claim1,
            claim2=claim2,
            retention=retention,
            premium1=PremiumModel(
                base_rate=base_premium(lam1, _require(config, "eta1"), claim1.mean),
                principle=principle,
                lam=lam1,
                theta=_require(config, "theta1"),
                claim=claim1,
            ),
            premium2=PremiumModel(
                base_rate=base_premium(lam2, _require(config, "eta2"), claim2.mean),
                principle=principle,
                lam=lam2,
                theta=_require(config, "theta2"),
                claim=claim2,
            ),
            a=_require(config, "a"),
            b=_require(config, "b"),
            payoff=(
                PayoffSpec.test_functional(_require(config, "delta"))
                if config.payoff_kind == "test_functional"
                else PayoffSpec.constant_pair(_require(config, "delta"), config.payoff_k)
            ),
            controls1=controls1,
            controls2=controls2,
        )
    except SpecError as exc:
        raise ConfigError(str(exc)) from exc


def _write_rows(path: Path, header: list[str], rows) -> None:
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _solve(config: RunConfig, spec: GameSpec):
    return upper_lower_gap(
        spec,
        epsilon=config.epsilon,
        max_rounds=config.max_rounds,
        grid_n=config.grid_n,
        control_m=config.control_m,
        tol=config.tol,
    )


def run_solve(config: RunConfig) -> int:
    """Solve both orders and write value.csv, policy.csv, and report.txt."""
    spec = build_spec(config)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        result = _solve(config, spec)
        upper = result.upper
        xs = upper.v.grid.xs
        path = out / "value.csv"
        _write_rows(
            path,
            ["x", "v_lower", "v_upper", "gap"],
            zip(
                xs,
                result.v_lower.values,
                result.v_upper.values,
                np.abs(result.v_upper.values - result.v_lower.values),
            ),
        )
        written.append(path)
        path = out / "policy.csv"
        _write_rows(
            path, ["x", "u1", "u2"], zip(xs, upper.u1.values, upper.u2.values)
        )
        written.append(path)
        path = out / "report.txt"
        with path.open("w") as fh:
            fh.write(f"scenario = {config.scenario}\n")
            fh.write(f"gap = {result.gap!r}\n")
            for label, run in (("upper", result.upper), ("lower", result.lower)):
                rep = run.report
                fh.write(f"[{label}]\n")
                fh.write(f"rounds = {rep.rounds}\n")
                fh.write(f"converged = {rep.converged}\n")
                fh.write(f"value_change = {rep.value_change!r}\n")
                fh.write(f"policy_change = {rep.policy_change!r}\n")
                fh.write(f"max_residual = {rep.max_residual!r}\n")
                fh.write(f"boundary_a = {rep.boundary_a}\n")
                fh.write(f"boundary_b = {rep.boundary_b}\n")
                fh.write(f"sweeps_total = {rep.sweeps_total}\n")
                fh.write(f"elapsed_s = {rep.elapsed:.3f}\n")
        written.append(path)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    if config.strict and not (
        result.upper.report.converged and result.lower.report.converged
    ):
        logger.error("policy iteration did not converge within %d rounds", config.max_rounds)
        return 2
    return 0


def run_validate(config: RunConfig) -> int:
    """Solve in-process, then cross-validate with the Monte Carlo engine."""
    spec = build_spec(config)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        result = _solve(config, spec)
        run = result.upper
        t_max = config.t_max if config.t_max is not None else default_t_max(spec)
        rows = []
        span = spec.b - spec.a
        for i in range(1, config.mc_points + 1):
            x0 = spec.a + span * i / (config.mc_points + 1)
            est = estimate_J(
                spec, run.u1, run.u2, x0, config.mc_paths,
                master_seed=config.seed + i, t_max=t_max,
            )
            v_solver = float(run.v(x0))
            z = (est.mean - v_solver) / max(est.stderr, STDERR_FLOOR)
            rows.append((x0, v_solver, est.mean, est.stderr, z))
        path = out / "mc_validation.csv"
        _write_rows(path, ["x0", "v_solver", "j_mc", "stderr", "z_score"], rows)
        written.append(path)
        rows = []
        for j, horizon in enumerate(config.dpp_horizons):
            chk = check_dpp(
                spec, run.u1, run.u2, config.dpp_x0, horizon, config.mc_paths,
                master_seed=config.seed + 1000 + j, v=run.v,
            )
            rows.append((config.dpp_x0, horizon, chk.residual, chk.stderr))
        path = out / "dpp.csv"
        _write_rows(path, ["x0", "T", "residual", "stderr"], rows)
        written.append(path)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    if config.strict and not (
        result.upper.report.converged and result.lower.report.converged
    ):
        return 2
    return 0


def run_gap(config: RunConfig) -> int:
    """Print the upper/lower sup-norm gap for the configured problem."""
    spec = build_spec(config)
    result = _solve(config, spec)
    print(f"scenario        {config.scenario}")
    print(f"grid_n          {config.grid_n}")
    print(f"control_m       {config.control_m}")
    print(f"max_gap         {result.gap!r}")
    print(f"upper_converged {result.upper.report.converged}")
    print(f"lower_converged {result.lower.report.converged}")
    if config.strict and not (
        result.upper.report.converged and result.lower.report.converged
    ):
        return 2
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reinsgame",
        description="Upper/lower value functions and equilibrium reinsurance "
        "controls for the two-insurer difference game.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "solve both orders and write value.csv/policy.csv/report.txt"),
        ("validate", "solve, then cross-check with the PDMP Monte Carlo engine"),
        ("gap", "print the upper/lower gap without writing files"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", choices=SCENARIO_NAMES + ("custom",))
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--grid-n", type=int, dest="grid_n")
        p.add_argument("--control-m", type=int, dest="control_m")
        p.add_argument("--tol", type=float)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--max-rounds", type=int, dest="max_rounds")
        p.add_argument("--mc-paths", type=int, dest="mc_paths")
        p.add_argument("--seed", type=int)
        p.add_argument("--t-max", type=float, dest="t_max")
        p.add_argument("--out")
        p.add_argument("--strict", action="store_const", const=True, default=None)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key)
        for key in (
            "scenario", "grid_n", "control_m", "tol", "epsilon", "max_rounds",
            "mc_paths", "seed", "t_max", "out", "strict",
        )
    }
    try:
        config = load_config(args.config, overrides)
        if args.command == "solve":
            return run_solve(config)
        if args.command == "validate":
            return run_validate(config)
        return run_gap(config)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return 1
    except ConvergenceError as exc:
        logger.error("solver error: %s", exc)
        return 2
    except OSError as exc:
        logger.error("i/o error: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())

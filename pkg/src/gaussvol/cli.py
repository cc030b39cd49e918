"""Command-line front end: config files, CSV input/output, self-test harness.

The command surface is ``gaussvol <command> --config <file> [--out <file>]
[--n <int>] [--seed <int>]`` with commands ``transform``, ``price``,
``smile``, ``skew``, ``simulate``, ``calibrate`` and ``selftest``. Configs
are TOML with an exhaustively validated schema (unknown keys are rejected
and all violations are reported at once); outputs are UTF-8 CSV with a
header row and numbers serialized to 17 significant digits, so identical
config and seed produce byte-identical files. Exit codes: 0 success, 2
configuration error, 3 numerical failure, 4 self-test failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .calibration import PARAMETER_NAMES, CalibrationProblem, calibrate
from .charfn import transform_curve
from .errors import ConfigurationError, GaussvolError
from .kernels import (
    AffineCurve,
    BrownianBridgeKernel,
    ConstantKernel,
    FractionalAffineCurve,
    ModelConfig,
    RiemannLiouvilleKernel,
    TabulatedConvolutionKernel,
    TabulatedCurve,
)
from .montecarlo import SimulationPlan, _display_paths
from .pricing import (
    SkewPoint,
    SmilePoint,
    _markovian_price_curve,
    _model_curve,
    atm_skew,
    cos_call_price,
    implied_vol,
    smile,
)

__all__ = ["RunConfig", "NumericsConfig", "parse_config", "run_command", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4

_COMMANDS = ("transform", "price", "smile", "skew", "simulate", "calibrate", "selftest")

# Reference smile-comparison parameters for the bundled oracle file.
_REF = dict(s0=1.0, x0=0.1, theta=0.1, kappa=0.0, nu=0.25, rho=-0.7)
_GOLDEN_NAME = "golden_smile_h05.csv"
_GOLDEN_TOL = 1e-2
_GOLDEN_MATURITIES = (0.05, 1.0)
_GOLDEN_LOG_MONEYNESS = np.linspace(-0.3, 0.3, 11)

_MISSING = object()


# ---------------------------------------------------------------------------
# Configuration schema
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NumericsConfig:
    """Numerical knobs shared by the pricing commands."""

    n: int = 512
    n_cos: int = 256
    big_l: float = 12.0
    skew_step: float = 5e-3
    trace_nodes: int = 100


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run configuration.

    ``sections`` holds the validated command-specific tables keyed by
    command name; a command requiring a section that is absent fails with a
    configuration error at run time.
    """

    model: ModelConfig
    numerics: NumericsConfig
    mc: Optional[SimulationPlan]
    sections: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)


def _check_unknown(
    errors: List[str], prefix: str, table: Mapping, allowed: Sequence[str]
) -> None:
    for key in table:
        if key not in allowed:
            errors.append(f"{prefix}.{key}: unknown key")


def _get(
    errors: List[str],
    prefix: str,
    table: Mapping,
    key: str,
    expect: str,
    default: Any = _MISSING,
) -> Any:
    """Fetch ``table[key]`` with a TOML-type check, collecting errors."""
    if key not in table:
        if default is _MISSING:
            errors.append(f"{prefix}.{key}: required key missing")
            return None
        return default
    value = table[key]
    if expect == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{prefix}.{key}: expected a number, got {value!r}")
            return None
        return float(value)
    if expect == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{prefix}.{key}: expected an integer, got {value!r}")
            return None
        return int(value)
    if expect == "bool":
        if not isinstance(value, bool):
            errors.append(f"{prefix}.{key}: expected a boolean, got {value!r}")
            return None
        return bool(value)
    if expect == "str":
        if not isinstance(value, str):
            errors.append(f"{prefix}.{key}: expected a string, got {value!r}")
            return None
        return value
    if expect == "number-list":
        if (
            not isinstance(value, list)
            or not value
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
        ):
            errors.append(
                f"{prefix}.{key}: expected a non-empty array of numbers, got {value!r}"
            )
            return None
        return [float(v) for v in value]
    if expect == "str-list":
        if (
            not isinstance(value, list)
            or not value
            or any(not isinstance(v, str) for v in value)
        ):
            errors.append(
                f"{prefix}.{key}: expected a non-empty array of strings, got {value!r}"
            )
            return None
        return list(value)
    if expect == "table":
        if not isinstance(value, dict):
            errors.append(f"{prefix}.{key}: expected a section, got {value!r}")
            return None
        return value
    raise AssertionError(f"unknown expectation {expect!r}")


def _forbid(
    errors: List[str], prefix: str, table: Mapping, keys: Sequence[str], type_name: str
) -> None:
    for key in keys:
        if key in table:
            errors.append(f"{prefix}.{key}: not used by type {type_name!r}")


def _read_csv_columns(path: Path, columns: Tuple[str, ...]) -> List[Tuple[float, ...]]:
    """Read a CSV with exactly the given header into float row tuples."""
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames != list(columns):
                raise ConfigurationError(
                    f"{path}: expected CSV header {','.join(columns)}, "
                    f"got {reader.fieldnames}"
                )
            rows = []
            for record in reader:
                try:
                    rows.append(tuple(float(record[name]) for name in columns))
                except (TypeError, ValueError) as exc:
                    raise ConfigurationError(
                        f"{path}: non-numeric row {record!r}"
                    ) from exc
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ConfigurationError(f"{path}: no data rows")
    return rows


def _build_kernel(errors: List[str], table: Mapping, base_dir: Path):
    prefix = "model.kernel"
    _check_unknown(errors, prefix, table, ("type", "h", "t1", "samples_path"))
    kind = _get(errors, prefix, table, "type", "str")
    if kind is None:
        return None
    try:
        if kind == "constant":
            _forbid(errors, prefix, table, ("h", "t1", "samples_path"), kind)
            return ConstantKernel()
        if kind == "riemann_liouville":
            _forbid(errors, prefix, table, ("t1", "samples_path"), kind)
            hurst = _get(errors, prefix, table, "h", "number")
            return None if hurst is None else RiemannLiouvilleKernel(hurst=hurst)
        if kind == "brownian_bridge":
            _forbid(errors, prefix, table, ("h", "samples_path"), kind)
            t1 = _get(errors, prefix, table, "t1", "number")
            return None if t1 is None else BrownianBridgeKernel(t1=t1)
        if kind == "tabulated":
            _forbid(errors, prefix, table, ("h", "t1"), kind)
            rel = _get(errors, prefix, table, "samples_path", "str")
            if rel is None:
                return None
            rows = _read_csv_columns(base_dir / rel, ("tau", "value"))
            tau = np.array([r[0] for r in rows])
            values = np.array([r[1] for r in rows])
            return TabulatedConvolutionKernel(tau=tau, values=values)
        errors.append(
            f"{prefix}.type: must be one of constant, riemann_liouville, "
            f"brownian_bridge, tabulated; got {kind!r}"
        )
    except ConfigurationError as exc:
        errors.append(f"{prefix}: {exc}")
    return None


def _build_curve(errors: List[str], table: Mapping, base_dir: Path):
    prefix = "model.curve"
    _check_unknown(errors, prefix, table, ("type", "x0", "theta", "values_path"))
    kind = _get(errors, prefix, table, "type", "str")
    if kind is None:
        return None
    try:
        if kind in ("affine", "fractional_affine"):
            _forbid(errors, prefix, table, ("values_path",), kind)
            x0 = _get(errors, prefix, table, "x0", "number")
            theta = _get(errors, prefix, table, "theta", "number", default=0.0)
            if x0 is None or theta is None:
                return None
            cls = AffineCurve if kind == "affine" else FractionalAffineCurve
            return cls(x0=x0, theta=theta)
        if kind == "tabulated":
            _forbid(errors, prefix, table, ("x0", "theta"), kind)
            rel = _get(errors, prefix, table, "values_path", "str")
            if rel is None:
                return None
            rows = _read_csv_columns(base_dir / rel, ("value",))
            return TabulatedCurve(values=np.array([r[0] for r in rows]))
        errors.append(
            f"{prefix}.type: must be one of affine, fractional_affine, "
            f"tabulated; got {kind!r}"
        )
    except ConfigurationError as exc:
        errors.append(f"{prefix}: {exc}")
    return None


def _read_targets(path: Path) -> List:
    """Calibration targets CSV: smile rows or skew rows by header."""
    smile_header = ("maturity", "log_moneyness", "implied_vol")
    skew_header = ("maturity", "skew")
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            header = next(csv.reader(handle), None)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    if header == list(smile_header):
        rows = _read_csv_columns(path, smile_header)
        return [SmilePoint(k=k, maturity=m, iv=iv) for m, k, iv in rows]
    if header == list(skew_header):
        rows = _read_csv_columns(path, skew_header)
        return [SkewPoint(maturity=m, skew=s) for m, s in rows]
    raise ConfigurationError(
        f"{path}: target header must be {','.join(smile_header)} "
        f"or {','.join(skew_header)}, got {header}"
    )


def _parse_numerics(errors: List[str], table: Mapping) -> NumericsConfig:
    prefix = "numerics"
    _check_unknown(
        errors, prefix, table, ("n", "n_cos", "L", "skew_step", "trace_nodes")
    )
    n = _get(errors, prefix, table, "n", "int", default=512)
    n_cos = _get(errors, prefix, table, "n_cos", "int", default=256)
    big_l = _get(errors, prefix, table, "L", "number", default=12.0)
    skew_step = _get(errors, prefix, table, "skew_step", "number", default=5e-3)
    trace_nodes = _get(errors, prefix, table, "trace_nodes", "int", default=100)
    defaults = NumericsConfig()
    if n is not None and n < 2:
        errors.append(f"{prefix}.n: must be at least 2, got {n}")
    if n_cos is not None and n_cos < 16:
        errors.append(f"{prefix}.n_cos: must be at least 16, got {n_cos}")
    if big_l is not None and big_l < 6.0:
        errors.append(f"{prefix}.L: must be at least 6, got {big_l}")
    if skew_step is not None and not 0.0 < skew_step <= 0.05:
        errors.append(f"{prefix}.skew_step: must lie in (0, 0.05], got {skew_step}")
    if trace_nodes is not None and trace_nodes < 1:
        errors.append(f"{prefix}.trace_nodes: must be at least 1, got {trace_nodes}")
    return NumericsConfig(
        n=n if n is not None else defaults.n,
        n_cos=n_cos if n_cos is not None else defaults.n_cos,
        big_l=big_l if big_l is not None else defaults.big_l,
        skew_step=skew_step if skew_step is not None else defaults.skew_step,
        trace_nodes=trace_nodes if trace_nodes is not None else defaults.trace_nodes,
    )


def _parse_sections(
    errors: List[str],
    raw: Mapping,
    base_dir: Path,
    numerics: NumericsConfig,
) -> Dict[str, Dict[str, Any]]:
    sections: Dict[str, Dict[str, Any]] = {}

    if "transform" in raw:
        table = raw["transform"]
        _check_unknown(errors, "transform", table, ("z_grid", "w"))
        z_grid = _get(errors, "transform", table, "z_grid", "number-list")
        w = _get(errors, "transform", table, "w", "number", default=0.0)
        if z_grid is not None:
            sections["transform"] = {"z_grid": z_grid, "w": w}

    if "price" in raw:
        table = raw["price"]
        _check_unknown(errors, "price", table, ("strike",))
        strike = _get(errors, "price", table, "strike", "number")
        if strike is not None and strike <= 0.0:
            errors.append(f"price.strike: must be positive, got {strike}")
        elif strike is not None:
            sections["price"] = {"strike": strike}

    if "smile" in raw:
        table = raw["smile"]
        _check_unknown(errors, "smile", table, ("log_moneyness", "maturities"))
        log_m = _get(errors, "smile", table, "log_moneyness", "number-list")
        maturities = _get(errors, "smile", table, "maturities", "number-list", default=None)
        if log_m is not None:
            sections["smile"] = {"log_moneyness": log_m, "maturities": maturities}

    if "skew" in raw:
        table = raw["skew"]
        _check_unknown(errors, "skew", table, ("maturities",))
        maturities = _get(errors, "skew", table, "maturities", "number-list")
        if maturities is not None:
            if any(m <= 0.0 for m in maturities):
                errors.append("skew.maturities: every maturity must be positive")
            else:
                sections["skew"] = {"maturities": maturities}

    if "simulate" in raw:
        table = raw["simulate"]
        _check_unknown(errors, "simulate", table, ("paths",))
        paths = _get(errors, "simulate", table, "paths", "int", default=1)
        if paths is not None and paths < 1:
            errors.append(f"simulate.paths: must be at least 1, got {paths}")
        elif paths is not None:
            sections["simulate"] = {"paths": paths}

    if "calibrate" in raw:
        table = raw["calibrate"]
        _check_unknown(
            errors, "calibrate", table, ("targets_path", "free", "budget", "init", "fixed")
        )
        rel = _get(errors, "calibrate", table, "targets_path", "str")
        free = _get(
            errors, "calibrate", table, "free", "str-list", default=["nu", "rho", "H"]
        )
        budget = _get(errors, "calibrate", table, "budget", "int", default=500)
        init_table = _get(errors, "calibrate", table, "init", "table")
        fixed_table = _get(errors, "calibrate", table, "fixed", "table", default={})
        init: Optional[Dict[str, float]] = None
        if init_table is not None:
            init = {}
            for key in init_table:
                number = _get(errors, "calibrate.init", init_table, key, "number")
                if number is not None:
                    init[key] = number
        fixed: Dict[str, float] = {}
        if fixed_table:
            for key in fixed_table:
                number = _get(errors, "calibrate.fixed", fixed_table, key, "number")
                if number is not None:
                    fixed[key] = number
        if rel is not None and free is not None and budget is not None and init is not None:
            try:
                targets = _read_targets(base_dir / rel)
                problem = CalibrationProblem(
                    targets=targets,
                    free_params=tuple(free),
                    fixed_values=fixed,
                    init=init,
                    budget=budget,
                    n=numerics.n,
                    n_cos=numerics.n_cos,
                    big_l=numerics.big_l,
                    skew_step=numerics.skew_step,
                )
            except ConfigurationError as exc:
                errors.append(f"calibrate: {exc}")
            else:
                sections["calibrate"] = {"problem": problem}

    return sections


def parse_config(path) -> RunConfig:
    """Parse and exhaustively validate a TOML run configuration.

    Raises
    ------
    ConfigurationError
        Listing every violated constraint at once (unknown keys, missing
        keys, type mismatches, out-of-range values), or the parse error
        with position information if the file is not valid TOML.
    """
    path = Path(path)
    try:
        with path.open("rb") as handle:
            raw = tomllib.load(handle)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config parse error in {path}: {exc}") from exc

    errors: List[str] = []
    base_dir = path.parent
    _check_unknown(
        errors, "config", raw, ("model", "numerics", "mc") + _COMMANDS[:-1]
    )

    model: Optional[ModelConfig] = None
    model_table = raw.get("model")
    if not isinstance(model_table, dict):
        errors.append("model: required section missing")
    else:
        prefix = "model"
        _check_unknown(
            errors, prefix, model_table,
            ("s0", "kappa", "nu", "rho", "T", "kernel", "curve"),
        )
        s0 = _get(errors, prefix, model_table, "s0", "number")
        kappa = _get(errors, prefix, model_table, "kappa", "number", default=0.0)
        nu = _get(errors, prefix, model_table, "nu", "number")
        rho = _get(errors, prefix, model_table, "rho", "number")
        horizon = _get(errors, prefix, model_table, "T", "number", default=1.0)
        kernel_table = _get(errors, prefix, model_table, "kernel", "table")
        curve_table = _get(errors, prefix, model_table, "curve", "table")
        kernel = (
            _build_kernel(errors, kernel_table, base_dir)
            if kernel_table is not None
            else None
        )
        curve = (
            _build_curve(errors, curve_table, base_dir)
            if curve_table is not None
            else None
        )
        if None not in (s0, kappa, nu, rho, horizon, kernel, curve):
            try:
                model = ModelConfig(
                    s0=s0, kernel=kernel, curve=curve, kappa=kappa,
                    nu=nu, rho=rho, horizon=horizon,
                )
            except ConfigurationError as exc:
                errors.append(f"model: {exc}")

    numerics_table = raw.get("numerics", {})
    if not isinstance(numerics_table, dict):
        errors.append("numerics: must be a section")
        numerics_table = {}
    numerics = _parse_numerics(errors, numerics_table)

    mc_plan: Optional[SimulationPlan] = None
    if "mc" in raw:
        mc_table = raw["mc"]
        if not isinstance(mc_table, dict):
            errors.append("mc: must be a section")
        else:
            _check_unknown(
                errors, "mc", mc_table, ("n_steps", "n_paths", "seed", "antithetic")
            )
            n_steps = _get(errors, "mc", mc_table, "n_steps", "int", default=500)
            n_paths = _get(errors, "mc", mc_table, "n_paths", "int", default=10_000)
            seed = _get(errors, "mc", mc_table, "seed", "int", default=0)
            antithetic = _get(errors, "mc", mc_table, "antithetic", "bool", default=False)
            if None not in (n_steps, n_paths, seed, antithetic):
                try:
                    mc_plan = SimulationPlan(
                        n_steps=n_steps, n_paths=n_paths,
                        seed=seed, antithetic=antithetic,
                    )
                except ConfigurationError as exc:
                    errors.append(f"mc: {exc}")

    sections = _parse_sections(errors, raw, base_dir, numerics)

    if errors:
        raise ConfigurationError(
            "configuration invalid:\n  " + "\n  ".join(sorted(errors))
        )
    assert model is not None  # guaranteed: any failure above added an error
    return RunConfig(model=model, numerics=numerics, mc=mc_plan, sections=sections)


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _write_csv(
    out_path: Optional[str], header: Sequence[str], rows: Sequence[Sequence[Any]]
) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(value) for value in row])
    text = buffer.getvalue()
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8", newline="")


def _section(config: RunConfig, command: str) -> Mapping[str, Any]:
    section = config.sections.get(command)
    if section is None:
        raise ConfigurationError(
            f"the config has no [{command}] section (required by this command)"
        )
    return section


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _run_transform(config: RunConfig, out: Optional[str]) -> int:
    section = _section(config, "transform")
    values = transform_curve(
        config.model,
        config.numerics.n,
        np.asarray(section["z_grid"], dtype=float),
        complex(section["w"]),
    )
    rows = [
        (float(z), value.real, value.imag)
        for z, value in zip(section["z_grid"], values)
    ]
    _write_csv(out, ("z", "re", "im"), rows)
    return EXIT_OK


def _run_price(config: RunConfig, out: Optional[str]) -> int:
    section = _section(config, "price")
    numerics = config.numerics
    price, diagnostics = cos_call_price(
        config.model,
        numerics.n,
        section["strike"],
        config.model.horizon,
        n_cos=numerics.n_cos,
        L=numerics.big_l,
        return_diagnostics=True,
    )
    row = (
        price,
        diagnostics["doubling_gap"],
        diagnostics["tail_mass"],
        diagnostics["interval"][0],
        diagnostics["interval"][1],
        diagnostics["z_max"],
    )
    _write_csv(
        out,
        ("price", "doubling_gap", "tail_mass", "interval_lo", "interval_hi", "z_max"),
        [row],
    )
    return EXIT_OK


def _run_smile(config: RunConfig, out: Optional[str]) -> int:
    section = _section(config, "smile")
    numerics = config.numerics
    maturities = section["maturities"] or [config.model.horizon]
    strikes = np.exp(np.asarray(section["log_moneyness"], dtype=float)) * config.model.s0
    rows = []
    for maturity in maturities:
        points = smile(
            config.model, numerics.n, strikes, maturity,
            n_cos=numerics.n_cos, L=numerics.big_l,
        )
        rows.extend((maturity, point.k, point.iv) for point in points)
    _write_csv(out, ("maturity", "log_moneyness", "implied_vol"), rows)
    return EXIT_OK


def _run_skew(config: RunConfig, out: Optional[str]) -> int:
    section = _section(config, "skew")
    numerics = config.numerics
    rows = []
    for maturity in section["maturities"]:
        point = atm_skew(
            config.model, numerics.n, maturity,
            h=numerics.skew_step, n_cos=numerics.n_cos, L=numerics.big_l,
        )
        rows.append((maturity, point.skew))
    _write_csv(out, ("maturity", "skew"), rows)
    return EXIT_OK


def _run_simulate(config: RunConfig, out: Optional[str]) -> int:
    section = _section(config, "simulate")
    if config.mc is None:
        raise ConfigurationError(
            "the simulate command requires an [mc] section (n_steps, n_paths, "
            "seed, antithetic)"
        )
    count = int(section["paths"])
    grid, x, log_path = _display_paths(config.model, config.mc, count)
    n_steps = x.shape[1]
    rows = []
    for index in range(count):
        for step, t in enumerate(grid):
            # Left-point step convention: the volatility column repeats the
            # final left-endpoint state on the horizon row.
            x_value = x[index, min(step, n_steps - 1)]
            if step == 0:
                s_value = config.model.s0
            else:
                s_value = math.exp(log_path[index, step - 1])
            rows.append((index, float(t), x_value, x_value * x_value, s_value))
    _write_csv(out, ("path", "t", "x", "x_squared", "s"), rows)
    return EXIT_OK


def _run_calibrate(config: RunConfig, out: Optional[str]) -> int:
    section = _section(config, "calibrate")
    result = calibrate(section["problem"])
    rows: List[Tuple[str, Any]] = [
        (name, result.params[name]) for name in PARAMETER_NAMES
    ]
    rows.append(("objective", result.objective))
    rows.append(("evaluations", result.evaluations))
    rows.append(("budget_exhausted", result.budget_exhausted))
    _write_csv(out, ("parameter", "value"), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Self-test and the bundled oracle smile
# ---------------------------------------------------------------------------


def _golden_path() -> Path:
    return Path(__file__).parent / "data" / _GOLDEN_NAME


def _golden_model() -> ModelConfig:
    return ModelConfig(
        s0=_REF["s0"],
        kernel=ConstantKernel(),
        curve=AffineCurve(x0=_REF["x0"], theta=_REF["theta"]),
        kappa=_REF["kappa"],
        nu=_REF["nu"],
        rho=_REF["rho"],
        horizon=1.0,
    )


def _golden_rows() -> List[Tuple[float, float, float]]:
    """Oracle implied vols from the backward-ODE route (never hand-edited).

    Rows whose price sits at rounding-noise level (below 1e-10, deep
    out-of-the-money at short maturity) are omitted: a noise-level price
    still inverts to a number, but not to a meaningful volatility.
    """
    rows = []
    for maturity in _GOLDEN_MATURITIES:
        curve = _markovian_price_curve(
            _REF["s0"], _REF["x0"], _REF["theta"], _REF["kappa"],
            _REF["nu"], _REF["rho"], maturity, 512, 12.0,
        )
        for log_m in _GOLDEN_LOG_MONEYNESS:
            strike = float(np.exp(log_m))
            price = curve.call_price(strike)
            if price < 1e-10:
                continue
            try:
                vol = implied_vol(price, _REF["s0"], strike, maturity)
            except GaussvolError:
                continue
            rows.append((maturity, float(log_m), vol))
    return rows


def _regen_golden() -> Path:
    path = _golden_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = _golden_rows()
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("maturity", "log_moneyness", "implied_vol"))
    for row in rows:
        writer.writerow([_format_cell(value) for value in row])
    path.write_text(buffer.getvalue(), encoding="utf-8", newline="")
    return path

def _golden_check() -> Tuple[float, bool]:
    """Compare the pricer's smile against the bundled oracle file."""
    rows = _read_csv_columns(_golden_path(), ("maturity", "log_moneyness", "implied_vol"))
    model = _golden_model()
    curves: Dict[float, Any] = {}
    worst = 0.0
    for maturity, log_m, oracle_vol in rows:
        if maturity not in curves:
            curves[maturity] = _model_curve(model, 512, maturity, 512, 12.0)
        strike = float(np.exp(log_m))
        vol = implied_vol(
            curves[maturity].call_price(strike), _REF["s0"], strike, maturity
        )
        worst = max(worst, abs(vol - oracle_vol))
    return worst, worst < _GOLDEN_TOL


def _run_selftest(out: Optional[str], regen_golden: bool) -> int:
    if regen_golden:
        path = _regen_golden()
        print(f"regenerated oracle file {path}")
        return EXIT_OK
    from .acceptance import run_all  # deferred: pulls in every module

    results = run_all()
    all_passed = True
    report_rows = []
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        all_passed = all_passed and result.passed
        print(
            f"C{result.number:02d} {status} [{result.elapsed_seconds:7.2f}s] "
            f"{result.title}: {result.detail}"
        )
        report_rows.append(
            (f"C{result.number:02d}", result.passed, result.elapsed_seconds,
             result.detail)
        )
    import time as _time

    start = _time.monotonic()
    golden_diff, golden_ok = _golden_check()
    golden_elapsed = _time.monotonic() - start
    all_passed = all_passed and golden_ok
    golden_detail = (
        f"max abs vol diff vs bundled oracle smile = {golden_diff:.2e} "
        f"(tol {_GOLDEN_TOL:g})"
    )
    print(f"golden {'PASS' if golden_ok else 'FAIL'} [{golden_elapsed:7.2f}s] {golden_detail}")
    report_rows.append(("golden", golden_ok, golden_elapsed, golden_detail))
    if out is not None:
        _write_csv(out, ("check", "passed", "seconds", "detail"), report_rows)
    return EXIT_OK if all_passed else EXIT_ACCEPTANCE


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

_RUNNERS = {
    "transform": _run_transform,
    "price": _run_price,
    "smile": _run_smile,
    "skew": _run_skew,
    "simulate": _run_simulate,
    "calibrate": _run_calibrate,
}


def run_command(
    command: str,
    config: Optional[RunConfig],
    out: Optional[str] = None,
    n: Optional[int] = None,
    seed: Optional[int] = None,
    regen_golden: bool = False,
) -> int:
    """Execute one command against a parsed configuration; return exit status.

    ``n`` overrides ``numerics.n`` and ``seed`` overrides ``mc.seed`` (a
    default simulation plan is created if the config has no ``[mc]``
    section). ``selftest`` ignores the configuration entirely.
    """
    if command == "selftest":
        return _run_selftest(out, regen_golden)
    if command not in _RUNNERS:
        raise ConfigurationError(
            f"unknown command {command!r}; choose from {', '.join(_COMMANDS)}"
        )
    if config is None:
        raise ConfigurationError(f"the {command} command requires --config")
    if n is not None:
        if n < 2:
            raise ConfigurationError(f"--n must be at least 2, got {n}")
        config = replace(config, numerics=replace(config.numerics, n=n))
    if seed is not None:
        base_plan = config.mc or SimulationPlan(
            n_steps=500, n_paths=10_000, seed=0, antithetic=False
        )
        config = replace(config, mc=replace(base_plan, seed=seed))
    return _RUNNERS[command](config, out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussvol",
        description=(
            "Fourier pricing, simulation and calibration for Gaussian "
            "stochastic volatility models with general Volterra kernels."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "transform": "characteristic-function values on a frequency grid (CSV z,re,im)",
        "price": "one European call price with convergence diagnostics",
        "smile": "implied-volatility smile rows (CSV maturity,log_moneyness,implied_vol)",
        "skew": "at-the-money skew rows (CSV maturity,skew)",
        "simulate": "sample paths of volatility and price (CSV path,t,x,x_squared,s)",
        "calibrate": "fit free parameters to target smile or skew data",
        "selftest": "run the bundled end-to-end checks; exit 4 on any failure",
    }
    for name in _COMMANDS:
        sub = subparsers.add_parser(name, help=descriptions[name])
        sub.add_argument(
            "--config",
            required=(name != "selftest"),
            default=None,
            help="TOML configuration file",
        )
        sub.add_argument("--out", default=None, help="output CSV path (default stdout)")
        sub.add_argument(
            "--n", type=int, default=None, help="override numerics.n for this run"
        )
        sub.add_argument(
            "--seed", type=int, default=None, help="override mc.seed for this run"
        )
        if name == "selftest":
            sub.add_argument(
                "--regen-golden",
                action="store_true",
                help="regenerate the bundled oracle smile file and exit",
            )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point; returns the process exit status."""
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config(args.config) if args.config is not None else None
        return run_command(
            args.command,
            config,
            out=args.out,
            n=args.n,
            seed=args.seed,
            regen_golden=getattr(args, "regen_golden", False),
        )
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GaussvolError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

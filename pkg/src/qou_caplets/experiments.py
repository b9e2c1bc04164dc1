"""Experiment driver: smile tables, error surfaces, and contract reports.

Turns a YAML experiment description into CSV artifacts plus a machine-readable
run manifest.  Four operations share one config schema:

- ``run_smile``: per reset date, exact implied volatility next to the three
  expansion approximations on a log-moneyness grid, one
  ``smile_T=<value>.csv`` per reset.
- ``run_error_surface``: relative error of the second-order approximation on
  the (log-moneyness, reset) grid, one ``error_surface.csv``, with a summary
  of the maximum over the parabolic region |k - x| <= 0.5*sqrt(T - t).
- ``run_price`` / ``run_mc_check``: a single-contract text report with the
  exact forward price, its implied volatility, the approximations, and (when
  a Monte Carlo block is configured) the simulation estimate with a PASS/FAIL
  three-standard-error verdict.

Config schema (YAML mapping; unknown keys anywhere are hard errors)::

    model:        # required
      kappa: 0.9          # > 0
      theta: 0.2778       # >= 0
      delta: 0.2          # > 0
      q: 0.0              # optional, >= 0, default 0
      y0: 0.2828          # factor value at the valuation date
    t: 0.0                # optional valuation date, default 0
    tbar: 2.0             # required settlement date
    resets: [0.015625, 0.03125]     # optional; list or {start, stop, count,
                                    # spacing: linear|log}; command default
    strike_grid: [-0.15, 0.15]      # optional; list or {start, stop, count};
                                    # default 41 points in [-0.15, 0.15]
    contract:             # required by price / mc-check, ignored otherwise
      reset: 0.125
      log_moneyness: 0.0  # k - x, or instead:
      strike_rate: 0.25   # absolute simple rate, k = log(strike_rate)
    quad: {omega_i: 1.5}  # optional transform-quadrature overrides
    mc: {n_paths: 200000, n_steps: 512, seed: 7}   # optional
    threads: 1            # optional worker count
    output_dir: out       # optional artifact directory

Determinism: rows are computed as independent (reset, strike) tasks on a
thread pool, then sorted before writing, so the thread count never changes
the output bytes; re-running an identical config and seed reproduces every
CSV byte for byte.  Any pricing error aborts only the affected reset date:
each of its rows becomes a record in ``errors.csv`` and the remaining resets
still run.  The manifest records the config hash (SHA-256 of the resolved
canonical JSON), the package version, and per-stage wall-clock seconds.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import yaml

from . import __version__
from .black import implied_vol_from_price
from .bonds import ContractSpec, log_forward_rate_xi
from .errors import (
    ArgumentError,
    ConfigError,
    ConsistencyError,
    NonPositiveForwardError,
    QouError,
)
from .expansion import TimeIntegralTable, ivol_approx, nested_time_integrals
from .fourier import CapletTransformPricer, QuadratureConfig
from .montecarlo import McConfig, McEstimate, mc_forward_caplet_price
from .riccati import QouParams

SMILE_HEADER = ("log_moneyness", "iv_exact", "iv_bar0", "iv_bar1", "iv_bar2")
SURFACE_HEADER = ("log_moneyness", "reset_T", "rel_err")
ERROR_HEADER = ("reset_T", "log_moneyness", "error")

#: Half-width multiplier of the parabolic accuracy region |k - x| <= l*sqrt(T - t).
PARABOLIC_HALF_WIDTH = 0.5

_DEFAULT_STRIKE_GRID = tuple(float(v) for v in np.linspace(-0.15, 0.15, 41))
_DEFAULT_SMILE_RESETS = (1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0)
_DEFAULT_SURFACE_RESETS = tuple(
    float(v) for v in np.geomspace(1.0 / 64.0, 1.0 / 8.0, 16)
)

_TOP_KEYS = {
    "model", "t", "tbar", "resets", "strike_grid", "contract",
    "quad", "mc", "threads", "output_dir",
}
_MODEL_KEYS = {"kappa", "theta", "delta", "q", "y0"}
_CONTRACT_KEYS = {"reset", "log_moneyness", "strike_rate"}
_QUAD_KEYS = {
    "omega_i", "omega_max", "nodes", "f_nodes",
    "tail_tol", "tail_growth", "tail_step_cap", "omega_cap",
}
_MC_KEYS = {"n_paths", "n_steps", "seed"}
_GRID_KEYS = {"start", "stop", "count", "spacing"}


# ---------------------------------------------------------------------------
# Config parsing and validation
# ---------------------------------------------------------------------------


def _require_mapping(value: Any, where: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigError(f"{where} must be a mapping, got {type(value).__name__}")
    bad = [k for k in value if not isinstance(k, str)]
    if bad:
        raise ConfigError(f"{where} has non-string keys {bad}")
    return value


def _check_keys(mapping: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(
            f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}"
        )


def _as_float(value: Any, where: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{where} must be a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        # PyYAML reads exponent literals without a decimal point ("1e-10")
        # as strings; accept any string that parses as one float.
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{where} must be a number, got {value!r}")


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return int(value)


def _as_grid(value: Any, where: str, allow_log: bool) -> tuple[float, ...]:
    """Parse a list of floats or a {start, stop, count[, spacing]} mapping."""
    if isinstance(value, Sequence) and not isinstance(value, (str, bytes)):
        return tuple(_as_float(v, f"{where}[{i}]") for i, v in enumerate(value))
    mapping = _require_mapping(value, where)
    allowed = _GRID_KEYS if allow_log else _GRID_KEYS - {"spacing"}
    _check_keys(mapping, allowed, where)
    for key in ("start", "stop", "count"):
        if key not in mapping:
            raise ConfigError(f"{where} mapping needs '{key}'")
    start = _as_float(mapping["start"], f"{where}.start")
    stop = _as_float(mapping["stop"], f"{where}.stop")
    count = _as_int(mapping["count"], f"{where}.count")
    spacing = mapping.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError(f"{where}.spacing must be 'linear' or 'log', got {spacing!r}")
    if count < 1:
        raise ConfigError(f"{where}.count must be >= 1, got {count}")
    if count > 1 and not start < stop:
        raise ConfigError(f"{where} needs start < stop, got {start} >= {stop}")
    if spacing == "log":
        if start <= 0.0:
            raise ConfigError(f"{where}.start must be > 0 for log spacing")
        values = np.geomspace(start, stop, count)
    else:
        values = np.linspace(start, stop, count)
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class SingleContract:
    """Strike selection for the single-contract commands.

    Exactly one of ``log_moneyness`` (offset k - x from the log forward
    rate) and ``strike_rate`` (absolute simple rate, whose log is the log
    strike) is set.
    """

    reset: float
    log_moneyness: float | None
    strike_rate: float | None

    def log_strike(self, x: float) -> float:
        """Resolve the log strike given the log forward rate x."""
        if self.log_moneyness is not None:
            return x + self.log_moneyness
        assert self.strike_rate is not None
        if self.strike_rate <= 0.0:
            raise NonPositiveForwardError(
                f"strike rate {self.strike_rate:g} is not positive; its log "
                "(the log strike k) is undefined: simple rates priced by "
                "this model live strictly above zero"
            )
        return math.log(self.strike_rate)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description shared by all four operations.

    ``resets`` is None when the config omitted it; each operation then
    substitutes its own default grid.  ``strike_grid`` is always resolved
    and strictly increasing with at least one point.
    """

    model: QouParams
    t: float
    tbar: float
    resets: tuple[float, ...] | None
    strike_grid: tuple[float, ...]
    contract: SingleContract | None
    quad: QuadratureConfig
    mc: McConfig | None
    threads: int
    output_dir: str

    def __post_init__(self) -> None:
        if not self.t < self.tbar:
            raise ConfigError(f"need t < tbar, got t={self.t}, tbar={self.tbar}")
        if self.resets is not None:
            self._check_resets(self.resets)
        if len(self.strike_grid) == 0:
            raise ConfigError("strike_grid is empty; nothing to compute")
        diffs = np.diff(self.strike_grid)
        if len(diffs) and not np.all(diffs > 0.0):
            raise ConfigError("strike_grid must be strictly increasing")
        if self.contract is not None:
            self._check_resets((self.contract.reset,))
            given = (self.contract.log_moneyness, self.contract.strike_rate)
            if (given[0] is None) == (given[1] is None):
                raise ConfigError(
                    "contract needs exactly one of log_moneyness and strike_rate"
                )
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")

    def _check_resets(self, resets: Sequence[float]) -> None:
        if len(resets) == 0:
            raise ConfigError("resets is empty; nothing to compute")
        for T in resets:
            if not (math.isfinite(T) and self.t < T < self.tbar):
                raise ConfigError(
                    f"every reset must satisfy t < T < tbar, got T={T} "
                    f"with t={self.t}, tbar={self.tbar}"
                )


def config_from_mapping(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Build a validated :class:`ExperimentConfig` from parsed YAML."""
    top = _require_mapping(raw, "config")
    _check_keys(top, _TOP_KEYS, "config")
    if "model" not in top:
        raise ConfigError("config needs a 'model' block")
    if "tbar" not in top:
        raise ConfigError("config needs 'tbar'")

    model_map = _require_mapping(top["model"], "model")
    _check_keys(model_map, _MODEL_KEYS, "model")
    for key in ("kappa", "theta", "delta", "y0"):
        if key not in model_map:
            raise ConfigError(f"model needs '{key}'")
    try:
        model = QouParams(
            kappa=_as_float(model_map["kappa"], "model.kappa"),
            theta=_as_float(model_map["theta"], "model.theta"),
            delta=_as_float(model_map["delta"], "model.delta"),
            q=_as_float(model_map.get("q", 0.0), "model.q"),
            y0=_as_float(model_map["y0"], "model.y0"),
        )
    except ArgumentError as exc:
        raise ConfigError(f"model: {exc}") from exc

    resets = None
    if "resets" in top:
        resets = _as_grid(top["resets"], "resets", allow_log=True)

    strike_grid = _DEFAULT_STRIKE_GRID
    if "strike_grid" in top:
        strike_grid = _as_grid(top["strike_grid"], "strike_grid", allow_log=False)

    contract = None
    if "contract" in top:
        cmap = _require_mapping(top["contract"], "contract")
        _check_keys(cmap, _CONTRACT_KEYS, "contract")
        if "reset" not in cmap:
            raise ConfigError("contract needs 'reset'")
        contract = SingleContract(
            reset=_as_float(cmap["reset"], "contract.reset"),
            log_moneyness=(
                _as_float(cmap["log_moneyness"], "contract.log_moneyness")
                if "log_moneyness" in cmap
                else None
            ),
            strike_rate=(
                _as_float(cmap["strike_rate"], "contract.strike_rate")
                if "strike_rate" in cmap
                else None
            ),
        )

    quad_kwargs: dict[str, Any] = {}
    if "quad" in top:
        qmap = _require_mapping(top["quad"], "quad")
        _check_keys(qmap, _QUAD_KEYS, "quad")
        for key, value in qmap.items():
            target = f"quad.{key}"
            quad_kwargs[key] = (
                _as_int(value, target)
                if key in ("nodes", "f_nodes")
                else _as_float(value, target)
            )
    try:
        quad = QuadratureConfig(**quad_kwargs)
    except ArgumentError as exc:
        raise ConfigError(f"quad: {exc}") from exc

    mc = None
    if "mc" in top:
        mmap = _require_mapping(top["mc"], "mc")
        _check_keys(mmap, _MC_KEYS, "mc")
        for key in ("n_paths", "n_steps", "seed"):
            if key not in mmap:
                raise ConfigError(f"mc needs '{key}'")
        try:
            mc = McConfig(
                n_paths=_as_int(mmap["n_paths"], "mc.n_paths"),
                n_steps=_as_int(mmap["n_steps"], "mc.n_steps"),
                seed=_as_int(mmap["seed"], "mc.seed"),
            )
        except ArgumentError as exc:
            raise ConfigError(f"mc: {exc}") from exc

    return ExperimentConfig(
        model=model,
        t=_as_float(top.get("t", 0.0), "t"),
        tbar=_as_float(top["tbar"], "tbar"),
        resets=resets,
        strike_grid=strike_grid,
        contract=contract,
        quad=quad,
        mc=mc,
        threads=_as_int(top.get("threads", 1), "threads"),
        output_dir=str(top.get("output_dir", "out")),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a YAML experiment config file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {p} is not valid YAML: {exc}") from exc
    if raw is None:
        raise ConfigError(f"config {p} is empty")
    return config_from_mapping(_require_mapping(raw, f"config {p}"))


def apply_overrides(
    config: ExperimentConfig,
    out: str | None = None,
    threads: int | None = None,
    seed: int | None = None,
) -> ExperimentConfig:
    """Return a copy of the config with command-line overrides applied.

    A seed override requires an mc block to land on; overriding a config
    without one is rejected rather than silently dropped.
    """
    if out is not None:
        config = replace(config, output_dir=out)
    if threads is not None:
        if threads < 1:
            raise ConfigError(f"threads must be >= 1, got {threads}")
        config = replace(config, threads=threads)
    if seed is not None:
        if config.mc is None:
            raise ConfigError(
                "--seed was given but the config has no mc block to apply it to"
            )
        try:
            config = replace(config, mc=replace(config.mc, seed=seed))
        except ArgumentError as exc:
            raise ConfigError(f"mc: {exc}") from exc
    return config


# ---------------------------------------------------------------------------
# Row types and run bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmileRow:
    """One smile-table row: exact implied vol next to the approximations."""

    log_moneyness: float
    iv_exact: float
    iv_bar0: float
    iv_bar1: float
    iv_bar2: float

    def __post_init__(self) -> None:
        values = (self.iv_exact, self.iv_bar0, self.iv_bar1, self.iv_bar2)
        if not all(math.isfinite(v) for v in values):
            raise ConsistencyError(
                f"non-finite implied volatility at k-x={self.log_moneyness:g}: {values}"
            )
        if not self.iv_exact > 0.0:
            raise ConsistencyError(
                f"exact implied volatility {self.iv_exact:g} is not positive "
                f"at k-x={self.log_moneyness:g}"
            )


@dataclass(frozen=True)
class ErrorCell:
    """One error-surface cell: relative error of the second-order smile."""

    log_moneyness: float
    reset: float
    rel_err: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rel_err) and self.rel_err >= 0.0):
            raise ConsistencyError(
                f"relative error {self.rel_err!r} at "
                f"(k-x={self.log_moneyness:g}, T={self.reset:g}) is not a "
                "finite non-negative number"
            )


@dataclass(frozen=True)
class RowError:
    """Record of one aborted row; reset-level failures repeat per row."""

    reset: float
    log_moneyness: float
    message: str


@dataclass(frozen=True)
class RunReport:
    """Artifacts and bookkeeping of one completed operation."""

    command: str
    out_dir: Path
    config_hash: str
    files: tuple[str, ...]
    n_rows: int
    errors: tuple[RowError, ...]
    summary: Mapping[str, Any]
    text: str = ""

    @property
    def ok(self) -> bool:
        """Whether the run completed with no recorded errors and no FAIL."""
        return not self.errors and self.summary.get("verdict") != "FAIL"


# ---------------------------------------------------------------------------
# Canonical hashing and artifact writing
# ---------------------------------------------------------------------------


def _canonical_payload(
    command: str, config: ExperimentConfig, resets: tuple[float, ...]
) -> dict[str, Any]:
    """Resolved inputs that determine the command's outputs, for hashing.

    Execution details that cannot change output bytes (thread count, output
    directory) are excluded on purpose.
    """
    payload: dict[str, Any] = {
        "command": command,
        "model": {
            "kappa": config.model.kappa,
            "theta": config.model.theta,
            "delta": config.model.delta,
            "q": config.model.q,
            "y0": config.model.y0,
        },
        "t": config.t,
        "tbar": config.tbar,
        "quad": {
            "omega_i": config.quad.omega_i,
            "omega_max": config.quad.omega_max,
            "nodes": config.quad.nodes,
            "f_nodes": config.quad.f_nodes,
            "tail_tol": config.quad.tail_tol,
            "tail_growth": config.quad.tail_growth,
            "tail_step_cap": config.quad.tail_step_cap,
            "omega_cap": config.quad.omega_cap,
        },
    }
    if command in ("smile", "error-surface"):
        payload["resets"] = list(resets)
        payload["strike_grid"] = list(config.strike_grid)
    else:
        contract = config.contract
        assert contract is not None
        payload["contract"] = {
            "reset": contract.reset,
            "log_moneyness": contract.log_moneyness,
            "strike_rate": contract.strike_rate,
        }
        if config.mc is not None and command in ("price", "mc-check"):
            payload["mc"] = {
                "n_paths": config.mc.n_paths,
                "n_steps": config.mc.n_steps,
                "seed": config.mc.seed,
            }
    return payload


def config_hash(command: str, config: ExperimentConfig,
                resets: tuple[float, ...] = ()) -> str:
    """SHA-256 hex digest of the resolved canonical JSON payload."""
    blob = json.dumps(
        _canonical_payload(command, config, resets),
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_manifest(
    out_dir: Path,
    command: str,
    digest: str,
    timings: Mapping[str, float],
    files: Sequence[str],
    n_rows: int,
    n_errors: int,
    summary: Mapping[str, Any],
) -> None:
    manifest = {
        "command": command,
        "config_hash": digest,
        "version": __version__,
        "stage_timings": {k: round(v, 6) for k, v in timings.items()},
        "files": list(files),
        "n_rows": n_rows,
        "n_errors": n_errors,
    }
    if summary:
        manifest["summary"] = dict(summary)
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Shared evaluation machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _ResetContext:
    """Per-reset shared state: log forward rate, warmed pricer, integrals."""

    reset: float
    x: float
    template: ContractSpec
    pricer: CapletTransformPricer
    table: TimeIntegralTable


def _setup_reset(config: ExperimentConfig, T: float) -> _ResetContext:
    template = ContractSpec(t=config.t, T=T, tbar=config.tbar, k=0.0)
    x = log_forward_rate_xi(config.model, template, config.model.y0)
    pricer = CapletTransformPricer(
        config.model, config.t, T, config.tbar, config.model.y0, config.quad
    )
    # The transform tail grows monotonically as the log strike falls, so one
    # pricing call at the lowest strike freezes the lazily-built kernel
    # segments before worker threads start sharing the pricer read-only.
    pricer.price_u(x + config.strike_grid[0])
    table = nested_time_integrals(template, config.model, x, config.model.y0)
    return _ResetContext(reset=T, x=x, template=template, pricer=pricer, table=table)


def _smile_row(config: ExperimentConfig, ctx: _ResetContext, offset: float) -> SmileRow:
    k = ctx.x + offset
    iv_exact = float(ctx.pricer.implied_vol(k))
    approx = ivol_approx(
        2, ctx.template, config.model, ctx.x, config.model.y0, k, table=ctx.table
    )
    return SmileRow(
        log_moneyness=offset,
        iv_exact=iv_exact,
        iv_bar0=approx.sbar[0],
        iv_bar1=approx.sbar[1],
        iv_bar2=approx.sbar[2],
    )


def _parallel_map(fn: Callable[[Any], Any], items: Sequence[Any], threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _evaluate_grid(
    config: ExperimentConfig, resets: tuple[float, ...]
) -> tuple[dict[float, list[SmileRow]], list[RowError], dict[str, float]]:
    """Price every (reset, strike) cell, aborting failed resets wholesale.

    Returns rows per successful reset, one error record per missing row, and
    the stage timings.  A failure anywhere inside a reset date (setup or any
    single cell) drops that date's rows entirely so a partially failed smile
    can never masquerade as a complete one.
    """
    timings: dict[str, float] = {}
    tick = time.perf_counter()

    def setup(T: float):
        try:
            return ("ok", _setup_reset(config, T))
        except QouError as exc:
            return ("err", f"{type(exc).__name__}: {exc}")

    setups = _parallel_map(setup, resets, config.threads)
    timings["setup"] = time.perf_counter() - tick

    tick = time.perf_counter()
    errors: list[RowError] = []
    contexts: list[_ResetContext] = []
    for T, (status, payload) in zip(resets, setups):
        if status == "ok":
            contexts.append(payload)
        else:
            errors.extend(
                RowError(reset=T, log_moneyness=offset, message=payload)
                for offset in config.strike_grid
            )

    def cell(task: tuple[_ResetContext, float]):
        ctx, offset = task
        try:
            return ("ok", _smile_row(config, ctx, offset))
        except QouError as exc:
            return ("err", f"{type(exc).__name__}: {exc}")

    tasks = [(ctx, offset) for ctx in contexts for offset in config.strike_grid]
    outcomes = _parallel_map(cell, tasks, config.threads)
    timings["cells"] = time.perf_counter() - tick

    rows_by_reset: dict[float, list[SmileRow]] = {}
    n_strikes = len(config.strike_grid)
    for i, ctx in enumerate(contexts):
        chunk = outcomes[i * n_strikes : (i + 1) * n_strikes]
        failed = [(offset, payload)
                  for offset, (status, payload) in zip(config.strike_grid, chunk)
                  if status == "err"]
        if failed:
            fail_map = dict(failed)
            errors.extend(
                RowError(
                    reset=ctx.reset,
                    log_moneyness=offset,
                    message=fail_map.get(
                        offset, "aborted: reset date failed at another strike"
                    ),
                )
                for offset in config.strike_grid
            )
        else:
            rows_by_reset[ctx.reset] = [payload for _, payload in chunk]
    return rows_by_reset, errors, timings


def _finish_run(
    command: str,
    config: ExperimentConfig,
    resets: tuple[float, ...],
    out_dir: Path,
    files: list[str],
    n_rows: int,
    errors: list[RowError],
    timings: dict[str, float],
    summary: Mapping[str, Any],
) -> RunReport:
    digest = config_hash(command, config, resets)
    if errors:
        error_rows = [
            (e.reset, e.log_moneyness, e.message)
            for e in sorted(errors, key=lambda e: (e.reset, e.log_moneyness))
        ]
        _write_csv(out_dir / "errors.csv", ERROR_HEADER, error_rows)
        files.append("errors.csv")
    _write_manifest(
        out_dir, command, digest, timings, files, n_rows, len(errors), summary
    )
    files.append("manifest.json")
    return RunReport(
        command=command,
        out_dir=out_dir,
        config_hash=digest,
        files=tuple(files),
        n_rows=n_rows,
        errors=tuple(sorted(errors, key=lambda e: (e.reset, e.log_moneyness))),
        summary=dict(summary),
    )


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def run_smile(config: ExperimentConfig) -> RunReport:
    """Write one ``smile_T=<value>.csv`` per reset date."""
    resets = config.resets if config.resets is not None else _DEFAULT_SMILE_RESETS
    ExperimentConfig._check_resets(config, resets)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows_by_reset, errors, timings = _evaluate_grid(config, resets)

    tick = time.perf_counter()
    files: list[str] = []
    n_rows = 0
    for T in sorted(rows_by_reset):
        rows = sorted(rows_by_reset[T], key=lambda r: r.log_moneyness)
        name = f"smile_T={T!r}.csv"
        _write_csv(
            out_dir / name,
            SMILE_HEADER,
            [(r.log_moneyness, r.iv_exact, r.iv_bar0, r.iv_bar1, r.iv_bar2)
             for r in rows],
        )
        files.append(name)
        n_rows += len(rows)
    timings["write"] = time.perf_counter() - tick

    return _finish_run(
        "smile", config, resets, out_dir, files, n_rows, errors, timings, {}
    )


def run_error_surface(config: ExperimentConfig) -> RunReport:
    """Write ``error_surface.csv`` and summarise the parabolic region."""
    resets = config.resets if config.resets is not None else _DEFAULT_SURFACE_RESETS
    ExperimentConfig._check_resets(config, resets)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows_by_reset, errors, timings = _evaluate_grid(config, resets)

    tick = time.perf_counter()
    cells: list[ErrorCell] = []
    for T, rows in rows_by_reset.items():
        for row in rows:
            cells.append(
                ErrorCell(
                    log_moneyness=row.log_moneyness,
                    reset=T,
                    rel_err=abs(row.iv_bar2 - row.iv_exact) / row.iv_exact,
                )
            )
    cells.sort(key=lambda c: (c.reset, c.log_moneyness))
    _write_csv(
        out_dir / "error_surface.csv",
        SURFACE_HEADER,
        [(c.log_moneyness, c.reset, c.rel_err) for c in cells],
    )

    inside = [
        c.rel_err
        for c in cells
        if abs(c.log_moneyness) <= PARABOLIC_HALF_WIDTH * math.sqrt(c.reset - config.t)
    ]
    summary: dict[str, Any] = {
        "parabolic_half_width": PARABOLIC_HALF_WIDTH,
        "parabolic_cells": len(inside),
        "parabolic_max_rel_err": max(inside) if inside else None,
    }
    timings["write"] = time.perf_counter() - tick

    return _finish_run(
        "error-surface",
        config,
        resets,
        out_dir,
        ["error_surface.csv"],
        len(cells),
        errors,
        timings,
        summary,
    )


def _contract_report(config: ExperimentConfig, command: str, include_mc: bool) -> RunReport:
    if config.contract is None:
        raise ConfigError(f"{command} needs a 'contract' block in the config")
    if include_mc and config.mc is None:
        raise ConfigError(f"{command} needs an 'mc' block in the config")
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}

    tick = time.perf_counter()
    T = config.contract.reset
    model = config.model
    template = ContractSpec(t=config.t, T=T, tbar=config.tbar, k=0.0)
    x = log_forward_rate_xi(model, template, model.y0)
    k = config.contract.log_strike(x)
    spec = ContractSpec(t=config.t, T=T, tbar=config.tbar, k=k)
    pricer = CapletTransformPricer(model, config.t, T, config.tbar, model.y0, config.quad)
    price = float(pricer.forward_price(k))
    iv_exact = float(implied_vol_from_price(price, x, k, T - config.t, spec.tau))
    approx = ivol_approx(2, spec, model, x, model.y0, k)
    timings["pricing"] = time.perf_counter() - tick

    lines = [
        f"command: {command}",
        f"model: kappa={model.kappa!r} theta={model.theta!r} "
        f"delta={model.delta!r} q={model.q!r} y0={model.y0!r}",
        f"contract: t={config.t!r} T={T!r} tbar={config.tbar!r} tau={spec.tau!r}",
        f"log_forward_rate_x: {x!r}",
        f"log_strike_k: {k!r}",
        f"log_moneyness: {k - x!r}",
        f"forward_price_exact: {price!r}",
        f"implied_vol_exact: {iv_exact!r}",
        f"iv_bar0: {approx.sbar[0]!r}",
        f"iv_bar1: {approx.sbar[1]!r}",
        f"iv_bar2: {approx.sbar[2]!r}",
    ]

    summary: dict[str, Any] = {}
    if include_mc or (command == "price" and config.mc is not None):
        assert config.mc is not None
        tick = time.perf_counter()
        estimate: McEstimate = mc_forward_caplet_price(model, spec, model.y0, config.mc)
        timings["mc"] = time.perf_counter() - tick
        passed = estimate.brackets(price, 3.0)
        z = (estimate.mean - price) / estimate.stderr if estimate.stderr > 0 else 0.0
        verdict = "PASS" if passed else "FAIL"
        lines += [
            f"mc_forward_price: {estimate.mean!r}",
            f"mc_stderr: {estimate.stderr!r}",
            f"mc_n_paths: {config.mc.n_paths}",
            f"mc_n_steps: {config.mc.n_steps}",
            f"mc_seed: {config.mc.seed}",
            f"mc_z_score: {z!r}",
            f"verdict: {verdict} (exact price within 3 standard errors: {passed})",
        ]
        summary["verdict"] = verdict
        summary["mc_z_score"] = z

    text = "\n".join(lines) + "\n"
    name = f"{command.replace('-', '_')}_report.txt"
    tick = time.perf_counter()
    (out_dir / name).write_text(text)
    timings["write"] = time.perf_counter() - tick

    report = _finish_run(
        command, config, (), out_dir, [name], len(lines), [], timings, summary
    )
    return replace(report, text=text)


def run_price(config: ExperimentConfig) -> RunReport:
    """Single-contract analytic report (plus MC when an mc block exists)."""
    return _contract_report(config, "price", include_mc=False)


def run_mc_check(config: ExperimentConfig) -> RunReport:
    """Single-contract report with a mandatory Monte Carlo cross-check."""
    return _contract_report(config, "mc-check", include_mc=True)

"""Reproducible experiment runs writing a CSV table and a JSON manifest.

A configuration is a flat JSON object with a ``kind`` plus the parameters of
that kind (see the dataclasses below for names and defaults). The manifest
written next to the CSV stores the fully resolved configuration under
``"config"``, so it can be fed back in to reproduce the table byte for byte.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .bayes import DEFAULT_GRID_POINTS, MIN_GRID_POINTS, PriorWindow, report
from .fisher import CrbQuery, crb_uncertainty, fisher_information, optimal_operating_point
from .probes import Correlation, ProbeConfig, lindblad_ramsey_oracle, p_excited
from .sampling import TrialSeed, derived_seed, generator
from .schemes import (
    combination_plan,
    evaluate_plan,
    geometric_ladder,
    optimize_combination,
    plan_posterior,
    uncorrelated_plan,
)

__all__ = [
    "ConfigError",
    "KINDS",
    "ExperimentConfig",
    "load_config",
    "build_config",
    "compute",
    "format_csv",
    "run",
]


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _require(cond: bool, name: str, message: str) -> None:
    if not cond:
        raise ConfigError(name, message)


@dataclass
class _Common:
    seed: int = 0
    grid_points: int = DEFAULT_GRID_POINTS

    def _check_common(self):
        _require(
            isinstance(self.seed, int) and 0 <= self.seed < 2**64,
            "seed",
            "must be an unsigned 64-bit integer",
        )
        _require(
            isinstance(self.grid_points, int) and self.grid_points >= MIN_GRID_POINTS,
            "grid_points",
            f"must be an integer >= {MIN_GRID_POINTS}",
        )


@dataclass
class CrbSweep(_Common):
    gammas: list = field(default_factory=lambda: [0.0, 0.1])
    n_min: int = 1
    n_max: int = 100
    total_time: float = 100.0
    t_interrogation: float = 1.0

    def validate(self):
        self._check_common()
        _require(len(self.gammas) > 0, "gammas", "must be a non-empty list")
        _require(all(g >= 0 for g in self.gammas), "gammas", "entries must be >= 0")
        _require(1 <= self.n_min <= self.n_max, "n_min", "need 1 <= n_min <= n_max")
        _require(self.total_time > 0, "total_time", "must be positive")
        _require(
            0 < self.t_interrogation <= self.total_time,
            "t_interrogation",
            "must lie in (0, total_time]",
        )


@dataclass
class _PlanParams(_Common):
    scheme: str = "ladder"
    p_levels: int = 3
    n_u: int = 7
    n_e: int = 3
    p_copies: int = 4
    t: float = 1.0
    L: float = 1.0
    T: float = 100.0
    gamma: float = 0.0

    def _check_plan(self):
        _require(
            self.scheme in ("ladder", "combination", "uncorrelated"),
            "scheme",
            "must be 'ladder', 'combination' or 'uncorrelated'",
        )
        _require(self.p_levels >= 1, "p_levels", "must be >= 1")
        _require(self.n_u >= 0, "n_u", "must be >= 0")
        _require(self.n_e >= 1 and self.n_e % 2 == 1, "n_e", "must be an odd positive integer")
        _require(self.p_copies >= 0, "p_copies", "must be >= 0")
        _require(self.t > 0, "t", "must be positive")
        _require(self.L >= self.t, "L", "must be >= t")
        _require(self.T >= self.t, "T", "must be >= t")
        _require(self.gamma >= 0, "gamma", "must be >= 0")
        if self.scheme == "combination":
            _require(self.n_u + self.p_copies * self.n_e >= 1, "n_u", "plan uses no atoms")
        if self.scheme == "uncorrelated":
            _require(self.n_u >= 1, "n_u", "must be >= 1 for the uncorrelated scheme")

    def plan(self):
        if self.scheme == "ladder":
            return geometric_ladder(self.p_levels, self.t, self.L, self.T, self.gamma)
        if self.scheme == "uncorrelated":
            return uncorrelated_plan(self.n_u, self.t, self.L, self.T, self.gamma)
        return combination_plan(self.n_u, self.n_e, self.p_copies, self.t, self.L, self.T, self.gamma)


@dataclass
class PosteriorSnapshot(_PlanParams):
    T: float = 10.0
    omega0_true: float = 0.0
    lower: float = -math.pi
    upper: float = math.pi
    mode: str = "asymptotic"

    def validate(self):
        self._check_common()
        self._check_plan()
        _require(self.upper > self.lower, "upper", "must exceed lower")
        _require(
            self.lower <= self.omega0_true < self.upper,
            "omega0_true",
            "must lie in [lower, upper)",
        )
        _require(self.mode in ("asymptotic", "sampled"), "mode", "must be 'asymptotic' or 'sampled'")


@dataclass
class SchemeOpt(_Common):
    gamma: float = 0.05
    n_min: int = 1
    n_max: int = 60
    t: float = 1.0
    L: float = 1.0
    T: float = 100.0
    n_e_max: int = 15

    def validate(self):
        self._check_common()
        _require(self.gamma >= 0, "gamma", "must be >= 0")
        _require(1 <= self.n_min <= self.n_max, "n_min", "need 1 <= n_min <= n_max")
        _require(self.t > 0, "t", "must be positive")
        _require(self.L >= self.t, "L", "must be >= t")
        _require(self.T >= self.t, "T", "must be >= t")
        _require(self.n_e_max >= 1, "n_e_max", "must be >= 1")


@dataclass
class MonteCarlo(_PlanParams):
    scheme: str = "uncorrelated"
    n_u: int = 1
    T: float = 10_000.0
    omega0_true: float | None = None
    n_seeds: int = 200

    def validate(self):
        self._check_common()
        self._check_plan()
        _require(self.n_seeds >= 1, "n_seeds", "must be >= 1")
        nu = self.T / self.t
        _require(abs(nu - round(nu)) < 1e-9 * nu, "T", "T/t must be an integer in sampled mode")
        if self.omega0_true is not None:
            _require(
                0 <= self.omega0_true < math.pi / self.L,
                "omega0_true",
                "must lie in the prior window [0, pi/L)",
            )


@dataclass
class OracleCheck(_Common):
    n_points: int = 100
    delta_max: float = 10.0
    gamma_max: float = 1.0
    t_min: float = 0.05
    t_max: float = 3.0

    def validate(self):
        self._check_common()
        _require(self.n_points >= 1, "n_points", "must be >= 1")
        _require(self.delta_max >= 0, "delta_max", "must be >= 0")
        _require(self.gamma_max >= 0, "gamma_max", "must be >= 0")
        _require(0 < self.t_min <= self.t_max, "t_min", "need 0 < t_min <= t_max")


KINDS = {
    "crb-sweep": CrbSweep,
    "posterior": PosteriorSnapshot,
    "scheme-opt": SchemeOpt,
    "monte-carlo": MonteCarlo,
    "oracle-check": OracleCheck,
}


@dataclass
class ExperimentConfig:
    kind: str
    params: Any

    def to_dict(self) -> dict:
        return {"kind": self.kind, **dataclasses.asdict(self.params)}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _coerce(name: str, value: Any, default: Any, annotation: str):
    if value is None and "None" in annotation:
        return None
    if isinstance(default, bool):
        _require(isinstance(value, bool), name, "must be a boolean")
        return value
    if annotation == "int":
        _require(
            isinstance(value, int) and not isinstance(value, bool)
            or isinstance(value, float) and value.is_integer(),
            name,
            f"must be an integer, got {value!r}",
        )
        return int(value)
    if annotation.startswith("float"):
        _require(
            isinstance(value, (int, float)) and not isinstance(value, bool),
            name,
            f"must be a number, got {value!r}",
        )
        _require(math.isfinite(value), name, "must be finite")
        return float(value)
    if annotation == "str":
        _require(isinstance(value, str), name, f"must be a string, got {value!r}")
        return value
    if annotation == "list":
        _require(isinstance(value, list), name, f"must be a list, got {value!r}")
        for v in value:
            _require(
                isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
                name,
                "entries must be finite numbers",
            )
        return [float(v) for v in value]
    return value


def build_config(mapping: dict) -> ExperimentConfig:
    """Validate a flat mapping into an :class:`ExperimentConfig`."""
    mapping = dict(mapping)
    kind = mapping.pop("kind", None)
    _require(kind in KINDS, "kind", f"must be one of {sorted(KINDS)}, got {kind!r}")
    cls = KINDS[kind]
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key in mapping:
        _require(key in fields, key, f"unknown parameter for kind {kind!r}")
    kwargs = {}
    defaults = cls()
    for name, f in fields.items():
        if name in mapping:
            kwargs[name] = _coerce(name, mapping[name], getattr(defaults, name), str(f.type))
    params = cls(**kwargs)
    params.validate()
    return ExperimentConfig(kind, params)


def load_config(path: str | Path) -> dict:
    """Read a config file or a previous run manifest as a flat mapping."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    _require(isinstance(payload, dict), "config", "top level must be a JSON object")
    if isinstance(payload.get("config"), dict):
        payload = payload["config"]
    return dict(payload)


# --- computations ----------------------------------------------------------


def _crb_row(args):
    n, gamma, total_time, t = args
    uncorrelated = ProbeConfig(omega0=math.pi / (2.0 * t), t_interrogation=t, gamma=gamma)
    ghz = ProbeConfig(
        n_atoms=n,
        correlation=Correlation.GHZ if n > 1 else Correlation.UNCORRELATED,
        omega0=math.pi / (2.0 * n * t),
        t_interrogation=t,
        gamma=gamma,
    )
    crb_u = crb_uncertainty(CrbQuery(uncorrelated, total_time, n))
    crb_g = crb_uncertainty(CrbQuery(ghz, total_time, 1))
    if gamma > 0:
        crb_min = optimal_operating_point(n, Correlation.UNCORRELATED, gamma, total_time).uncertainty
    else:
        crb_min = math.nan
    return [n, gamma, crb_u, crb_g, crb_min]


def _crb_sweep(p: CrbSweep, pool):
    header = ["N", "gamma", "crb_uncorrelated", "crb_ghz", "crb_min"]
    tasks = [
        (n, g, p.total_time, p.t_interrogation)
        for g in p.gammas
        for n in range(p.n_min, p.n_max + 1)
    ]
    return header, list(pool(_crb_row, tasks)), {"rows": len(tasks)}


def _posterior(p: PosteriorSnapshot, pool):
    plan = p.plan()
    window = PriorWindow(p.lower, p.upper, p.grid_points)
    post = plan_posterior(plan, p.omega0_true, p.mode, TrialSeed(p.seed), window)
    rows = [[w, d] for w, d in zip(post.grid, post.density())]
    rep = report(post)
    summary = {
        "estimate": rep.estimate,
        "half_width": rep.half_width,
        "posterior_std": rep.posterior_std,
        "ambiguous": rep.ambiguous,
        "peak_positions": list(rep.peak_positions),
        "total_atoms": plan.total_atoms,
    }
    return ["omega0", "posterior_density"], rows, summary


def _scheme_row(args):
    n_total, p = args
    best = optimize_combination(n_total, p.t, p.L, p.T, p.gamma, p.n_e_max, p.grid_points)
    window = PriorWindow.from_prior_half_period(p.L, p.grid_points)
    design = math.pi / (2.0 * p.L)
    shot = evaluate_plan(uncorrelated_plan(n_total, p.t, p.L, p.T, p.gamma), design, window=window)
    levels = math.log2(n_total + 1)
    ladder = math.nan
    if levels.is_integer():
        ladder_plan = geometric_ladder(int(levels), p.t, p.L, p.T, p.gamma)
        ladder = evaluate_plan(ladder_plan, design, window=window).posterior_std
    n_u, n_e, copies = best.plan.allocation
    row = [n_total, n_u, n_e, copies, best.report.posterior_std, shot.posterior_std, ladder]
    return row, best.fallback


def _scheme_opt(p: SchemeOpt, pool):
    header = [
        "N_T",
        "best_n_u",
        "best_n_e",
        "best_p",
        "posterior_std",
        "shotnoise_baseline",
        "ladder_std",
    ]
    results = list(pool(_scheme_row, [(n, p) for n in range(p.n_min, p.n_max + 1)]))
    fallbacks = [row[0] for row, fb in results if fb]
    return header, [row for row, _ in results], {"fallback_budgets": fallbacks}


def _mc_row(args):
    p, index, omega_true = args
    plan = p.plan()
    rep = evaluate_plan(plan, omega_true, "sampled", TrialSeed(derived_seed(p.seed, index)))
    err = rep.estimate - omega_true
    return [index, rep.estimate, err, rep.half_width, rep.posterior_std, int(rep.ambiguous)]


def _monte_carlo(p: MonteCarlo, pool):
    plan = p.plan()
    omega_true = plan.design_frequency() if p.omega0_true is None else p.omega0_true
    rows = list(pool(_mc_row, [(p, i, omega_true) for i in range(p.n_seeds)]))
    errors = np.array([r[2] for r in rows])
    total_fisher = sum(fisher_information(b.config(plan, omega_true)) for b in plan.blocks)
    crb = 1.0 / math.sqrt(plan.repetitions * total_fisher) if total_fisher > 0 else math.inf
    summary = {
        "omega0_true": omega_true,
        "rmse": float(np.sqrt(np.mean(errors**2))),
        "mean_error": float(np.mean(errors)),
        "crb": crb,
        "ambiguous_runs": int(sum(r[5] for r in rows)),
    }
    header = ["seed_index", "estimate", "error", "half_width", "posterior_std", "ambiguous"]
    return header, rows, summary


def _oracle_row(args):
    index, delta, gamma, t = args
    cfg = ProbeConfig(omega0=delta, t_interrogation=t, gamma=gamma)
    closed = p_excited(cfg)
    oracle = lindblad_ramsey_oracle(cfg)
    return [index, delta, gamma, t, closed, oracle, abs(closed - oracle)]


def _oracle_check(p: OracleCheck, pool):
    rng = generator(TrialSeed(p.seed, 0))
    deltas = rng.uniform(-p.delta_max, p.delta_max, p.n_points)
    gammas = rng.uniform(0.0, p.gamma_max, p.n_points)
    times = rng.uniform(p.t_min, p.t_max, p.n_points)
    tasks = [(i, float(d), float(g), float(t)) for i, (d, g, t) in enumerate(zip(deltas, gammas, times))]
    rows = list(pool(_oracle_row, tasks))
    header = ["index", "delta", "gamma", "t", "closed_form", "oracle", "abs_diff"]
    return header, rows, {"max_abs_diff": max(r[-1] for r in rows)}


_RUNNERS = {
    "crb-sweep": _crb_sweep,
    "posterior": _posterior,
    "scheme-opt": _scheme_opt,
    "monte-carlo": _monte_carlo,
    "oracle-check": _oracle_check,
}


def compute(config: ExperimentConfig, workers: int = 1):
    """Run the experiment; returns (header, rows, summary).

    With ``workers > 1`` sweep points are spread over a process pool; rows
    keep the order of the sweep regardless of completion order.
    """
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return _RUNNERS[config.kind](config.params, lambda f, xs: ex.map(f, xs))
    return _RUNNERS[config.kind](config.params, map)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def run(config: ExperimentConfig, out: str | Path, workers: int = 1, argv: list | None = None) -> Path:
    """Execute ``config`` and write ``<kind>.csv`` and ``run.json`` into a new run directory.

    The directory is ``out/<UTC timestamp>-<config hash prefix>``; its path is
    returned. Module errors propagate unchanged.
    """
    started = _dt.datetime.now(_dt.timezone.utc)
    tic = time.perf_counter()
    header, rows, summary = compute(config, workers)
    wall = time.perf_counter() - tic

    stamp = started.strftime("%Y%m%dT%H%M%S%fZ")
    run_dir = Path(out) / f"{stamp}-{config.digest()[:12]}"
    run_dir.mkdir(parents=True, exist_ok=False)
    csv_name = f"{config.kind}.csv"
    (run_dir / csv_name).write_text(format_csv(header, rows), encoding="utf-8", newline="")
    manifest = {
        "artifact_version": __version__,
        "kind": config.kind,
        "config": config.to_dict(),
        "config_sha256": config.digest(),
        "seed": config.params.seed,
        "csv": csv_name,
        "started_utc": started.isoformat(),
        "wall_time_s": wall,
        "workers": workers,
        "argv": list(argv) if argv is not None else None,
        "summary": summary,
    }
    (run_dir / "run.json").write_text(
        json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return run_dir


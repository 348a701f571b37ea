"""Seeded Monte Carlo risk estimation and the two-figure experiment runner.

A run is a grid of cells, one per (dimension, estimator) pair.  Each cell
draws ``reps`` observations ``Y = theta_star + sigma * xi`` from its own
counter-based stream, applies the estimator, and records the empirical mean
squared error with its standard error.  The ``fig2a`` regime pairs the spike
signal with ``sigma = d**(1/p - 1)``; ``fig2b`` pairs a flat k-sparse
boundary signal with ``sigma = d**(-1/2)``, where k follows the order-level
sparsity balance (about sqrt(d) at that noise rule) -- the choice that
reproduces the reference risk curves -- clamped away from the trivial
extremes.  Cells are independent, so runs may be resumed cell by cell and
parallelized without affecting the numbers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .estimators import ESTIMATOR_KINDS, EstimatorSpec, estimate
from .instances import sparsity_scaling, spike_instance
from .projection import LpBall
from .rates import RateQuery, control_function
from .rng import keyed_generator

REGIMES = ("fig2a", "fig2b", "custom")

DEFAULT_MAX_D = 10_000


def default_d_grid(max_d: int = DEFAULT_MAX_D, count: int | None = None) -> tuple[int, ...]:
    """Dimension grid ``floor(10**(2 + 8k/39))`` for k = 0, 1, ...

    Stops after ``count`` points when given, otherwise at ``max_d``.
    """
    grid = []
    k = 0
    while True:
        v = int(math.floor(10 ** (2.0 + 8.0 * k / 39.0)))
        if count is not None:
            if k >= count:
                break
        elif v > max_d:
            break
        grid.append(v)
        k += 1
    return tuple(grid)


@dataclass(frozen=True)
class ExperimentConfig:
    """Run description; serializable as a flat JSON object.

    ``sigma_rule`` is ``"spike"`` (``sigma = d**(1/p-1)``), ``"flat"``
    (``sigma = d**(-1/2)``), or an explicit list aligned with ``d_grid``.
    The ``custom`` regime requires an explicit list and uses the spike
    signal.
    """

    regime: str = "fig2a"
    p: float = 1.5
    radius: float = 1.0
    d_grid: tuple[int, ...] = field(default_factory=default_d_grid)
    sigma_rule: str | tuple[float, ...] = "spike"
    reps: int = 100
    estimators: tuple[str, ...] = ("mle", "soft_threshold")
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise InvalidParameterError(f"unknown regime {self.regime!r}")
        if self.reps < 1:
            raise InvalidParameterError(f"reps must be >= 1, got {self.reps}")
        if len(self.d_grid) == 0:
            raise InvalidParameterError("d_grid must be nonempty")
        if any(b <= a for a, b in zip(self.d_grid, self.d_grid[1:])):
            raise InvalidParameterError("d_grid must be strictly increasing")
        for kind in self.estimators:
            if kind not in ESTIMATOR_KINDS:
                raise InvalidParameterError(f"unknown estimator kind {kind!r}")
        if isinstance(self.sigma_rule, str):
            if self.sigma_rule not in ("spike", "flat"):
                raise InvalidParameterError(f"unknown sigma_rule {self.sigma_rule!r}")
            if self.regime == "custom":
                raise InvalidParameterError("custom regime requires an explicit sigma list")
        elif len(self.sigma_rule) != len(self.d_grid):
            raise InvalidParameterError("explicit sigma list must align with d_grid")
        if not (self.radius > 0):
            raise InvalidParameterError(f"radius must be positive, got {self.radius}")
        if self.regime == "fig2b" and not (1.0 < self.p < 2.0):
            raise InvalidParameterError("fig2b requires a norm index in (1, 2)")

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        payload = dict(payload)
        for key in ("d_grid", "estimators"):
            if key in payload and payload[key] is not None:
                payload[key] = tuple(payload[key])
        if isinstance(payload.get("sigma_rule"), list):
            payload["sigma_rule"] = tuple(float(v) for v in payload["sigma_rule"])
        if payload.get("d_grid") is None:
            payload.pop("d_grid", None)
        return cls(**payload)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def sigma_for(self, d: int) -> float:
        if self.sigma_rule == "spike":
            return float(d) ** (1.0 / self.p - 1.0)
        if self.sigma_rule == "flat":
            return float(d) ** (-0.5)
        return float(self.sigma_rule[self.d_grid.index(d)])

    def theta_for(self, d: int) -> np.ndarray:
        # general radius via the unit-ball construction at noise sigma/r
        if self.regime == "fig2b":
            k = math.ceil(sparsity_scaling(self.sigma_for(d) / self.radius, self.p, d))
            k = min(max(k, 1), d // 2)
            unit = np.zeros(d)
            unit[:k] = k ** (-1.0 / self.p)
        else:
            unit = spike_instance(d)
        return self.radius * unit

    def fingerprint(self) -> str:
        payload = {k: v for k, v in self.to_dict().items() if k != "output"}
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=6).hexdigest()


@dataclass(frozen=True)
class RiskEstimate:
    """Monte Carlo mean squared error of one estimator in one cell."""

    mse_mean: float
    mse_stderr: float
    reps: int
    d: int
    sigma: float
    p: float
    estimator: str
    seed: int


@dataclass(frozen=True)
class TrialKey:
    seed: int
    cell_id: str
    trial: int


def sample_observation(theta_star: np.ndarray, sigma: float, trial_key: TrialKey) -> np.ndarray:
    """One draw ``theta_star + sigma * xi`` from the trial's own stream."""
    if not (sigma > 0):
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    rng = keyed_generator(trial_key.seed, trial_key.cell_id, trial_key.trial)
    return theta_star + sigma * rng.standard_normal(theta_star.size)


def _estimator_spec(kind: str, config: ExperimentConfig, d: int, sigma: float) -> EstimatorSpec:
    ball = LpBall(p=config.p, dim=d, radius=config.radius)
    return EstimatorSpec(kind=kind, ball=ball, noise_level=sigma)


def estimate_risk(spec: EstimatorSpec, theta_star: np.ndarray, sigma: float,
                  reps: int, seed: int, cell_id: str = "cell") -> RiskEstimate:
    """Empirical mean and standard error of the squared estimation error."""
    if reps < 1:
        raise InvalidParameterError(f"reps must be >= 1, got {reps}")
    errors = np.empty(reps)
    for trial in range(reps):
        y = sample_observation(theta_star, sigma, TrialKey(seed, cell_id, trial))
        try:
            fitted = estimate(spec, y)
        except Exception as exc:
            raise RuntimeError(f"estimator {spec.kind!r} failed in cell {cell_id!r}"
                               f" at trial {trial}") from exc
        errors[trial] = float(np.sum((fitted - theta_star) ** 2))
    stderr = float(np.std(errors, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return RiskEstimate(
        mse_mean=float(np.mean(errors)),
        mse_stderr=stderr,
        reps=reps,
        d=theta_star.size,
        sigma=sigma,
        p=spec.ball.p if spec.ball is not None else math.nan,
        estimator=spec.kind,
        seed=seed,
    )


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    experiment_id: str
    rows: tuple[RiskEstimate, ...]
    control: dict[int, float]


def cell_id_for(config: ExperimentConfig, d: int, kind: str) -> str:
    return f"{config.regime}|p={config.p!r}|r={config.radius!r}|d={d}|est={kind}"


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   completed: frozenset[str] = frozenset(),
                   on_cell_done=None) -> ExperimentResult:
    """Run every (d, estimator) cell and assemble order-normalized results.

    ``completed`` names cells to skip (resumption); ``on_cell_done`` is
    called with ``(cell_id, RiskEstimate)`` as each cell finishes.  Cells are
    independent, so the thread count changes wall time only.
    """
    experiment_id = config.fingerprint()
    cells = [(d, kind) for d in config.d_grid for kind in config.estimators]
    pending = [(d, k) for (d, k) in cells if cell_id_for(config, d, k) not in completed]

    def run_cell(cell):
        d, kind = cell
        sigma = config.sigma_for(d)
        theta = config.theta_for(d)
        cid = cell_id_for(config, d, kind)
        spec = _estimator_spec(kind, config, d, sigma)
        row = estimate_risk(spec, theta, sigma, config.reps, config.seed, cid)
        return cid, row

    results: dict[tuple[int, str], RiskEstimate] = {}
    if threads > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for (cid, row), cell in zip(pool.map(run_cell, pending), pending):
                results[cell] = row
                if on_cell_done is not None:
                    on_cell_done(cid, row)
    else:
        for cell in pending:
            cid, row = run_cell(cell)
            results[cell] = row
            if on_cell_done is not None:
                on_cell_done(cid, row)

    rows = tuple(results[c] for c in cells if c in results)
    control = {
        d: control_function(RateQuery(p=config.p, d=d, sigma=config.sigma_for(d),
                                      radius=config.radius))
        for d in config.d_grid
    }
    result = ExperimentResult(config, experiment_id, rows, control)
    if config.output is not None:
        write_csv(result, Path(config.output))
    return result


CSV_COLUMNS = ("experiment_id", "regime", "p", "d", "sigma", "estimator",
               "reps", "mse_mean", "mse_stderr", "seed")


def rows_to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in result.rows:
        writer.writerow([
            result.experiment_id, result.config.regime, repr(row.p), row.d,
            repr(row.sigma), row.estimator, row.reps, repr(row.mse_mean),
            repr(row.mse_stderr), row.seed,
        ])
    return buf.getvalue()


def write_csv(result: ExperimentResult, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(result), encoding="utf-8")


def fit_log_slope(points) -> float:
    """Least-squares slope of log(mse) against log(d)."""
    pts = [(float(d), float(v)) for d, v in points]
    if len(pts) < 2:
        raise InvalidParameterError("need at least two points to fit a slope")
    if any(d <= 0 or v <= 0 for d, v in pts):
        raise InvalidParameterError("slope fit requires positive coordinates")
    xs = np.log([d for d, _ in pts])
    ys = np.log([v for _, v in pts])
    if np.all(xs == xs[0]):
        raise InvalidParameterError("slope fit requires at least two distinct d values")
    return float(np.polyfit(xs, ys, 1)[0])


def summarize_figure(result: ExperimentResult) -> dict:
    """Fitted slopes plus the anchored minimax reference curve.

    The reference curve is the control function normalized so that it meets
    the first MLE point (anchor 1.0 when no MLE series is present); the
    anchoring constant is part of the returned metadata.
    """
    series: dict[str, list[tuple[int, float]]] = {}
    for row in result.rows:
        series.setdefault(row.estimator, []).append((row.d, row.mse_mean))
    slopes = {kind: fit_log_slope(pts) for kind, pts in series.items() if len(pts) >= 2}

    ds = sorted(result.control)
    anchor = 1.0
    if "mle" in series and series["mle"]:
        d0, v0 = sorted(series["mle"])[0]
        if result.control[d0] > 0:
            anchor = v0 / result.control[d0]
    reference = {d: anchor * result.control[d] for d in ds}
    if len(reference) >= 2:
        slopes["minimax_reference"] = fit_log_slope(list(reference.items()))
    return {
        "experiment_id": result.experiment_id,
        "regime": result.config.regime,
        "slopes": slopes,
        "minimax_anchor": anchor,
        "minimax_reference": {str(d): reference[d] for d in ds},
    }


def plot_specification(result: ExperimentResult, csv_name: str, summary: dict) -> dict:
    """Declarative chart description; rendering is left to external tools."""
    return {
        "title": f"empirical risk, regime {result.config.regime}",
        "data": csv_name,
        "x": {"field": "d", "scale": "log", "label": "dimension"},
        "y": {"field": "mse_mean", "scale": "log", "label": "MSE"},
        "series_field": "estimator",
        "error_field": "mse_stderr",
        "reference_curve": {
            "label": "minimax",
            "anchor": summary["minimax_anchor"],
            "points": summary["minimax_reference"],
        },
    }

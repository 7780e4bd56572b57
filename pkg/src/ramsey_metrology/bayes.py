"""Grid posterior over the transition frequency.

Posteriors are kept as log-weights on a uniform grid covering the prior
window; the prior is flat inside the window and zero outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, InconsistentDataError
from .probes import ProbeConfig, excited_probability, ground_probability

__all__ = [
    "CREDIBLE_MASS",
    "PEAK_THRESHOLD",
    "PriorWindow",
    "MeasurementRecord",
    "PosteriorGrid",
    "PrecisionReport",
    "flat_posterior",
    "accumulate",
    "log_likelihood",
    "report",
    "local_maxima",
    "symmetric_mass",
]

CREDIBLE_MASS = 0.6827
# secondary peaks taller than this fraction of the global maximum make the
# estimate ambiguous
PEAK_THRESHOLD = 0.1
# posterior_std above this fraction of the flat-window std counts as "no peak"
UNINFORMATIVE_FRACTION = 0.5
DEFAULT_GRID_POINTS = 10_000
MIN_GRID_POINTS = 1_000


@dataclass(frozen=True)
class PriorWindow:
    """Prior support [lower, upper) sampled by ``grid_points`` equally spaced nodes."""

    lower: float
    upper: float
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise DomainError("window bounds must be finite")
        if not self.upper > self.lower:
            raise DomainError(f"upper ({self.upper}) must exceed lower ({self.lower})")
        if int(self.grid_points) < MIN_GRID_POINTS:
            raise DomainError(
                f"grid_points must be >= {MIN_GRID_POINTS}, got {self.grid_points}"
            )
        object.__setattr__(self, "grid_points", int(self.grid_points))

    @classmethod
    def from_prior_half_period(cls, prior_half_period: float, grid_points: int = DEFAULT_GRID_POINTS):
        """The window [0, pi/L)."""
        return cls(0.0, math.pi / prior_half_period, grid_points)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def grid(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.grid_points)


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome counts for one probe configuration.

    ``asymptotic`` marks expected (possibly fractional) counts nu*P rather
    than sampled ones.
    """

    cfg: ProbeConfig
    count_excited: float
    count_ground: float
    asymptotic: bool = False

    def __post_init__(self):
        for name in ("count_excited", "count_ground"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
            if not self.asymptotic and value != int(value):
                raise DomainError(f"{name} must be an integer for sampled records")

    @property
    def repetitions(self) -> float:
        return self.count_excited + self.count_ground


@dataclass
class PosteriorGrid:
    window: PriorWindow
    log_weights: np.ndarray = field(repr=False)
    normalized: bool = False

    def __post_init__(self):
        self.log_weights = np.asarray(self.log_weights, dtype=float)
        if self.log_weights.shape != (self.window.grid_points,):
            raise DomainError("log_weights must have one entry per grid point")

    @property
    def grid(self) -> np.ndarray:
        return self.window.grid()

    def normalize(self) -> PosteriorGrid:
        """Return a copy whose density integrates to 1 (trapezoidal rule)."""
        lw = self.log_weights
        top = lw.max()
        if not np.isfinite(top):
            raise InconsistentDataError("posterior vanishes on the whole window")
        rel = np.exp(lw - top)
        log_norm = top + math.log(np.trapezoid(rel, self.grid))
        return PosteriorGrid(self.window, lw - log_norm, normalized=True)

    def density(self) -> np.ndarray:
        post = self if self.normalized else self.normalize()
        return np.exp(post.log_weights)


@dataclass(frozen=True)
class PrecisionReport:
    estimate: float
    half_width: float
    ambiguous: bool
    peak_positions: tuple[float, ...]
    posterior_std: float
    posterior_mean: float = math.nan


def flat_posterior(window: PriorWindow) -> PosteriorGrid:
    return PosteriorGrid(window, np.zeros(window.grid_points))


def log_likelihood(record: MeasurementRecord, omega0: np.ndarray) -> np.ndarray:
    """count_e*log P(e|omega0) + count_g*log P(g|omega0) at every candidate."""
    cfg = record.cfg
    detuning = np.asarray(omega0, dtype=float) - cfg.omega_ref
    args = (cfg.n_atoms, detuning, cfg.t_interrogation, cfg.phase_offset, cfg.gamma)
    # xlogy keeps 0*log(0) = 0 for outcomes that were never observed
    with np.errstate(divide="ignore"):
        return xlogy(record.count_excited, excited_probability(*args)) + xlogy(
            record.count_ground, ground_probability(*args)
        )


def accumulate(prior: PosteriorGrid, record: MeasurementRecord) -> PosteriorGrid:
    """Bayes update of ``prior`` with the counts in ``record``.

    The record's configuration is re-evaluated at every grid frequency; its
    own ``omega0`` is ignored. Normalisation is deferred, so updates commute.
    Grid points where an observed outcome is impossible get log-weight -inf.
    """
    lw = prior.log_weights + log_likelihood(record, prior.grid)
    return PosteriorGrid(prior.window, lw, normalized=False)


def local_maxima(values: np.ndarray) -> np.ndarray:
    """Indices of strict local maxima over 3-point neighbourhoods.

    Runs of equal values count once (at the run's centre). Points outside the
    array are treated as -inf, so the ends can be maxima.
    """
    values = np.asarray(values, dtype=float)
    change = np.flatnonzero(np.diff(values) != 0) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [values.size])) - 1
    run_vals = values[starts]
    left = np.concatenate(([-np.inf], run_vals[:-1]))
    right = np.concatenate((run_vals[1:], [-np.inf]))
    is_max = (run_vals > left) & (run_vals > right)
    return (starts[is_max] + ends[is_max]) // 2


def _cumulative(x, y):
    steps = 0.5 * (y[1:] + y[:-1]) * np.diff(x)
    return np.concatenate(([0.0], np.cumsum(steps)))


def symmetric_mass(x, cumulative, center, delta):
    """Posterior mass on [center - delta, center + delta] clipped to the grid."""
    lo, hi = center - delta, center + delta
    return float(np.interp(hi, x, cumulative) - np.interp(lo, x, cumulative))


def _smallest_half_width(x, cumulative, center, mass, rel_tol=1e-12):
    hi = max(center - x[0], x[-1] - center)
    if symmetric_mass(x, cumulative, center, hi) < mass:
        return math.inf
    lo = 0.0
    for _ in range(200):
        if hi - lo <= rel_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if symmetric_mass(x, cumulative, center, mid) >= mass:
            hi = mid
        else:
            lo = mid
    return hi


def report(
    post: PosteriorGrid,
    peak_threshold: float = PEAK_THRESHOLD,
    credible_mass: float = CREDIBLE_MASS,
) -> PrecisionReport:
    """Point estimate, credible half-width and ambiguity verdict.

    estimate
        Grid argmax; ties go to the node closest to the window centre.
    half_width
        Smallest delta with at least ``credible_mass`` of the posterior on
        [estimate - delta, estimate + delta] (trapezoidal cumulative mass,
        linearly interpolated between nodes).
    ambiguous
        True when any of the following holds:

        * more than one local maximum exceeds ``peak_threshold`` times the
          global maximum;
        * the credible mass is not reached within 3 posterior_std of the
          estimate;
        * posterior_std exceeds half the std of a flat posterior on the
          window, i.e. the data did not localise the frequency at all.
    """
    post = post if post.normalized else post.normalize()
    x = post.grid
    dens = np.exp(post.log_weights)
    total = np.trapezoid(dens, x)
    if not np.isfinite(total) or total <= 0:
        raise InconsistentDataError("posterior has no finite mass")

    rel = np.exp(post.log_weights - post.log_weights.max())
    top = np.flatnonzero(rel == 1.0)
    best = top[np.argmin(np.abs(x[top] - post.window.center))]
    estimate = float(x[best])

    mean = float(np.trapezoid(x * dens, x))
    var = float(np.trapezoid((x - mean) ** 2 * dens, x))
    std = math.sqrt(max(var, 0.0))

    cumulative = _cumulative(x, dens)
    half_width = _smallest_half_width(x, cumulative, estimate, credible_mass * cumulative[-1])

    peaks = local_maxima(rel)
    strong = peaks[rel[peaks] > peak_threshold]
    multi_peak = strong.size > 1
    spread = symmetric_mass(x, cumulative, estimate, 3.0 * std) < credible_mass * cumulative[-1]
    flat_std = post.window.width / math.sqrt(12.0)
    uninformative = std > UNINFORMATIVE_FRACTION * flat_std

    return PrecisionReport(
        estimate=estimate,
        half_width=float(half_width),
        ambiguous=bool(multi_peak or spread or uninformative),
        peak_positions=tuple(float(v) for v in x[strong]),
        posterior_std=std,
        posterior_mean=mean,
    )

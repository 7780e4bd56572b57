"""Fisher information of the two-outcome Ramsey readout and Cramer-Rao bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .probes import Correlation, ProbeConfig, p_excited

__all__ = [
    "fisher_information",
    "fisher_array",
    "fisher_degenerate",
    "finite_difference_fisher",
    "CrbQuery",
    "repetitions",
    "crb_uncertainty",
    "minimum_uncertainty",
    "OperatingPoint",
    "optimal_operating_point",
    "golden_section",
]

_DEGENERATE_SIN = 1e-12


def fisher_array(n, detuning, t, phase=0.0, gamma=0.0):
    """Vectorised Fisher information with respect to the transition frequency.

    F = N^2 t^2 e^{-2N gamma t} sin^2(a) / (1 - cos^2(a) e^{-2N gamma t}),
    a = N*detuning*t + phase. The denominator is rewritten as
    sin^2(a) + cos^2(a)(1 - e^{-2N gamma t}) to stay accurate near the fringe
    extrema; where it vanishes (gamma = 0 and sin(a) = 0) the removable limit
    N^2 t^2 is returned.
    """
    arg = n * np.asarray(detuning, dtype=float) * t + phase
    s2 = np.sin(arg) ** 2
    c2 = np.cos(arg) ** 2
    decay2 = 2.0 * n * gamma * t
    num = (n * t) ** 2 * np.exp(-decay2) * s2
    den = s2 - c2 * np.expm1(-decay2)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), (n * t) ** 2)
    return out


def fisher_information(cfg: ProbeConfig) -> float:
    """Fisher information F(omega0) of one readout of ``cfg``, in time^2.

    At a fringe extremum (sin of the collective phase equal to zero) the value
    is the analytic limit: 0 when gamma > 0, N^2 t^2 when gamma = 0. Use
    :func:`fisher_degenerate` to detect those points.
    """
    return float(
        fisher_array(
            cfg.n_atoms, cfg.detuning, cfg.t_interrogation, cfg.phase_offset, cfg.gamma
        )
    )


def fisher_degenerate(cfg: ProbeConfig) -> bool:
    """True where the closed form is a 0/0 or 0/x limit (fringe extremum)."""
    return abs(math.sin(cfg.collective_phase)) <= _DEGENERATE_SIN


def finite_difference_fisher(cfg: ProbeConfig, h: float | None = None) -> float:
    """Fisher information from central differences of the outcome distribution."""
    if h is None:
        h = 1e-6 * max(1.0, abs(cfg.omega0))
    p_plus = p_excited(cfg.with_omega0(cfg.omega0 + h))
    p_minus = p_excited(cfg.with_omega0(cfg.omega0 - h))
    dp = (p_plus - p_minus) / (2.0 * h)
    pe = p_excited(cfg)
    pg = 1.0 - pe
    # dP(g) = -dP(e)
    return dp * dp / pe + dp * dp / pg


@dataclass(frozen=True)
class CrbQuery:
    """A model point plus the resource budget that sets the repetition count.

    ``n_total`` is the number of uncorrelated atoms interrogated in parallel;
    it is ignored for GHZ probes, whose repetition count is T/t.
    """

    cfg: ProbeConfig
    total_time: float
    n_total: int = 1

    def __post_init__(self):
        if not self.total_time > 0:
            raise DomainError(f"total_time must be positive, got {self.total_time!r}")
        if self.n_total < 1:
            raise DomainError(f"n_total must be >= 1, got {self.n_total!r}")
        if self.cfg.t_interrogation > self.total_time * (1 + 1e-12):
            raise DomainError("t_interrogation exceeds total_time")


def repetitions(q: CrbQuery) -> float:
    """nu = n_total*T/t for uncorrelated atoms, T/t for a GHZ probe."""
    nu = q.total_time / q.cfg.t_interrogation
    if q.cfg.correlation is Correlation.UNCORRELATED:
        nu *= q.n_total
    return nu


def crb_uncertainty(q: CrbQuery) -> float:
    """Cramer-Rao bound 1/sqrt(nu F); ``math.inf`` when F vanishes."""
    f = fisher_information(q.cfg)
    if f <= 0.0:
        return math.inf
    return 1.0 / math.sqrt(repetitions(q) * f)


def minimum_uncertainty(n_total: int, gamma: float, total_time: float) -> float:
    """Closed-form optimum sqrt(2 gamma e / (N T)) over interrogation time and phase."""
    if gamma <= 0:
        raise DomainError("the interior optimum needs gamma > 0")
    return math.sqrt(2.0 * gamma * math.e / (n_total * total_time))


class OperatingPoint(NamedTuple):
    t: float
    delta_t: float
    uncertainty: float
    at_boundary: bool


def golden_section(func, lo: float, hi: float, xtol: float = 1e-12, max_iter: int = 500):
    """Minimise a unimodal ``func`` on [lo, hi]; returns (x, func(x))."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if b - a <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = func(d)
    candidates = [(fc, c), (fd, d), (func(hi), hi)]
    fx, x = min(candidates)
    return x, fx


def optimal_operating_point(
    n_atoms: int,
    correlation: Correlation | str,
    gamma: float,
    total_time: float,
) -> OperatingPoint:
    """Interrogation time and phase minimising the Cramer-Rao bound.

    For every trial ``t`` the detuning is put at quadrature,
    N*detuning*t = pi/2, which is where a dephased fringe carries the most
    information; the remaining one-dimensional problem in ``t`` is solved by
    golden-section search on (0, total_time].

    ``n_atoms`` is the ensemble size for uncorrelated atoms (probe size 1) and
    the probe size for a GHZ state. If the unconstrained optimum lies beyond
    ``total_time`` the constrained minimum at t = total_time is returned with
    ``at_boundary=True``.
    """
    correlation = Correlation(correlation)
    if not gamma > 0:
        raise DomainError("gamma must be > 0; without dephasing the optimum is t = T")
    if not total_time > 0:
        raise DomainError("total_time must be positive")
    probe = 1 if correlation is Correlation.UNCORRELATED else int(n_atoms)
    n_total = int(n_atoms) if correlation is Correlation.UNCORRELATED else 1

    def uncertainty(t):
        cfg = ProbeConfig(
            n_atoms=probe,
            correlation=correlation,
            omega0=math.pi / (2.0 * probe * t),
            t_interrogation=t,
            gamma=gamma,
        )
        return crb_uncertainty(CrbQuery(cfg, total_time, n_total))

    t_star, best = golden_section(uncertainty, total_time * 1e-9, total_time, xtol=1e-13)
    at_boundary = t_star >= total_time * (1.0 - 1e-9)
    return OperatingPoint(t_star, math.pi / (2.0 * probe), best, at_boundary)

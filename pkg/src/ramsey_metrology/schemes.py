"""Probe allocations that avoid fringe ambiguity, and their evaluation.

Two families are provided: the geometric ladder of GHZ blocks with
1, 2, 4, ..., 2**(p-1) atoms, and combinations of n_u uncorrelated atoms with
p copies of an odd GHZ block of n_e atoms. Every block is repeated
nu = T/t times and all frequencies are measured with omega_ref = 0.
"""

from __future__ import annotations

import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass
from typing import NamedTuple

from .bayes import (
    DEFAULT_GRID_POINTS,
    MeasurementRecord,
    PosteriorGrid,
    PrecisionReport,
    PriorWindow,
    accumulate,
    flat_posterior,
    report,
)
from .errors import DomainError
from .probes import Correlation, ProbeConfig
from .sampling import TrialSeed, expected_record, sample_record

__all__ = [
    "ProbeBlock",
    "SchemePlan",
    "geometric_ladder",
    "combination_plan",
    "uncorrelated_plan",
    "plan_posterior",
    "evaluate_plan",
    "Optimum",
    "optimize_combination",
    "feedback_phase",
    "feedback_phase_for_estimate",
    "AmbiguityWarning",
]

DEFAULT_NE_MAX = 15


class AmbiguityWarning(UserWarning):
    """Raised through :mod:`warnings` when a decision uses an ambiguous posterior."""


@dataclass(frozen=True)
class ProbeBlock:
    n_atoms: int
    correlation: Correlation
    phase_offset: float
    repetitions: float

    def config(self, plan: SchemePlan, omega0: float = 0.0) -> ProbeConfig:
        return ProbeConfig(
            n_atoms=self.n_atoms,
            correlation=self.correlation,
            omega0=omega0,
            t_interrogation=plan.interrogation_time,
            phase_offset=self.phase_offset,
            gamma=plan.gamma,
        )


@dataclass(frozen=True)
class SchemePlan:
    """Atoms spent per repetition cycle, split into probe blocks.

    ``allocation`` records (n_u, n_e, p) for combination plans and is None
    for ladders and hand-built plans.
    """

    blocks: tuple[ProbeBlock, ...]
    total_atoms: int
    interrogation_time: float
    prior_half_period: float
    total_time: float
    gamma: float = 0.0
    allocation: tuple[int, int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise DomainError("a plan needs at least one block")
        if sum(b.n_atoms for b in self.blocks) != self.total_atoms:
            raise DomainError("total_atoms must equal the sum of block sizes")
        if not self.interrogation_time > 0 or not self.total_time > 0:
            raise DomainError("interrogation_time and total_time must be positive")
        if self.interrogation_time > self.prior_half_period * (1 + 1e-12):
            raise DomainError(
                "interrogation_time exceeds prior_half_period: single-atom fringes would alias"
            )
        if self.gamma < 0:
            raise DomainError("gamma must be non-negative")
        nu = self.repetitions
        for b in self.blocks:
            if not math.isclose(b.repetitions, nu, rel_tol=1e-12):
                raise DomainError("every block must be repeated T/t times")

    @property
    def repetitions(self) -> float:
        return self.total_time / self.interrogation_time

    def window(self, grid_points: int = DEFAULT_GRID_POINTS) -> PriorWindow:
        return PriorWindow.from_prior_half_period(self.prior_half_period, grid_points)

    def design_frequency(self) -> float:
        """omega0 = pi/(2L), the centre of the prior window."""
        return math.pi / (2.0 * self.prior_half_period)


def _block(n, phase, plan_args):
    t, T = plan_args[0], plan_args[2]
    corr = Correlation.UNCORRELATED if n == 1 else Correlation.GHZ
    return ProbeBlock(n, corr, phase, T / t)


def geometric_ladder(p_levels: int, t: float, L: float, T: float, gamma: float = 0.0) -> SchemePlan:
    """GHZ blocks of 2**k atoms, k = 0..p_levels-1.

    Even blocks carry a -pi/2 phase offset so that, at the design frequency
    pi/(2L), every block reads out at P(e) = 1/2.
    """
    if int(p_levels) != p_levels or p_levels < 1:
        raise DomainError(f"p_levels must be a positive integer, got {p_levels!r}")
    args = (t, L, T)
    blocks = []
    for k in range(int(p_levels)):
        n = 2**k
        blocks.append(_block(n, 0.0 if n % 2 else -math.pi / 2, args))
    return SchemePlan(tuple(blocks), 2 ** int(p_levels) - 1, t, L, T, gamma)


def combination_plan(
    n_u: int, n_e: int, p_copies: int, t: float, L: float, T: float, gamma: float = 0.0
) -> SchemePlan:
    """n_u single atoms plus p_copies GHZ blocks of n_e atoms, all with zero offset."""
    if n_u < 0 or p_copies < 0 or int(n_u) != n_u or int(p_copies) != p_copies:
        raise DomainError("n_u and p_copies must be non-negative integers")
    if int(n_e) != n_e or n_e < 1 or n_e % 2 == 0:
        raise DomainError(f"n_e must be an odd positive integer, got {n_e!r}")
    n_u, n_e, p_copies = int(n_u), int(n_e), int(p_copies)
    if n_u + p_copies * n_e < 1:
        raise DomainError("the plan must use at least one atom")
    args = (t, L, T)
    blocks = [_block(1, 0.0, args) for _ in range(n_u)]
    ghz = Correlation.UNCORRELATED if n_e == 1 else Correlation.GHZ
    blocks += [ProbeBlock(n_e, ghz, 0.0, T / t) for _ in range(p_copies)]
    return SchemePlan(
        tuple(blocks), n_u + p_copies * n_e, t, L, T, gamma, allocation=(n_u, n_e, p_copies)
    )


def uncorrelated_plan(n_total: int, t: float, L: float, T: float, gamma: float = 0.0) -> SchemePlan:
    return combination_plan(n_total, 1, 0, t, L, T, gamma)


def _config_key(block):
    return (block.n_atoms, block.correlation, block.phase_offset)


def plan_posterior(
    plan: SchemePlan,
    omega0_true: float,
    mode: str = "asymptotic",
    seed: TrialSeed | int | None = None,
    window: PriorWindow | None = None,
) -> PosteriorGrid:
    """Posterior after running every block of ``plan`` at ``omega0_true``.

    In ``"asymptotic"`` mode each block contributes its expected counts
    nu*P(x); in ``"sampled"`` mode block ``i`` draws binomial counts from
    stream ``i`` of ``seed``. Blocks sharing a configuration are merged
    before the update, which leaves the posterior unchanged.
    """
    window = window or plan.window()
    if not window.lower <= omega0_true < window.upper:
        raise DomainError(
            f"omega0_true={omega0_true} lies outside the prior window "
            f"[{window.lower}, {window.upper})"
        )
    groups: OrderedDict[tuple, list] = OrderedDict()
    if mode == "asymptotic":
        for b in plan.blocks:
            groups.setdefault(_config_key(b), [b, 0.0])[1] += b.repetitions
        records = [
            expected_record(b.config(plan, omega0_true), reps) for b, reps in groups.values()
        ]
    elif mode == "sampled":
        if seed is None:
            raise DomainError("sampled mode needs a seed")
        if not isinstance(seed, TrialSeed):
            seed = TrialSeed(int(seed))
        nu = plan.repetitions
        if abs(nu - round(nu)) > 1e-9 * max(1.0, nu):
            raise DomainError(f"sampled mode needs an integer repetition count, got T/t={nu}")
        for i, b in enumerate(plan.blocks):
            rec = sample_record(b.config(plan, omega0_true), round(nu), seed.substream(i))
            entry = groups.setdefault(_config_key(b), [rec.cfg, 0, 0])
            entry[1] += int(rec.count_excited)
            entry[2] += int(rec.count_ground)
        records = [MeasurementRecord(cfg, e, g) for cfg, e, g in groups.values()]
    else:
        raise DomainError(f"unknown mode {mode!r}; expected 'asymptotic' or 'sampled'")

    post = flat_posterior(window)
    for rec in records:
        post = accumulate(post, rec)
    return post.normalize()


def evaluate_plan(
    plan: SchemePlan,
    omega0_true: float,
    mode: str = "asymptotic",
    seed: TrialSeed | int | None = None,
    window: PriorWindow | None = None,
) -> PrecisionReport:
    """Report of the posterior produced by ``plan`` (see :func:`plan_posterior`).

    Ambiguity is returned in the report, never raised.
    """
    return report(plan_posterior(plan, omega0_true, mode, seed, window))


class Optimum(NamedTuple):
    plan: SchemePlan
    report: PrecisionReport
    fallback: bool


def optimize_combination(
    n_total: int,
    t: float,
    L: float,
    T: float,
    gamma: float = 0.0,
    n_e_max: int = DEFAULT_NE_MAX,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> Optimum:
    """Exhaustive search over (n_u, n_e, p) with n_u + p*n_e = n_total.

    Plans are scored in asymptotic mode at the design frequency pi/(2L); the
    smallest posterior_std among unambiguous plans wins, ties going to the
    smaller n_e and then the smaller p. GHZ blocks of one atom and p = 0 are
    both the pure uncorrelated plan, which is scored once as (n_total, 1, 0).
    If every plan is ambiguous the uncorrelated plan is returned with
    ``fallback=True``.
    """
    if int(n_total) != n_total or n_total < 1:
        raise DomainError(f"n_total must be a positive integer, got {n_total!r}")
    if int(n_e_max) != n_e_max or n_e_max < 1:
        raise DomainError(f"n_e_max must be a positive integer, got {n_e_max!r}")
    n_total = int(n_total)
    window = PriorWindow.from_prior_half_period(L, grid_points)
    omega_design = math.pi / (2.0 * L)

    baseline = uncorrelated_plan(n_total, t, L, T, gamma)
    baseline_report = evaluate_plan(baseline, omega_design, window=window)
    best = None
    if not baseline_report.ambiguous:
        best = (baseline_report.posterior_std, baseline, baseline_report)

    for n_e in range(3, int(n_e_max) + 1, 2):
        for p in range(1, n_total // n_e + 1):
            plan = combination_plan(n_total - p * n_e, n_e, p, t, L, T, gamma)
            rep = evaluate_plan(plan, omega_design, window=window)
            if rep.ambiguous:
                continue
            if best is None or rep.posterior_std < best[0]:
                best = (rep.posterior_std, plan, rep)

    if best is None:
        return Optimum(baseline, baseline_report, True)
    return Optimum(best[1], best[2], False)


def feedback_phase_for_estimate(estimate: float, block_n_atoms: int, t: float) -> float:
    """Offset putting N*estimate*t + phase at pi/2, reduced to (-pi, pi]."""
    phase = math.pi / 2.0 - block_n_atoms * estimate * t
    return math.pi - math.fmod(math.pi - phase, 2.0 * math.pi) % (2.0 * math.pi)


def feedback_phase(post: PosteriorGrid, block_n_atoms: int, t: float) -> float:
    """Phase offset for the next block computed from the current posterior.

    The offset steers the next block's collective phase to quadrature at the
    current estimate. An ambiguous posterior still yields a phase (from the
    global maximum) but emits :class:`AmbiguityWarning`.
    """
    rep = report(post)
    if rep.ambiguous:
        warnings.warn(
            "posterior is ambiguous; feedback phase uses the global maximum",
            AmbiguityWarning,
            stacklevel=2,
        )
    return feedback_phase_for_estimate(rep.estimate, block_n_atoms, t)

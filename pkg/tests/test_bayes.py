import itertools
import math

import numpy as np
import pytest

from ramsey_metrology.bayes import (
    MeasurementRecord,
    PosteriorGrid,
    PriorWindow,
    accumulate,
    flat_posterior,
    local_maxima,
    report,
)
from ramsey_metrology.errors import DomainError, InconsistentDataError
from ramsey_metrology.fisher import fisher_information
from ramsey_metrology.probes import Correlation, ProbeConfig
from ramsey_metrology.sampling import expected_record

FULL = PriorWindow(-math.pi, math.pi)


def probe(n=1, t=1.0, phase=0.0, gamma=0.0, omega0=0.0):
    corr = Correlation.UNCORRELATED if n == 1 else Correlation.GHZ
    return ProbeConfig(n, corr, omega0=omega0, t_interrogation=t, phase_offset=phase, gamma=gamma)


def ladder_records(levels, nu, omega0=0.0):
    records = []
    for k in range(levels):
        n = 2**k
        records.append(expected_record(probe(n, phase=0.0 if n % 2 else -math.pi / 2, omega0=omega0), nu))
    return records


def posterior_from(records, window=FULL):
    post = flat_posterior(window)
    for r in records:
        post = accumulate(post, r)
    return post.normalize()


def test_single_excited_outcome_gives_fringe_shape():
    post = posterior_from([MeasurementRecord(probe(), 1, 0)])
    x = post.grid
    expected = np.cos(x / 2) ** 2
    expected /= np.trapezoid(expected, x)
    np.testing.assert_allclose(post.density(), expected, atol=1e-12)
    assert report(post).estimate == pytest.approx(0.0, abs=FULL.width / FULL.grid_points)


def test_normalised_weights_integrate_to_one():
    post = posterior_from(ladder_records(3, 10))
    assert np.trapezoid(post.density(), post.grid) == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.isfinite(post.log_weights))


def test_ladder_has_single_peak_at_truth():
    rep = report(posterior_from(ladder_records(3, 10)))
    assert not rep.ambiguous
    assert len(rep.peak_positions) == 1
    assert rep.estimate == pytest.approx(0.0, abs=1e-3)


def test_inappropriate_combination_is_flagged():
    records = [expected_record(probe(1), 1.0)] + [expected_record(probe(3), 1.0)] * 2
    rep = report(posterior_from(records))
    assert rep.ambiguous
    assert len(rep.peak_positions) >= 2


def test_order_independence():
    records = ladder_records(3, 10, omega0=0.4) + [MeasurementRecord(probe(3, gamma=0.1), 4, 6)]
    reference = posterior_from(records).log_weights
    for perm in itertools.permutations(records):
        lw = posterior_from(perm).log_weights
        np.testing.assert_allclose(lw, reference, rtol=0, atol=1e-12)


@pytest.mark.parametrize("outcome", [(1, 0), (0, 1)])
def test_sufficiency(outcome):
    k = 37
    single = MeasurementRecord(probe(2, phase=-math.pi / 2, gamma=0.05), *outcome)
    repeated = flat_posterior(FULL)
    for _ in range(k):
        repeated = accumulate(repeated, single)
    combined = accumulate(
        flat_posterior(FULL),
        MeasurementRecord(single.cfg, k * outcome[0], k * outcome[1]),
    )
    np.testing.assert_allclose(repeated.log_weights, combined.log_weights, rtol=1e-13, atol=0)


@pytest.mark.parametrize("n, points", [(1, 4001), (3, 6001)])
def test_single_record_posterior_is_periodic(n, points):
    t = 1.0
    window = PriorWindow(0.0, 4 * math.pi, points)
    post = posterior_from([MeasurementRecord(probe(n, t), 3, 2)], window)
    x = post.grid
    period = 2 * math.pi / (n * t)
    shift = round(period / (x[1] - x[0]))
    assert shift * (x[1] - x[0]) == pytest.approx(period, rel=1e-12)
    # compare densities: near the dark points the log-weights are dominated
    # by round-off in the grid coordinates
    dens = post.density()
    np.testing.assert_allclose(dens[shift:], dens[:-shift], rtol=0, atol=1e-9 * dens.max())


def test_gaussian_half_width_is_one_sigma():
    window = PriorWindow(0.0, math.pi)
    x = window.grid()
    sigma = 0.02
    post = PosteriorGrid(window, -((x - math.pi / 2) ** 2) / (2 * sigma**2)).normalize()
    rep = report(post)
    assert rep.half_width / sigma == pytest.approx(1.0, rel=0.01)
    assert rep.posterior_std == pytest.approx(sigma, rel=1e-3)
    assert not rep.ambiguous


def test_flat_posterior_is_ambiguous():
    rep = report(flat_posterior(PriorWindow(0.0, math.pi)).normalize())
    assert rep.ambiguous
    assert rep.half_width == pytest.approx(0.6827 * math.pi / 2, rel=1e-3)


def test_argmax_tie_goes_to_window_centre():
    window = PriorWindow(0.0, 10.0, 1001)
    lw = np.full(1001, -50.0)
    lw[[100, 480, 900]] = 0.0
    rep = report(PosteriorGrid(window, lw))
    assert rep.estimate == pytest.approx(4.8)


def test_fully_dephased_probe_leaves_window_unresolved():
    records = [expected_record(probe(1, gamma=5.0), 100)]
    rep = report(posterior_from(records, PriorWindow(0.0, math.pi)))
    assert rep.ambiguous


def test_grid_refinement():
    window = PriorWindow.from_prior_half_period(1.0, 10_000)
    fine = PriorWindow.from_prior_half_period(1.0, 20_000)
    omega = 1.1
    records = ladder_records(3, 100, omega)
    coarse_rep = report(posterior_from(records, window))
    fine_rep = report(posterior_from(records, fine))
    assert fine_rep.estimate == pytest.approx(coarse_rep.estimate, rel=1e-3)
    assert fine_rep.half_width == pytest.approx(coarse_rep.half_width, rel=1e-3)


@pytest.mark.parametrize(
    "sizes, gamma",
    [((1,), 0.0), ((1, 3, 3), 0.0), ((1, 1, 3, 3), 0.05), ((1, 5), 0.1)],
)
def test_asymptotic_width_approaches_the_bound(sizes, gamma):
    nu = 100
    omega = math.pi / 2
    cfgs = [probe(n, gamma=gamma, omega0=omega) for n in sizes]
    rep = report(posterior_from([expected_record(c, nu) for c in cfgs], PriorWindow(0.0, math.pi)))
    bound = 1 / math.sqrt(nu * sum(fisher_information(c) for c in cfgs))
    assert not rep.ambiguous
    assert rep.posterior_std == pytest.approx(bound, rel=0.05)


def test_vanishing_posterior_is_inconsistent():
    window = PriorWindow(0.0, 1.0, 1000)
    post = PosteriorGrid(window, np.full(1000, -np.inf))
    with pytest.raises(InconsistentDataError):
        post.normalize()
    with pytest.raises(InconsistentDataError):
        report(post)


def test_impossible_points_get_minus_infinity():
    window = PriorWindow(-math.pi, math.pi, 1001)
    post = accumulate(flat_posterior(window), MeasurementRecord(probe(), 1, 2))
    assert post.log_weights[500] == -np.inf
    lw = post.normalize().log_weights
    assert np.isfinite(lw[0]) and lw[500] == -np.inf
    assert not report(post).estimate == pytest.approx(0.0)


def test_local_maxima_plateaus_and_edges():
    values = np.array([3.0, 1.0, 2.0, 2.0, 2.0, 0.0, 5.0])
    assert list(local_maxima(values)) == [0, 3, 6]


@pytest.mark.parametrize(
    "kwargs",
    [dict(lower=1.0, upper=1.0), dict(lower=0.0, upper=1.0, grid_points=999), dict(lower=0.0, upper=math.inf)],
)
def test_window_validation(kwargs):
    with pytest.raises(DomainError):
        PriorWindow(**kwargs)


def test_sampled_records_need_integer_counts():
    with pytest.raises(DomainError):
        MeasurementRecord(probe(), 1.5, 2)
    with pytest.raises(DomainError):
        MeasurementRecord(probe(), -1, 2, asymptotic=True)

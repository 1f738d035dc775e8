import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pomfq.belief import (MeanActionBelief, VisibilityBelief, frequentist_mean_action,
                          hoeffding_bound, sample_mean_actions, visibility_prob)
from pomfq.rng import make_rng


@pytest.mark.parametrize("prior,counts,expected", [
    ((1, 1, 1), (0, 0, 0), (1, 1, 1)),
    ((1, 1), (3, 2), (4, 3)),
    ((2, 5, 1), (1, 0, 4), (3, 5, 5)),
])
def test_dirichlet_update_counts(prior, counts, expected):
    belief = MeanActionBelief(np.array(prior, dtype=float))
    out = belief.updated(counts)
    assert np.array_equal(out.concentration, np.array(expected, dtype=float))


def test_dirichlet_update_tracks_sample_total():
    belief = MeanActionBelief.uniform_prior(3)
    belief = belief.updated([2, 0, 1]).updated([0, 4, 0])
    assert belief.sample_count_total == 7


def test_dirichlet_update_rejects_length_mismatch():
    belief = MeanActionBelief.uniform_prior(3)
    with pytest.raises(ValueError):
        belief.updated([1, 2])


def test_dirichlet_update_rejects_bad_decay():
    belief = MeanActionBelief.uniform_prior(2)
    with pytest.raises(ValueError):
        belief.updated([0, 0], decay=0.0)
    with pytest.raises(ValueError):
        belief.updated([0, 0], decay=1.5)


def test_sample_mean_symmetric():
    belief = MeanActionBelief(np.array([7.0, 7.0]))
    mean = belief.sample_mean(100_000, make_rng(11, "sym"))
    assert np.all(np.abs(mean - 0.5) < 0.01)


def test_sample_mean_matches_posterior_mean():
    # oracle: the Dirichlet mean concentration / sum = (0.9, 0.1)
    belief = MeanActionBelief(np.array([9.0, 1.0]))
    mean = belief.sample_mean(100_000, make_rng(12, "skew"))
    assert np.all(np.abs(mean - np.array([0.9, 0.1])) < 0.01)


def test_sample_mean_single_draw_on_simplex():
    belief = MeanActionBelief(np.array([0.3, 2.0, 5.0]))
    mean = belief.sample_mean(1, make_rng(13))
    assert np.all(mean >= 0)
    assert abs(mean.sum() - 1.0) < 1e-9


def test_sample_mean_rejects_zero_samples():
    with pytest.raises(ValueError):
        MeanActionBelief.uniform_prior(2).sample_mean(0, make_rng(1))


@settings(max_examples=50, deadline=None)
@given(
    conc=st.lists(st.floats(1e-6, 50.0, allow_nan=False), min_size=2, max_size=6),
    n_samples=st.integers(1, 40),
    seed=st.integers(0, 2**32 - 1),
)
def test_simplex_closure(conc, n_samples, seed):
    belief = MeanActionBelief(np.array(conc))
    mean = belief.sample_mean(n_samples, make_rng(seed))
    assert np.all(mean >= 0)
    assert abs(mean.sum() - 1.0) < 1e-9


@settings(max_examples=30, deadline=None)
@given(
    conc=st.lists(st.floats(1e-3, 10.0), min_size=2, max_size=5),
    counts=st.lists(st.integers(0, 20), min_size=2, max_size=5),
)
def test_concentration_never_decreases_without_decay(conc, counts):
    if len(conc) != len(counts):
        counts = (counts * len(conc))[:len(conc)]
    belief = MeanActionBelief(np.array(conc))
    out = belief.updated(counts, decay=1.0)
    assert np.all(out.concentration >= belief.concentration)


def test_conjugacy_consistency():
    # one-hot draws from a fixed categorical drive the posterior mean to it
    p = np.array([0.5, 0.3, 0.2])
    rng = make_rng(21, "conjugacy")
    belief = MeanActionBelief.uniform_prior(3)
    draws = rng.choice(3, size=10_000, p=p)
    counts = np.bincount(draws, minlength=3)
    belief = belief.updated(counts)
    assert np.max(np.abs(belief.mean() - p)) < 0.02


def test_batched_sampler_matches_single_contract():
    conc = np.array([[1.0, 1.0, 1.0], [9.0, 1.0, 2.0]])
    means = sample_mean_actions(conc, 50_000, make_rng(5, "batch"))
    assert means.shape == (2, 3)
    assert np.allclose(means.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(np.abs(means[1] - conc[1] / conc[1].sum()) < 0.01)


@pytest.mark.parametrize("actions,expected", [
    ([(1, 0), (0, 1)], (0.5, 0.5)),
    ([(1, 0, 0)] * 3, (1.0, 0.0, 0.0)),
    ([(1, 0, 0), (1, 0, 0), (0, 1, 0), (0, 1, 0), (0, 0, 1)], (0.4, 0.4, 0.2)),
])
def test_frequentist_mean(actions, expected):
    out = frequentist_mean_action([np.array(a, dtype=float) for a in actions])
    assert np.allclose(out, expected)


def test_frequentist_mean_empty_signals_no_observation():
    assert frequentist_mean_action([]) is None


def test_frequentist_mean_rejects_non_one_hot():
    with pytest.raises(ValueError):
        frequentist_mean_action([np.array([0.5, 0.5])])


@pytest.mark.parametrize("shape,rate,theta,d,want_shape,want_rate", [
    (1.0, 1.0, 1.0, 0.0, 1.5, 1.0),
    (1.0, 1.0, 1.0, 2.0, 1.5, 1.0),          # 1 + 2 - 2/1
    (1.0, 0.1, 0.5, 1.0, 1.5, 1e-6),          # raw rate -0.9, clamped
])
def test_gamma_posterior_update(shape, rate, theta, d, want_shape, want_rate):
    belief = VisibilityBelief(shape, rate, theta)
    out = belief.updated(d)
    assert out.shape == want_shape
    assert out.rate == pytest.approx(want_rate)
    assert out.point_estimate == pytest.approx(out.shape / out.rate)


def test_gamma_posterior_rejects_negative_distance():
    with pytest.raises(ValueError):
        VisibilityBelief().updated(-0.1)


def test_gamma_projection_shape_is_exact():
    belief = VisibilityBelief()
    rng = make_rng(31)
    for k in range(1, 200):
        belief = belief.updated(float(rng.random() * 5))
        assert belief.shape == 1.0 + 0.5 * k
        assert belief.rate >= 1e-6


@pytest.mark.parametrize("shape,rate,expected", [
    (4.0, 2.0, 2.0),   # oracle: Gamma mean shape/rate
    (3.0, 1.0, 3.0),
])
def test_sample_rate_matches_gamma_mean(shape, rate, expected):
    belief = VisibilityBelief(shape, rate)
    value = belief.sample_rate(100_000, make_rng(41, "gamma"))
    assert abs(value - expected) < 0.05


def test_sample_rate_single_draw_positive():
    assert VisibilityBelief(0.5, 3.0).sample_rate(1, make_rng(42)) > 0


def test_sample_rate_rejects_zero_samples():
    with pytest.raises(ValueError):
        VisibilityBelief().sample_rate(0, make_rng(1))


def test_visibility_prob_values():
    assert visibility_prob(0.0, 1.0) == 1.0
    assert visibility_prob(math.log(2.0), 1.0) == pytest.approx(0.5)
    assert visibility_prob(10.0, 1.0) == pytest.approx(4.5399929762484854e-05)


def test_visibility_prob_validates():
    with pytest.raises(ValueError):
        visibility_prob(-1.0)
    with pytest.raises(ValueError):
        visibility_prob(1.0, lam=0.0)
    with pytest.raises(ValueError):
        visibility_prob(1.0, lam=1.5)


def test_visibility_law_empirical():
    rng = make_rng(51, "vis")
    for d in (0.5, 1.0, 2.0):
        freq = float(np.mean(rng.random(100_000) < visibility_prob(d)))
        assert abs(freq - math.exp(-d)) < 0.01


def test_hoeffding_bound_values():
    assert hoeffding_bound(10_000, 0.95) == pytest.approx(
        math.sqrt(math.log(2 / 0.95) / 20_000))
    assert hoeffding_bound(10_000, 0.95) == pytest.approx(0.00610, abs=5e-6)
    assert hoeffding_bound(100, 0.5) == pytest.approx(
        math.sqrt(math.log(4.0) / 200.0))
    # quadrupling n halves the bound
    assert hoeffding_bound(400, 0.9) == pytest.approx(hoeffding_bound(100, 0.9) / 2)


def test_hoeffding_bound_validates():
    with pytest.raises(ValueError):
        hoeffding_bound(0, 0.5)
    with pytest.raises(ValueError):
        hoeffding_bound(10, 0.0)
    with pytest.raises(ValueError):
        hoeffding_bound(10, 1.0)


def test_hoeffding_coverage_quick():
    # light version of the coverage check: n=10, 2000 trials
    belief = MeanActionBelief.uniform_prior(3)
    p = belief.mean()
    bound = hoeffding_bound(10, 0.9)
    rng = make_rng(61, "cov")
    g = rng.standard_gamma(belief.concentration, size=(2000, 10, 3))
    means = (g / g.sum(axis=2, keepdims=True)).mean(axis=1)
    coverage = (np.abs(means - p) <= bound).mean(axis=0)
    assert coverage.min() >= 0.87


def test_determinism_same_seed_same_samples():
    belief = MeanActionBelief(np.array([2.0, 3.0, 4.0]))
    a = belief.sample_mean(1000, make_rng(99, "det"))
    b = belief.sample_mean(1000, make_rng(99, "det"))
    assert np.array_equal(a, b)
    vis = VisibilityBelief(2.0, 1.0)
    assert vis.sample_rate(100, make_rng(7)) == vis.sample_rate(100, make_rng(7))

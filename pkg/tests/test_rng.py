from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from publoop.errors import ConfigError
from publoop.rng import RngStream, make_streams


def test_same_seed_same_label_reproduces():
    a = RngStream(123, "review")
    b = RngStream(123, "review")
    assert [a.normal(0, 1) for _ in range(50)] == [b.normal(0, 1) for _ in range(50)]


def test_labels_give_independent_sequences():
    a = RngStream(123, "review")
    b = RngStream(123, "triage")
    assert [a.uniform() for _ in range(10)] != [b.uniform() for _ in range(10)]


def test_draws_on_one_stream_leave_others_untouched():
    # consuming from stream A must not shift stream B's sequence
    fresh = RngStream(9, "b")
    expected = [fresh.uniform() for _ in range(5)]
    a, b = RngStream(9, "a"), RngStream(9, "b")
    for _ in range(1000):
        a.uniform()
    assert [b.uniform() for _ in range(5)] == expected


def test_seed_bounds():
    RngStream(0, "x")
    RngStream(2**64 - 1, "x")
    with pytest.raises(ConfigError):
        RngStream(-1, "x")
    with pytest.raises(ConfigError):
        RngStream(2**64, "x")


def test_invalid_distribution_parameters():
    s = RngStream(1, "x")
    with pytest.raises(ConfigError):
        s.binomial(10, 1.5)
    with pytest.raises(ConfigError):
        s.binomial(-1, 0.5)
    with pytest.raises(ConfigError):
        s.normal(0, -0.1)
    with pytest.raises(ConfigError):
        s.lognormal(0, 0)
    with pytest.raises(ConfigError):
        s.poisson(-2)
    with pytest.raises(ConfigError):
        s.sample_indices(3, 4)


def test_sample_indices_distinct_and_in_range():
    s = RngStream(5, "x")
    for _ in range(100):
        idx = s.sample_indices(10, 7)
        assert len(set(idx)) == 7
        assert all(0 <= i < 10 for i in idx)


def test_integers_half_open():
    s = RngStream(5, "x")
    draws = {s.integers(1, 4) for _ in range(200)}
    assert draws == {1, 2, 3}


def test_normal_goodness_of_fit():
    s = RngStream(2024, "gof")
    sample = s.normal_array(0.6, 0.15, 20000)
    _, p = stats.kstest(sample, "norm", args=(0.6, 0.15))
    assert p > 0.01


def test_binomial_mean_matches():
    s = RngStream(2024, "gof")
    draws = [s.binomial(1000, 0.03) for _ in range(2000)]
    assert abs(np.mean(draws) - 30.0) < 1.0


def test_lognormal_median():
    # median of LogNormal(mu, sigma) is exp(mu)
    s = RngStream(2024, "gof")
    draws = [s.lognormal(-0.125, 0.5) for _ in range(20000)]
    assert abs(np.median(draws) - np.exp(-0.125)) < 0.02


def test_make_streams():
    streams = make_streams(11, ["a", "b"])
    assert set(streams) == {"a", "b"}
    assert streams["a"].uniform() != streams["b"].uniform()

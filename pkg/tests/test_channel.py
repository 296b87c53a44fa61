import math

import numpy as np
import pytest

from rmlist.channel import ChannelParams, awgn, bsc_evidence, modulate, to_evidence, to_llr, trial_rng
from rmlist.code_tree import ParameterError
from rmlist.oracle import gaussian_posterior_zero


def test_modulation_map():
    np.testing.assert_array_equal(modulate([0, 1, 1, 0]), [1.0, -1.0, -1.0, 1.0])


def test_snr_conventions():
    p = ChannelParams.from_snr_db(0.0)
    assert math.isclose(p.variance, 0.5)
    q = ChannelParams.from_ebno_db(3.0, 0.5)
    assert math.isclose(q.snr_db, 3.0 + 10 * math.log10(0.5))
    assert math.isclose(q.ebno_db(0.5), 3.0)
    assert math.isnan(q.ebno_db(0.0))


def test_sigma_validation():
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ParameterError):
            ChannelParams(bad)


def test_evidence_is_exact_posterior():
    y = np.linspace(-3, 3, 41)
    sigma = 0.8
    expected = 2 * gaussian_posterior_zero(y, sigma) - 1
    np.testing.assert_allclose(to_evidence(y, sigma), expected, atol=1e-14)
    np.testing.assert_allclose(np.tanh(to_llr(y, sigma) / 2), expected, atol=1e-14)


def test_evidence_example_value():
    assert math.isclose(float(to_evidence(1.0, 1.0)), math.tanh(1.0))


def test_trial_streams_are_reproducible_and_distinct():
    a = trial_rng(5, 17).standard_normal(8)
    np.testing.assert_array_equal(a, trial_rng(5, 17).standard_normal(8))
    assert not np.array_equal(a, trial_rng(5, 18).standard_normal(8))
    assert not np.array_equal(a, trial_rng(6, 17).standard_normal(8))
    with pytest.raises(ParameterError):
        trial_rng(-1, 0)


def test_awgn_statistics():
    x = np.ones(200_000)
    y = awgn(x, ChannelParams(0.7), trial_rng(1, 0))
    assert abs(np.mean(y - x)) < 0.01
    assert abs(np.std(y - x) - 0.7) < 0.01


def test_bsc_evidence():
    np.testing.assert_allclose(bsc_evidence(0.9, [0, 1]), [0.8, -0.8])
    with pytest.raises(ParameterError):
        bsc_evidence(1.2, [0])

import numpy as np
import pytest

from rmlist.code_tree import ParameterError, build_rm_tree
from rmlist.decoder import combine_u, combine_v
from rmlist.oracle import (
    bayes_posterior_pair,
    counter_bits,
    enumerate_codebook,
    gaussian_posterior_zero,
    ml_decode_exhaustive,
    rm_generator_matrix,
    span,
)


def test_counter_bits_order():
    np.testing.assert_array_equal(counter_bits(2), [[0, 0], [0, 1], [1, 0], [1, 1]])


def test_generator_matrix():
    g = rm_generator_matrix(3, 1)
    np.testing.assert_array_equal(g[0], np.ones(8))
    np.testing.assert_array_equal(g[1], [0, 1] * 4)
    assert rm_generator_matrix(4, 2).shape == (11, 16)
    assert span(g).shape == (16, 8)


def test_codebook():
    cb = enumerate_codebook(build_rm_tree(4, 2))
    assert len(cb) == 2**11
    assert cb.min_weight() == 4
    np.testing.assert_array_equal(cb.info[5], counter_bits(11)[5])


def test_refuses_large_codes():
    with pytest.raises(ParameterError):
        enumerate_codebook(build_rm_tree(6, 3))


def test_ml_tie_goes_to_first_row():
    cb = enumerate_codebook(build_rm_tree(3, 1))
    cw, info, _ = ml_decode_exhaustive(cb, np.zeros(8))
    np.testing.assert_array_equal(info, np.zeros(4))


def test_ml_recovers_noiseless_word():
    cb = enumerate_codebook(build_rm_tree(4, 1))
    cw, info, _ = ml_decode_exhaustive(cb, 0.5 * (1 - 2.0 * cb.codewords[[9, 20]]))
    np.testing.assert_array_equal(info, cb.info[[9, 20]])


def test_bayes_pair_matches_combines():
    rng = np.random.default_rng(0)
    y_u, y_uv = rng.normal(0, 1.5, (2, 1000))
    sigma = 0.9
    pv0, pu0 = bayes_posterior_pair(y_u, y_uv, sigma)
    e_u = 2 * gaussian_posterior_zero(y_u, sigma) - 1
    e_uv = 2 * gaussian_posterior_zero(y_uv, sigma) - 1
    np.testing.assert_allclose(2 * pv0 - 1, combine_v(e_u, e_uv), atol=1e-12)
    _, pu0_v1 = bayes_posterior_pair(y_u, y_uv, sigma, v=np.ones(1000, dtype=int))
    np.testing.assert_allclose(2 * pu0 - 1, combine_u(e_u, e_uv, 0), atol=1e-12)
    np.testing.assert_allclose(2 * pu0_v1 - 1, combine_u(e_u, e_uv, 1), atol=1e-12)

"""Brute-force references used to check the fast paths."""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from rmlist.code_tree import CodeTree, ParameterError
from rmlist.encoder import encode

MAX_ENUM_K = 24


@dataclass(frozen=True)
class Codebook:
    """Every codeword of a tree; row ``i`` encodes ``i`` written as a k-bit counter."""

    tree: CodeTree
    info: np.ndarray
    codewords: np.ndarray

    def __len__(self):
        return self.codewords.shape[0]

    def min_weight(self):
        weights = self.codewords[1:].sum(axis=1)
        return int(weights.min()) if weights.size else None

    def as_set(self):
        return {row.tobytes() for row in self.codewords}


def counter_bits(k, count=None):
    """Rows ``0 .. 2**k - 1`` as k-bit strings, most significant bit first."""
    idx = np.arange(1 << k if count is None else count, dtype=np.int64)
    return ((idx[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)


def enumerate_codebook(tree: CodeTree) -> Codebook:
    if tree.k > MAX_ENUM_K:
        raise ParameterError(
            f"refusing to enumerate 2^{tree.k} codewords; the limit is k <= {MAX_ENUM_K}"
        )
    info = counter_bits(tree.k)
    return Codebook(tree, info, encode(tree, info))


def ml_decode_exhaustive(cb: Codebook, ev, llr=False):
    """Most likely codeword(s); ties go to the first row, i.e. the smallest info string.

    Returns ``(codeword, info, log_likelihood)``; batched evidence gives
    batched outputs.
    """
    from rmlist.decoder import likelihood_of

    ev = np.asarray(ev, dtype=float)
    if ev.shape[-1] != cb.tree.n:
        raise ParameterError(f"evidence length {ev.shape[-1]} does not match n={cb.tree.n}")
    rows = ev.reshape(-1, cb.tree.n)
    best = np.empty(rows.shape[0], dtype=np.int64)
    score = np.empty(rows.shape[0])
    for b, row in enumerate(rows):
        scores = likelihood_of(cb.codewords, row, llr=llr)
        best[b] = int(np.argmax(scores))
        score[b] = scores[best[b]]
    cw, info = cb.codewords[best], cb.info[best]
    if ev.ndim == 1:
        return cw[0], info[0], score[0]
    return cw, info, score


def rm_generator_matrix(m, r):
    """Rows are evaluations of the monomials of degree <= r in x_1..x_m.

    Coordinate ``i`` evaluates ``x_t`` as bit ``t-1`` of ``i``.
    """
    if not 0 <= r <= m:
        raise ParameterError(f"need 0 <= r <= m, got m={m}, r={r}")
    points = ((np.arange(1 << m)[:, None] >> np.arange(m)) & 1).astype(np.uint8)
    rows = []
    for degree in range(r + 1):
        for subset in combinations(range(m), degree):
            rows.append(np.prod(points[:, list(subset)], axis=1, dtype=np.uint8) if subset
                        else np.ones(1 << m, dtype=np.uint8))
    return np.array(rows, dtype=np.uint8)


def span(generator):
    """All GF(2) combinations of the generator rows."""
    k = generator.shape[0]
    coeffs = counter_bits(k)
    return (coeffs.astype(np.int64) @ generator.astype(np.int64) % 2).astype(np.uint8)


def bayes_posterior_pair(y_u, y_uv, sigma, v=None):
    """Exact marginals from the four equiprobable hypotheses ``(u, v)``.

    ``y_u`` observes ``u`` and ``y_uv`` observes ``u + v`` through
    ``N(+-1, sigma^2)``.  Returns ``Pr{v=0}`` and, for the given ``v`` (or
    ``v=0``), ``Pr{u=0 | v}``.  Works elementwise on arrays.
    """
    y_u = np.asarray(y_u, dtype=float)
    y_uv = np.asarray(y_uv, dtype=float)
    v = np.zeros_like(y_u, dtype=np.int64) if v is None else np.asarray(v)

    def loglik(y, bit):
        x = 1.0 - 2.0 * bit
        return -((y - x) ** 2) / (2.0 * sigma**2)

    joint = {}
    for u_bit in (0, 1):
        for v_bit in (0, 1):
            joint[u_bit, v_bit] = loglik(y_u, u_bit) + loglik(y_uv, u_bit ^ v_bit)
    v0 = np.logaddexp(joint[0, 0], joint[1, 0])
    v1 = np.logaddexp(joint[0, 1], joint[1, 1])
    pr_v0 = 1.0 / (1.0 + np.exp(v1 - v0))
    l0 = np.where(v == 0, joint[0, 0], joint[0, 1])
    l1 = np.where(v == 0, joint[1, 0], joint[1, 1])
    pr_u0 = 1.0 / (1.0 + np.exp(l1 - l0))
    return pr_v0, pr_u0


def gaussian_posterior_zero(y, sigma):
    """``Pr{bit=0 | y}`` for one antipodal symbol in N(0, sigma^2) noise."""
    y = np.asarray(y, dtype=float)
    l0 = -((y - 1.0) ** 2) / (2.0 * sigma**2)
    l1 = -((y + 1.0) ** 2) / (2.0 * sigma**2)
    return 1.0 / (1.0 + np.exp(l1 - l0))

"""Soft-decision recursive list decoding over a :class:`CodeTree`.

At a Plotkin node the decoder first estimates ``v = u + (u+v)`` from both
halves, decodes the ``v`` child, then re-estimates ``u`` from both halves
given the decided ``v`` and decodes the ``u`` child.  Leaves return their
best candidates; every path is expanded and the list is cut back to the
leaf's cap.  All paths of all trials in a batch advance in lock step, so the
work is vectorized over ``(batch, path)``.

Public helpers take tanh-domain evidence ``eps``.  Internally the recursion
runs on log-likelihood ratios ``llr = 2*atanh(eps)``, which carry the same
information without losing precision near ``|eps| = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from rmlist.code_tree import CodeTree, Kind, ParameterError
from rmlist.encoder import leaf_codebook
from rmlist.validation import check_bits, check_evidence, check_llr

# log-probabilities never go below -LLR_MAX
LLR_MAX = 745.0

# leaves with at most this many structural payload bits are ranked by enumeration
ENUMERATE_BITS = 8


# ---------------------------------------------------------------------------
# evidence arithmetic


def eps_to_llr(eps):
    with np.errstate(divide="ignore"):
        return np.clip(2.0 * np.arctanh(eps), -LLR_MAX, LLR_MAX)


def llr_to_eps(llr):
    return np.tanh(np.asarray(llr, dtype=float) / 2.0)


def _check_pair(a, b):
    if a.shape != b.shape:
        raise ParameterError(f"evidence halves differ in shape: {a.shape} vs {b.shape}")


def combine_v(eps_left, eps_right):
    """Evidence on ``v = u + (u+v)``: the product of the two halves."""
    a, b = np.asarray(eps_left, dtype=float), np.asarray(eps_right, dtype=float)
    _check_pair(a, b)
    return a * b


def combine_u(eps_left, eps_right, v):
    """Evidence on ``u`` from both halves once ``v`` is known.

    Two certain but contradictory observations (zero denominator) give an
    erasure.
    """
    a, b = np.asarray(eps_left, dtype=float), np.asarray(eps_right, dtype=float)
    _check_pair(a, b)
    s = 1.0 - 2.0 * np.asarray(v, dtype=float)
    num = a + s * b
    den = 1.0 + s * a * b
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den == 0, 0.0, num / np.where(den == 0, 1.0, den))
    return np.clip(out, -1.0, 1.0)


def llr_combine_v(a, b):
    """``2*atanh(tanh(a/2)*tanh(b/2))`` without cancellation."""
    return (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )


def llr_combine_u(a, b, v):
    s = 1.0 - 2.0 * np.asarray(v, dtype=float)
    return np.clip(a + s * b, -LLR_MAX, LLR_MAX)


def log_probs(llr):
    """``(log Pr{0}, log Pr{1})`` for each symbol."""
    return -np.logaddexp(0.0, -llr), -np.logaddexp(0.0, llr)


def _as_llr(ev, llr, length=None):
    if llr:
        return np.clip(check_llr(ev, length), -LLR_MAX, LLR_MAX)
    return eps_to_llr(check_evidence(ev, length))


def _score(words, lp0, lp1):
    return np.where(words.astype(bool), lp1, lp0).sum(axis=-1)


def likelihood_of(cw, ev, llr=False):
    """``sum_i log Pr{c_i | y_i}`` for one codeword or a stack of them."""
    words = check_bits(cw, name="codeword") if np.ndim(cw) <= 2 else np.asarray(cw, dtype=np.uint8)
    lam = _as_llr(ev, llr, words.shape[-1])
    lp0, lp1 = log_probs(lam)
    if lam.ndim == 2 and words.ndim == 2 and words.shape[0] != lam.shape[0]:
        raise ParameterError("batched codewords and evidence disagree in batch size")
    return _score(np.ascontiguousarray(words), lp0, lp1)


# ---------------------------------------------------------------------------
# leaf decoders


class LeafCandidates(NamedTuple):
    """Top candidates of a leaf, best first.

    ``payloads`` holds only the unfrozen payload bits.  ``order`` ranks the
    candidates of each row by payload in lexicographic order.
    """

    payloads: np.ndarray
    codewords: np.ndarray
    costs: np.ndarray
    order: np.ndarray


def leaf_code_size(leaf: CodeTree) -> int:
    return 1 << leaf.payload_size


def fht(x):
    """Fast Hadamard transform along the last axis (natural ordering).

    ``out[..., a] = sum_i x[..., i] * (-1)**popcount(a & i)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if n & (n - 1):
        raise ParameterError("Hadamard transform needs a power-of-two length")
    lead = x.shape[:-1]
    h = 1
    while h < n:
        x = x.reshape(*lead, n // (2 * h), 2, h)
        a, b = x[..., 0, :], x[..., 1, :]
        x = np.stack((a + b, a - b), axis=-2)
        h *= 2
    return x.reshape(*lead, n)


def _best(costs, key, k):
    """Per row, indices of the ``k`` largest costs, ties to the smaller key.

    Returned best first.  Uses a partial partition and falls back to a
    full sort only on rows where ties straddle the cut.
    """
    N, M = costs.shape
    if k >= M:
        return np.lexsort((key, -costs), axis=-1)
    part = np.argpartition(-costs, k - 1, axis=1)[:, :k]
    picked = np.take_along_axis(costs, part, axis=1)
    cut = picked.min(axis=1, keepdims=True)
    ragged = (costs == cut).sum(axis=1) != (picked == cut).sum(axis=1)
    if ragged.any():
        rows = np.flatnonzero(ragged)
        part[rows] = np.lexsort((key[rows], -costs[rows]), axis=-1)[:, :k]
        picked = np.take_along_axis(costs, part, axis=1)
    pkey = np.take_along_axis(key, part, axis=1)
    order = np.lexsort((pkey, -picked), axis=-1)
    return np.take_along_axis(part, order, axis=1)


def _top(costs, top_t):
    """Indices of the ``top_t`` best columns, ties to the lower index."""
    index = np.broadcast_to(np.arange(costs.shape[1]), costs.shape)
    return _best(costs, index, top_t)


def _half_base(llr):
    """``0.5 * sum_i (log Pr{0} + log Pr{1})``; a word's cost adds ``0.5 * sum_i (+-llr_i)``."""
    a = np.abs(llr)
    return (-0.5 * a - np.log1p(np.exp(-a))).sum(axis=-1)


def _lex_rank(idx):
    return np.argsort(np.argsort(idx, axis=1, kind="stable"), axis=1, kind="stable")


def _candidates_repetition(leaf, llr, top_t):
    base = _half_base(llr)
    total = 0.5 * llr.sum(axis=1)
    costs = np.stack([base + total, base - total], axis=1)
    pid = _top(costs, top_t)
    costs = np.take_along_axis(costs, pid, axis=1)
    payloads = pid[:, :, None].astype(np.uint8)
    words = np.repeat(pid[:, :, None].astype(np.uint8), leaf.n, axis=2)
    return LeafCandidates(payloads, words, costs, _lex_rank(pid))


def _biorthogonal_tables(m):
    # payload integer p = a0*2^m + a1*2^(m-1) + ... + am; mask bit t-1 carries a_t
    p = np.arange(1 << (m + 1))
    sign = p >> m
    mask = np.zeros_like(p)
    for t in range(1, m + 1):
        mask |= ((p >> (m - t)) & 1) << (t - 1)
    return sign, mask


def _candidates_biorthogonal(leaf, llr, top_t):
    m = leaf.m
    base = _half_base(llr)[:, None]
    spectrum = fht(llr)
    sign, mask = _biorthogonal_tables(m)
    allowed = 1 << leaf.payload_size
    sign, mask = sign[:allowed], mask[:allowed]
    costs = base + 0.5 * (1 - 2 * sign)[None, :] * spectrum[:, mask]
    pid = _top(costs, top_t)
    costs = np.take_along_axis(costs, pid, axis=1)
    payloads_all, words_all = leaf_codebook(Kind.BIORTHOGONAL, m)
    payloads = payloads_all[pid][:, :, leaf.freeze :]
    return LeafCandidates(payloads, words_all[pid], costs, _lex_rank(pid))


def _candidates_enumerated(leaf, llr, top_t):
    payloads_all, words_all = leaf_codebook(leaf.kind, leaf.m)
    allowed = 1 << leaf.payload_size
    signs = 1.0 - 2.0 * words_all[:allowed]
    costs = _half_base(llr)[:, None] + 0.5 * (llr @ signs.T)
    pid = _top(costs, top_t)
    costs = np.take_along_axis(costs, pid, axis=1)
    payloads = payloads_all[pid][:, :, leaf.freeze :]
    return LeafCandidates(payloads, words_all[pid], costs, _lex_rank(pid))


def _candidates_flips(leaf, llr, top_t):
    """Best words by flipping least-reliable hard decisions.

    Keeps, per parity class, the ``top_t`` cheapest flip sets over the
    positions seen so far; adding a position merges each class with the
    other class shifted by that position's penalty.  Exact for any leaf
    length, used where enumeration is too large.
    """
    N, n = llr.shape
    hard = (llr < 0).astype(np.uint8)
    pen = np.abs(llr)
    frozen = leaf.freeze
    if frozen:
        hard[:, :frozen] = 0
        pen[:, :frozen] = np.inf
    lp0, lp1 = log_probs(llr)
    base = _score(hard, lp0, lp1)
    spc = leaf.kind is Kind.SPC
    n_classes = 2 if spc else 1
    sums = np.full((n_classes, N, top_t), np.inf)
    sums[0, :, 0] = 0.0
    masks = np.zeros((n_classes, N, top_t, n), dtype=bool)
    rows = np.arange(N)
    order = np.argsort(pen, axis=1, kind="stable")
    for col in range(n):
        pos = order[:, col]
        p = pen[rows, pos]
        if np.isinf(p).all():
            break
        new_sums, new_masks = [], []
        for c in range(n_classes):
            other = (c + 1) % n_classes
            shifted = masks[other].copy()
            shifted[rows, :, pos] ^= True
            cand = np.concatenate([sums[c], sums[other] + p[:, None]], axis=1)
            cmask = np.concatenate([masks[c], shifted], axis=1)
            keep = np.argsort(cand, axis=1, kind="stable")[:, :top_t]
            new_sums.append(np.take_along_axis(cand, keep, axis=1))
            new_masks.append(cmask[rows[:, None], keep])
        sums = np.stack(new_sums)
        masks = np.stack(new_masks)
    if spc:
        # flips must fix the parity of the hard decision
        want = np.bitwise_xor.reduce(hard, axis=1)
        sums = np.where(want[:, None] == 1, sums[1], sums[0])
        masks = np.where(want[:, None, None] == 1, masks[1], masks[0])
    else:
        sums, masks = sums[0], masks[0]
    words = hard[:, None, :] ^ masks.astype(np.uint8)
    costs = base[:, None] - sums
    size = n - 1 if spc else n
    payloads = words[:, :, frozen:size]
    return LeafCandidates(payloads, words, costs, _lex_rank_bits(payloads))


def _lex_rank_bits(payloads):
    if payloads.shape[-1] == 0:
        return np.zeros(payloads.shape[:2], dtype=np.int64)
    packed = np.packbits(payloads, axis=-1)
    keys = [packed[:, :, b] for b in range(packed.shape[-1] - 1, -1, -1)]
    idx = np.lexsort(keys, axis=-1)
    return np.argsort(idx, axis=1, kind="stable")


def leaf_candidates(leaf: CodeTree, llr, top_t: int) -> LeafCandidates:
    """Batched candidate generation: ``llr`` has shape ``(N, 2**leaf.m)``."""
    top_t = int(min(top_t, leaf_code_size(leaf)))
    if leaf.payload_size == 0:
        N = llr.shape[0]
        lp0, _ = log_probs(llr)
        words = np.zeros((N, 1, leaf.n), dtype=np.uint8)
        return LeafCandidates(
            np.zeros((N, 1, 0), dtype=np.uint8), words, lp0.sum(axis=1)[:, None], np.zeros((N, 1), dtype=np.int64)
        )
    if leaf.kind is Kind.REPETITION:
        return _candidates_repetition(leaf, llr, top_t)
    if leaf.kind is Kind.BIORTHOGONAL:
        return _candidates_biorthogonal(leaf, llr, top_t)
    if leaf.leaf_size <= ENUMERATE_BITS:
        return _candidates_enumerated(leaf, llr, top_t)
    return _candidates_flips(leaf, llr, top_t)


def _single_leaf(kind, ev, top_t, freeze, llr):
    lam = _as_llr(ev, llr)
    if lam.ndim != 1:
        raise ParameterError("leaf decoders take a single evidence vector")
    m = int(lam.size).bit_length() - 1
    if lam.size != 1 << m:
        raise ParameterError("leaf evidence length must be a power of two")
    r = {Kind.REPETITION: 0, Kind.BIORTHOGONAL: 1, Kind.SPC: m - 1, Kind.FULL: m}[kind]
    leaf = CodeTree(m, r, kind, freeze=freeze)
    size = leaf_code_size(leaf)
    if top_t is None:
        top_t = size
    if top_t < 1:
        raise ParameterError("top_t must be at least 1")
    if top_t > size:
        warnings.warn(f"top_t={top_t} exceeds the {size} codewords of the leaf; clamped", stacklevel=3)
        top_t = size
    cands = leaf_candidates(leaf, lam[None, :], top_t)
    return LeafCandidates(*(a[0] for a in cands))


def decode_leaf_repetition(ev, freeze=0, llr=False):
    """Both repetition codewords with their log-posterior costs, best first."""
    return _single_leaf(Kind.REPETITION, ev, 2, freeze, llr)


def decode_leaf_biorthogonal(ev, top_t=None, freeze=0, llr=False):
    """Top biorthogonal codewords ranked through one Hadamard transform."""
    return _single_leaf(Kind.BIORTHOGONAL, ev, top_t, freeze, llr)


def decode_leaf_full(ev, top_t=1, freeze=0, llr=False):
    return _single_leaf(Kind.FULL, ev, top_t, freeze, llr)


def decode_leaf_spc(ev, top_t=1, freeze=0, llr=False):
    """Single-parity-check candidates; the first is the Wagner decision."""
    return _single_leaf(Kind.SPC, ev, top_t, freeze, llr)


# ---------------------------------------------------------------------------
# list schedule


@dataclass(frozen=True)
class ListSchedule:
    """How many paths survive each leaf.

    ``L`` is the default list size, ``leaf_L`` optional per-leaf overrides
    (one entry per leaf, decoding order) and ``full_leaf_factor`` widens the
    list at full-space leaves.  With ``variable=True`` the per-leaf sizes
    must not increase from left to right.
    """

    L: int = 1
    leaf_L: tuple[int, ...] | None = None
    full_leaf_factor: int = 1
    variable: bool = False

    def __post_init__(self):
        if int(self.L) < 1:
            raise ParameterError(f"list size must be at least 1, got {self.L}")
        if int(self.full_leaf_factor) < 1:
            raise ParameterError("full_leaf_factor must be at least 1")
        if self.leaf_L is not None:
            object.__setattr__(self, "leaf_L", tuple(int(x) for x in self.leaf_L))
            if any(x < 1 for x in self.leaf_L):
                raise ParameterError("per-leaf list sizes must be at least 1")
            if self.variable and any(a < b for a, b in zip(self.leaf_L, self.leaf_L[1:])):
                raise ParameterError("a variable threshold must not increase from left to right")

    @classmethod
    def unpruned(cls, tree: CodeTree) -> "ListSchedule":
        """A list large enough that nothing is ever pruned (exact ML)."""
        return cls(L=1 << tree.k)

    @classmethod
    def tapered(cls, tree: CodeTree, L: int, final_L: int = 1, full_leaf_factor: int = 1) -> "ListSchedule":
        """Geometric taper from ``L`` at the first leaf to ``final_L`` at the last."""
        count = len(tree.leaves)
        if count == 1:
            sizes = [L]
        else:
            ratio = (final_L / L) ** (1.0 / (count - 1))
            sizes = [max(final_L, int(round(L * ratio**i))) for i in range(count)]
        return cls(L=L, leaf_L=tuple(sizes), full_leaf_factor=full_leaf_factor, variable=True)

    def caps(self, tree: CodeTree) -> list[int]:
        leaves = tree.leaves
        if self.leaf_L is not None and len(self.leaf_L) != len(leaves):
            raise ParameterError(f"schedule has {len(self.leaf_L)} per-leaf sizes, tree has {len(leaves)} leaves")
        sizes = self.leaf_L if self.leaf_L is not None else [int(self.L)] * len(leaves)
        return [
            s * (int(self.full_leaf_factor) if leaf.kind is Kind.FULL else 1)
            for s, leaf in zip(sizes, leaves)
        ]


# ---------------------------------------------------------------------------
# list decoding


@dataclass
class DecodeResult:
    """Output of :func:`list_decode`.

    ``cost`` is the log-likelihood of the chosen codeword.  ``list_*`` hold
    every surviving path, best first.
    """

    info: np.ndarray
    codeword: np.ndarray
    cost: np.ndarray
    list_info: np.ndarray
    list_codeword: np.ndarray
    list_cost: np.ndarray


def _take(arr, idx):
    """``arr[b, idx[b, j], ...]`` for a ``(B, P, ...)`` array."""
    rows = np.arange(arr.shape[0])[:, None]
    return arr[rows, idx]


class _Search:
    def __init__(self, caps):
        self.caps = caps
        self.leaf = 0

    def node(self, node, llr, state):
        """Decode ``node`` for every path; returns words, new state, parent map."""
        if node.is_leaf:
            return self.expand(node, llr, state)
        half = node.n // 2
        if node.kind is Kind.PLOTKIN:
            v, u = node.children
            wv, state, p1 = self.node(v, llr_combine_v(llr[..., :half], llr[..., half:]), state)
            llr = _take(llr, p1)
            wu, state, p2 = self.node(u, llr_combine_u(llr[..., :half], llr[..., half:], wv), state)
            wv = _take(wv, p2)
            return np.concatenate([wu, wu ^ wv], axis=-1), state, _take(p1, p2)
        return self.chained(node, llr, state)

    def chained(self, node, llr, state):
        v, w2, w1, u = node.children
        q = node.n // 4
        e1, e2, e3, e4 = (llr[..., i * q : (i + 1) * q] for i in range(4))
        # v = q3 + q4
        wv, state, p = self.node(v, llr_combine_v(e3, e4), state)
        e1, e2, e3, e4 = (_take(e, p) for e in (e1, e2, e3, e4))
        e3 = llr_combine_u(e3, e4, wv)
        parent = p
        # w2 = q2 + q3
        ww2, state, p = self.node(w2, llr_combine_v(e2, e3), state)
        e1, e2, e3, wv = (_take(e, p) for e in (e1, e2, e3, wv))
        e2 = llr_combine_u(e2, e3, ww2)
        parent = _take(parent, p)
        # w1 = q1 + q2
        ww1, state, p = self.node(w1, llr_combine_v(e1, e2), state)
        e1, e2, wv, ww2 = (_take(e, p) for e in (e1, e2, wv, ww2))
        parent = _take(parent, p)
        wu, state, p = self.node(u, llr_combine_u(e1, e2, ww1), state)
        wv, ww2, ww1 = (_take(e, p) for e in (wv, ww2, ww1))
        parent = _take(parent, p)
        q2 = wu ^ ww1
        q3 = q2 ^ ww2
        return np.concatenate([wu, q2, q3, q3 ^ wv], axis=-1), state, parent

    def expand(self, leaf, llr, state):
        cost, info, rank = state
        cap = self.caps[self.leaf]
        self.leaf += 1
        B, P, n = llr.shape
        cands = leaf_candidates(leaf, llr.reshape(B * P, n), min(cap, leaf_code_size(leaf)))
        T = cands.costs.shape[1]
        total = (cost[:, :, None] + cands.costs.reshape(B, P, T)).reshape(B, P * T)
        key = (rank[:, :, None] * T + cands.order.reshape(B, P, T)).reshape(B, P * T)
        sel = _best(total, key, min(cap, P * T))
        parent, choice = np.divmod(sel, T)
        payloads = cands.payloads.reshape(B, P, T, -1)[np.arange(B)[:, None], parent, choice]
        words = cands.codewords.reshape(B, P, T, n)[np.arange(B)[:, None], parent, choice]
        info = np.concatenate([_take(info, parent), payloads], axis=-1)
        new_rank = _lex_rank(np.take_along_axis(key, sel, axis=1))
        return words, (np.take_along_axis(total, sel, axis=1), info, new_rank), parent


def _chunk_rows(tree, caps):
    """Trials per chunk so that the widest expansion stays near 4M cells."""
    paths, width = 1, 1
    for cap, leaf in zip(caps, tree.leaves):
        t = min(cap, leaf_code_size(leaf))
        width = max(width, paths * t * max(leaf.n, 8))
        paths = min(cap, paths * t)
    width = max(width, paths * tree.n)
    return max(1, int(4_000_000 // width))


def list_decode(tree: CodeTree, ev, sched: ListSchedule | int = 1, llr: bool = False) -> DecodeResult:
    """Recursive list decoding of one evidence vector or a batch.

    ``ev`` is tanh-domain evidence of shape ``(n,)`` or ``(B, n)``, or LLRs
    when ``llr=True``.  Surviving paths are finally re-scored against the
    channel evidence and the most likely one is returned; equal scores go
    to the lexicographically smaller information string.
    """
    if not isinstance(sched, ListSchedule):
        sched = ListSchedule(L=int(sched))
    lam = _as_llr(ev, llr, tree.n)
    single = lam.ndim == 1
    lam = lam.reshape(-1, tree.n)
    caps = sched.caps(tree)
    step = _chunk_rows(tree, caps)
    parts = [_decode_batch(tree, lam[i : i + step], caps) for i in range(0, lam.shape[0], step)]
    out = DecodeResult(*(np.concatenate([getattr(p, f) for p in parts]) for f in DecodeResult.__dataclass_fields__))
    if single:
        out = DecodeResult(*(getattr(out, f)[0] for f in DecodeResult.__dataclass_fields__))
    return out


def _decode_batch(tree, lam, caps):
    B = lam.shape[0]
    state = (np.zeros((B, 1)), np.zeros((B, 1, 0), dtype=np.uint8), np.zeros((B, 1), dtype=np.int64))
    search = _Search(caps)
    words, (_, info, rank), _ = search.node(tree, lam[:, None, :], state)
    words = np.ascontiguousarray(words)
    lp0, lp1 = log_probs(lam)
    scores = _score(words, lp0[:, None, :], lp1[:, None, :])
    order = np.lexsort((rank, -scores), axis=-1)
    scores = np.take_along_axis(scores, order, axis=1)
    info = _take(info, order)
    words = _take(words, order)
    return DecodeResult(info[:, 0], words[:, 0], scores[:, 0], info, words, scores)

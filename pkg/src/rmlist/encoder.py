"""Recursive (u, u+v) encoding.

Leaf payload conventions (first ``freeze`` bits of each are zero):

* repetition: one bit, replicated
* biorthogonal ``{j,1}``: ``(a0, a1, ..., aj)``; symbol ``i`` is
  ``a0 ^ a1*i_0 ^ ... ^ aj*i_{j-1}`` where ``i_t`` is bit ``t`` of ``i``
* single parity check: the first ``2**j - 1`` symbols, parity appended
* full space: the ``2**j`` raw symbols
"""

from functools import lru_cache

import numpy as np

from rmlist.code_tree import CodeTree, Kind, ParameterError
from rmlist.validation import check_bits


class XorCounter:
    """Tally of binary additions performed per encoded word."""

    def __init__(self):
        self.count = 0

    def add(self, k):
        self.count += int(k)


def encode(tree: CodeTree, info, counter=None):
    """Encode information bits; accepts one word ``(k,)`` or a batch ``(B, k)``."""
    if not isinstance(tree, CodeTree):
        raise ParameterError("encode needs a CodeTree")
    bits = check_bits(info, tree.k, name="info bits")
    batch = bits if bits.ndim == 2 else bits[None, :]
    offsets = iter(_leaf_offsets(tree))
    out = _encode_node(tree, batch, offsets, counter)
    return out[0] if bits.ndim == 1 else out


def _leaf_offsets(tree):
    pos = 0
    for leaf in tree.leaves:
        yield pos, pos + leaf.payload_size
        pos += leaf.payload_size


def _encode_node(node, info, offsets, counter):
    if node.is_leaf:
        lo, hi = next(offsets)
        return encode_leaf(node.kind, node.m, full_payload(node, info[:, lo:hi]), counter)
    parts = [_encode_node(c, info, offsets, counter) for c in node.children]
    half = node.n // 2
    if node.kind is Kind.PLOTKIN:
        v, u = parts
        if counter is not None:
            counter.add(half)
        return np.concatenate([u, u ^ v], axis=1)
    v, w2, w1, u = parts
    q2 = u ^ w1
    q3 = q2 ^ w2
    q4 = q3 ^ v
    if counter is not None:
        counter.add(3 * node.n // 4)
    return np.concatenate([u, q2, q3, q4], axis=1)


def full_payload(leaf, payload):
    """Prepend the frozen zero prefix to a ``(B, payload_size)`` array."""
    if not leaf.freeze:
        return payload
    zeros = np.zeros((payload.shape[0], leaf.freeze), dtype=np.uint8)
    return np.concatenate([zeros, payload], axis=1)


def encode_leaf(kind, m, payload, counter=None):
    """Codeword(s) of one leaf from full payload rows ``(B, size)`` or one row."""
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.ndim == 1:
        return _encode_leaf(kind, m, payload[None, :], counter)[0]
    return _encode_leaf(kind, m, payload, counter)


def _encode_leaf(kind, m, payload, counter):
    n = 1 << m
    if kind is Kind.REPETITION:
        return np.repeat(payload[:, :1], n, axis=1)
    if kind is Kind.FULL:
        return payload.copy()
    if kind is Kind.SPC:
        if counter is not None:
            counter.add(max(n - 2, 0))
        parity = np.bitwise_xor.reduce(payload, axis=1, keepdims=True)
        return np.concatenate([payload, parity], axis=1)
    # biorthogonal: double the word once per coefficient
    word = payload[:, :1]
    for t in range(1, m + 1):
        if counter is not None:
            counter.add(word.shape[1])
        word = np.concatenate([word, word ^ payload[:, t : t + 1]], axis=1)
    return word


def xor_count(tree: CodeTree) -> int:
    """Binary additions :func:`encode` spends on one codeword of ``tree``."""
    n = tree.n
    if tree.kind is Kind.PLOTKIN:
        return n // 2 + sum(xor_count(c) for c in tree.children)
    if tree.kind is Kind.CHAINED:
        return 3 * n // 4 + sum(xor_count(c) for c in tree.children)
    if tree.kind is Kind.BIORTHOGONAL:
        return n - 1
    if tree.kind is Kind.SPC:
        return max(n - 2, 0)
    return 0


@lru_cache(maxsize=None)
def leaf_codebook(kind, m):
    """All structural payloads of a leaf in binary-counter order, with codewords.

    Returns ``(payloads, codewords)``.  Only meant for small leaves.
    """
    kind = Kind(kind)
    size = {Kind.REPETITION: 1, Kind.BIORTHOGONAL: m + 1, Kind.SPC: (1 << m) - 1, Kind.FULL: 1 << m}[kind]
    if size > 20:
        raise ParameterError(f"leaf codebook of size 2^{size} is too large to tabulate")
    idx = np.arange(1 << size, dtype=np.int64)
    shifts = np.arange(size - 1, -1, -1)
    payloads = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
    words = encode_leaf(kind, m, payloads)
    payloads.setflags(write=False)
    words.setflags(write=False)
    return payloads, words

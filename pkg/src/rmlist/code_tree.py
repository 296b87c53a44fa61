"""Recursive code descriptions built from (u, u+v) splits.

A :class:`CodeTree` is an immutable description of a binary linear code of
length ``2**m``.  Interior nodes combine the codewords of their children,
leaves are codes with a cheap maximum-likelihood decoder:

* repetition ``{j, 0}``
* biorthogonal (first-order RM) ``{j, 1}``
* single parity check ``{j, j-1}``
* full space ``{j, j}``

Leaves are ordered depth-first with the ``v`` child before the ``u`` child.
That order is the decoding schedule and also fixes how information bits are
serialized: the payload bits of the first leaf come first.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import cached_property
from math import comb
from typing import Any, Iterator, Mapping, Sequence


class ParameterError(ValueError):
    """Raised for invalid code parameters or malformed code specs."""


class Kind(str, enum.Enum):
    REPETITION = "repetition"
    BIORTHOGONAL = "biorthogonal"
    SPC = "spc"
    FULL = "full"
    PLOTKIN = "plotkin"
    CHAINED = "chained"


LEAF_KINDS = frozenset({Kind.REPETITION, Kind.BIORTHOGONAL, Kind.SPC, Kind.FULL})

# child names in decoding order
CHILD_NAMES = {Kind.PLOTKIN: ("v", "u"), Kind.CHAINED: ("v", "w2", "w1", "u")}

TERMINATIONS = ("full", "partial")
ORDERINGS = ("standard", "chained")


def rm_dimension(m: int, r: int) -> int:
    """Dimension of RM(m, r); orders above ``m`` give the full space."""
    return sum(comb(m, i) for i in range(min(r, m) + 1))


def _leaf_size(kind: Kind, m: int) -> int:
    n = 1 << m
    return {
        Kind.REPETITION: 1,
        Kind.BIORTHOGONAL: m + 1,
        Kind.SPC: n - 1,
        Kind.FULL: n,
    }[kind]


@dataclass(frozen=True)
class CodeTree:
    """One node of a recursive code description.

    ``m`` is log2 of the block length and ``r`` the order label.  For trees
    that are not RM codes the label only names the edge.  ``children`` are
    stored in decoding order: ``(v, u)`` for a Plotkin split, codeword
    ``(u, u+v)``; ``(v, w2, w1, u)`` for a chained quad split, codeword
    ``(u, u+w1, u+w1+w2, u+w1+w2+v)``.  ``freeze`` is the number of leading
    payload bits of a leaf fixed to zero.
    """

    m: int
    r: int
    kind: Kind
    children: tuple["CodeTree", ...] = ()
    freeze: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.m < 0 or not 0 <= self.r <= self.m:
            raise ParameterError(f"invalid node label (m={self.m}, r={self.r})")
        if self.kind in LEAF_KINDS:
            self._check_leaf()
        else:
            self._check_branch()

    def _check_leaf(self):
        m, r, kind = self.m, self.r, self.kind
        if self.children:
            raise ParameterError("leaf nodes take no children")
        expected = {
            Kind.REPETITION: 0,
            Kind.BIORTHOGONAL: 1,
            Kind.SPC: m - 1,
            Kind.FULL: m,
        }[kind]
        if r != expected:
            raise ParameterError(f"{kind.value} leaf of length 2^{m} must have r={expected}, got r={r}")
        if kind in (Kind.BIORTHOGONAL, Kind.SPC) and m < 1:
            raise ParameterError(f"{kind.value} leaf needs m >= 1")
        if not 0 <= self.freeze <= _leaf_size(kind, m):
            raise ParameterError(
                f"freeze={self.freeze} exceeds the dimension {_leaf_size(kind, m)} "
                f"of leaf {kind.value}({m},{r})"
            )

    def _check_branch(self):
        names = CHILD_NAMES[self.kind]
        if len(self.children) != len(names):
            raise ParameterError(f"{self.kind.value} node needs {len(names)} children")
        step = 1 if self.kind is Kind.PLOTKIN else 2
        for name, child in zip(names, self.children):
            if not isinstance(child, CodeTree):
                raise ParameterError(f"child {name!r} is not a CodeTree")
            if child.m != self.m - step:
                raise ParameterError(
                    f"child {name!r} of a length-2^{self.m} {self.kind.value} node "
                    f"must have m={self.m - step}, got m={child.m}"
                )
        if self.freeze:
            raise ParameterError("freezing is set per leaf; branch nodes take freeze=0")

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def is_leaf(self) -> bool:
        return self.kind in LEAF_KINDS

    @property
    def leaf_size(self) -> int:
        """Structural payload size of a leaf."""
        return _leaf_size(self.kind, self.m)

    @property
    def payload_size(self) -> int:
        """Unfrozen payload size of a leaf."""
        return self.leaf_size - self.freeze

    @cached_property
    def structural_dimension(self) -> int:
        if self.is_leaf:
            return self.leaf_size
        return sum(c.structural_dimension for c in self.children)

    @cached_property
    def k(self) -> int:
        """Effective dimension, frozen bits excluded."""
        if self.is_leaf:
            return self.payload_size
        return sum(c.k for c in self.children)

    def iter_leaves(self) -> Iterator["CodeTree"]:
        if self.is_leaf:
            yield self
        else:
            for child in self.children:
                yield from child.iter_leaves()

    @cached_property
    def leaves(self) -> tuple["CodeTree", ...]:
        return tuple(self.iter_leaves())

    @cached_property
    def is_rm(self) -> bool:
        """True when the node is literally RM(m, r) with nothing frozen."""
        if self.is_leaf:
            return self.freeze == 0
        if self.kind is not Kind.PLOTKIN:
            return False
        v, u = self.children
        return (
            v.r == self.r - 1
            and u.r == min(self.r, self.m - 1)
            and v.is_rm
            and u.is_rm
        )

    @property
    def label(self) -> str:
        return f"{{{self.m},{self.r}}}"

    def describe(self) -> str:
        """One line per leaf: index, label, kind, dimension, frozen prefix."""
        lines = []
        offset = 0
        for i, leaf in enumerate(self.leaves):
            lines.append(
                f"leaf {i}: {leaf.label} {leaf.kind.value} n={leaf.n} "
                f"k={leaf.leaf_size} frozen={leaf.freeze} bits={offset}:{offset + leaf.payload_size}"
            )
            offset += leaf.payload_size
        return "\n".join(lines)


def _leaf_for(m: int, r: int, termination: str) -> Kind | None:
    if r == 0:
        return Kind.REPETITION
    if r == m:
        return Kind.FULL
    if termination == "partial":
        if r == 1:
            return Kind.BIORTHOGONAL
        if r == m - 1:
            return Kind.SPC
    return None


def _check_choice(value: str, choices: Sequence[str], what: str) -> str:
    value = str(value).lower()
    if value not in choices:
        raise ParameterError(f"{what} must be one of {', '.join(choices)}; got {value!r}")
    return value


def build_rm_tree(m: int, r: int, termination: str = "partial") -> CodeTree:
    """Plotkin decomposition of RM(m, r).

    ``termination="full"`` recurses down to repetition and full-space
    leaves; ``"partial"`` stops at biorthogonal and single-parity-check
    codes as well.
    """
    termination = _check_choice(termination, TERMINATIONS, "termination")
    if not (isinstance(m, int) and isinstance(r, int)) or m < 0 or not 0 <= r <= m:
        raise ParameterError(f"RM parameters need 0 <= r <= m, got m={m}, r={r}")
    return _rm(m, r, termination)


def _rm(m: int, r: int, termination: str) -> CodeTree:
    r = min(r, m)
    kind = _leaf_for(m, r, termination)
    if kind is not None:
        return CodeTree(m, r, kind)
    v = _rm(m - 1, r - 1, termination)
    u = _rm(m - 1, r, termination)
    return CodeTree(m, r, Kind.PLOTKIN, (v, u))


def build_quad_tree(m: int, r: int, ordering: str = "standard", termination: str = "partial") -> CodeTree:
    """Four-quarter split of RM(m, r) into {m-2,r-2}, 2x{m-2,r-1}, {m-2,r}.

    ``standard`` gives ``(u, u+w1, u+w2, u+w1+w2+v)``, which is two nested
    Plotkin splits and hence the same code as RM(m, r).  ``chained`` gives
    ``(u, u+w1, u+w1+w2, u+w1+w2+v)``: same constituents and dimension,
    different code.
    """
    ordering = _check_choice(ordering, ORDERINGS, "ordering")
    termination = _check_choice(termination, TERMINATIONS, "termination")
    if m < 2 or r < 2 or r > m:
        raise ParameterError(f"quad split needs 2 <= r <= m, got m={m}, r={r}")
    v = _rm(m - 2, r - 2, termination)
    w = _rm(m - 2, r - 1, termination)
    u = _rm(m - 2, r, termination)
    if ordering == "chained":
        return CodeTree(m, r, Kind.CHAINED, (v, w, w, u))
    rv = min(r - 1, m - 1)
    ru = min(r, m - 1)
    return CodeTree(
        m,
        r,
        Kind.PLOTKIN,
        (CodeTree(m - 1, rv, Kind.PLOTKIN, (v, w)), CodeTree(m - 1, ru, Kind.PLOTKIN, (w, u))),
    )


def dimension(tree: CodeTree) -> int:
    """Effective dimension: structural dimension minus all frozen bits."""
    return tree.k


def min_distance(tree: CodeTree) -> tuple[float, bool]:
    """Minimum distance and whether the value is exact.

    Plotkin nodes use ``min(2*d_u, d_v)``, which is exact whenever the
    children's values are, so every Plotkin tree reports an exact value.
    Chained quads use ``min(d_v, d_w1, d_w2, 4*d_u)``; it is a lower bound
    that becomes exact when both ``w`` children are the same code.  A code
    with no nonzero codeword has distance ``math.inf``.
    """
    if tree.is_leaf:
        return _leaf_distance(tree), True
    if tree.kind is Kind.PLOTKIN:
        (dv, ev), (du, eu) = (min_distance(c) for c in tree.children)
        return _as_int(min(2 * du, dv)), ev and eu
    v, w2, w1, u = tree.children
    parts = [min_distance(c) for c in (v, w2, w1, u)]
    (dv, _), (dw2, _), (dw1, _), (du, _) = parts
    exact = all(e for _, e in parts) and w1 == w2
    return _as_int(min(dv, dw2, dw1, 4 * du)), exact


def _as_int(d):
    return d if math.isinf(d) else int(d)


def _leaf_distance(leaf: CodeTree) -> float:
    if leaf.payload_size == 0:
        return math.inf
    return {
        Kind.REPETITION: leaf.n,
        Kind.BIORTHOGONAL: leaf.n // 2,
        Kind.SPC: 2,
        Kind.FULL: 1,
    }[leaf.kind]


def apply_freezing(tree: CodeTree, mask: Sequence[int]) -> CodeTree:
    """Return the subcode with leaf ``i``'s first ``mask[i]`` payload bits zero.

    A mask shorter than the leaf list leaves the remaining leaves untouched.
    """
    mask = [int(x) for x in mask]
    n_leaves = len(tree.leaves)
    if len(mask) > n_leaves:
        raise ParameterError(f"freezing mask has {len(mask)} entries but the tree has {n_leaves} leaves")
    if any(x < 0 for x in mask):
        raise ParameterError("freeze prefix lengths must be non-negative")
    mask = mask + [None] * (n_leaves - len(mask))
    it = iter(mask)
    return _refreeze(tree, it)


def _refreeze(node: CodeTree, it) -> CodeTree:
    if node.is_leaf:
        f = next(it)
        if f is None:
            return node
        if f > node.leaf_size:
            raise ParameterError(
                f"cannot freeze {f} bits of leaf {node.kind.value}{node.label} with dimension {node.leaf_size}"
            )
        return replace(node, freeze=f)
    return replace(node, children=tuple(_refreeze(c, it) for c in node.children))


def freeze_leading(tree: CodeTree, count: int) -> CodeTree:
    """Freeze the first ``count`` information bits in serialization order."""
    total = tree.structural_dimension
    if not 0 <= count <= total:
        raise ParameterError(f"cannot freeze {count} of {total} bits")
    mask = []
    for leaf in tree.leaves:
        take = min(count, leaf.leaf_size)
        mask.append(max(take, leaf.freeze))
        count -= take
    return apply_freezing(tree, mask)


def freezing_mask(tree: CodeTree) -> list[int]:
    return [leaf.freeze for leaf in tree.leaves]


# ---------------------------------------------------------------------------
# structured config


def tree_from_spec(spec: Mapping[str, Any]) -> CodeTree:
    """Build a tree from a config mapping.

    Schema::

        {type: rm,     m, r, termination: partial|full}
        {type: quad,   m, r, ordering: standard|chained, termination}
        {type: custom, tree: NODE}

    any of which may add ``freezing: [per-leaf prefix lengths]`` or
    ``freeze_leading: count``.  ``NODE`` is either a leaf
    ``{kind: repetition|biorthogonal|spc|full, m, freeze?}`` or a split
    ``{kind: plotkin, m, r, v: NODE, u: NODE}`` /
    ``{kind: chained, m, r, v: NODE, w2: NODE, w1: NODE, u: NODE}``.
    """
    if not isinstance(spec, Mapping):
        raise ParameterError("code spec must be a mapping")
    known = {"type", "m", "r", "termination", "ordering", "freezing", "freeze_leading", "tree"}
    unknown = set(spec) - known
    if unknown:
        raise ParameterError(f"unknown code spec keys: {', '.join(sorted(unknown))}")
    kind = _check_choice(spec.get("type", "rm"), ("rm", "quad", "custom"), "code type")
    termination = spec.get("termination", "partial")
    if kind == "custom":
        if "tree" not in spec:
            raise ParameterError("custom code spec needs a 'tree' entry")
        tree = _node_from_spec(spec["tree"])
    else:
        try:
            m, r = int(spec["m"]), int(spec["r"])
        except KeyError as exc:
            raise ParameterError(f"code spec is missing {exc.args[0]!r}") from None
        if kind == "rm":
            tree = build_rm_tree(m, r, termination)
        else:
            tree = build_quad_tree(m, r, spec.get("ordering", "standard"), termination)
    if spec.get("freezing"):
        tree = apply_freezing(tree, spec["freezing"])
    if spec.get("freeze_leading"):
        tree = freeze_leading(tree, int(spec["freeze_leading"]))
    return tree


def _node_from_spec(node: Mapping[str, Any]) -> CodeTree:
    if not isinstance(node, Mapping) or "kind" not in node or "m" not in node:
        raise ParameterError(f"tree node needs 'kind' and 'm': {node!r}")
    try:
        kind = Kind(str(node["kind"]).lower())
    except ValueError:
        raise ParameterError(f"unknown node kind {node['kind']!r}") from None
    m = int(node["m"])
    if kind in LEAF_KINDS:
        default_r = {Kind.REPETITION: 0, Kind.BIORTHOGONAL: 1, Kind.SPC: m - 1, Kind.FULL: m}[kind]
        return CodeTree(m, int(node.get("r", default_r)), kind, freeze=int(node.get("freeze", 0)))
    names = CHILD_NAMES[kind]
    missing = [name for name in names if name not in node]
    if missing:
        raise ParameterError(f"{kind.value} node is missing children: {', '.join(missing)}")
    children = tuple(_node_from_spec(node[name]) for name in names)
    return CodeTree(m, int(node.get("r", 0)), kind, children)


def tree_to_spec(tree: CodeTree) -> dict:
    """Inverse of :func:`tree_from_spec` as a ``custom`` spec."""
    return {"type": "custom", "tree": _node_to_spec(tree)}


def _node_to_spec(node: CodeTree) -> dict:
    out: dict[str, Any] = {"kind": node.kind.value, "m": node.m, "r": node.r}
    if node.is_leaf:
        if node.freeze:
            out["freeze"] = node.freeze
        return out
    for name, child in zip(CHILD_NAMES[node.kind], node.children):
        out[name] = _node_to_spec(child)
    return out


def code_id(spec: Mapping[str, Any], tree: CodeTree | None = None) -> str:
    """Short identifier used in CSV output, e.g. ``rm-6-2-partial-k22``."""
    tree = tree if tree is not None else tree_from_spec(spec)
    kind = str(spec.get("type", "rm")).lower()
    if kind == "rm":
        base = f"rm-{spec['m']}-{spec['r']}-{spec.get('termination', 'partial')}"
    elif kind == "quad":
        base = f"quad-{spec['m']}-{spec['r']}-{spec.get('ordering', 'standard')}"
    else:
        base = f"custom-{tree.m}"
    return f"{base}-k{tree.k}"

"""Choi matrices and the link product.

A linear map with Kraus operators ``K_b: H_in -> H_out`` is represented by the
positive matrix ``C = sum_b |K_b>><<K_b|`` on wires ``(out, in)``, where
``|K>> = K.reshape(-1)`` in the row-major convention of :mod:`hoqo.tensor`.
Its action on a state is ``tr_in[C (1_out (x) rho^T)]``, which is the same as
the link product of ``rho`` with ``C``.

The link product contracts shared labels. Writing ``u, v`` for the shared
row/column indices, ``y`` for indices only in ``a`` and ``x`` for indices only
in ``b``::

    (a * b)[(x, y), (x', y')] = sum_{u, v} a[(u, y), (v, y')] b[(x, u), (x', v)]

which equals ``tr_shared[(1 (x) a^{T_shared})(b (x) 1)]`` with the partial
transpose on the first operand.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, LabelMismatch, TripleLabel
from .tensor import (
    LabeledMatrix,
    Wire,
    kron,
    partial_trace,
    permute,
    scalar,
    sort_wires,
)

Labels = str | Sequence[str]


def _as_tuple(labels: Labels | None) -> tuple[str, ...]:
    if labels is None:
        return ()
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Kraus operators of a completely positive map.

    ``in_label``/``out_label`` may each be a single label or a tuple of
    labels; with several labels, ``in_dims``/``out_dims`` give the factor
    dimensions (row-major, first label most significant).
    """

    kraus: tuple[np.ndarray, ...]
    in_label: Labels
    out_label: Labels
    in_dims: tuple[int, ...] | None = None
    out_dims: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise DimensionMismatch("a Kraus set needs at least one operator")
        shape = ks[0].shape
        if any(k.shape != shape or k.ndim != 2 for k in ks):
            raise DimensionMismatch("Kraus operators must share one 2-D shape")
        object.__setattr__(self, "kraus", ks)
        ins, outs = _as_tuple(self.in_label), _as_tuple(self.out_label)
        in_dims = self.in_dims or ((shape[1],) if len(ins) == 1 else None)
        out_dims = self.out_dims or ((shape[0],) if len(outs) == 1 else None)
        if in_dims is None or out_dims is None:
            raise DimensionMismatch("multi-wire Kraus sets need explicit dims")
        if int(np.prod(in_dims)) != shape[1] or int(np.prod(out_dims)) != shape[0]:
            raise DimensionMismatch(f"Kraus shape {shape} does not match dims")
        object.__setattr__(self, "in_dims", tuple(int(d) for d in in_dims))
        object.__setattr__(self, "out_dims", tuple(int(d) for d in out_dims))

    @property
    def in_labels(self) -> tuple[str, ...]:
        return _as_tuple(self.in_label)

    @property
    def out_labels(self) -> tuple[str, ...]:
        return _as_tuple(self.out_label)

    def completeness(self) -> np.ndarray:
        """``sum_b K_b^dagger K_b``."""
        return sum(k.conj().T @ k for k in self.kraus)

    def is_trace_preserving(self, tol: float = 1e-8) -> bool:
        e = self.completeness()
        return float(np.max(np.abs(e - np.eye(e.shape[0])))) <= tol

    def is_trace_nonincreasing(self, tol: float = 1e-8) -> bool:
        e = self.completeness()
        return float(np.linalg.eigvalsh(np.eye(e.shape[0]) - e)[0]) >= -tol

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)


@dataclass(frozen=True, eq=False)
class ChoiOperator:
    """A Choi matrix together with the split of its wires into inputs/outputs."""

    mat: LabeledMatrix
    map_inputs: tuple[str, ...]
    map_outputs: tuple[str, ...]

    def __post_init__(self) -> None:
        ins, outs = tuple(self.map_inputs), tuple(self.map_outputs)
        object.__setattr__(self, "map_inputs", ins)
        object.__setattr__(self, "map_outputs", outs)
        if set(ins) & set(outs) or sorted(ins + outs) != sorted(self.mat.labels):
            raise LabelMismatch(
                f"inputs {ins} and outputs {outs} must partition {self.mat.labels}"
            )

    @property
    def d_in(self) -> int:
        return self.mat.dim_of(self.map_inputs)

    @property
    def d_out(self) -> int:
        return self.mat.dim_of(self.map_outputs)

    def relabel(self, mapping: dict[str, str]) -> "ChoiOperator":
        return ChoiOperator(
            self.mat.relabel(mapping),
            tuple(mapping.get(l, l) for l in self.map_inputs),
            tuple(mapping.get(l, l) for l in self.map_outputs),
        )


def choi_of_kraus(k: KrausSet) -> ChoiOperator:
    """Choi matrix ``sum_b |K_b>><<K_b|`` on wires (outputs..., inputs...)."""
    vecs = np.stack([kb.reshape(-1) for kb in k.kraus], axis=1)
    data = vecs @ vecs.conj().T
    wires = tuple(Wire(l, d, "output") for l, d in zip(k.out_labels, k.out_dims)) + tuple(
        Wire(l, d, "input") for l, d in zip(k.in_labels, k.in_dims)
    )
    return ChoiOperator(LabeledMatrix(wires, data, True), k.in_labels, k.out_labels)


def choi_of_unitary(u: np.ndarray, in_label: Labels, out_label: Labels,
                    in_dims: Sequence[int] | None = None,
                    out_dims: Sequence[int] | None = None) -> ChoiOperator:
    """Rank-one Choi matrix ``|U>><<U|`` of a single-Kraus map."""
    return choi_of_kraus(
        KrausSet((u,), in_label, out_label,
                 tuple(in_dims) if in_dims else None, tuple(out_dims) if out_dims else None)
    )


def identity_channel(in_label: str, out_label: str, d: int) -> ChoiOperator:
    """Choi matrix of the identity channel, the unnormalised ``Phi+``."""
    return choi_of_unitary(np.eye(d), in_label, out_label)


def state(rho: np.ndarray, label: str) -> LabeledMatrix:
    """A density matrix on a single labeled wire (role output)."""
    rho = np.asarray(rho, dtype=complex)
    return LabeledMatrix((Wire(label, rho.shape[0], "output"),), rho)


def effect(e: np.ndarray, label: str) -> LabeledMatrix:
    """Choi matrix of the functional ``rho -> tr(E rho)``, which is ``E^T``."""
    e = np.asarray(e, dtype=complex)
    return LabeledMatrix((Wire(label, e.shape[0], "input"),), e.T)


def trace_map(wires: Sequence[Wire]) -> LabeledMatrix:
    """Choi matrix of the trace functional: the identity on ``wires``."""
    side = int(np.prod([w.dim for w in wires])) if wires else 1
    return LabeledMatrix(tuple(Wire(w.label, w.dim, "input") for w in wires), np.eye(side), True)


def link(a: LabeledMatrix, b: LabeledMatrix) -> LabeledMatrix:
    """Link product ``a * b``; the result's wires are sorted by label.

    Disjoint label sets give the tensor product and identical label sets give
    the scalar ``tr(a^T b)``.

    Raises:
        DimensionMismatch: if a shared label has different dims in a and b.
    """
    a_idx = {l: i for i, l in enumerate(a.labels)}
    b_idx = {l: i for i, l in enumerate(b.labels)}
    shared = [l for l in a.labels if l in b_idx]
    for l in shared:
        if a.wire(l).dim != b.wire(l).dim:
            raise DimensionMismatch(
                f"label {l!r} has dim {a.wire(l).dim} in a and {b.wire(l).dim} in b"
            )
    if not shared:
        return sort_wires(kron(b, a))
    na, nb = len(a.wires), len(b.wires)
    # integer sublists for einsum: rows then columns for each operand
    counter = iter(range(10 * (na + nb) + 10))
    row = {l: next(counter) for l in set(a.labels) | set(b.labels)}
    col = {l: next(counter) for l in set(a.labels) | set(b.labels)}
    a_sub = [row[l] for l in a.labels] + [col[l] for l in a.labels]
    b_sub = [row[l] for l in b.labels] + [col[l] for l in b.labels]
    x_only = [l for l in b.labels if l not in a_idx]
    y_only = [l for l in a.labels if l not in b_idx]
    out_labels = x_only + y_only
    out_sub = [row[l] for l in out_labels] + [col[l] for l in out_labels]
    t = np.einsum(a.tensor(), a_sub, b.tensor(), b_sub, out_sub, optimize=True)
    wires = tuple(b.wire(l) for l in x_only) + tuple(a.wire(l) for l in y_only)
    side = int(np.prod([w.dim for w in wires], dtype=np.int64)) if wires else 1
    out = LabeledMatrix(wires, t.reshape(side, side), a.hermitian_hint and b.hermitian_hint)
    return sort_wires(out)


def link_many(xs: Sequence[LabeledMatrix]) -> LabeledMatrix:
    """Left fold of :func:`link`.

    Raises:
        TripleLabel: if any label appears on three or more operands, in which
            case the result would depend on the bracketing.
    """
    counts = Counter(l for x in xs for l in set(x.labels))
    triple = sorted(l for l, c in counts.items() if c >= 3)
    if triple:
        raise TripleLabel(f"labels {triple} appear in three or more operands")
    out = scalar(1.0)
    for x in xs:
        out = link(out, x)
    return out


def apply_choi(c: ChoiOperator, rho: LabeledMatrix) -> LabeledMatrix:
    """Action of a Choi matrix on an operator living on ``c.map_inputs``.

    Raises:
        LabelMismatch: if ``rho``'s labels are not exactly the map inputs.
    """
    if sorted(rho.labels) != sorted(c.map_inputs):
        raise LabelMismatch(f"state wires {rho.labels} differ from inputs {c.map_inputs}")
    out = link(rho, c.mat)
    return permute(out, c.map_outputs) if c.map_outputs else out


def compose(first: ChoiOperator, second: ChoiOperator) -> ChoiOperator:
    """Sequential composition: ``first`` then ``second`` via shared labels."""
    shared = set(first.map_outputs) & set(second.map_inputs)
    mat = link(first.mat, second.mat)
    ins = tuple(l for l in first.map_inputs) + tuple(
        l for l in second.map_inputs if l not in shared
    )
    outs = tuple(l for l in first.map_outputs if l not in shared) + tuple(second.map_outputs)
    return ChoiOperator(mat, ins, outs)


def trace_out(x: LabeledMatrix, labels: Sequence[str]) -> LabeledMatrix:
    """Alias of :func:`hoqo.tensor.partial_trace`, the link with an identity."""
    return partial_trace(x, labels)

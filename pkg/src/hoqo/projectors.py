"""Projector calculus for affine classes of Choi matrices.

Every class handled here (channels, combs, process matrices, unital channels,
maps between such classes) is cut out by a projector built from the
trace-and-replace maps::

    _X(Z) = 1_X / d_X (x) tr_X Z

for label sets ``X``. These maps commute, are idempotent, and compose by set
union, ``_X o _Y = _(X u Y)``, with the empty set giving the identity. A
projector is therefore stored in normal form as a dictionary from frozen label
sets to rational coefficients. Sums, differences, scalar multiples and
compositions are all exact.

Because every ``_X`` is diagonal in a product basis whose factors are either
the identity or traceless, the eigenvalue of such a basis element under a
projector is ``sum_S c_S [S is contained in the identity positions]``. The SDP
layer uses this to generate equality constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import IncompatibleLabels, UnknownLabel
from .tensor import LabeledMatrix, Wire, identity, kron, partial_trace, permute

Term = frozenset


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


@dataclass(frozen=True, eq=False)
class ProjectorSpec:
    """A linear combination of trace-and-replace maps.

    Attributes:
        terms: coefficient of each ``_X`` keyed by ``frozenset(X)``.
        dims: dimension of every label the projector acts on.
        trace: trace constant of the associated normalised class, when known.
    """

    terms: Mapping[frozenset, Fraction]
    dims: Mapping[str, int]
    trace: Fraction | float | None = None
    name: str = field(default="")

    def __post_init__(self) -> None:
        clean: dict[frozenset, Fraction] = {}
        for k, c in self.terms.items():
            c = _frac(c)
            if c != 0:
                clean[frozenset(k)] = clean.get(frozenset(k), Fraction(0)) + c
        clean = {k: c for k, c in clean.items() if c != 0}
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "dims", dict(self.dims))
        for k in clean:
            missing = set(k) - set(self.dims)
            if missing:
                raise IncompatibleLabels(f"term labels {sorted(missing)} have no dimension")

    # ---- algebra -------------------------------------------------------
    @property
    def labels(self) -> frozenset:
        return frozenset(self.dims)

    def _merge_dims(self, other: "ProjectorSpec") -> dict[str, int]:
        dims = dict(self.dims)
        for l, d in other.dims.items():
            if dims.get(l, d) != d:
                raise IncompatibleLabels(f"label {l!r} has dims {dims[l]} and {d}")
            dims[l] = d
        return dims

    def __add__(self, other: "ProjectorSpec") -> "ProjectorSpec":
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, Fraction(0)) + c
        return ProjectorSpec(terms, self._merge_dims(other))

    def __neg__(self) -> "ProjectorSpec":
        return ProjectorSpec({k: -c for k, c in self.terms.items()}, self.dims)

    def __sub__(self, other: "ProjectorSpec") -> "ProjectorSpec":
        return self + (-other)

    def scale(self, c) -> "ProjectorSpec":
        return ProjectorSpec({k: _frac(c) * v for k, v in self.terms.items()}, self.dims)

    def __matmul__(self, other: "ProjectorSpec") -> "ProjectorSpec":
        """Composition ``self o other``, also the tensor product on disjoint wires."""
        terms: dict[frozenset, Fraction] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 | k2
                terms[k] = terms.get(k, Fraction(0)) + c1 * c2
        return ProjectorSpec(terms, self._merge_dims(other))

    def with_trace(self, trace, name: str = "") -> "ProjectorSpec":
        return ProjectorSpec(self.terms, self.dims, trace, name or self.name)

    def restrict_dims(self, dims: Mapping[str, int]) -> "ProjectorSpec":
        """Attach extra wires on which the projector acts as the identity."""
        merged = self._merge_dims(ProjectorSpec({}, dims))
        return ProjectorSpec(self.terms, merged, self.trace, self.name)

    def equals(self, other: "ProjectorSpec") -> bool:
        return dict(self.terms) == dict(other.terms)

    def __repr__(self) -> str:
        def fmt(k: frozenset) -> str:
            return "1" if not k else "_{" + ",".join(sorted(k)) + "}"

        body = " ".join(
            f"{'+' if c > 0 else '-'}{'' if abs(c) == 1 else str(abs(c))}{fmt(k)}"
            for k, c in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
        )
        return f"ProjectorSpec({body or '0'}, trace={self.trace})"

    # ---- action ----------------------------------------------------------
    def apply(self, x: LabeledMatrix) -> LabeledMatrix:
        return project(self, x)

    def eigenvalue(self, trivial: Iterable[str]) -> Fraction:
        """Eigenvalue on a product basis element that is proportional to the
        identity exactly on the wires in ``trivial``."""
        trivial = set(trivial)
        return sum((c for k, c in self.terms.items() if k <= trivial), Fraction(0))


def trace_replace(x: LabeledMatrix, labels: Iterable[str]) -> LabeledMatrix:
    """``_X(x) = 1_X / d_X (x) tr_X x``, returned on ``x``'s wire order."""
    labels = list(labels)
    if not labels:
        return x
    wires = [x.wire(l) for l in labels]
    d = int(np.prod([w.dim for w in wires]))
    reduced = partial_trace(x, labels)
    out = kron(identity(wires), reduced) * (1.0 / d)
    return permute(out, x.labels)


def project(p: ProjectorSpec, x: LabeledMatrix) -> LabeledMatrix:
    """Apply ``p`` to ``x``. Labels of ``x`` outside ``p`` are left alone."""
    for k in p.terms:
        for l in k:
            if l not in x.labels:
                raise UnknownLabel(f"projector label {l!r} not on matrix {x.labels}")
    acc = np.zeros_like(x.data)
    for k, c in p.terms.items():
        acc = acc + float(c) * trace_replace(x, sorted(k)).data
    return x.with_data(acc)


def _term(*labels: str) -> frozenset:
    return frozenset(labels)


def identity_projector(dims: Mapping[str, int] | None = None) -> ProjectorSpec:
    return ProjectorSpec({_term(): Fraction(1)}, dims or {})


def tr_rep(labels: Iterable[str], dims: Mapping[str, int]) -> ProjectorSpec:
    """The single term ``_X``."""
    return ProjectorSpec({frozenset(labels): Fraction(1)}, dims)


def channel_projector(inputs: Sequence[str], outputs: Sequence[str],
                      dims: Mapping[str, int]) -> ProjectorSpec:
    """Span of CPTP maps from ``inputs`` to ``outputs``: ``1 - _o + _io``.

    The trace constant is the input dimension.
    """
    inputs, outputs = tuple(inputs), tuple(outputs)
    if set(inputs) & set(outputs):
        raise IncompatibleLabels("inputs and outputs overlap")
    d = {l: dims[l] for l in inputs + outputs}
    p = identity_projector(d) - tr_rep(outputs, d) + tr_rep(inputs + outputs, d)
    d_in = int(np.prod([d[l] for l in inputs])) if inputs else 1
    return p.with_trace(Fraction(d_in), "channel")


def unital_projector(inputs: Sequence[str], outputs: Sequence[str],
                     dims: Mapping[str, int]) -> ProjectorSpec:
    """Span of unital CPTP maps: ``1 - _i - _o + 2 _io`` (equal dims assumed)."""
    inputs, outputs = tuple(inputs), tuple(outputs)
    d = {l: dims[l] for l in inputs + outputs}
    p = (
        identity_projector(d)
        - tr_rep(inputs, d)
        - tr_rep(outputs, d)
        + tr_rep(inputs + outputs, d).scale(2)
    )
    d_in = int(np.prod([d[l] for l in inputs])) if inputs else 1
    return p.with_trace(Fraction(d_in), "unital")


def comb_projector(teeth: Sequence[tuple[Sequence[str], Sequence[str]]],
                   dims: Mapping[str, int], skip_first: bool = False) -> ProjectorSpec:
    """Span of combs with teeth ``[(o_0, i_1), ..., (o_{n-1}, i_n)]``.

    Each tooth contributes ``1 - _(i_k u L_k) + _(o_{k-1} u i_k u L_k)``
    where ``L_k`` collects every wire of later teeth. With ``skip_first`` the
    first factor is dropped, leaving the first reduced comb unconstrained;
    this is the span of the cone used for order-dependent decompositions.
    The trace constant is the product of the output dimensions.
    """
    teeth = [(tuple(o), tuple(i)) for o, i in teeth]
    labels = [l for o, i in teeth for l in o + i]
    d = {l: dims[l] for l in labels}
    p = identity_projector(d)
    for k, (o, i) in enumerate(teeth):
        if skip_first and k == 0:
            continue
        later = tuple(l for oo, ii in teeth[k + 1:] for l in oo + ii)
        factor = identity_projector(d) - tr_rep(i + later, d) + tr_rep(o + i + later, d)
        p = p @ factor
    trace = int(np.prod([d[l] for o, _ in teeth for l in o])) if labels else 1
    return p.with_trace(Fraction(trace), "comb")


def process_matrix_projector(a_in: str = "Ai", a_out: str = "Ao", b_in: str = "Bi",
                             b_out: str = "Bo",
                             dims: Mapping[str, int] | None = None) -> ProjectorSpec:
    """The seven-term projector onto the span of bipartite process matrices."""
    dims = dict(dims or {a_in: 2, a_out: 2, b_in: 2, b_out: 2})
    t = lambda *ls: tr_rep(ls, dims)  # noqa: E731
    p = (
        t(a_out) + t(b_out) - t(a_out, b_out) - t(a_in, a_out) - t(b_in, b_out)
        + t(a_out, b_in, b_out) + t(a_in, a_out, b_out)
    )
    return p.with_trace(Fraction(dims[a_out] * dims[b_out]), "process_matrix")


def non_signalling_projector(parties: Sequence[tuple[str, str]],
                             dims: Mapping[str, int]) -> ProjectorSpec:
    """Tensor product of channel projectors, one per party ``(in, out)``."""
    p = identity_projector({})
    trace = Fraction(1)
    for i, o in parties:
        q = channel_projector([i], [o], dims)
        p = p @ q
        trace *= q.trace
    return p.with_trace(trace, "non_signalling")


def compose_projector(p_in: ProjectorSpec, p_out: ProjectorSpec,
                      in_labels: Sequence[str], out_labels: Sequence[str]) -> ProjectorSpec:
    """Projector onto maps sending the ``p_in`` class to the ``p_out`` class.

    With ``_i`` and ``_o`` tracing all input and all output wires::

        P_io(Z) = Z - P_i(Z) + P_i P_o(Z) - P_i(_o Z) + _io Z

    and the trace constant is ``(gamma_o / gamma_i) * d_i``. A scalar
    ``p_in`` (no wires) is the identity on a one-dimensional space, for which
    the result reduces to ``p_out``.

    Raises:
        IncompatibleLabels: if the label sets overlap or the projectors act
            outside their declared wires.
    """
    in_labels, out_labels = tuple(in_labels), tuple(out_labels)
    if set(in_labels) & set(out_labels):
        raise IncompatibleLabels("input and output label sets overlap")
    for k in p_in.terms:
        if not k <= set(in_labels):
            raise IncompatibleLabels(f"p_in acts on {sorted(k)} outside {in_labels}")
    for k in p_out.terms:
        if not k <= set(out_labels):
            raise IncompatibleLabels(f"p_out acts on {sorted(k)} outside {out_labels}")
    dims = p_in._merge_dims(p_out)
    for l in in_labels + out_labels:
        if l not in dims:
            raise IncompatibleLabels(f"label {l!r} has no dimension")
    ident = identity_projector(dims)
    trace_o = tr_rep(out_labels, dims)
    trace_io = tr_rep(in_labels + out_labels, dims)
    p = ident - p_in + (p_in @ p_out) - (p_in @ trace_o) + trace_io
    if p_in.trace is None or p_out.trace is None:
        trace = None
    else:
        d_i = int(np.prod([dims[l] for l in in_labels])) if in_labels else 1
        trace = Fraction(p_out.trace) / Fraction(p_in.trace) * d_i
    return p.with_trace(trace, "composed")


def dims_of(x: LabeledMatrix) -> dict[str, int]:
    return {w.label: w.dim for w in x.wires}


def random_check_projector(p: ProjectorSpec, wires: Sequence[Wire],
                           rng: np.random.Generator) -> dict[str, float]:
    """Max-norm residuals of the projector axioms on random Hermitian inputs."""
    from .rng import random_hermitian

    side = int(np.prod([w.dim for w in wires]))
    x = LabeledMatrix(tuple(wires), random_hermitian(side, rng), True)
    y = LabeledMatrix(tuple(wires), random_hermitian(side, rng), True)
    px = project(p, x)
    out = {
        "idempotent": float(np.max(np.abs(project(p, px).data - px.data))),
        "transpose": float(np.max(np.abs(project(p, x.with_data(x.data.T)).data - px.data.T))),
        "unital": float(
            np.max(np.abs(project(p, identity(wires)).data - np.eye(side)))
        ),
        "self_adjoint": float(
            abs(np.trace(px.data @ y.data) - np.trace(x.data @ project(p, y).data))
        ),
    }
    return out

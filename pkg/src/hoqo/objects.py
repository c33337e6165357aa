"""Typed higher-order objects and their validity checks.

A comb is described by a :class:`CombStructure`: an ordered list of teeth
``(o_{k-1}, i_k)``. Reading the wires in time order gives
``o_0, i_1, o_1, i_2, ..., o_{n-1}, i_n``; the comb receives ``o_{k-1}`` and
emits ``i_k``. Slot ``k`` of the comb (where an external operation is
plugged in) maps ``i_k`` to ``o_k``. Each wire group may hold several labels
(parallel wires) or none (a trivial global past or future).

Validation reports the first violated condition in a fixed order: positivity,
then the trace hierarchy from the last tooth down, then the final
normalisation. Matrix conditions use the relative criterion
``|LHS - RHS|_max <= tol * max(1, |RHS|_max)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Any, Iterable, Sequence

import numpy as np

from .choi import ChoiOperator, link, link_many
from .errors import LabelMismatch, UnknownLabel
from .projectors import (
    ProjectorSpec,
    channel_projector,
    comb_projector,
    process_matrix_projector,
    project,
    tr_rep,
)
from .tensor import (
    VALIDITY_TOL,
    LabeledMatrix,
    Wire,
    check_psd,
    identity,
    kron,
    max_abs,
    partial_trace,
    permute,
    scalar,
)

Group = tuple[str, ...]


def _group(g: str | Sequence[str] | None) -> Group:
    if g is None:
        return ()
    if isinstance(g, str):
        return (g,)
    return tuple(g)


@dataclass(frozen=True)
class CombStructure:
    """Ordered teeth ``(output group, input group)``, earliest first."""

    teeth: tuple[tuple[Group, Group], ...]

    def __post_init__(self) -> None:
        teeth = tuple((_group(o), _group(i)) for o, i in self.teeth)
        object.__setattr__(self, "teeth", teeth)
        labels = [l for o, i in teeth for l in o + i]
        if len(set(labels)) != len(labels):
            raise LabelMismatch(f"comb labels are not distinct: {labels}")

    @classmethod
    def channel(cls, inputs: str | Sequence[str], outputs: str | Sequence[str]) -> "CombStructure":
        """A channel is a one-tooth comb receiving ``inputs`` and emitting ``outputs``."""
        return cls(((_group(inputs), _group(outputs)),))

    @property
    def n(self) -> int:
        return len(self.teeth)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for o, i in self.teeth for l in o + i)

    @property
    def output_labels(self) -> tuple[str, ...]:
        """Wires the comb receives (the ``o`` groups)."""
        return tuple(l for o, _ in self.teeth for l in o)

    @property
    def input_labels(self) -> tuple[str, ...]:
        """Wires the comb emits (the ``i`` groups)."""
        return tuple(l for _, i in self.teeth for l in i)

    def time_order(self) -> list[Group]:
        """Wire groups ``o_0, i_1, o_1, ..., o_{n-1}, i_n``."""
        out: list[Group] = []
        for o, i in self.teeth:
            out.extend([o, i])
        return out

    def slots(self) -> list[tuple[Group, Group]]:
        """Slots ``(i_k, o_k)`` for k = 1..n; ``o_n`` is empty."""
        out = []
        for k, (_, i) in enumerate(self.teeth):
            nxt = self.teeth[k + 1][0] if k + 1 < self.n else ()
            out.append((i, nxt))
        return out

    def global_past(self) -> Group:
        return self.teeth[0][0] if self.teeth else ()

    def dual(self) -> "CombStructure":
        """Structure of the testers that close this comb.

        The tester emits what the comb receives and vice versa, so its teeth
        are ``((), o_0), (i_1, o_1), ..., (i_n, ())`` with empty pairs dropped.
        """
        groups = [()] + self.time_order() + [()]
        teeth = []
        for k in range(0, len(groups), 2):
            pair = (groups[k], groups[k + 1])
            if pair != ((), ()):
                teeth.append(pair)
        return CombStructure(tuple(teeth))

    def contract_slot(self, k: int) -> "CombStructure":
        """Structure left after filling slot ``k`` (0-based) with a channel."""
        if not 0 <= k < self.n - 1:
            raise IndexError(f"slot {k} cannot be contracted in a {self.n}-tooth comb")
        teeth = list(self.teeth)
        merged = (teeth[k][0], teeth[k + 1][1])
        return CombStructure(tuple(teeth[:k]) + (merged,) + tuple(teeth[k + 2:]))

    def projector(self, dims: dict[str, int]) -> ProjectorSpec:
        return comb_projector(self.teeth, dims)

    def to_json(self) -> list[list[list[str]]]:
        return [[list(o), list(i)] for o, i in self.teeth]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[Sequence[str]]]) -> "CombStructure":
        return cls(tuple((tuple(o), tuple(i)) for o, i in data))


@dataclass(frozen=True, eq=False)
class Comb:
    """A comb Choi matrix together with its causal structure."""

    mat: LabeledMatrix
    structure: CombStructure

    def __post_init__(self) -> None:
        if sorted(self.mat.labels) != sorted(self.structure.labels):
            raise LabelMismatch(
                f"matrix wires {self.mat.labels} differ from structure {self.structure.labels}"
            )

    @property
    def dims(self) -> dict[str, int]:
        return {w.label: w.dim for w in self.mat.wires}

    def relabel(self, mapping: dict[str, str]) -> "Comb":
        teeth = tuple(
            (tuple(mapping.get(l, l) for l in o), tuple(mapping.get(l, l) for l in i))
            for o, i in self.structure.teeth
        )
        return Comb(self.mat.relabel(mapping), CombStructure(teeth))


@dataclass(frozen=True, eq=False)
class ProcessMatrixObject:
    """A bipartite process matrix on ``(A_in, A_out, B_in, B_out)`` wires."""

    mat: LabeledMatrix
    parties: tuple[tuple[str, str], tuple[str, str]] = (("Ai", "Ao"), ("Bi", "Bo"))

    def __post_init__(self) -> None:
        labels = [l for p in self.parties for l in p]
        if sorted(labels) != sorted(self.mat.labels):
            raise LabelMismatch(f"process wires {self.mat.labels} differ from parties {labels}")

    @property
    def dims(self) -> dict[str, int]:
        return {w.label: w.dim for w in self.mat.wires}

    def projector(self) -> ProjectorSpec:
        (ai, ao), (bi, bo) = self.parties
        return process_matrix_projector(ai, ao, bi, bo, self.dims)


@dataclass(frozen=True, eq=False)
class SuperinstrumentObject:
    """Tester elements sharing a wire set; ``structure`` is the tester's own
    (role-reversed) comb structure, as produced by :meth:`CombStructure.dual`."""

    elements: tuple[LabeledMatrix, ...]
    structure: CombStructure

    def __post_init__(self) -> None:
        els = tuple(self.elements)
        object.__setattr__(self, "elements", els)
        for e in els:
            if sorted(e.labels) != sorted(self.structure.labels):
                raise LabelMismatch(f"element wires {e.labels} differ from structure")

    def total(self) -> LabeledMatrix:
        out = self.elements[0]
        for e in self.elements[1:]:
            out = out + e
        return out


@dataclass(frozen=True)
class Verdict:
    """Outcome of a validity check.

    Attributes:
        passed: whether every condition holds within tolerance.
        condition: name of the first violated condition (``None`` on pass).
        magnitude: size of that violation; on pass, the largest residual seen.
        details: every residual that was computed, keyed by condition.
    """

    passed: bool
    condition: str | None = None
    magnitude: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "condition": self.condition,
            "magnitude": self.magnitude,
            "details": self.details,
        }


class _Checker:
    """Accumulates residuals and stops at the first failure."""

    def __init__(self, tol: float):
        self.tol = tol
        self.details: dict[str, float] = {}
        self.failed: tuple[str, float] | None = None

    def matrix(self, name: str, lhs: LabeledMatrix, rhs: LabeledMatrix) -> bool:
        rhs = permute(rhs, lhs.labels)
        err = max_abs(lhs.data - rhs.data)
        scale = max(1.0, max_abs(rhs))
        return self.value(name, err, self.tol * scale)

    def value(self, name: str, err: float, bound: float) -> bool:
        self.details[name] = float(err)
        if err > bound and self.failed is None:
            self.failed = (name, float(err))
        return self.failed is None

    def psd(self, name: str, x: LabeledMatrix) -> bool:
        rep = check_psd(x, self.tol * max(1.0, max_abs(x)))
        self.details[name + " (min eigenvalue)"] = rep.min_eigenvalue
        self.details[name + " (hermitian deviation)"] = rep.hermitian_deviation
        if not rep.is_psd and self.failed is None:
            mag = max(-rep.min_eigenvalue, rep.hermitian_deviation)
            self.failed = (name, float(mag))
        return self.failed is None

    def verdict(self) -> Verdict:
        if self.failed is None:
            mags = [abs(v) for k, v in self.details.items() if "min eigenvalue" not in k]
            return Verdict(True, None, max(mags, default=0.0), dict(self.details))
        return Verdict(False, self.failed[0], self.failed[1], dict(self.details))


def _fmt(g: Group) -> str:
    return ",".join(g) if g else "-"


def _check_hierarchy(chk: _Checker, t: LabeledMatrix, s: CombStructure) -> None:
    """Top-down trace hierarchy; assumes ``t`` carries exactly the structure's wires."""
    current = t
    for k in range(s.n, 0, -1):
        o, i = s.teeth[k - 1]
        reduced = partial_trace(current, i) if i else current
        d_o = int(np.prod([t.wire(l).dim for l in o])) if o else 1
        lower = partial_trace(reduced, o) * (1.0 / d_o) if o else reduced
        rhs = kron(identity([t.wire(l) for l in o]), lower) if o else lower
        name = f"level {k}: tr_{{{_fmt(i)}}} T({k}) = 1_{{{_fmt(o)}}} (x) T({k - 1})"
        if not chk.matrix(name, reduced, rhs):
            return
        current = lower
    chk.value("normalisation: T(0) = 1", abs(current.scalar() - 1.0), chk.tol)


def _as_matrix(x) -> LabeledMatrix:
    if isinstance(x, (Comb, ProcessMatrixObject, ChoiOperator)):
        return x.mat
    return x


def _comb_structure(x, structure) -> CombStructure:
    if isinstance(structure, CombStructure):
        return structure
    if isinstance(x, Comb):
        return x.structure
    if isinstance(x, ChoiOperator):
        return CombStructure.channel(x.map_inputs, x.map_outputs)
    if isinstance(structure, (tuple, list)) and len(structure) == 2:
        return CombStructure.channel(structure[0], structure[1])
    raise LabelMismatch("a comb structure is required")


def _check_labels(x: LabeledMatrix, s: CombStructure) -> None:
    if sorted(x.labels) != sorted(s.labels):
        raise LabelMismatch(f"matrix wires {x.labels} differ from structure {s.labels}")


def validate(kind: str, x, structure=None, tol: float = VALIDITY_TOL) -> Verdict:
    """Check ``x`` against the characterisation of ``kind``.

    Args:
        kind: one of state, povm, channel, instrument, comb, superinstrument,
            process_matrix.
        x: a LabeledMatrix or typed object; for povm, instrument and
            superinstrument a sequence of elements.
        structure: CombStructure (combs, superinstruments in their own
            role-reversed form), or ``(inputs, outputs)`` for channels and
            instruments, or the party tuple for process matrices.
        tol: absolute tolerance, scaled by ``max(1, |RHS|)`` per condition.

    Raises:
        LabelMismatch: if ``x``'s wires do not match the structure.
    """
    chk = _Checker(tol)
    if kind == "state":
        m = _as_matrix(x)
        if chk.psd("positivity", m):
            chk.value("trace = 1", abs(m.trace() - 1.0), tol)
        return chk.verdict()
    if kind == "povm":
        effects = [_as_matrix(e) for e in x]
        for n, e in enumerate(effects):
            if not chk.psd(f"positivity of effect {n}", e):
                return chk.verdict()
        total = effects[0]
        for e in effects[1:]:
            total = total + e
        chk.matrix("completeness: sum of effects = 1", total, identity(total.wires))
        return chk.verdict()
    if kind in ("channel", "comb"):
        m = _as_matrix(x)
        s = _comb_structure(x, structure)
        _check_labels(m, s)
        if chk.psd("positivity", m):
            _check_hierarchy(chk, m, s)
        return chk.verdict()
    if kind == "instrument":
        elements = [_as_matrix(e) for e in x]
        s = _comb_structure(x[0], structure)
        for n, e in enumerate(elements):
            _check_labels(e, s)
            if not chk.psd(f"positivity of element {n}", e):
                return chk.verdict()
        total = elements[0]
        for e in elements[1:]:
            total = total + e
        _check_hierarchy(chk, total, s)
        return chk.verdict()
    if kind == "superinstrument":
        if isinstance(x, SuperinstrumentObject):
            elements, s = list(x.elements), x.structure
        else:
            elements, s = [_as_matrix(e) for e in x], structure
        if not isinstance(s, CombStructure):
            raise LabelMismatch("superinstrument validation needs the tester structure")
        for n, e in enumerate(elements):
            _check_labels(e, s)
            if not chk.psd(f"positivity of element {n}", e):
                return chk.verdict()
        total = elements[0]
        for e in elements[1:]:
            total = total + e
        _check_hierarchy(chk, total, s)
        return chk.verdict()
    if kind == "process_matrix":
        if isinstance(x, ProcessMatrixObject):
            w = x
        else:
            parties = structure or (("Ai", "Ao"), ("Bi", "Bo"))
            w = ProcessMatrixObject(_as_matrix(x), parties)
        m = w.mat
        if not chk.psd("positivity", m):
            return chk.verdict()
        p = w.projector()
        if not chk.matrix("projector fixed point P(W) = W", project(p, m), m):
            return chk.verdict()
        chk.value("trace = d_Ao d_Bo", abs(m.trace() - float(p.trace)), tol * float(p.trace))
        return chk.verdict()
    raise ValueError(f"unknown kind {kind!r}")


def born_probability(t: Comb | LabeledMatrix, g: LabeledMatrix) -> float:
    """Spatiotemporal Born rule ``tr(G^T T) = G * T``.

    Raises:
        LabelMismatch: if the tester element does not live on exactly the
            comb's wires.
    """
    m = _as_matrix(t)
    if sorted(m.labels) != sorted(g.labels):
        raise LabelMismatch(f"tester wires {g.labels} differ from comb wires {m.labels}")
    val = link(g, m).scalar()
    return float(val.real)


def conditional_process(t: Comb | LabeledMatrix, g: LabeledMatrix) -> LabeledMatrix:
    """Object left on the remaining wires after ``g`` is linked into ``t``.

    Raises:
        LabelMismatch: if ``g`` acts on wires the comb does not have.
    """
    m = _as_matrix(t)
    extra = set(g.labels) - set(m.labels)
    if extra:
        raise LabelMismatch(f"tester element acts on unknown wires {sorted(extra)}")
    return link(g, m)


def discard_prepare(wires_in: Sequence[Wire], wires_out: Sequence[Wire]) -> LabeledMatrix:
    """Choi matrix of "trace the input, prepare the maximally mixed output"."""
    d_out = int(np.prod([w.dim for w in wires_out])) if wires_out else 1
    return kron(identity(list(wires_in)), identity(list(wires_out))) * (1.0 / d_out)


def signalling_projector(inputs: Group, outputs: Group, dims: dict[str, int]) -> ProjectorSpec:
    """Projector onto differences of CPTP maps ``inputs -> outputs``."""
    return channel_projector(inputs, outputs, dims) - tr_rep(inputs + outputs, dims)


@dataclass(frozen=True)
class SignallingReport:
    """Signalling between slots.

    ``directions[(k, j)]`` is True when the choice of operation in slot
    ``k`` changes what slot ``j`` sees. ``magnitudes`` holds the residual
    behind each entry.
    """

    directions: dict[tuple[str, str], bool]
    magnitudes: dict[tuple[str, str], float]

    def any_backward(self, order: Sequence[str]) -> bool:
        pos = {s: n for n, s in enumerate(order)}
        return any(v for (k, j), v in self.directions.items() if pos[k] > pos[j])


def signalling_report(x: Comb | ProcessMatrixObject, tol: float = 1e-9) -> SignallingReport:
    """Exact signalling test via projectors.

    For a comb, every slot other than the ordered pair under test is closed
    with the discard-and-prepare channel; slot ``k`` signals to slot ``j``
    when the projector onto differences of CPTP maps at ``k`` does not
    annihilate the remaining two-slot object. For a process matrix the
    A->B test acts on ``tr_{B_out} W`` and the B->A test on ``tr_{A_out} W``.
    """
    dirs: dict[tuple[str, str], bool] = {}
    mags: dict[tuple[str, str], float] = {}
    if isinstance(x, ProcessMatrixObject):
        (ai, ao), (bi, bo) = x.parties
        dims = x.dims
        for src, dst, src_in, src_out, dst_out in (
            ("A", "B", ai, ao, bo),
            ("B", "A", bi, bo, ao),
        ):
            y = partial_trace(x.mat, [dst_out])
            q = signalling_projector((src_in,), (src_out,), dims)
            r = max_abs(project(q, y))
            mags[(src, dst)] = r
            dirs[(src, dst)] = r > tol * max(1.0, max_abs(y))
        return SignallingReport(dirs, mags)

    s = x.structure
    dims = x.dims
    slots: list[tuple[str, Group, Group]] = []
    if s.global_past():
        slots.append(("0", (), s.global_past()))
    for n, (i, o) in enumerate(s.slots(), start=1):
        slots.append((str(n), i, o))
    wire = {w.label: w for w in x.mat.wires}
    for (k, ki, ko), (j, ji, jo) in permutations(slots, 2):
        closers = [
            discard_prepare([wire[l] for l in si], [wire[l] for l in so])
            for name, si, so in slots
            if name not in (k, j) and (si or so)
        ]
        y = link_many([x.mat] + closers) if closers else x.mat
        q = signalling_projector(ki, ko, dims)
        r = max_abs(project(q, y))
        mags[(k, j)] = r
        dirs[(k, j)] = r > tol * max(1.0, max_abs(y))
    return SignallingReport(dirs, mags)


def tester_from_slots(structure: CombStructure,
                      slot_choi: Sequence[LabeledMatrix],
                      past_state: LabeledMatrix | None = None) -> LabeledMatrix:
    """Tester element built by plugging one operator per slot.

    Slot ``k`` takes a Choi matrix on ``(i_k, o_k)``; a comb with a global
    past also needs the state fed into ``o_0``.
    """
    parts = list(slot_choi)
    if structure.global_past():
        if past_state is None:
            raise LabelMismatch("comb has a global past; supply past_state")
        parts.append(past_state)
    return link_many(parts) if parts else scalar(1.0)


def labels_of(xs: Iterable[LabeledMatrix]) -> set[str]:
    return {l for x in xs for l in x.labels}


def require_labels(x: LabeledMatrix, labels: Iterable[str]) -> None:
    missing = set(labels) - set(x.labels)
    if missing:
        raise UnknownLabel(f"missing wires {sorted(missing)}")

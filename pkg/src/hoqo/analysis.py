"""Memory, classicality and chaos diagnostics for combs.

For analysis the comb is read slot by slot: slot ``k`` consists of the wires
``(i_k, o_k)`` that an experimenter touches at time ``k``. A global past
``o_0`` is attributed to the history. All logarithms are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .choi import link, link_many
from .errors import (
    ConventionViolation,
    DimensionTooLarge,
    LabelMismatch,
    NonRealValue,
    OddPartition,
)
from .objects import Comb, CombStructure, Verdict, discard_prepare
from .tensor import (
    LabeledMatrix,
    Wire,
    identity,
    kron,
    kron_all,
    partial_trace,
    permute,
)
from .constructors import OTOT

SUPPORT_CUTOFF = 1e-12
MAX_CLASSICALITY_SLOTS = 6


# --------------------------------------------------------------------------
# Entropies
# --------------------------------------------------------------------------


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits; eigenvalues below the support cutoff are dropped."""
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    lam = lam[lam > SUPPORT_CUTOFF]
    return float(-np.sum(lam * np.log2(lam)))


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``S(rho || sigma)`` in bits, ``+inf`` when supp(rho) is not inside supp(sigma)."""
    lr, vr = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    ls, vs = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    in_supp = ls > SUPPORT_CUTOFF
    # weight of rho outside the support of sigma
    outside = vs[:, ~in_supp]
    leak = float(np.real(np.trace(outside.conj().T @ rho @ outside))) if outside.size else 0.0
    if leak > SUPPORT_CUTOFF:
        return float("inf")
    keep = lr > SUPPORT_CUTOFF
    term1 = float(np.sum(lr[keep] * np.log2(lr[keep])))
    # tr(rho log sigma) on the support of sigma
    overlap = np.abs(vr[:, keep].conj().T @ vs[:, in_supp]) ** 2
    term2 = float(np.sum(lr[keep][:, None] * overlap * np.log2(ls[in_supp])[None, :]))
    return term1 - term2


def _normalised(t: Comb) -> LabeledMatrix:
    return t.mat * (1.0 / t.mat.trace().real)


# --------------------------------------------------------------------------
# Markovianity
# --------------------------------------------------------------------------


def tooth_marginals(t: Comb) -> list[LabeledMatrix]:
    """Unit-trace marginals of the normalised comb on each tooth's wires."""
    tn = _normalised(t)
    out = []
    for o, i in t.structure.teeth:
        keep = set(o) | set(i)
        out.append(partial_trace(tn, [l for l in tn.labels if l not in keep]))
    return out


def markov_reference(t: Comb) -> Comb:
    """Markovian comb built from per-tooth marginals, rescaled to comb normalisation."""
    parts = []
    for (o, _), m in zip(t.structure.teeth, tooth_marginals(t)):
        d_o = m.dim_of(o) if o else 1
        parts.append(m * d_o)
    return Comb(permute(kron_all(parts), t.mat.labels), t.structure)


@dataclass(frozen=True)
class MarkovResult:
    verdict: Verdict
    distance: float


def nonmarkovianity(t: Comb) -> float:
    """Relative entropy (bits) between the normalised comb and the product of
    its tooth marginals. This equals the total correlation across teeth."""
    tn = _normalised(t)
    ref = permute(kron_all(tooth_marginals(t)), tn.labels)
    return max(0.0, relative_entropy(tn.data, ref.data))


def markov_test(t: Comb, tol: float = 1e-9) -> MarkovResult:
    """Pass iff the non-Markovianity distance is at most ``tol``."""
    dist = nonmarkovianity(t)
    ok = dist <= tol
    v = Verdict(ok, None if ok else "comb differs from product of tooth marginals", dist,
                {"relative entropy (bits)": dist})
    return MarkovResult(v, dist)


@dataclass(frozen=True)
class PartitionFMH:
    """Slot indices (1-based) split into history, memory and future blocks."""

    future: tuple[int, ...]
    memory: tuple[int, ...]
    history: tuple[int, ...]

    def check(self, n_slots: int) -> None:
        h, m, f = sorted(self.history), sorted(self.memory), sorted(self.future)
        allk = h + m + f
        if sorted(allk) != list(range(1, n_slots + 1)):
            raise LabelMismatch(f"partition {allk} does not cover slots 1..{n_slots}")
        if allk != list(range(1, n_slots + 1)):
            raise LabelMismatch("history, memory and future must be contiguous and in time order")


def slot_wires(s: CombStructure, k: int) -> tuple[str, ...]:
    """Labels of slot ``k`` (1-based)."""
    i, o = s.slots()[k - 1]
    return tuple(i) + tuple(o)


@dataclass(frozen=True)
class MarkovOrderResult:
    verdict: Verdict
    distances: dict[int, float]
    weights: dict[int, float]
    skipped: tuple[int, ...] = field(default=())


def _closer(t: Comb, slots: Sequence[int]) -> list[LabeledMatrix]:
    s = t.structure
    w = {x.label: x for x in t.mat.wires}
    out = []
    for k in slots:
        i, o = s.slots()[k - 1]
        out.append(discard_prepare([w[l] for l in i], [w[l] for l in o]))
    if s.global_past():
        out.append(discard_prepare([], [w[l] for l in s.global_past()]))
    return out


def markov_order_check(t: Comb, tester_on_memory: Sequence[LabeledMatrix],
                       part: PartitionFMH, tol: float = 1e-9) -> MarkovOrderResult:
    """Conditional independence of future and history given memory outcomes.

    For each tester element ``O_x`` on the memory slots the conditional object
    ``X = T * O_x`` on history and future wires is normalised to unit trace and
    compared in max norm with ``tr_F(X) (x) tr_H(X)``. Outcomes whose
    probability (history and future slots closed by discard-and-prepare) is
    below 1e-12 are skipped and reported.
    """
    s = t.structure
    part.check(len(s.slots()))
    mem = {l for k in part.memory for l in slot_wires(s, k)}
    hist = [l for k in part.history for l in slot_wires(s, k)] + list(s.global_past())
    fut = [l for k in part.future for l in slot_wires(s, k)]
    dists: dict[int, float] = {}
    weights: dict[int, float] = {}
    skipped: list[int] = []
    closers = _closer(t, list(part.history) + list(part.future))
    for x, o in enumerate(tester_on_memory):
        if set(o.labels) != mem:
            raise LabelMismatch(f"tester element {x} must act on memory wires {sorted(mem)}")
        cond = link(o, t.mat)
        weight = float(link_many([cond] + closers).scalar().real)
        weights[x] = weight
        if weight < 1e-12:
            skipped.append(x)
            continue
        xn = cond * (1.0 / cond.trace().real)
        ref = kron(partial_trace(xn, fut), partial_trace(xn, hist)) if fut and hist else xn
        dists[x] = float(np.max(np.abs(xn.data - permute(ref, xn.labels).data)))
    worst = max(dists.values(), default=0.0)
    ok = worst <= tol
    bad = None if ok else f"outcome {max(dists, key=dists.get)}: future and history correlated"
    v = Verdict(ok, bad, worst, {f"outcome {k}": d for k, d in dists.items()})
    return MarkovOrderResult(v, dists, weights, tuple(skipped))


# --------------------------------------------------------------------------
# Classicality (Kolmogorov consistency)
# --------------------------------------------------------------------------


def _projector_chois(in_w: Wire, out_w: Wire | None, basis: np.ndarray) -> list[LabeledMatrix]:
    """Lueders instrument elements in ``basis`` (or effects for an output-less slot)."""
    out = []
    for x in range(basis.shape[1]):
        p = np.outer(basis[:, x], basis[:, x].conj())
        if out_w is None:
            out.append(LabeledMatrix((in_w,), p.T, True))
        else:
            v = p.reshape(-1)
            out.append(LabeledMatrix((out_w, in_w), np.outer(v, v.conj()), True))
    return out


def _identity_choi(in_w: Wire, out_w: Wire | None) -> LabeledMatrix:
    if out_w is None:
        return identity([in_w])
    v = np.eye(in_w.dim).reshape(-1)
    return LabeledMatrix((out_w, in_w), np.outer(v, v), True)


def _slot_wire_pairs(t: Comb) -> list[tuple[Wire, Wire | None]]:
    s = t.structure
    if s.global_past():
        raise LabelMismatch("classicality tests need a comb without a global past")
    w = {x.label: x for x in t.mat.wires}
    out = []
    for i, o in s.slots():
        if len(i) != 1 or len(o) > 1:
            raise LabelMismatch("classicality tests need single-wire slots")
        out.append((w[i[0]], w[o[0]] if o else None))
    return out


def sequential_probabilities(t: Comb, basis: Sequence[np.ndarray],
                             identity_slots: Sequence[int] = (),
                             dephase_slots: Sequence[int] = ()) -> dict[tuple[int, ...], float]:
    """Outcome probabilities with projective measurements on the other slots.

    Slots (1-based) listed in ``identity_slots`` get the identity channel and
    those in ``dephase_slots`` the dephasing channel in their basis. Keys are
    outcome tuples over the measured slots in time order.
    """
    pairs = _slot_wire_pairs(t)
    n = len(pairs)
    fixed = {}
    measured = []
    for k in range(1, n + 1):
        in_w, out_w = pairs[k - 1]
        b = np.asarray(basis[k - 1], dtype=complex)
        if k in identity_slots:
            fixed[k] = _identity_choi(in_w, out_w)
        elif k in dephase_slots:
            els = _projector_chois(in_w, out_w, b)
            tot = els[0]
            for e in els[1:]:
                tot = tot + e
            fixed[k] = tot
        else:
            measured.append((k, _projector_chois(in_w, out_w, b)))
    # contract fixed slots once
    base = link_many([t.mat] + list(fixed.values())) if fixed else t.mat
    probs: dict[tuple[int, ...], float] = {}
    for outcome in product(*[range(len(els)) for _, els in measured]):
        parts = [els[x] for (_, els), x in zip(measured, outcome)]
        val = link_many([base] + parts).scalar()
        probs[tuple(outcome)] = float(val.real)
    return probs


@dataclass(frozen=True)
class ClassicalityResult:
    verdict: Verdict
    max_discrepancy: float
    worst: dict


def classicality_check(t: Comb, basis: Sequence[np.ndarray] | None = None,
                       tol: float = 1e-9) -> ClassicalityResult:
    """Kolmogorov consistency over every subset of slots.

    For each non-empty subset ``L`` the statistics of projective measurements
    on the remaining slots are computed twice: with the identity on ``L`` and
    with the dephasing channel on ``L`` (which equals measuring and then
    forgetting the outcome). The comb is classical with respect to ``basis``
    when all differences are within ``tol``.

    Raises:
        DimensionTooLarge: for more than six slots.
    """
    pairs = _slot_wire_pairs(t)
    n = len(pairs)
    if n > MAX_CLASSICALITY_SLOTS:
        raise DimensionTooLarge(f"classicality_check enumerates 2^n subsets; n={n} > 6")
    if basis is None:
        basis = [np.eye(p[0].dim) for p in pairs]
    worst = {"discrepancy": 0.0}
    details = {}
    for r in range(1, n + 1):
        for lam in combinations(range(1, n + 1), r):
            p_id = sequential_probabilities(t, basis, identity_slots=lam)
            p_de = sequential_probabilities(t, basis, dephase_slots=lam)
            for key in p_id:
                diff = abs(p_id[key] - p_de[key])
                if diff > worst["discrepancy"]:
                    worst = {"discrepancy": diff, "subset": lam, "outcome": key,
                             "identity": p_id[key], "dephased": p_de[key]}
            details[str(lam)] = max((abs(p_id[k] - p_de[k]) for k in p_id), default=0.0)
    ok = worst["discrepancy"] <= tol
    cond = None if ok else f"Kolmogorov consistency fails on slots {worst['subset']}"
    return ClassicalityResult(Verdict(ok, cond, worst["discrepancy"], details),
                              worst["discrepancy"], worst)


# --------------------------------------------------------------------------
# Chaos diagnostics
# --------------------------------------------------------------------------


def _real(val: complex, what: str) -> float:
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise NonRealValue(f"{what} has imaginary part {val.imag:.3e}")
    return float(val.real)


def _otot_comb(x: OTOT | Comb) -> Comb:
    return x.comb if isinstance(x, OTOT) else x


def otoc(t_otot: OTOT | Comb, m: LabeledMatrix, v: LabeledMatrix, p: LabeledMatrix) -> float:
    """``T * M * V * P`` with ``M`` on ``3i``, ``V`` on ``(2i, 2o)`` and ``P`` on ``(1i, 1o)``."""
    t = _otot_comb(t_otot)
    if set(m.labels) != {"3i"} or set(v.labels) != {"2i", "2o"} or set(p.labels) != {"1i", "1o"}:
        raise LabelMismatch("otoc expects M on 3i, V on (2i, 2o), P on (1i, 1o)")
    return _real(link_many([t.mat, m, v, p]).scalar(), "OTOC")


def identity_slot_choi(in_label: str, out_label: str, d: int) -> LabeledMatrix:
    vec = np.eye(d).reshape(-1)
    return LabeledMatrix((Wire(out_label, d, "output"), Wire(in_label, d, "input")),
                         np.outer(vec, vec), True)


def loe(t_otot: OTOT, v: LabeledMatrix) -> float:
    """Local-operator entanglement ``-log2[tr(X_V^2) / tr(X_1^2)]``.

    ``X_V = T * V * 1_{1i}`` lives on ``(1o, 3i)``; dividing by the value for
    the identity perturbation makes the trivial case zero.

    Raises:
        ConventionViolation: if the OTOT was not built from a maximally mixed
            initial state.
    """
    if not t_otot.maximally_mixed:
        raise ConventionViolation("LOE is defined for a maximally mixed initial state")
    t = t_otot.comb
    one = identity([t.mat.wire("1i")])
    x_v = link_many([t.mat, v, one])
    ident = identity_slot_choi("2i", "2o", t.mat.wire("2i").dim)
    x_1 = link_many([t.mat, ident, one])
    num = _real(np.trace(x_v.data @ x_v.data), "tr X_V^2")
    den = _real(np.trace(x_1.data @ x_1.data), "tr X_1^2")
    return float(-np.log2(num / den)) + 0.0


def qde(t: Comb, n: int | None = None) -> float:
    """Finite-``n`` dynamical entropy ``-log2 tr(T_hat^2) / n`` of the unit-trace comb."""
    n = n or t.structure.n
    tn = _normalised(t)
    purity = _real(np.trace(tn.data @ tn.data), "purity")
    return float(-np.log2(purity) / n) + 0.0


def temporal_entanglement(t: Comb) -> float:
    """Renyi-2 entropy of the first half of the teeth in the vectorised comb.

    The comb's entries are read as a pure state on row and column indices;
    both copies of the first ``n/2`` teeth form one side of the cut.

    Raises:
        OddPartition: for an odd number of teeth.
    """
    s = t.structure
    if s.n % 2:
        raise OddPartition(f"temporal entanglement needs an even tooth count, got {s.n}")
    first = [l for o, i in s.teeth[: s.n // 2] for l in o + i]
    rest = [l for l in t.mat.labels if l not in first]
    m = permute(t.mat, first + rest)
    da = m.dim_of(first) if first else 1
    db = m.dim_of(rest) if rest else 1
    psi = m.data.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    norm2 = float(np.sum(np.abs(psi) ** 2))
    gram = psi @ psi.conj().T
    purity = float(np.sum(np.abs(gram) ** 2)) / norm2**2
    return float(-np.log2(purity)) + 0.0


def causal_break_tester(t: Comb, slots: Sequence[int],
                        basis: Sequence[np.ndarray] | None = None) -> list[LabeledMatrix]:
    """Measure-and-reprepare elements on the given slots.

    Each slot measures its input in ``basis[k]`` (computational by default)
    with outcome ``x`` and prepares basis state ``r`` on its output. Outcomes
    are enumerated as the product over slots of pairs ``(x, r)`` in time
    order, with ``r`` varying fastest.
    """
    pairs = _slot_wire_pairs(t)
    per_slot = []
    for k in slots:
        in_w, out_w = pairs[k - 1]
        b = np.eye(in_w.dim) if basis is None else np.asarray(basis[list(slots).index(k)])
        els = []
        for x in range(in_w.dim):
            px = np.outer(b[:, x], b[:, x].conj())
            eff = LabeledMatrix((in_w,), px.T, True)
            if out_w is None:
                els.append(eff)
                continue
            for r in range(out_w.dim):
                prep = LabeledMatrix((out_w,), np.outer(b[:, r], b[:, r].conj()), True)
                els.append(kron(eff, prep))
        per_slot.append(els)
    return [kron_all(list(combo)) for combo in product(*per_slot)]

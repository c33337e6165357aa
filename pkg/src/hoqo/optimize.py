"""Semidefinite programs over higher-order objects.

Covered here: causal witnesses for bipartite process matrices and for
switch-type processes, performance operators and optimal-fidelity SDPs for
transforming unknown unitaries, a table of closed-form reference values, and
a seesaw heuristic for the guess-your-neighbour's-input (GYNI) game.

All affine conditions are imposed through :mod:`hoqo.sdp`, which turns a
projector into sparse equality rows.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import cvxpy as cp
import numpy as np
from scipy.stats import unitary_group

from .choi import link
from .errors import (
    DimensionTooLarge,
    LabelMismatch,
    NoExactDesign,
    OutOfDomain,
    SolverFailure,
)
from .objects import ProcessMatrixObject
from .projectors import (
    channel_projector,
    comb_projector,
    compose_projector,
    non_signalling_projector,
    process_matrix_projector,
    project,
)
from .rng import make_rng, spawn
from .sdp import (
    HermitianVar,
    in_range,
    lin_rows,
    projected_equal,
    projector_rows,
    solve,
)
from .tensor import LabeledMatrix, Wire, identity, permute

TASKS = ("conjugation", "transposition", "identity")


@dataclass(frozen=True, eq=False)
class OptResult:
    """Outcome of an optimisation.

    ``status`` is ``optimal`` when the solver converged with a primal-dual gap
    of at most ``1e-6 (1 + |value|)``, ``near-optimal`` when it finished with
    reduced accuracy, and ``failed`` otherwise.
    """

    value: float
    optimiser: LabeledMatrix | None
    status: str
    gap: float
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"value": self.value, "status": self.status}
        if self.gap == self.gap:  # not NaN
            out["gap"] = self.gap
        out["details"] = {k: v for k, v in self.details.items()
                          if isinstance(v, (int, float, str, bool, list))}
        return out


def _is_real(*xs: np.ndarray, tol: float = 1e-12) -> bool:
    return all(not np.iscomplexobj(x) or np.max(np.abs(np.imag(x)), initial=0.0) <= tol for x in xs)


# --------------------------------------------------------------------------
# Unitary designs and performance operators
# --------------------------------------------------------------------------


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    j = int(np.argmax(np.abs(flat) > 1e-9))
    return u * (abs(flat[j]) / flat[j])


def clifford_group(d: int) -> list[np.ndarray]:
    """The Clifford group on one qudit modulo global phase, by breadth-first closure.

    Generators are the Fourier matrix, a quadratic phase gate, and the
    Weyl shift and clock. This gives 24 elements for ``d = 2`` and 216 for
    ``d = 3``.
    """
    omega = np.exp(2j * np.pi / d)
    j = np.arange(d)
    fourier = omega ** np.outer(j, j) / np.sqrt(d)
    if d % 2 == 0:
        phase = np.diag(np.exp(1j * np.pi * j**2 / d))
    else:
        phase = np.diag(omega ** (j * (j - 1) // 2))
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(omega**j)
    gens = [fourier, phase, shift, clock]

    def key(u: np.ndarray) -> tuple:
        v = np.round(_canonical_phase(u), 8).reshape(-1)
        return tuple(np.round(v.real, 8) + 0.0) + tuple(np.round(v.imag, 8) + 0.0)

    start = np.eye(d, dtype=complex)
    seen = {key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                w = _canonical_phase(g @ u)
                k = key(w)
                if k not in seen:
                    seen[k] = w
                    nxt.append(w)
        frontier = nxt
        if len(seen) > 100_000:
            raise NoExactDesign(f"Clifford closure for d={d} exceeded the size limit")
    return list(seen.values())


#: design degree of the registered Clifford groups
DESIGN_DEGREE = {2: 3, 3: 2}


def slot_labels(k: int) -> list[str]:
    return [x for j in range(1, k + 1) for x in (f"{j}i", f"{j}o")]


def performance_wires(d: int, k: int) -> tuple[Wire, ...]:
    """Wire order ``(P, 1i, 1o, ..., ki, ko, F)`` of the performance operator."""
    ws = [Wire("P", d, "output")]
    for j in range(1, k + 1):
        ws += [Wire(f"{j}i", d, "input"), Wire(f"{j}o", d, "output")]
    ws.append(Wire("F", d, "input"))
    return tuple(ws)


@dataclass(frozen=True, eq=False)
class PerformanceOperator:
    """``Omega`` with ``<F> = tr(Omega T)`` for a supermap ``T`` on the same wires.

    ``stderr`` is the entrywise standard error for Monte-Carlo estimates and
    zero for design averages.
    """

    mat: LabeledMatrix
    task: str
    d: int
    k: int
    method: str
    stderr: np.ndarray | None = None
    samples: int = 0


def _omega_vectors(task: str, us: np.ndarray, d: int, k: int) -> np.ndarray:
    """Rows ``vec(f(U)) (x) vec(U*)^{(x)k}`` in wire order ``(F, P, 1o, 1i, ...)``."""
    us = np.asarray(us).reshape(-1, d, d)
    if task == "conjugation":
        tgt = us.conj()
    elif task == "transposition":
        tgt = us.transpose(0, 2, 1)
    elif task == "identity":
        tgt = us
    else:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    v = tgt.reshape(len(us), -1)
    uc = us.conj().reshape(len(us), -1)
    for _ in range(k):
        v = np.einsum("ni,nj->nij", v, uc).reshape(len(us), -1)
    return v


def _natural_order(d: int, k: int) -> list[Wire]:
    ws = [Wire("F", d, "input"), Wire("P", d, "output")]
    for j in range(1, k + 1):
        ws += [Wire(f"{j}o", d, "output"), Wire(f"{j}i", d, "input")]
    return ws


def performance_operator(task: str, d: int, k: int, method: str = "design",
                         samples: int = 100_000, seed: int | None = 0,
                         batch: int = 2_000) -> PerformanceOperator:
    """Average of ``|f(U)>><<f(U)| (x) (|U>><<U|^T)^{(x)k} / d^2`` over unitaries.

    ``method="design"`` averages over the Clifford group, which is exact when
    its design degree reaches ``k + 1``. ``method="montecarlo"`` uses Haar
    samples and reports entrywise standard errors.

    Raises:
        NoExactDesign: if no registered design covers ``(d, k)``.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    if d < 2 or k < 1:
        raise OutOfDomain(f"need d >= 2 and k >= 1, got d={d}, k={k}")
    side = d ** (2 * (k + 1))
    stderr = None
    n = 0
    if method == "design":
        degree = DESIGN_DEGREE.get(d, 0)
        if degree < k + 1:
            raise NoExactDesign(f"no registered unitary {k + 1}-design for d={d}")
        group = clifford_group(d)
        vecs = _omega_vectors(task, group, d, k)
        omega = vecs.T @ vecs.conj() / len(group)
        n = len(group)
    elif method == "montecarlo":
        rng = make_rng(seed)
        acc = np.zeros((side, side), dtype=complex)
        acc2 = np.zeros((side, side))
        done = 0
        while done < samples:
            m = min(batch, samples - done)
            us = unitary_group.rvs(d, size=m, random_state=rng)
            vecs = _omega_vectors(task, us, d, k)
            acc += vecs.T @ vecs.conj()
            # |v_i v_j^*|^2 = |v_i|^2 |v_j|^2 gives the second moment of every entry
            mod2 = np.abs(vecs) ** 2
            acc2 += mod2.T @ mod2
            done += m
        omega = acc / samples
        var = np.maximum(acc2 / samples - np.abs(omega) ** 2, 0.0)
        stderr = np.sqrt(var / samples) / d**2
        n = samples
    else:
        raise ValueError(f"unknown method {method!r}")
    omega = omega / d**2
    omega = 0.5 * (omega + omega.conj().T)
    if _is_real(omega, tol=1e-13):
        omega = omega.real.astype(complex)
    mat = permute(LabeledMatrix(tuple(_natural_order(d, k)), omega, True),
                  [w.label for w in performance_wires(d, k)])
    if stderr is not None:
        stderr = permute(LabeledMatrix(tuple(_natural_order(d, k)), stderr.astype(complex)),
                         [w.label for w in performance_wires(d, k)]).data.real
    return PerformanceOperator(mat, task, d, k, method, stderr, n)


def fidelity_teeth(k: int, strategy: str) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Teeth of the supermap that receives ``P`` and the slot outputs and emits
    the slot inputs and ``F``."""
    if strategy == "parallel" or k == 1:
        ins = tuple(f"{j}i" for j in range(1, k + 1))
        outs = tuple(f"{j}o" for j in range(1, k + 1))
        return [(("P",), ins), (outs, ("F",))]
    if strategy == "sequential":
        teeth = [(("P",), ("1i",))]
        for j in range(1, k):
            teeth.append(((f"{j}o",), (f"{j + 1}i",)))
        teeth.append(((f"{k}o",), ("F",)))
        return teeth
    raise ValueError(f"unknown strategy {strategy!r}")


def fidelity_projector(d: int, k: int, strategy: str):
    """Projector and trace constant of the feasible supermaps.

    The parallel class is built as maps from channels ``(1i..ki) -> (1o..ko)``
    to channels ``P -> F``; the sequential class is the ``k``-slot comb.
    """
    dims = {w.label: d for w in performance_wires(d, k)}
    if strategy == "parallel" or k == 1:
        ins = [f"{j}i" for j in range(1, k + 1)]
        outs = [f"{j}o" for j in range(1, k + 1)]
        p_in = channel_projector(ins, outs, dims)
        p_out = channel_projector(["P"], ["F"], dims)
        return compose_projector(p_in, p_out, ins + outs, ["P", "F"])
    return comb_projector(fidelity_teeth(k, strategy), dims)


def optimal_fidelity(task: str, d: int, k: int, strategy: str = "parallel",
                     method: str = "design", solver: str = "CLARABEL",
                     omega: PerformanceOperator | None = None) -> OptResult:
    """Maximise ``tr(Omega T)`` over deterministic supermaps ``T``.

    Raises:
        SolverFailure: if the solver does not finish.
    """
    om = omega or performance_operator(task, d, k, method)
    labels = om.mat.labels
    p = fidelity_projector(d, k, strategy)
    real = _is_real(om.mat.data)
    t = HermitianVar(om.mat.side, not real, psd=True, name="T")
    cons = t.constraints() + in_range(p, labels, t) + [t.trace() == float(p.trace)]
    prob = cp.Problem(cp.Maximize(t.inner(om.mat.data)), cons)
    info = solve(prob, solver)
    opt = LabeledMatrix(om.mat.wires, t.value())
    return OptResult(info.value, opt, info.status, info.gap,
                     {"task": task, "d": d, "k": k, "strategy": strategy,
                      "solver": info.solver, "seconds": info.seconds,
                      "real_reduction": real})


# --------------------------------------------------------------------------
# Closed forms
# --------------------------------------------------------------------------

CLOSED_FORMS = (
    "conjugation_fidelity",
    "conjugation_probability",
    "transposition_probability",
    "transposition_success",
    "sar_fidelity",
    "sar_probability",
)


def closed_form(task: str, d: int, k: int) -> Fraction | float:
    """Reference values for unitary transformation tasks.

    ``conjugation_fidelity``
        ``(k + 1) / (d (d - k))`` for ``1 <= k < d``.
    ``conjugation_probability``
        1 when ``k >= d - 1`` and 0 otherwise.
    ``transposition_success``
        parallel success probability ``1 - (d^2 - 1) / (k + d^2 - 1)``.
    ``transposition_probability``
        the weight ``(d^2 - 1) / (k + d^2 - 1)`` subtracted in
        ``transposition_success``; equal to 3/7 at ``d = 2, k = 4``.
    ``sar_fidelity``
        ``1 - sin^2(pi / (k + 3))`` for store-and-retrieve with qubits.
    ``sar_probability``
        ``1 - d^2 / (k + d^2 - 1)``.

    Rational results are returned as exact fractions.

    Raises:
        OutOfDomain: for arguments outside a formula's domain.
    """
    if d < 2 or k < 1:
        raise OutOfDomain(f"need d >= 2 and k >= 1, got d={d}, k={k}")
    if task == "conjugation_fidelity":
        if k >= d:
            raise OutOfDomain("conjugation fidelity formula needs k < d")
        return Fraction(k + 1, d * (d - k))
    if task == "conjugation_probability":
        return Fraction(1) if k >= d - 1 else Fraction(0)
    if task == "transposition_probability":
        return Fraction(d * d - 1, k + d * d - 1)
    if task == "transposition_success":
        return 1 - Fraction(d * d - 1, k + d * d - 1)
    if task == "sar_fidelity":
        if d != 2:
            raise OutOfDomain("the store-and-retrieve fidelity formula is for qubits")
        return 1.0 - math.sin(math.pi / (k + 3)) ** 2
    if task == "sar_probability":
        return 1 - Fraction(d * d, k + d * d - 1)
    raise OutOfDomain(f"unknown closed form {task!r}; expected one of {CLOSED_FORMS}")


# --------------------------------------------------------------------------
# Causal witnesses
# --------------------------------------------------------------------------


def _psd_expr(expr: cp.Expression, n: int, name: str) -> tuple[cp.Variable, list]:
    """Symmetric PSD slack equal to ``expr`` (avoids relying on symmetry inference)."""
    s = cp.Variable((n, n), symmetric=True, name=name)
    return s, [s == expr, s >> 0]


WITNESS_NORMALISATIONS = ("white-noise", "general")


def causal_witness(w: ProcessMatrixObject, solver: str = "CLARABEL",
                   normalisation: str = "white-noise") -> OptResult:
    """Minimise ``tr(W D)`` over witnesses ``D = P_AB[G]`` for bipartite processes.

    Witnesses satisfy ``tr_Ao G >= 0`` and ``tr_Bo G >= 0``, which makes
    ``tr(D W') >= 0`` for every causally separable ``W'``. A negative optimum
    certifies causal non-separability. Two ways of bounding the program are
    offered:

    ``white-noise``
        ``tr(D W_0) <= 1`` with ``W_0 = 1 / (d_Ao d_Bo)``. The optimum is
        minus the white-noise robustness; for ``W_OCB`` it is ``1 - sqrt 2``.
    ``general``
        ``P_AB[G + J] = P_AB[1 / (d_Ao d_Bo)]`` with ``J >= 0``, i.e.
        ``tr(D W') <= 1`` for every valid process ``W'``. The optimum is minus
        the generalised robustness; for ``W_OCB`` it is ``-(sqrt 2 - 1)^2``.
    """
    if normalisation not in WITNESS_NORMALISATIONS:
        raise ValueError(f"normalisation must be one of {WITNESS_NORMALISATIONS}")
    (ai, ao), (bi, bo) = w.parties
    mat = w.mat
    labels = list(mat.labels)
    dims = [mat.dim_of([l]) for l in labels]
    p = w.projector()
    real = _is_real(mat.data)
    n = mat.side
    g = HermitianVar(n, not real, psd=False, name="G")
    cons = g.constraints()
    for out in (ao, bo):
        axis = labels.index(out)
        m = n // mat.dim_of([out])
        if real:
            red, size = cp.partial_trace(g.re, dims, axis), m
        else:
            re = cp.partial_trace(g.re, dims, axis)
            im = cp.partial_trace(g.im, dims, axis)
            red, size = cp.bmat([[re, -im], [im, re]]), 2 * m
        cons += _psd_expr(red, size, f"tr_{out}G")[1]
    scale = 1.0 / (mat.dim_of([ao]) * mat.dim_of([bo]))
    if normalisation == "general":
        j = HermitianVar(n, not real, psd=True, name="J")
        cons += j.constraints()
        cons += projected_equal(p, labels, [g, j], np.eye(n) * scale)
    else:
        # P[1] = 1, so tr(P[G] W_0) = tr(G) * scale
        cons.append(g.trace() * scale <= 1)
    obj = g.inner(project(p, mat).data.T)
    prob = cp.Problem(cp.Minimize(obj), cons)
    info = solve(prob, solver)
    gmat = LabeledMatrix(mat.wires, g.value())
    d = project(p, gmat)
    return OptResult(info.value, d, info.status, info.gap,
                     {"solver": info.solver, "seconds": info.seconds, "G": gmat,
                      "normalisation": normalisation, "real_reduction": real})


def witness_value(d: LabeledMatrix, w: LabeledMatrix) -> float:
    """``tr(W D)`` with wires aligned by label."""
    return float(np.real(np.sum(permute(w, d.labels).data * d.data.T)))


def switch_layout(s: LabeledMatrix) -> dict:
    """Wire groups of a switch-type process: past, future, and both parties."""
    labs = set(s.labels)
    for need in ("Ai", "Ao", "Bi", "Bo"):
        if need not in labs:
            raise LabelMismatch(f"switch-type process lacks wire {need}")
    past = tuple(l for l in ("P", "C") if l in labs)
    future = tuple(l for l in ("F", "C'") if l in labs)
    extra = labs - set(past) - set(future) - {"Ai", "Ao", "Bi", "Bo"}
    if extra:
        raise LabelMismatch(f"unexpected wires {sorted(extra)} for a switch-type process")
    return {"past": past, "future": future}


def switch_orders(layout: dict) -> list[list[tuple[tuple[str, ...], tuple[str, ...]]]]:
    """Teeth of the two fixed-order combs ``past < A < B < future`` and ``past < B < A < future``."""
    past, future = layout["past"], layout["future"]
    return [
        [(past, ("Ai",)), (("Ao",), ("Bi",)), (("Bo",), future)],
        [(past, ("Bi",)), (("Bo",), ("Ai",)), (("Ao",), future)],
    ]


def switch_projector(s: LabeledMatrix):
    """Maps from non-signalling channels ``A (x) B`` to channels ``past -> future``."""
    lay = switch_layout(s)
    dims = {w.label: w.dim for w in s.wires}
    p_in = non_signalling_projector([("Ai", "Ao"), ("Bi", "Bo")], dims)
    p_out = channel_projector(list(lay["past"]), list(lay["future"]), dims)
    return compose_projector(p_in, p_out, ["Ai", "Ao", "Bi", "Bo"],
                             list(lay["past"]) + list(lay["future"]))


def switch_witness(s: LabeledMatrix, solver: str = "SCS", normalisation: str = "white-noise",
                   eps: float = 1e-7, max_iters: int = 100_000) -> OptResult:
    """Witness SDP against mixtures of the two fixed-order combs.

    Variables are a free ``G`` and ``S_1, S_2 >= 0``. For each order the
    part of ``G - S_i`` inside the span of that order's comb cone must vanish,
    so ``tr(G W) >= 0`` for every comb of either order. The witness is
    ``D = P_sw[G]`` with ``P_sw`` from :func:`switch_projector`. The bound is
    either ``tr(D W_0) <= 1`` for the white-noise process
    ``W_0 = (gamma / dim) 1`` or, with ``normalisation="general"``,
    ``P_sw[G + J] = P_sw[W_0]`` with ``J >= 0``.

    Raises:
        DimensionTooLarge: if any target wire has dimension above 2.
    """
    if normalisation not in WITNESS_NORMALISATIONS:
        raise ValueError(f"normalisation must be one of {WITNESS_NORMALISATIONS}")
    lay = switch_layout(s)
    if any(w.dim > 2 for w in s.wires):
        raise DimensionTooLarge("switch_witness is limited to qubit target wires")
    labels = list(s.labels)
    dims = {w.label: w.dim for w in s.wires}
    n = s.side
    real = _is_real(s.data)
    g = HermitianVar(n, not real, psd=False, name="G")
    cons = g.constraints()
    for idx, teeth in enumerate(switch_orders(lay)):
        lp = comb_projector(teeth, dims, skip_first=True)
        si = HermitianVar(n, not real, psd=True, name=f"S{idx + 1}")
        cons += si.constraints()
        # (G - S_i) restricted to the cone span vanishes
        rows = projector_rows(lp, labels, 1)
        for eg, es in zip(lin_rows(rows, g), lin_rows(rows, si)):
            cons.append(eg - es == 0)
    p_sw = switch_projector(s)
    scale = float(p_sw.trace) / n
    if normalisation == "general":
        j = HermitianVar(n, not real, psd=True, name="J")
        cons += j.constraints()
        cons += projected_equal(p_sw, labels, [g, j], np.eye(n) * scale)
    else:
        cons.append(g.trace() * scale <= 1)
    prob = cp.Problem(cp.Minimize(g.inner(s.data.T)), cons)
    t0 = time.perf_counter()
    opts = {"eps": eps, "max_iters": max_iters} if solver == "SCS" else {}
    info = solve(prob, solver, **opts)
    elapsed = time.perf_counter() - t0
    gmat = LabeledMatrix(s.wires, g.value())
    return OptResult(info.value, project(p_sw, gmat), info.status, info.gap,
                     {"solver": info.solver, "seconds": elapsed, "dim": n, "G": gmat,
                      "normalisation": normalisation, "real_reduction": real,
                      "layout": "full" if "C" in dims else "reduced"})


# --------------------------------------------------------------------------
# GYNI seesaw
# --------------------------------------------------------------------------

GYNI_QUANTUM_BOUND = 0.7592
GYNI_LABELS = ("Ai", "Ao", "Bi", "Bo")


def _qubit_wires(labels: Sequence[str], roles: Sequence[str]) -> tuple[Wire, ...]:
    return tuple(Wire(l, 2, r) for l, r in zip(labels, roles))


def gyni_probability(w: LabeledMatrix, alice: Sequence[Sequence[LabeledMatrix]],
                     bob: Sequence[Sequence[LabeledMatrix]]) -> float:
    """``P = 1/4 sum_{x,y} W * M^{a=y|x} * N^{b=x|y}``; instruments indexed ``[x][a]``."""
    total = 0.0
    for x in range(2):
        for y in range(2):
            total += link(w, link(alice[x][y], bob[y][x])).scalar().real
    return 0.25 * total


@dataclass(frozen=True, eq=False)
class GyniResult:
    """Best seesaw outcome and the trajectory of every run."""

    result: OptResult
    process: LabeledMatrix
    alice: list
    bob: list
    histories: list[list[float]]
    skipped: int


#: tight tolerances keep the seesaw trajectory monotone to solver precision
SEESAW_TOLERANCES = {
    "CLARABEL": {"tol_gap_abs": 1e-11, "tol_gap_rel": 1e-11, "tol_feas": 1e-11},
}


class _Seesaw:
    """Three parametrised SDPs sharing compiled problem structure across iterations."""

    def __init__(self, real: bool, solver: str):
        self.real = real
        self.solver = solver
        self.opts = SEESAW_TOLERANCES.get(solver, {})
        cm = not real
        # process step
        self.w = HermitianVar(16, cm, psd=True, name="W")
        self.kw_re = cp.Parameter((16, 16))
        self.kw_im = cp.Parameter((16, 16)) if cm else None
        p = process_matrix_projector()
        cons = self.w.constraints() + in_range(p, GYNI_LABELS, self.w) + [self.w.trace() == 4]
        obj = cp.sum(cp.multiply(self.kw_re, self.w.re))
        if cm:
            obj = obj + cp.sum(cp.multiply(self.kw_im, self.w.im))
        self.prob_w = cp.Problem(cp.Maximize(obj), cons)
        # party steps share one template
        self.party = [self._party_problem(cm, "M"), self._party_problem(cm, "N")]

    def _party_problem(self, cm: bool, name: str):
        vars_ = [[HermitianVar(4, cm, psd=True, name=f"{name}{x}{a}") for a in range(2)]
                 for x in range(2)]
        params_re = [[cp.Parameter((4, 4)) for a in range(2)] for x in range(2)]
        params_im = [[cp.Parameter((4, 4)) for a in range(2)] for x in range(2)] if cm else None
        cons = []
        obj = 0
        for x in range(2):
            for a in range(2):
                v = vars_[x][a]
                cons += v.constraints()
                obj = obj + cp.sum(cp.multiply(params_re[x][a], v.re))
                if cm:
                    obj = obj + cp.sum(cp.multiply(params_im[x][a], v.im))
            re = vars_[x][0].re + vars_[x][1].re
            cons.append(cp.partial_trace(re, [2, 2], axis=1) == np.eye(2))
            if cm:
                im = vars_[x][0].im + vars_[x][1].im
                cons.append(cp.partial_trace(im, [2, 2], axis=1) == 0)
        return cp.Problem(cp.Maximize(obj), cons), vars_, params_re, params_im

    # Wire order used for the party variables is (in, out).
    def _set(self, p_re, p_im, k: np.ndarray) -> None:
        # objective sum(K * X) equals link(K, X) = sum K[u,v] X[u,v]
        p_re.value = np.real(k)
        if p_im is not None:
            # Re sum K X = sum Kr Xr - Ki Xi
            p_im.value = -np.imag(k)

    def step_w(self, alice, bob) -> LabeledMatrix:
        k = np.zeros((16, 16), dtype=complex)
        for x in range(2):
            for y in range(2):
                ab = link(alice[x][y], bob[y][x])
                k += 0.25 * permute(ab, GYNI_LABELS).data
        self._set(self.kw_re, self.kw_im, k)
        solve(self.prob_w, self.solver, **self.opts)
        wires = _qubit_wires(GYNI_LABELS, ("input", "output", "input", "output"))
        return LabeledMatrix(wires, self.w.value())

    def step_party(self, which: int, w: LabeledMatrix, other) -> list:
        prob, vars_, p_re, p_im = self.party[which]
        labs = ("Ai", "Ao") if which == 0 else ("Bi", "Bo")
        for x in range(2):
            for a in range(2):
                # Alice outcome a at input x pairs with Bob input y = a and outcome b = x
                k = permute(link(w, other[a][x]), labs).data * 0.25
                self._set(p_re[x][a], None if p_im is None else p_im[x][a], k)
        solve(prob, self.solver, **self.opts)
        wires = _qubit_wires(labs, ("input", "output"))
        return [[LabeledMatrix(wires, vars_[x][a].value()) for a in range(2)] for x in range(2)]


def random_instrument(labels: tuple[str, str], rng: np.random.Generator,
                      real: bool = True) -> list[list[LabeledMatrix]]:
    """Two-outcome instruments for each of two settings, from random isometries."""
    out = []
    wires = _qubit_wires(labels, ("input", "output"))
    for _ in range(2):
        g = rng.standard_normal((8, 2))
        if not real:
            g = g + 1j * rng.standard_normal((8, 2))
        q, _ = np.linalg.qr(g)  # isometry 2 -> 2 (out) x 2 (outcome) x 2 (env)
        ks = q.reshape(2, 2, 2, 2)  # (outcome, env, out, in)
        els = []
        for a in range(2):
            choi = np.zeros((4, 4), dtype=complex)
            for e in range(2):
                kv = ks[a, e].T.reshape(-1)  # (in, out) ordering
                choi += np.outer(kv, kv.conj())
            els.append(LabeledMatrix(wires, choi, True))
        out.append(els)
    return out


def gyni_seesaw(restarts: int = 50, seed: int = 7, max_iter: int = 200,
                tol: float = 1e-7, real: bool = True, solver: str = "CLARABEL",
                process: LabeledMatrix | None = None) -> GyniResult:
    """Alternate SDPs over the process and the two parties' instruments.

    Each run starts from random instruments, optimises ``W``, then Alice,
    then Bob, and stops when one full round improves the score by less than
    ``tol``. With ``process`` given the process is held fixed. Runs whose
    subproblem fails are skipped and counted.
    """
    if restarts < 1:
        raise OutOfDomain("restarts must be at least 1")
    rngs = spawn(make_rng(seed), restarts)
    engine = _Seesaw(real, solver)
    best = (-np.inf, None, None, None)
    histories: list[list[float]] = []
    skipped = 0
    t0 = time.perf_counter()
    for rng in rngs:
        alice = random_instrument(("Ai", "Ao"), rng, real)
        bob = random_instrument(("Bi", "Bo"), rng, real)
        hist: list[float] = []
        w = process
        try:
            prev = -np.inf
            for _ in range(max_iter):
                if process is None:
                    w = engine.step_w(alice, bob)
                    hist.append(gyni_probability(w, alice, bob))
                alice = engine.step_party(0, w, bob)
                hist.append(gyni_probability(w, alice, bob))
                bob = engine.step_party(1, w, alice)
                cur = gyni_probability(w, alice, bob)
                hist.append(cur)
                if cur - prev < tol:
                    break
                prev = cur
        except SolverFailure:
            skipped += 1
            histories.append(hist)
            continue
        histories.append(hist)
        if hist and hist[-1] > best[0]:
            best = (hist[-1], w, alice, bob)
    if best[1] is None:
        raise SolverFailure(f"all {restarts} seesaw runs failed")
    value, w, alice, bob = best
    res = OptResult(float(value), w, "near-optimal", float("nan"),
                    {"restarts": restarts, "seed": seed, "skipped": skipped,
                     "seconds": time.perf_counter() - t0,
                     "max_iterate": max(max(h) for h in histories if h)})
    return GyniResult(res, w, alice, bob, histories, skipped)

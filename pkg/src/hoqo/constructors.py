"""Builders for canonical higher-order objects.

Wire labels follow one scheme throughout: the comb emits the system into slot
``k`` on wire ``"{k}i"`` and receives it back on ``"{k}o"``. Environment and
auxiliary wires are internal and contracted away. The quantum switch uses the
labels ``P, C, Ai, Ao, Bi, Bo, F, C'``; the time flip uses
``C, Ai, Bi, Bo, Ao, C'``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .choi import (
    ChoiOperator,
    KrausSet,
    choi_of_kraus,
    choi_of_unitary,
    link,
    link_many,
)
from .errors import (
    DimensionMismatch,
    InvalidChannel,
    LabelMismatch,
    NumericalRankFailure,
)
from .rng import random_kraus, random_pure_state, random_state, random_unitary
from .objects import Comb, CombStructure, ProcessMatrixObject, Verdict, validate
from .tensor import (
    LabeledMatrix,
    LabeledVector,
    Wire,
    identity,
    partial_trace,
    permute,
)

PSEUDO_INVERSE_CUTOFF = 1e-10


def slot_in(k: int) -> str:
    return f"{k}i"


def slot_out(k: int) -> str:
    return f"{k}o"


def _state_matrix(rho: np.ndarray | LabeledMatrix) -> np.ndarray:
    return rho.data if isinstance(rho, LabeledMatrix) else np.asarray(rho, dtype=complex)


@dataclass(frozen=True, eq=False)
class SECircuit:
    """System-environment circuit: an initial joint state and joint unitaries.

    The comb it generates has ``len(unitaries) + 1`` teeth. The system is
    handed out on ``1i`` right after preparation, and after unitary ``k`` it
    is handed out on ``(k+1)i``; the slot returns it on ``ko``.
    """

    system_dim: int
    env_dim: int
    initial_state: np.ndarray
    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        d = self.system_dim * self.env_dim
        eta = _state_matrix(self.initial_state)
        if eta.shape != (d, d):
            raise DimensionMismatch(f"initial state has shape {eta.shape}, expected {(d, d)}")
        if abs(np.trace(eta) - 1) > 1e-8 or np.linalg.eigvalsh(0.5 * (eta + eta.conj().T))[0] < -1e-8:
            raise ValueError("initial_state is not a density matrix")
        us = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        for u in us:
            if u.shape != (d, d):
                raise DimensionMismatch(f"unitary has shape {u.shape}, expected {(d, d)}")
            if np.max(np.abs(u.conj().T @ u - np.eye(d))) > 1e-10:
                raise ValueError("a circuit unitary is not unitary within 1e-10")
        object.__setattr__(self, "initial_state", eta)
        object.__setattr__(self, "unitaries", us)

    @property
    def n_steps(self) -> int:
        return len(self.unitaries)

    def structure(self) -> CombStructure:
        teeth = [((), (slot_in(1),))]
        for k in range(1, self.n_steps + 1):
            teeth.append(((slot_out(k),), (slot_in(k + 1),)))
        return CombStructure(tuple(teeth))


def comb_from_circuit(c: SECircuit) -> Comb:
    """Link the initial state, the unitaries' Choi matrices and a final trace."""
    ds, de = c.system_dim, c.env_dim
    parts = [
        LabeledMatrix(
            (Wire(slot_in(1), ds, "input", 1), Wire("E0", de, "auxiliary")), c.initial_state
        )
    ]
    for k, u in enumerate(c.unitaries, start=1):
        parts.append(
            choi_of_unitary(
                u, (slot_out(k), f"E{k - 1}"), (slot_in(k + 1), f"E{k}"), (ds, de), (ds, de)
            ).mat
        )
    last = f"E{c.n_steps}"
    joint = link_many(parts)
    mat = partial_trace(joint, [last])
    return Comb(_with_comb_roles(mat), c.structure())


def _with_comb_roles(m: LabeledMatrix) -> LabeledMatrix:
    roles = {}
    for w in m.wires:
        if w.label.endswith("i"):
            roles[w.label] = "input"
        elif w.label.endswith("o"):
            roles[w.label] = "output"
    return m.with_roles(roles)


def markov_comb(channels: Sequence[ChoiOperator], initial: np.ndarray | LabeledMatrix) -> Comb:
    """Tensor product ``C_n (x) ... (x) C_1 (x) rho`` on comb wire labels.

    ``channels[k-1]`` is relabelled to act from ``ko`` to ``(k+1)i``; each
    channel must have a single input and a single output wire.

    Raises:
        DimensionMismatch: if consecutive dimensions do not chain.
    """
    rho = _state_matrix(initial)
    d_prev = rho.shape[0]
    parts = [LabeledMatrix((Wire(slot_in(1), d_prev, "input", 1),), rho)]
    teeth = [((), (slot_in(1),))]
    for k, ch in enumerate(channels, start=1):
        if len(ch.map_inputs) != 1 or len(ch.map_outputs) != 1:
            raise DimensionMismatch("markov_comb expects single-wire channels")
        i, o = ch.map_inputs[0], ch.map_outputs[0]
        if ch.mat.wire(i).dim != d_prev:
            raise DimensionMismatch(
                f"channel {k} expects input dim {ch.mat.wire(i).dim}, got {d_prev}"
            )
        m = permute(ch.mat, (o, i)).relabel({i: slot_out(k), o: slot_in(k + 1)})
        parts.append(m)
        teeth.append(((slot_out(k),), (slot_in(k + 1),)))
        d_prev = ch.mat.wire(o).dim
    mat = parts[0]
    for p in parts[1:]:
        mat = link(mat, p)
    return Comb(_with_comb_roles(mat), CombStructure(tuple(teeth)))


# --------------------------------------------------------------------------
# Dilations
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StinespringResult:
    """Minimal Stinespring isometry ``V: in -> out (x) aux``."""

    isometry: np.ndarray
    aux_dim: int
    out_dim: int
    in_dim: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """``tr_aux(V rho V^dagger)``."""
        big = self.isometry @ rho @ self.isometry.conj().T
        t = big.reshape(self.out_dim, self.aux_dim, self.out_dim, self.aux_dim)
        return np.einsum("iaja->ij", t)


def _support(a: np.ndarray, cutoff: float = PSEUDO_INVERSE_CUTOFF) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a PSD matrix above ``cutoff * lambda_max``.

    Raises:
        NumericalRankFailure: if an eigenvalue sits within a factor 10 of the
            cutoff, where the rank decision is not trustworthy.
    """
    lam, vec = np.linalg.eigh(0.5 * (a + a.conj().T))
    top = max(float(lam[-1]), 0.0)
    cut = cutoff * top
    if top > 0:
        band = (np.abs(lam) > 0.1 * cut) & (np.abs(lam) < 10.0 * cut)
        if np.any(band):
            raise NumericalRankFailure(
                f"eigenvalue {lam[band][0]:.3e} lies within 10x of the cutoff {cut:.3e}"
            )
    keep = lam > cut
    return lam[keep][::-1], vec[:, keep][:, ::-1]


def stinespring_channel(c: ChoiOperator, tol: float = 1e-8) -> StinespringResult:
    """Minimal dilation ``V = sqrt(C)^* |Phi+_{o o'}> 1_{i -> i'}``.

    The auxiliary space ``o' i'`` is compressed onto the support of ``C``, so
    its dimension equals the Choi rank.

    Raises:
        InvalidChannel: if ``c`` is not CPTP within ``tol``.
    """
    v = validate("channel", c, tol=tol)
    if not v:
        raise InvalidChannel(f"{v.condition} (magnitude {v.magnitude:.3e})")
    m = permute(c.mat, c.map_outputs + c.map_inputs).data
    d_o, d_i = c.d_out, c.d_in
    lam, vec = _support(m.conj())
    root = (vec * np.sqrt(lam)) @ vec.conj().T  # sqrt(C^*) restricted to its support
    # V[(o, (p, q)), i] = sqrt(C^*)[(p, q), (o, i)]
    t = root.reshape(d_o * d_i, d_o, d_i).transpose(1, 0, 2)  # (o, pq, i)
    compressed = np.einsum("pm,opi->omi", vec.conj(), t)
    r = vec.shape[1]
    iso = compressed.reshape(d_o * r, d_i)
    return StinespringResult(iso, r, d_o, d_i)


@dataclass(frozen=True, eq=False)
class DilationResult:
    """Sequential isometries realising a comb.

    ``isometries[0]`` maps ``o_0`` to ``i_1 (x) a_1`` and ``isometries[k]``
    maps ``a_k (x) o_k`` to ``i_{k+1} (x) a_{k+1}``; the last auxiliary space
    is traced out. ``chois[k]`` is the rank-one Choi matrix of
    ``isometries[k]`` on the comb labels plus auxiliary labels ``a1, a2, ...``.
    """

    isometries: tuple[np.ndarray, ...]
    aux_dims: tuple[int, ...]
    chois: tuple[ChoiOperator, ...]
    structure: CombStructure

    def reconstruct(self) -> LabeledMatrix:
        joint = link_many([c.mat for c in self.chois])
        return partial_trace(joint, [f"a{len(self.chois)}"])

    def isometry_defects(self) -> list[float]:
        return [
            float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1])))) for v in self.isometries
        ]


def reduced_combs(t: Comb) -> list[LabeledMatrix]:
    """``[T(1), ..., T(n)]`` with ``T(k-1) = tr_{o_{k-1} i_k} T(k) / d_{o_{k-1}}``."""
    s = t.structure
    out = [t.mat]
    cur = t.mat
    for k in range(s.n, 1, -1):
        o, i = s.teeth[k - 1]
        d_o = cur.dim_of(o) if o else 1
        cur = partial_trace(cur, list(i) + list(o)) * (1.0 / d_o)
        out.append(cur)
    return out[::-1]


def comb_dilation(t: Comb, cutoff: float = PSEUDO_INVERSE_CUTOFF) -> DilationResult:
    """Minimal sequential dilation of a comb.

    Each reduced comb ``T(k)`` is purified as ``|X_k>> = sum_m sqrt(l_m)
    |e_m>|m>_{a_k}`` over its support, so ``dim a_k = rank T(k)``. The next
    isometry solves ``|X_{k+1}>> = (M_k (x) 1)|V_{k+1}>>`` with
    ``M_k = [sqrt(l_m) e_m]``, i.e. ``V_{k+1} = M_k^+ |X_{k+1}>>``, which is
    the ratio ``sqrt(T(k+1)) (sqrt(T(k)))^{-1}`` written on the supports.

    Raises:
        NumericalRankFailure: if a rank decision is ambiguous.
    """
    s = t.structure
    wires = {w.label: w for w in t.mat.wires}
    reds = reduced_combs(t)
    order: list[str] = []
    isos: list[np.ndarray] = []
    chois: list[ChoiOperator] = []
    aux_dims: list[int] = []
    prev_m: np.ndarray | None = None
    for k in range(1, s.n + 1):
        o, i = s.teeth[k - 1]
        order_k = order + list(o) + list(i)
        red = permute(reds[k - 1], order_k)
        lam, vec = _support(red.data, cutoff)
        m_k = vec * np.sqrt(lam)
        r_k = m_k.shape[1]
        d_o = int(np.prod([wires[l].dim for l in o])) if o else 1
        d_i = int(np.prod([wires[l].dim for l in i])) if i else 1
        if prev_m is None:
            z = m_k.reshape(1, d_o, d_i, r_k)
            r_prev = 1
        else:
            y = m_k.reshape(prev_m.shape[0], d_o * d_i * r_k)
            pinv = (prev_m.conj().T) / (np.sum(np.abs(prev_m) ** 2, axis=0)[:, None])
            z = (pinv @ y).reshape(prev_m.shape[1], d_o, d_i, r_k)
            r_prev = prev_m.shape[1]
        # operator V[(i, a_k), (a_{k-1}, o)]
        v = z.transpose(2, 3, 0, 1).reshape(d_i * r_k, r_prev * d_o)
        isos.append(v)
        aux_dims.append(r_k)
        in_w = ([Wire(f"a{k - 1}", r_prev, "auxiliary")] if k > 1 else []) + [wires[l] for l in o]
        out_w = [wires[l] for l in i] + [Wire(f"a{k}", r_k, "auxiliary")]
        vec_k = LabeledVector(tuple(out_w + in_w), v.reshape(-1))
        chois.append(
            ChoiOperator(vec_k.projector(), tuple(w.label for w in in_w),
                         tuple(w.label for w in out_w))
        )
        prev_m = m_k
        order = order_k
    return DilationResult(tuple(isos), tuple(aux_dims), tuple(chois), s)


def encoder_decoder(t: Comb, cutoff: float = PSEUDO_INVERSE_CUTOFF) -> tuple[ChoiOperator, ChoiOperator]:
    """Encoder and decoder channels of a one-slot comb.

    The encoder maps ``o_0`` to ``i_1 (x) a_1`` and purifies ``T(1)``; the
    decoder maps ``a_1 (x) o_1`` to ``i_2``. Their link reproduces the comb.
    The decoder's Choi matrix equals ``(sqrt T(1))^{-1} T (sqrt T(1))^{-1}``
    once the auxiliary wire is identified with the support of ``T(1)``.
    """
    if t.structure.n != 2:
        raise LabelMismatch("encoder/decoder needs a one-slot comb (two teeth)")
    dil = comb_dilation(t, cutoff)
    enc = dil.chois[0]
    dec_full = dil.chois[1]
    dec_mat = partial_trace(dec_full.mat, ["a2"])
    dec = ChoiOperator(dec_mat, dec_full.map_inputs,
                       tuple(l for l in dec_full.map_outputs if l != "a2"))
    return enc, dec


# --------------------------------------------------------------------------
# Processes with indefinite order
# --------------------------------------------------------------------------

SWITCH_LABELS = ("P", "C", "Ai", "Ao", "Bi", "Bo", "F", "C'")
SWITCH_ROLES = ("output", "output", "input", "output", "input", "output", "input", "input")


def _switch_vector(d: int) -> np.ndarray:
    eye = np.eye(d)
    psi = np.zeros((d, 2, d, d, d, d, d, 2), dtype=complex)
    # control 0: P -> Ai, Ao -> Bi, Bo -> F
    psi[:, 0, :, :, :, :, :, 0] = np.einsum("pa,ob,qf->paobqf", eye, eye, eye)
    # control 1: P -> Bi, Bo -> Ai, Ao -> F
    psi[:, 1, :, :, :, :, :, 1] = np.einsum("pb,qa,of->paobqf", eye, eye, eye)
    return psi.reshape(-1)


def quantum_switch(d: int = 2) -> LabeledMatrix:
    """Rank-one Choi matrix of the quantum switch on target dimension ``d``.

    ``|S>> = |0>_C |Phi+>_{P Ai} |Phi+>_{Ao Bi} |Phi+>_{Bo F} |0>_C'
    + |1>_C |Phi+>_{P Bi} |Phi+>_{Bo Ai} |Phi+>_{Ao F} |1>_C'``.
    """
    if d < 2:
        raise DimensionMismatch("the switch needs d >= 2")
    dims = (d, 2, d, d, d, d, d, 2)
    wires = tuple(Wire(l, n, r) for l, n, r in zip(SWITCH_LABELS, dims, SWITCH_ROLES))
    return LabeledVector(wires, _switch_vector(d)).projector()


def classical_switch(d: int = 2) -> LabeledMatrix:
    """``tr_C'`` of the quantum switch: a control-dependent mixture of orders."""
    return partial_trace(quantum_switch(d), ["C'"])


def switch_order_process(d: int, first: str) -> LabeledMatrix:
    """Fixed-order wiring ``P -> X -> Y -> F`` with ``X = first``, no control."""
    other = "B" if first == "A" else "A"
    x_in, x_out, y_in, y_out = first + "i", first + "o", other + "i", other + "o"
    parts = [
        LabeledMatrix((Wire("P", d), Wire(x_in, d)), np.outer(np.eye(d).reshape(-1), np.eye(d).reshape(-1))),
        LabeledMatrix((Wire(x_out, d), Wire(y_in, d)), np.outer(np.eye(d).reshape(-1), np.eye(d).reshape(-1))),
        LabeledMatrix((Wire(y_out, d), Wire("F", d)), np.outer(np.eye(d).reshape(-1), np.eye(d).reshape(-1))),
    ]
    return link_many(parts)


def w_ocb() -> ProcessMatrixObject:
    """The qubit process matrix with wires ``(Ai, Ao, Bi, Bo)``::

        W = 1/4 [1 + (1 (x) sz (x) sz (x) 1 + sz (x) 1 (x) sx (x) sz) / sqrt 2]
    """
    i2 = np.eye(2)
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])

    def k4(a, b, c, e):
        return np.kron(np.kron(a, b), np.kron(c, e))

    data = 0.25 * (
        np.eye(16) + (k4(i2, sz, sz, i2) + k4(sz, i2, sx, sz)) / np.sqrt(2.0)
    )
    wires = (Wire("Ai", 2, "input"), Wire("Ao", 2, "output"),
             Wire("Bi", 2, "input"), Wire("Bo", 2, "output"))
    return ProcessMatrixObject(LabeledMatrix(wires, data, True))


TIME_FLIP_LABELS = ("C", "Ai", "Bi", "Bo", "Ao", "C'")


def time_flip_process(d: int = 2) -> LabeledMatrix:
    """Rank-one Choi matrix of the quantum time flip.

    ``|V>> = |0>_C |Phi+>_{Bi Ai} |Phi+>_{Bo Ao} |0>_C'
    + |1>_C |Phi+>_{Bi Ao} |Phi+>_{Bo Ai} |1>_C'``, on wires
    ``(C, Ai, Bi, Bo, Ao, C')``.
    """
    eye = np.eye(d)
    psi = np.zeros((2, d, d, d, d, 2), dtype=complex)
    psi[0, :, :, :, :, 0] = np.einsum("ba,qo->abqo", eye, eye)
    psi[1, :, :, :, :, 1] = np.einsum("bo,qa->abqo", eye, eye)
    dims = (2, d, d, d, d, 2)
    roles = ("input", "input", "output", "input", "output", "output")
    wires = tuple(Wire(l, n, r) for l, n, r in zip(TIME_FLIP_LABELS, dims, roles))
    return LabeledVector(wires, psi.reshape(-1)).projector()


@dataclass(frozen=True, eq=False)
class TimeFlipResult:
    """Output of :func:`time_flip` with its annotations.

    Attributes:
        choi: the resulting map, inputs ``(C, Ai)`` (or ``Ai`` once a control
            state is plugged in) and outputs ``(C', Ao)``.
        input_unital: whether the supplied channel is unital.
        verdict: channel validation of ``choi``.
        output_unital: unitality of the full map ``(C, Ai) -> (C', Ao)``.
    """

    choi: ChoiOperator
    input_unital: Verdict
    verdict: Verdict
    output_unital: Verdict


def unitality(c: ChoiOperator, tol: float = 1e-8) -> Verdict:
    """Check ``tr_in C = (d_in / d_out) 1_out``, i.e. the map sends 1 to 1."""
    red = partial_trace(c.mat, c.map_inputs)
    target = identity(red.wires) * (c.d_in / c.d_out)
    err = float(np.max(np.abs(permute(red, target.labels).data - target.data)))
    ok = err <= tol * max(1.0, c.d_in / c.d_out)
    return Verdict(ok, None if ok else "unitality: tr_in C = 1_out", err, {"unitality": err})


def time_flip(c: ChoiOperator, control: np.ndarray | None = None,
              tol: float = 1e-8) -> TimeFlipResult:
    """Apply the quantum time flip to a single-wire channel.

    The Kraus operators of the output are ``|0><0| (x) K + |1><1| (x) K^T``.
    Only unital inputs are guaranteed to give a channel; other inputs are
    processed anyway and the verdicts record what failed.
    """
    if len(c.map_inputs) != 1 or len(c.map_outputs) != 1:
        raise LabelMismatch("time_flip expects a single-wire channel")
    d = c.mat.wire(c.map_inputs[0]).dim
    if c.mat.wire(c.map_outputs[0]).dim != d:
        raise DimensionMismatch("time_flip needs equal input and output dimension")
    cb = c.mat.relabel({c.map_inputs[0]: "Bi", c.map_outputs[0]: "Bo"})
    full = ChoiOperator(link(cb, time_flip_process(d)), ("C", "Ai"), ("C'", "Ao"))
    input_unital = unitality(c, tol)
    output_unital = unitality(full, tol)
    out = full
    if control is not None:
        ctrl = LabeledMatrix((Wire("C", 2, "output"),), np.asarray(control, dtype=complex))
        out = ChoiOperator(link(ctrl, full.mat), ("Ai",), ("C'", "Ao"))
    return TimeFlipResult(out, input_unital, validate("channel", out, tol=tol), output_unital)


# --------------------------------------------------------------------------
# Out-of-time-order tensor
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OTOT:
    """Out-of-time-order tensor and the data it was built from.

    The comb has teeth ``[(-, 1i), (1o, 2i), (2o, 3i)]``: slot 1 acts right
    after preparation, slot 2 (the perturbation) after forward evolution by
    ``U``, and slot 3 receives the system after backward evolution by
    ``U^dagger``; the environment is discarded at the end.
    """

    comb: Comb
    eta: np.ndarray
    system_dim: int
    env_dim: int
    maximally_mixed: bool


def otot(u_t: np.ndarray, eta: np.ndarray, system_dim: int, env_dim: int) -> OTOT:
    """``T = 1_{E3} * U^dagger(2o E2 -> 3i E3) * U(1o E1 -> 2i E2) * eta(1i E1)``."""
    ds, de = system_dim, env_dim
    d = ds * de
    u = np.asarray(u_t, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    if u.shape != (d, d) or eta.shape != (d, d):
        raise DimensionMismatch(f"expected {d}x{d} unitary and state")
    parts = [
        LabeledMatrix((Wire("1i", ds, "input"), Wire("E1", de)), eta),
        choi_of_unitary(u, ("1o", "E1"), ("2i", "E2"), (ds, de), (ds, de)).mat,
        choi_of_unitary(u.conj().T, ("2o", "E2"), ("3i", "E3"), (ds, de), (ds, de)).mat,
    ]
    mat = partial_trace(link_many(parts), ["E3"])
    structure = CombStructure(((( ), ("1i",)), (("1o",), ("2i",)), (("2o",), ("3i",))))
    mixed = bool(np.max(np.abs(eta - np.eye(d) / d)) <= 1e-10)
    return OTOT(Comb(_with_comb_roles(mat), structure), eta, ds, de, mixed)


def stern_gerlach_comb() -> Comb:
    """Qubit prepared in ``|+>`` followed by two identity channels (three slots)."""
    plus = np.full((2, 2), 0.5)
    ident = choi_of_kraus(KrausSet((np.eye(2),), "x", "y"))
    return markov_comb([ident, ident], plus)


# --------------------------------------------------------------------------
# Random instances
# --------------------------------------------------------------------------


def random_se_circuit(n_steps: int, system_dim: int, env_dim: int,
                      rng: np.random.Generator, pure: bool = False) -> SECircuit:
    """Haar-random joint unitaries and a random initial state (pure on request)."""
    d = system_dim * env_dim
    eta = random_pure_state(d, rng) if pure else random_state(d, rng)
    us = tuple(random_unitary(d, rng) for _ in range(n_steps))
    return SECircuit(system_dim, env_dim, eta, us)


def random_markov_comb(n_steps: int, d: int, rng: np.random.Generator) -> Comb:
    """Random state followed by ``n_steps`` independent random channels."""
    chans = [choi_of_kraus(KrausSet(tuple(random_kraus(d, d, rng)), "x", "y"))
             for _ in range(n_steps)]
    return markov_comb(chans, random_state(d, rng))


def random_ordered_process(rng: np.random.Generator, first: str = "A", d: int = 2,
                           env_dim: int = 2) -> ProcessMatrixObject:
    """Causally ordered bipartite process: a random state into the first party,
    a random channel with memory from its output to the second party's input,
    and the second party's output discarded."""
    if first not in ("A", "B"):
        raise ValueError("first must be 'A' or 'B'")
    other = "B" if first == "A" else "A"
    rho = LabeledMatrix((Wire(first + "i", d, "input"), Wire("E", env_dim)),
                        random_state(d * env_dim, rng))
    ks = random_kraus(d * env_dim, d, rng)
    chan = choi_of_kraus(KrausSet(tuple(ks), (first + "o", "E"), other + "i",
                                  (d, env_dim), (d,))).mat
    w = link(rho, chan)
    w = link(w, identity([Wire(other + "o", d, "output")]))
    roles = {first + "i": "input", first + "o": "output", other + "i": "input"}
    w = permute(w.with_roles(roles), ("Ai", "Ao", "Bi", "Bo"))
    return ProcessMatrixObject(w)

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from hoqo.analysis import (
    PartitionFMH,
    causal_break_tester,
    classicality_check,
    identity_slot_choi,
    loe,
    markov_order_check,
    markov_reference,
    markov_test,
    nonmarkovianity,
    otoc,
    qde,
    relative_entropy,
    sequential_probabilities,
    temporal_entanglement,
    tooth_marginals,
    von_neumann_entropy,
)
from hoqo.choi import KrausSet, choi_of_kraus, choi_of_unitary, compose
from hoqo.constructors import (
    SECircuit,
    comb_from_circuit,
    markov_comb,
    otot,
    random_markov_comb,
    random_se_circuit,
    stern_gerlach_comb,
)
from hoqo.errors import ConventionViolation, DimensionTooLarge, LabelMismatch, OddPartition
from hoqo.objects import Comb, CombStructure, validate
from hoqo.rng import make_rng, random_state, random_unitary
from hoqo.tensor import identity, kron, operator, permute

seeds = st.integers(0, 2**32 - 1)

SWAP = np.eye(4)[[0, 2, 1, 3]]
CNOT_SE = np.eye(4)[[0, 1, 3, 2]]  # control S (first factor), target E
CNOT_ES = np.eye(4)[[0, 3, 2, 1]]  # control E, target S
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])
H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)


def _swap_comb(rho_s, rho_e):
    return comb_from_circuit(SECircuit(2, 2, np.kron(rho_s, rho_e), (SWAP, SWAP)))


def _oracle_relative_entropy(rho, sigma):
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > 1e-14]
    log_sigma = scipy.linalg.logm(sigma) / np.log(2)
    return float(np.sum(lam * np.log2(lam)) - np.trace(rho @ log_sigma).real)


def _oracle_nonmarkovianity(t):
    """Marginals by explicit reshapes on the (1i, 1o, 2i, 2o, 3i) order."""
    m = permute(t.mat, ["1i", "1o", "2i", "2o", "3i"]).data
    m = m / np.trace(m).real
    ten = m.reshape([2] * 10)
    r1 = np.einsum("abcdeAbcde->aA", ten)
    r2 = np.einsum("abcdeaBCde->bcBC", ten).reshape(4, 4)
    r3 = np.einsum("abcdeabcDE->deDE", ten).reshape(4, 4)
    return _oracle_relative_entropy(m, np.kron(np.kron(r1, r2), r3))


def _tensor_combs(a, b):
    b = b.relabel({l: l + "'" for l in b.mat.labels})
    teeth = tuple((oa + ob, ia + ib) for (oa, ia), (ob, ib) in
                  zip(a.structure.teeth, b.structure.teeth))
    return Comb(kron(a.mat, b.mat), CombStructure(teeth))


def test_entropies_of_simple_states():
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0)
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0)
    rho = np.diag([0.5, 0.5])
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert relative_entropy(rho, np.diag([1.0, 0.0])) == float("inf")
    assert relative_entropy(np.diag([1.0, 0.0]), rho) == pytest.approx(1.0)


def test_relative_entropy_matches_logm_oracle(rng):
    rho, sigma = random_state(3, rng), random_state(3, rng)
    assert relative_entropy(rho, sigma) == pytest.approx(_oracle_relative_entropy(rho, sigma),
                                                         abs=1e-10)


def test_markov_comb_has_zero_nonmarkovianity(rng):
    t = random_markov_comb(3, 2, rng)
    res = markov_test(t)
    assert res.verdict
    assert res.distance == pytest.approx(0.0, abs=1e-9)


def test_markov_reference_is_a_valid_comb(rng):
    t = comb_from_circuit(random_se_circuit(2, 2, 2, rng))
    ref = markov_reference(t)
    assert validate("comb", ref)
    assert markov_test(ref).distance == pytest.approx(0.0, abs=1e-9)
    assert all(m.trace().real == pytest.approx(1.0) for m in tooth_marginals(t))


def test_swap_memory_comb_matches_oracle(rng):
    t = _swap_comb(random_state(2, rng), random_state(2, rng))
    value = nonmarkovianity(t)
    assert value == pytest.approx(_oracle_nonmarkovianity(t), abs=1e-6)
    # a perfect qubit memory line carries two bits of total correlation
    assert value == pytest.approx(2.0, abs=1e-9)
    assert not markov_test(t).verdict


def test_generic_circuit_is_non_markovian_within_bounds(rng):
    t = comb_from_circuit(random_se_circuit(2, 2, 2, rng))
    value = nonmarkovianity(t)
    assert 1e-6 < value
    assert value == pytest.approx(_oracle_nonmarkovianity(t), abs=1e-6)


@settings(max_examples=10)
@given(seeds)
def test_nonmarkovianity_is_additive_under_tensoring(seed):
    rng = make_rng(seed)
    a = comb_from_circuit(random_se_circuit(1, 2, 2, rng))
    b = comb_from_circuit(random_se_circuit(1, 2, 2, rng))
    both = _tensor_combs(a, b)
    assert nonmarkovianity(both) == pytest.approx(nonmarkovianity(a) + nonmarkovianity(b),
                                                  abs=1e-8)


@settings(max_examples=10)
@given(seeds)
def test_scalar_diagnostics_ignore_wire_names(seed):
    rng = make_rng(seed)
    t = comb_from_circuit(random_se_circuit(1, 2, 2, rng))
    r = t.relabel({"1i": "first", "1o": "back", "2i": "last"})
    assert nonmarkovianity(r) == pytest.approx(nonmarkovianity(t), abs=1e-10)
    assert qde(r) == pytest.approx(qde(t), abs=1e-10)
    assert temporal_entanglement(r) == pytest.approx(temporal_entanglement(t), abs=1e-10)


def test_markov_order_passes_for_markov_comb(rng):
    t = random_markov_comb(2, 2, rng)
    part = PartitionFMH(future=(3,), memory=(2,), history=(1,))
    res = markov_order_check(t, causal_break_tester(t, [2]), part)
    assert res.verdict
    # elements are ordered (x, r) with the prepared state r varying fastest;
    # for each fixed preparation the measurement outcomes exhaust probability one
    for r in range(2):
        total = sum(w for k, w in res.weights.items() if k % 2 == r)
        assert total == pytest.approx(1.0, abs=1e-12)


def test_markov_order_fails_when_environment_remembers(rng):
    # the environment keeps a copy of the first output and later writes it back
    u1 = CNOT_ES @ CNOT_SE
    eta = np.kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
    t = comb_from_circuit(SECircuit(2, 2, eta, (u1, CNOT_ES)))
    part = PartitionFMH(future=(3,), memory=(2,), history=(1,))
    res = markov_order_check(t, causal_break_tester(t, [2]), part)
    assert not res.verdict
    assert res.verdict.magnitude > 0.1


def test_partition_must_be_contiguous():
    with pytest.raises(LabelMismatch):
        PartitionFMH(future=(1,), memory=(2,), history=(3,)).check(3)
    with pytest.raises(LabelMismatch):
        PartitionFMH(future=(3,), memory=(), history=(1,)).check(3)


def test_stern_gerlach_sequence_breaks_kolmogorov_consistency():
    t = stern_gerlach_comb()
    basis = [np.eye(2), H, np.eye(2)]
    probs = sequential_probabilities(t, basis)
    assert len(probs) == 8
    for p in probs.values():
        assert p == pytest.approx(0.125, abs=1e-10)
    skipped = sequential_probabilities(t, basis, identity_slots=(2,))
    assert skipped[(1, 1)] == pytest.approx(0.5, abs=1e-10)
    assert probs[(1, 0, 1)] + probs[(1, 1, 1)] == pytest.approx(0.25, abs=1e-10)
    res = classicality_check(t, basis)
    assert not res.verdict
    # with slot 1 untouched the |+> state reaches slot 2 intact: 1 versus 1/2
    assert res.max_discrepancy == pytest.approx(0.5, abs=1e-10)
    assert res.worst["subset"] == (1, 3)
    assert res.verdict.details["(2,)"] == pytest.approx(0.25, abs=1e-10)


def test_dephasing_combs_are_classical(rng):
    deph = choi_of_kraus(KrausSet((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), "x", "y"))
    flip = choi_of_kraus(KrausSet((np.sqrt(0.3) * X, np.sqrt(0.7) * np.eye(2)), "x", "y"))
    noisy = compose(flip.relabel({"y": "m"}), deph.relabel({"x": "m"}))
    t = markov_comb([noisy, deph, noisy], np.diag([0.2, 0.8]))
    res = classicality_check(t)
    assert res.verdict
    assert res.max_discrepancy < 1e-12


def test_classicality_refuses_large_combs(rng):
    t = random_markov_comb(6, 2, rng)
    with pytest.raises(DimensionTooLarge):
        classicality_check(t)


def _pauli_channel(p, i, o):
    return choi_of_unitary(p, i, o).mat


def _otoc_oracle(u, eta, p, v, m):
    """Propagate the 4x4 joint state by hand."""
    one = np.eye(2)
    rho = np.kron(p, one) @ eta @ np.kron(p, one).conj().T
    rho = u @ rho @ u.conj().T
    rho = np.kron(v, one) @ rho @ np.kron(v, one).conj().T
    rho = u.conj().T @ rho @ u
    rho_s = np.einsum("aebe->ab", rho.reshape(2, 2, 2, 2))
    return float(np.trace(m @ rho_s).real)


@pytest.mark.parametrize("u", [SWAP, CNOT_SE @ np.kron(H, np.eye(2))], ids=["swap", "cnot-h"])
def test_otoc_matches_hand_propagation(u):
    eta = np.kron(np.diag([0.75, 0.25]), np.full((2, 2), 0.5))
    o = otot(u, eta, 2, 2)
    m_eff = operator(Z.T, ["3i"], [2])
    val = otoc(o, m_eff, _pauli_channel(X, "2i", "2o"), _pauli_channel(Z, "1i", "1o"))
    assert val == pytest.approx(_otoc_oracle(u, eta, Z, X, Z), abs=1e-12)


@given(seeds)
def test_otoc_conserves_probability(seed):
    rng = make_rng(seed)
    o = otot(random_unitary(4, rng), random_state(4, rng), 2, 2)
    val = otoc(o, identity([o.comb.mat.wire("3i")]),
               choi_of_unitary(random_unitary(2, rng), "2i", "2o").mat,
               choi_of_unitary(random_unitary(2, rng), "1i", "1o").mat)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_otoc_rejects_misplaced_operators(rng):
    o = otot(random_unitary(4, rng), np.eye(4) / 4, 2, 2)
    one = identity([o.comb.mat.wire("3i")])
    with pytest.raises(LabelMismatch):
        otoc(o, one, identity_slot_choi("1i", "1o", 2), identity_slot_choi("2i", "2o", 2))


def test_loe_vanishes_for_identity_perturbation_and_needs_mixed_state(rng):
    o = otot(random_unitary(4, rng), np.eye(4) / 4, 2, 2)
    assert loe(o, identity_slot_choi("2i", "2o", 2)) == 0.0
    assert loe(o, _pauli_channel(X, "2i", "2o")) >= -1e-12
    o_pure = otot(random_unitary(4, rng), random_state(4, rng), 2, 2)
    with pytest.raises(ConventionViolation):
        loe(o_pure, identity_slot_choi("2i", "2o", 2))


def test_qde_of_unitary_identity_sequence_and_maximally_noisy_comb():
    t = stern_gerlach_comb()
    # pure state then identity lines: the normalised comb is pure
    assert qde(t) == pytest.approx(0.0, abs=1e-12)
    structure = CombStructure((((), ("1i",)), (("1o",), ("2i",))))
    mixed = Comb(identity([w for w in t.mat.wires if w.label in ("1i", "1o", "2i")]) * 0.5,
                 structure)
    assert qde(mixed) == pytest.approx(1.5)


def test_temporal_entanglement_of_memory_line(rng):
    eta = np.kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
    # three swaps carry 1o through the environment to 3i, across the half-way cut
    t = comb_from_circuit(SECircuit(2, 2, eta, (SWAP, SWAP, SWAP)))
    assert temporal_entanglement(t) == pytest.approx(2.0, abs=1e-10)
    # with identities every system line stays inside one half
    t = comb_from_circuit(SECircuit(2, 2, eta, (np.eye(4),) * 3))
    assert temporal_entanglement(t) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(OddPartition):
        temporal_entanglement(stern_gerlach_comb())


def test_causal_break_tester_sums_to_discard_prepare(rng):
    t = random_markov_comb(2, 2, rng)
    els = causal_break_tester(t, [1, 2])
    assert len(els) == 16
    probs = [np.real(np.sum(permute(e, t.mat.labels).data * t.mat.data))
             for e in (kron(e, identity([t.mat.wire("3i")])) for e in els)]
    assert sum(probs) == pytest.approx(4.0, abs=1e-10)


def test_operator_insertion_gives_textbook_correlator():
    # slot 1 holds rho -> Z rho, so the value is tr(Z X(t) Z X(t)) / 2 on the system
    z_left = operator(np.outer(Z.reshape(-1), np.eye(2).reshape(-1)), ["1o", "1i"], [2, 2])
    m = operator(Z.T, ["3i"], [2])
    v = _pauli_channel(X, "2i", "2o")
    assert otoc(otot(np.eye(4), np.eye(4) / 4, 2, 2), m, v, z_left) == pytest.approx(-1.0)
    assert otoc(otot(SWAP, np.eye(4) / 4, 2, 2), m, v, z_left) == pytest.approx(1.0)

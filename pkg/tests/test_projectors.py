from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hoqo.choi import KrausSet, choi_of_kraus
from hoqo.errors import IncompatibleLabels
from hoqo.projectors import (
    channel_projector,
    comb_projector,
    compose_projector,
    identity_projector,
    non_signalling_projector,
    process_matrix_projector,
    project,
    random_check_projector,
    tr_rep,
    trace_replace,
    unital_projector,
)
from hoqo.rng import make_rng, random_hermitian, random_kraus, random_unital_kraus
from hoqo.tensor import LabeledMatrix, Wire, identity, operator, partial_trace

seeds = st.integers(0, 2**32 - 1)
QUBITS = {l: 2 for l in ("Ai", "Ao", "Bi", "Bo", "P", "F", "x", "y", "z")}


def _wires(labels, dims):
    return [Wire(l, dims[l]) for l in labels]


def _projector_zoo():
    d = {"a": 2, "b": 3, "c": 2, "e": 2}
    yield channel_projector(["a"], ["b"], d), ["a", "b"], d
    yield unital_projector(["a"], ["c"], d), ["a", "c"], d
    yield comb_projector([((), ("a",)), (("b",), ("c",))], d), ["a", "b", "c"], d
    yield process_matrix_projector(dims=QUBITS), ["Ai", "Ao", "Bi", "Bo"], QUBITS
    yield (non_signalling_projector([("a", "b"), ("c", "e")], d), ["a", "b", "c", "e"], d)
    p_in = channel_projector(["a"], ["c"], d)
    p_out = channel_projector(["b"], ["e"], d)
    yield compose_projector(p_in, p_out, ["a", "c"], ["b", "e"]), ["a", "b", "c", "e"], d


@pytest.mark.parametrize("case", list(_projector_zoo()), ids=lambda c: c[0].name)
def test_projector_axioms_on_random_inputs(case, rng):
    p, labels, dims = case
    res = random_check_projector(p, _wires(labels, dims), rng)
    for name, val in res.items():
        assert val < 1e-12, name


@pytest.mark.parametrize("case", list(_projector_zoo()), ids=lambda c: c[0].name)
def test_symbolic_idempotence(case):
    p = case[0]
    assert (p @ p).equals(p)


def test_trace_replace_definition(rng):
    x = operator(random_hermitian(6, rng), ["a", "b"], [2, 3])
    y = trace_replace(x, ["b"])
    expected = np.kron(partial_trace(x, ["b"]).data, np.eye(3) / 3)
    np.testing.assert_allclose(y.data, expected, atol=1e-14)


def test_trace_replace_composes_by_union():
    d = {"a": 2, "b": 2, "c": 2}
    assert (tr_rep(["a"], d) @ tr_rep(["b"], d)).equals(tr_rep(["a", "b"], d))
    assert (identity_projector(d) @ tr_rep(["c"], d)).equals(tr_rep(["c"], d))


def test_channel_projector_fixes_channels_and_trace_constant(rng):
    c = choi_of_kraus(KrausSet(tuple(random_kraus(2, 3, rng)), "x", "y"))
    p = channel_projector(["x"], ["y"], {"x": 2, "y": 3})
    np.testing.assert_allclose(project(p, c.mat).data, c.mat.data, atol=1e-13)
    assert p.trace == 2


def test_unital_projector_separates_unital_from_generic(rng):
    d = {"x": 2, "y": 2}
    p = unital_projector(["x"], ["y"], d)
    unital = choi_of_kraus(KrausSet(tuple(random_unital_kraus(2, rng)), "x", "y"))
    np.testing.assert_allclose(project(p, unital.mat).data, unital.mat.data, atol=1e-13)
    generic = choi_of_kraus(KrausSet(tuple(random_kraus(2, 2, rng)), "x", "y"))
    assert np.max(np.abs(project(p, generic.mat).data - generic.mat.data)) > 1e-3


def test_process_matrix_projector_has_seven_terms_and_trace():
    p = process_matrix_projector(dims=QUBITS)
    assert len(p.terms) == 7
    assert p.trace == 4


def test_eigenvalue_counts_terms_inside_trivial_set():
    d = {"x": 2, "y": 2}
    p = channel_projector(["x"], ["y"], d)
    assert p.eigenvalue([]) == 1
    assert p.eigenvalue(["y"]) == 0
    assert p.eigenvalue(["x"]) == 1
    assert p.eigenvalue(["x", "y"]) == 1


def test_compose_projector_with_scalar_input_reduces_to_output():
    d = {"x": 2, "y": 2}
    p_out = channel_projector(["x"], ["y"], d)
    q = compose_projector(identity_projector({}).with_trace(Fraction(1)), p_out, [], ["x", "y"])
    assert q.equals(p_out)
    assert q.trace == p_out.trace


def test_compose_projector_trace_constant_for_superchannels():
    d = {"a": 2, "b": 2, "c": 3, "e": 3}
    q = compose_projector(channel_projector(["a"], ["b"], d), channel_projector(["c"], ["e"], d),
                          ["a", "b"], ["c", "e"])
    # (gamma_out / gamma_in) * d_in = (3 / 2) * 4
    assert q.trace == 6


def test_compose_projector_rejects_overlap():
    d = {"a": 2, "b": 2}
    p = channel_projector(["a"], ["b"], d)
    with pytest.raises(IncompatibleLabels):
        compose_projector(p, p, ["a", "b"], ["a", "b"])
    with pytest.raises(IncompatibleLabels):
        compose_projector(p, channel_projector(["a"], ["b"], d), ["a"], ["b"])


def test_comb_projector_with_two_teeth_matches_channel_projector():
    d = {"x": 2, "y": 3}
    assert comb_projector([(("x",), ("y",))], d).equals(channel_projector(["x"], ["y"], d))


@given(seeds)
def test_projector_annihilates_its_complement(seed):
    rng = make_rng(seed)
    d = {"a": 2, "b": 2, "c": 2}
    p = comb_projector([((), ("a",)), (("b",), ("c",))], d)
    q = identity_projector(d) - p
    x = LabeledMatrix(tuple(Wire(l, 2) for l in "abc"), random_hermitian(8, rng))
    np.testing.assert_allclose(project(p, project(q, x)).data, 0, atol=1e-12)


@given(seeds)
def test_projector_preserves_identity_trace_line(seed):
    rng = make_rng(seed)
    p = process_matrix_projector(dims=QUBITS)
    ws = [Wire(l, 2) for l in ("Ai", "Ao", "Bi", "Bo")]
    x = LabeledMatrix(tuple(ws), random_hermitian(16, rng))
    px = project(p, x)
    # P[X] differs from X only by traceless parts: the trace is untouched
    np.testing.assert_allclose(px.trace(), x.trace(), atol=1e-11)
    np.testing.assert_allclose(project(p, identity(ws)).data, np.eye(16), atol=1e-14)

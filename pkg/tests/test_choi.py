import numpy as np
import pytest
from hypothesis import given, strategies as st

from hoqo.choi import (
    KrausSet,
    apply_choi,
    choi_of_kraus,
    choi_of_unitary,
    compose,
    effect,
    identity_channel,
    link,
    link_many,
    state,
)
from hoqo.errors import DimensionMismatch, LabelMismatch, TripleLabel
from hoqo.rng import make_rng, random_hermitian, random_kraus, random_state, random_unitary
from hoqo.tensor import check_psd, operator, partial_trace, permute

seeds = st.integers(0, 2**32 - 1)


def _channel(d_in, d_out, rng, i="x", o="y"):
    return choi_of_kraus(KrausSet(tuple(random_kraus(d_in, d_out, rng)), i, o))


def test_link_on_disjoint_wires_is_the_tensor_product(rng):
    a = operator(random_hermitian(2, rng), ["a"], [2])
    b = operator(random_hermitian(3, rng), ["b"], [3])
    np.testing.assert_allclose(link(a, b).data, np.kron(a.data, b.data))


def test_link_on_identical_wires_is_trace_of_transpose_product(rng):
    a = operator(random_hermitian(4, rng), ["a", "b"], [2, 2])
    b = operator(random_hermitian(4, rng), ["b", "a"], [2, 2])
    expected = np.trace(a.data.T @ permute(b, ["a", "b"]).data)
    np.testing.assert_allclose(link(a, b).scalar(), expected)


def test_choi_action_agrees_with_kraus_action(rng):
    ks = KrausSet(tuple(random_kraus(3, 2, rng)), "x", "y")
    rho = random_state(3, rng)
    out = apply_choi(choi_of_kraus(ks), state(rho, "x"))
    np.testing.assert_allclose(out.data, ks.apply(rho), atol=1e-13)


def test_unitary_choi_is_rank_one_vec(rng):
    u = random_unitary(2, rng)
    c = choi_of_unitary(u, "x", "y")
    v = u.reshape(-1)
    np.testing.assert_allclose(c.mat.data, np.outer(v, v.conj()))
    assert c.mat.labels == ("y", "x")


def test_identity_channel_traces_to_identity():
    c = identity_channel("x", "y", 3)
    np.testing.assert_allclose(partial_trace(c.mat, ["y"]).data, np.eye(3))


def test_effect_gives_born_rule(rng):
    rho = random_state(2, rng)
    e = np.array([[0.7, 0.1j], [-0.1j, 0.2]])
    p = link(state(rho, "x"), effect(e, "x")).scalar()
    np.testing.assert_allclose(p, np.trace(e @ rho))


def test_compose_matches_kraus_composition(rng):
    k1 = KrausSet(tuple(random_kraus(2, 3, rng)), "x", "m")
    k2 = KrausSet(tuple(random_kraus(3, 2, rng)), "m", "y")
    c = compose(choi_of_kraus(k1), choi_of_kraus(k2))
    assert c.map_inputs == ("x",) and c.map_outputs == ("y",)
    rho = random_state(2, rng)
    np.testing.assert_allclose(apply_choi(c, state(rho, "x")).data, k2.apply(k1.apply(rho)),
                               atol=1e-13)


def test_link_errors(rng):
    a = operator(np.eye(2), ["a"], [2])
    b = operator(np.eye(3), ["a"], [3])
    with pytest.raises(DimensionMismatch):
        link(a, b)
    with pytest.raises(TripleLabel):
        link_many([a, a, a])
    c = identity_channel("x", "y", 2)
    with pytest.raises(LabelMismatch):
        apply_choi(c, state(np.eye(2) / 2, "z"))


def test_kraus_set_checks(rng):
    ks = KrausSet(tuple(random_kraus(2, 2, rng)), "x", "y")
    assert ks.is_trace_preserving() and ks.is_trace_nonincreasing()
    half = KrausSet(tuple(k * 0.5 for k in ks.kraus), "x", "y")
    assert not half.is_trace_preserving() and half.is_trace_nonincreasing()
    with pytest.raises(DimensionMismatch):
        KrausSet((), "x", "y")


@given(seeds)
def test_link_product_is_associative(seed):
    rng = make_rng(seed)
    a = operator(random_hermitian(4, rng), ["p", "q"], [2, 2])
    b = operator(random_hermitian(4, rng), ["q", "r"], [2, 2])
    c = operator(random_hermitian(4, rng), ["r", "s"], [2, 2])
    left = link(link(a, b), c)
    right = link(a, link(b, c))
    np.testing.assert_allclose(left.data, permute(right, left.labels).data, atol=1e-12)


@given(seeds)
def test_link_product_is_commutative(seed):
    rng = make_rng(seed)
    a = operator(random_hermitian(4, rng), ["p", "q"], [2, 2])
    b = operator(random_hermitian(6, rng), ["q", "r"], [2, 3])
    ab, ba = link(a, b), link(b, a)
    np.testing.assert_allclose(ab.data, permute(ba, ab.labels).data, atol=1e-12)


@given(seeds)
def test_link_of_psd_operators_is_psd(seed):
    rng = make_rng(seed)
    a = operator(random_state(4, rng), ["p", "q"], [2, 2])
    b = operator(random_state(4, rng), ["q", "r"], [2, 2])
    assert check_psd(link(a, b), tol=1e-12)


@given(seeds)
def test_composed_channels_stay_trace_preserving(seed):
    rng = make_rng(seed)
    c = compose(_channel(2, 3, rng, "x", "m"), _channel(3, 2, rng, "m", "y"))
    np.testing.assert_allclose(partial_trace(c.mat, ["y"]).data, np.eye(2), atol=1e-12)

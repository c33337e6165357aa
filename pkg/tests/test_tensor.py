import numpy as np
import pytest
from hypothesis import given, strategies as st

from hoqo.errors import BadDimension, DuplicateLabel, UnknownLabel
from hoqo.rng import make_rng, random_hermitian, random_state
from hoqo.tensor import (
    LabeledMatrix,
    Wire,
    check_psd,
    identity,
    kron,
    max_entangled,
    operator,
    partial_trace,
    partial_transpose,
    permute,
    sort_wires,
    sqrtm_psd,
    unvectorize,
    vectorize,
)


def _random_labeled(dims, rng, labels=None):
    labels = labels or [f"w{k}" for k in range(len(dims))]
    side = int(np.prod(dims))
    return operator(random_hermitian(side, rng), labels, dims, hermitian=True)


def test_row_major_ordering_matches_numpy_kron(rng):
    a = operator(random_hermitian(2, rng), ["a"], [2])
    b = operator(random_hermitian(3, rng), ["b"], [3])
    ab = kron(a, b)
    np.testing.assert_allclose(ab.data, np.kron(a.data, b.data))
    assert ab.labels == ("a", "b")


def test_partial_trace_of_product_recovers_factor(rng):
    rho = random_state(2, rng)
    sigma = random_state(3, rng)
    x = kron(operator(rho, ["a"], [2]), operator(sigma, ["b"], [3]))
    np.testing.assert_allclose(partial_trace(x, ["b"]).data, rho, atol=1e-14)
    np.testing.assert_allclose(partial_trace(x, ["a"]).data, sigma, atol=1e-14)


def test_partial_trace_of_everything_is_the_trace(rng):
    x = _random_labeled([2, 3, 2], rng)
    full = partial_trace(x, x.labels)
    assert full.labels == ()
    np.testing.assert_allclose(full.scalar(), np.trace(x.data))


def test_permute_round_trip_and_kron_swap(rng):
    a = operator(random_hermitian(2, rng), ["a"], [2])
    b = operator(random_hermitian(3, rng), ["b"], [3])
    swapped = permute(kron(a, b), ["b", "a"])
    np.testing.assert_allclose(swapped.data, np.kron(b.data, a.data), atol=1e-14)
    x = _random_labeled([2, 3, 4], rng)
    back = permute(permute(x, ["w2", "w0", "w1"]), x.labels)
    np.testing.assert_array_equal(back.data, x.data)


def test_partial_transpose_is_an_involution_and_full_transpose(rng):
    x = _random_labeled([2, 2, 3], rng)
    once = partial_transpose(x, ["w1"])
    np.testing.assert_allclose(partial_transpose(once, ["w1"]).data, x.data)
    np.testing.assert_allclose(partial_transpose(x, x.labels).data, x.data.T)


def test_max_entangled_is_d_times_a_projector():
    phi = max_entangled("a", "b", 3)
    np.testing.assert_allclose(phi.data @ phi.data, 3 * phi.data)
    np.testing.assert_allclose(partial_trace(phi, ["b"]).data, np.eye(3))


def test_vectorize_is_row_major_reshape(rng):
    k = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    v = vectorize(k, "in", "out")
    assert v.labels == ("out", "in")
    np.testing.assert_array_equal(v.data, k.reshape(-1))
    np.testing.assert_array_equal(unvectorize(v, "in", "out"), k)


def test_vectorize_matches_action_on_maximally_entangled_vector(rng):
    k = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    phi = np.eye(2).reshape(-1)
    np.testing.assert_allclose(np.kron(k, np.eye(2)) @ phi, vectorize(k, "i", "o").data)


def test_construction_errors():
    with pytest.raises(DuplicateLabel):
        LabeledMatrix((Wire("a", 2), Wire("a", 2)), np.eye(4))
    with pytest.raises(BadDimension):
        LabeledMatrix((Wire("a", 2),), np.eye(3))
    with pytest.raises(BadDimension):
        Wire("a", 0)
    with pytest.raises(ValueError):
        LabeledMatrix((Wire("a", 2),), np.array([[0, 1], [0, 0]]), hermitian_hint=True)
    x = identity([Wire("a", 2)])
    with pytest.raises(UnknownLabel):
        partial_trace(x, ["b"])
    with pytest.raises(DuplicateLabel):
        kron(x, x)


def test_check_psd_reports_eigenvalue_and_hermiticity():
    rep = check_psd(np.diag([1.0, -0.5]))
    assert not rep and rep.min_eigenvalue == pytest.approx(-0.5)
    rep = check_psd(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert not rep.is_psd and rep.hermitian_deviation == pytest.approx(1.0)
    assert check_psd(np.eye(3))


def test_sqrtm_psd_squares_back(rng):
    rho = random_state(4, rng)
    r = sqrtm_psd(rho)
    np.testing.assert_allclose(r @ r, rho, atol=1e-12)


def test_data_is_read_only(rng):
    x = _random_labeled([2], rng)
    with pytest.raises(ValueError):
        x.data[0, 0] = 1.0


@given(st.lists(st.integers(1, 3), min_size=1, max_size=4), st.integers(0, 2**32 - 1))
def test_partial_traces_commute(dims, seed):
    x = _random_labeled(dims, make_rng(seed))
    labels = list(x.labels)
    a, b = labels[0], labels[-1]
    one = partial_trace(partial_trace(x, [a]), [b]) if a != b else partial_trace(x, [a])
    two = partial_trace(partial_trace(x, [b]), [a]) if a != b else partial_trace(x, [a])
    np.testing.assert_allclose(one.data, two.data, atol=1e-12)
    np.testing.assert_allclose(sort_wires(x).trace(), x.trace(), atol=1e-12)

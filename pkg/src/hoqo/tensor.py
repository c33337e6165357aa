"""Labeled dense matrices over tensor products of finite-dimensional wires.

Every Choi object in hoqo is a :class:`LabeledMatrix`: a square complex array
together with an ordered tuple of :class:`Wire` objects. Composite indices are
row-major with the first wire most significant, so for wires ``(a, b)`` of
dimensions ``(da, db)`` the basis vector ``|i>_a |j>_b`` sits at position
``i * db + j``. This is the ordering produced by ``np.kron(A, B)``.

Internally most operations reshape the data to a rank-``2n`` tensor with axes
``(row_1, ..., row_n, col_1, ..., col_n)`` and act on the relevant axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BadDimension, DuplicateLabel, UnknownLabel

HERMITIAN_TOL = 1e-10
VALIDITY_TOL = 1e-8

ROLES = ("input", "output", "auxiliary", "control")


@dataclass(frozen=True)
class Wire:
    """One tensor factor: a labeled Hilbert space of dimension ``dim``."""

    label: str
    dim: int
    role: str = "auxiliary"
    time_index: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise BadDimension(f"wire {self.label!r} has dimension {self.dim!r}")
        if self.role not in ROLES:
            raise ValueError(f"unknown wire role {self.role!r}")
        if self.time_index is not None and self.time_index < 0:
            raise ValueError("time_index must be non-negative")

    def relabel(self, label: str) -> "Wire":
        return Wire(label, self.dim, self.role, self.time_index)


def _check_unique(wires: Sequence[Wire]) -> None:
    labels = [w.label for w in wires]
    if len(set(labels)) != len(labels):
        dup = sorted({l for l in labels if labels.count(l) > 1})
        raise DuplicateLabel(f"duplicate wire labels {dup}")


@dataclass(frozen=True, eq=False)
class LabeledMatrix:
    """A square complex matrix whose rows and columns share a wire list.

    Args:
        wires: ordered wires; the matrix side is the product of their dims.
        data: complex array of shape ``(D, D)``. It is copied and frozen.
        hermitian_hint: promise that ``data`` is Hermitian. The promise is
            checked on construction (max deviation at most 1e-10) and lets
            spectral routines use a Hermitian eigensolver.
    """

    wires: tuple[Wire, ...]
    data: np.ndarray
    hermitian_hint: bool = field(default=False)

    def __post_init__(self) -> None:
        wires = tuple(self.wires)
        object.__setattr__(self, "wires", wires)
        _check_unique(wires)
        side = int(np.prod([w.dim for w in wires], dtype=np.int64)) if wires else 1
        arr = np.array(self.data, dtype=complex, copy=True)
        if arr.shape != (side, side):
            raise BadDimension(
                f"data shape {arr.shape} does not match wire dims "
                f"{[w.dim for w in wires]} (expected {(side, side)})"
            )
        if self.hermitian_hint:
            dev = np.max(np.abs(arr - arr.conj().T)) if arr.size else 0.0
            if dev > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(arr)))):
                raise ValueError(f"hermitian_hint set but deviation is {dev:.3e}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(w.label for w in self.wires)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(w.dim for w in self.wires)

    @property
    def side(self) -> int:
        return self.data.shape[0]

    def wire(self, label: str) -> Wire:
        for w in self.wires:
            if w.label == label:
                return w
        raise UnknownLabel(f"label {label!r} not in {self.labels}")

    def dim_of(self, labels: Iterable[str]) -> int:
        """Product of the dimensions of ``labels``."""
        return int(np.prod([self.wire(l).dim for l in labels], dtype=np.int64))

    def tensor(self) -> np.ndarray:
        """Rank-2n view with axes (rows..., cols...)."""
        return self.data.reshape(self.dims + self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def scalar(self) -> complex:
        """The single entry of a 1x1 matrix."""
        if self.side != 1:
            raise BadDimension(f"not a scalar: side {self.side}")
        return complex(self.data[0, 0])

    def with_data(self, data: np.ndarray, hermitian_hint: bool | None = None) -> "LabeledMatrix":
        hint = self.hermitian_hint if hermitian_hint is None else hermitian_hint
        return LabeledMatrix(self.wires, data, hint)

    def hermitian_part(self) -> "LabeledMatrix":
        return LabeledMatrix(self.wires, 0.5 * (self.data + self.data.conj().T), True)

    def relabel(self, mapping: dict[str, str]) -> "LabeledMatrix":
        """Rename wires; labels absent from ``mapping`` are kept."""
        for old in mapping:
            self.wire(old)
        wires = tuple(w.relabel(mapping.get(w.label, w.label)) for w in self.wires)
        return LabeledMatrix(wires, self.data, self.hermitian_hint)

    def with_roles(self, roles: dict[str, str]) -> "LabeledMatrix":
        wires = tuple(
            Wire(w.label, w.dim, roles.get(w.label, w.role), w.time_index) for w in self.wires
        )
        return LabeledMatrix(wires, self.data, self.hermitian_hint)

    def __add__(self, other: "LabeledMatrix") -> "LabeledMatrix":
        other = permute(other, self.labels)
        return LabeledMatrix(
            self.wires, self.data + other.data, self.hermitian_hint and other.hermitian_hint
        )

    def __sub__(self, other: "LabeledMatrix") -> "LabeledMatrix":
        other = permute(other, self.labels)
        return LabeledMatrix(
            self.wires, self.data - other.data, self.hermitian_hint and other.hermitian_hint
        )

    def __mul__(self, c: complex) -> "LabeledMatrix":
        hint = self.hermitian_hint and np.isreal(c)
        return LabeledMatrix(self.wires, self.data * c, bool(hint))

    __rmul__ = __mul__

    def __truediv__(self, c: complex) -> "LabeledMatrix":
        return self * (1.0 / c)

    def __repr__(self) -> str:
        return f"LabeledMatrix(wires={list(self.labels)}, dims={list(self.dims)})"


def scalar(value: complex) -> LabeledMatrix:
    """A 1x1 matrix with an empty wire list."""
    return LabeledMatrix((), np.array([[value]], dtype=complex), bool(np.isreal(value)))


def identity(wires: Sequence[Wire]) -> LabeledMatrix:
    """The identity operator on ``wires``."""
    side = int(np.prod([w.dim for w in wires], dtype=np.int64)) if wires else 1
    return LabeledMatrix(tuple(wires), np.eye(side), True)


def operator(data: np.ndarray, labels: Sequence[str], dims: Sequence[int] | None = None,
             roles: Sequence[str] | None = None, hermitian: bool = False) -> LabeledMatrix:
    """Build a LabeledMatrix from plain labels.

    If ``dims`` is omitted, all wires are taken to have equal dimension.
    """
    data = np.asarray(data)
    if dims is None:
        n = len(labels)
        d = round(data.shape[0] ** (1.0 / n)) if n else 1
        dims = [d] * n
    roles = roles or ["auxiliary"] * len(labels)
    wires = tuple(Wire(l, int(d), r) for l, d, r in zip(labels, dims, roles))
    if hermitian:
        data = 0.5 * (data + data.conj().T)
    return LabeledMatrix(wires, data, hermitian)


def kron(a: LabeledMatrix, b: LabeledMatrix) -> LabeledMatrix:
    """Tensor product with ``a``'s wires first.

    Raises:
        DuplicateLabel: if the two wire lists share a label.
    """
    shared = set(a.labels) & set(b.labels)
    if shared:
        raise DuplicateLabel(f"kron operands share labels {sorted(shared)}")
    return LabeledMatrix(
        a.wires + b.wires, np.kron(a.data, b.data), a.hermitian_hint and b.hermitian_hint
    )


def kron_all(xs: Sequence[LabeledMatrix]) -> LabeledMatrix:
    out = scalar(1.0)
    for x in xs:
        out = kron(out, x)
    return out


def _axes(x: LabeledMatrix, labels: Iterable[str]) -> list[int]:
    index = {l: i for i, l in enumerate(x.labels)}
    out = []
    for l in labels:
        if l not in index:
            raise UnknownLabel(f"label {l!r} not in {x.labels}")
        out.append(index[l])
    return out


def permute(x: LabeledMatrix, order: Sequence[str]) -> LabeledMatrix:
    """Reorder wires to ``order`` (which must be a permutation of the labels)."""
    order = tuple(order)
    if order == x.labels:
        return x
    if sorted(order) != sorted(x.labels):
        raise UnknownLabel(f"cannot permute {x.labels} to {order}")
    perm = _axes(x, order)
    n = len(perm)
    t = x.tensor().transpose(perm + [p + n for p in perm])
    side = x.side
    wires = tuple(x.wires[p] for p in perm)
    return LabeledMatrix(wires, t.reshape(side, side), x.hermitian_hint)


def sort_wires(x: LabeledMatrix) -> LabeledMatrix:
    """Canonical form: wires sorted by label."""
    return permute(x, sorted(x.labels))


def partial_trace(x: LabeledMatrix, labels: Iterable[str]) -> LabeledMatrix:
    """Trace out ``labels``; remaining wires keep their relative order."""
    labels = list(dict.fromkeys(labels))
    traced = set(_axes(x, labels))
    if not traced:
        return x
    n = len(x.wires)
    keep = [i for i in range(n) if i not in traced]
    rows = list(range(n))
    cols = [i + n if i not in traced else i for i in range(n)]
    out_idx = keep + [i + n for i in keep]
    t = np.einsum(x.tensor(), rows + cols, out_idx)
    wires = tuple(x.wires[i] for i in keep)
    side = int(np.prod([w.dim for w in wires], dtype=np.int64)) if wires else 1
    return LabeledMatrix(wires, t.reshape(side, side), x.hermitian_hint)


def partial_transpose(x: LabeledMatrix, labels: Iterable[str]) -> LabeledMatrix:
    """Transpose the tensor factors in ``labels`` only."""
    axes = set(_axes(x, labels))
    n = len(x.wires)
    perm = []
    for i in range(n):
        perm.append(i + n if i in axes else i)
    for i in range(n):
        perm.append(i if i in axes else i + n)
    t = x.tensor().transpose(perm)
    return LabeledMatrix(x.wires, t.reshape(x.side, x.side), x.hermitian_hint)


def transpose(x: LabeledMatrix) -> LabeledMatrix:
    return LabeledMatrix(x.wires, x.data.T, x.hermitian_hint)


def max_entangled(label_a: str, label_b: str, d: int, role_a: str = "auxiliary",
                  role_b: str = "auxiliary") -> LabeledMatrix:
    """Unnormalised maximally entangled operator ``sum_ij |ii><jj|``.

    For ``d == 1`` the two wires are trivial and the matrix is the scalar 1.
    """
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise BadDimension(f"d must be a positive integer, got {d!r}")
    v = np.eye(d).reshape(-1)
    return LabeledMatrix(
        (Wire(label_a, d, role_a), Wire(label_b, d, role_b)), np.outer(v, v), True
    )


@dataclass(frozen=True, eq=False)
class LabeledVector:
    """A column vector over an ordered wire list (the carrier of ``|K>>``)."""

    wires: tuple[Wire, ...]
    data: np.ndarray

    def __post_init__(self) -> None:
        wires = tuple(self.wires)
        object.__setattr__(self, "wires", wires)
        _check_unique(wires)
        side = int(np.prod([w.dim for w in wires], dtype=np.int64)) if wires else 1
        arr = np.array(self.data, dtype=complex, copy=True).reshape(-1)
        if arr.shape != (side,):
            raise BadDimension(f"vector length {arr.shape} does not match dims")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(w.label for w in self.wires)

    def projector(self) -> LabeledMatrix:
        """The rank-one operator ``|v><v|``."""
        return LabeledMatrix(self.wires, np.outer(self.data, self.data.conj()), True)

    def inner(self, other: "LabeledVector") -> complex:
        """``<self|other>`` after aligning wire order."""
        if sorted(self.labels) != sorted(other.labels):
            raise UnknownLabel("vectors live on different wires")
        perm = [other.labels.index(l) for l in self.labels]
        t = other.data.reshape([w.dim for w in other.wires]).transpose(perm).reshape(-1)
        return complex(np.vdot(self.data, t))


def vectorize(k: np.ndarray, in_label: str, out_label: str) -> LabeledVector:
    """Choi vector ``|K>> = (K (x) 1)|Phi+>`` on wires ``(out, in)``.

    With row-major ordering this is just ``K.reshape(-1)``: the entry
    ``K[i, j]`` lands on the basis vector ``|i>_out |j>_in``.
    """
    k = np.asarray(k, dtype=complex)
    if k.ndim != 2:
        raise BadDimension("vectorize expects a 2-D operator")
    d_out, d_in = k.shape
    return LabeledVector(
        (Wire(out_label, d_out, "output"), Wire(in_label, d_in, "input")), k.reshape(-1)
    )


def unvectorize(v: LabeledVector, in_label: str, out_label: str) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    labels = v.labels
    if sorted(labels) != sorted([in_label, out_label]):
        raise UnknownLabel(f"vector wires {labels} are not ({out_label}, {in_label})")
    dims = {w.label: w.dim for w in v.wires}
    t = v.data.reshape([dims[l] for l in labels])
    if labels[0] != out_label:
        t = t.T
    return np.array(t)


@dataclass(frozen=True)
class PSDReport:
    """Outcome of :func:`check_psd`."""

    is_psd: bool
    min_eigenvalue: float
    hermitian_deviation: float

    def __bool__(self) -> bool:
        return self.is_psd


def eigvalsh(x: LabeledMatrix | np.ndarray) -> np.ndarray:
    """Eigenvalues of the Hermitian part, ascending."""
    a = x.data if isinstance(x, LabeledMatrix) else np.asarray(x)
    return np.linalg.eigvalsh(0.5 * (a + a.conj().T))


def check_psd(x: LabeledMatrix | np.ndarray, tol: float = VALIDITY_TOL) -> PSDReport:
    """Report whether ``x`` is Hermitian and positive semidefinite within ``tol``.

    Never raises; a non-Hermitian input yields ``is_psd=False`` with the
    deviation recorded.
    """
    a = x.data if isinstance(x, LabeledMatrix) else np.asarray(x, dtype=complex)
    if a.size == 0:
        return PSDReport(True, 0.0, 0.0)
    dev = float(np.max(np.abs(a - a.conj().T)))
    lam = float(eigvalsh(a)[0])
    return PSDReport(dev <= tol and lam >= -tol, lam, dev)


def max_abs(x: LabeledMatrix | np.ndarray) -> float:
    a = x.data if isinstance(x, LabeledMatrix) else np.asarray(x)
    return float(np.max(np.abs(a))) if a.size else 0.0


def distance(a: LabeledMatrix, b: LabeledMatrix) -> float:
    """Max-abs entrywise distance after aligning wire order."""
    return max_abs(a.data - permute(b, a.labels).data)


def allclose(a: LabeledMatrix, b: LabeledMatrix, tol: float = VALIDITY_TOL) -> bool:
    """Relative max-norm comparison: ``|a - b| <= tol * max(1, |b|)``."""
    return distance(a, b) <= tol * max(1.0, max_abs(b))


def sqrtm_psd(a: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian matrix with eigenvalues floored at zero."""
    lam, vec = np.linalg.eigh(0.5 * (a + a.conj().T))
    return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.conj().T

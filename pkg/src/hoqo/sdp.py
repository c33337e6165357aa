"""Conic-programming plumbing shared by the optimisers.

Two pieces live here.

Linear constraints from projectors. Every ``ProjectorSpec`` is diagonal in a
product basis whose per-wire factors are the identity, traceless diagonal
matrices ``|0><0| - |j><j|`` or off-diagonal matrix units ``|i><j|``. The
eigenvalue of a product element depends only on which wires carry the
identity, so "``X`` lies in the range of ``P``" becomes "``X`` is orthogonal to
every element with eigenvalue 0" and "``P[X] = P[Y]``" becomes "``X - Y`` is
orthogonal to every element with eigenvalue 1". The elements are real, which
keeps each constraint row sparse and real.

Hermitian variables. A Hermitian ``X = A + iB`` is handled through the real
symmetric block ``[[A, -B], [B, A]]``, which is PSD exactly when ``X`` is. When
all problem data are real the imaginary block is dropped altogether.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import cvxpy as cp
import numpy as np
import scipy.sparse as sps

from .errors import SolverFailure
from .projectors import ProjectorSpec


# --------------------------------------------------------------------------
# Product basis and constraint rows
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _wire_basis(d: int) -> tuple[sps.csr_matrix, np.ndarray, np.ndarray]:
    """Per-wire basis as rows of vec coefficients (row-major vec of a d x d matrix).

    Returns the coefficient matrix, a flag marking the identity element, and
    the index of each element's transpose.
    """
    rows, cols, vals = [], [], []
    trivial = []
    transpose_of = []
    # identity
    for j in range(d):
        rows.append(0), cols.append(j * d + j), vals.append(1.0)
    trivial.append(True)
    transpose_of.append(0)
    n = 1
    for j in range(1, d):
        rows += [n, n]
        cols += [0, j * d + j]
        vals += [1.0, -1.0]
        trivial.append(False)
        transpose_of.append(n)
        n += 1
    unit_index = {}
    for i in range(d):
        for j in range(d):
            if i != j:
                unit_index[(i, j)] = n
                rows.append(n), cols.append(i * d + j), vals.append(1.0)
                trivial.append(False)
                n += 1
    for (i, j), idx in unit_index.items():
        transpose_of.append(unit_index[(j, i)])
    m = sps.csr_matrix((vals, (rows, cols)), shape=(d * d, d * d))
    return m, np.array(trivial), np.array(transpose_of)


@lru_cache(maxsize=32)
def _vec_permutation(dims: tuple[int, ...]) -> np.ndarray:
    """Map from per-wire interleaved (r1, c1, r2, c2, ...) order to row-major vec order."""
    n = int(np.prod(dims))
    shape = [x for d in dims for x in (d, d)]
    grid = np.indices(shape).reshape(len(shape), -1)
    r = np.zeros(n * n, dtype=np.int64)
    c = np.zeros(n * n, dtype=np.int64)
    for w, d in enumerate(dims):
        r = r * d + grid[2 * w]
        c = c * d + grid[2 * w + 1]
    return r * n + c


@dataclass(frozen=True)
class ConstraintRows:
    """Sparse real rows ``R`` such that the constraint reads ``R vec(X) = R vec(Y)``.

    ``symmetric[r]`` is True when row ``r`` comes from a basis element equal
    to its own transpose; for such rows the imaginary part of a Hermitian
    variable drops out.
    """

    rows: sps.csr_matrix
    symmetric: np.ndarray


def projector_rows(p: ProjectorSpec, labels: Sequence[str], eigenvalue: int) -> ConstraintRows:
    """Rows for basis elements with the given projector eigenvalue (0 or 1).

    ``labels`` fixes the composite wire order of the variable. Of every pair
    ``(B, B^T)`` only one element is kept: for Hermitian ``X`` their rows are
    complex conjugates of each other.
    """
    labels = list(labels)
    dims = tuple(int(p.dims[l]) for l in labels)
    k = len(labels)
    per_wire = [_wire_basis(d) for d in dims]
    sizes = [d * d for d in dims]
    total = int(np.prod(sizes))
    grid = np.indices(sizes).reshape(k, -1) if k else np.zeros((0, 1), dtype=int)

    # trivial-wire bitmask and transposed element index of every product element
    mask = np.zeros(total, dtype=np.int64)
    t_index = np.zeros(total, dtype=np.int64)
    for w in range(k):
        _, triv, tr = per_wire[w]
        mask |= triv[grid[w]].astype(np.int64) << w
        t_index = t_index * sizes[w] + tr[grid[w]]
    lam = np.zeros(total)
    pos = {l: w for w, l in enumerate(labels)}
    for term, c in p.terms.items():
        bits = 0
        for l in term:
            bits |= 1 << pos[l]
        lam += float(c) * ((mask & bits) == bits)
    select = np.abs(lam - eigenvalue) < 1e-9
    own = np.arange(total)
    select &= own <= t_index

    full = per_wire[0][0] if k else sps.csr_matrix(np.ones((1, 1)))
    for w in range(1, k):
        full = sps.kron(full, per_wire[w][0], format="csr")
    full = full[np.flatnonzero(select)]
    # reorder columns from interleaved per-wire layout to row-major vec(X)
    perm = _vec_permutation(dims)
    full = full.tocoo()
    out = sps.csr_matrix((full.data, (full.row, perm[full.col])), shape=full.shape)
    return ConstraintRows(out, (own == t_index)[select])


# --------------------------------------------------------------------------
# Hermitian variables
# --------------------------------------------------------------------------


def embed(h: np.ndarray) -> np.ndarray:
    """Real symmetric block ``[[Re H, -Im H], [Im H, Re H]]``."""
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def unembed(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`embed`, averaging the redundant blocks."""
    n = m.shape[0] // 2
    re = 0.5 * (m[:n, :n] + m[n:, n:])
    im = 0.5 * (m[n:, :n] - m[:n, n:])
    return re + 1j * im


class HermitianVar:
    """A Hermitian matrix variable in real or complex mode.

    In complex mode ``re`` is symmetric and ``im`` antisymmetric; the PSD
    constraint is imposed on the embedded block.
    """

    def __init__(self, n: int, complex_mode: bool, psd: bool, name: str = "X"):
        self.n = n
        self.complex_mode = complex_mode
        self.psd = psd
        if complex_mode:
            self.block = cp.Variable((2 * n, 2 * n), symmetric=True, name=name)
            self.re = self.block[:n, :n]
            self.im = self.block[n:, :n]
        else:
            self.block = cp.Variable((n, n), symmetric=True, name=name)
            self.re = self.block
            self.im = None

    def constraints(self) -> list:
        cons = []
        if self.complex_mode:
            n = self.n
            cons += [self.block[n:, n:] == self.block[:n, :n],
                     self.block[:n, n:] == -self.block[n:, :n]]
        if self.psd:
            cons.append(self.block >> 0)
        return cons

    def inner(self, c: np.ndarray) -> cp.Expression:
        """``Re tr(C X)`` for Hermitian data ``C``."""
        c = np.asarray(c)
        expr = cp.sum(cp.multiply(np.real(c).T, self.re))
        if self.complex_mode and np.iscomplexobj(c) and np.any(np.imag(c)):
            expr = expr - cp.sum(cp.multiply(np.imag(c).T, self.im))
        return expr

    def trace(self) -> cp.Expression:
        return cp.trace(self.re)

    def value(self) -> np.ndarray:
        if self.block.value is None:
            raise SolverFailure(f"variable {self.block.name()} has no value")
        if self.complex_mode:
            return unembed(self.block.value)
        return np.array(self.block.value, dtype=complex)


def lin_rows(rows: ConstraintRows, x: HermitianVar) -> list[cp.Expression]:
    """Real and imaginary parts of the row functionals applied to ``x``."""
    out = [rows.rows @ cp.vec(x.re, order="C")]
    if x.complex_mode:
        asym = np.flatnonzero(~rows.symmetric)
        if asym.size:
            out.append(rows.rows[asym] @ cp.vec(x.im, order="C"))
    return out


def lin_values(rows: ConstraintRows, y: np.ndarray, complex_mode: bool) -> list[np.ndarray]:
    """Numerical counterpart of :func:`lin_rows` for fixed data ``y``."""
    out = [rows.rows @ np.real(y).reshape(-1)]
    if complex_mode:
        asym = np.flatnonzero(~rows.symmetric)
        if asym.size:
            out.append(rows.rows[asym] @ np.imag(y).reshape(-1))
    return out


def in_range(p: ProjectorSpec, labels: Sequence[str], x: HermitianVar) -> list:
    """Constraints placing ``x`` in the range of ``p``."""
    rows = projector_rows(p, labels, 0)
    if rows.rows.shape[0] == 0:
        return []
    return [e == 0 for e in lin_rows(rows, x)]


def projected_equal(p: ProjectorSpec, labels: Sequence[str], x: HermitianVar | list[HermitianVar],
                    target: np.ndarray) -> list:
    """Constraints ``p[sum(x)] = p[target]``."""
    xs = x if isinstance(x, list) else [x]
    rows = projector_rows(p, labels, 1)
    if rows.rows.shape[0] == 0:
        return []
    parts = [lin_rows(rows, v) for v in xs]
    complex_mode = any(v.complex_mode for v in xs)
    rhs = lin_values(rows, target, complex_mode)
    cons = []
    for j, r in enumerate(rhs):
        lhs = sum(pp[j] for pp in parts if j < len(pp))
        cons.append(lhs == r)
    return cons


def partial_trace_expr(x: HermitianVar, dims: Sequence[int], axis: int) -> HermitianVar | cp.Expression:
    """Block embedding of ``tr_axis X`` as a cvxpy expression."""
    dims = list(dims)
    if not x.complex_mode:
        return cp.partial_trace(x.re, dims, axis)
    re = cp.partial_trace(x.re, dims, axis)
    im = cp.partial_trace(x.im, dims, axis)
    return cp.bmat([[re, -im], [im, re]])


# --------------------------------------------------------------------------
# Solving
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SolveInfo:
    status: str
    value: float
    gap: float
    solver: str
    seconds: float


def _gap(prob: cp.Problem) -> float:
    stats = prob.solver_stats
    extra = getattr(stats, "extra_stats", None)
    try:
        if stats.solver_name == "CLARABEL" and extra is not None:
            return float(abs(extra.obj_val - extra.obj_val_dual))
        if stats.solver_name == "SCS" and extra is not None:
            return float(abs(extra["info"]["gap"]))
    except (AttributeError, KeyError, TypeError):
        pass
    return float("nan")


def solve(prob: cp.Problem, solver: str = "CLARABEL", **opts) -> SolveInfo:
    """Solve and classify the outcome.

    ``optimal`` requires the solver to report optimality with a small
    primal-dual gap; an inaccurate but finished solve is ``near-optimal``.

    Raises:
        SolverFailure: on infeasible, unbounded or crashed solves.
    """
    try:
        prob.solve(solver=solver, **opts)
    except cp.error.SolverError as exc:
        raise SolverFailure(f"{solver} failed: {exc}") from exc
    value = prob.value
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or value is None:
        raise SolverFailure(f"{solver} returned status {prob.status}")
    gap = _gap(prob)
    value = float(value)
    status = "optimal"
    if prob.status == cp.OPTIMAL_INACCURATE or (np.isfinite(gap) and gap > 1e-6 * (1 + abs(value))):
        status = "near-optimal"
    secs = float(prob.solver_stats.solve_time or 0.0)
    return SolveInfo(status, value, gap, solver, secs)

"""Command-line front end.

Every command prints one JSON object ``{value, status, gap?, details}`` on
standard output. Exit codes: 0 success or pass, 1 analytic failure (invalid
object, no negative witness, failed verdict, solver failure), 2 usage or I/O
problems.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import click
import numpy as np

from . import analysis, constructors, io, optimize
from .choi import choi_of_unitary, link, state
from .errors import HoqoError, SchemaError, SolverFailure
from .objects import Comb, CombStructure, ProcessMatrixObject, validate
from .rng import make_rng, random_unitary
from .tensor import VALIDITY_TOL, LabeledMatrix

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1.0, -1.0]).astype(complex),
}
BASES = {
    "z": np.eye(2, dtype=complex),
    "x": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "y": np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2),
}


def _round(v: float) -> float:
    return float("%.12g" % v) if np.isfinite(v) else v


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (int, str, bool)) or x is None:
        return x
    return str(x)


def emit(ctx: click.Context, value: Any, status: str, details: dict | None = None,
         gap: float | None = None) -> None:
    out: dict[str, Any] = {
        "value": _round(value) if isinstance(value, (float, np.floating)) else value,
        "status": status,
    }
    if gap is not None and gap == gap:
        out["gap"] = float(gap)
    out["details"] = _jsonable(details or {})
    indent = 2 if ctx.find_root().obj.get("pretty") else None
    click.echo(json.dumps(out, indent=indent, sort_keys=False))


def fail_usage(ctx: click.Context, message: str, pointer: str | None = None) -> None:
    details = {"error": message}
    if pointer is not None:
        details["pointer"] = pointer
    emit(ctx, None, "error", details)
    click.echo(message, err=True)
    ctx.exit(EXIT_USAGE)


def _load(ctx: click.Context, path: str) -> io.MatrixFile:
    try:
        return io.load(path)
    except SchemaError as exc:
        fail_usage(ctx, str(exc), exc.pointer)


@click.group()
@click.option("--json", "style", flag_value="json", default=True, help="Compact JSON output.")
@click.option("--pretty", "style", flag_value="pretty", help="Indented JSON output.")
@click.pass_context
def main(ctx: click.Context, style: str) -> None:
    """Higher-order quantum operations: build, validate, witness, optimise, analyse."""
    ctx.ensure_object(dict)
    ctx.obj["pretty"] = style == "pretty"


# --------------------------------------------------------------------------
# validate
# --------------------------------------------------------------------------


def _parse_structure(text: str | None) -> CombStructure | None:
    if text is None:
        return None
    p = Path(text)
    raw = p.read_text() if p.exists() else text
    return CombStructure.from_json(json.loads(raw))


@main.command("validate")
@click.option("--kind", type=click.Choice(io.KINDS), default=None,
              help="Class to check; defaults to the file's kind field.")
@click.option("--structure", default=None,
              help="Comb teeth as JSON (or a path to a JSON file).")
@click.option("--tol", type=float, default=VALIDITY_TOL, show_default=True)
@click.argument("file")
@click.pass_context
def validate_cmd(ctx, kind, structure, tol, file):
    """Check membership of FILE in a class of higher-order objects."""
    mf = _load(ctx, file)
    kind = kind or mf.kind
    if kind is None:
        fail_usage(ctx, "no --kind given and the file has no kind field")
    try:
        s = _parse_structure(structure) or mf.structure
    except (json.JSONDecodeError, ValueError, HoqoError) as exc:
        fail_usage(ctx, f"bad --structure: {exc}")
    x: Any = mf.matrix
    try:
        if kind == "process_matrix":
            x = ProcessMatrixObject(mf.matrix)
        v = validate(kind, x, s, tol)
    except HoqoError as exc:
        emit(ctx, None, "fail", {"error": str(exc)})
        ctx.exit(EXIT_FAIL)
    emit(ctx, v.magnitude, "pass" if v.passed else "fail", v.to_json())
    ctx.exit(EXIT_OK if v.passed else EXIT_FAIL)


# --------------------------------------------------------------------------
# build
# --------------------------------------------------------------------------

BUILDS = ("switch", "wocb", "markov", "circuit", "timeflip", "otot", "sterngerlach")


@main.command("build")
@click.argument("what", type=click.Choice(BUILDS))
@click.option("--dim", type=click.IntRange(2, 4), default=2, show_default=True,
              help="System (target) dimension.")
@click.option("--env-dim", type=click.IntRange(1, 4), default=2, show_default=True)
@click.option("--steps", type=click.IntRange(1, 4), default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--variant", type=click.Choice(["quantum", "classical", "reduced"]),
              default="quantum", show_default=True,
              help="Switch variant; 'reduced' plugs the control state |+>.")
@click.option("--tol", type=float, default=VALIDITY_TOL, show_default=True)
@click.option("-o", "--output", "out", required=True, help="Output file.")
@click.pass_context
def build_cmd(ctx, what, dim, env_dim, steps, seed, variant, tol, out):
    """Construct a canonical object and write it as a matrix file."""
    rng = make_rng(seed)
    kind, structure = None, None
    if what == "switch":
        m = constructors.quantum_switch(dim)
        if variant == "classical":
            m = constructors.classical_switch(dim)
        elif variant == "reduced":
            m = link(m, state(np.full((2, 2), 0.5), "C"))
        check = None
    elif what == "wocb":
        m, kind = constructors.w_ocb().mat, "process_matrix"
        check = ("process_matrix", ProcessMatrixObject(m), None)
    elif what == "markov":
        c = constructors.random_markov_comb(steps, dim, rng)
        m, kind, structure = c.mat, "comb", c.structure
        check = ("comb", c, None)
    elif what == "circuit":
        c = constructors.comb_from_circuit(constructors.random_se_circuit(steps, dim, env_dim, rng))
        m, kind, structure = c.mat, "comb", c.structure
        check = ("comb", c, None)
    elif what == "timeflip":
        m = constructors.time_flip_process(dim)
        check = None
    elif what == "otot":
        d = dim * env_dim
        o = constructors.otot(random_unitary(d, rng), np.eye(d) / d, dim, env_dim)
        m, kind, structure = o.comb.mat, "comb", o.comb.structure
        check = ("comb", o.comb, None)
    else:
        c = constructors.stern_gerlach_comb()
        m, kind, structure = c.mat, "comb", c.structure
        check = ("comb", c, None)
    details: dict[str, Any] = {"object": what, "side": m.side, "wires": list(m.labels)}
    if check is not None:
        v = validate(check[0], check[1], check[2], tol)
        details["verdict"] = v.to_json()
        if not v.passed:
            emit(ctx, v.magnitude, "fail", details)
            ctx.exit(EXIT_FAIL)
    if what == "switch":
        details["rank"] = int(np.linalg.matrix_rank(m.data, tol=1e-9))
    try:
        io.save(out, io.MatrixFile(m, kind, structure))
    except OSError as exc:
        fail_usage(ctx, f"cannot write {out}: {exc.strerror}")
    details["file"] = out
    emit(ctx, float(np.trace(m.data).real), "ok", details)


# --------------------------------------------------------------------------
# optimisation commands
# --------------------------------------------------------------------------


@main.command("witness")
@click.argument("file")
@click.option("--normalisation", type=click.Choice(optimize.WITNESS_NORMALISATIONS),
              default="white-noise", show_default=True)
@click.option("--solver", default=None, help="cvxpy solver name.")
@click.option("--tol", type=float, default=1e-6, show_default=True,
              help="Values below -tol count as a certificate.")
@click.pass_context
def witness_cmd(ctx, file, normalisation, solver, tol):
    """Search for a causal witness certifying FILE is causally non-separable."""
    mf = _load(ctx, file)
    m = mf.matrix
    try:
        if sorted(m.labels) == ["Ai", "Ao", "Bi", "Bo"]:
            r = optimize.causal_witness(ProcessMatrixObject(m), solver or "CLARABEL", normalisation)
        else:
            r = optimize.switch_witness(m, solver or "SCS", normalisation)
    except SolverFailure as exc:
        emit(ctx, None, "failed", {"error": str(exc)})
        ctx.exit(EXIT_FAIL)
    except HoqoError as exc:
        fail_usage(ctx, str(exc))
    j = r.to_json()
    j["details"]["certified"] = r.value < -tol
    emit(ctx, r.value, r.status, j["details"], r.gap)
    ctx.exit(EXIT_OK if r.value < -tol else EXIT_FAIL)


@main.command("fidelity")
@click.option("--task", type=click.Choice(optimize.TASKS), required=True)
@click.option("--dim", type=click.IntRange(2, 3), default=2, show_default=True)
@click.option("--calls", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--strategy", type=click.Choice(["parallel", "sequential"]), default="parallel",
              show_default=True)
@click.option("--method", type=click.Choice(["design", "montecarlo"]), default="design",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def fidelity_cmd(ctx, task, dim, calls, strategy, method, seed):
    """Optimal average fidelity for transforming CALLS uses of an unknown unitary."""
    try:
        om = optimize.performance_operator(task, dim, calls, method, seed=seed)
        r = optimize.optimal_fidelity(task, dim, calls, strategy, omega=om)
    except SolverFailure as exc:
        emit(ctx, None, "failed", {"error": str(exc)})
        ctx.exit(EXIT_FAIL)
    except HoqoError as exc:
        fail_usage(ctx, str(exc))
    emit(ctx, r.value, r.status, r.to_json()["details"], r.gap)


@main.command("gyni")
@click.option("--restarts", type=click.IntRange(1), default=50, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--max-iter", type=click.IntRange(1), default=200, show_default=True)
@click.option("--complex", "complex_mode", is_flag=True, help="Allow complex operators.")
@click.pass_context
def gyni_cmd(ctx, restarts, seed, max_iter, complex_mode):
    """Seesaw search for high GYNI success with an indefinite-order process."""
    try:
        g = optimize.gyni_seesaw(restarts, seed, max_iter, real=not complex_mode)
    except SolverFailure as exc:
        emit(ctx, None, "failed", {"error": str(exc)})
        ctx.exit(EXIT_FAIL)
    d = dict(g.result.details)
    d["causal_bound"] = 0.5
    d["exceeds_causal_bound"] = g.result.value > 0.5 + 1e-6
    emit(ctx, g.result.value, g.result.status, d)


# --------------------------------------------------------------------------
# analyze
# --------------------------------------------------------------------------


def _comb(ctx: click.Context, mf: io.MatrixFile) -> Comb:
    if mf.structure is None:
        fail_usage(ctx, "this analysis needs a file with a structure field")
    return Comb(mf.matrix, mf.structure)


def _bases(ctx, text: str | None, n: int) -> list[np.ndarray] | None:
    if text is None:
        return None
    keys = [k.strip().lower() for k in text.split(",")]
    if len(keys) != n or any(k not in BASES for k in keys):
        fail_usage(ctx, f"--basis needs {n} comma-separated entries from {sorted(BASES)}")
    return [BASES[k] for k in keys]


def _slots(text: str) -> tuple[int, ...]:
    return tuple(int(s) for s in text.split(",") if s.strip())


def _unitary_choi(u: np.ndarray, i: str, o: str) -> LabeledMatrix:
    return choi_of_unitary(u, i, o).mat


@main.command("analyze")
@click.argument("what", type=click.Choice(["nonmarkov", "kolmogorov", "markovorder",
                                           "otoc", "qde", "te"]))
@click.argument("file")
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--basis", default=None, help="Per-slot bases, e.g. 'z,x,z'.")
@click.option("--history", default="1", show_default=True, help="Markov order: history slots.")
@click.option("--memory", default="2", show_default=True, help="Markov order: memory slots.")
@click.option("--future", default="3", show_default=True, help="Markov order: future slots.")
@click.option("--m", "m_op", type=click.Choice(sorted(PAULI)), default="i", show_default=True,
              help="OTOC: observable on 3i.")
@click.option("--v", "v_op", type=click.Choice(sorted(PAULI)), default="i", show_default=True,
              help="OTOC: unitary perturbation on slot 2.")
@click.option("--p", "p_op", type=click.Choice(sorted(PAULI)), default="i", show_default=True,
              help="OTOC: unitary applied in slot 1.")
@click.pass_context
def analyze_cmd(ctx, what, file, tol, basis, history, memory, future, m_op, v_op, p_op):
    """Memory, classicality and chaos diagnostics of the comb in FILE."""
    mf = _load(ctx, file)
    t = _comb(ctx, mf)
    try:
        if what == "nonmarkov":
            r = analysis.markov_test(t, tol)
            emit(ctx, r.distance, "pass" if r.verdict.passed else "fail", r.verdict.to_json())
            ctx.exit(EXIT_OK if r.verdict.passed else EXIT_FAIL)
        if what == "kolmogorov":
            b = _bases(ctx, basis, len(t.structure.slots()))
            c = analysis.classicality_check(t, b, tol)
            details = c.verdict.to_json()
            details["worst"] = c.worst
            emit(ctx, c.max_discrepancy, "pass" if c.verdict.passed else "fail", details)
            ctx.exit(EXIT_OK if c.verdict.passed else EXIT_FAIL)
        if what == "markovorder":
            part = analysis.PartitionFMH(_slots(future), _slots(memory), _slots(history))
            b = _bases(ctx, basis, len(part.memory))
            tester = analysis.causal_break_tester(t, part.memory, b)
            r = analysis.markov_order_check(t, tester, part, tol)
            details = r.verdict.to_json()
            details["skipped"] = list(r.skipped)
            emit(ctx, r.verdict.magnitude, "pass" if r.verdict.passed else "fail", details)
            ctx.exit(EXIT_OK if r.verdict.passed else EXIT_FAIL)
        if what == "otoc":
            mat = t.mat
            m = LabeledMatrix((mat.wire("3i"),), PAULI[m_op].T)
            v = _unitary_choi(PAULI[v_op], "2i", "2o")
            p = _unitary_choi(PAULI[p_op], "1i", "1o")
            emit(ctx, analysis.otoc(t, m, v, p), "ok", {"m": m_op, "v": v_op, "p": p_op})
            return
        if what == "qde":
            emit(ctx, analysis.qde(t), "ok", {"n": t.structure.n, "finite_n": True})
            return
        emit(ctx, analysis.temporal_entanglement(t), "ok", {"n": t.structure.n})
    except HoqoError as exc:
        fail_usage(ctx, str(exc))


if __name__ == "__main__":  # pragma: no cover
    main()

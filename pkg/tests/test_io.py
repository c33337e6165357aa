import json

import numpy as np
import pytest

from hoqo import io
from hoqo.constructors import comb_from_circuit, random_se_circuit, w_ocb
from hoqo.errors import SchemaError
from hoqo.tensor import LabeledMatrix, Wire, operator


def test_round_trip_is_lossless_and_byte_identical(tmp_path, rng):
    t = comb_from_circuit(random_se_circuit(1, 2, 2, rng))
    path = tmp_path / "comb.json"
    io.save(path, t.mat, kind="comb", structure=t.structure)
    mf = io.load(path)
    np.testing.assert_array_equal(mf.matrix.data, t.mat.data)
    assert mf.matrix.labels == t.mat.labels
    assert [w.role for w in mf.matrix.wires] == [w.role for w in t.mat.wires]
    assert mf.kind == "comb"
    assert mf.structure.teeth == t.structure.teeth
    io.save(tmp_path / "again.json", mf)
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_written_file_is_plain_json_with_trace():
    text = io.dumps(io.MatrixFile(w_ocb().mat, "process_matrix"))
    doc = json.loads(text)
    assert doc["trace"] == 4
    assert doc["kind"] == "process_matrix"
    assert "-0" not in text.replace("-0.", "")


def _doc(**over):
    doc = {"wires": [{"label": "a", "dim": 2}], "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]}
    doc.update(over)
    return json.dumps(doc)


@pytest.mark.parametrize(
    "text,pointer",
    [
        (_doc(wires=[{"label": "a", "dim": 0}]), "/wires/0/dim"),
        (_doc(kind="banana"), "/kind"),
        (_doc(extra=1), ""),
        (_doc(re=[[1, 0]]), "/re"),
        (_doc(im=[[0, 0], [0]]), "/im/1"),
        (_doc(wires=[{"label": "a", "dim": 2}, {"label": "a", "dim": 1}]), "/wires"),
        (_doc(structure=[[["b"], []]]), "/structure"),
        (_doc(re=[[1, "x"], [0, 0]]), "/re/0/1"),
    ],
)
def test_schema_errors_carry_json_pointers(text, pointer):
    with pytest.raises(SchemaError) as info:
        io.loads(text)
    assert info.value.pointer == pointer


def test_truncated_and_missing_files(tmp_path):
    with pytest.raises(SchemaError):
        io.loads('{"wires": [')
    with pytest.raises(SchemaError):
        io.load(tmp_path / "nope.json")


def test_non_finite_entries_are_rejected():
    m = LabeledMatrix((Wire("a", 1),), np.array([[np.nan]]))
    with pytest.raises(SchemaError):
        io.dumps(io.MatrixFile(m))


def test_complex_entries_survive(rng):
    data = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    m = operator(data, ["q"], [2])
    back = io.loads(io.dumps(io.MatrixFile(m))).matrix
    np.testing.assert_array_equal(back.data, m.data)

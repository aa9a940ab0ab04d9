import io
import json

from kle.report import SCHEMA, emit_report, rows_to_csv, summary_document


def test_empty_rows_header_only():
    assert rows_to_csv([], columns=["p", "value"]) == "p,value\n"


def test_rows_sorted():
    rows = [{"p": 8, "v": 0.5}, {"p": 2, "v": 0.1}, {"p": 4, "v": 0.2}]
    text = rows_to_csv(rows, sort_by="p")
    assert [line.split(",")[0] for line in text.splitlines()[1:]] == ["2", "4", "8"]


def test_cells():
    text = rows_to_csv([{"a": True, "b": 0.1, "c": [1, 2], "d": "x"}])
    assert text.splitlines()[1] == "1,0.1,1 2,x"


def test_columns_union_in_first_seen_order():
    text = rows_to_csv([{"a": 1}, {"b": 2, "a": 3}])
    assert text.splitlines() == ["a,b", "1,", "3,2"]


def test_summary_document_fields():
    doc = summary_document("bounds", {"value": 1.5}, [{"x": 2**60}], seed=3, wall_time=0.25)
    assert doc["schema"] == SCHEMA == 1
    assert doc["command"] == "bounds" and doc["seed"] == 3 and doc["value"] == 1.5
    assert set(doc["versions"]) == {"python", "artifact", "numpy", "scipy"}
    assert doc["rows"] == [{"x": str(2**60)}]


def test_emit_csv_writes_sidecar(tmp_path):
    out = tmp_path / "r.csv"
    emit_report("x", [{"b": 2, "a": 1}], {"s": 1}, seed=5, wall_time=0.1, fmt="csv", out=str(out))
    assert out.read_text() == "b,a\n2,1\n"
    doc = json.loads((tmp_path / "r.csv.json").read_text())
    assert doc["seed"] == 5 and doc["s"] == 1


def test_emit_json_to_stream():
    buf = io.StringIO()
    emit_report("x", [], {"s": 1}, seed=0, stream=buf)
    assert json.loads(buf.getvalue())["rows"] == []


def test_csv_ignores_wall_time():
    a, b = io.StringIO(), io.StringIO()
    emit_report("x", [{"v": 1}], {}, seed=0, wall_time=1.0, fmt="csv", stream=a)
    emit_report("x", [{"v": 1}], {}, seed=0, wall_time=9.0, fmt="csv", stream=b)
    assert a.getvalue() == b.getvalue()

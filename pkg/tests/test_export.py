import io
import json
import math

import numpy as np
import pytest

from ergolab import export
from ergolab.analysis import CSV_COLUMNS, Optimum, efficiency_sweep, storage_comparison
from ergolab.config import PRESETS, THETA_S_REFERENCE
from ergolab.dynamics import NoiseModel, evolve_free
from ergolab.protocols import run_sequential
from ergolab.state import pure_state

WORKING = PRESETS["working-point"]


def test_csv_format():
    buf = io.StringIO()
    rows = [{"a": 1.0, "b": None}, {"a": 0.1, "b": "x"}, {"a": math.nan, "b": np.float64(0.25)}]
    export.write_csv(buf, ("a", "b"), rows, footer=["note"])
    assert buf.getvalue() == "a,b\n1.0,\n0.1,x\n,0.25\n# note\n"


def test_json_has_no_nan():
    buf = io.StringIO()
    export.write_json(buf, {"x": math.nan, "z": 0.5 + 0.25j, "m": np.array([[1.0, math.inf]])})
    payload = json.loads(buf.getvalue())
    assert payload == {"x": None, "z": [0.5, 0.25], "m": [[1.0, None]]}


def test_render_rejects_unknown_format():
    with pytest.raises(ValueError):
        export.render("xml", ("a",), [], {})


def test_save_and_load(tmp_path):
    path = tmp_path / "nested" / "out.json"
    export.save_text(str(path), json.dumps({"k": 1}))
    assert export.load_json(str(path)) == {"k": 1}
    assert b"\r\n" not in path.read_bytes()


def test_load_json_tolerates_missing_or_bad_files(tmp_path):
    assert export.load_json(str(tmp_path / "missing.json")) is None
    bad = tmp_path / "bad.json"
    bad.write_text("{oops", encoding="utf-8")
    assert export.load_json(str(bad)) is None


def test_trace_csv():
    trace = run_sequential(THETA_S_REFERENCE, WORKING)
    lines = export.render_trace(trace).splitlines()
    assert lines[0] == ",".join(export.TRACE_COLUMNS)
    assert [line.split(",")[1] for line in lines[1:]] == ["prepare", "V_pi", "U_c"]
    assert all(line.startswith("sequential,") for line in lines[1:])


def test_trace_json():
    trace = run_sequential(2.0, WORKING)
    payload = json.loads(export.render_trace(trace, "json"))
    assert payload["protocol"] == "sequential"
    assert [s["label"] for s in payload["steps"]] == ["prepare", "V_pi", "U_c"]


def test_sweep_csv_with_optimum_footer():
    rows = efficiency_sweep(3, 0.1)
    optimum = {"theta_m": Optimum(2.331, 0.432), "theta_e": Optimum(2.268, 0.469)}
    text = export.render_sweep(rows, "csv", optimum)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len([line for line in lines if not line.startswith("#")]) == 4
    assert lines[-2].startswith("# theta_m=2.331 ")
    assert lines[-1].startswith("# theta_e=2.268 ")
    payload = json.loads(export.render_sweep(rows, "json", optimum))
    assert payload["optimum"]["theta_m"]["coherence_nats"] == 0.432
    assert payload["columns"] == list(CSV_COLUMNS)


def test_sweep_csv_is_reproducible():
    rows = efficiency_sweep(11, 0.2)
    assert export.render_sweep(rows).encode() == export.render_sweep(efficiency_sweep(11, 0.2)).encode()


def test_surface_skips_unreachable_points():
    values = np.array([[0.0, 0.1], [0.0, math.nan]])
    text = export.render_surface([2.0, 3.0], [0.0, 0.2], values)
    assert text.splitlines() == [
        "theta_rad,coherence_nats,e_coh",
        "2.0,0.0,0.0",
        "2.0,0.2,0.1",
        "3.0,0.0,0.0",
    ]
    payload = json.loads(export.render_surface([2.0, 3.0], [0.0, 0.2], values, "json"))
    assert payload["e_coh"][1][1] is None


def test_storage_csv():
    rows = storage_comparison(PRESETS["sweet-spot"], [0.0])
    lines = export.render_storage(rows).splitlines()
    assert lines[0] == ",".join(export.STORAGE_COLUMNS)
    assert lines[1].endswith(",incoherent")


def test_trajectory_csv(tmp_path):
    noise = NoiseModel.from_params(WORKING)
    result = evolve_free(pure_state(2.0), noise, 4e-6, samples=5)
    path = tmp_path / "trajectory.csv"
    export.write_trajectory_csv(result, str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "time_s,p1,re_a,im_a"
    assert len(lines) == len(result.trajectory) + 1
    assert lines[1].startswith("0.0,")

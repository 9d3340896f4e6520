import json

import pytest

from cmforge.cli import main, plain
from cmforge.quadfield import ImagQuadField


def _run(tmp_path, *args):
    out = tmp_path / "r.json"
    code = main(list(args) + ["--report", str(out), "--no-timing"])
    return code, json.loads(out.read_text())


def test_classgroup_d23_passes_with_h3(tmp_path):
    code, rep = _run(tmp_path, "classgroup", "--instance", "Q(sqrt-23)")
    assert code == 0
    (res,) = rep["results"]
    assert res["status"] == "pass"
    assert res["checks"][0]["witness"]["h"] == "3"


def test_rejected_instance_is_skipped(tmp_path):
    code, rep = _run(tmp_path, "shimura", "--instance", "Q(sqrt-23)")
    assert code == 0 and rep["results"][0]["status"] == "skipped"


def test_picocycle_d5_witness(tmp_path):
    code, rep = _run(tmp_path, "picocycle", "--instance", "Q(sqrt-5)/H")
    assert code == 0
    w = rep["results"][0]["checks"][0]["witness"]
    assert w["orders"] == ["2"]
    assert rep["results"][0]["checks"][1]["witness"]["pairs"] == "400"


def test_malformed_catalog_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("schema = 1\n[[instance]]\nlabel = 'x'\n")
    assert main(["classgroup", "--catalog", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err


def test_unknown_instance_exit_2():
    assert main(["classgroup", "--instance", "nope"]) == 2


def test_bad_suite_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_failure_exit_1(tmp_path):
    # substitute a suite with a failing check
    from cmforge import cli
    orig = cli.RUNNERS["classgroup"]
    cli.RUNNERS["classgroup"] = lambda entry, ctx, ck: ck.add("forced", False, value=1)
    try:
        code, rep = _run(tmp_path, "classgroup", "--instance", "Q(i)")
    finally:
        cli.RUNNERS["classgroup"] = orig
    assert code == 1
    assert rep["results"][0]["checks"][0]["witness"] == {"value": "1"}


def test_plain_encodes_big_integers():
    K = ImagQuadField(-1)
    x = K.elt(10 ** 30, -7)
    assert plain(x) == {"coords": [str(10 ** 30), "-7"], "den": "1"}
    assert plain({"a": (1, True, None)}) == {"a": ["1", True, None]}


def test_convention_flag(tmp_path):
    code, rep = _run(tmp_path, "shimura", "--instance", "Q(i)", "--convention", "e=+1")
    assert code == 0 and rep["convention_e"] == 1

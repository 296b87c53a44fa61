import io
import json

import numpy as np
import pytest

from rmlist.cli import ECHO_PREFIX, parse_words, run
from rmlist.code_tree import ParameterError, build_quad_tree, tree_from_spec, tree_to_spec
from rmlist.encoder import encode


def _run(argv):
    out = io.StringIO()
    status = run(argv, stdout=out)
    return status, out.getvalue()


def test_info_rm52():
    status, out = _run(["info", "-m", "5", "-r", "2", "--seed", "1"])
    assert status == 0
    lines = out.splitlines()
    assert lines[0].startswith(ECHO_PREFIX)
    assert lines[1] == "n=32 k=16 d=8 (exact)"


def test_encode_hex_and_binary():
    _, a = _run(["encode", "-m", "4", "-r", "1", "--seed", "1", "10110"])
    _, b = _run(["encode", "-m", "4", "-r", "1", "--seed", "1", "0x16"])
    assert a.splitlines()[1] == b.splitlines()[1] == "1100001111000011"


def test_parse_words():
    np.testing.assert_array_equal(parse_words("2f", 6), [[1, 0, 1, 1, 1, 1]])
    with pytest.raises(ParameterError):
        parse_words("0xff", 6)
    with pytest.raises(ParameterError):
        parse_words("0102", 4, "bin")


def test_decode_noiseless(tmp_path):
    rng = np.random.default_rng(0)
    for spec in ({"type": "rm", "m": 6, "r": 3}, tree_to_spec(build_quad_tree(5, 2, "chained"))):
        cfg = tmp_path / "code.yaml"
        cfg.write_text(json.dumps({"code": spec}))
        tree = tree_from_spec(spec)
        info = rng.integers(0, 2, (100, tree.k), dtype=np.uint8)
        values = " ".join(str(float(v)) for v in (1 - 2.0 * encode(tree, info)).ravel())
        status, out = _run(["decode", "--config", str(cfg), "--kind", "y", "--sigma", "0.5", "--seed", "0", values])
        assert status == 0
        got = [ln.split()[0][5:] for ln in out.splitlines()[1:]]
        assert got == ["".join(map(str, row)) for row in info]


def test_decode_lists_paths():
    status, out = _run(["decode", "-m", "3", "-r", "1", "-L", "3", "--list", "--seed", "0",
                        "0.9,0.8,0.7,0.9,0.6,0.9,0.8,0.7"])
    assert status == 0
    lines = out.splitlines()
    assert lines[1].startswith("info=0000 ")
    assert sum(ln.startswith("  path") for ln in lines) == 3


def test_config_echo_is_idempotent(tmp_path):
    argv = ["simulate", "-m", "4", "-r", "2", "-L", "2", "--grid", "1,3", "--trials", "600", "--chunk", "200",
            "--seed", "11"]
    status, first = _run(argv)
    assert status == 0
    saved = tmp_path / "echo.txt"
    saved.write_text(first.splitlines()[0] + "\n")
    _, second = _run(["simulate", "--config", str(saved)])
    assert second == first


def test_generated_seed_is_printed():
    _, out = _run(["info", "-m", "3", "-r", "1"])
    cfg = json.loads(out.splitlines()[0][len(ECHO_PREFIX):])
    assert isinstance(cfg["seed"], int)


def test_simulate_to_file(tmp_path):
    path = tmp_path / "out.csv"
    status, out = _run(["simulate", "-m", "3", "-r", "1", "--grid", "2", "--trials", "100", "--seed", "2",
                        "--out", str(path)])
    assert status == 0 and len(out.splitlines()) == 1
    assert path.read_text().startswith("# seed=2")


def test_check_ml_passes_unpruned():
    status, out = _run(["check-ml", "-m", "4", "-r", "1", "-L", "32", "--trials", "2000", "--seed", "1"])
    assert status == 0
    assert out.count("PASS") == 3


def test_check_ml_reports_disagreements():
    status, out = _run(["check-ml", "-m", "4", "-r", "2", "-L", "1", "--trials", "300", "--sigma", "1.0",
                        "--show", "2", "--seed", "3"])
    assert status == 1
    assert "FAIL" in out and out.count("  trial") == 2


def test_theory():
    status, out = _run(["theory", "-m", "7", "-r", "2", "--sigma", "1", "--seed", "0"])
    assert status == 0
    row = out.splitlines()[2].split(",")
    assert abs(float(row[3]) - 7.7e-9) < 1e-10


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["info", "-m", "3"],
        ["info", "-m", "3", "-r", "5"],
        ["info", "-m", "3", "-r", "1", "--colour"],
        ["encode", "-m", "3", "-r", "1", "--seed", "1", "012"],
        ["decode", "-m", "3", "-r", "1", "--seed", "1", "0.5,0.5"],
        ["decode", "-m", "3", "-r", "1", "--kind", "y", "--seed", "1", "1 1 1 1 1 1 1 1"],
        ["simulate", "-m", "3", "-r", "1", "--seed", "1"],
        ["info", "--config", "/nonexistent/c.yaml"],
    ],
)
def test_errors_exit_nonzero_with_one_line(argv, capsys):
    status, _ = _run(argv)
    assert status != 0
    err = capsys.readouterr().err
    assert err.startswith("rmlist: error:") and err.count("\n") == 1


def test_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("code: [unclosed\n")
    assert _run(["info", "--config", str(bad)])[0] != 0
    other = tmp_path / "other.yaml"
    other.write_text("command: simulate\n")
    assert _run(["info", "--config", str(other), "-m", "3", "-r", "1"])[0] != 0
    assert capsys.readouterr().err.count("\n") == 2

import csv
import io
import json

import pytest
from hypothesis import given, strategies as st

from forel_dynamics import __version__
from forel_dynamics.cli import RunConfig, main, map_params, parse_run_config
from forel_dynamics.errors import UsageError


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def error_record(err):
    return json.loads(err.strip().splitlines()[-1])


# --- regcheck -----------------------------------------------------------------

def test_regcheck_member():
    code, out, _ = run("regcheck", "shannon")
    assert code == 0
    doc = json.loads(out)
    assert doc["member"] is True and doc["metadata"]["version"] == __version__


def test_regcheck_euclidean_fails():
    code, out, err = run("regcheck", "hct:q=2")
    assert code == 1
    assert json.loads(out)["steep_at_zero"] is False
    assert error_record(err)["code"] == "not_member"


def test_regcheck_perturbed():
    assert run("regcheck", "perturbed:c=0.4167,d=0.11")[0] == 0


# --- map commands -------------------------------------------------------------

def test_stability_summary():
    code, out, err = run("stability", "perturbed:c=0.4167,d=0.11", "--a", "3.25", "--b", "0.61")
    assert code == 0
    assert err.startswith("attracting, multiplier=")
    assert "threshold=3.282596521" in err
    assert json.loads(out)["classification"] == "attracting"


def test_orbit_csv_converges():
    code, out, _ = run("orbit", "shannon", "--a", "2", "--b", "0.5", "--x0", "0.25", "--n", "100")
    assert code == 0
    lines = out.splitlines()
    assert any(line.startswith("#") and "shannon" in line for line in lines)
    rows = list(csv.reader(l for l in lines if not l.startswith("#")))
    assert rows[0] == ["k", "x", "y"]
    body = rows[1:]
    assert len(body) == 100
    assert abs(float(body[-1][1]) - 0.5) < 1e-10


def test_orbit_json_format():
    code, out, _ = run("orbit", "shannon", "--a", "2", "--b", "0.5", "--x0", "0.25", "--n", "5", "--format", "json")
    assert code == 0
    assert isinstance(json.loads(out), dict)


def test_game_parameters_convert():
    code, out, _ = run("stability", "shannon", "--alpha", "0.39", "--beta", "0.61", "--N", "100", "--epsilon", "0.05")
    assert code == 0
    meta = json.loads(out)["metadata"]
    assert meta["a"] == pytest.approx(5.0) and meta["b"] == 0.61


@pytest.mark.parametrize("argv", [
    ("cesaro", "perturbed", "--a", "3.25", "--b", "0.61", "--n", "10000"),
    ("critical", "perturbed", "--a", "3.25", "--b", "0.61"),
    ("entropy", "logbarrier", "--a", "150", "--b", "0.61", "--n-max", "8"),
    ("lyapunov", "shannon", "--a", "10", "--b", "0.5", "--n", "10000"),
    ("schwarzian", "logbarrier", "--a", "10", "--b", "0.61", "--grid", "50"),
    ("chaos-cert", "perturbed", "--a", "3.25", "--b", "0.61", "--power", "2", "--x0", "0.9559", "--x0", "0.956"),
])
def test_commands_emit_json_documents(argv):
    code, out, err = run(*argv)
    assert code == 0, err
    doc = json.loads(out)
    assert doc["metadata"]["command"] == argv[0]
    assert err.strip()


def test_output_file_takes_artifact(tmp_path):
    path = tmp_path / "crit.json"
    code, out, _ = run("critical", "perturbed", "--a", "3.25", "--b", "0.61", "--output", str(path))
    assert code == 0
    assert json.loads(path.read_text())["metadata"]["b"] == 0.61
    assert out.strip() and not out.startswith("{")


def test_bifurcate_with_comparison(tmp_path):
    data, cmp = tmp_path / "d.csv", tmp_path / "c.json"
    code, out, _ = run("bifurcate", "logbarrier", "--b", "0.61", "--a-min", "10", "--a-max", "30",
                       "--steps", "20", "--output", str(data), "--compare", str(cmp))
    assert code == 0
    assert "coexistence windows" in out
    assert data.read_text().count("\n") > 21 * 2 * 200
    assert set(json.loads(cmp.read_text())) == {"a_grid", "separation", "windows"}


# --- failures -----------------------------------------------------------------

@pytest.mark.parametrize("argv, parameter", [
    (("stability", "shannon", "--a", "3"), "b"),
    (("stability", "shannon", "--a", "3", "--b", "0.5", "--N", "10"), "a"),
    (("stability", "shannon", "--a", "-3", "--b", "0.5"), "a"),
    (("stability", "tsallis", "--a", "3", "--b", "0.5"), None),
    (("bifurcate", "shannon", "--b", "0.5", "--a-min", "4", "--a-max", "12", "--steps", "80"), "a_min"),
    (("orbit", "shannon", "--a", "2", "--b", "0.5"), "x0"),
    (("orbit", "shannon", "--a", "2", "--b", "0.5", "--x0", "0.2", "--format", "xml"), "format"),
])
def test_usage_errors_exit_two_with_record(argv, parameter):
    code, _, err = run(*argv)
    assert code == 2
    rec = error_record(err)
    assert {"code", "message"} <= set(rec)
    if parameter is not None:
        assert rec["parameter"] == parameter


def test_unknown_flag_is_usage_error():
    code, _, err = run("stability", "shannon", "--frobnicate", "1")
    assert code == 2 and error_record(err)["code"] == "usage"


def test_missing_command():
    assert run()[0] == 2


def test_numerical_failure_exits_one():
    code, _, err = run("chaos-cert", "shannon", "--a", "4", "--b", "0.5")
    assert code == 1
    assert error_record(err)["parameter"] == "power"


def test_verify_single_criterion(tmp_path):
    path = tmp_path / "report.json"
    code, out, _ = run("verify", "--criterion", "constants", "--output", str(path))
    assert code == 0
    assert out.splitlines()[0].split()[:3] == ["[PASS]", "1", "constants:"]
    assert json.loads(path.read_text())["results"][0]["passed"] is True


def test_verify_unknown_criterion():
    assert run("verify", "--criterion", "nonsense")[0] == 2


# --- configuration ------------------------------------------------------------

def test_config_file_with_flag_override(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# experiment\nregularizer = shannon\na = 2\nb = 0.5\nseeds = 0.25\nn = 10\n")
    cfg = parse_run_config(["orbit", "--config", str(path), "--a", "3"])
    assert cfg.a == 3.0 and cfg.b == 0.5 and cfg.seeds == [0.25] and cfg.regularizer == "shannon"
    assert run("orbit", "--config", str(path))[0] == 0


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run("orbit", "--config", str(bad))[0] == 2
    bad.write_text("just text\n")
    assert run("orbit", "--config", str(bad))[0] == 2
    assert run("orbit", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_parameterizations_are_exclusive():
    with pytest.raises(UsageError):
        map_params(RunConfig(a=1.0, b=0.5, alpha=0.5, beta=0.5, N=2, epsilon=1))
    with pytest.raises(UsageError):
        map_params(RunConfig(alpha=0.5, beta=0.5))
    assert map_params(RunConfig(alpha=0.5, beta=0.5, N=16, epsilon=0.5)).a == 8.0


finite = st.floats(allow_nan=False, allow_infinity=False)
maybe = lambda s: st.none() | s
configs = st.builds(
    RunConfig,
    command=st.sampled_from(["orbit", "bifurcate", "verify"]),
    regularizer=maybe(st.sampled_from(["shannon", "hct:q=0.5", "perturbed:c=0.4167,d=0.11"])),
    a=maybe(finite), b=maybe(finite), N=maybe(finite),
    seeds=st.lists(finite, max_size=3),
    transient=maybe(st.integers(0, 10**6)), keep=maybe(st.integers(1, 10**4)),
    output=maybe(st.from_regex(r"[a-z0-9_./]{1,12}", fullmatch=True)),
    steps=maybe(st.integers(1, 5000)), separation_threshold=maybe(finite),
    quick=st.booleans(),
    criteria=st.lists(st.sampled_from(["constants", "cesaro", "entropy"]), max_size=3),
)


@given(configs)
def test_config_text_round_trip(cfg):
    assert RunConfig.from_text(cfg.to_text()) == cfg

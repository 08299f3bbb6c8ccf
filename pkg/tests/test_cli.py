import csv
import json
from pathlib import Path

import numpy as np
import pytest

from layerdiff.cli import main
from layerdiff.config import ConfigError, Expression, config_to_dict, load_config, parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def load(name):
    return json.loads((CONFIGS / f"{name}.json").read_text())


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def single_layer(left, right):
    return {
        "schema_version": 1,
        "problem": {
            "layers": [{"left": 0, "right": 1, "D": 0.3}],
            "boundaries": {"left": left, "right": right},
        },
        "n": 8,
    }


def test_solve_case_e_auto(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["solve", "--config", str(CONFIGS / "case_e.json"), "--out", str(out)]) == 0
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["tau"] == pytest.approx(0.95 / 3600, rel=1e-12)
    assert meta["tau_auto"] and not meta["diverged"]
    assert meta["stability"]["stable"] and meta["stability"]["binding"] == "interface 1 (GII)"
    assert meta["N"] == 41 and meta["scheme"] == "forward_euler"
    header, rows = read_csv(out / "solution_1.csv")
    assert header == ["layer", "j", "x", "u"] and len(rows) == 42
    # snapped to a whole number of steps, recorded in the meta
    assert [s["file"] for s in meta["snapshots"]] == ["solution_0.05.csv", "solution_1.csv"]
    assert abs(meta["snapshots"][1]["t"] - 1.0) <= meta["tau"] / 2


def test_case_f_unstable_step_aborts(tmp_path, capsys):
    cfg = load("case_f")
    cfg["tau"] = 1.5625e-3
    path = write(tmp_path, cfg)
    assert main(["solve", "--config", path, "--out", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert "interface 1 (GII) bound 2.48e-05" in err
    assert main(["solve", "--config", path, "--out", str(tmp_path), "--allow-unstable"]) == 4
    meta = json.loads((tmp_path / "run_meta.json").read_text())
    assert meta["diverged"] and meta["stability"]["rho_forward"] == pytest.approx(87.146, abs=1e-3)


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda c: c["problem"].__setitem__("layers", []), "no layers"),
        (lambda c: c.__setitem__("schema_version", 7), "schema_version"),
        (lambda c: c["problem"]["layers"][0].__setitem__("initial", "__import__('os')"), "only numbers"),
        (lambda c: c.__setitem__("n", 1), "n must be"),
        (lambda c: c.__setitem__("tau", 3e-3), "not an integer multiple"),
        (lambda c: c["problem"]["interfaces"][0].__setitem__("kind", "VII"), "unknown interface kind"),
    ],
)
def test_config_errors(tmp_path, capsys, mutate, fragment):
    cfg = load("case_a")
    mutate(cfg)
    assert main(["solve", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 2
    assert fragment in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["steady", "--config", str(bad)]) == 2
    assert main(["steady", "--config", str(tmp_path / "missing.json")]) == 2


def test_stability_case_e(tmp_path, capsys):
    assert main(["stability", "--config", str(CONFIGS / "case_e.json"), "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "3.1250e-04" in text and "3.1250e-03" in text and "2.7778e-04" in text
    report = json.loads((tmp_path / "stability_report.json").read_text())
    assert report["binding"] == "interface 1 (GII)"
    assert report["spectral"]["stable_forward"]


def test_stability_case_f_ratio(tmp_path, capsys):
    assert main(["stability", "--config", str(CONFIGS / "case_f.json"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "stability_report.json").read_text())
    assert report["tau_max_table"] == pytest.approx(2.48e-5, rel=2e-3)
    assert report["classical_over_table"] == pytest.approx(63.0)


def test_stability_single_layer_neumann(tmp_path, capsys):
    cfg = single_layer({"a": 1, "b": 0, "c": 1}, {"a": 0, "b": 1, "c": 0})
    assert main(["stability", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "stability_report.json").read_text())
    rows = {b["label"]: b["note"] for b in report["bounds"]}
    assert rows["right boundary (Neumann)"] == "No additional restriction"


def test_steady_single_layer_linear(tmp_path, capsys):
    cfg = single_layer({"a": 1, "b": 0, "c": 1}, {"a": 1, "b": 0, "c": 0})
    assert main(["steady", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "steady.csv")
    x = np.array([float(r[2]) for r in rows])
    u = np.array([float(r[3]) for r in rows])
    assert np.allclose(u, 1 - x, atol=1e-12)


def test_steady_case_a_uniform(tmp_path, capsys):
    assert main(["steady", "--config", str(CONFIGS / "case_a.json"), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "steady.csv")
    u = np.array([float(r[3]) for r in rows])
    # zero flux on the right and Dirichlet 1 on the left: the steady state is u = 1
    assert np.allclose(u, 1.0)


def test_steady_case_a_kink_with_dirichlet(tmp_path, capsys):
    cfg = load("case_a")
    cfg["problem"]["boundaries"]["right"] = {"a": 1, "b": 0, "c": 0}
    assert main(["steady", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "steady.csv")
    layer = np.array([int(r[0]) for r in rows])
    x = np.array([float(r[2]) for r in rows])
    u = np.array([float(r[3]) for r in rows])
    s1 = np.diff(u[layer == 1]) / np.diff(x[layer == 1])
    s2 = np.diff(u[layer == 2]) / np.diff(x[layer == 2])
    assert np.allclose(s1, s1[0]) and np.allclose(s2, s2[0])
    assert s1[0] == pytest.approx(0.1 * s2[0])  # D1 s1 = D2 s2


def test_steady_case_c_jump(tmp_path, capsys):
    assert main(["steady", "--config", str(CONFIGS / "case_c.json"), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "steady.csv")
    at = {(int(r[0]), int(r[1])): float(r[3]) for r in rows}
    assert at[(1, 20)] / at[(2, 0)] == pytest.approx(1.2)


def test_convergence_single_h(tmp_path, capsys):
    cfg = load("case_a")
    cfg["study"] = {"h_list": [0.125], "t_eval": 0.01, "tau": 1e-3, "schemes": ["cn"]}
    assert main(["convergence", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "convergence.csv")
    assert len(rows) == 1 and rows[0][4] == ""


def test_convergence_ci_preset_case_a(tmp_path, capsys):
    assert main(["convergence", "--config", str(CONFIGS / "case_a.json"), "--out", str(tmp_path),
                 "--preset", "ci"]) == 0
    _, rows = read_csv(tmp_path / "convergence.csv")
    ratios = [float(r[4]) for r in rows if r[4]]
    assert len(ratios) == 9 and all(abs(r - 4) <= 0.5 for r in ratios)
    assert "Node spacing" in (tmp_path / "convergence.txt").read_text()


def test_deterministic_csv(tmp_path, capsys):
    for sub in ("one", "two"):
        assert main(["solve", "--config", str(CONFIGS / "case_b.json"), "--out", str(tmp_path / sub)]) == 0
    for name in ("solution_0.05.csv", "solution_0.2.csv"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()
    _, rows = read_csv(tmp_path / "one" / "solution_0.2.csv")
    assert max(len(r[3].replace("-", "").replace(".", "").lstrip("0").split("e")[0]) for r in rows) <= 12


@pytest.mark.parametrize("name", ["case_a", "case_b", "case_c", "case_d", "case_e", "case_f"])
def test_round_trip(name):
    cfg = parse_config(load(name))
    again = parse_config(config_to_dict(cfg))
    assert again.problem == cfg.problem
    assert again.problem.interface_origin == cfg.problem.interface_origin
    assert [l.initial for l in again.problem.layers] == [l.initial for l in cfg.problem.layers]
    assert config_to_dict(again) == config_to_dict(cfg)
    if name != "case_f":
        assert all("canonicalized_from" in i for i in config_to_dict(cfg)["problem"]["interfaces"])


def test_expression_grammar():
    f = Expression("(1 - x)^2 / 2 + -3")
    assert np.allclose(f(np.array([0.0, 1.0])), [-2.5, -3.0])
    assert Expression("2")(np.zeros(3)).tolist() == [2.0, 2.0, 2.0]
    for bad in ("sin(x)", "x.real", "y", "1 if x else 2", "'a'", "x +"):
        with pytest.raises(ConfigError):
            Expression(bad)


def test_initial_condition_flows_into_solution(tmp_path, capsys):
    cfg = single_layer({"a": 1, "b": 0, "c": 0}, {"a": 1, "b": 0, "c": 0})
    cfg["problem"]["layers"][0]["initial"] = "4*x*(1-x)"
    cfg.update(scheme="cn", tau=0.01, t_end=0.0, snapshots=[0.0])
    assert main(["solve", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "solution_0.csv")
    x = np.array([float(r[2]) for r in rows])
    u = np.array([float(r[3]) for r in rows])
    assert np.allclose(u[1:-1], (4 * x * (1 - x))[1:-1])


def test_load_config_preset_overrides():
    cfg = load_config(CONFIGS / "case_a.json", "paper")
    assert cfg.study.tau == 1e-7 and len(cfg.study.h_list) == 5

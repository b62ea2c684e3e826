import json

import numpy as np
import pytest

from hyperlsm.cli import EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED, EXIT_OK, main
from hyperlsm.formats import read_edge_list, read_embedding, read_report
from hyperlsm.model import log_likelihood

FAST = ["--prefit-dim", "0", "--candidate-iters", "20", "--max-iters", "100"]


def simulate(tmp_path, *extra, tag="s"):
    edges, emb, rep = (tmp_path / f"{tag}.{x}" for x in ("edges", "csv", "json"))
    code = main(["simulate", "--out-edges", str(edges), "--out-embedding", str(emb), "--out", str(rep), *extra])
    assert code == EXIT_OK
    return edges, emb, rep


def test_two_nodes_at_the_origin(tmp_path):
    edges, emb, _ = simulate(tmp_path, "--n", "2", "--radius", "0")
    assert edges.read_text().splitlines() == ["# nodes: 2", "0 1"]
    assert np.allclose(read_embedding(emb).Z[:, :-1], 0)


def test_same_seed_is_byte_identical(tmp_path):
    a = simulate(tmp_path, "--n", "40", "--seed", "3", tag="a")
    b = simulate(tmp_path, "--n", "40", "--seed", "3", tag="b")
    c = simulate(tmp_path, "--n", "40", "--seed", "4", tag="c")
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()
    assert a[0].read_bytes() != c[0].read_bytes()


def test_euclidean_simulation(tmp_path):
    _, emb, rep = simulate(tmp_path, "--n", "10", "--k", "0")
    assert not read_embedding(emb).is_hyperbolic
    assert read_report(rep)["geometry"] == "euclidean"


def test_fit_report_matches_embedding(tmp_path):
    edges, _, _ = simulate(tmp_path, "--n", "40", "--seed", "1")
    out, emb = tmp_path / "fit.json", tmp_path / "fit.csv"
    assert main(["fit", "--edges", str(edges), "--out", str(out), "--out-embedding", str(emb), *FAST]) == EXIT_OK
    rep = read_report(out)
    est = read_embedding(emb)
    assert rep["k"] == est.k
    assert rep["loglik"] == log_likelihood(est, read_edge_list(edges))
    assert rep["bic"] > rep["aic"]


def test_fit_euclidean_and_frozen(tmp_path):
    edges, _, _ = simulate(tmp_path, "--n", "30", "--seed", "1")
    out = tmp_path / "e.json"
    assert main(["fit", "--edges", str(edges), "--geometry", "euclidean", "--out", str(out), *FAST]) == EXIT_OK
    assert read_report(out)["k"] == 0.0
    assert main(["fit", "--edges", str(edges), "--freeze-k", "1.0", "--out", str(out), *FAST]) == EXIT_OK
    assert read_report(out)["k"] == 1.0


def test_config_file_and_override(tmp_path):
    edges, _, _ = simulate(tmp_path, "--n", "30", "--seed", "1")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"freeze_k": 2.0, "prefit_dim": 0, "candidate_iters": 20, "max_iters": 50}))
    out = tmp_path / "o.json"
    assert main(["fit", "--edges", str(edges), "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert read_report(out)["k"] == 2.0
    assert main(["fit", "--edges", str(edges), "--config", str(cfg), "--freeze-k", "0.5", "--out", str(out)]) == 0
    assert read_report(out)["k"] == 0.5


def test_stats(tmp_path, capsys):
    path = tmp_path / "path.edges"
    path.write_text("0 1\n1 2\n")
    assert main(["stats", "--edges", str(path)]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["diameter"] == 2 and rep["edges"] == 2


def test_eval_truth_against_itself(tmp_path):
    edges, emb, _ = simulate(tmp_path, "--n", "30", "--seed", "2")
    out = tmp_path / "eval.json"
    code = main(["eval", "--truth", str(emb), "--estimate", str(emb), "--edges", str(edges), "--out", str(out), *FAST])
    assert code == EXIT_OK
    rep = read_report(out)
    assert rep["delta_Z"] == rep["delta_Theta"] == rep["delta_P"] == rep["delta_K"] == 0.0
    assert 0.0 <= rep["auc"] <= 1.0


def test_bootstrap_commands(tmp_path):
    edges, _, _ = simulate(tmp_path, "--n", "25", "--seed", "2")
    out = tmp_path / "b.json"
    fast = [*FAST, "--max-iters", "30"]
    assert main(["test-curvature", "--edges", str(edges), "--bootstrap", "2", "--out", str(out), *fast]) == 0
    rep = read_report(out)
    assert rep["statistic"] >= 0 and rep["B"] + rep["failed"] == 2
    assert main(["ci", "--edges", str(edges), "--bootstrap", "20", "--out", str(out), *fast]) == 0
    lo, hi = read_report(out)["interval"]
    assert lo <= hi


def test_threads_from_environment(tmp_path, monkeypatch):
    edges, _, _ = simulate(tmp_path, "--n", "20")
    monkeypatch.setenv("HYPERLSM_THREADS", "zero")
    assert main(["test-curvature", "--edges", str(edges), "--bootstrap", "1", *FAST]) == EXIT_CONFIG


@pytest.mark.parametrize(
    "argv",
    [
        ["fit"],
        ["fit", "--edges", "x", "--geometry", "spherical"],
        ["fit", "--edges", "x", "--link", "probit"],
        ["ci", "--edges", "x", "--bootstrap", "5"],
        ["fit", "--edges", "x", "--freeze-k", "5000"],
        ["simulate", "--out-edges", "a", "--out-embedding", "b", "--k", "-1"],
        ["fit", "--edges", "x", "--max-iters", "0"],
    ],
)
def test_config_errors(argv):
    assert main(argv) == EXIT_CONFIG


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"learning_rate": 0.1}))
    assert main(["fit", "--edges", "x", "--config", str(cfg)]) == EXIT_CONFIG
    cfg.write_text("[1, 2]")
    assert main(["fit", "--edges", "x", "--config", str(cfg)]) == EXIT_CONFIG
    cfg.write_text(json.dumps({"max_iters": 1.5}))
    assert main(["fit", "--edges", "x", "--config", str(cfg)]) == EXIT_CONFIG


def test_unknown_flag_exits_with_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["fit", "--edges", "x", "--learning-rate", "1"])
    assert info.value.code == EXIT_CONFIG


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.edges"
    bad.write_text("0 1\n1 1\n")
    assert main(["stats", "--edges", str(bad)]) == EXIT_DATA
    assert "line 2" in capsys.readouterr().err
    assert main(["stats", "--edges", str(tmp_path / "missing")]) == EXIT_DATA


def test_eval_shape_mismatch(tmp_path):
    _, a, _ = simulate(tmp_path, "--n", "10", tag="a")
    _, b, _ = simulate(tmp_path, "--n", "12", tag="b")
    assert main(["eval", "--truth", str(a), "--estimate", str(b)]) == EXIT_DATA


def test_divergence_exit_code(tmp_path):
    edges, _, _ = simulate(tmp_path, "--n", "40", "--seed", "1")
    argv = ["fit", "--edges", str(edges), "--backtrack", "0", "--eta-z", "1e6", "--prefit-dim", "0"]
    assert main(argv) == EXIT_DIVERGED

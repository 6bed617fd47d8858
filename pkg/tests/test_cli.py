import json
import subprocess
import sys

import pytest

from mcpss.cli import EXIT_CONVERGENCE, EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from mcpss.ingest import Dataset, ProteinRecord, write_dataset

SMALL = ["--window-size", "9", "--k", "3", "--k-prime", "3", "--folds", "2"]


@pytest.fixture(scope="module")
def toy_file(toy_dataset, tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "toy.txt"
    write_dataset(toy_dataset, path)
    return path


def run(*argv):
    return main([str(a) for a in argv])


def test_train_then_predict(toy_file, toy_dataset, tmp_path, capsys):
    models = tmp_path / "models"
    assert run("train", toy_file, *SMALL, "-o", models) == EXIT_OK
    assert {p.name for p in models.iterdir()} >= {"fknn.npz", "svm.npz", "manifest.json", "config.json"}

    unlabeled = tmp_path / "q.fa"
    unlabeled.write_text("".join(f">{r.id}\n{r.sequence}\n" for r in toy_dataset))
    out = tmp_path / "pred"
    capsys.readouterr()
    assert run("predict", "--models", models, "--format", "fasta", unlabeled, "-o", out) == EXIT_OK
    printed = capsys.readouterr().out
    assert printed.count(">") == len(toy_dataset)
    rows = (out / "predictions.tsv").read_text().splitlines()
    assert len(rows) == 1 + toy_dataset.residue_count
    summary = json.loads((out / "run.json").read_text())
    assert summary["metrics"] is None
    assert json.loads((out / "config.json").read_text())["window_size"] == 9


def test_predict_replays_byte_identically(toy_file, tmp_path):
    models = tmp_path / "m"
    run("train", toy_file, *SMALL, "-o", models)
    for name in ("a", "b"):
        assert run("predict", "--models", models, toy_file, "-o", tmp_path / name) == EXIT_OK
    for f in ("predictions.tsv", "structures.txt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    a, b = (json.loads((tmp_path / n / "run.json").read_text()) for n in "ab")
    assert a["config"].pop("output_dir") != b["config"].pop("output_dir")
    assert a == b


def test_predict_rejects_model_changes(toy_file, tmp_path, capsys):
    run("train", toy_file, *SMALL, "-o", tmp_path / "m")
    assert run("predict", "--models", tmp_path / "m", "--k", "5", toy_file, "-o", tmp_path / "p") == EXIT_USAGE
    assert "k:" in capsys.readouterr().err


def test_no_filter_and_rule_choice_change_outputs(toy_file, tmp_path):
    models = tmp_path / "m"
    run("train", toy_file, *SMALL, "-o", models)
    outs = {}
    for tag, extra in {"r1": ["--aggregation", "1"], "r3": ["--aggregation", "3"],
                       "r3raw": ["--aggregation", "3", "--no-filter"]}.items():
        run("predict", "--models", models, toy_file, "-o", tmp_path / tag, *extra)
        outs[tag] = (tmp_path / tag / "structures.txt").read_text()
        assert json.loads((tmp_path / tag / "config.json").read_text())["aggregation"] == int(extra[1])
    assert outs["r1"] != outs["r3"]
    table = (tmp_path / "r3raw" / "predictions.tsv").read_text().splitlines()[1:]
    assert all(r.split("\t")[-1] == r.split("\t")[-2] for r in table)


def test_evaluate_kfold(toy_file, tmp_path, capsys):
    assert run("evaluate", toy_file, *SMALL, "-o", tmp_path) == EXIT_OK
    report = json.loads((tmp_path / "metrics.json").read_text())
    assert report["mode"] == "kfold"
    assert set(report["variants"]) == {"MCP5", "FKNN+LZ+rho_d+n-gram", "Edit-SVM"}
    assert len(report["variants"]["MCP5"]["folds"]) == 2
    assert "pooled over 2 folds" in capsys.readouterr().out


def test_evaluate_independent(toy_file, toy_dataset, tmp_path):
    test = tmp_path / "test.txt"
    write_dataset(Dataset(toy_dataset.records[:2], "t"), test)
    assert run("evaluate", toy_file, *SMALL, "--test-set", test, "-o", tmp_path / "o") == EXIT_OK
    assert json.loads((tmp_path / "o" / "metrics.json").read_text())["mode"] == "independent"


def test_ablate(toy_file, tmp_path, capsys):
    assert run("ablate", toy_file, *SMALL, "-o", tmp_path) == EXIT_OK
    lines = (tmp_path / "ablation.tsv").read_text().splitlines()
    assert [l.split("\t")[0] for l in lines[1:]] == [
        "FKNN+LZ", "FKNN+LZ+rho_d", "FKNN+LZ+rho_d+n-gram", "Edit-SVM",
        "MCP1", "MCP2", "MCP3", "MCP4", "MCP5",
    ]
    assert "MCP5" in capsys.readouterr().out


def test_sweep_breakpoint(toy_file, tmp_path):
    assert run("sweep-breakpoint", toy_file, *SMALL, "--draws", "2", "--aggregation", "2", "-o", tmp_path) == 0
    data = json.loads((tmp_path / "sweep.json").read_text())
    assert len(data["curve"]) == 9
    assert (tmp_path / "sweep.tsv").read_text().count("*") == 1


def test_sweep_needs_weighted_rule(toy_file, tmp_path):
    assert run("sweep-breakpoint", toy_file, *SMALL, "--aggregation", "1", "-o", tmp_path) == EXIT_USAGE


def test_config_file_and_env(toy_file, tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"window_size": 9, "k": 3, "k_prime": 3, "folds": 2, "seed": 11}))
    monkeypatch.setenv("MCPSS_SEED", "12")
    assert run("evaluate", toy_file, "--config", cfg, "-o", tmp_path / "o") == EXIT_OK
    assert json.loads((tmp_path / "o" / "config.json").read_text())["seed"] == 12


@pytest.mark.parametrize("argv, code", [
    (["evaluate", "{data}", "--window-size", "8"], EXIT_USAGE),
    (["evaluate", "{data}", "--svm-gamma", "0.5"], EXIT_USAGE),
    (["evaluate", "/nonexistent.txt"], EXIT_DATA),
    (["predict", "--models", "/nonexistent", "{data}"], EXIT_DATA),
])
def test_exit_codes(argv, code, toy_file, tmp_path):
    argv = [a.replace("{data}", str(toy_file)) for a in argv] + ["-o", str(tmp_path)]
    assert main(argv) == code


def test_malformed_input(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text(">p1\nACDEF\nHHHH\n")
    assert run("evaluate", bad, "-o", tmp_path) == EXIT_DATA


def test_non_convergence(toy_file, tmp_path):
    assert run("train", toy_file, *SMALL, "--svm-max-iter", "1", "-o", tmp_path) == EXIT_CONVERGENCE


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["train"])
    assert err.value.code == EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mcpss", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for command in ("train", "predict", "evaluate", "ablate", "sweep-breakpoint"):
        assert command in proc.stdout

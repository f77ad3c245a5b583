import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from spamstream.cli import main
from spamstream.features import read_users
from spamstream.stream import read_stream

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write_config(path: Path, doc: dict) -> Path:
    path.write_text(yaml.safe_dump(doc, sort_keys=False))
    return path


def drift_doc(out, **extra):
    doc = {"seed": 1, "output_dir": str(out), "algorithms": ["scw", "alma"],
           "stream": {"type": "flip_drift", "dim": 5, "n_per_class": 100, "separation": 1.5,
                      "noise_scale": 1.0, "seed": 2}}
    doc.update(extra)
    return doc


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_run_scw_alma_on_drift_stream(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.yaml", drift_doc(tmp_path / "out"))
    assert main(["run", str(cfg)]) == 0
    rows = (tmp_path / "out" / "report.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 2 * 20  # two runs, two phases, twenty checkpoints each
    assert "runs executed: 2" in capsys.readouterr().out


def test_generate_round_trips(tmp_path):
    doc = {"output_dir": str(tmp_path / "gen"),
           "stream": {"type": "synthetic", "dim": 3, "n_per_class": 20, "mean_pos": [1, 0, 0],
                      "mean_neg": [0, 1, 0], "noise_scale": 0.4, "seed": 4, "name": "toy"}}
    cfg = write_config(tmp_path / "g.yaml", doc)
    assert main(["generate", str(cfg)]) == 0
    path = tmp_path / "gen" / "toy.jsonl"
    back = read_stream(path, name="toy")
    assert len(back) == 40 and back.dim == 3
    from spamstream.stream import SyntheticSpec, generate_synthetic
    orig = generate_synthetic(SyntheticSpec(3, 20, (1, 0, 0), (0, 1, 0), 0.4, seed=4, name="toy"))
    assert back.examples == orig.examples


def test_generate_records_then_extract_and_ablate(tmp_path):
    out = tmp_path / "rec"
    gen = write_config(tmp_path / "g.yaml", {"output_dir": str(out), "stream": {
        "type": "synthetic_records", "n_per_class": 30, "seed": 2, "name": "pop"}})
    assert main(["generate", str(gen)]) == 0
    records = out / "pop.records.jsonl"
    assert len(read_users(records)) == 60
    ext = write_config(tmp_path / "e.yaml", {"output_dir": str(out), "combos": ["UN+UA"],
                                             "stream": {"type": "records", "path": str(records)}})
    assert main(["extract", str(ext)]) == 0
    extracted = read_stream(out / "pop.records.UN+UA.jsonl", dim=35)
    assert len(extracted) == 60 and all(max(ex.features, default=0) < 35 for ex in extracted)
    assert main(["ablate", str(ext), "--combos", "UP,UN+UA", "--algorithms", "scw"]) == 0
    assert len((out / "ablation.csv").read_text().splitlines()) == 1 + 2 * 20


def test_unknown_algorithm_exit_2(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.yaml", drift_doc(tmp_path / "out"))
    assert main(["run", str(cfg), "--algorithms", "scw,svm"]) == 2
    err = error_of(capsys)
    assert err["error"] == "unknown_algorithm" and err["token"] == "svm" and "svm" in err["message"]


def test_unknown_combo_exit_2(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.yaml", drift_doc(tmp_path / "out"))
    assert main(["ablate", str(cfg), "--combos", "UX"]) == 2
    assert error_of(capsys)["token"] == "UX"


@pytest.mark.parametrize("change", [{"colour": "teal"}, {"checkpoints": [50, 10]},
                                    {"n_parts": 0}, {"stream": {"type": "nope"}}])
def test_schema_violations_exit_2(tmp_path, capsys, change):
    cfg = write_config(tmp_path / "c.yaml", drift_doc(tmp_path / "out", **change))
    assert main(["run", str(cfg)]) == 2
    assert error_of(capsys)["error"] == "schema"


def test_missing_files_exit_1(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.yaml")]) == 1
    assert error_of(capsys)["error"] == "io"
    doc = {"output_dir": str(tmp_path), "stream": {"type": "examples", "path": "gone.jsonl"}}
    cfg = write_config(tmp_path / "c.yaml", doc)
    assert main(["run", str(cfg)]) == 1


def test_aborted_run_exit_3(tmp_path, capsys):
    lines = []
    for i in range(60):
        y = 1 if i % 3 != 1 else 0
        lines.append(json.dumps({"id": str(i), "features": {"0": 1.0}, "label": y}))
    (tmp_path / "s.jsonl").write_text("\n".join(lines) + "\n")
    doc = {"output_dir": str(tmp_path / "o"), "standardize": False, "n_parts": 2,
           "algorithms": [{"name": "cw", "hyperparameters": {"eta": 0.99}}],
           "stream": {"type": "examples", "path": "s.jsonl"}}
    cfg = write_config(tmp_path / "c.yaml", doc)
    assert main(["run", str(cfg)]) == 3
    assert error_of(capsys)["error"] == "run_aborted"


def test_outputs_idempotent_and_inputs_untouched(tmp_path):
    cfg = write_config(tmp_path / "c.yaml", drift_doc(tmp_path / "o1"))
    before = cfg.read_bytes()
    assert main(["run", str(cfg)]) == 0
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "o2")]) == 0
    for name in ("report.csv", "report_table.csv"):
        assert (tmp_path / "o1" / name).read_bytes() == (tmp_path / "o2" / name).read_bytes()
    assert cfg.read_bytes() == before


def test_overrides(tmp_path):
    cfg = write_config(tmp_path / "c.yaml", drift_doc(tmp_path / "o"))
    assert main(["run", str(cfg), "--checkpoints", "50,100", "--algorithms", "pa"]) == 0
    rows = (tmp_path / "o" / "report.csv").read_text().splitlines()
    assert len(rows) == 1 + 4 and rows[1].startswith("pa/")


def test_report_command_renders_table(tmp_path):
    cfg = write_config(tmp_path / "c.yaml", drift_doc(tmp_path / "o", baselines=["train_once"]))
    assert main(["run", str(cfg)]) == 0
    assert main(["report", str(cfg), "--input", str(tmp_path / "o" / "report.csv")]) == 0
    table = (tmp_path / "o" / "table.csv").read_bytes()
    assert table == (tmp_path / "o" / "report_table.csv").read_bytes()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    doc = drift_doc(tmp_path)
    del doc["output_dir"]
    cfg = write_config(tmp_path / "c.yaml", doc)
    monkeypatch.setenv("SPAMSTREAM_OUT", str(tmp_path / "env"))
    assert main(["run", str(cfg), "--algorithms", "pa"]) == 0
    assert (tmp_path / "env" / "report.csv").exists()


def test_bundled_configs_parse():
    from spamstream.harness.config import load_config
    for path in CONFIGS.glob("*.yaml"):
        load_config(path)
    full = load_config(CONFIGS / "drift_comparison.yaml")
    assert len(full.algorithms) == 16 and len(full.baselines) == 2


def test_console_entry_point(tmp_path):
    cfg = write_config(tmp_path / "c.yaml", drift_doc(tmp_path / "o"))
    proc = subprocess.run([sys.executable, "-m", "spamstream.cli", "run", str(cfg),
                           "--algorithms", "svm"], capture_output=True, text=True)
    assert proc.returncode == 2 and "svm" in proc.stderr

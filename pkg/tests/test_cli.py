import json

import numpy as np
import pytest

from qsurf import surface_from_document, transfer_surface
from qsurf.cli import main

GAUSS_CFG = {"kind": "gaussian", "dims": 2, "mean": [0.0, 0.0],
             "cov": [[1.0, 0.0], [0.0, 1.0]]}


@pytest.fixture()
def sample_csv(tmp_path):
    model = tmp_path / "model.json"
    model.write_text(json.dumps(GAUSS_CFG))
    out = tmp_path / "data.csv"
    assert main(["simulate", "--model", str(model), "--n", "2000", "--seed", "1",
                 "--out", str(out)]) == 0
    return out


def test_simulate_deterministic(tmp_path, sample_csv):
    again = tmp_path / "again.csv"
    main(["simulate", "--model", json.dumps(GAUSS_CFG), "--n", "2000", "--seed", "1",
          "--out", str(again)])
    assert again.read_bytes() == sample_csv.read_bytes()


def test_surface_runs_and_is_byte_stable(tmp_path, sample_csv):
    out1, out2 = tmp_path / "s1.json", tmp_path / "s2.json"
    argv = ["surface", "--data", str(sample_csv), "--o", "0,0", "--alpha", "0.7",
            "--directions", "36"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    doc = json.loads(out1.read_text())
    assert len(doc["entries"]) == 36


def test_cli_transfer_equals_surface_at_new_observer(tmp_path, sample_csv):
    s_at_o = tmp_path / "o.json"
    s_at_o2 = tmp_path / "o2.json"
    base = ["surface", "--data", str(sample_csv), "--alpha", "0.8",
            "--directions", "24"]
    assert main(base + ["--o", "0,0", "--out", str(s_at_o)]) == 0
    assert main(base + ["--o", "1.5,0.5", "--out", str(s_at_o2)]) == 0
    moved = transfer_surface(
        surface_from_document(json.loads(s_at_o.read_text())), [1.5, 0.5]
    )
    fresh = surface_from_document(json.loads(s_at_o2.read_text()))
    assert np.abs(moved.y - fresh.y).max() <= 1e-12


def test_band_command(tmp_path, sample_csv):
    out = tmp_path / "band.json"
    assert main(["band", "--data", str(sample_csv), "--o", "0,0", "--alpha", "0.8",
                 "--level", "0.9", "--draws", "150", "--seed", "4",
                 "--directions", "24", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["level"] == 0.9 and len(doc["halfwidth"]) == 24


def test_tukey_command(tmp_path, sample_csv, capsys):
    assert main(["tukey", "--data", str(sample_csv), "--alpha", "0.8",
                 "--directions", "24"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["empty"] is False


def test_psi_command(tmp_path, sample_csv, capsys):
    assert main(["psi", "--data", str(sample_csv), "--eps", "0.05",
                 "--directions", "36"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["psi"] >= 0


def test_domain_error_exit_code_1(sample_csv, capsys):
    assert main(["surface", "--data", str(sample_csv), "--o", "0,0",
                 "--alpha", "1.2"]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_required_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["surface", "--o", "0,0", "--alpha", "0.7"])
    assert exc.value.code == 2


def test_unknown_flag_exits_2(sample_csv):
    with pytest.raises(SystemExit) as exc:
        main(["surface", "--data", str(sample_csv), "--o", "0,0",
              "--alpha", "0.7", "--bogus", "1"])
    assert exc.value.code == 2


def test_missing_data_file_exit_1(tmp_path, capsys):
    assert main(["surface", "--data", str(tmp_path / "nope.csv"), "--o", "0,0",
                 "--alpha", "0.7"]) == 1
    assert "error" in capsys.readouterr().err


def test_verify_command_bk_report(tmp_path, sample_csv):
    cfg = {
        "study": "bk",
        "model": GAUSS_CFG,
        "n_grid": [400, 2000],
        "replications": 4,
        "directions": 12,
        "delta": [0.6, 0.9],
        "alpha_steps": 5,
        "seed": 7,
        "threads": 1,
    }
    cfg_path = tmp_path / "study.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "report.csv"
    assert main(["verify", "--study", "bk", "--config", str(cfg_path),
                 "--out", str(out)]) == 0
    text = out.read_text().splitlines()
    assert text[0] == "study,n,rep,stat,value,reference,seed,config_hash"
    assert any(",bk_ratio," in line for line in text)
    # byte-identical rerun
    out2 = tmp_path / "report2.csv"
    main(["verify", "--study", "bk", "--config", str(cfg_path), "--out", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_surface_files_nest_across_levels(tmp_path):
    # the two-gaussian reference mixture, central observer, four levels:
    # the resulting contours must be nested (y grows with alpha everywhere)
    from qsurf import paper_mixture

    model = tmp_path / "mixture.json"
    model.write_text(json.dumps(paper_mixture().to_config()))
    data = tmp_path / "mix.csv"
    assert main(["simulate", "--model", str(model), "--n", "20000", "--seed", "2",
                 "--out", str(data)]) == 0
    ys = []
    for alpha in ("0.6", "0.7", "0.8", "0.9"):
        out = tmp_path / f"s{alpha}.json"
        assert main(["surface", "--data", str(data), "--o", "0,0",
                     "--alpha", alpha, "--directions", "90",
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        ys.append([e["y"] for e in doc["entries"]])
    ys = np.array(ys)
    assert np.all(np.diff(ys, axis=0) >= 0)


def test_cli_echoes_resolved_config(sample_csv, capsys, tmp_path):
    main(["surface", "--data", str(sample_csv), "--o", "0,0", "--alpha", "0.7",
          "--out", str(tmp_path / "x.json")])
    err = capsys.readouterr().err
    assert "qsurf surface:" in err and "alpha" in err

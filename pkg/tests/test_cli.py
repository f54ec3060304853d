"""CLI surface: subcommands produce their documented files and exit codes."""

import json

import numpy as np
import pytest

from layerkit.cli import main
from layerkit.raster import load_png, save_png


def checker(size=64):
    img = (np.indices((size, size)).sum(axis=0) // 8 % 2).astype(np.float64)
    return np.stack([img, img, img], axis=-1)


class TestCannyCommand:
    def test_writes_edge_map(self, tmp_path, capsys):
        src = tmp_path / "in.png"
        out = tmp_path / "out.png"
        save_png(checker(), src)
        assert main(["canny", "--sigma", "1.4", "--low", "0.1", "--high", "0.3",
                     str(src), str(out)]) == 0
        edge = load_png(out)
        assert set(np.unique(edge)) <= {0.0, 1.0}
        assert edge.sum() > 0


class TestDeriveMaskCommand:
    def test_accept_and_reject_paths(self, tmp_path):
        rng = np.random.default_rng(0)
        src = np.clip(rng.normal(0.5, 0.05, (128, 128, 3)), 0, 1)
        edited = src.copy()
        edited[32:64, 32:64] = 1.0 - edited[32:64, 32:64]
        src_p, edited_p = tmp_path / "src.png", tmp_path / "edited.png"
        save_png(src, src_p)
        save_png(edited, edited_p)
        mask_p = tmp_path / "mask.png"
        report_p = tmp_path / "report.json"
        code = main(["derive-mask", "--src", str(src_p), "--edited", str(edited_p),
                     "--out-mask", str(mask_p), "--report", str(report_p)])
        assert code == 0
        report = json.loads(report_p.read_text())
        assert report["decision"] == "accepted"
        assert mask_p.exists()
        # identical pair -> rejection, exit code 2, no mask written
        same_p = tmp_path / "same.png"
        save_png(src, same_p)
        code = main(["derive-mask", "--src", str(src_p), "--edited", str(same_p),
                     "--out-mask", str(tmp_path / "m2.png"),
                     "--report", str(tmp_path / "r2.json")])
        assert code == 2
        assert json.loads((tmp_path / "r2.json").read_text())["reason"] == "no-change"
        assert not (tmp_path / "m2.png").exists()


class TestEvalCommand:
    def test_report_written(self, tmp_path):
        pred_dir, ref_dir = tmp_path / "pred", tmp_path / "ref"
        pred_dir.mkdir()
        ref_dir.mkdir()
        rng = np.random.default_rng(1)
        for i in range(3):
            img = rng.random((16, 16, 3))
            save_png(img, ref_dir / f"{i}.png")
            save_png(np.clip(img + 0.05, 0, 1), pred_dir / f"{i}.png")
        report_p = tmp_path / "metrics.json"
        assert main(["eval", "--pred-dir", str(pred_dir), "--ref-dir", str(ref_dir),
                     "--report", str(report_p)]) == 0
        report = json.loads(report_p.read_text())
        assert report["image_count"] == 3
        assert 0 < report["l1"] < 0.2


class TestBuildDatasetCommand:
    def test_color_pipeline(self, tmp_path):
        input_dir = tmp_path / "inputs"
        (input_dir / "images").mkdir(parents=True)
        rng = np.random.default_rng(2)
        for i in range(3):
            save_png(rng.random((32, 32, 3)), input_dir / "images" / f"img{i}.png")
        out_dir = tmp_path / "out"
        assert main(["build-dataset", "--pipeline", "color", "--input-dir", str(input_dir),
                     "--out-dir", str(out_dir), "--seed", "3"]) == 0
        manifest = out_dir / "manifest.jsonl"
        assert manifest.exists()
        assert main(["validate-manifest", str(manifest)]) == 0
        assert main(["replay-check", str(manifest)]) == 0

    def test_config_file(self, tmp_path):
        input_dir = tmp_path / "inputs"
        (input_dir / "images").mkdir(parents=True)
        (input_dir / "masks").mkdir(parents=True)
        rng = np.random.default_rng(3)
        img = rng.random((48, 48, 3))
        mask = np.zeros((48, 48))
        mask[10:30, 10:30] = 1.0
        save_png(img, input_dir / "images" / "a.png")
        save_png(mask, input_dir / "masks" / "a.png")
        config_p = tmp_path / "config.toml"
        config_p.write_text("augment_probability = 1.0\n")
        out_dir = tmp_path / "out"
        assert main(["build-dataset", "--pipeline", "content", "--input-dir", str(input_dir),
                     "--out-dir", str(out_dir), "--config", str(config_p)]) == 0


class TestTrainToyCommand:
    def test_tiny_training_run(self, tmp_path):
        out = tmp_path / "ckpt.npz"
        loss_csv = tmp_path / "loss.csv"
        assert main(["train-toy", "--steps", "3", "--batch-size", "2", "--seed", "1",
                     "--out", str(out), "--loss-csv", str(loss_csv)]) == 0
        assert out.exists()
        lines = loss_csv.read_text().strip().splitlines()
        assert lines[0] == "step,loss" and len(lines) == 4
        from layerkit.model import load_checkpoint

        model = load_checkpoint(out)
        assert model.config.d_model == 64


class TestExportOpenapi:
    def test_writes_spec(self, tmp_path):
        out = tmp_path / "openapi.json"
        assert main(["export-openapi", "--out", str(out)]) == 0
        spec = json.loads(out.read_text())
        assert "/sessions/{session_id}/generate" in spec["paths"]

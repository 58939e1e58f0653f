"""CLI contracts: flags, exit codes, file outputs, stdout discipline."""

import json

import numpy as np
import pytest
import torch

from cams.cli import main
from cams.imaging import DTYPE, load_image, save_image
from cams.palette import Palette, merge_palettes

from conftest import make_two_style_pair
from test_palette import quadrant_image


@pytest.fixture
def pair_files(tmp_path):
    content, style = make_two_style_pair(48, 48)
    cp = tmp_path / "content.png"
    sp = tmp_path / "style.png"
    save_image(content, cp)
    save_image(style, sp)
    return cp, sp


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTransferCommand:
    def test_minimal_invocation_writes_artifacts(self, pair_files, tmp_path, capsys):
        cp, sp = pair_files
        out = tmp_path / "result.png"
        code, stdout, _ = run_cli(
            [
                "transfer", "--content", str(cp), "--style", str(sp), "--out", str(out),
                "--backbone", "tiny", "--iters", "3",
            ],
            capsys,
        )
        assert code == 0
        assert out.exists()
        assert (tmp_path / "result.png.losses.jsonl").exists()
        assert (tmp_path / "result.png.palettes.json").exists()
        assert (tmp_path / "result.png.run.json").exists()
        assert stdout.strip() == str(out)

    def test_manual_without_assoc_is_usage_error(self, pair_files, tmp_path, capsys):
        cp, sp = pair_files
        with pytest.raises(SystemExit) as excinfo:
            main(
                [
                    "transfer", "--content", str(cp), "--style", str(sp),
                    "--out", str(tmp_path / "x.png"), "--mode", "manual", "--backbone", "tiny",
                ]
            )
        assert excinfo.value.code == 2
        assert "--assoc" in capsys.readouterr().err

    def test_run_json_materializes_defaults(self, pair_files, tmp_path, capsys):
        cp, sp = pair_files
        out = tmp_path / "r.png"
        code, _, _ = run_cli(
            [
                "transfer", "--content", str(cp), "--style", str(sp), "--out", str(out),
                "--backbone", "tiny", "--iters", "2",
            ],
            capsys,
        )
        assert code == 0
        meta = json.loads((tmp_path / "r.png.run.json").read_text())
        assert meta["iterations"] == 2
        assert meta["learning_rate"] == 0.5
        assert meta["weights"]["alpha"] == 1.0
        assert meta["weights"]["beta"] == 1.0e4
        assert meta["sigma"] == 0.275
        assert meta["palette_k"] == 5
        assert meta["mode"] == "auto"
        assert meta["seed"] == 0

    def test_explicit_recommended_flags_echoed(self, pair_files, tmp_path, capsys):
        cp, sp = pair_files
        out = tmp_path / "r.png"
        code, _, _ = run_cli(
            [
                "transfer", "--content", str(cp), "--style", str(sp), "--out", str(out),
                "--backbone", "tiny", "--iters", "2", "--lr", "0.5",
                "--alpha", "1", "--beta", "1e4",
            ],
            capsys,
        )
        assert code == 0
        meta = json.loads((tmp_path / "r.png.run.json").read_text())
        assert meta["learning_rate"] == 0.5
        assert meta["weights"]["alpha"] == 1.0
        assert meta["weights"]["beta"] == 1.0e4

    def test_manual_mode_with_assoc_file(self, pair_files, tmp_path, capsys):
        cp, sp = pair_files
        assoc = tmp_path / "assoc.json"
        assoc.write_text(json.dumps({"pairs": [[0, 1], [1, 0]], "discard_content": [], "discard_style": []}))
        out = tmp_path / "manual.png"
        code, _, _ = run_cli(
            [
                "transfer", "--content", str(cp), "--style", str(sp), "--out", str(out),
                "--backbone", "tiny", "--iters", "3", "--mode", "manual", "--assoc", str(assoc),
            ],
            capsys,
        )
        assert code == 0
        assert out.exists()

    def test_baseline_flag_runs_classic(self, pair_files, tmp_path, capsys):
        cp, sp = pair_files
        out = tmp_path / "base.png"
        code, _, _ = run_cli(
            [
                "transfer", "--content", str(cp), "--style", str(sp), "--out", str(out),
                "--backbone", "tiny", "--iters", "2", "--baseline",
            ],
            capsys,
        )
        assert code == 0
        rows = [json.loads(l) for l in (tmp_path / "base.png.losses.jsonl").read_text().splitlines()]
        assert "style" in rows[0] and "cams" not in rows[0]

    def test_snapshots_directory(self, pair_files, tmp_path, capsys):
        cp, sp = pair_files
        out = tmp_path / "s.png"
        snap = tmp_path / "snaps"
        code, _, _ = run_cli(
            [
                "transfer", "--content", str(cp), "--style", str(sp), "--out", str(out),
                "--backbone", "tiny", "--iters", "4", "--snapshot-every", "2",
                "--snapshots", str(snap),
            ],
            capsys,
        )
        assert code == 0
        names = sorted(p.name for p in snap.iterdir())
        assert "iter_00000.png" in names

    def test_missing_content_file_is_runtime_error(self, tmp_path, capsys):
        code, _, err = run_cli(
            [
                "transfer", "--content", str(tmp_path / "ghost.png"), "--style", str(tmp_path / "ghost.png"),
                "--out", str(tmp_path / "o.png"), "--backbone", "tiny",
            ],
            capsys,
        )
        assert code == 3
        assert "ghost.png" in err


class TestPaletteCommand:
    def test_solid_image_prints_one_hex_with_warning(self, tmp_path, capsys):
        img = torch.zeros(8, 8, 3, dtype=DTYPE)
        img[..., 0] = 1.0
        p = tmp_path / "red.png"
        save_image(img, p)
        code, stdout, err = run_cli(["palette", "--image", str(p), "--k", "5"], capsys)
        assert code == 0
        lines = stdout.strip().splitlines()
        assert lines == ["#ff0000 64"]
        assert "5" in err and "1" in err  # degenerate warning names counts

    def test_quadrant_image_k5_prints_four(self, tmp_path, capsys):
        p = tmp_path / "quad.png"
        save_image(quadrant_image(32), p)
        code, stdout, err = run_cli(["palette", "--image", str(p), "--k", "5"], capsys)
        assert code == 0
        lines = stdout.strip().splitlines()
        assert len(lines) == 4
        hexes = {l.split()[0] for l in lines}
        assert hexes == {"#ff0000", "#00ff00", "#0000ff", "#ffffff"}
        assert "warning" in err

    def test_json_roundtrips_through_merge(self, tmp_path, capsys):
        p = tmp_path / "quad.png"
        save_image(quadrant_image(32), p)
        out_json = tmp_path / "pal.json"
        code, _, _ = run_cli(["palette", "--image", str(p), "--k", "4", "--json", str(out_json)], capsys)
        assert code == 0
        pal = Palette.from_json(out_json.read_text())
        merged = merge_palettes(pal, pal, 0.08)
        assert len(merged) == len(pal)

    def test_swatch_strip_written(self, tmp_path, capsys):
        p = tmp_path / "quad.png"
        save_image(quadrant_image(32), p)
        strip = tmp_path / "strip.png"
        code, _, _ = run_cli(["palette", "--image", str(p), "--k", "4", "--swatch", str(strip)], capsys)
        assert code == 0
        img = load_image(strip)
        assert img.shape == (32, 32 * 4, 3)


class TestEvaluateCommand:
    def test_identical_triple_prints_zeros(self, pair_files, tmp_path, capsys):
        cp, _ = pair_files
        code, stdout, _ = run_cli(
            [
                "evaluate", "--output", str(cp), "--content", str(cp), "--style", str(cp),
                "--backbone", "tiny",
            ],
            capsys,
        )
        assert code == 0
        values = dict(line.split("=") for line in stdout.strip().splitlines())
        assert float(values["color_aware"]) <= 1e-6
        assert float(values["style"]) <= 1e-6
        assert float(values["content"]) <= 1e-6

    def test_missing_file_exit_3_with_path(self, tmp_path, capsys):
        missing = tmp_path / "absent.png"
        code, _, err = run_cli(
            ["evaluate", "--output", str(missing), "--content", str(missing), "--style", str(missing), "--backbone", "tiny"],
            capsys,
        )
        assert code == 3
        assert "absent.png" in err

    def test_batch_triples_directory(self, pair_files, tmp_path, capsys):
        cp, sp = pair_files
        root = tmp_path / "triples"
        for name in ("case_a", "case_b"):
            d = root / name
            d.mkdir(parents=True)
            for role, src in (("output", cp), ("content", cp), ("style", sp)):
                (d / f"{role}.png").write_bytes(src.read_bytes())
        csv_path = tmp_path / "summary.csv"
        code, _, _ = run_cli(
            ["evaluate", "--triples", str(root), "--csv", str(csv_path), "--backbone", "tiny"],
            capsys,
        )
        assert code == 0
        rows = csv_path.read_text().strip().splitlines()
        assert rows[0] == "name,color_aware,style,content,wall_time_s"
        assert len(rows) == 3
        assert rows[1].startswith("case_a,") and rows[2].startswith("case_b,")
        assert (root / "case_a" / "report.json").exists()

    def test_single_mode_requires_all_three(self, pair_files, capsys):
        cp, _ = pair_files
        with pytest.raises(SystemExit) as excinfo:
            main(["evaluate", "--output", str(cp), "--backbone", "tiny"])
        assert excinfo.value.code == 2


class TestWeightsResolution:
    def test_env_var_fallback_for_weights(self, tmp_path, capsys, monkeypatch):
        import torch as _torch

        from test_features import _random_vgg19_state_dict

        weights = tmp_path / "vgg.pth"
        _torch.save(_random_vgg19_state_dict(seed=9), weights)
        monkeypatch.setenv("CAMS_WEIGHTS", str(weights))
        content, style = make_two_style_pair(48, 48)
        cp, sp = tmp_path / "c.png", tmp_path / "s.png"
        save_image(content, cp)
        save_image(style, sp)
        code, stdout, _ = run_cli(
            ["evaluate", "--output", str(cp), "--content", str(cp), "--style", str(sp)],
            capsys,
        )
        assert code == 0
        values = dict(line.split("=") for line in stdout.strip().splitlines())
        assert float(values["content"]) == 0.0

    def test_missing_weights_is_runtime_error(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("CAMS_WEIGHTS", raising=False)
        content, _ = make_two_style_pair(48, 48)
        cp = tmp_path / "c.png"
        save_image(content, cp)
        code, _, err = run_cli(
            ["evaluate", "--output", str(cp), "--content", str(cp), "--style", str(cp)],
            capsys,
        )
        assert code == 3
        assert "CAMS_WEIGHTS" in err


class TestMaskDump:
    def test_mask_pngs_written(self, pair_files, tmp_path, capsys):
        cp, sp = pair_files
        out = tmp_path / "m.png"
        dump = tmp_path / "masks"
        code, _, _ = run_cli(
            [
                "transfer", "--content", str(cp), "--style", str(sp), "--out", str(out),
                "--backbone", "tiny", "--iters", "2", "--k", "2", "--mask-dump", str(dump),
            ],
            capsys,
        )
        assert code == 0
        names = sorted(p.name for p in dump.iterdir())
        assert any(n.startswith("mask_style_") for n in names)
        assert any(n.startswith("mask_generated_") for n in names)


class TestStdoutDiscipline:
    def test_transfer_stdout_is_only_the_output_path(self, pair_files, tmp_path):
        import subprocess
        import sys

        cp, sp = pair_files
        out = tmp_path / "clean.png"
        proc = subprocess.run(
            [
                sys.executable, "-m", "cams.cli", "transfer",
                "--content", str(cp), "--style", str(sp), "--out", str(out),
                "--backbone", "tiny", "--iters", "2",
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.strip() == str(out)

import json

import numpy as np
import pytest
from click.testing import CliRunner

import bsrecon as bs
from bsrecon.cli import main

from conftest import band_limited_truth


runner = CliRunner()


def run(*args):
    return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)


@pytest.fixture
def img32(tmp_path):
    zone = bs.build_zone_mask(bs.fit_shape_to_fraction("rectangle", 0.25,
                                                       H=32, W=32), 32, 32)
    truth = band_limited_truth(32, 32, zone, seed=20, natural_decay=True)
    p = tmp_path / "img.pgm"
    bs.write_pgm(truth, p)
    return p


class TestAnalyze:
    def test_constant_image_no_apodize(self, tmp_path):
        p = tmp_path / "c.pgm"
        bs.write_pgm(np.full((64, 64), 128.0), p)
        r = run("analyze", p, "--energy", 0.995, "--no-apodize")
        assert r.exit_code == 0
        out = json.loads(r.output)
        assert out["zone_coefficients"] == 1

    def test_rms_mode_matches_library(self, img32, tmp_path):
        r = run("analyze", img32, "--rms-target", 5.0,
                "--map", tmp_path / "m.pgm", "--csv", tmp_path / "k.csv")
        assert r.exit_code == 0
        out = json.loads(r.output)
        rep = bs.sparse_spectrum(bs.read_pgm(img32), 5.0)
        assert out["K"] == rep.K
        dots = bs.read_pgm(tmp_path / "m.pgm") > 127
        assert np.count_nonzero(dots) == rep.K
        lines = (tmp_path / "k.csv").read_text().splitlines()
        assert lines[1] == "row,col,energy"
        assert len(lines) == rep.K + 2

    def test_missing_mode_errors(self, img32):
        r = runner.invoke(main, ["analyze", str(img32)])
        assert r.exit_code != 0


class TestFitzone:
    def test_fraction_mode(self, tmp_path):
        out = tmp_path / "mask.pgm"
        r = run("fitzone", "--shape", "ellipse", "--fraction", 0.25,
                "--height", 64, "--width", 64, "--out", out)
        assert r.exit_code == 0
        meta = json.loads(r.output)
        mask = bs.read_pgm(out) > 127
        frac = np.count_nonzero(mask) / mask.size
        assert frac == pytest.approx(meta["achieved_fraction"])
        assert frac == pytest.approx(0.25, abs=0.01)

    def test_failure_removes_output(self, tmp_path):
        out = tmp_path / "mask.pgm"
        r = runner.invoke(main, ["fitzone", "--out", str(out)])
        assert r.exit_code != 0
        assert not out.exists()


class TestSampleReconstruct:
    def test_end_to_end(self, img32, tmp_path):
        csvp, maskp, outp = (tmp_path / n for n in ("s.csv", "m.pgm", "r.pgm"))
        r = run("sample", img32, "--grid", "jitter", "--fraction", 0.25,
                "--multiplier", 1.3, "--seed", 7, "--out", csvp)
        assert r.exit_code == 0
        assert json.loads(r.output)["M"] == int(round(1.3 * 0.25 * 1024))
        assert run("fitzone", "--shape", "rectangle", "--fraction", 0.25,
                   "--height", 32, "--width", 32, "--out", maskp).exit_code == 0
        r = run("reconstruct", csvp, "--mask", maskp, "--iters", 1500,
                "--stop-delta", 1e-6, "--truth", img32, "--out", outp)
        assert r.exit_code == 0
        res = json.loads(r.output)
        assert res["rms"] < 3.0  # output is quantized to 8 bits
        assert outp.exists()

    def test_bad_count(self, img32, tmp_path):
        out = tmp_path / "s.csv"
        r = runner.invoke(main, ["sample", str(img32), "--count", "0",
                                 "--out", str(out)])
        assert r.exit_code == 1
        assert not out.exists()


class TestPipeline:
    def test_outputs_and_summary(self, img32, tmp_path):
        prefix = tmp_path / "run"
        r = run("pipeline", img32, "--shape", "rectangle", "--fraction", 0.25,
                "--grid", "jitter", "--multiplier", 1.3, "--iters", 300,
                "--trace", "--out-prefix", prefix)
        assert r.exit_code == 0
        for suffix in ("samples.csv", "mask.pgm", "recon.pgm", "errmap.pgm",
                       "trace.csv"):
            assert (tmp_path / f"run_{suffix}").exists()
        lines = r.output.strip().splitlines()
        summary = json.loads(lines[0])
        header, values = lines[1].split(","), lines[2].split(",")
        assert header == list(summary)
        # CSV row repeats the JSON values verbatim
        for k, v in zip(header, values):
            assert float(v) == pytest.approx(summary[k])
        assert summary["overall_redundancy"] == pytest.approx(
            summary["sampling_redundancy"] * summary["ec_zone_redundancy"])

    def test_noise_flag_changes_samples(self, img32, tmp_path):
        outs = []
        for name, extra in [("a", []), ("b", ["--add-noise", "5"])]:
            prefix = tmp_path / name
            assert run("pipeline", img32, "--shape", "rectangle", "--fraction",
                       0.25, "--iters", 5, "--out-prefix", prefix,
                       *extra).exit_code == 0
            outs.append((tmp_path / f"{name}_samples.csv").read_text())
        assert outs[0] != outs[1]


class TestInpaint:
    def test_identity_when_nothing_occluded(self, img32, tmp_path):
        occ = tmp_path / "occ.pgm"
        bs.write_pgm(np.full((32, 32), 255.0), occ)
        outp = tmp_path / "out.pgm"
        r = run("inpaint", img32, "--occlusion", occ, "--shape", "rectangle",
                "--fraction", 0.25, "--iters", 5, "--out", outp)
        assert r.exit_code == 0
        # everything observed: output reproduces the input byte for byte
        assert outp.read_bytes() == img32.read_bytes()


class TestSpecrecon:
    def test_rate_and_output(self, img32, tmp_path):
        outp = tmp_path / "o.pgm"
        samp = tmp_path / "ss.csv"
        r = run("specrecon", img32, "--support", 0.35, "--iters", 20,
                "--samples", samp, "--out", outp)
        assert r.exit_code == 0
        lines = r.output.strip().splitlines()
        assert json.loads(lines[0])["sampling_rate"] == pytest.approx(0.3023,
                                                                      abs=1e-3)
        result = json.loads(lines[1])
        assert result["M"] == int(round(0.30226 * 1024))
        assert samp.read_text().splitlines()[1] == "row,col,re,im"


class TestPhaserec:
    def test_stage1_trivial_binary_mask(self, tmp_path):
        # white image: the occluded image IS the mask, whose phase seeds stage 1
        img = tmp_path / "w.pgm"
        bs.write_pgm(np.full((32, 32), 255.0), img)
        rng = np.random.default_rng(9)
        mask = np.ones((32, 32), bool)
        for _ in range(12):
            r0, c0 = rng.integers(0, 29, 2)
            mask[r0:r0 + 3, c0:c0 + 3] = False
        occ = tmp_path / "occ.pgm"
        bs.write_pgm(np.where(mask, 255.0, 0.0), occ)
        outp = tmp_path / "o.pgm"
        r = run("phaserec", img, "--occlusion", occ, "--stage1-only",
                "--iters1", 10, "--out", outp)
        assert r.exit_code == 0
        assert json.loads(r.output)["stage1_rms"] < 1e-9


class TestCsbound:
    def test_single_value(self):
        r = run("csbound", 0.01)
        assert r.exit_code == 0
        out = json.loads(r.output)
        assert out["redundancy"] == pytest.approx(5.7218, abs=1e-3)
        assert out["clamped"] is False

    def test_sweep_csv(self, tmp_path):
        out = tmp_path / "sweep.csv"
        r = run("csbound", "--sweep", 0.002, 0.1, 5, "--out", out)
        assert r.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "sparsity,redundancy"
        assert len(lines) == 6
        reds = [float(l.split(",")[1]) for l in lines[1:]]
        assert reds == sorted(reds, reverse=True)

    def test_no_args_errors(self):
        assert runner.invoke(main, ["csbound"]).exit_code != 0

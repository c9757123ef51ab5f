"""End-to-end tests of the command-line front end, run in-process."""

import json

import numpy as np
import pytest

from lincfg import sampler
from lincfg.cli import main
from lincfg.stats import (DataMatrix, load_data_matrix, load_stats,
                          save_data_matrix, save_stats)
from lincfg.synthetic import toy_conditional_stats, toy_unconditional_stats


@pytest.fixture
def toy_files(tmp_path):
    cond = tmp_path / "cond.stats"
    uncond = tmp_path / "uncond.stats"
    save_stats(toy_conditional_stats(), cond)
    save_stats(toy_unconditional_stats(), uncond)
    return cond, uncond


class TestFit:
    def test_fit_csv(self, tmp_path, capsys):
        rng = np.random.default_rng(80)
        data = tmp_path / "data.csv"
        lines = [",".join(f"{float(v)!r}" for v in row)
                 for row in rng.standard_normal((50, 2))]
        data.write_text("\n".join(lines) + "\n")
        out = tmp_path / "fit.stats"
        assert main(["fit", str(data), str(out)]) == 0
        stats = load_stats(out)
        assert stats.d == 2
        printed = capsys.readouterr().out
        assert "n=50" in printed and "top eigenvalues" in printed

    def test_fit_binary(self, tmp_path):
        rng = np.random.default_rng(81)
        data = tmp_path / "data.bin"
        save_data_matrix(DataMatrix(rng.standard_normal((30, 3))), data)
        out = tmp_path / "fit.stats"
        assert main(["fit", str(data), str(out)]) == 0
        assert load_stats(out).d == 3

    def test_missing_input_exit_2(self, tmp_path, capsys):
        code = main(["fit", str(tmp_path / "nope.csv"), str(tmp_path / "o.stats")])
        assert code == 2
        assert "no such input" in capsys.readouterr().err

    def test_malformed_header_exit_3(self, tmp_path, capsys):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"LCFD1\x05\x00\x00\x00")  # truncated header
        code = main(["fit", str(bad), str(tmp_path / "o.stats")])
        assert code == 3
        assert "offset" in capsys.readouterr().err


class TestSample:
    def test_config_file_run_and_manifest_rerun(self, tmp_path, toy_files):
        cond, uncond = toy_files
        out1 = tmp_path / "run1"
        config = tmp_path / "exp.cfg"
        config.write_text(
            f"cond_stats={cond}\n"
            f"uncond_stats={uncond}\n"
            "steps=10\nm=16\nseed=123\ngamma=1.0\n"
            f"outdir={out1}\n"
            "# trailing comment line\n")
        assert main(["sample", "--config", str(config)]) == 0
        samples1 = (out1 / "samples.bin").read_bytes()
        manifest = json.loads((out1 / "run_manifest.json").read_text())
        assert manifest["seed"] == 123

        # re-run from the manifest into a fresh directory: bit-identical samples
        out2 = tmp_path / "run2"
        assert main(["sample", "--config", str(out1 / "run_manifest.json"),
                     "--outdir", str(out2)]) == 0
        assert (out2 / "samples.bin").read_bytes() == samples1

    def test_flags_override_config(self, tmp_path, toy_files):
        cond, uncond = toy_files
        config = tmp_path / "exp.cfg"
        config.write_text(f"cond_stats={cond}\nuncond_stats={uncond}\n"
                          "steps=10\nm=4\nseed=1\n")
        out = tmp_path / "o"
        assert main(["sample", "--config", str(config), "--m", "7",
                     "--outdir", str(out)]) == 0
        assert load_data_matrix(out / "samples.bin").n == 7

    def test_gamma_zero_equals_naive_conditional(self, tmp_path, toy_files):
        cond_path, uncond_path = toy_files
        out = tmp_path / "o"
        assert main(["sample", "--cond-stats", str(cond_path),
                     "--uncond-stats", str(uncond_path), "--gamma", "0",
                     "--steps", "12", "--m", "8", "--seed", "5",
                     "--outdir", str(out)]) == 0
        got = load_data_matrix(out / "samples.bin").values
        batch = sampler.sample_batch(
            toy_conditional_stats(), toy_unconditional_stats(), 8, 5,
            sampler.make_schedule(n_steps=12), sampler.GuidanceConfig(gamma=0.0))
        np.testing.assert_array_equal(got, batch.samples)

    def test_gamma_zero_needs_no_uncond(self, tmp_path, toy_files):
        cond_path, _ = toy_files
        out = tmp_path / "o"
        assert main(["sample", "--cond-stats", str(cond_path), "--gamma", "0",
                     "--steps", "8", "--m", "2", "--outdir", str(out)]) == 0

    def test_component_ablation_flag(self, tmp_path, toy_files):
        cond_path, uncond_path = toy_files
        out_ms = tmp_path / "ms"
        assert main(["sample", "--cond-stats", str(cond_path),
                     "--uncond-stats", str(uncond_path), "--gamma", "1",
                     "--components", "mean_shift", "--steps", "12", "--m", "6",
                     "--seed", "2", "--outdir", str(out_ms)]) == 0
        got = load_data_matrix(out_ms / "samples.bin").values
        cfg = sampler.GuidanceConfig(gamma=1.0, enable_pos_cpc=False,
                                     enable_neg_cpc=False, enable_mean_shift=True)
        batch = sampler.sample_batch(
            toy_conditional_stats(), toy_unconditional_stats(), 6, 2,
            sampler.make_schedule(n_steps=12), cfg)
        np.testing.assert_array_equal(got, batch.samples)

    def test_interval_flag(self, tmp_path, toy_files):
        cond_path, uncond_path = toy_files
        out = tmp_path / "o"
        assert main(["sample", "--cond-stats", str(cond_path),
                     "--uncond-stats", str(uncond_path), "--gamma", "2",
                     "--interval", "4:80", "--steps", "12", "--m", "4",
                     "--seed", "3", "--outdir", str(out)]) == 0
        got = load_data_matrix(out / "samples.bin").values
        cfg = sampler.GuidanceConfig(gamma=2.0, active_interval=(4.0, 80.0))
        batch = sampler.sample_batch(
            toy_conditional_stats(), toy_unconditional_stats(), 4, 3,
            sampler.make_schedule(n_steps=12), cfg)
        np.testing.assert_array_equal(got, batch.samples)

    def test_mean_shifted_init(self, tmp_path, toy_files):
        cond_path, uncond_path = toy_files
        out = tmp_path / "o"
        assert main(["sample", "--cond-stats", str(cond_path),
                     "--uncond-stats", str(uncond_path), "--gamma", "0",
                     "--init", "mean_shifted", "--init-gamma", "3",
                     "--init-sigma", "31.9", "--steps", "8", "--m", "4",
                     "--outdir", str(out)]) == 0
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["config"]["init"] == "mean_shifted"

    def test_unknown_config_key_exit_3(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("nonsense=1\n")
        assert main(["sample", "--config", str(config)]) == 3

    def test_divergence_exit_4(self, tmp_path, toy_files, capsys):
        cond_path, uncond_path = toy_files
        code = main(["sample", "--cond-stats", str(cond_path),
                     "--uncond-stats", str(uncond_path), "--gamma", "1e18",
                     "--steps", "3", "--m", "2", "--outdir", str(tmp_path / "d")])
        assert code == 4
        err = capsys.readouterr().err
        assert "divergence" in err and "step" in err

    def test_mixture_mode(self, tmp_path):
        from lincfg.synthetic import demo_mixture
        model = demo_mixture()
        for i, comp in enumerate(model.components):
            save_stats(comp, tmp_path / f"comp{i}.stats")
        manifest = tmp_path / "mixture.txt"
        manifest.write_text("".join(
            f"comp{i}.stats {float(w)!r}\n" for i, w in enumerate(model.weights)))
        out = tmp_path / "o"
        assert main(["sample", "--mixture", str(manifest), "--target", "1",
                     "--gamma", "1", "--steps", "15", "--m", "5",
                     "--seed", "9", "--outdir", str(out)]) == 0
        got = load_data_matrix(out / "samples.bin").values
        from lincfg import gmm
        batch = gmm.sample_batch(model, 1, 5, 9, sampler.make_schedule(n_steps=15),
                                 sampler.GuidanceConfig(gamma=1.0))
        np.testing.assert_array_equal(got, batch.samples)

    def test_ppm_output(self, tmp_path, toy_files):
        cond_path, uncond_path = toy_files
        out = tmp_path / "o"
        assert main(["sample", "--cond-stats", str(cond_path),
                     "--uncond-stats", str(uncond_path), "--gamma", "0",
                     "--steps", "8", "--m", "3", "--ppm-shape", "1x2x1",
                     "--ppm-count", "2", "--outdir", str(out)]) == 0
        img = (out / "sample_00000.pgm").read_bytes()
        assert img.startswith(b"P5\n2 1\n255\n")


class TestVerifyCommand:
    def test_decomposition_suite_passes(self, capsys):
        assert main(["verify", "decomposition"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out and "FAIL" not in out

    def test_gmm_suite_passes(self, capsys):
        assert main(["verify", "gmm"]) == 0


class TestExport:
    def test_export_cpcs(self, tmp_path, toy_files):
        cond_path, uncond_path = toy_files
        out = tmp_path / "exp"
        assert main(["export", "cpcs", "--cond", str(cond_path),
                     "--uncond", str(uncond_path), "--sigma", "1.0",
                     "--count", "1", "--shape", "1x2x1",
                     "--outdir", str(out)]) == 0
        assert (out / "pos_cpc_00.pgm").exists()
        assert (out / "neg_cpc_00.pgm").exists()
        table = (out / "cpc_eigenvalues.csv").read_text().splitlines()
        assert table[0] == "index,eigenvalue"
        assert float(table[1].split(",")[1]) == pytest.approx(10 / 11 - 3 / 4)

    def test_export_shape_mismatch_exit_5(self, tmp_path, toy_files):
        cond_path, uncond_path = toy_files
        code = main(["export", "cpcs", "--cond", str(cond_path),
                     "--uncond", str(uncond_path), "--shape", "8x8x3",
                     "--outdir", str(tmp_path / "x")])
        assert code == 5

    def test_export_mean_shift_dir(self, tmp_path, toy_files):
        cond_path, uncond_path = toy_files
        out = tmp_path / "exp"
        assert main(["export", "mean_shift_dir", "--cond", str(cond_path),
                     "--uncond", str(uncond_path), "--shape", "1x2x1",
                     "--outdir", str(out)]) == 0
        # mu_c - mu_uc = (4,4): constant vector renders mid gray
        raw = (out / "mean_shift.pgm").read_bytes()
        assert raw.endswith(bytes([128, 128]))

    def test_export_histograms(self, tmp_path, toy_files):
        cond_path, uncond_path = toy_files
        samples = tmp_path / "samples.bin"
        rng = np.random.default_rng(82)
        save_data_matrix(DataMatrix(rng.standard_normal((40, 2))), samples)
        out = tmp_path / "h"
        assert main(["export", "histograms", "--samples", str(samples),
                     "--cond", str(cond_path), "--uncond", str(uncond_path),
                     "--direction", "mean_shift", "--outdir", str(out)]) == 0
        assert (out / "hist_mean_shift.csv").exists()
        assert (out / "hist_mean_shift.svg").read_text().startswith("<svg")

    def test_export_similarity_and_top_level_alias(self, tmp_path, toy_files, capsys):
        cond_path, uncond_path = toy_files
        out = tmp_path / "sim"
        assert main(["export", "similarity", "--stats", str(cond_path),
                     str(uncond_path), "--outdir", str(out)]) == 0
        assert (out / "similarity.csv").exists()
        assert (out / "similarity.svg").exists()
        csv_out = tmp_path / "alias.csv"
        assert main(["similarity", str(cond_path), str(uncond_path),
                     "--out-csv", str(csv_out)]) == 0
        assert csv_out.exists()
        assert "class similarity" in capsys.readouterr().out


def test_gmm_demo(tmp_path, capsys):
    out = tmp_path / "demo"
    assert main(["gmm-demo", "--out", str(out), "--m", "64", "--steps", "40",
                 "--gamma", "1.0"]) == 0
    printed = capsys.readouterr().out
    assert "variance ratio" in printed
    for name in ("toy_naive.bin", "toy_cfg.bin", "gmm_naive.bin",
                 "gmm_cfg.bin", "summary.json"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    assert "toy" in summary and "mixture" in summary

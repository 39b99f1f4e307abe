import json
import subprocess
import sys

import numpy as np
import pytest

from snowlidar import read_cloud, read_metadata, read_template
from snowlidar.cli import main
from snowlidar.scattering import ConstantEfficiency, SnowfallParams, extinction_coefficient


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestAlpha:
    def test_single_row_matches_library(self, tmp_path, capsys):
        assert run_cli("alpha", "5") == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "sr,alpha_per_m,power_ratio"
        sr, alpha, ratio = (float(v) for v in out[1].split(","))
        assert sr == 5.0
        expected = extinction_coefficient(SnowfallParams(5.0), ConstantEfficiency())
        assert alpha == expected  # thin shell over the library

    def test_ascending_alpha_column(self, capsys):
        assert run_cli("alpha", "1", "2", "5", "10", "20", "35") == 0
        rows = capsys.readouterr().out.splitlines()[1:]
        alphas = [float(r.split(",")[1]) for r in rows]
        assert alphas == sorted(alphas)
        assert len(set(alphas)) == len(alphas)

    def test_duplicate_rates_duplicate_rows(self, capsys):
        assert run_cli("alpha", "5", "5") == 0
        rows = capsys.readouterr().out.splitlines()[1:]
        assert rows[0] == rows[1]

    def test_invalid_rate_named(self, capsys):
        assert run_cli("alpha", "5", "-3") == 2
        assert "-3" in capsys.readouterr().err

    def test_output_file(self, tmp_path, capsys):
        out = tmp_path / "table.csv"
        assert run_cli("alpha", "5", "--output", out) == 0
        assert out.read_text().startswith("sr,alpha_per_m,power_ratio")


class TestQeff:
    def test_default_configuration(self, capsys):
        assert run_cli("qeff") == 0
        out = capsys.readouterr().out
        fields = dict(kv.split("=") for kv in out.split())
        assert int(fields["n"]) == 2000
        assert 1.92 <= float(fields["median"]) <= 2.02
        assert float(fields["q1"]) <= float(fields["median"]) <= float(fields["q3"])

    def test_degenerate_single_size(self, capsys):
        assert run_cli(
            "qeff", "--n-particles", "5", "--d-min", "1e-3", "--d-max", "1e-3",
            "--distance-min", "20", "--distance-max", "20",
        ) == 0
        fields = dict(kv.split("=") for kv in capsys.readouterr().out.split())
        import math
        kappa = 2 * math.pi * 0.5e-3 * 1e-4 / (900e-9 * 20.0)
        assert float(fields["median"]) == pytest.approx(math.exp(-0.88 * kappa) + 1, abs=1e-6)

    def test_seed_repeatability(self, capsys):
        assert run_cli("qeff", "--seed", "9") == 0
        first = capsys.readouterr().out
        assert run_cli("qeff", "--seed", "9") == 0
        assert capsys.readouterr().out == first


class TestAugment:
    def test_run_and_sidecar(self, cloud_files, tmp_path, capsys):
        out = tmp_path / "snowy_sim.bin"
        code = run_cli("augment", cloud_files["clear"], out, "--sr", "5", "--seed", "3")
        assert code == 0
        summary = capsys.readouterr().out
        assert "kept=" in summary and "injected=" in summary
        cloud = read_cloud(out)
        meta = read_metadata(str(out) + ".meta.json")
        assert meta.seed == 3
        assert meta.report["n_kept"] + meta.report["n_injected"] == len(cloud)
        assert meta.report["n_dropped"] > 0
        assert meta.report["n_injected"] >= 1
        assert meta.snowfall["snowfall_rate"] == 5.0

    def test_fixed_seed_reruns_byte_identical(self, cloud_files, tmp_path):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        assert run_cli("augment", cloud_files["clear"], a, "--sr", "7", "--seed", "1") == 0
        assert run_cli("augment", cloud_files["clear"], b, "--sr", "7", "--seed", "1") == 0
        assert a.read_bytes() == b.read_bytes()
        assert (
            (tmp_path / "a.bin.meta.json").read_bytes().replace(b"a.bin", b"")
            == (tmp_path / "b.bin.meta.json").read_bytes().replace(b"b.bin", b"")
        )

    def test_near_zero_rate_reproduces_input(self, cloud_files, tmp_path):
        out = tmp_path / "same.bin"
        assert run_cli("augment", cloud_files["clear"], out, "--sr", "1e-30") == 0
        assert out.read_bytes() == cloud_files["clear"].read_bytes()

    def test_missing_input_is_input_error(self, tmp_path):
        assert run_cli("augment", tmp_path / "nope.bin", tmp_path / "out.bin") == 3

    def test_bad_parameter_is_usage_error(self, cloud_files, tmp_path):
        code = run_cli(
            "augment", cloud_files["clear"], tmp_path / "out.bin", "--sr", "-2"
        )
        assert code == 2

    def test_truncated_input_is_input_error(self, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"\x00" * 21)
        assert run_cli("augment", bad, tmp_path / "out.bin") == 3

    def test_explicit_template_file(self, cloud_files, tmp_path):
        tmpl_path = tmp_path / "tmpl.json"
        assert run_cli("extract-template", cloud_files["snowy"], tmpl_path) == 0
        out = tmp_path / "out.bin"
        assert run_cli(
            "augment", cloud_files["clear"], out, "--template", tmpl_path, "--sr", "5"
        ) == 0
        assert out.exists()


class TestExtractTemplate:
    def test_fixture_snowy_cloud(self, cloud_files, tmp_path, capsys):
        out = tmp_path / "template.json"
        assert run_cli("extract-template", cloud_files["snowy"], out) == 0
        printed = capsys.readouterr().out
        template = read_template(out)
        assert len(template) > 1000
        assert 1.0 <= template.intensity_mean <= 2.0
        assert str(len(template)) in printed

    def test_shell_excluding_all_points(self, cloud_files, tmp_path):
        code = run_cli(
            "extract-template", cloud_files["clear"], tmp_path / "t.json",
            "--shell-inner", "0.5", "--shell-outer", "2.0",
        )
        assert code == 3

    def test_cutoff_below_min_intensity(self, cloud_files, tmp_path):
        code = run_cli(
            "extract-template", cloud_files["snowy"], tmp_path / "t.json",
            "--cutoff", "0.5",
        )
        assert code == 3


class TestStats:
    def test_empty_cloud(self, tmp_path, capsys):
        empty = tmp_path / "empty.bin"
        empty.write_bytes(b"")
        assert run_cli("stats", empty) == 0
        out = capsys.readouterr().out
        assert "points=0" in out

    def test_augmented_has_more_near_low_mass(self, cloud_files, tmp_path, capsys):
        assert run_cli("stats", cloud_files["clear"]) == 0
        clear_out = capsys.readouterr().out
        sim = tmp_path / "sim.bin"
        assert run_cli("augment", cloud_files["clear"], sim, "--sr", "10") == 0
        capsys.readouterr()
        assert run_cli("stats", sim) == 0
        sim_out = capsys.readouterr().out

        def near_low(text):
            for line in text.splitlines():
                if line.startswith("near_low_fraction="):
                    return float(line.split("=")[1])
            raise AssertionError("near_low_fraction missing")

        assert near_low(sim_out) > near_low(clear_out)

    def test_histogram_totals(self, cloud_files, capsys):
        assert run_cli("stats", cloud_files["clear"]) == 0
        out = capsys.readouterr().out
        counts = [
            int(line.strip().split(",")[2])
            for line in out.splitlines()
            if line.startswith("  ")
        ]
        assert sum(counts) == 100_000

    def test_uniform_cloud_known_histogram(self, tmp_path, capsys):
        # 64 identical points at intensity 2.5 land in exactly one bin
        from snowlidar import PointCloud, write_cloud

        pts = np.tile(np.array([[3.0, 4.0, 0.0, 2.5]], dtype=np.float32), (64, 1))
        path = tmp_path / "uniform.bin"
        write_cloud(PointCloud(points=pts), path)
        assert run_cli("stats", path) == 0
        out = capsys.readouterr().out
        bins = [line.strip() for line in out.splitlines() if line.startswith("  ")]
        assert bins == ["2,3,64"]
        assert "near_low_fraction=1.000000" in out  # range 5 m, intensity below 5


class TestConfigFile:
    def test_precedence_flags_over_file_over_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("sr = 20\nseed = 5  # comment\nunit-scale = 1.0\n")
        # flag --sr beats the file; file seed beats the default
        assert run_cli("qeff", "--config", cfg, "--sr", "10") == 0
        out_flag = capsys.readouterr().out
        assert run_cli("qeff", "--sr", "10", "--seed", "5") == 0
        assert capsys.readouterr().out == out_flag

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("sr = 5\nwhatever = 1\n")
        assert run_cli("qeff", "--config", cfg) == 2

    def test_missing_config_file(self, tmp_path):
        assert run_cli("qeff", "--config", tmp_path / "nope.cfg") == 2

    def test_bad_value_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("sr = fast\n")
        assert run_cli("qeff", "--config", cfg) == 2


class TestEntryPoint:
    def test_module_invocation(self, cloud_files, tmp_path):
        out = tmp_path / "out.bin"
        proc = subprocess.run(
            [sys.executable, "-m", "snowlidar.cli", "augment",
             str(cloud_files["clear"]), str(out), "--sr", "5"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()

    def test_usage_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "snowlidar.cli", "alpha"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2

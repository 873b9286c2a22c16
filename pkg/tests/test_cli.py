"""Command-line surface: outputs, formatting, exit codes, reproducibility."""

import csv
import json

import numpy as np
import pytest

import _oracles as oracles
from ldgas.cli import main

BOX_BASE = """\
[ensemble]
potential = [0.0]
beta = 2.0

[ensemble.walls]
lower = -1.0
upper = 1.0

[statistic]
f = [0.0, 1.0]
"""

QUARTIC_BASE = """\
[ensemble]
potential = [0.0, 0.0, 0.25]
beta = 2.0

[statistic]
f = [0.0, 0.0, 0.0, 0.0, 1.0]
"""


def _write(tmp_path, body, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(body)
    return str(path)


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


class TestEquilibriumCommand:
    def test_density_and_support_outputs(self, tmp_path):
        cfg = _write(tmp_path, BOX_BASE + "\n[equilibrium]\ns = 2.0\n")
        out = tmp_path / "out"
        assert main(["equilibrium", cfg, "--out", str(out)]) == 0

        header, data = _read_csv(out / "density.csv")
        assert header == ["lambda", "rho"]
        assert data.shape == (513, 2)
        lam, rho = data[:, 0], data[:, 1]
        expected = -2.0 * lam / (np.pi * np.sqrt(-lam * (lam + 1.0)))
        np.testing.assert_allclose(rho, expected, atol=1e-8)

        sup = json.loads((out / "support.json").read_text())
        assert sup["a"] == pytest.approx(-1.0, abs=1e-12)
        assert sup["b"] == pytest.approx(0.0, abs=1e-9)
        assert sup["edge_a"] == "hard"
        assert sup["edge_b"] == "soft"
        assert sup["euler_lagrange_residual"] < 1e-9

    def test_seventeen_digit_round_trip(self, tmp_path):
        cfg = _write(tmp_path, BOX_BASE + "\n[equilibrium]\ns = 0.0\n")
        out = tmp_path / "out"
        main(["equilibrium", cfg, "--out", str(out)])
        _, data = _read_csv(out / "density.csv")
        lam = data[:, 0]
        # values printed with %.17g must survive a parse round trip exactly
        assert all(float("%.17g" % v) == v for v in lam)


class TestLdfCommand:
    def test_duality_and_rate_tables(self, tmp_path):
        cfg = _write(
            tmp_path,
            BOX_BASE + "\n[ldf]\ns_min = -1.5\ns_max = 1.5\nn_points = 101\ninclude = [0.25]\n",
        )
        out = tmp_path / "out"
        assert main(["ldf", cfg, "--out", str(out)]) == 0

        header, data = _read_csv(out / "duality.csv")
        assert header == ["s", "x_star", "J"]
        s, x, j = data.T
        assert np.any(s == 0.25)
        np.testing.assert_allclose(x, oracles.box_x_star(s), atol=1e-8)
        np.testing.assert_allclose(j, oracles.box_j(s), atol=1e-7)

        header, data = _read_csv(out / "rate.csv")
        assert header == ["x", "s_star", "Psi"]
        xg, s_star, psi = data.T
        assert np.all(np.diff(xg) > 0)
        assert np.all(psi >= 0.0)
        np.testing.assert_allclose(psi, oracles.box_psi(xg), atol=1e-6)

        report = (out / "report.txt").read_text()
        assert "legendre_residual" in report
        assert "n_kink_brackets = 2" in report

    def test_degenerate_grid_is_a_model_error(self, tmp_path):
        cfg = _write(tmp_path, BOX_BASE + "\n[ldf]\ns_min = 1.0\ns_max = 1.0\nn_points = 51\n")
        assert main(["ldf", cfg, "--out", str(tmp_path / "o")]) == 2


class TestCumulantsCommand:
    def test_planar_counts_from_config(self, tmp_path):
        cfg = _write(
            tmp_path, QUARTIC_BASE + "\n[cumulants]\nm_max = 3\nn_particles = 1\n"
        )
        out = tmp_path / "out"
        assert main(["cumulants", cfg, "--out", str(out)]) == 0
        header, data = _read_csv(out / "cumulants.csv")
        assert header == ["order", "derivative", "scaled"]
        np.testing.assert_allclose(data[:, 0], [1, 2, 3])
        np.testing.assert_allclose(data[:, 2], oracles.PLANAR_COUNTS[:3], rtol=1e-4)

    def test_zero_order_rejected(self, tmp_path):
        cfg = _write(tmp_path, QUARTIC_BASE + "\n[cumulants]\nm_max = 0\n")
        assert main(["cumulants", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_slope_break_in_stencil_is_an_analysis_error(self, tmp_path):
        cfg = _write(tmp_path, BOX_BASE + "\n[cumulants]\nm_max = 5\nh0 = 1.2\n")
        assert main(["cumulants", cfg, "--out", str(tmp_path / "o")]) == 3


class TestTransitionsCommand:
    def test_detects_both_detachments(self, tmp_path):
        cfg = _write(
            tmp_path,
            BOX_BASE + "\n[transitions]\ns_min = -1.5\ns_max = 1.5\nn_points = 101\n",
        )
        out = tmp_path / "out"
        assert main(["transitions", cfg, "--out", str(out)]) == 0
        header, data = _read_csv(out / "transitions.csv")
        assert header == ["s_lower", "s_upper", "order", "jump"]
        assert data.shape[0] == 2
        assert np.all(data[:, 2] == 3)
        steep = (out / "steepness.txt").read_text()
        assert "no truncated boundary" in steep


class TestVerifyMcCommand:
    MC = (
        "\n[mc]\nn_particles = 8\nn_sweeps = 6000\nburn_in = 1500\nthin = 2\n"
        "seed = 77\ntilts = [0.0, 0.5]\nz_threshold = 4.5\nn_bins = 16\n"
    )

    def test_summary_histogram_and_verdict(self, tmp_path):
        cfg = _write(tmp_path, BOX_BASE + self.MC)
        out = tmp_path / "out"
        assert main(["verify-mc", cfg, "--out", str(out)]) == 0

        verdict = (out / "verdict.txt").read_text()
        assert verdict.strip().endswith("VERDICT: PASS")

        header, data = _read_csv(out / "mc_hist.csv")
        assert header == ["s", "bin_lo", "bin_hi", "count"]
        counts_at_zero = data[data[:, 0] == 0.0][:, 3]
        assert counts_at_zero.sum() == 6000 // 2

        with open(out / "mc_summary.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["quantity", "estimate", "stderr"]
        quantities = {r[0] for r in rows[1:]}
        assert {"mean[s=0]", "predicted[s=0]", "z[s=0]", "variance_scaled[s=0.5]"} <= quantities

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = _write(tmp_path, BOX_BASE + self.MC)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["verify-mc", cfg, "--out", str(out1)])
        main(["verify-mc", cfg, "--out", str(out2)])
        for name in ("mc_summary.csv", "mc_hist.csv", "verdict.txt"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_thread_fanout_matches_serial_run(self, tmp_path):
        cfg = _write(tmp_path, BOX_BASE + self.MC)
        out1, out2 = tmp_path / "serial", tmp_path / "threaded"
        main(["verify-mc", cfg, "--out", str(out1)])
        main(["verify-mc", cfg, "--out", str(out2), "--threads", "2"])
        assert (out1 / "mc_summary.csv").read_bytes() == (out2 / "mc_summary.csv").read_bytes()

    def test_seed_override_from_environment(self, tmp_path, monkeypatch):
        cfg = _write(tmp_path, BOX_BASE + self.MC)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["verify-mc", cfg, "--out", str(out1)])
        monkeypatch.setenv("LDGAS_SEED", "123456")
        main(["verify-mc", cfg, "--out", str(out2)])
        assert (out1 / "mc_summary.csv").read_bytes() != (out2 / "mc_summary.csv").read_bytes()


class TestJointCommand:
    def test_surface_outputs(self, tmp_path):
        cfg = _write(
            tmp_path,
            BOX_BASE
            + "\nf2 = [0.0, 0.0, 1.0]\n"
            + "\n[joint]\ns1_min = -0.4\ns1_max = 0.4\nn1 = 9\ns2_min = -0.3\ns2_max = 0.3\nn2 = 7\n",
        )
        out = tmp_path / "out"
        assert main(["joint", cfg, "--out", str(out)]) == 0
        header, data = _read_csv(out / "joint.csv")
        assert header == ["s1", "s2", "x1_star", "x2_star", "J", "Psi"]
        assert data.shape == (9 * 7, 6)
        report = (out / "joint_report.txt").read_text()
        assert "path_mismatch" in report and "mixed_partial_asymmetry" in report

    def test_missing_second_statistic_is_a_config_error(self, tmp_path):
        cfg = _write(
            tmp_path,
            BOX_BASE + "\n[joint]\ns1_min = -0.1\ns1_max = 0.1\nn1 = 3\ns2_min = -0.1\ns2_max = 0.1\nn2 = 3\n",
        )
        assert main(["joint", cfg, "--out", str(tmp_path / "o")]) == 1


class TestErrorPaths:
    def test_missing_config_file(self, tmp_path):
        assert main(["ldf", str(tmp_path / "absent.toml"), "--out", str(tmp_path / "o")]) == 1

    def test_unknown_key_fails_closed(self, tmp_path):
        cfg = _write(tmp_path, BOX_BASE + "\n[ldf]\ns_min = -1.0\ns_max = 1.0\nn_points = 11\ntypo_key = 3\n")
        assert main(["ldf", cfg, "--out", str(tmp_path / "o")]) == 1

    def test_unknown_command(self, tmp_path):
        cfg = _write(tmp_path, BOX_BASE)
        assert main(["frobnicate", cfg, "--out", str(tmp_path / "o")]) == 1

    def test_ill_confined_ensemble(self, tmp_path):
        body = BOX_BASE.replace("potential = [0.0]", "potential = [0.0, 0.0, -1.0]").replace(
            "[ensemble.walls]\nlower = -1.0\nupper = 1.0\n", ""
        )
        cfg = _write(tmp_path, body + "\n[equilibrium]\ns = 0.0\n")
        assert main(["equilibrium", cfg, "--out", str(tmp_path / "o")]) == 2

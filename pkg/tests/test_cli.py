"""Command-line front end: config parsing, CSV emission, determinism."""

import math
import os

import numpy as np
import pytest

from senselink.cli import (
    ConfigError,
    db_to_linear,
    linear_to_db,
    parse_config_file,
    load_experiment,
    main,
)
from senselink.model import load_model, pairwise_mean_gaps
from oracles import enumerate_worst_pair


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def _read_rows(path):
    """CSV rows (list of string lists), skipping provenance comments."""
    lines = [
        ln for ln in open(path, encoding="utf-8").read().splitlines() if ln.strip()
    ]
    comments = [ln for ln in lines if ln.startswith("#")]
    data = [ln.split(",") for ln in lines if not ln.startswith("#")]
    return comments, data[0], data[1:]


@pytest.fixture(scope="module")
def model_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_model") / "model.json"
    assert main(["gen-model", "--out", str(out)]) == 0
    return str(out)


def _sweep_cfg(tmp_path, model_path, body):
    return _write(tmp_path / "exp.cfg", f"model = {model_path}\n" + body)


POWER_BODY = """\
trials = 4096
seed = 7
channel_noise_power_linear = 0.1
sensing_noise_power_linear = 0.1
sensing_power_linear = 1.0
pc_grid_db = -5:10:1
"""

BETA_BODY = """\
trials = 16384
seed = 11
total_power_linear = 8.0
snr_r_linear = 100
snr_c_linear = 10
beta_grid = 0.05:0.95:0.05
"""


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


class TestConfigParsing:
    def test_db_linear_round_trip(self):
        for p in [1e-3, 0.5, 1.0, 7.3, 1e4]:
            assert db_to_linear(linear_to_db(p)) == pytest.approx(p, rel=1e-12)

    def test_duplicate_key_rejected(self, tmp_path):
        cfg = _write(tmp_path / "d.cfg", "trials = 5\ntrials = 6\n")
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_file(cfg)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        cfg = _write(tmp_path / "c.cfg", "# top\n\ntrials = 5  # inline\n")
        assert parse_config_file(cfg) == {"trials": "5"}

    def test_both_unit_suffixes_rejected(self, tmp_path, model_path):
        cfg = _sweep_cfg(
            tmp_path,
            model_path,
            POWER_BODY + "channel_noise_power_db = -10\n",
        )
        with pytest.raises(ConfigError, match="pick one"):
            load_experiment(cfg, "sweep-power", {})

    def test_both_axes_rejected(self, tmp_path, model_path):
        cfg = _sweep_cfg(tmp_path, model_path, POWER_BODY + "beta_grid = 0.1,0.5\n")
        with pytest.raises(ConfigError, match="exactly one sweep axis"):
            load_experiment(cfg, "sweep-power", {})

    def test_snr_needs_total_power(self, tmp_path, model_path):
        body = BETA_BODY.replace("total_power_linear = 8.0\n", "")
        cfg = _sweep_cfg(tmp_path, model_path, body)
        with pytest.raises(ConfigError, match="total_power"):
            load_experiment(cfg, "sweep-beta", {})

    def test_unknown_key_rejected(self, tmp_path, model_path):
        cfg = _sweep_cfg(tmp_path, model_path, POWER_BODY + "wavelength = 3\n")
        with pytest.raises(ConfigError, match="unknown config keys"):
            load_experiment(cfg, "sweep-power", {})

    def test_range_grid_inclusive(self, tmp_path, model_path):
        cfg = _sweep_cfg(tmp_path, model_path, POWER_BODY)
        exp = load_experiment(cfg, "sweep-power", {})
        assert len(exp.grid) == 16
        assert exp.grid_db[0] == pytest.approx(-5.0)
        assert exp.grid_db[-1] == pytest.approx(10.0)
        assert exp.grid[0] == pytest.approx(db_to_linear(-5.0), rel=1e-12)

    def test_comma_grid(self, tmp_path, model_path):
        body = POWER_BODY.replace("pc_grid_db = -5:10:1", "pc_grid_linear = 0.5,1,2")
        cfg = _sweep_cfg(tmp_path, model_path, body)
        exp = load_experiment(cfg, "sweep-power", {})
        assert exp.grid == (0.5, 1.0, 2.0)

    def test_bad_step_rejected(self, tmp_path, model_path):
        body = POWER_BODY.replace("pc_grid_db = -5:10:1", "pc_grid_db = 0:1:0.3")
        cfg = _sweep_cfg(tmp_path, model_path, body)
        with pytest.raises(ConfigError, match="grid"):
            load_experiment(cfg, "sweep-power", {})

    def test_decreasing_grid_rejected(self, tmp_path, model_path):
        body = POWER_BODY.replace("pc_grid_db = -5:10:1", "pc_grid_linear = 2,1")
        cfg = _sweep_cfg(tmp_path, model_path, body)
        with pytest.raises(ConfigError, match="increasing"):
            load_experiment(cfg, "sweep-power", {})

    def test_model_path_relative_to_config_dir(self, tmp_path, model_path):
        sub = tmp_path / "nested"
        sub.mkdir()
        rel = os.path.relpath(model_path, sub)
        cfg = _write(sub / "exp.cfg", f"model = {rel}\n" + POWER_BODY)
        exp = load_experiment(cfg, "sweep-power", {})
        assert os.path.samefile(exp.model_path, model_path)

    def test_overrides_take_precedence(self, tmp_path, model_path):
        cfg = _sweep_cfg(tmp_path, model_path, POWER_BODY)
        exp = load_experiment(
            cfg, "sweep-power", {"seed": 99, "trials": 64, "criterion": "DG"}
        )
        assert (exp.seed, exp.trials, exp.criterion) == (99, 64, "DG")

    def test_snr_resolves_against_total(self, tmp_path, model_path):
        cfg = _sweep_cfg(tmp_path, model_path, BETA_BODY)
        exp = load_experiment(cfg, "sweep-beta", {})
        assert exp.sensing_noise_power == pytest.approx(8.0 / 100.0, rel=1e-12)
        assert exp.channel_noise_power == pytest.approx(8.0 / 10.0, rel=1e-12)


# ---------------------------------------------------------------------------
# gen-model
# ---------------------------------------------------------------------------


class TestGenModel:
    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["gen-model", "--classes", "4", "--dims", "8", "--seed", "7"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_single_class_rejected(self, tmp_path, capsys):
        out = tmp_path / "x.json"
        assert main(["gen-model", "--classes", "1", "--out", str(out)]) == 2
        assert not out.exists()
        assert "error" in capsys.readouterr().err

    def test_worst_pair_matches_enumeration(self, model_path):
        model = load_model(model_path)
        gaps = pairwise_mean_gaps(model, mode="worst_pair")
        i, j = enumerate_worst_pair(model.means, model.variances)
        expect = (model.means[i] - model.means[j]) ** 2
        np.testing.assert_allclose(gaps, expect, rtol=1e-12)


# ---------------------------------------------------------------------------
# sweep-power
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def power_outputs(tmp_path_factory, model_path):
    tmp = tmp_path_factory.mktemp("sp")
    cfg = _sweep_cfg(tmp, model_path, POWER_BODY)
    out = tmp / "sweep.csv"
    assert main(["sweep-power", "--config", cfg, "--out", str(out)]) == 0
    return cfg, out


class TestSweepPower:
    def test_row_count_and_header(self, power_outputs):
        _, out = power_outputs
        comments, header, rows = _read_rows(out)
        assert header == [
            "p_c_db",
            "criterion",
            "total_dg_mean",
            "error_bound",
            "accuracy",
            "stderr",
        ]
        assert len(rows) == 32
        assert {r[1] for r in rows} == {"MSE", "DG"}

    def test_provenance_header(self, power_outputs):
        cfg, out = power_outputs
        comments, _, _ = _read_rows(out)
        joined = "\n".join(comments)
        assert "# resolved_seed = 7" in joined
        assert "# resolved_trials = 4096" in joined
        assert "# pc_grid_db = -5:10:1" in joined

    def test_rerun_byte_identical(self, power_outputs, tmp_path):
        cfg, out = power_outputs
        again = tmp_path / "again.csv"
        assert main(["sweep-power", "--config", cfg, "--out", str(again)]) == 0
        assert open(out, "rb").read() == open(again, "rb").read()

    def test_criterion_override_halves_rows(self, power_outputs, tmp_path):
        cfg, _ = power_outputs
        out = tmp_path / "dg.csv"
        assert (
            main(["sweep-power", "--config", cfg, "--out", str(out), "--criterion", "DG"])
            == 0
        )
        _, _, rows = _read_rows(out)
        assert len(rows) == 16
        assert {r[1] for r in rows} == {"DG"}

    def test_seed_override_changes_values(self, power_outputs, tmp_path):
        cfg, out = power_outputs
        other = tmp_path / "seeded.csv"
        assert (
            main(["sweep-power", "--config", cfg, "--out", str(other), "--seed", "8"])
            == 0
        )
        assert open(out, "rb").read() != open(other, "rb").read()

    def test_dg_values_are_finite_floats(self, power_outputs):
        _, out = power_outputs
        _, _, rows = _read_rows(out)
        for r in rows:
            assert math.isfinite(float(r[2]))
            assert 0.0 <= float(r[4]) <= 1.0


# ---------------------------------------------------------------------------
# sweep-beta
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def beta_outputs(tmp_path_factory, model_path):
    tmp = tmp_path_factory.mktemp("sb")
    cfg = _sweep_cfg(tmp, model_path, BETA_BODY)
    out = tmp / "beta.csv"
    assert main(["sweep-beta", "--config", cfg, "--out", str(out)]) == 0
    return cfg, out


class TestSweepBeta:

    def test_row_counts(self, beta_outputs):
        _, out = beta_outputs
        _, header, rows = _read_rows(out)
        assert header == [
            "row",
            "beta",
            "criterion",
            "total_dg_mean",
            "accuracy",
            "stderr",
            "valid",
        ]
        data = [r for r in rows if r[0] == "data"]
        arg = [r for r in rows if r[0] == "argmax"]
        assert len(data) == 38
        assert len(arg) == 2

    def test_argmax_rows_match_best_data_row(self, beta_outputs):
        _, out = beta_outputs
        _, _, rows = _read_rows(out)
        data = [r for r in rows if r[0] == "data"]
        for arg in (r for r in rows if r[0] == "argmax"):
            crit = arg[2]
            best = max(
                (r for r in data if r[2] == crit and r[6] == "1"),
                key=lambda r: float(r[4]),
            )
            assert arg[1] == best[1]
            assert arg[4] == best[4]

    def test_dg_argmax_accuracy_at_least_mse(self, beta_outputs):
        _, out = beta_outputs
        _, _, rows = _read_rows(out)
        acc = {r[2]: float(r[4]) for r in rows if r[0] == "argmax"}
        assert acc["DG"] >= acc["MSE"]

    def test_beta_one_flagged_invalid(self, tmp_path, model_path):
        body = BETA_BODY.replace("beta_grid = 0.05:0.95:0.05", "beta_grid = 0.5,1.0")
        body = body.replace("trials = 16384", "trials = 2048")
        cfg = _sweep_cfg(tmp_path, model_path, body)
        out = tmp_path / "edge.csv"
        assert main(["sweep-beta", "--config", cfg, "--out", str(out)]) == 0
        _, _, rows = _read_rows(out)
        ones = [r for r in rows if r[0] == "data" and r[1] == "1"]
        assert len(ones) == 2
        for r in ones:
            assert r[6] == "0"
            assert r[4] == "nan"
        for r in (r for r in rows if r[0] == "argmax"):
            assert r[1] != "1"

    def test_rerun_byte_identical(self, beta_outputs, tmp_path):
        cfg, out = beta_outputs
        again = tmp_path / "again.csv"
        assert main(["sweep-beta", "--config", cfg, "--out", str(again)]) == 0
        assert open(out, "rb").read() == open(again, "rb").read()


# ---------------------------------------------------------------------------
# closed-forms
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def cf_output(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cf")
    out = tmp / "cf.csv"
    code = main(
        [
            "closed-forms",
            "--rho-grid",
            "0.01,1,100,1e6",
            "--dg-grid",
            "0,2,4",
            "--trials",
            "200000",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    return out


class TestClosedForms:

    def test_layout(self, cf_output):
        _, header, rows = _read_rows(cf_output)
        assert header == ["kind", "x", "closed_form", "monte_carlo", "rel_err", "valid"]
        kinds = [r[0] for r in rows]
        assert kinds.count("avg_dg") == 4
        assert kinds.count("binary_error") == 3
        assert kinds.count("union_bound") == 3

    def test_high_snr_limit_row(self, cf_output):
        _, _, rows = _read_rows(cf_output)
        row = next(r for r in rows if r[0] == "avg_dg" and float(r[1]) == 1e6)
        assert abs(float(r[2]) - 4.0) / 4.0 < 1e-4 if (r := row) else False

    def test_monte_carlo_tracks_closed_forms(self, cf_output):
        # 2e5 draws keep every finite-probability row inside 2.5%.
        _, _, rows = _read_rows(cf_output)
        for r in rows:
            cf = float(r[2])
            if cf > 0.01:
                assert float(r[4]) < 0.025

    def test_union_equals_binary_at_two_classes(self, tmp_path):
        out = tmp_path / "two.csv"
        assert (
            main(
                [
                    "closed-forms",
                    "--classes",
                    "2",
                    "--dg-grid",
                    "0,1,4",
                    "--trials",
                    "1000",
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
        _, _, rows = _read_rows(out)
        binary = {r[1]: r[2] for r in rows if r[0] == "binary_error"}
        union = {r[1]: r[2] for r in rows if r[0] == "union_bound"}
        assert binary == union

    def test_invalid_flag_on_degenerate_bound(self, cf_output):
        _, _, rows = _read_rows(cf_output)
        zero = next(r for r in rows if r[0] == "union_bound" and float(r[1]) == 0.0)
        assert float(zero[2]) == pytest.approx(1.5)
        assert zero[5] == "0"

    def test_rejects_bad_grids(self, tmp_path, capsys):
        out = str(tmp_path / "x.csv")
        assert main(["closed-forms", "--rho-grid", "0,1", "--out", out]) == 2
        assert main(["closed-forms", "--rho-grid", "2,1", "--out", out]) == 2
        assert main(["closed-forms", "--classes", "1", "--out", out]) == 2
        capsys.readouterr()

    def test_rerun_byte_identical(self, tmp_path):
        outs = []
        for name in ("r1.csv", "r2.csv"):
            out = tmp_path / name
            assert (
                main(
                    [
                        "closed-forms",
                        "--dg-grid",
                        "0,2",
                        "--rho-grid",
                        "1",
                        "--trials",
                        "50000",
                        "--out",
                        str(out),
                    ]
                )
                == 0
            )
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


# ---------------------------------------------------------------------------
# Exit codes
# ---------------------------------------------------------------------------


class TestExitCodes:
    def test_missing_config_is_two(self, tmp_path, capsys):
        out = str(tmp_path / "x.csv")
        assert main(["sweep-power", "--config", "/nonexistent.cfg", "--out", out]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_model_is_two(self, tmp_path, capsys):
        cfg = _write(tmp_path / "exp.cfg", "model = missing.json\n" + POWER_BODY)
        assert main(["sweep-power", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 2
        capsys.readouterr()

    def test_dead_channel_is_three(self, tmp_path, model_path, capsys):
        body = POWER_BODY + "channel = fixed:0,0,0,0,0,0,0,0\n"
        cfg = _sweep_cfg(tmp_path, model_path, body.replace("trials = 4096", "trials = 64"))
        out = tmp_path / "dead.csv"
        assert main(["sweep-power", "--config", cfg, "--out", str(out)]) == 3
        assert "numerical failure" in capsys.readouterr().err
        assert not out.exists()

"""Figure rendering: exact fidelity to the CSV record, and error handling.

The source CSVs are produced by the senselink CLI itself, so these tests
exercise the real interface: experiment -> CSV -> figure.
"""

import csv

import matplotlib.pyplot as plt
import pytest

from senselink.cli import main as senselink_main

from render import KINDS, FigureSpec, main as render_main, render


# ---------------------------------------------------------------------------
# Real CSVs from the CLI, one per figure kind
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def csvs(tmp_path_factory):
    root = tmp_path_factory.mktemp("csvs")
    model = root / "model.json"
    assert senselink_main(["gen-model", "--out", str(model)]) == 0

    power_cfg = root / "power.cfg"
    power_cfg.write_text(
        f"model = {model}\n"
        "trials = 2048\nseed = 5\n"
        "channel_noise_power_linear = 0.1\n"
        "sensing_noise_power_linear = 0.1\nsensing_power_linear = 1.0\n"
        "pc_grid_db = -5:10:1\n",
        encoding="utf-8",
    )
    power = root / "power.csv"
    assert senselink_main(["sweep-power", "--config", str(power_cfg), "--out", str(power)]) == 0

    beta_cfg = root / "beta.cfg"
    beta_cfg.write_text(
        f"model = {model}\n"
        "trials = 2048\nseed = 5\n"
        "total_power_linear = 8.0\nsnr_r_linear = 100\nsnr_c_linear = 10\n"
        "beta_grid = 0.2,0.5,0.8,1.0\n",
        encoding="utf-8",
    )
    beta = root / "beta.csv"
    assert senselink_main(["sweep-beta", "--config", str(beta_cfg), "--out", str(beta)]) == 0

    closed = root / "closed.csv"
    assert senselink_main([
        "closed-forms", "--rho-grid", "0.01,1,100", "--dg-grid", "0,2,6",
        "--trials", "20000", "--out", str(closed),
    ]) == 0
    return {"power": power, "beta": beta, "closed": closed}


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(r for r in fh if not r.startswith("#")))


def _by_label(fig):
    out = {}
    for ax in fig.axes:
        for line in ax.get_lines():
            out[line.get_label()] = (
                [float(v) for v in line.get_xdata()],
                [float(v) for v in line.get_ydata()],
            )
    return out


def _columns(rows, x_col, y_col, criterion):
    picked = [r for r in rows if r["criterion"] == criterion]
    return ([float(r[x_col]) for r in picked], [float(r[y_col]) for r in picked])


# ---------------------------------------------------------------------------
# Fidelity: plotted points equal CSV values exactly
# ---------------------------------------------------------------------------


class TestFidelity:
    def test_dg_vs_power_two_16_point_series(self, csvs, tmp_path):
        rows = _rows(csvs["power"])
        assert len(rows) == 32
        fig = render(FigureSpec((str(csvs["power"]),), "dg_vs_power", str(tmp_path / "f.png")))
        lines = _by_label(fig)
        plt.close(fig)
        for crit in ("DG", "MSE"):
            x, y = lines[crit]
            assert len(x) == 16
            assert (x, y) == _columns(rows, "p_c_db", "total_dg_mean", crit)

    def test_accuracy_vs_power_points_and_bands(self, csvs, tmp_path):
        rows = _rows(csvs["power"])
        fig = render(FigureSpec((str(csvs["power"]),), "accuracy_vs_power", str(tmp_path / "f.png")))
        lines = _by_label(fig)
        bands = len(fig.axes[0].collections)
        plt.close(fig)
        for crit in ("DG", "MSE"):
            assert lines[crit] == _columns(rows, "p_c_db", "accuracy", crit)
        assert bands == 2  # one stderr band per criterion

    def test_accuracy_vs_beta_data_and_argmax_markers(self, csvs, tmp_path):
        rows = _rows(csvs["beta"])
        data = [r for r in rows if r["row"] == "data" and r["valid"] == "1"]
        marks = [r for r in rows if r["row"] == "argmax"]
        assert marks and all(m["valid"] == "1" for m in marks)
        fig = render(FigureSpec((str(csvs["beta"]),), "accuracy_vs_beta", str(tmp_path / "f.png")))
        lines = _by_label(fig)
        plt.close(fig)
        for crit in ("DG", "MSE"):
            assert lines[crit] == _columns(data, "beta", "accuracy", crit)
            mx, my = lines[f"{crit} argmax"]
            (want,) = [m for m in marks if m["criterion"] == crit]
            assert mx == [float(want["beta"])]
            assert my == [float(want["accuracy"])]

    def test_beta_invalid_rows_stay_off_the_line(self, csvs, tmp_path):
        rows = _rows(csvs["beta"])
        assert any(r["valid"] == "0" for r in rows)  # the beta = 1.0 row
        fig = render(FigureSpec((str(csvs["beta"]),), "accuracy_vs_beta", str(tmp_path / "f.png")))
        lines = _by_label(fig)
        plt.close(fig)
        for crit in ("DG", "MSE"):
            assert 1.0 not in lines[crit][0]

    def test_closed_form_panels_exact(self, csvs, tmp_path):
        rows = [r for r in _rows(csvs["closed"]) if r["valid"] == "1"]
        kinds = sorted({r["kind"] for r in rows})
        fig = render(FigureSpec((str(csvs["closed"]),), "closed_form_validation", str(tmp_path / "f.png")))
        assert len(fig.axes) == len(kinds) == 3
        for ax, kind in zip(fig.axes, kinds):
            got_closed, got_mc = ax.get_lines()[:2]
            picked = [r for r in rows if r["kind"] == kind]
            assert [float(v) for v in got_closed.get_xdata()] == [float(r["x"]) for r in picked]
            assert [float(v) for v in got_closed.get_ydata()] == [float(r["closed_form"]) for r in picked]
            assert [float(v) for v in got_mc.get_ydata()] == [float(r["monte_carlo"]) for r in picked]
        plt.close(fig)


# ---------------------------------------------------------------------------
# All kinds render to image files
# ---------------------------------------------------------------------------


class TestRendering:
    def test_all_kinds_write_png(self, csvs, tmp_path):
        source = {
            "dg_vs_power": "power",
            "accuracy_vs_power": "power",
            "accuracy_vs_beta": "beta",
            "closed_form_validation": "closed",
        }
        for kind in KINDS:
            out = tmp_path / f"{kind}.png"
            code = render_main(
                ["--input", str(csvs[source[kind]]), "--kind", kind, "--output", str(out)]
            )
            assert code == 0
            assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_overlay_two_inputs(self, csvs, tmp_path):
        copy = tmp_path / "again.csv"
        copy.write_bytes(csvs["power"].read_bytes())
        fig = render(FigureSpec(
            (str(csvs["power"]), str(copy)), "dg_vs_power", str(tmp_path / "f.png")
        ))
        labels = sorted(_by_label(fig))
        plt.close(fig)
        assert labels == ["DG (again)", "DG (power)", "MSE (again)", "MSE (power)"]


# ---------------------------------------------------------------------------
# Errors: bad input leaves no file behind
# ---------------------------------------------------------------------------


class TestErrors:
    def test_empty_csv(self, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text("# senselink sweep-power v0.1.0\np_c_db,criterion,total_dg_mean\n")
        out = tmp_path / "f.png"
        with pytest.raises(ValueError, match="empty input"):
            render(FigureSpec((str(bad),), "dg_vs_power", str(out)))
        assert not out.exists()
        assert render_main(["--input", str(bad), "--kind", "dg_vs_power", "--output", str(out)]) == 2
        assert not out.exists()

    def test_missing_columns(self, tmp_path):
        bad = tmp_path / "odd.csv"
        bad.write_text("alpha,beta\n1,2\n")
        out = tmp_path / "f.png"
        with pytest.raises(ValueError, match="missing columns"):
            render(FigureSpec((str(bad),), "accuracy_vs_power", str(out)))
        assert not out.exists()

    def test_missing_file(self, tmp_path):
        out = tmp_path / "f.png"
        code = render_main(
            ["--input", str(tmp_path / "nope.csv"), "--kind", "dg_vs_power", "--output", str(out)]
        )
        assert code == 2
        assert not out.exists()

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown figure kind"):
            FigureSpec(("x.csv",), "scatter_matrix", "f.png")

    def test_no_inputs_rejected(self):
        with pytest.raises(ValueError, match="at least one input"):
            FigureSpec((), "dg_vs_power", "f.png")

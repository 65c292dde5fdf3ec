import csv
import json
import os

import numpy as np
import pytest
from matplotlib.collections import PolyCollection

from plotkit.curves import CurveSpec, load_rows, mean_band, setting_curves
from plotkit.cli import main
from plotkit.figures import plot_convergence, plot_summary_bars

HEADER = ["setting", "seed", "epoch", "team", "split", "accuracy",
          "mean_reward"]


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        writer.writerows(rows)


def _constant_rows(setting, seed, acc, epochs=(100, 200, 300), team=1):
    rows = []
    for e in epochs:
        rows.append([setting, seed, e, team, "train", 0.9, -5.0])
        rows.append([setting, seed, e, team, "test", acc, -5.0])
    return rows


@pytest.fixture
def two_seed_csv(tmp_path):
    path = tmp_path / "epochs.csv"
    _write_csv(path, _constant_rows("coop_base", 1, 0.4)
               + _constant_rows("coop_base", 2, 0.6))
    return str(path)


def test_band_half_width_is_sample_std(two_seed_csv, tmp_path):
    out = str(tmp_path / "fig.png")
    spec = CurveSpec(settings=["coop_base"], split="test", out_path=out)
    fig = plot_convergence(two_seed_csv, spec)
    # data layer: mean line at 0.5, band spanning +-1 sample std
    line = fig.axes[0].lines[0]
    np.testing.assert_allclose(line.get_ydata(), 0.5, atol=1e-12)
    expect_std = np.std([0.4, 0.6], ddof=1)
    band = [c for c in fig.axes[0].collections
            if isinstance(c, PolyCollection)][0]
    ys = band.get_paths()[0].vertices[:, 1]
    np.testing.assert_allclose(ys.min(), 0.5 - expect_std, atol=1e-9)
    np.testing.assert_allclose(ys.max(), 0.5 + expect_std, atol=1e-9)
    assert os.path.getsize(out) > 0


def test_single_seed_band_has_zero_width(tmp_path):
    path = tmp_path / "epochs.csv"
    _write_csv(path, _constant_rows("coop_base", 1, 0.4))
    grid, curves = setting_curves(load_rows(str(path)), "coop_base", "test")
    mean, std = mean_band(curves)
    np.testing.assert_array_equal(std, 0.0)
    np.testing.assert_allclose(mean, 0.4)


def test_missing_setting_is_an_error(two_seed_csv, tmp_path):
    spec = CurveSpec(settings=["comp_do"], out_path=str(tmp_path / "f.png"))
    with pytest.raises(ValueError):
        plot_convergence(two_seed_csv, spec)
    rc = main(["convergence", "--csv", two_seed_csv, "--settings", "comp_do",
               "--out", str(tmp_path / "f.png")])
    assert rc == 1


def test_empty_csv_is_an_error(tmp_path):
    path = tmp_path / "epochs.csv"
    _write_csv(path, [])
    with pytest.raises(ValueError):
        load_rows(str(path))


def test_carry_forward_past_early_stop(tmp_path):
    # seed 2 stops at epoch 200 with best train at 200; its test value
    # carries to epoch 300 when aligned with seed 1
    rows = _constant_rows("x", 1, 0.30)
    rows += [["x", 2, 100, 1, "train", 0.5, 0.0],
             ["x", 2, 100, 1, "test", 0.20, 0.0],
             ["x", 2, 200, 1, "train", 1.0, 0.0],
             ["x", 2, 200, 1, "test", 0.80, 0.0]]
    path = tmp_path / "epochs.csv"
    _write_csv(path, rows)
    grid, curves = setting_curves(load_rows(str(path)), "x", "test")
    assert list(grid) == [100, 200, 300]
    np.testing.assert_allclose(curves[1], [0.20, 0.80, 0.80])


def test_winner_derivation_and_losing_curves(tmp_path):
    rows = []
    for team, train_acc, test_acc in ((1, 0.6, 0.3), (2, 1.0, 0.7)):
        for e in (100, 200):
            rows.append(["duel", 1, e, team, "train", train_acc, 0.0])
            rows.append(["duel", 1, e, team, "test", test_acc, 0.0])
    path = tmp_path / "epochs.csv"
    _write_csv(path, rows)
    _, win = setting_curves(load_rows(str(path)), "duel", "test", "winning")
    _, lose = setting_curves(load_rows(str(path)), "duel", "test", "losing")
    np.testing.assert_allclose(win[0], 0.7)
    np.testing.assert_allclose(lose[0], 0.3)


def test_runs_directory_input(tmp_path):
    d = tmp_path / "runs" / "coop_base" / "1"
    os.makedirs(d)
    _write_csv(d / "epochs.csv", _constant_rows("coop_base", 1, 0.4))
    rows = load_rows(str(tmp_path / "runs"))
    assert len(rows) == 6


def test_identical_inputs_yield_identical_images(two_seed_csv, tmp_path):
    a, b = str(tmp_path / "a.png"), str(tmp_path / "b.png")
    plot_convergence(two_seed_csv, CurveSpec(settings=["coop_base"],
                                             out_path=a))
    plot_convergence(two_seed_csv, CurveSpec(settings=["coop_base"],
                                             out_path=b))
    assert open(a, "rb").read() == open(b, "rb").read()


# ---------------------------------------------------------------------------
# summary bars

def _golden_summary(tmp_path, **cells):
    table = {"comp_rs_do": {
        "seeds": 2,
        "winning_train_acc": {"mean": 1.0, "std": 0.0},
        "winning_test_acc": {"mean": 0.75, "std": 0.1},
        "losing_train_acc": {"mean": 0.6, "std": 0.12},
        "losing_test_acc": {"mean": 0.3, "std": 0.14},
    }}
    table["comp_rs_do"].update(cells)
    path = tmp_path / "summary.json"
    path.write_text(json.dumps(table))
    return str(path)


def test_summary_bars_geometry(tmp_path):
    path = _golden_summary(tmp_path)
    out = str(tmp_path / "bars.png")
    fig = plot_summary_bars(path, out)
    heights = sorted(p.get_height() for p in fig.axes[0].patches
                     if p.get_height() > 0)
    np.testing.assert_allclose(heights, [0.3, 0.6, 0.75, 1.0], atol=1e-12)
    assert os.path.getsize(out) > 0


def test_summary_bars_reject_out_of_range(tmp_path):
    path = _golden_summary(tmp_path,
                           winning_test_acc={"mean": 1.4, "std": 0.0})
    with pytest.raises(ValueError):
        plot_summary_bars(path, None)
    assert main(["bars", "--summary", path,
                 "--out", str(tmp_path / "x.png")]) == 1


def test_cli_end_to_end(two_seed_csv, tmp_path):
    out = str(tmp_path / "fig.png")
    assert main(["convergence", "--csv", two_seed_csv, "--settings",
                 "coop_base", "--split", "test", "--out", out]) == 0
    assert os.path.getsize(out) > 0
    summary = _golden_summary(tmp_path)
    out2 = str(tmp_path / "bars.png")
    assert main(["bars", "--summary", summary, "--out", out2]) == 0
    assert os.path.getsize(out2) > 0

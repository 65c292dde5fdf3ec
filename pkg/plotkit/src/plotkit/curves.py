"""Checkpoint-CSV parsing and curve assembly.

Reads only the documented log schema
(`setting,seed,epoch,team,split,accuracy,mean_reward`); everything shown in a
figure is recomputed from those rows alone. A run's winning team is the one
with the highest train accuracy at its final checkpoint (ties go to the lower
team index), and test curves carry the value achieved at the best train
accuracy forward past the run's stopping epoch.
"""

from __future__ import annotations

import csv
import os
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

CSV_FIELDS = ("setting", "seed", "epoch", "team", "split", "accuracy",
              "mean_reward")


@dataclass
class CurveSpec:
    settings: list[str]
    split: str = "test"           # train | test
    team: str = "winning"         # winning | losing
    smoothing: int = 0            # box window; 0 disables
    out_path: str = "curves.png"

    def __post_init__(self):
        if self.split not in ("train", "test"):
            raise ValueError("split must be 'train' or 'test'")
        if self.team not in ("winning", "losing"):
            raise ValueError("team must be 'winning' or 'losing'")
        if self.smoothing < 0:
            raise ValueError("smoothing window must be >= 0")


def _parse_rows(path: str) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing CSV columns {sorted(missing)}")
        for rec in reader:
            rows.append({
                "setting": rec["setting"],
                "seed": int(rec["seed"]),
                "epoch": int(rec["epoch"]),
                "team": int(rec["team"]),
                "split": rec["split"],
                "accuracy": float(rec["accuracy"]),
            })
    return rows


def load_rows(path: str) -> list[dict]:
    """Rows from a single CSV file, or from every epochs.csv below a directory."""
    if os.path.isdir(path):
        rows = []
        for root, _, files in sorted(os.walk(path)):
            if "epochs.csv" in files:
                rows.extend(_parse_rows(os.path.join(root, "epochs.csv")))
        if not rows:
            raise ValueError(f"no epochs.csv files under {path}")
        return rows
    rows = _parse_rows(path)
    if not rows:
        raise ValueError(f"{path} holds no checkpoint rows")
    return rows


@dataclass
class RunCurve:
    epochs: np.ndarray
    train: dict[int, np.ndarray] = field(default_factory=dict)
    test: dict[int, np.ndarray] = field(default_factory=dict)

    def winner(self) -> int:
        finals = {t: v[-1] for t, v in self.train.items()}
        best = max(finals.values())
        return min(t for t, v in finals.items() if v == best)


def _runs_for(rows: list[dict], setting: str) -> dict[int, RunCurve]:
    per_seed: dict[int, dict] = defaultdict(lambda: defaultdict(dict))
    for r in rows:
        if r["setting"] != setting:
            continue
        per_seed[r["seed"]][(r["team"], r["split"])][r["epoch"]] = r["accuracy"]
    runs = {}
    for seed, cells in per_seed.items():
        epochs = sorted({e for series in cells.values() for e in series})
        run = RunCurve(np.asarray(epochs))
        for (team, split), series in cells.items():
            values = np.array([series.get(e, np.nan) for e in epochs])
            getattr(run, split)[team] = values
        runs[seed] = run
    return runs


def _carried_curve(run: RunCurve, team: int, split: str,
                   grid: np.ndarray) -> np.ndarray:
    """Step function over the grid with last-best carry-forward at the end."""
    values = getattr(run, split)[team]
    train = run.train[team]
    best = np.nanargmax(train[::-1])  # last index achieving the max
    carried = values[len(train) - 1 - best]
    out = np.full(len(grid), np.nan)
    for k, g in enumerate(grid):
        idx = np.searchsorted(run.epochs, g, side="right") - 1
        if idx < 0:
            continue
        out[k] = carried if g > run.epochs[-1] else values[idx]
    return out


def setting_curves(rows: list[dict], setting: str, split: str,
                   team_rule: str = "winning"):
    """(grid, per-seed matrix) for one setting; seeds aligned on a joint grid."""
    runs = _runs_for(rows, setting)
    if not runs:
        raise ValueError(f"setting {setting!r} not present in the CSV input")
    grid = np.array(sorted({e for run in runs.values()
                            for e in run.epochs.tolist()}))
    curves = []
    for seed in sorted(runs):
        run = runs[seed]
        teams = sorted(run.train)
        win = run.winner()
        team = win if team_rule == "winning" else _loser(teams, win)
        if team is None:
            continue
        curves.append(_carried_curve(run, team, split, grid))
    if not curves:
        raise ValueError(f"setting {setting!r} has no {team_rule}-team runs")
    return grid, np.vstack(curves)


def _loser(teams: list[int], winner: int):
    others = [t for t in teams if t != winner]
    return others[0] if others else None


def smooth(values: np.ndarray, window: int) -> np.ndarray:
    if window <= 1:
        return values
    kernel = np.ones(window) / window
    pad = np.concatenate([np.repeat(values[:1], window - 1), values])
    return np.convolve(pad, kernel, mode="valid")


def mean_band(curves: np.ndarray):
    """Across-seed mean and sample standard deviation (0 width for one seed)."""
    mean = np.nanmean(curves, axis=0)
    if curves.shape[0] > 1:
        std = np.nanstd(curves, axis=0, ddof=1)
    else:
        std = np.zeros(curves.shape[1])
    return mean, std

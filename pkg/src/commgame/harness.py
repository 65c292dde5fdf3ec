"""Plan execution and aggregation: one directory per (setting, seed) run with
a streamed checkpoint CSV, a JSON summary, greedy transcripts and a parameter
checkpoint; summaries aggregate winning/losing-team statistics across seeds.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
import os
import time
import traceback
from dataclasses import asdict, dataclass, field

import numpy as np

from .arena import EpisodeConfig, SideSpec, base_reward, run_batch, transcript_lines
from .checkpoint import save_checkpoint
from .config import SETTINGS, PlanConfig, Setting
from .metrics import report
from .trainer import Team, evaluate, full_train, make_team
from .world import enumerate_instances, enumerate_tasks, instances_to_array, split_dataset

CSV_HEADER = ["setting", "seed", "epoch", "team", "split", "accuracy",
              "mean_reward"]


def run_dir(out_dir: str, setting_id: str, seed: int) -> str:
    return os.path.join(out_dir, setting_id, str(seed))


def is_complete(out_dir: str, setting_id: str, seed: int) -> bool:
    return os.path.exists(os.path.join(run_dir(out_dir, setting_id, seed),
                                       "summary.json"))


def _make_teams(plan: PlanConfig, setting: Setting, seed: int) -> list[Team]:
    agent_cfg = plan.resolved_agent(setting)
    train_cfg = plan.resolved_train(setting)
    return [make_team(agent_cfg, plan.world.values_per_attribute, seed, k + 1,
                      train_cfg.init_scale)
            for k in range(setting.teams)]


def run_one(plan: PlanConfig, setting_id: str, seed: int) -> dict:
    """Execute one (setting, seed) run and persist its artifacts."""
    setting = SETTINGS[setting_id]
    train_cfg = plan.resolved_train(setting)
    flags = plan.resolved_flags(setting)
    directory = run_dir(plan.out_dir, setting_id, seed)
    os.makedirs(directory, exist_ok=True)

    instances = enumerate_instances(plan.world)
    dataset = split_dataset(instances, plan.world.split_fraction,
                            plan.world.split_seed)
    teams = _make_teams(plan, setting, seed)

    csv_path = os.path.join(directory, "epochs.csv")
    t0 = time.time()
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        fh.flush()

        def on_checkpoint(stats):
            writer.writerow([setting_id, seed, stats.epoch, stats.team,
                             "train", f"{stats.train_acc:.6f}",
                             f"{stats.mean_reward:.6f}"])
            writer.writerow([setting_id, seed, stats.epoch, stats.team,
                             "test", f"{stats.test_acc:.6f}",
                             f"{stats.mean_reward:.6f}"])
            fh.flush()

        state = full_train(teams, dataset, flags, train_cfg, seed,
                           on_checkpoint=on_checkpoint)

    test_values = instances_to_array(dataset.test)
    train_values = instances_to_array(dataset.train)
    summary = {
        "setting": setting_id, "seed": seed,
        "stop_epoch": state.epoch, "stopped_early": state.stopped_early,
        "winner": state.winner, "teams": setting.teams,
        "wall_seconds": round(time.time() - t0, 1),
        "config": {
            "world": asdict(plan.world), "agent": asdict(plan.resolved_agent(setting)),
            "train": asdict(train_cfg), "flags": asdict(flags),
        },
        "team_stats": [],
    }
    for k, team in enumerate(teams):
        train_acc, _ = evaluate(team, train_values, rounds=train_cfg.rounds)
        test_acc, test_log = evaluate(team, test_values, rounds=train_cfg.rounds)
        rep = report(test_log)
        summary["team_stats"].append({
            "team": k + 1, "train_acc": train_acc, "test_acc": test_acc,
            **rep.to_dict()})
    if setting.pick_by_validation:
        accs = [s["test_acc"] for s in summary["team_stats"]]
        summary["validation_winner"] = int(np.argmax(accs)) + 1

    _dump_transcripts(os.path.join(directory, "transcripts.txt"), teams[0],
                      test_values, train_cfg)
    save_checkpoint(os.path.join(directory, "checkpoint.bin"),
                    {f"team{k + 1}/{role}": store
                     for k, team in enumerate(teams)
                     for role, store in (("qbot", team.qbot.store),
                                         ("abot", team.abot.store))},
                    seed,
                    {f"team{k + 1}": team.adam_q.t
                     for k, team in enumerate(teams)})
    with open(os.path.join(directory, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1)
    return summary


def _dump_transcripts(path: str, team: Team, inst_values: np.ndarray,
                      cfg) -> None:
    """Greedy test-split dialogs for manual inspection, capped at eval_episodes."""
    n_tasks = len(enumerate_tasks())
    inst_idx = np.repeat(np.arange(len(inst_values)), n_tasks)
    task_idx = np.tile(np.arange(n_tasks), len(inst_values))
    cap = min(len(inst_idx), cfg.eval_episodes)
    spec = SideSpec(team.qbot, team.abot, task_idx[:cap],
                    inst_values[inst_idx[:cap]])
    tr = run_batch([spec], EpisodeConfig(cfg.rounds, cfg.reward_scale,
                                         "greedy"))[0]
    tr.reward = base_reward(tr.correct, cfg.reward_scale)
    with open(path, "w") as fh:
        fh.write("\n".join(transcript_lines(tr)) + "\n")


def _run_one_entry(args):
    plan, setting_id, seed = args
    try:
        run_one(plan, setting_id, seed)
        return setting_id, seed, None
    except Exception:
        return setting_id, seed, traceback.format_exc()


def run_plan(plan: PlanConfig, progress=print) -> int:
    """Run every (setting, seed) pair not yet completed; returns failure count.

    Failures are reported per run without aborting the rest of the plan."""
    todo = [(plan, sid, seed) for sid in plan.settings for seed in plan.seeds
            if not is_complete(plan.out_dir, sid, seed)]
    skipped = len(plan.settings) * len(plan.seeds) - len(todo)
    if skipped and progress:
        progress(f"skipping {skipped} completed run(s)")
    failures = 0
    if plan.workers > 1 and len(todo) > 1:
        with multiprocessing.get_context("fork").Pool(plan.workers) as pool:
            for sid, seed, err in pool.imap_unordered(_run_one_entry, todo):
                failures += _report(progress, sid, seed, err)
    else:
        for args in todo:
            sid, seed, err = _run_one_entry(args)
            failures += _report(progress, sid, seed, err)
    return failures


def _report(progress, sid, seed, err) -> int:
    if err is None:
        if progress:
            progress(f"done {sid}/{seed}")
        return 0
    if progress:
        progress(f"FAILED {sid}/{seed}\n{err}")
    return 1


# ---------------------------------------------------------------------------
# aggregation

@dataclass
class SummaryTable:
    rows: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.rows, indent=1)


def _mean_std(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    out = {"mean": float(arr.mean())}
    out["std"] = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    if len(arr) == 1:
        out["single_seed"] = True
    return out


def load_summaries(out_dir: str, setting_id: str) -> list[dict]:
    base = os.path.join(out_dir, setting_id)
    if not os.path.isdir(base):
        return []
    out = []
    for seed_dir in sorted(os.listdir(base), key=lambda s: (len(s), s)):
        path = os.path.join(base, seed_dir, "summary.json")
        if os.path.exists(path):
            with open(path) as fh:
                out.append(json.load(fh))
    return out


def winning_losing(summary: dict) -> tuple[dict, dict | None]:
    """Per-run (winning, losing) team stats; validation rule for coop_double."""
    stats = summary["team_stats"]
    if len(stats) == 1:
        return stats[0], None
    win = summary.get("validation_winner", summary["winner"])
    return stats[win - 1], stats[2 - win]


def summarize(out_dir: str, setting_ids: list[str]) -> SummaryTable:
    """Mean +- sample std of winning/losing accuracies and metrics per setting."""
    table = SummaryTable()
    for sid in setting_ids:
        summaries = load_summaries(out_dir, sid)
        if not summaries:
            raise ValueError(f"no completed runs for setting {sid!r}")
        cols: dict[str, list[float]] = {}
        for summary in summaries:
            win, lose = winning_losing(summary)
            for key in ("train_acc", "test_acc", "ic", "sc",
                        "entropy_q", "entropy_a"):
                cols.setdefault(f"winning_{key}", []).append(win[key])
                if lose is not None:
                    cols.setdefault(f"losing_{key}", []).append(lose[key])
        table.rows[sid] = {"seeds": len(summaries)}
        table.rows[sid].update({k: _mean_std(v) for k, v in cols.items()})
    return table


def format_table(table: SummaryTable) -> str:
    lines = [f"{'setting':16} {'n':>2}  {'win train':>12} {'win test':>12} "
             f"{'lose train':>12} {'lose test':>12} {'win IC':>12}"]
    for sid, row in table.rows.items():
        def cell(key, pct=True):
            if key not in row:
                return f"{'-':>12}"
            scale = 100.0 if pct else 1.0
            return f"{row[key]['mean'] * scale:6.1f}±{row[key]['std'] * scale:5.1f}"
        lines.append(
            f"{sid:16} {row['seeds']:>2}  {cell('winning_train_acc')} "
            f"{cell('winning_test_acc')} {cell('losing_train_acc')} "
            f"{cell('losing_test_acc')} {cell('winning_ic', pct=False)}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# convergence curves

def load_records(out_dir: str, setting_id: str) -> list[dict]:
    """All checkpoint rows of a setting across seeds, parsed from the CSVs."""
    rows = []
    base = os.path.join(out_dir, setting_id)
    if not os.path.isdir(base):
        return rows
    for seed_dir in sorted(os.listdir(base), key=lambda s: (len(s), s)):
        path = os.path.join(base, seed_dir, "epochs.csv")
        if not os.path.exists(path):
            continue
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                rec["epoch"] = int(rec["epoch"])
                rec["team"] = int(rec["team"])
                rec["seed"] = int(rec["seed"])
                rec["accuracy"] = float(rec["accuracy"])
                rec["mean_reward"] = float(rec["mean_reward"])
                rows.append(rec)
    return rows


def curve_for_run(rows: list[dict], seed: int, team: int, split: str,
                  grid: np.ndarray) -> np.ndarray:
    """Accuracy at each grid epoch with last-best carry-forward after the end.

    Within the run the last checkpoint at or before the grid point is used;
    past the final checkpoint the test accuracy achieved at the best train
    accuracy is propagated."""
    run = [r for r in rows if r["seed"] == seed and r["team"] == team]
    chk = sorted({r["epoch"] for r in run})
    by = {(r["epoch"], r["split"]): r["accuracy"] for r in run}
    best_train = -1.0
    carried = np.nan
    for e in chk:
        tr = by.get((e, "train"))
        if tr is not None and tr >= best_train:
            best_train = tr
            carried = by.get((e, split), np.nan)
    out = np.full(len(grid), np.nan)
    last = chk[-1] if chk else -1
    for i, g in enumerate(grid):
        past = [e for e in chk if e <= g]
        if not past:
            continue
        out[i] = carried if g > last else by.get((past[-1], split), np.nan)
    return out


def mean_curve(out_dir: str, setting_id: str, split: str, grid: np.ndarray,
               team_rule: str = "winner") -> tuple[np.ndarray, np.ndarray]:
    """Across-seed mean and sample std of the per-run (winning-team) curves."""
    rows = load_records(out_dir, setting_id)
    summaries = load_summaries(out_dir, setting_id)
    curves = []
    for summary in summaries:
        team = summary.get("validation_winner", summary["winner"]) \
            if team_rule == "winner" else int(team_rule)
        curves.append(curve_for_run(rows, summary["seed"], team, split, grid))
    stack = np.vstack(curves)
    std = stack.std(axis=0, ddof=1) if len(curves) > 1 else np.zeros(len(grid))
    return stack.mean(axis=0), std

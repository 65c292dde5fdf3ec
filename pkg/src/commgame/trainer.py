"""Training loops: per-team cooperative epochs, joint competitive epochs,
the three-stage alternating schedule, masked greedy evaluation, early stop.

An "epoch" is one batch of (instance, task) pairs sampled uniformly with
replacement from the train split, rolled out stochastically, followed by one
clipped-Adam ascent step per agent. Reported accuracies always come from
greedy decoding with every cross-team input zero-masked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .agents import ABot, AgentConfig, QBot
from .arena import (CompetitionFlags, EpisodeConfig, SideSpec, base_reward,
                    compute_rewards, run_batch, run_competitive_batch)
from .metrics import EvalLog
from .nn import AdamState, accumulate_reinforce, optimizer_step
from .world import Dataset, enumerate_tasks, instances_to_array


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 1000
    max_epochs: int = 100_000
    reward_scale: float = 100.0
    wrong_mult: float = 10.0        # 100.0 for the strict single-team variant
    rounds: int = 2
    early_stop_train_acc: float = 1.0
    eval_every: int = 100
    stage_epochs: int = 1000
    clip: tuple[float, float] = (-5.0, 5.0)
    init_scale: float = 0.1
    baseline: str = "none"          # "none" | "mean" variance reduction
    eval_episodes: int = 1000       # cap for transcript dumps

    def __post_init__(self):
        if min(self.learning_rate, self.batch_size, self.max_epochs,
               self.rounds, self.eval_every, self.stage_epochs) <= 0:
            raise ValueError("hyperparameters must be positive")
        if self.reward_scale < 0:  # 0 is allowed: a deliberate no-op epoch
            raise ValueError("reward_scale must be non-negative")
        if self.baseline not in ("none", "mean"):
            raise ValueError("baseline must be 'none' or 'mean'")


# fixed stream labels so every run is reproducible from (seed, config)
_STREAMS = {"team1_init": 11, "team1_data": 12, "team1_roll": 13,
            "team2_init": 21, "team2_data": 22, "team2_roll": 23,
            "gate": 31}


def stream_rng(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, _STREAMS[label])))


@dataclass
class Team:
    name: str
    qbot: QBot
    abot: ABot
    adam_q: AdamState
    adam_a: AdamState
    rng_data: np.random.Generator
    rng_roll: np.random.Generator


def make_team(agent_cfg: AgentConfig, n_values: int, seed: int,
              index: int, init_scale: float = 0.1) -> Team:
    """Fresh team with its own init/data/rollout streams derived from the seed.

    Weights start uniform in [-init_scale, init_scale]; bias vectors start at
    zero. Random biases swamp the (initially tiny) input-dependent part of
    every head's logits, which freezes greedy behaviour at the start of
    training, so they are excluded from the random draw."""
    label = f"team{index}"
    n_tasks = len(enumerate_tasks())
    qbot = QBot(agent_cfg, n_tasks, n_values)
    abot = ABot(agent_cfg, n_values)
    rng = stream_rng(seed, f"{label}_init")
    for store in (qbot.store, abot.store):
        store.init_uniform(rng, init_scale)
        for name in store.names():
            if name.endswith("_b"):
                store[name][...] = 0.0
    return Team(label, qbot, abot,
                AdamState(qbot.store), AdamState(abot.store),
                stream_rng(seed, f"{label}_data"),
                stream_rng(seed, f"{label}_roll"))


def _sample_batch(team: Team, train_values: np.ndarray, n_tasks: int,
                  batch_size: int):
    inst = team.rng_data.integers(0, len(train_values), batch_size)
    task = team.rng_data.integers(0, n_tasks, batch_size)
    return train_values[inst], task


def _apply_update(team: Team, transcript, rewards: np.ndarray,
                  cfg: TrainConfig):
    coeff = np.asarray(rewards, dtype=np.float64)
    if cfg.baseline == "mean":
        coeff = coeff - coeff.mean()
    coeff = coeff / len(coeff)  # batch-mean gradient estimate
    accumulate_reinforce(transcript.trace_q, coeff)
    accumulate_reinforce(transcript.trace_a, coeff)
    optimizer_step(team.qbot.store, team.adam_q, cfg.learning_rate, cfg.clip)
    optimizer_step(team.abot.store, team.adam_a, cfg.learning_rate, cfg.clip)


def cooperative_train_epoch(team: Team, train_values: np.ndarray,
                            cfg: TrainConfig) -> float:
    """One sampled batch, REINFORCE accumulation, one ascent step per agent.

    Cross-team inputs are zeros throughout. Returns the batch mean reward."""
    n_tasks = len(enumerate_tasks())
    inst_vals, task_idx = _sample_batch(team, train_values, n_tasks,
                                        cfg.batch_size)
    ecfg = EpisodeConfig(rounds=cfg.rounds, mode="train")
    spec = SideSpec(team.qbot, team.abot, task_idx, inst_vals,
                    rng=team.rng_roll)
    tr = run_batch([spec], ecfg)[0]
    rewards = base_reward(tr.correct, cfg.reward_scale, cfg.wrong_mult)
    tr.reward = rewards
    _apply_update(team, tr, rewards, cfg)
    return float(rewards.mean())


def competitive_train_epoch(team1: Team, team2: Team,
                            train_values: np.ndarray,
                            flags: CompetitionFlags, cfg: TrainConfig,
                            gate_rng: np.random.Generator) -> tuple[float, float]:
    """Joint batch for both teams with the configured couplings."""
    n_tasks = len(enumerate_tasks())
    inst1, task1 = _sample_batch(team1, train_values, n_tasks, cfg.batch_size)
    inst2, task2 = _sample_batch(team2, train_values, n_tasks, cfg.batch_size)
    ecfg = EpisodeConfig(rounds=cfg.rounds, mode="train")
    spec1 = SideSpec(team1.qbot, team1.abot, task1, inst1, rng=team1.rng_roll,
                     other_task_idx=task2, other_inst_values=inst2)
    spec2 = SideSpec(team2.qbot, team2.abot, task2, inst2, rng=team2.rng_roll,
                     other_task_idx=task1, other_inst_values=inst1)
    t1, t2 = run_competitive_batch(spec1, spec2, flags, ecfg, gate_rng)
    outcome = compute_rewards(t1.correct, t2.correct, flags, cfg.reward_scale)
    t1.reward, t2.reward = outcome.reward_team1, outcome.reward_team2
    _apply_update(team1, t1, outcome.reward_team1, cfg)
    _apply_update(team2, t2, outcome.reward_team2, cfg)
    return float(outcome.reward_team1.mean()), float(outcome.reward_team2.mean())


def evaluate(team: Team, inst_values: np.ndarray, n_tasks: int | None = None,
             rounds: int = 2) -> tuple[float, EvalLog]:
    """Greedy accuracy over every (instance, task) pair, rivals zero-masked.

    Deterministic; consumes no randomness."""
    if n_tasks is None:
        n_tasks = len(enumerate_tasks())
    n_inst = len(inst_values)
    inst_idx = np.repeat(np.arange(n_inst), n_tasks)
    task_idx = np.tile(np.arange(n_tasks), n_inst)
    ecfg = EpisodeConfig(rounds=rounds, mode="greedy")
    spec = SideSpec(team.qbot, team.abot, task_idx, inst_values[inst_idx])
    tr = run_batch([spec], ecfg)[0]
    log = EvalLog(tr.questions, tr.answers, tr.predictions, tr.correct)
    return float(tr.correct.mean()), log


@dataclass
class EpochStats:
    epoch: int
    team: int               # 1-based
    train_acc: float
    test_acc: float
    mean_reward: float


@dataclass
class RunState:
    epoch: int = 0
    history: list[EpochStats] = field(default_factory=list)
    stopped_early: bool = False
    winner: int = 0         # 1-based index into the team list
    final_train_acc: list[float] = field(default_factory=list)
    final_test_acc: list[float] = field(default_factory=list)


def full_train(teams: list[Team], dataset: Dataset, flags: CompetitionFlags,
               cfg: TrainConfig, seed: int, on_checkpoint=None) -> RunState:
    """Run until a team greedily solves the whole train split, or max_epochs.

    Two teams cycle through the three stages (team-1 solo, team-2 solo, joint
    competitive); a single team trains cooperatively every epoch. Checkpoint
    rows (every eval_every epochs) report greedy train/test accuracy per team
    plus the mean sampled reward since the previous checkpoint.
    """
    train_values = instances_to_array(dataset.train)
    test_values = instances_to_array(dataset.test) if dataset.test else None
    gate_rng = stream_rng(seed, "gate")
    state = RunState()
    reward_sums = np.zeros(len(teams))
    reward_counts = np.zeros(len(teams))

    for epoch in range(1, cfg.max_epochs + 1):
        state.epoch = epoch
        if len(teams) == 1:
            r = cooperative_train_epoch(teams[0], train_values, cfg)
            reward_sums[0] += r
            reward_counts[0] += 1
        else:
            stage = ((epoch - 1) // cfg.stage_epochs) % 3
            if stage == 2:
                r1, r2 = competitive_train_epoch(teams[0], teams[1],
                                                 train_values, flags, cfg,
                                                 gate_rng)
                reward_sums += (r1, r2)
                reward_counts += 1
            else:
                r = cooperative_train_epoch(teams[stage], train_values, cfg)
                reward_sums[stage] += r
                reward_counts[stage] += 1

        if epoch % cfg.eval_every == 0 or epoch == cfg.max_epochs:
            train_accs = []
            for k, team in enumerate(teams):
                train_acc, _ = evaluate(team, train_values, rounds=cfg.rounds)
                test_acc = np.nan
                if test_values is not None:
                    test_acc, _ = evaluate(team, test_values, rounds=cfg.rounds)
                mean_r = (reward_sums[k] / reward_counts[k]
                          if reward_counts[k] else np.nan)
                stats = EpochStats(epoch, k + 1, train_acc, float(test_acc),
                                   float(mean_r))
                state.history.append(stats)
                train_accs.append(train_acc)
                if on_checkpoint is not None:
                    on_checkpoint(stats)
            reward_sums[:] = 0.0
            reward_counts[:] = 0.0
            if max(train_accs) >= cfg.early_stop_train_acc:
                state.stopped_early = True
                state.winner = int(np.argmax(train_accs)) + 1
                break

    if not state.winner:
        last = state.history[-len(teams):]
        state.winner = int(np.argmax([s.train_acc for s in last])) + 1
    for team in teams:
        tr_acc, _ = evaluate(team, train_values, rounds=cfg.rounds)
        te_acc = np.nan
        if test_values is not None:
            te_acc, _ = evaluate(team, test_values, rounds=cfg.rounds)
        state.final_train_acc.append(tr_acc)
        state.final_test_acc.append(float(te_acc))
    return state

"""Episode execution and rewards for one team or two interleaved rival teams.

Round schedule (forced by the cross-team state definitions): both questioners
speak first, conditioned on everything up to the previous round; then both
answerers speak, each additionally hearing this round's questions from both
teams. After the last round the questioner consumes the final tokens and
predicts. All cross-team slots are fed zeros whenever overhearing / task
sharing is inactive or masked, so single-team play is the exact structural
special case of two-team play.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agents import ABot, AgentState, QBot
from .nn import EpisodeTrace
from .world import Instance, TaskSpec, enumerate_tasks, tasks_to_array


@dataclass(frozen=True)
class CompetitionFlags:
    reward_sharing: bool = False
    dialog_overhearing: bool = False
    task_sharing: bool = False
    overhear_fraction: float = 0.5
    overhear_unit: str = "batch"  # "batch" | "episode"

    def __post_init__(self):
        if not 0.0 <= self.overhear_fraction <= 1.0:
            raise ValueError("overhear_fraction must lie in [0, 1]")
        if self.overhear_unit not in ("batch", "episode"):
            raise ValueError("overhear_unit must be 'batch' or 'episode'")

    @property
    def any_coupling(self) -> bool:
        return self.reward_sharing or self.dialog_overhearing or self.task_sharing


@dataclass(frozen=True)
class EpisodeConfig:
    rounds: int = 2
    reward_scale: float = 100.0
    mode: str = "train"  # "train" | "greedy"

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.reward_scale <= 0:
            raise ValueError("reward_scale must be positive")


@dataclass
class RewardOutcome:
    reward_team1: np.ndarray
    reward_team2: np.ndarray | None = None


@dataclass
class Transcript:
    """One episode, unbatched view (see BatchTranscript for the array form)."""

    task: TaskSpec
    instance: Instance
    tokens: list[tuple[int, int]]
    predictions: tuple[int, int]
    truth: tuple[int, int]
    correct: bool
    reward: float | None = None


@dataclass
class BatchTranscript:
    task_idx: np.ndarray       # (N,)
    inst_values: np.ndarray    # (N, 3)
    questions: np.ndarray      # (N, T)
    answers: np.ndarray        # (N, T)
    predictions: np.ndarray    # (N, 2)
    truth: np.ndarray          # (N, 2)
    correct: np.ndarray        # (N,) bool
    logp_sum: np.ndarray       # (N,) sum of chosen log-probs (0 in greedy mode)
    trace_q: EpisodeTrace | None = None
    trace_a: EpisodeTrace | None = None
    reward: np.ndarray | None = None

    def __len__(self):
        return len(self.task_idx)

    def episode(self, i: int) -> Transcript:
        tasks = enumerate_tasks()
        return Transcript(
            task=tasks[int(self.task_idx[i])],
            instance=Instance(tuple(int(v) for v in self.inst_values[i])),
            tokens=list(zip(self.questions[i].tolist(), self.answers[i].tolist())),
            predictions=tuple(int(v) for v in self.predictions[i]),
            truth=tuple(int(v) for v in self.truth[i]),
            correct=bool(self.correct[i]),
            reward=None if self.reward is None else float(self.reward[i]),
        )


@dataclass
class OverheardFeed:
    """Static rival-token feed for single-team runs: round-t slots."""

    questions: np.ndarray  # (N, T)
    answers: np.ndarray    # (N, T)


@dataclass
class SideSpec:
    """Everything one team contributes to a batched rollout."""

    qbot: QBot
    abot: ABot
    task_idx: np.ndarray
    inst_values: np.ndarray
    rng: np.random.Generator | None = None
    other_task_idx: np.ndarray | None = None    # task-sharing input or None
    other_inst_values: np.ndarray | None = None
    overheard: OverheardFeed | None = None      # only for single-side rollouts
    forced_q: np.ndarray | None = None          # (N, T) replay tokens
    forced_a: np.ndarray | None = None
    forced_w: np.ndarray | None = None          # (N, 2) replay predictions


def base_reward(correct, scale: float, wrong_mult: float = 10.0):
    """Independent-team rule: +R when both guesses match, -wrong_mult*R otherwise."""
    return np.where(correct, scale, -wrong_mult * scale)


def compute_rewards(correct1, correct2, flags: CompetitionFlags,
                    scale: float) -> RewardOutcome:
    """Per-team rewards; with reward sharing the asymmetric rival-aware table:
    (ok, ok) -> (+R, +R); (ok, bad) -> (+R, -100R); (bad, bad) -> (-10R, -10R).
    """
    if correct2 is None:
        return RewardOutcome(base_reward(correct1, scale))
    c1 = np.asarray(correct1, dtype=bool)
    c2 = np.asarray(correct2, dtype=bool)
    if flags.reward_sharing:
        r1 = np.where(c1, scale, np.where(c2, -100.0 * scale, -10.0 * scale))
        r2 = np.where(c2, scale, np.where(c1, -100.0 * scale, -10.0 * scale))
    else:
        r1 = base_reward(c1, scale)
        r2 = base_reward(c2, scale)
    return RewardOutcome(r1, r2)


def _truth_for(task_idx: np.ndarray, inst_values: np.ndarray) -> np.ndarray:
    pairs = tasks_to_array(enumerate_tasks())[np.asarray(task_idx)]
    rows = np.arange(len(task_idx))
    return np.stack([inst_values[rows, pairs[:, 0]],
                     inst_values[rows, pairs[:, 1]]], axis=1)


class _SideCtx:
    """Mutable per-side rollout bookkeeping."""

    def __init__(self, spec: SideSpec, n: int, rounds: int, mode: str):
        self.spec = spec
        self.trace_q = EpisodeTrace(spec.qbot.store, n, mode)
        self.trace_a = EpisodeTrace(spec.abot.store, n, mode)
        self.qstate: AgentState | None = None
        self.astate: AgentState | None = None
        self.questions = np.zeros((n, rounds), dtype=np.int64)
        self.answers = np.zeros((n, rounds), dtype=np.int64)
        self.logp = np.zeros(n)

    def rival_tokens(self, other: "_SideCtx | None", t: int, hear):
        """Round-t rival (question, answer) slots, or (None, None) when masked.

        t indexes the round whose tokens are requested; pass t == -1 for
        "no such round" (e.g. answers before round 0)."""
        if hear is None or t < 0:
            return None, None
        mask = hear if isinstance(hear, np.ndarray) else None
        if other is not None:
            return ((other.questions[:, t], mask), (other.answers[:, t], mask))
        feed = self.spec.overheard
        if feed is None:
            return None, None
        return (feed.questions[:, t], mask), (feed.answers[:, t], mask)


def run_batch(specs: list[SideSpec], cfg: EpisodeConfig,
              hear=None, share_tasks: bool = False) -> list[BatchTranscript]:
    """Roll out one batch of episodes for one or two sides.

    hear: None (no overhearing), True (whole batch overhears), or a (N,) bool
    mask (per-episode gating). share_tasks wires each side's rival task /
    instance inputs from its SideSpec (zeros when the spec carries none).
    """
    n = len(np.asarray(specs[0].task_idx))
    mode = cfg.mode
    sides = [_SideCtx(s, n, cfg.rounds, mode) for s in specs]
    if hear is True:
        hear = "all"

    for ctx in sides:
        s = ctx.spec
        other_task = s.other_task_idx if share_tasks else None
        other_inst = s.other_inst_values if share_tasks else None
        ctx.qstate = s.qbot.begin(ctx.trace_q, s.task_idx, other_task)
        ctx.astate = s.abot.begin(ctx.trace_a, s.inst_values, other_inst)

    for t in range(cfg.rounds):
        for k, ctx in enumerate(sides):
            other = sides[1 - k] if len(sides) == 2 else None
            if t > 0:
                oq, oa = ctx.rival_tokens(other, t - 1, hear)
                ctx.spec.qbot.listen_round(ctx.trace_q, ctx.qstate,
                                           ctx.answers[:, t - 1], oq, oa)
            forced = None if ctx.spec.forced_q is None else ctx.spec.forced_q[:, t]
            q, lp = ctx.spec.qbot.speak(ctx.trace_q, ctx.qstate,
                                        ctx.spec.rng, mode, forced)
            ctx.questions[:, t] = q
            ctx.logp += lp
        for k, ctx in enumerate(sides):
            other = sides[1 - k] if len(sides) == 2 else None
            oq, _ = ctx.rival_tokens(other, t, hear)
            _, oa = ctx.rival_tokens(other, t - 1, hear)
            ctx.spec.abot.listen_round(ctx.trace_a, ctx.astate,
                                       ctx.questions[:, t], oq, oa)
            forced = None if ctx.spec.forced_a is None else ctx.spec.forced_a[:, t]
            a, lp = ctx.spec.abot.speak(ctx.trace_a, ctx.astate,
                                        ctx.spec.rng, mode, forced)
            ctx.answers[:, t] = a
            ctx.logp += lp

    out = []
    last = cfg.rounds - 1
    for k, ctx in enumerate(sides):
        other = sides[1 - k] if len(sides) == 2 else None
        oq, oa = ctx.rival_tokens(other, last, hear)
        ctx.spec.qbot.listen_round(ctx.trace_q, ctx.qstate,
                                   ctx.answers[:, last], oq, oa)
        fw = ctx.spec.forced_w
        preds, lp = ctx.spec.qbot.predict(
            ctx.trace_q, ctx.qstate, ctx.spec.rng, mode,
            (None, None) if fw is None else (fw[:, 0], fw[:, 1]))
        ctx.logp += lp
        preds = np.stack(preds, axis=1)
        truth = _truth_for(ctx.spec.task_idx, ctx.spec.inst_values)
        correct = (preds == truth).all(axis=1)
        out.append(BatchTranscript(
            task_idx=np.asarray(ctx.spec.task_idx),
            inst_values=np.asarray(ctx.spec.inst_values),
            questions=ctx.questions, answers=ctx.answers,
            predictions=preds, truth=truth, correct=correct,
            logp_sum=ctx.logp, trace_q=ctx.trace_q, trace_a=ctx.trace_a))
    return out


def run_team_episode(qbot: QBot, abot: ABot, inst_values, task_idx,
                     cfg: EpisodeConfig, rng=None, overheard=None,
                     shared=None, hear=None, forced=None) -> BatchTranscript:
    """Single-team batch rollout; rivals only via a static feed (or zeros).

    shared: optional (other_task_idx, other_inst_values) task-sharing inputs.
    Reward is left unset; assign it via compute_rewards / base_reward.
    """
    spec = SideSpec(
        qbot=qbot, abot=abot,
        task_idx=np.asarray(task_idx), inst_values=np.asarray(inst_values),
        rng=rng, overheard=overheard,
        other_task_idx=None if shared is None else shared[0],
        other_inst_values=None if shared is None else shared[1])
    if forced is not None:
        spec.forced_q, spec.forced_a, spec.forced_w = forced
    if overheard is not None and hear is None:
        hear = True
    return run_batch([spec], cfg, hear=hear, share_tasks=shared is not None)[0]


def run_competitive_batch(spec1: SideSpec, spec2: SideSpec,
                          flags: CompetitionFlags, cfg: EpisodeConfig,
                          gate_rng: np.random.Generator | None = None):
    """Two-team interleaved rollout with the overhear gate drawn here.

    With dialog overhearing on, one Bernoulli(rho) draw per batch (or one per
    episode with overhear_unit='episode') decides which episodes overhear.
    """
    hear = None
    if flags.dialog_overhearing:
        rho = flags.overhear_fraction
        if flags.overhear_unit == "batch":
            hear = "all" if gate_rng.random() < rho else None
        else:
            mask = gate_rng.random(len(np.asarray(spec1.task_idx))) < rho
            hear = mask if mask.any() else None
    t1, t2 = run_batch([spec1, spec2], cfg, hear=hear,
                       share_tasks=flags.task_sharing)
    return t1, t2


TRANSCRIPT_HEADER = ("# task_attr1\ttask_attr2\tinstance\ttokens(q:a per round)"
                     "\tpred1\tpred2\ttruth1\ttruth2\tcorrect\treward")


def transcript_lines(batch: BatchTranscript, attribute_names=None) -> list[str]:
    """One tab-separated line per episode, preceded by a documented header."""
    names = attribute_names or ("color", "shape", "style")
    pairs = tasks_to_array(enumerate_tasks())
    lines = [TRANSCRIPT_HEADER]
    for i in range(len(batch)):
        a, b = pairs[batch.task_idx[i]]
        toks = " ".join(f"{q}:{x}" for q, x in
                        zip(batch.questions[i], batch.answers[i]))
        reward = "" if batch.reward is None else f"{batch.reward[i]:g}"
        lines.append("\t".join([
            names[a], names[b],
            ",".join(str(v) for v in batch.inst_values[i]),
            toks,
            str(batch.predictions[i, 0]), str(batch.predictions[i, 1]),
            str(batch.truth[i, 0]), str(batch.truth[i, 1]),
            str(int(batch.correct[i])), reward]))
    return lines

"""Verify the hand-written backward pass against finite differences.

Rolls one small batched episode with every coupling active (so every
embedding table participates), accumulates the REINFORCE gradient, then
replays the same forced choices while perturbing each parameter. Run:

    python3 demos/02_gradient_check.py        (~20 s)
"""

import numpy as np

from commgame import (AgentConfig, EpisodeConfig, SideSpec, accumulate_reinforce,
                      finite_diff_check, run_batch)
from commgame.trainer import make_team

cfg = AgentConfig(hidden_dim=8, attr_embed_dim=5, instance_embed_dim=15,
                  task_embed_dim=5, token_embed_dim=5)
team1 = make_team(cfg, 4, seed=3, index=1, init_scale=0.8)
team2 = make_team(cfg, 4, seed=3, index=2, init_scale=0.8)

rng = np.random.default_rng(0)
n = 4
tasks = [rng.integers(0, 6, n) for _ in range(2)]
insts = [rng.integers(0, 4, (n, 3)) for _ in range(2)]
ecfg = EpisodeConfig(rounds=2, reward_scale=1.0, mode="train")


def sides():
    s1 = SideSpec(team1.qbot, team1.abot, tasks[0], insts[0],
                  rng=np.random.default_rng(7),
                  other_task_idx=tasks[1], other_inst_values=insts[1])
    s2 = SideSpec(team2.qbot, team2.abot, tasks[1], insts[1],
                  rng=np.random.default_rng(8),
                  other_task_idx=tasks[0], other_inst_values=insts[0])
    return s1, s2


tr1, tr2 = run_batch(list(sides()), ecfg, hear="all", share_tasks=True)
coeff = rng.uniform(-1, 1, n)  # stand-in per-episode rewards


def replay_value():
    s1, s2 = sides()
    s1.forced_q, s1.forced_a, s1.forced_w = (tr1.questions, tr1.answers,
                                             tr1.predictions)
    s2.forced_q, s2.forced_a, s2.forced_w = (tr2.questions, tr2.answers,
                                             tr2.predictions)
    r1, _ = run_batch([s1, s2], ecfg, hear="all", share_tasks=True)
    return float(np.dot(coeff, r1.logp_sum))


for store, trace, label in [(team1.qbot.store, tr1.trace_q, "questioner"),
                            (team1.abot.store, tr1.trace_a, "answerer")]:
    store.zero_grads()
    accumulate_reinforce(trace, coeff)
    err = finite_diff_check(store, replay_value)
    print(f"{label:10s}: {store.size:5d} parameters, "
          f"max relative error {err:.2e}")

"""Message informativeness: mutual-information metrics on greedy dialogs.

First on constructed logs with known values, then on a quickly-trained team.
"""

import math

import numpy as np

from commgame import (AgentConfig, CompetitionFlags, EvalLog, WorldConfig,
                      empirical_mi, enumerate_instances,
                      instantaneous_coordination, report, split_dataset)
from commgame.trainer import TrainConfig, evaluate, full_train, make_team

# --- constructed examples -------------------------------------------------
xs = np.tile(np.arange(4), 250)
print(f"MI(x, x) for uniform 4-symbol x: {empirical_mi(xs, xs):.4f}"
      f"  (ln 4 = {math.log(4):.4f})")

# guesses that copy the answers give ln4 on the matched round pairs
k = 4
a1, a2 = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
answers = np.tile(np.stack([a1.ravel(), a2.ravel()], 1), (10, 1))
log = EvalLog(np.zeros_like(answers), answers, answers.copy(),
              np.ones(len(answers), dtype=bool))
print(f"coordination when guesses echo answers: "
      f"{instantaneous_coordination(log):.4f}  (2 ln4 / 4 = "
      f"{math.log(4) / 2:.4f})")

# --- metrics on a trained team ---------------------------------------------
world = WorldConfig(values_per_attribute=2)
dataset = split_dataset(enumerate_instances(world), 0.8, seed=0)
agent_cfg = AgentConfig(hidden_dim=24, attr_embed_dim=8, instance_embed_dim=24,
                        task_embed_dim=8, token_embed_dim=8)
team = make_team(agent_cfg, world.values_per_attribute, seed=2, index=1)
full_train([team], dataset, CompetitionFlags(),
           TrainConfig(batch_size=200, max_epochs=2000, eval_every=500),
           seed=2)

from commgame.world import instances_to_array
_, test_log = evaluate(team, instances_to_array(dataset.test))
rep = report(test_log)
print("\ntrained team on the held-out split:")
print(f"  accuracy {rep.accuracy:.3f}")
print(f"  coordination (answer -> guess MI) {rep.ic:.3f} nats")
print(f"  consistency  (question -> guess MI) {rep.sc:.3f} nats")
print(f"  questioner tuple entropy {rep.entropy_q:.3f} nats"
      f" (max {2 * math.log(agent_cfg.vocab_q):.3f})")
print(f"  answerer tuple entropy {rep.entropy_a:.3f} nats"
      f" (max {2 * math.log(agent_cfg.vocab_a):.3f})")

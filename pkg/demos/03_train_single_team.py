"""Train one cooperating pair on a reduced world and watch accuracy move.

Uses a 2-value world (8 instances, still 6 tasks) and small agents so the
whole demo runs in about a minute on one CPU core. The full-scale game
(4 values, hidden 100, batch 1000) trains the same way via the CLI:

    commgame run --setting coop_base --seeds 1 --epochs 25000 --out-dir runs
"""

from commgame import (AgentConfig, CompetitionFlags, WorldConfig,
                      enumerate_instances, split_dataset)
from commgame.trainer import TrainConfig, full_train, make_team

world = WorldConfig(values_per_attribute=2)
dataset = split_dataset(enumerate_instances(world), 0.8, seed=0)
agent_cfg = AgentConfig(hidden_dim=24, attr_embed_dim=8, instance_embed_dim=24,
                        task_embed_dim=8, token_embed_dim=8)
train_cfg = TrainConfig(batch_size=200, max_epochs=3000, eval_every=200)

team = make_team(agent_cfg, world.values_per_attribute, seed=1, index=1)
state = full_train([team], dataset, CompetitionFlags(), train_cfg, seed=1)

print("epoch  train_acc  test_acc  mean_reward")
for row in state.history:
    print(f"{row.epoch:5d}  {row.train_acc:9.3f}  {row.test_acc:8.3f} "
          f"{row.mean_reward:11.1f}")
print(f"\nstopped at epoch {state.epoch}"
      f" ({'early' if state.stopped_early else 'budget exhausted'})")

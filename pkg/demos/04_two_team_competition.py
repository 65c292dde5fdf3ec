"""Two rival teams: the shared reward table, overhearing, and the 3-stage loop.

Shows the reward coupling on its own, then trains two small teams with
reward sharing + dialog overhearing on a reduced world. Run time ~2 min.
"""

from commgame import (AgentConfig, CompetitionFlags, WorldConfig,
                      compute_rewards, enumerate_instances, split_dataset)
from commgame.trainer import TrainConfig, full_train, make_team

flags = CompetitionFlags(reward_sharing=True, dialog_overhearing=True,
                         overhear_fraction=0.5)

print("reward table at R=100 (team1, team2):")
for c1 in (True, False):
    for c2 in (True, False):
        out = compute_rewards(c1, c2, flags, 100.0)
        print(f"  team1 {'ok ' if c1 else 'bad'}, team2 {'ok ' if c2 else 'bad'}"
              f" -> ({out.reward_team1:+.0f}, {out.reward_team2:+.0f})")

world = WorldConfig(values_per_attribute=2)
dataset = split_dataset(enumerate_instances(world), 0.8, seed=0)
agent_cfg = AgentConfig(hidden_dim=24, attr_embed_dim=8, instance_embed_dim=24,
                        task_embed_dim=8, token_embed_dim=8)
train_cfg = TrainConfig(batch_size=200, max_epochs=4500, eval_every=300,
                        stage_epochs=500)

teams = [make_team(agent_cfg, world.values_per_attribute, seed=7, index=k + 1)
         for k in range(2)]
state = full_train(teams, dataset, flags, train_cfg, seed=7)

print("\nepoch  team  train_acc  test_acc")
for row in state.history:
    print(f"{row.epoch:5d}  {row.team:4d}  {row.train_acc:9.3f} "
          f"{row.test_acc:9.3f}")
print(f"\nwinner: team {state.winner} at epoch {state.epoch}")

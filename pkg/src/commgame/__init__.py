"""Two-team referential dialog games with learned discrete communication.

A questioner/answerer pair ("team") learns token protocols by REINFORCE to
solve attribute-query tasks; two teams can be coupled through reward sharing,
dialog overhearing and task sharing. The package provides the synthetic
world, the hand-rolled differentiable core, agents, episode execution,
training loops, language metrics, and an experiment harness with a CLI.
"""

from .agents import ABot, AgentConfig, AgentState, QBot
from .arena import (BatchTranscript, CompetitionFlags, EpisodeConfig,
                    OverheardFeed, RewardOutcome, SideSpec, Transcript,
                    base_reward, compute_rewards, run_batch,
                    run_competitive_batch, run_team_episode)
from .metrics import (EvalLog, MetricsReport, empirical_mi,
                      instantaneous_coordination, message_entropy, report,
                      speaker_consistency)
from .nn import (AdamState, EpisodeTrace, ParamStore, accumulate_reinforce,
                 finite_diff_check, optimizer_step, recurrent_step,
                 sample_categorical)
from .trainer import (EpochStats, RunState, Team, TrainConfig,
                      competitive_train_epoch, cooperative_train_epoch,
                      evaluate, full_train, make_team)
from .world import (Dataset, Instance, TaskSpec, WorldConfig,
                    enumerate_instances, enumerate_tasks, ground_truth,
                    split_dataset)

__version__ = "0.1.0"

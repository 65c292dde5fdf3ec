"""Experiment configuration: flat key=value sections, setting registry, defaults.

A "setting" bundles the coupling flags, reward rule, hidden size and team
count for one row of the experiment matrix. Config files are INI-style with
one section per module; unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from .agents import AgentConfig
from .arena import CompetitionFlags
from .trainer import TrainConfig
from .world import WorldConfig


@dataclass(frozen=True)
class Setting:
    id: str
    teams: int
    flags: CompetitionFlags
    wrong_mult: float = 10.0
    hidden_dim: int | None = None      # override of AgentConfig.hidden_dim
    pick_by_validation: bool = False   # report the better-validation team


def _flags(rs=False, do=False, ts=False) -> CompetitionFlags:
    return CompetitionFlags(reward_sharing=rs, dialog_overhearing=do,
                            task_sharing=ts)


SETTINGS: dict[str, Setting] = {s.id: s for s in [
    Setting("coop_base", 1, _flags()),
    Setting("coop_rewards", 1, _flags(), wrong_mult=100.0),
    Setting("coop_params", 1, _flags(), hidden_dim=150),
    Setting("coop_double", 2, _flags(), pick_by_validation=True),
    Setting("comp_ts", 2, _flags(ts=True)),
    Setting("comp_do", 2, _flags(do=True)),
    Setting("comp_do_ts", 2, _flags(do=True, ts=True)),
    Setting("comp_rs", 2, _flags(rs=True)),
    Setting("comp_rs_ts", 2, _flags(rs=True, ts=True)),
    Setting("comp_rs_do", 2, _flags(rs=True, do=True)),
    Setting("comp_rs_do_ts", 2, _flags(rs=True, do=True, ts=True)),
]}


@dataclass
class PlanConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    overhear_fraction: float = 0.5
    overhear_unit: str = "batch"
    settings: list[str] = field(default_factory=lambda: ["coop_base"])
    seeds: list[int] = field(default_factory=lambda: [1])
    out_dir: str = "runs"
    workers: int = 1

    def resolved_flags(self, setting: Setting) -> CompetitionFlags:
        return replace(setting.flags, overhear_fraction=self.overhear_fraction,
                       overhear_unit=self.overhear_unit)

    def resolved_agent(self, setting: Setting) -> AgentConfig:
        if setting.hidden_dim is None:
            return self.agent
        return replace(self.agent, hidden_dim=setting.hidden_dim)

    def resolved_train(self, setting: Setting) -> TrainConfig:
        return replace(self.train, wrong_mult=setting.wrong_mult)


_WORLD_KEYS = {"values_per_attribute": int, "split_fraction": float,
               "split_seed": int}
_AGENT_KEYS = {"vocab_q": int, "vocab_a": int, "hidden_dim": int,
               "attr_embed_dim": int, "task_embed_dim": int,
               "token_embed_dim": int, "memoryless_abot": bool}
_TRAIN_KEYS = {"learning_rate": float, "batch_size": int, "max_epochs": int,
               "reward_scale": float, "rounds": int,
               "early_stop_train_acc": float, "eval_every": int,
               "stage_epochs": int, "init_scale": float, "baseline": str,
               "eval_episodes": int}
_PLAN_KEYS = {"settings": str, "seeds": str, "out_dir": str, "workers": int,
              "overhear_fraction": float, "overhear_unit": str}


def _coerce(raw: str, typ):
    if typ is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return typ(raw)


def parse_config(path: str | None = None,
                 overrides: dict[str, str] | None = None) -> PlanConfig:
    """Resolve a plan from an optional INI file plus 'section.key' overrides.

    Empty input yields the full default bundle (R=100, lr=0.01, batch 1000,
    rho=0.5, |V_Q|=3, |V_A|=4, ...). Unknown keys raise ValueError.
    """
    sections = {"world": {}, "agents": {}, "train": {}, "plan": {}}
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_file(fh)
        for section in parser.sections():
            if section not in sections:
                raise ValueError(f"unknown config section [{section}]")
            sections[section].update(parser.items(section))
    for dotted, raw in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if section not in sections:
            raise ValueError(f"unknown config section [{section}]")
        sections[section][key] = raw

    def take(section: str, allowed: dict):
        out = {}
        for key, raw in sections[section].items():
            if key not in allowed:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            out[key] = _coerce(raw, allowed[key])
        return out

    world_kw = take("world", _WORLD_KEYS)
    agent_kw = take("agents", _AGENT_KEYS)
    if "attr_embed_dim" in agent_kw:
        agent_kw["instance_embed_dim"] = 3 * agent_kw["attr_embed_dim"]
    train_kw = take("train", _TRAIN_KEYS)
    plan_kw = take("plan", _PLAN_KEYS)

    plan = PlanConfig(world=WorldConfig(**world_kw),
                      agent=AgentConfig(**agent_kw),
                      train=TrainConfig(**train_kw))
    if "overhear_fraction" in plan_kw:
        rho = plan_kw.pop("overhear_fraction")
        if not 0.0 <= rho <= 1.0:
            raise ValueError("overhear_fraction must lie in [0, 1]")
        plan.overhear_fraction = rho
    if "overhear_unit" in plan_kw:
        plan.overhear_unit = plan_kw.pop("overhear_unit")
        if plan.overhear_unit not in ("batch", "episode"):
            raise ValueError("overhear_unit must be 'batch' or 'episode'")
    if "settings" in plan_kw:
        ids = [s.strip() for s in plan_kw.pop("settings").split(",") if s.strip()]
        for sid in ids:
            if sid not in SETTINGS:
                raise ValueError(f"unknown setting {sid!r}")
        plan.settings = ids
    if "seeds" in plan_kw:
        plan.seeds = [int(s) for s in plan_kw.pop("seeds").split(",") if s.strip()]
    plan.out_dir = plan_kw.pop("out_dir", plan.out_dir)
    plan.workers = plan_kw.pop("workers", plan.workers)
    return plan

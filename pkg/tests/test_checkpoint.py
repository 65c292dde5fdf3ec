import numpy.testing as npt
import pytest

from commgame.agents import AgentConfig
from commgame.checkpoint import load_checkpoint, restore_into, save_checkpoint
from commgame.trainer import make_team

SMALL = AgentConfig(hidden_dim=6, attr_embed_dim=3, instance_embed_dim=9,
                    task_embed_dim=3, token_embed_dim=3)


def test_roundtrip_is_bit_exact(tmp_path):
    team = make_team(SMALL, 4, seed=42, index=1)
    path = tmp_path / "checkpoint.bin"
    save_checkpoint(path, {"team1/qbot": team.qbot.store,
                           "team1/abot": team.abot.store},
                    seed=42, steps={"team1": 7})
    stores, seed, steps = load_checkpoint(path)
    assert seed == 42 and steps == {"team1": 7}
    for name, arr in stores["team1/qbot"].items():
        npt.assert_array_equal(arr, team.qbot.store[name])

    fresh = make_team(SMALL, 4, seed=0, index=1)
    restore_into(fresh.qbot.store, stores["team1/qbot"])
    for name in fresh.qbot.store.names():
        npt.assert_array_equal(fresh.qbot.store[name], team.qbot.store[name])


def test_restore_rejects_layout_mismatch(tmp_path):
    team = make_team(SMALL, 4, seed=1, index=1)
    path = tmp_path / "c.bin"
    save_checkpoint(path, {"q": team.qbot.store}, seed=1)
    stores, _, _ = load_checkpoint(path)
    other = make_team(SMALL, 4, seed=1, index=1)
    bad = dict(stores["q"])
    bad.pop("lstm_b")
    with pytest.raises(ValueError):
        restore_into(other.qbot.store, bad)

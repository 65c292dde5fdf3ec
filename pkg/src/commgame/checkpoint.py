"""Bit-exact parameter checkpoints: (name, shape, values) triples per agent
plus the run seed and optimizer step counters, in a single npz container."""

from __future__ import annotations

import json

import numpy as np

from .nn import ParamStore


def save_checkpoint(path, stores: dict[str, ParamStore], seed: int,
                    steps: dict[str, int] | None = None):
    """stores: e.g. {"team1/qbot": store, ...}; steps: Adam counters per key."""
    payload = {}
    for prefix, store in stores.items():
        for name, value in store.values.items():
            payload[f"{prefix}|{name}"] = value
    meta = {"seed": seed, "steps": steps or {}}
    payload["meta_json"] = np.frombuffer(
        json.dumps(meta).encode(), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_checkpoint(path):
    """Returns ({prefix: {name: array}}, seed, steps). Arrays are float64 and
    round-trip bit-exactly."""
    stores: dict[str, dict[str, np.ndarray]] = {}
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta_json"]).decode())
        for key in data.files:
            if key == "meta_json":
                continue
            prefix, name = key.split("|", 1)
            stores.setdefault(prefix, {})[name] = data[key]
    return stores, meta["seed"], meta["steps"]


def restore_into(store: ParamStore, values: dict[str, np.ndarray]):
    if set(values) != set(store.values):
        raise ValueError("checkpoint does not match the parameter layout")
    for name, arr in values.items():
        if store.values[name].shape != arr.shape:
            raise ValueError(f"shape mismatch for {name}")
        store.values[name][...] = arr

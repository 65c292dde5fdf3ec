"""Synthetic attribute world: instances, attribute-pair tasks, splits, ground truth.

Every object ("instance") is a triple of categorical attribute values; a task
asks for the values of an ordered pair of distinct attributes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

ATTRIBUTES = ("color", "shape", "style")
N_ATTRIBUTES = len(ATTRIBUTES)


@dataclass(frozen=True)
class WorldConfig:
    attribute_names: tuple[str, str, str] = ATTRIBUTES
    values_per_attribute: int = 4
    split_fraction: float = 0.8
    split_seed: int = 0

    def __post_init__(self):
        if len(self.attribute_names) != N_ATTRIBUTES:
            raise ValueError(f"exactly {N_ATTRIBUTES} attributes required")
        if self.values_per_attribute < 2:
            raise ValueError("values_per_attribute must be >= 2")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split_fraction must lie in (0, 1)")

    @property
    def n_instances(self) -> int:
        return self.values_per_attribute ** N_ATTRIBUTES


@dataclass(frozen=True)
class Instance:
    """One world object: a value index per attribute, in attribute order."""

    values: tuple[int, int, int]

    def __post_init__(self):
        if len(self.values) != N_ATTRIBUTES:
            raise ValueError("instance needs one value per attribute")


@dataclass(frozen=True)
class TaskSpec:
    """Ordered pair of distinct attribute indices the questioner must resolve."""

    attributes: tuple[int, int]

    def __post_init__(self):
        a, b = self.attributes
        if a == b:
            raise ValueError("task attributes must be distinct")

    def reverse(self) -> "TaskSpec":
        a, b = self.attributes
        return TaskSpec((b, a))


@dataclass
class Dataset:
    train: list[Instance]
    test: list[Instance] = field(default_factory=list)


def enumerate_instances(config: WorldConfig) -> list[Instance]:
    """All values_per_attribute**3 instances in lexicographic order."""
    m = config.values_per_attribute
    return [Instance(v) for v in itertools.product(range(m), repeat=N_ATTRIBUTES)]


def enumerate_tasks() -> list[TaskSpec]:
    """All 6 ordered pairs of distinct attributes, lexicographic by index pair."""
    return [
        TaskSpec((a, b))
        for a in range(N_ATTRIBUTES)
        for b in range(N_ATTRIBUTES)
        if a != b
    ]


def split_dataset(instances: list[Instance], fraction: float, seed: int) -> Dataset:
    """Seeded uniform shuffle into disjoint, exhaustive train/test lists.

    |train| = round(fraction * N). Deterministic for a fixed seed.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    order = np.random.default_rng(seed).permutation(len(instances))
    n_train = int(round(fraction * len(instances)))
    train = [instances[i] for i in order[:n_train]]
    test = [instances[i] for i in order[n_train:]]
    return Dataset(train=train, test=test)


def ground_truth(instance: Instance, task: TaskSpec) -> tuple[int, int]:
    """The instance's values at the task's two attributes, in task order."""
    a, b = task.attributes
    return instance.values[a], instance.values[b]


def instances_to_array(instances: list[Instance]) -> np.ndarray:
    """(N, 3) int array of value indices, one row per instance."""
    return np.array([i.values for i in instances], dtype=np.int64)


def tasks_to_array(tasks: list[TaskSpec]) -> np.ndarray:
    """(K, 2) int array of attribute-index pairs."""
    return np.array([t.attributes for t in tasks], dtype=np.int64)


def save_dataset(dataset: Dataset, config: WorldConfig, path) -> None:
    """Line-oriented snapshot: header, then one comma-separated instance per line."""
    with open(path, "w") as fh:
        fh.write("# attributes=%s values_per_attribute=%d\n"
                 % (",".join(config.attribute_names), config.values_per_attribute))
        for name, block in (("train", dataset.train), ("test", dataset.test)):
            fh.write(f"# split={name} count={len(block)}\n")
            for inst in block:
                fh.write(",".join(str(v) for v in inst.values) + "\n")


def load_dataset(path) -> Dataset:
    """Inverse of save_dataset."""
    splits: dict[str, list[Instance]] = {"train": [], "test": []}
    current = "train"
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "split=" in line:
                    current = line.split("split=")[1].split()[0]
                continue
            splits[current].append(Instance(tuple(int(v) for v in line.split(","))))
    return Dataset(train=splits["train"], test=splits["test"])

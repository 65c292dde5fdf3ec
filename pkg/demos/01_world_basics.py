"""The synthetic world: instances, tasks, splits, ground truth.

Every object has three categorical attributes (color, shape, style) with 4
values each; a task asks for an ordered pair of attributes. Run:

    python3 demos/01_world_basics.py
"""

from commgame import (WorldConfig, enumerate_instances, enumerate_tasks,
                      ground_truth, split_dataset)

cfg = WorldConfig()
instances = enumerate_instances(cfg)
tasks = enumerate_tasks()
print(f"{len(instances)} instances, {len(tasks)} tasks")
print("first instance:", instances[0].values, "last:", instances[-1].values)

names = cfg.attribute_names
for task in tasks:
    a, b = task.attributes
    print(f"  task ({names[a]}, {names[b]})")

inst = instances[37]
task = tasks[1]
print(f"\ninstance {inst.values}, task {task.attributes} ->",
      ground_truth(inst, task))

ds = split_dataset(instances, cfg.split_fraction, cfg.split_seed)
print(f"\nsplit: {len(ds.train)} train / {len(ds.test)} test (seeded shuffle)")
print("held-out examples:", [i.values for i in ds.test[:4]])

import numpy as np
import pytest

from arcbatch.env import EnvParams
from arcbatch.environment import Environment
from arcbatch.grids import MINI
from arcbatch.tasks import (
    RawTask,
    build_task_buffer,
    generate_synthetic_tasks,
    write_dataset,
)


def grid(*rows):
    return np.array(rows, dtype=np.int8)


def make_task(task_id="t0", demos=None, tests=None):
    demos = demos or [(grid([1, 2], [3, 4]), grid([4, 3], [2, 1]))]
    tests = tests or [(grid([5, 6], [7, 8]), grid([8, 7], [6, 5]))]
    return RawTask(id=task_id, demo_pairs=tuple(demos), test_pairs=tuple(tests))


@pytest.fixture(scope="session")
def mini_tasks():
    return generate_synthetic_tasks(12, MINI, seed=5)


@pytest.fixture(scope="session")
def mini_buffer(mini_tasks):
    return build_task_buffer(mini_tasks, MINI)


@pytest.fixture(scope="session")
def big_buffer():
    return build_task_buffer(generate_synthetic_tasks(149, MINI, seed=9), MINI)


@pytest.fixture
def mini_env(mini_buffer):
    return Environment(params=EnvParams(profile=MINI), buffer=mini_buffer)


@pytest.fixture
def dataset_dir(tmp_path, mini_tasks):
    d = tmp_path / "tasks"
    write_dataset(mini_tasks, d)
    return d

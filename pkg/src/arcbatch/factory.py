"""Environment factory: identifiers or configs to ready environments.

make() accepts a RunConfig, a config file path, or an identifier of the
form "<dataset-name>/<task-id>" resolved against a dataset root (the
`dataset_root` argument or the ARCBATCH_DATASET_ROOT environment
variable, a directory containing one subdirectory per dataset name).
"""

from __future__ import annotations

import os
from pathlib import Path

from .config import ConfigError, RunConfig, config_from_dict, load_config
from .env import EnvParams
from .environment import Environment
from .tasks import DatasetSpec, build_task_buffer, load_dataset

ROOT_ENV_VAR = "ARCBATCH_DATASET_ROOT"


class UnknownIdentifierError(Exception):
    pass


def make(
    source: RunConfig | dict | str | Path,
    dataset_root: str | Path | None = None,
) -> tuple[Environment, EnvParams]:
    """Build a fully wrapped environment.

    Returns (environment handle, params). The handle is immutable; all
    episode state flows through reset/step explicitly.
    """
    if isinstance(source, RunConfig):
        return _from_config(source)
    if isinstance(source, dict):
        return _from_config(config_from_dict(source))
    text = str(source)
    path = Path(text)
    if path.is_file() or text.endswith((".yaml", ".yml", ".json")):
        return _from_config(load_config(path))
    return _from_identifier(text, dataset_root)


def _from_identifier(identifier: str, dataset_root) -> tuple[Environment, EnvParams]:
    dataset, sep, task_id = identifier.partition("/")
    if not sep or not dataset or not task_id:
        raise UnknownIdentifierError(
            f"identifier {identifier!r} is not '<dataset>/<task-id>' and no such config file exists"
        )
    root = dataset_root or os.environ.get(ROOT_ENV_VAR)
    if root is None:
        raise UnknownIdentifierError(
            f"no dataset root to resolve {identifier!r}; pass dataset_root or set {ROOT_ENV_VAR}"
        )
    dataset_dir = Path(root) / dataset
    if not dataset_dir.is_dir():
        raise UnknownIdentifierError(f"dataset directory not found: {dataset_dir}")
    config = config_from_dict({
        "dataset": {"root": str(dataset_dir), "name": dataset},
        "env": {"grid_profile": "full"},
    })
    return _from_config(config, only_task=task_id)


def _from_config(config: RunConfig, only_task: str | None = None) -> tuple[Environment, EnvParams]:
    if not config.dataset.root:
        raise ConfigError("dataset.root", "dataset root is required")
    try:
        spec = DatasetSpec(
            root=config.dataset.root,
            name=config.dataset.name,
            split=config.dataset.split,
            subset=config.dataset.subset,
            parser=config.dataset.parser,
        )
    except ValueError as e:
        raise ConfigError("dataset", str(e))
    profile = config.profile()
    tasks = load_dataset(spec, profile=profile)
    if only_task is not None:
        tasks = [t for t in tasks if t.id == only_task]
        if not tasks:
            raise UnknownIdentifierError(
                f"task id {only_task!r} not found in {config.dataset.root}"
            )
    max_pairs = 5
    if config.wrappers.contextual:
        max_pairs = max(max_pairs, config.wrappers.contextual_pairs)
    buffer = build_task_buffer(tasks, profile=profile, max_demo_pairs=max_pairs)
    params = config.env_params()
    env = Environment(
        params=params,
        buffer=buffer,
        adapter=config.adapter(),
        channels=config.channels(),
        auto_reset=config.wrappers.auto_reset,
    )
    return env, params

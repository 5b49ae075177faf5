import glob
import logging
from datetime import timedelta
from os import makedirs, path
from typing import Callable, Iterable, List, Optional

import joblib

from eeg_probe.execution.caching.memory import StageCache
from eeg_probe.execution.stages import StageResult

logger = logging.getLogger(__name__)

# returns a message if the entry must not be loaded / dumped, None otherwise
Constraint = Callable[[str, StageResult], Optional[str]]


class DumpableStageCache(StageCache):
    """
    Similar to StageCache, but has a `dump` and `load` method. Each entry is persisted as
    `<hash>.yaml` (the stage key) and `<hash>.pkl` (the stage result). If a directory is provided
    on initialization, this will directly load the content into the cache.
    """

    def __init__(self, directory: Optional[str] = None, **kwargs):
        super().__init__(**kwargs)
        self.directory = directory
        if self.directory is not None and path.isdir(self.directory):
            self.load()

    @staticmethod
    def _violations(key: str, value: StageResult, constraints: Optional[Iterable[Constraint]]) -> List[str]:
        if constraints is None:
            return []
        return [msg for msg in (c(key, value) for c in constraints) if msg is not None]

    def load(self, directory: Optional[str] = None, constraints: Optional[Iterable[Constraint]] = None):
        if directory is None:
            directory = self.directory
        file_names = sorted(glob.glob(path.join(directory, "*.pkl")))
        if self.verbose:
            logger.info(f'load {len(file_names)} files from cache directory: {directory}')
        for fn in file_names:
            value = joblib.load(fn)
            key = path.splitext(path.basename(fn))[0]
            config_fn = path.splitext(fn)[0] + ".yaml"
            if not path.exists(config_fn) or not isinstance(value, StageResult):
                logger.warning(f'skip incomplete cache entry: {fn}')
                continue
            # the file name is the hash of the stage key the result was computed for
            if joblib.hash(value.key_yaml) != key:
                logger.warning(f'skip cache entry whose stage key does not match its file name: {fn}')
                continue
            violations = self._violations(key, value, constraints)
            if violations:
                if self.verbose:
                    for msg in violations:
                        logger.warning(msg)
                continue
            self[key] = value

        logger.info(f'loaded {len(self.store)} entries into the cache')

    def dump(self, directory: Optional[str] = None, constraints: Optional[Iterable[Constraint]] = None,
             overwrite: bool = False) -> int:
        if directory is None:
            directory = self.directory
        if self.verbose:
            logger.info(f'dump cache to directory ({len(self.store)} entries): "{directory}"')
        if path.exists(directory):
            logger.warning(f'cache dir "{directory}" already exists!')
        n_dumped = 0
        makedirs(directory, exist_ok=True)
        for key, value in self.store.items():
            violations = self._violations(key, value, constraints)
            if violations:
                if self.verbose:
                    for msg in violations:
                        logger.warning(msg)
                continue
            fn_config = path.join(directory, f'{key}.yaml')
            # keep the creation time of existing entries
            if path.exists(fn_config) and not overwrite:
                if self.verbose:
                    logger.info(f'do not dump cache entry because it already exists: {key} (set overwrite=True to '
                                f'enforce overwrite)')
                continue
            with open(fn_config, "w", encoding="utf-8") as f:
                f.write(value.key_yaml)
            joblib.dump(value, path.join(directory, f'{key}.pkl'))
            n_dumped += 1

        logger.info(f'dumped {n_dumped} out of {len(self.store)} entries to directory: "{directory}"')
        return n_dumped


def exclude_targets_constraint(key: str, value: StageResult, exclude_targets: List[str]) -> Optional[str]:
    if value.target in [t for t in exclude_targets if t]:
        return f'don\'t dump/load entry since it was created with an excluded target {exclude_targets}: {key}'
    return None


def exclude_target_time_none_or_lesser_then(key: str, value: StageResult, min_time: timedelta) -> Optional[str]:
    if value.info.time_target is None or value.info.time_target <= min_time:
        return f'don\'t dump/load entry since its target_time {value.info.time_target} is lesser then {min_time}: {key}'
    return None

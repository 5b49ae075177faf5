import logging
from typing import Dict, Iterator

from eeg_probe.execution.caching.interface import Cache
from eeg_probe.execution.stages import StageResult

logger = logging.getLogger(__name__)


class StageCache(Cache):
    """
    In-memory cache of stage results. Lookups are counted, see `hits` and `misses`.
    """

    def __init__(self, verbose: bool = False):
        self.store: Dict[str, StageResult] = {}
        self.verbose: bool = verbose
        self.hits = 0
        self.misses = 0

    def __contains__(self, key: str) -> bool:
        found = key in self.store
        if found:
            self.hits += 1
        else:
            self.misses += 1
        if self.verbose:
            logger.info(f'lookup cache ({"HIT" if found else "MISS"}): {key}')
        return found

    def __getitem__(self, key: str) -> StageResult:
        return self.store[key]

    def __setitem__(self, key: str, value: StageResult):
        if self.verbose:
            logger.info(f'add to cache: {key} ({value.target}, computed in {value.info.time_target})')
        self.store[key] = value

    def __iter__(self) -> Iterator[str]:
        return iter(self.store)

    def __len__(self) -> int:
        return len(self.store)

    def summary(self) -> str:
        return f'{len(self.store)} entries, {self.hits} hits, {self.misses} misses'

from abc import ABC, abstractmethod
from typing import Iterator

from eeg_probe.execution.stages import StageResult


class Cache(ABC):
    """
    Stage result store keyed by stage key hashes, as consumed by `execution.pipeline.run_pipeline`.
    """

    @abstractmethod
    def __contains__(self, key: str) -> bool:
        ...

    @abstractmethod
    def __getitem__(self, key: str) -> StageResult:
        ...

    @abstractmethod
    def __setitem__(self, key: str, value: StageResult):
        ...

    @abstractmethod
    def __iter__(self) -> Iterator[str]:
        ...

    @abstractmethod
    def __len__(self) -> int:
        ...

    def summary(self) -> str:
        return f'{len(self)} entries'

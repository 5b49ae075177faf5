from __future__ import annotations

from dataclasses import dataclass, field
from datetime import timedelta
from typing import Any, Optional

KEY_TARGET = "_target_"
KEY_INPUTS = "_inputs_"
KEY_CACHE_RESULT = "_cache_result_"


@dataclass(frozen=True)
class StageInfo:
    cache_result: bool = True
    time_target: Optional[timedelta] = None


@dataclass(frozen=True)
class StageResult:
    """
    Wrapper class to hold the value a stage produced, its target and the stage key (as YAML) it
    was computed for.
    """
    value: Any
    target: str
    key_yaml: str
    info: StageInfo = field(default_factory=StageInfo)

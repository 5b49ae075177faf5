from .interface import Cache
from .memory import StageCache
from .dumpable import DumpableStageCache, exclude_targets_constraint, exclude_target_time_none_or_lesser_then

from .stages import StageInfo, StageResult
from .caching import Cache, StageCache, DumpableStageCache
from .pipeline import run_pipeline, stage_key

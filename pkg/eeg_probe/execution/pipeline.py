"""
Runs a pipeline: an ordered mapping of named stages, each a call of a `_target_` callable with
keyword parameters. A stage consumes the results of earlier stages through `_inputs_`
(parameter name -> stage name). Stage results are cached under the hash of the stage key, i.e.
the stage config with every input replaced by the key hash of the producing stage, so identical
sub-pipelines are computed only once.
"""
import logging
from datetime import datetime
from typing import Any, Dict, Mapping, Optional, Tuple

import joblib
from hydra.errors import HydraException
from hydra.utils import get_method, instantiate
from omegaconf import DictConfig, OmegaConf

from eeg_probe.errors import ConfigError
from eeg_probe.execution.caching import Cache, StageCache
from eeg_probe.execution.stages import KEY_CACHE_RESULT, KEY_INPUTS, KEY_TARGET, StageInfo, StageResult

logger = logging.getLogger(__name__)

KEY_STAGES = "stages"


def _as_dict_config(config: Any) -> DictConfig:
    if isinstance(config, DictConfig):
        return config
    if isinstance(config, Mapping):
        return OmegaConf.create(dict(config))
    raise ConfigError(f'a pipeline config has to be a dict, got {type(config).__name__}')


def stage_key(stage: DictConfig, input_hashes: Dict[str, str]) -> str:
    key = OmegaConf.to_container(stage, resolve=True)
    key.pop(KEY_CACHE_RESULT, None)
    if input_hashes:
        key[KEY_INPUTS] = dict(input_hashes)
    return OmegaConf.to_yaml(OmegaConf.create(key))


def _parameter(value: Any) -> Any:
    if isinstance(value, DictConfig) and KEY_TARGET in value:
        return instantiate(value, _convert_="all")
    if OmegaConf.is_config(value):
        return OmegaConf.to_container(value, resolve=True)
    return value


def run_stage(name: str, stage: DictConfig, inputs: Dict[str, StageResult], input_hashes: Dict[str, str],
              cache: Optional[Cache]) -> Tuple[str, StageResult]:
    if KEY_TARGET not in stage:
        raise ConfigError(f'stage "{name}" has no {KEY_TARGET}')
    key_yaml = stage_key(stage, input_hashes)
    key = joblib.hash(key_yaml)
    if cache is not None and key in cache:
        logger.info(f'stage "{name}": reuse cached result')
        return key, cache[key]

    target_name = stage[KEY_TARGET]
    try:
        target = get_method(target_name)
        kwargs = {k: _parameter(v) for k, v in stage.items() if k not in (KEY_TARGET, KEY_INPUTS, KEY_CACHE_RESULT)}
    except (HydraException, ImportError, ValueError) as e:
        raise ConfigError(f'stage "{name}": {e}') from e
    kwargs.update({param: result.value for param, result in inputs.items()})

    logger.info(f'stage "{name}": run {target_name}')
    t_start = datetime.now()
    value = target(**kwargs)
    info = StageInfo(cache_result=bool(stage.get(KEY_CACHE_RESULT, True)), time_target=datetime.now() - t_start)
    logger.info(f'stage "{name}" done in {info.time_target}')
    result = StageResult(value=value, target=target_name, key_yaml=key_yaml, info=info)
    if cache is not None and info.cache_result:
        cache[key] = result
    return key, result


def run_pipeline(config: Any, cache: Optional[Cache] = None) -> Dict[str, Any]:
    """
    Execute all stages in order.

    :param config: dict (or DictConfig) with a `stages` mapping
    :param cache: stage cache, defaults to a fresh in-memory StageCache
    :return: stage name -> stage result value
    """
    config = _as_dict_config(config)
    if KEY_STAGES not in config:
        raise ConfigError(f'pipeline config lacks "{KEY_STAGES}"')
    if cache is None:
        cache = StageCache()

    results: Dict[str, StageResult] = {}
    hashes: Dict[str, str] = {}
    for name, stage in config[KEY_STAGES].items():
        inputs = dict(stage.get(KEY_INPUTS, {}) or {})
        unknown = [source for source in inputs.values() if source not in results]
        if unknown:
            raise ConfigError(f'stage "{name}" consumes unknown or later stages: {unknown}')
        key, result = run_stage(
            name, stage,
            inputs={param: results[source] for param, source in inputs.items()},
            input_hashes={param: hashes[source] for param, source in inputs.items()},
            cache=cache,
        )
        results[name] = result
        hashes[name] = key
    logger.info(f'pipeline finished with {len(results)} stages, cache: {cache.summary()}')
    return {name: result.value for name, result in results.items()}

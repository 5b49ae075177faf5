import json
import logging
from os import path
from typing import Any, Iterable, Optional, Type, TypeVar

from omegaconf import OmegaConf, DictConfig
from omegaconf.errors import OmegaConfBaseException

from eeg_probe.errors import ConfigError

logger = logging.getLogger(__name__)

TC = TypeVar("TC")


def load_config(cls: Type[TC], config_path: Optional[str] = None, overrides: Iterable[str] = ()) -> TC:
    """
    Build a config dataclass instance from its defaults, an optional JSON / YAML file and dotlist
    overrides (e.g. `lr=0.001`), in that order of precedence.

    :param cls: the dataclass that acts as structured config
    :param config_path: optional JSON or YAML file with a subset of the fields
    :param overrides: dotlist strings that overwrite single fields
    :return: the validated dataclass instance
    """
    try:
        cfg = OmegaConf.structured(cls)
        if config_path is not None:
            if not path.exists(config_path):
                raise ConfigError(f'config file not found: {config_path}')
            if config_path.endswith(".json"):
                with open(config_path, encoding="utf-8") as f:
                    cfg = OmegaConf.merge(cfg, json.load(f))
            else:
                cfg = OmegaConf.merge(cfg, OmegaConf.load(config_path))
        overrides = list(overrides)
        if overrides:
            cfg = OmegaConf.merge(cfg, OmegaConf.from_dotlist(overrides))
        instance = OmegaConf.to_object(cfg)
    except OmegaConfBaseException as e:
        raise ConfigError(f'invalid {cls.__name__}: {e}') from e
    except json.JSONDecodeError as e:
        raise ConfigError(f'config file {config_path} is not valid JSON: {e}') from e
    validate = getattr(instance, "validate", None)
    if validate is not None:
        validate()
    return instance


def config_to_dict(config: Any) -> dict:
    """
    Plain container representation of a config dataclass (or DictConfig), e.g. for manifests.
    """
    if isinstance(config, DictConfig):
        return OmegaConf.to_container(config, resolve=True)
    return OmegaConf.to_container(OmegaConf.structured(config), resolve=True)

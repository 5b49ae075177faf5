import glob
from datetime import timedelta
from functools import partial
from os import path

import numpy as np
import pytest

from eeg_probe.errors import ConfigError
from eeg_probe.execution import DumpableStageCache, StageCache, run_pipeline, stage_key
from eeg_probe.execution.caching import exclude_target_time_none_or_lesser_then, exclude_targets_constraint

FRAME_LABEL = "eeg_probe.conditioning.frame_label"
POSITIONAL_ENCODE = "eeg_probe.conditioning.positional_encode"


def pipeline_config(class_id=2):
    return {
        "stages": {
            "label": {"_target_": FRAME_LABEL, "class_id": class_id, "frame_index": 3},
            "encoding": {"_target_": POSITIONAL_ENCODE, "enc_dim": 2, "_inputs_": {"x": "label"}},
        }
    }


def count(caplog, text):
    return sum(text in record.getMessage() for record in caplog.records)


def test_run_pipeline():
    results = run_pipeline(pipeline_config())
    assert results["label"] == 19
    np.testing.assert_allclose(results["encoding"], [19.0, np.sin(19.0), np.cos(19.0), np.sin(38.0),
                                                     np.cos(38.0)])


def test_nested_target_parameters():
    config = {"stages": {"encoding": {
        "_target_": POSITIONAL_ENCODE,
        "enc_dim": 1,
        "x": {"_target_": FRAME_LABEL, "class_id": 0, "frame_index": 1},
    }}}
    np.testing.assert_allclose(run_pipeline(config)["encoding"], [1.0, np.sin(1.0), np.cos(1.0)])


def test_stage_results_are_reused(caplog):
    cache = StageCache()
    with caplog.at_level("INFO"):
        run_pipeline(pipeline_config(), cache)
        assert count(caplog, "reuse cached result") == 0
        run_pipeline(pipeline_config(), cache)
        assert count(caplog, "reuse cached result") == 2
    assert len(cache) == 2
    assert (cache.hits, cache.misses) == (2, 2)


def test_changed_input_invalidates_consumers(caplog):
    cache = StageCache()
    run_pipeline(pipeline_config(), cache)
    with caplog.at_level("INFO"):
        results = run_pipeline(pipeline_config(class_id=1), cache)
    assert count(caplog, "reuse cached result") == 0
    assert results["encoding"][0] == 11.0
    assert len(cache) == 4


def test_identical_stages_run_once(caplog):
    config = {"stages": {
        "a": {"_target_": FRAME_LABEL, "class_id": 1, "frame_index": 1},
        "b": {"_target_": FRAME_LABEL, "class_id": 1, "frame_index": 1},
    }}
    with caplog.at_level("INFO"):
        results = run_pipeline(config)
    assert results == {"a": 9, "b": 9}
    assert count(caplog, "reuse cached result") == 1


def test_uncached_stage():
    config = pipeline_config()
    config["stages"]["label"]["_cache_result_"] = False
    cache = StageCache()
    run_pipeline(config, cache)
    assert len(cache) == 1


def test_stage_key_ignores_cache_flag():
    from omegaconf import OmegaConf

    stage = OmegaConf.create({"_target_": FRAME_LABEL, "class_id": 1, "frame_index": 0})
    flagged = OmegaConf.create({"_target_": FRAME_LABEL, "class_id": 1, "frame_index": 0, "_cache_result_": False})
    assert stage_key(stage, {}) == stage_key(flagged, {})
    assert "_inputs_" in stage_key(stage, {"x": "abc"})


@pytest.mark.parametrize("config", [
    {"nothing": {}},
    {"stages": {"a": {"class_id": 1}}},
    {"stages": {"a": {"_target_": FRAME_LABEL, "class_id": 0, "_inputs_": {"frame_index": "b"}},
                "b": {"_target_": FRAME_LABEL, "class_id": 0, "frame_index": 0}}},
    {"stages": {"a": {"_target_": "eeg_probe.no_such_function"}}},
])
def test_invalid_pipelines(config):
    with pytest.raises(ConfigError):
        run_pipeline(config)


def test_dump_and_load(tmp_path, caplog):
    directory = str(tmp_path / "cache")
    cache = DumpableStageCache()
    run_pipeline(pipeline_config(), cache)
    assert cache.dump(directory) == 2
    assert len(glob.glob(path.join(directory, "*.pkl"))) == 2
    assert len(glob.glob(path.join(directory, "*.yaml"))) == 2
    # existing entries are kept
    assert cache.dump(directory) == 0
    assert cache.dump(directory, overwrite=True) == 2

    loaded = DumpableStageCache(directory=directory)
    assert len(loaded) == 2
    with caplog.at_level("INFO"):
        results = run_pipeline(pipeline_config(), loaded)
    assert count(caplog, "reuse cached result") == 2
    assert results["label"] == 19


def test_dump_constraints(tmp_path):
    cache = DumpableStageCache()
    run_pipeline(pipeline_config(), cache)
    exclude_label = partial(exclude_targets_constraint, exclude_targets=[FRAME_LABEL])
    assert cache.dump(str(tmp_path / "a"), constraints=[exclude_label]) == 1
    too_fast = partial(exclude_target_time_none_or_lesser_then, min_time=timedelta(hours=1))
    assert cache.dump(str(tmp_path / "b"), constraints=[too_fast]) == 0

    cache.dump(str(tmp_path / "c"))
    restricted = DumpableStageCache()
    restricted.load(str(tmp_path / "c"), constraints=[exclude_label])
    assert len(restricted) == 1
    assert [restricted[key].target for key in restricted] == [POSITIONAL_ENCODE]


def test_load_skips_renamed_entries(tmp_path, caplog):
    directory = tmp_path / "cache"
    cache = DumpableStageCache()
    run_pipeline(pipeline_config(), cache)
    cache.dump(str(directory))
    fn = sorted(directory.glob("*.pkl"))[0]
    fn.rename(directory / "0123.pkl")
    fn.with_suffix(".yaml").rename(directory / "0123.yaml")
    with caplog.at_level("WARNING"):
        loaded = DumpableStageCache(directory=str(directory))
    assert len(loaded) == 1
    assert "does not match its file name" in caplog.text

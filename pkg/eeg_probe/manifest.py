import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from os import path
from typing import Any, Dict, List, Optional

from eeg_probe import __version__

logger = logging.getLogger(__name__)

DIRECTORY_MANIFEST = "run_manifest.json"
MANIFEST_SUFFIX = ".manifest.json"


@dataclass
class RunManifest:
    """
    Everything needed to re-run a subcommand: its argv, the resolved config, the seeds, and the
    paths it read and wrote.
    """
    subcommand: str
    argv: List[str]
    config: Dict[str, Any] = field(default_factory=dict)
    seeds: Dict[str, int] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    version: str = __version__
    started_utc: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    wall_clock_s: Optional[float] = None


def manifest_path(output: str) -> str:
    if path.isdir(output):
        return path.join(output, DIRECTORY_MANIFEST)
    return output + MANIFEST_SUFFIX


def write_manifest(manifest: RunManifest, output: str) -> str:
    """
    Write the manifest next to `output` through a temporary file and an atomic rename.
    """
    fn = manifest_path(output)
    directory = path.dirname(path.abspath(fn))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".manifest-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            json.dump(asdict(manifest), f, indent=2, default=str)
        os.replace(tmp, fn)
    except BaseException:
        if path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info(f'wrote run manifest to: {fn}')
    return fn

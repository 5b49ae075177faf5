"""
Binary parameter file: 8 byte little-endian header length, UTF-8 JSON header
{"config": {...}, "arrays": [{"name", "shape", "offset"}]}, then little-endian float64 payloads.
"""
import json
import logging
import struct
from os import path
from typing import Tuple

import numpy as np

from eeg_probe.config import config_to_dict
from eeg_probe.encoder.config import EncoderConfig
from eeg_probe.encoder.model import EncoderParams
from eeg_probe.errors import FormatError

logger = logging.getLogger(__name__)

PAYLOAD_DTYPE = np.dtype("<f8")


def save_params(fn: str, params: EncoderParams, config: EncoderConfig):
    arrays = []
    payloads = []
    offset = 0
    for name, value in params.as_dict().items():
        data = np.ascontiguousarray(value, dtype=PAYLOAD_DTYPE).tobytes()
        arrays.append({"name": name, "shape": list(value.shape), "offset": offset})
        payloads.append(data)
        offset += len(data)
    header = json.dumps({"config": config_to_dict(config), "arrays": arrays}).encode("utf-8")
    with open(fn, "wb") as f:
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for data in payloads:
            f.write(data)
    logger.info(f'saved encoder parameters to: {fn}')


def load_params(fn: str) -> Tuple[EncoderParams, EncoderConfig]:
    if not path.exists(fn):
        raise FormatError(f'model file not found: {fn}')
    with open(fn, "rb") as f:
        content = f.read()
    try:
        (header_len,) = struct.unpack("<Q", content[:8])
        header = json.loads(content[8:8 + header_len].decode("utf-8"))
        config = EncoderConfig(**header["config"])
        payload = content[8 + header_len:]
        arrays = {}
        for entry in header["arrays"]:
            count = int(np.prod(entry["shape"]))
            start = entry["offset"]
            stop = start + count * PAYLOAD_DTYPE.itemsize
            if stop > len(payload):
                raise FormatError(f'model file {fn} is truncated (array {entry["name"]})')
            arrays[entry["name"]] = np.frombuffer(payload[start:stop], dtype=PAYLOAD_DTYPE).reshape(entry["shape"])
        params = EncoderParams.from_dict(arrays)
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise FormatError(f'corrupt model file {fn}: {e}') from e
    params.check(config)
    logger.info(f'loaded encoder parameters from: {fn}')
    return params, config

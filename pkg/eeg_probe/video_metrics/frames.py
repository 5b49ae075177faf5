import glob
import logging
import os
from os import path
from typing import Sequence

import numpy as np
from PIL import Image

from eeg_probe.errors import DimensionError, FormatError

logger = logging.getLogger(__name__)

FRAME_PATTERN = "frame_%04d.pgm"
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def as_frame(pixels) -> np.ndarray:
    """
    Grayscale float frame in [0, 1]. RGB input (H x W x 3) is luma converted.
    """
    frame = np.asarray(pixels, dtype=np.float64)
    if frame.ndim == 3 and frame.shape[2] == 3:
        frame = frame @ LUMA_WEIGHTS
    if frame.ndim != 2 or frame.size == 0:
        raise DimensionError(f'a frame has to be H x W or H x W x 3, got shape {np.shape(pixels)}')
    return np.clip(frame, 0.0, 1.0)


def as_clip(frames: Sequence) -> np.ndarray:
    """
    F x H x W stack of frames of equal dimensions, at least one frame.
    """
    frames = [as_frame(f) for f in frames]
    if not frames:
        raise DimensionError(f'a clip needs at least one frame')
    shapes = {f.shape for f in frames}
    if len(shapes) > 1:
        raise DimensionError(f'clip frames differ in shape: {sorted(shapes)}')
    return np.stack(frames)


def check_same_shape(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise DimensionError(f'frame shapes differ: {a.shape} vs {b.shape}')


def read_clip(directory: str) -> np.ndarray:
    files = sorted(glob.glob(path.join(directory, "frame_*.pgm")))
    if not files:
        raise FormatError(f'no frame_*.pgm files in {directory}')
    frames = []
    for fn in files:
        try:
            with Image.open(fn) as img:
                frames.append(np.asarray(img.convert("L"), dtype=np.float64) / 255.0)
        except OSError as e:
            raise FormatError(f'cannot read frame {fn}: {e}') from e
    logger.info(f'read {len(frames)} frames from: {directory}')
    return as_clip(frames)


def write_clip(directory: str, clip) -> list:
    clip = as_clip(clip)
    os.makedirs(directory, exist_ok=True)
    files = []
    for i, frame in enumerate(clip):
        fn = path.join(directory, FRAME_PATTERN % i)
        Image.fromarray(np.round(frame * 255.0).astype(np.uint8)).save(fn)
        files.append(fn)
    logger.info(f'wrote {len(files)} frames to: {directory}')
    return files

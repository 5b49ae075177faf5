"""
Horn-Schunck dense optical flow and the Optical Flow Score of a clip.
"""
import logging

import numpy as np
from scipy.ndimage import convolve

from eeg_probe.errors import DimensionError
from eeg_probe.video_metrics.frames import as_clip, as_frame, check_same_shape

logger = logging.getLogger(__name__)

# intensities are processed in 8-bit units
INTENSITY_SCALE = 255.0
HS_KERNEL = np.array([
    [1 / 12, 1 / 6, 1 / 12],
    [1 / 6, 0.0, 1 / 6],
    [1 / 12, 1 / 6, 1 / 12],
])


def optical_flow(a, b, hs_alpha: float = 1.0, iterations: int = 100) -> np.ndarray:
    """
    Flow field from frame a to frame b as a 2 x H x W array (u along columns, v along rows).
    """
    a, b = as_frame(a) * INTENSITY_SCALE, as_frame(b) * INTENSITY_SCALE
    check_same_shape(a, b)
    fx = 0.5 * (np.gradient(a, axis=1) + np.gradient(b, axis=1))
    fy = 0.5 * (np.gradient(a, axis=0) + np.gradient(b, axis=0))
    ft = b - a
    denom = hs_alpha ** 2 + fx ** 2 + fy ** 2
    u = np.zeros_like(a)
    v = np.zeros_like(a)
    for _ in range(iterations):
        u_avg = convolve(u, HS_KERNEL, mode="nearest")
        v_avg = convolve(v, HS_KERNEL, mode="nearest")
        common = (fx * u_avg + fy * v_avg + ft) / denom
        u = u_avg - fx * common
        v = v_avg - fy * common
    return np.stack([u, v])


def flow_magnitude(a, b, hs_alpha: float = 1.0, iterations: int = 100) -> float:
    """
    Mean per-pixel flow magnitude between two frames.
    """
    u, v = optical_flow(a, b, hs_alpha=hs_alpha, iterations=iterations)
    return float(np.mean(np.sqrt(u * u + v * v)))


def ofs(clip, hs_alpha: float = 1.0, iterations: int = 100) -> float:
    """
    Optical Flow Score: mean over consecutive frame pairs of the mean flow magnitude.
    """
    clip = as_clip(clip)
    if len(clip) < 2:
        raise DimensionError(f'ofs needs at least two frames, got {len(clip)}')
    scores = [flow_magnitude(clip[i], clip[i + 1], hs_alpha, iterations) for i in range(len(clip) - 1)]
    logger.debug(f'per pair flow magnitudes: {scores}')
    return float(np.mean(scores))

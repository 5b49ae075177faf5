import logging
from functools import lru_cache
from typing import List

import numpy as np

from eeg_probe.errors import DimensionError
from eeg_probe.video_metrics.flow import flow_magnitude
from eeg_probe.video_metrics.frames import as_clip

logger = logging.getLogger(__name__)


def select_keyframes(clip, n: int = 8, hs_alpha: float = 1.0, iterations: int = 100) -> List[int]:
    """
    Greedy forward selection anchored at frame 0. Each step scores every frame j after the last
    selected frame by the rate of change

        score(j) = flow_magnitude(clip[last], clip[j]) / (j - last)

    i.e. the Horn-Schunck flow magnitude divided by the frame distance, and picks the best one. Frames
    too close to the end to leave room for the remaining picks are not candidates; ties go to the
    earliest frame.
    """
    clip = as_clip(clip)
    if n < 1 or len(clip) < n:
        raise DimensionError(f'cannot select {n} keyframes from a clip of {len(clip)} frames')

    @lru_cache(maxsize=None)
    def change(i: int, j: int) -> float:
        return flow_magnitude(clip[i], clip[j], hs_alpha, iterations)

    selected = [0]
    while len(selected) < n:
        last = selected[-1]
        remaining = n - len(selected)
        candidates = np.arange(last + 1, len(clip) - remaining + 1)
        scores = np.array([change(last, int(j)) / (j - last) for j in candidates])
        # argmax returns the first maximum
        selected.append(int(candidates[int(np.argmax(scores))]))
    logger.debug(f'selected keyframes {selected}')
    return selected

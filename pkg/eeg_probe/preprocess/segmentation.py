import logging
from typing import List

import numpy as np

from eeg_probe.errors import ContractError, DataError
from eeg_probe.signal_io.types import Recording, SegmentSet, SEGMENT_SAMPLES

logger = logging.getLogger(__name__)

SEGMENT_RATE_HZ = 200.0


def _window_length(rec: Recording, seconds: float) -> int:
    if rec.sample_rate_hz != SEGMENT_RATE_HZ:
        raise ContractError(f'segmentation expects {SEGMENT_RATE_HZ} Hz data, subject {rec.subject_id} is at '
                            f'{rec.sample_rate_hz} Hz')
    return int(round(seconds * rec.sample_rate_hz))


def _windows(data: np.ndarray, window: int) -> List[np.ndarray]:
    n = data.shape[1] // window
    return [data[:, i * window:(i + 1) * window].copy() for i in range(n)]


def segment(rec: Recording, seconds: float = 2.0) -> List[np.ndarray]:
    """
    Consecutive non-overlapping windows; a trailing remainder shorter than one window is dropped.
    """
    return _windows(rec.data, _window_length(rec, seconds))


def segment_annotated(rec: Recording, seconds: float = 2.0) -> SegmentSet:
    """
    Segment every annotated clip of a recording on its own, so that windows never straddle two
    clips. All segments are tagged "train".
    """
    window = _window_length(rec, seconds)
    if window != SEGMENT_SAMPLES:
        raise ContractError(f'segments have to hold {SEGMENT_SAMPLES} samples, {seconds} s gives {window}')
    if not rec.annotations:
        raise DataError(f'subject {rec.subject_id} has no clip annotations, cannot label its segments')
    segments, video, emotion = [], [], []
    for annotation in rec.annotations:
        start = int(round(annotation.onset_s * rec.sample_rate_hz))
        stop = min(rec.n_samples, start + int(round(annotation.duration_s * rec.sample_rate_hz)))
        if start >= stop:
            continue
        clip_windows = _windows(rec.data[:, start:stop], window)
        segments.extend(clip_windows)
        video.extend([annotation.video_label] * len(clip_windows))
        emotion.extend([annotation.emotion_label] * len(clip_windows))
    n = len(segments)
    logger.debug(f'subject {rec.subject_id}: {n} segments from {len(rec.annotations)} clips')
    return SegmentSet(
        segments=np.stack(segments) if n else np.zeros((0, rec.n_channels, SEGMENT_SAMPLES)),
        video_label=np.asarray(video, dtype=np.int64),
        emotion_label=np.asarray(emotion, dtype=np.int64),
        subject_id=np.full(n, rec.subject_id, dtype=np.int64),
        split=np.full(n, "train"),
    )

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from eeg_probe.errors import DataError

logger = logging.getLogger(__name__)

SEGMENT_SAMPLES = 400
SPLIT_TAGS = ("train", "val", "test")


@dataclass(frozen=True)
class Annotation:
    """
    A stimulus clip inside a continuous recording.
    """
    onset_s: float
    duration_s: float
    video_label: int
    emotion_label: int = -1


@dataclass
class Recording:
    subject_id: int
    sample_rate_hz: float
    channel_labels: List[str]
    # channels x samples, microvolts
    data: np.ndarray
    eog_channel_indices: List[int] = field(default_factory=list)
    annotations: List[Annotation] = field(default_factory=list)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.subject_id < 1:
            raise DataError(f'subject_id has to be positive, got {self.subject_id}')
        if self.sample_rate_hz <= 0:
            raise DataError(f'sample rate has to be positive, got {self.sample_rate_hz}')
        if self.data.ndim != 2 or self.data.shape[1] == 0:
            raise DataError(f'recording data has to be a non-empty channels x samples matrix, got shape '
                            f'{self.data.shape}')
        if len(self.channel_labels) != self.data.shape[0]:
            raise DataError(f'{len(self.channel_labels)} channel labels for {self.data.shape[0]} channels')
        eog = list(self.eog_channel_indices)
        if len(set(eog)) != len(eog) or any(i < 0 or i >= self.n_channels for i in eog):
            raise DataError(f'invalid EOG channel indices {eog} for {self.n_channels} channels')

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def eeg_channel_indices(self) -> List[int]:
        eog = set(self.eog_channel_indices)
        return [i for i in range(self.n_channels) if i not in eog]

    def replace(self, **changes) -> Recording:
        return dataclasses.replace(self, **changes)


@dataclass
class SegmentSet:
    # N x C x 400
    segments: np.ndarray
    video_label: np.ndarray
    emotion_label: np.ndarray
    subject_id: np.ndarray
    split: np.ndarray

    def __post_init__(self):
        self.segments = np.asarray(self.segments, dtype=np.float64)
        self.video_label = np.asarray(self.video_label, dtype=np.int64)
        self.emotion_label = np.asarray(self.emotion_label, dtype=np.int64)
        self.subject_id = np.asarray(self.subject_id, dtype=np.int64)
        self.split = np.asarray(self.split).astype(str)
        if self.segments.ndim != 3 or self.segments.shape[2] != SEGMENT_SAMPLES:
            raise DataError(f'segments have to be N x C x {SEGMENT_SAMPLES}, got shape {self.segments.shape}')
        n = self.segments.shape[0]
        for name in ("video_label", "emotion_label", "subject_id", "split"):
            if len(getattr(self, name)) != n:
                raise DataError(f'{name} has length {len(getattr(self, name))}, expected {n}')
        # checked before narrowing to the longest allowed tag
        bad_tags = set(self.split.ravel().tolist()) - set(SPLIT_TAGS)
        if bad_tags:
            raise DataError(f'invalid split tags {sorted(bad_tags)}, allowed: {SPLIT_TAGS}')
        self.split = self.split.astype("<U5")

    def __len__(self):
        return self.segments.shape[0]

    @property
    def n_channels(self) -> int:
        return self.segments.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.video_label.max()) + 1 if len(self) else 0

    def validate_labels(self):
        """
        Video labels of a complete set have to be the contiguous range 0..K-1.
        """
        present = np.unique(self.video_label)
        if len(present) and not np.array_equal(present, np.arange(len(present))):
            raise DataError(f'video labels have to be contiguous 0..K-1, got {present.tolist()}')

    def labels(self, mode: str) -> np.ndarray:
        if mode == "video":
            return self.video_label
        if mode == "emotion":
            if np.any(self.emotion_label < 0):
                raise DataError(f'segment set has no emotion labels')
            return self.emotion_label
        if mode == "subject":
            return self.subject_id
        raise DataError(f'unknown label mode: {mode}')

    def subset(self, mask: np.ndarray) -> SegmentSet:
        return SegmentSet(
            segments=self.segments[mask],
            video_label=self.video_label[mask],
            emotion_label=self.emotion_label[mask],
            subject_id=self.subject_id[mask],
            split=self.split[mask],
        )

    def split_part(self, tag: str) -> SegmentSet:
        return self.subset(self.split == tag)

    def split_counts(self) -> dict:
        return {tag: int(np.sum(self.split == tag)) for tag in SPLIT_TAGS}

    def replace(self, **changes) -> SegmentSet:
        return dataclasses.replace(self, **changes)

    @staticmethod
    def concatenate(sets: Sequence[SegmentSet]) -> SegmentSet:
        if not sets:
            raise DataError(f'nothing to concatenate')
        return SegmentSet(
            segments=np.concatenate([s.segments for s in sets]),
            video_label=np.concatenate([s.video_label for s in sets]),
            emotion_label=np.concatenate([s.emotion_label for s in sets]),
            subject_id=np.concatenate([s.subject_id for s in sets]),
            split=np.concatenate([s.split for s in sets]),
        )

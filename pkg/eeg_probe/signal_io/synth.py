"""
Synthetic EEG with planted structure: class-specific sinusoids on a channel subset inside a time
window and white noise at a given SNR. Every subject has its own background (a slow drift shared by
all channels plus optional constant per-channel offsets, so that untrained features cluster by
subject) and its own phase of the class sinusoids.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from eeg_probe.errors import ConfigError, MontageError
from eeg_probe.signal_io.types import Annotation, Recording, SegmentSet, SEGMENT_SAMPLES

logger = logging.getLogger(__name__)

SYNTH_RATE_HZ = 200.0
LINE_FREQ_HZ = 50.0


@dataclass
class SynthSpec:
    n_subjects: int = 6
    n_classes: int = 5
    segments_per_class_per_subject: int = 10
    channels: int = 62
    # signal channels: a region key of `montage` or explicit 1-based indices
    montage: str = "seed_v1"
    signal_region: Optional[str] = "noseback_left"
    signal_indices: Optional[List[int]] = None
    # [t1, t2) in samples
    signal_window: List[int] = field(default_factory=lambda: [100, 300])
    class_freqs_hz: List[float] = field(default_factory=lambda: [6.0, 9.0, 12.0, 15.0, 18.0])
    snr_db: float = 0.0
    seed: int = 0
    amplitude: float = 1.0
    # constant per-channel subject offsets
    subject_offset_scale: float = 0.0
    # slow common-mode drift per subject: amplitude and [low, high] frequency range
    subject_drift_amp: float = 1.0
    subject_drift_band_hz: List[float] = field(default_factory=lambda: [0.5, 1.5])
    # class sinusoids of a subject start at a phase drawn from [-jitter, jitter]
    subject_phase_jitter: float = math.pi / 4
    # emotion label = video class mod emotion_classes, 0 disables emotion labels
    emotion_classes: int = 3
    # "segments" or "recordings"
    output: str = "segments"
    eog_channels: int = 0
    eog_leak: float = 0.0
    line_noise_amp: float = 0.0

    def validate(self):
        for name in ("n_subjects", "n_classes", "segments_per_class_per_subject", "channels"):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} has to be positive, got {getattr(self, name)}')
        if len(self.signal_window) != 2:
            raise ConfigError(f'signal_window has to be [t1, t2], got {self.signal_window}')
        t1, t2 = self.signal_window
        if not 0 <= t1 < t2 <= SEGMENT_SAMPLES:
            raise ConfigError(f'signal_window has to satisfy 0 <= t1 < t2 <= {SEGMENT_SAMPLES}, got [{t1}, {t2})')
        if len(self.class_freqs_hz) != self.n_classes:
            raise ConfigError(f'{len(self.class_freqs_hz)} class frequencies for {self.n_classes} classes')
        if len(set(self.class_freqs_hz)) != len(self.class_freqs_hz):
            raise ConfigError(f'class frequencies have to be distinct, got {self.class_freqs_hz}')
        if self.output not in ("segments", "recordings"):
            raise ConfigError(f'output has to be "segments" or "recordings", got {self.output}')
        if self.emotion_classes < 0 or self.eog_channels < 0:
            raise ConfigError(f'emotion_classes and eog_channels must not be negative')
        if len(self.subject_drift_band_hz) != 2 or not 0 <= self.subject_drift_band_hz[0] <= self.subject_drift_band_hz[1]:
            raise ConfigError(f'subject_drift_band_hz has to be [low, high] with 0 <= low <= high, '
                              f'got {self.subject_drift_band_hz}')
        if min(self.subject_offset_scale, self.subject_drift_amp, self.subject_phase_jitter) < 0:
            raise ConfigError(f'subject_offset_scale, subject_drift_amp and subject_phase_jitter must not be negative')
        self.signal_rows()

    def signal_rows(self) -> np.ndarray:
        from eeg_probe.montage import load_montage, region_rows

        if self.signal_indices is not None:
            rows = np.asarray(sorted(set(self.signal_indices)), dtype=np.int64) - 1
            if len(rows) == 0 or rows[0] < 0 or rows[-1] >= self.channels:
                raise ConfigError(f'signal_indices {self.signal_indices} do not fit {self.channels} channels')
            return rows
        if self.signal_region is None:
            raise ConfigError(f'either signal_region or signal_indices has to be set')
        try:
            return region_rows(load_montage(self.montage), self.signal_region, self.channels)
        except MontageError as e:
            raise ConfigError(f'invalid signal region: {e}') from e

    def noise_std(self) -> float:
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        return math.sqrt(self.amplitude ** 2 / 2.0 / 10.0 ** (self.snr_db / 10.0))


def _class_templates(spec: SynthSpec, phase: float) -> np.ndarray:
    t1, t2 = spec.signal_window
    t = np.arange(t2 - t1) / SYNTH_RATE_HZ
    # phase-locked to the window onset
    return np.stack([spec.amplitude * np.sin(2 * np.pi * f * t + phase) for f in spec.class_freqs_hz])


def _subject_drift(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    low, high = spec.subject_drift_band_hz
    freq = rng.uniform(low, high)
    phase = rng.uniform(0.0, 2 * np.pi)
    t = np.arange(SEGMENT_SAMPLES) / SYNTH_RATE_HZ
    return spec.subject_drift_amp * np.sin(2 * np.pi * freq * t + phase)


def _subject_segments(spec: SynthSpec, rng: np.random.Generator, rows: np.ndarray):
    t1, t2 = spec.signal_window
    sigma = spec.noise_std()
    offset = rng.normal(0.0, spec.subject_offset_scale, size=spec.channels)
    background = offset[:, None] + _subject_drift(spec, rng)[None, :]
    templates = _class_templates(spec, rng.uniform(-spec.subject_phase_jitter, spec.subject_phase_jitter))
    segments = []
    labels = []
    for k in range(spec.n_classes):
        for _ in range(spec.segments_per_class_per_subject):
            seg = background.copy()
            noise = rng.standard_normal((spec.channels, SEGMENT_SAMPLES))
            if sigma > 0:
                seg = seg + sigma * noise
            seg[rows, t1:t2] += templates[k]
            segments.append(seg)
            labels.append(k)
    return np.stack(segments), np.asarray(labels)


def _emotion(spec: SynthSpec, video_labels: np.ndarray) -> np.ndarray:
    if spec.emotion_classes == 0:
        return np.full_like(video_labels, -1)
    return video_labels % spec.emotion_classes


def synth_dataset(spec: SynthSpec) -> Union[SegmentSet, List[Recording]]:
    """
    Generate the dataset described by `spec`; fully determined by `spec.seed`.

    :return: a SegmentSet (all segments tagged "train") or one continuous 200 Hz Recording per
        subject with one 2 s annotation per planted segment, depending on `spec.output`
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    rows = spec.signal_rows()

    per_subject = [_subject_segments(spec, rng, rows) for _ in range(spec.n_subjects)]
    seconds = SEGMENT_SAMPLES / SYNTH_RATE_HZ

    if spec.output == "segments":
        segments = np.concatenate([s for s, _ in per_subject])
        video = np.concatenate([v for _, v in per_subject])
        subjects = np.concatenate([np.full(len(v), i + 1) for i, (_, v) in enumerate(per_subject)])
        if spec.line_noise_amp > 0:
            t = np.arange(SEGMENT_SAMPLES) / SYNTH_RATE_HZ
            segments = segments + spec.line_noise_amp * np.sin(2 * np.pi * LINE_FREQ_HZ * t)
        result = SegmentSet(segments=segments, video_label=video, emotion_label=_emotion(spec, video),
                            subject_id=subjects, split=np.full(len(video), "train"))
        result.validate_labels()
        logger.info(f'synthesized {len(result)} segments ({spec.n_subjects} subjects, {spec.n_classes} classes)')
        return result

    recordings = []
    for i, (segments, video) in enumerate(per_subject):
        data = np.concatenate(list(segments), axis=1)
        n_samples = data.shape[1]
        if spec.line_noise_amp > 0:
            data = data + spec.line_noise_amp * np.sin(2 * np.pi * LINE_FREQ_HZ * np.arange(n_samples) / SYNTH_RATE_HZ)
        labels = [f'ch{c + 1}' for c in range(spec.channels)]
        eog_indices = []
        if spec.eog_channels > 0:
            # slow ocular drifts leaking into every EEG channel
            eog = np.cumsum(rng.standard_normal((spec.eog_channels, n_samples)), axis=1) * 0.1
            eog -= eog.mean(axis=1, keepdims=True)
            data = data + spec.eog_leak * eog.sum(axis=0)
            data = np.concatenate([data, eog])
            labels += [f'EOG{j + 1}' for j in range(spec.eog_channels)]
            eog_indices = list(range(spec.channels, spec.channels + spec.eog_channels))
        emotion = _emotion(spec, video)
        annotations = [
            Annotation(onset_s=j * seconds, duration_s=seconds, video_label=int(v), emotion_label=int(e))
            for j, (v, e) in enumerate(zip(video, emotion))
        ]
        recordings.append(Recording(subject_id=i + 1, sample_rate_hz=SYNTH_RATE_HZ, channel_labels=labels,
                                    data=data, eog_channel_indices=eog_indices, annotations=annotations))
    logger.info(f'synthesized {len(recordings)} recordings at {SYNTH_RATE_HZ} Hz')
    return recordings

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from joblib import Parallel, delayed

from eeg_probe.errors import ConfigError
from eeg_probe.montage import Montage
from eeg_probe.preprocess.channels import eog_regress, interpolate_bad_channels, reref_average
from eeg_probe.preprocess.filters import highpass_filter, notch_filter, resample
from eeg_probe.preprocess.segmentation import segment_annotated
from eeg_probe.signal_io.types import Recording, SegmentSet

logger = logging.getLogger(__name__)

# (a) .. (f), the only admissible order
PIPELINE_STEPS = ("interpolate", "reref", "notch", "highpass", "resample", "eog")


@dataclass
class PreprocessConfig:
    notch_hz: float = 50.0
    notch_q: float = 30.0
    highpass_hz: float = 0.5
    target_rate_hz: float = 200.0
    # subject id (as string) -> 0-based bad channel indices
    bad_channels: Dict[str, List[int]] = field(default_factory=dict)
    # subset of PIPELINE_STEPS, kept in canonical order; packs that are already filtered and
    # downsampled only need segmentation
    steps: List[str] = field(default_factory=lambda: list(PIPELINE_STEPS))
    segment_seconds: float = 2.0

    def validate(self):
        if not 0 < self.highpass_hz < self.notch_hz < self.target_rate_hz / 2:
            raise ConfigError(f'expected 0 < highpass_hz < notch_hz < target_rate_hz / 2, got highpass_hz='
                              f'{self.highpass_hz}, notch_hz={self.notch_hz}, target_rate_hz={self.target_rate_hz}')
        unknown = [s for s in self.steps if s not in PIPELINE_STEPS]
        if unknown:
            raise ConfigError(f'unknown preprocessing steps {unknown}, available: {PIPELINE_STEPS}')
        positions = [PIPELINE_STEPS.index(s) for s in self.steps]
        if positions != sorted(set(positions)):
            raise ConfigError(f'preprocessing steps have to follow the order {PIPELINE_STEPS}, got {self.steps}')

    def bad_for(self, subject_id: int) -> List[int]:
        return list(self.bad_channels.get(str(subject_id), []))


def preprocess_recording(rec: Recording, config: PreprocessConfig, montage: Optional[Montage] = None) -> Recording:
    config.validate()
    for step in config.steps:
        if step == "interpolate":
            bad = config.bad_for(rec.subject_id)
            if bad:
                if montage is None:
                    raise ConfigError(f'bad channel interpolation needs a montage')
                rec = interpolate_bad_channels(rec, bad, montage)
        elif step == "reref":
            rec = reref_average(rec)
        elif step == "notch":
            rec = notch_filter(rec, config.notch_hz, config.notch_q)
        elif step == "highpass":
            rec = highpass_filter(rec, config.highpass_hz)
        elif step == "resample":
            rec = resample(rec, config.target_rate_hz)
        elif step == "eog":
            if rec.eog_channel_indices:
                rec = eog_regress(rec)
            else:
                logger.info(f'subject {rec.subject_id} has no EOG channels, skipping EOG regression')
    return rec


def _preprocess_and_segment(rec: Recording, config: PreprocessConfig, montage: Optional[Montage]) -> SegmentSet:
    return segment_annotated(preprocess_recording(rec, config, montage), config.segment_seconds)


def preprocess_pack(recordings: List[Recording], config: PreprocessConfig, montage: Optional[Montage] = None,
                    n_jobs: int = 1) -> SegmentSet:
    """
    Preprocess every recording and cut its annotated clips into labeled segments.
    """
    config.validate()
    logger.info(f'preprocess {len(recordings)} recordings (steps: {config.steps}, n_jobs={n_jobs})')
    parts = Parallel(n_jobs=n_jobs)(delayed(_preprocess_and_segment)(rec, config, montage) for rec in recordings)
    result = SegmentSet.concatenate(parts)
    result.validate_labels()
    logger.info(f'preprocessing done: {len(result)} segments with {result.n_channels} channels')
    return result

import logging
import math
from fractions import Fraction

import numpy as np
from scipy import signal

from eeg_probe.errors import ConfigError
from eeg_probe.signal_io.types import Recording

logger = logging.getLogger(__name__)

HIGHPASS_ORDER = 4
KAISER_BETA = 8.6
# zero crossings of the resampling sinc on each side of its center
SINC_HALF_ZERO_CROSSINGS = 32


def _check_below_nyquist(freq_hz: float, rec: Recording, what: str):
    nyquist = rec.sample_rate_hz / 2.0
    if not 0 < freq_hz < nyquist:
        raise ConfigError(f'{what} of {freq_hz} Hz has to lie in (0, {nyquist}) Hz for subject {rec.subject_id}')


def notch_filter(rec: Recording, notch_hz: float = 50.0, q: float = 30.0) -> Recording:
    """
    Zero-phase (forward-backward) biquad notch applied to every channel.
    """
    _check_below_nyquist(notch_hz, rec, "notch frequency")
    if q <= 0:
        raise ConfigError(f'notch quality has to be positive, got {q}')
    b, a = signal.iirnotch(notch_hz, q, fs=rec.sample_rate_hz)
    # pad by a few time constants of the resonator so the edges start in steady state
    bandwidth = notch_hz / q
    padlen = min(rec.n_samples - 1, max(3 * len(a), int(3 * rec.sample_rate_hz / bandwidth)))
    data = signal.filtfilt(b, a, rec.data, axis=1, padtype="odd", padlen=padlen)
    logger.debug(f'notch {notch_hz} Hz (q={q}) applied to subject {rec.subject_id}')
    return rec.replace(data=data)


def highpass_filter(rec: Recording, cutoff_hz: float = 0.5) -> Recording:
    """
    Zero-phase 4th order Butterworth high-pass applied to every channel.
    """
    _check_below_nyquist(cutoff_hz, rec, "high-pass cutoff")
    sos = signal.butter(HIGHPASS_ORDER, cutoff_hz, btype="highpass", fs=rec.sample_rate_hz, output="sos")
    padlen = min(rec.n_samples - 1, max(3 * (2 * len(sos) + 1), int(rec.sample_rate_hz / cutoff_hz)))
    data = signal.sosfiltfilt(sos, rec.data, axis=1, padtype="odd", padlen=padlen)
    logger.debug(f'high-pass {cutoff_hz} Hz applied to subject {rec.subject_id}')
    return rec.replace(data=data)


def resampling_ratio(source_hz: float, target_hz: float) -> Fraction:
    return Fraction(target_hz / source_hz).limit_denominator(10000)


def resample(rec: Recording, target_rate_hz: float = 200.0) -> Recording:
    """
    Band-limited downsampling with a Kaiser windowed sinc (beta 8.6, 64 zero crossings). The
    output has round(samples * target / source) samples.
    """
    source = rec.sample_rate_hz
    if target_rate_hz > source:
        raise ConfigError(f'upsampling is not supported ({source} Hz -> {target_rate_hz} Hz)')
    if target_rate_hz <= 0:
        raise ConfigError(f'target rate has to be positive, got {target_rate_hz}')
    if target_rate_hz == source:
        return rec.replace(data=rec.data.copy())
    ratio = resampling_ratio(source, target_rate_hz)
    up, down = ratio.numerator, ratio.denominator
    factor = max(up, down)
    half_len = SINC_HALF_ZERO_CROSSINGS * factor
    taps = signal.firwin(2 * half_len + 1, 1.0 / factor, window=("kaiser", KAISER_BETA))
    data = signal.resample_poly(rec.data, up, down, axis=1, window=taps, padtype="line")
    n_out = int(math.floor(rec.n_samples * target_rate_hz / source + 0.5))
    data = data[:, :n_out]
    logger.debug(f'resampled subject {rec.subject_id}: {source} Hz -> {target_rate_hz} Hz ({rec.n_samples} -> '
                 f'{n_out} samples)')
    return rec.replace(data=data, sample_rate_hz=float(target_rate_hz))

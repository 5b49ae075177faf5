import logging
from typing import Iterable

import numpy as np

from eeg_probe.errors import ConfigError, DataError, InterpolationError
from eeg_probe.montage import Montage
from eeg_probe.signal_io.types import Recording

logger = logging.getLogger(__name__)


def interpolate_bad_channels(rec: Recording, bad: Iterable[int], montage: Montage) -> Recording:
    """
    Replace every bad channel by the mean of the good channels that share its lobe region.

    :param rec: the recording; montage index i refers to the i-th non-EOG channel
    :param bad: 0-based channel indices of the recording
    :param montage: provides the lobe regions
    :return: a new recording
    """
    bad = sorted(set(bad))
    if not bad:
        return rec
    eeg_rows = rec.eeg_channel_indices
    position = {row: p for p, row in enumerate(eeg_rows)}
    for row in bad:
        if row not in position:
            raise DataError(f'bad channel {row} is not an EEG channel of subject {rec.subject_id}')
    bad_set = set(bad)
    data = rec.data.copy()
    for row in bad:
        mates = [
            eeg_rows[m - 1] for m in montage.lobe_mates(position[row] + 1)
            if m <= len(eeg_rows) and eeg_rows[m - 1] not in bad_set
        ]
        if not mates:
            raise InterpolationError(f'cannot interpolate channel {rec.channel_labels[row]} (index {row}) of subject '
                                     f'{rec.subject_id}: no good channel in its lobe region')
        data[row] = rec.data[mates].mean(axis=0)
        logger.debug(f'interpolated channel {rec.channel_labels[row]} from {len(mates)} lobe mates')
    logger.info(f'interpolated {len(bad)} bad channels of subject {rec.subject_id}')
    return rec.replace(data=data)


def reref_average(rec: Recording) -> Recording:
    eeg_rows = rec.eeg_channel_indices
    if len(eeg_rows) < 2:
        raise ConfigError(f'average re-reference needs at least 2 EEG channels, subject {rec.subject_id} has '
                          f'{len(eeg_rows)}')
    data = rec.data.copy()
    data[eeg_rows] -= rec.data[eeg_rows].mean(axis=0, keepdims=True)
    return rec.replace(data=data)


def eog_regress(rec: Recording) -> Recording:
    """
    Least-squares regression of every EEG channel on the EOG channels plus an intercept. The fitted
    part is removed and the EOG channels are dropped from the result.
    """
    eog_rows = list(rec.eog_channel_indices)
    if not eog_rows:
        raise ConfigError(f'EOG regression needs EOG channels, subject {rec.subject_id} has none')
    eeg_rows = rec.eeg_channel_indices
    design = np.concatenate([rec.data[eog_rows].T, np.ones((rec.n_samples, 1))], axis=1)
    if np.linalg.matrix_rank(design) < design.shape[1]:
        logger.warning(f'EOG design of subject {rec.subject_id} is rank deficient, solving with the '
                       f'pseudo-inverse')
    targets = rec.data[eeg_rows].T
    beta = np.linalg.pinv(design) @ targets
    residual = (targets - design @ beta).T
    return rec.replace(
        data=residual,
        channel_labels=[rec.channel_labels[i] for i in eeg_rows],
        eog_channel_indices=[],
    )

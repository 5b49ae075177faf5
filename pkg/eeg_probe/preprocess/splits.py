import logging
from typing import Sequence, Tuple

import numpy as np

from eeg_probe.errors import SplitError
from eeg_probe.signal_io.types import SegmentSet

logger = logging.getLogger(__name__)


def largest_remainder_counts(n: int, ratios: Sequence[float]) -> np.ndarray:
    """
    Integer counts summing to n, proportional to `ratios`. Every part with a positive ratio gets at
    least one item as long as n allows it.
    """
    raw = np.asarray(ratios, dtype=np.float64) * n
    counts = np.floor(raw).astype(np.int64)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:n - int(counts.sum())]:
        counts[i] += 1
    for i in range(len(counts)):
        if ratios[i] > 0 and counts[i] == 0 and n >= len(counts):
            counts[int(np.argmax(counts))] -= 1
            counts[i] += 1
    return counts


def split_within(segment_set: SegmentSet, ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1),
                 seed: int = 0) -> SegmentSet:
    """
    Per video class, shuffle its segments (seeded) and cut them into train / val / test by `ratios`.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f'ratios have to be three non-negative numbers summing to 1, got {ratios}')
    rng = np.random.default_rng(seed)
    split = np.empty(len(segment_set), dtype="<U5")
    for k in np.unique(segment_set.video_label):
        idx = np.flatnonzero(segment_set.video_label == k)
        if len(idx) < 3:
            raise SplitError(f'video class {k} has only {len(idx)} segments, at least 3 are required')
        perm = rng.permutation(idx)
        counts = largest_remainder_counts(len(idx), ratios)
        bounds = np.cumsum(counts)
        split[perm[:bounds[0]]] = "train"
        split[perm[bounds[0]:bounds[1]]] = "val"
        split[perm[bounds[1]:]] = "test"
    result = segment_set.replace(split=split)
    logger.info(f'within-subject split (seed={seed}): {result.split_counts()}')
    return result


def split_leave_two(segment_set: SegmentSet, test_subjects: Tuple[int, int]) -> SegmentSet:
    test_subjects = tuple(int(s) for s in test_subjects)
    if len(test_subjects) != 2 or test_subjects[0] == test_subjects[1]:
        raise SplitError(f'exactly two distinct test subjects are required, got {test_subjects}')
    present = set(segment_set.subject_id.tolist())
    for s in test_subjects:
        if s not in present:
            raise SplitError(f'unknown subject id {s}, present: {sorted(present)}')
    is_test = np.isin(segment_set.subject_id, test_subjects)
    result = segment_set.replace(split=np.where(is_test, "test", "train"))
    logger.info(f'leave-two-subject split (test subjects {test_subjects}): {result.split_counts()}')
    return result


def split_kfold(segment_set: SegmentSet, n_folds: int, fold: int, seed: int = 0) -> SegmentSet:
    """
    Stratified k-fold: per video class, fold `fold` is test, the following fold is val and the rest
    is train.
    """
    if n_folds < 3:
        raise SplitError(f'k-fold splitting needs at least 3 folds (test, val, train), got {n_folds}')
    if not 0 <= fold < n_folds:
        raise SplitError(f'fold has to be in [0, {n_folds}), got {fold}')
    rng = np.random.default_rng(seed)
    split = np.empty(len(segment_set), dtype="<U5")
    val_fold = (fold + 1) % n_folds
    for k in np.unique(segment_set.video_label):
        idx = np.flatnonzero(segment_set.video_label == k)
        if len(idx) < n_folds:
            raise SplitError(f'video class {k} has only {len(idx)} segments for {n_folds} folds')
        perm = rng.permutation(idx)
        folds = np.arange(len(perm)) % n_folds
        split[perm] = np.where(folds == fold, "test", np.where(folds == val_fold, "val", "train"))
    result = segment_set.replace(split=split)
    logger.info(f'{n_folds}-fold split, fold {fold} (seed={seed}): {result.split_counts()}')
    return result

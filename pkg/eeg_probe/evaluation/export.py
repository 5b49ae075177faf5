import logging
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from eeg_probe.errors import DimensionError, FormatError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
LABEL_COLUMNS = ["video_label", "emotion_label", "subject_id"]


def feature_columns(n: int, prefix: str = "f") -> list:
    return [f'{prefix}{i}' for i in range(n)]


def write_frame(frame: pd.DataFrame, fn: str, what: str = "rows", float_format: Optional[str] = FLOAT_FORMAT):
    """
    CSV without an index column, floats with 17 significant digits.
    """
    frame.to_csv(fn, index=False, float_format=float_format)
    logger.info(f'wrote {len(frame)} {what} to: {fn}')


def export_embeddings(emb: np.ndarray, video_label: np.ndarray, emotion_label: np.ndarray,
                      subject_id: np.ndarray, fn: str):
    """
    One row per segment: the feature columns f0..f{D-1} followed by the three label columns.
    Floats are written with 17 significant digits.
    """
    emb = np.asarray(emb, dtype=np.float64)
    if emb.ndim != 2 or any(len(lab) != len(emb) for lab in (video_label, emotion_label, subject_id)):
        raise DimensionError(f'embeddings of shape {emb.shape} do not fit the label columns')
    frame = pd.DataFrame(emb, columns=feature_columns(emb.shape[1]))
    for name, values in zip(LABEL_COLUMNS, (video_label, emotion_label, subject_id)):
        frame[name] = np.asarray(values, dtype=np.int64)
    write_frame(frame, fn, what="embeddings")


def read_embeddings(fn: str) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    try:
        frame = pd.read_csv(fn)
    except (FileNotFoundError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FormatError(f'cannot read embeddings from {fn}: {e}') from e
    missing = [c for c in LABEL_COLUMNS if c not in frame.columns]
    features = [c for c in frame.columns if c not in LABEL_COLUMNS]
    if missing or not features:
        raise FormatError(f'embedding file {fn} lacks columns {missing or "f0.."}')
    labels = {c: frame[c].to_numpy(dtype=np.int64) for c in LABEL_COLUMNS}
    return frame[features].to_numpy(dtype=np.float64), labels



from typing import Optional

import numpy as np
import pandas as pd

from eeg_probe.conditioning.encoding import DEFAULT_ENC_DIM, DEFAULT_TOTAL_FRAMES, build_conditioning, frame_label
from eeg_probe.errors import DimensionError
from eeg_probe.evaluation.export import feature_columns, write_frame


def conditioning_table(emb: np.ndarray, class_ids: np.ndarray, total_frames: int = DEFAULT_TOTAL_FRAMES,
                       enc_dim: int = DEFAULT_ENC_DIM, subject_ids: Optional[np.ndarray] = None,
                       with_position: bool = True) -> pd.DataFrame:
    """
    One row per (embedding, frame): conditioning columns c0.., then class_id, frame_index,
    frame_label and, if given, subject_id.
    """
    emb = np.asarray(emb, dtype=np.float64)
    class_ids = np.asarray(class_ids, dtype=np.int64)
    if emb.ndim != 2 or len(class_ids) != len(emb):
        raise DimensionError(f'embeddings of shape {emb.shape} do not fit {len(class_ids)} class ids')
    vectors, rows = [], []
    for i, (e, class_id) in enumerate(zip(emb, class_ids)):
        for frame in range(total_frames):
            cond = build_conditioning(e, frame, enc_dim=enc_dim, total_frames=total_frames, class_id=int(class_id),
                                      with_position=with_position)
            vectors.append(cond.values)
            row = {"class_id": int(class_id), "frame_index": frame,
                   "frame_label": frame_label(int(class_id), frame, total_frames)}
            if subject_ids is not None:
                row["subject_id"] = int(subject_ids[i])
            rows.append(row)
    width = len(vectors[0]) if vectors else emb.shape[1]
    values = np.asarray(vectors).reshape(-1, width)
    return pd.concat([pd.DataFrame(values, columns=feature_columns(width, prefix="c")), pd.DataFrame(rows)],
                     axis=1)


def export_conditioning(table: pd.DataFrame, fn: str):
    write_frame(table, fn, what="conditioning vectors")

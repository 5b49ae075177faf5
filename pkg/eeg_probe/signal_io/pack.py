"""
Self-describing on-disk containers:

    <dir>/manifest.json + <dir>/rec_<subject>.f32raw      (recording packs)
    <dir>/segments.json + <dir>/segments.f32raw           (segment sets, N-major)

Raw files hold little-endian float32, row-major.
"""
import json
import logging
from os import makedirs, path
from typing import List

import numpy as np

from eeg_probe.errors import DataError, FormatError
from eeg_probe.signal_io.types import Annotation, Recording, SegmentSet, SEGMENT_SAMPLES, SPLIT_TAGS

logger = logging.getLogger(__name__)

PACK_MANIFEST = "manifest.json"
SEGMENTS_MANIFEST = "segments.json"
SEGMENTS_RAW = "segments.f32raw"
RAW_DTYPE = np.dtype("<f4")


def _read_json(fn: str) -> dict:
    if not path.exists(fn):
        raise FormatError(f'missing manifest: {fn}')
    try:
        with open(fn, encoding="utf-8") as f:
            return json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FormatError(f'corrupt manifest {fn}: {e}') from e


def _write_json(fn: str, content: dict):
    with open(fn, "w", encoding="utf-8") as f:
        json.dump(content, f, indent=1)


def _read_raw(fn: str, n_values: int) -> np.ndarray:
    if not path.exists(fn):
        raise FormatError(f'missing raw file: {fn}')
    n_bytes = path.getsize(fn)
    expected = n_values * RAW_DTYPE.itemsize
    if n_bytes != expected:
        raise FormatError(f'size mismatch for {path.basename(fn)}: manifest implies {expected} bytes, file has '
                          f'{n_bytes}')
    return np.fromfile(fn, dtype=RAW_DTYPE).astype(np.float64)


def recording_file_name(subject_id: int) -> str:
    return f'rec_{subject_id}.f32raw'


def write_pack(recordings: List[Recording], directory: str):
    if len(recordings) == 0:
        raise DataError(f'cannot write an empty pack')
    makedirs(directory, exist_ok=True)
    entries = []
    for rec in recordings:
        fn = recording_file_name(rec.subject_id)
        rec.data.astype(RAW_DTYPE).tofile(path.join(directory, fn))
        entries.append({
            "subject_id": int(rec.subject_id),
            "sample_rate_hz": float(rec.sample_rate_hz),
            "channel_labels": list(rec.channel_labels),
            "n_samples": int(rec.n_samples),
            "eog_channel_indices": [int(i) for i in rec.eog_channel_indices],
            "annotations": [
                {"onset_s": a.onset_s, "duration_s": a.duration_s, "video_label": a.video_label,
                 "emotion_label": a.emotion_label}
                for a in rec.annotations
            ],
            "file": fn,
        })
    _write_json(path.join(directory, PACK_MANIFEST), {"recordings": entries})
    logger.info(f'wrote pack with {len(recordings)} recordings to: {directory}')


def read_pack(directory: str) -> List[Recording]:
    manifest = _read_json(path.join(directory, PACK_MANIFEST))
    recordings = []
    try:
        for entry in manifest["recordings"]:
            n_channels = len(entry["channel_labels"])
            n_samples = int(entry["n_samples"])
            data = _read_raw(path.join(directory, entry["file"]), n_channels * n_samples)
            recordings.append(Recording(
                subject_id=int(entry["subject_id"]),
                sample_rate_hz=float(entry["sample_rate_hz"]),
                channel_labels=list(entry["channel_labels"]),
                data=data.reshape(n_channels, n_samples),
                eog_channel_indices=[int(i) for i in entry.get("eog_channel_indices", [])],
                annotations=[Annotation(**a) for a in entry.get("annotations", [])],
            ))
    except (KeyError, TypeError) as e:
        raise FormatError(f'corrupt manifest in {directory}: missing or invalid field {e}') from e
    except (DataError, ValueError) as e:
        raise FormatError(f'corrupt manifest in {directory}: {e}') from e
    logger.info(f'read pack with {len(recordings)} recordings from: {directory}')
    return recordings


def write_segments(segment_set: SegmentSet, directory: str):
    makedirs(directory, exist_ok=True)
    n, c, t = segment_set.segments.shape
    segment_set.segments.astype(RAW_DTYPE).tofile(path.join(directory, SEGMENTS_RAW))
    _write_json(path.join(directory, SEGMENTS_MANIFEST), {
        "n_segments": int(n),
        "channels": int(c),
        "samples": int(t),
        "video_label": segment_set.video_label.tolist(),
        "emotion_label": segment_set.emotion_label.tolist(),
        "subject_id": segment_set.subject_id.tolist(),
        "split": segment_set.split.tolist(),
        "file": SEGMENTS_RAW,
    })
    logger.info(f'wrote {n} segments ({segment_set.split_counts()}) to: {directory}')


def read_segments(directory: str) -> SegmentSet:
    manifest = _read_json(path.join(directory, SEGMENTS_MANIFEST))
    try:
        n, c, t = int(manifest["n_segments"]), int(manifest["channels"]), int(manifest["samples"])
        split = list(manifest["split"])
        labels = {k: manifest[k] for k in ("video_label", "emotion_label", "subject_id")}
        fn = manifest.get("file", SEGMENTS_RAW)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f'corrupt segment manifest in {directory}: {e}') from e
    if t != SEGMENT_SAMPLES:
        raise FormatError(f'segments have to hold {SEGMENT_SAMPLES} samples, manifest says {t}')
    for tag in split:
        if tag not in SPLIT_TAGS:
            raise FormatError(f'invalid split tag {tag!r} in {directory}, allowed: {SPLIT_TAGS}')
    for name, values in list(labels.items()) + [("split", split)]:
        if len(values) != n:
            raise FormatError(f'{name} has {len(values)} entries in {directory}, expected {n}')
    data = _read_raw(path.join(directory, fn), n * c * t)
    try:
        segment_set = SegmentSet(segments=data.reshape(n, c, t), split=np.array(split), **labels)
    except (DataError, ValueError, TypeError) as e:
        raise FormatError(f'corrupt segment manifest in {directory}: {e}') from e
    logger.info(f'read {n} segments ({segment_set.split_counts()}) from: {directory}')
    return segment_set

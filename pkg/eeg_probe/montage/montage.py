from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from eeg_probe.errors import MontageError
from eeg_probe.montage import listings
from eeg_probe.signal_io.types import SegmentSet

logger = logging.getLogger(__name__)

ALL_KEY = "all"
LOBE_PREFIX = "lobes_"


@dataclass(frozen=True)
class Montage:
    name: str
    n_channels: int
    # key -> indices exactly as listed (order and repeats preserved)
    listing: Dict[str, Tuple[int, ...]]
    listing_notes: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if ALL_KEY not in self.listing:
            raise MontageError(f'montage "{self.name}" has no "{ALL_KEY}" region')
        for key, indices in self.listing.items():
            bad = [i for i in indices if i < 1 or i > self.n_channels]
            if bad:
                raise MontageError(f'montage "{self.name}" region "{key}" has indices {bad} outside '
                                   f'1..{self.n_channels}')

    @property
    def keys(self) -> List[str]:
        return list(self.listing)

    def region(self, key: str) -> Tuple[int, ...]:
        """
        Sorted, de-duplicated 1-based channel indices of a region.
        """
        if key not in self.listing:
            raise MontageError(f'unknown region "{key}" for montage "{self.name}"')
        return tuple(sorted(set(self.listing[key])))

    @property
    def regions(self) -> Dict[str, Tuple[int, ...]]:
        return {key: self.region(key) for key in self.listing}

    def lobe_mates(self, index: int) -> Tuple[int, ...]:
        """
        All channels sharing a lobe region with the 1-based channel `index` (itself excluded).
        Hemisphere-specific lobe regions are used when they contain the channel, the combined
        lobe regions otherwise (midline channels).
        """
        lobe_keys = [k for k in self.listing if k.startswith(LOBE_PREFIX)]
        sided = [k for k in lobe_keys if k.endswith(("_left", "_right")) and index in self.listing[k]]
        keys = sided or [k for k in lobe_keys if index in self.listing[k]]
        mates = set()
        for k in keys:
            mates.update(self.listing[k])
        mates.discard(index)
        return tuple(sorted(mates))


_BUILTIN = {
    "seed_v1": dict(
        listing=listings.EEG_CAP_SEED_V1,
        n_channels=62,
        listing_notes=(
            "lobes_parietal_left and lobes_parietal_right both contain 36",
            "lobes_parietal lists 36 twice",
        ),
    ),
    "shot_v1": dict(
        listing=listings.EEG_CAP_SHOT_V1,
        n_channels=64,
        listing_notes=(
            "region indices are listed in cap order, not ascending",
        ),
    ),
    "seeddv": dict(
        listing=listings.SEEDV_CAP,
        n_channels=62,
        listing_notes=(
            "all lists 1..61 while noseback_right, noseback_back and noseback_Q4_right include 62",
            "noseback_Q2_left contains 3 where the SEED cap has 4",
            "noseback_Q3_left contains 56 where the SEED cap has 58",
            "lobes_occipital_left contains 54 where the SEED cap has 59",
            "lobes_temporal_left contains 29 where the SEED cap has 24",
        ),
    ),
}

BUILTIN_NAMES = tuple(_BUILTIN)


def load_builtin(name: str) -> Montage:
    if name not in _BUILTIN:
        raise MontageError(f'unknown montage "{name}", available: {list(_BUILTIN)}')
    spec = _BUILTIN[name]
    return Montage(
        name=name,
        n_channels=spec["n_channels"],
        listing={k: tuple(v) for k, v in spec["listing"].items()},
        listing_notes=spec["listing_notes"],
    )


def load_montage(name_or_path: str) -> Montage:
    """
    Builtin montage by name, otherwise a JSON file `{"name": .., "n_channels": .., "regions": {key: [..]}}`.
    """
    if name_or_path in _BUILTIN:
        return load_builtin(name_or_path)
    try:
        with open(name_or_path, encoding="utf-8") as f:
            content = json.load(f)
        regions = content["regions"]
        n_channels = int(content.get("n_channels", max(max(v) for v in regions.values())))
        return Montage(
            name=content.get("name", name_or_path),
            n_channels=n_channels,
            listing={k: tuple(int(i) for i in v) for k, v in regions.items()},
            listing_notes=tuple(content.get("listing_notes", [])),
        )
    except FileNotFoundError as e:
        raise MontageError(f'"{name_or_path}" is neither a builtin montage {list(_BUILTIN)} nor a file') from e
    except (KeyError, TypeError, ValueError) as e:
        raise MontageError(f'invalid montage file {name_or_path}: {e}') from e


def region_catalog(montage: Montage) -> List[Tuple[str, int]]:
    return [(key, len(montage.region(key))) for key in montage.listing]


def region_rows(montage: Montage, key: str, n_channels: int) -> np.ndarray:
    """
    0-based rows of a region for data with `n_channels` channels.
    """
    indices = montage.region(key)
    if indices[-1] > n_channels:
        raise MontageError(f'montage/data mismatch: region "{key}" of montage "{montage.name}" needs channel '
                           f'{indices[-1]}, data has {n_channels} channels')
    return np.asarray(indices, dtype=np.int64) - 1


def select_region(segments: SegmentSet, montage: Montage, key: str) -> SegmentSet:
    rows = region_rows(montage, key, segments.n_channels)
    return segments.replace(segments=segments.segments[:, rows, :])


def select_channels(segments: SegmentSet, indices: Sequence[int]) -> SegmentSet:
    """
    Projection on explicit 1-based channel indices (sorted, de-duplicated).
    """
    rows = np.asarray(sorted(set(indices)), dtype=np.int64) - 1
    if len(rows) == 0 or rows[0] < 0 or rows[-1] >= segments.n_channels:
        raise MontageError(f'channel indices {list(indices)} do not fit data with {segments.n_channels} channels')
    return segments.replace(segments=segments.segments[:, rows, :])

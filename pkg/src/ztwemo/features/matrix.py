"""Frame-level feature container and the shared 20 ms / 10 ms framing grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ZtwError

FRAME_MS = 20.0
SHIFT_MS = 10.0

LAYOUT_DIMS = {
    "MFCC13": 13,
    "MFCC39": 39,
    "EPOCH30": 30,
    "COMBINED69": 69,
    "SPLICED": None,
    "LDA": None,
}


def frame_params(sample_rate: int) -> tuple[int, int]:
    return int(round(FRAME_MS * sample_rate / 1000.0)), int(round(SHIFT_MS * sample_rate / 1000.0))


def frame_count(n_samples: int, sample_rate: int = 16000) -> int:
    """``floor((len - frame) / shift) + 1``, or 0 when shorter than one frame."""
    flen, shift = frame_params(sample_rate)
    if n_samples < flen:
        return 0
    return (n_samples - flen) // shift + 1


@dataclass
class FeatureMatrix:
    values: np.ndarray
    layout: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ZtwError(f"feature matrix must be 2-D, got shape {v.shape}")
        if self.layout not in LAYOUT_DIMS:
            raise ZtwError(f"unknown layout {self.layout!r}")
        want = LAYOUT_DIMS[self.layout]
        if want is not None and v.shape[1] != want:
            raise ZtwError(f"layout {self.layout} needs {want} dims, got {v.shape[1]}")
        if not np.all(np.isfinite(v)):
            raise ZtwError("feature matrix contains NaN or Inf")
        self.values = v

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def dims(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.frames

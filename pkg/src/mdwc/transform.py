"""Biorthogonal 9/7 wavelet pyramid via lifting.

The 1-D transform is normalized so the lowpass DC gain is sqrt(2): a
constant image c therefore produces LL = c * 2**levels and exactly zero
detail coefficients.  Boundaries use whole-sample symmetric extension.
Odd lengths split ceil/floor with the lowpass half taking the ceiling.
"""

from __future__ import annotations

import math

import numpy as np

_ALPHA = -1.586134342059924
_BETA = -0.052980118572961
_GAMMA = 0.882911075530934
_DELTA = 0.443506852043971
_K = 1.230174104914001
_ZETA = math.sqrt(2.0) / _K  # lowpass scale -> DC gain sqrt(2)

_PAD = 4  # one sample of support per lifting pass

ORIENTS = ("HL", "LH", "HH")


def _lift_fwd(y):
    """Four forward lifting passes, in place, on an extended 2-D block (rows)."""
    e = y[:, 0::2]
    o = y[:, 1::2]
    ne = e.shape[1]
    no = o.shape[1]
    m = min(no, ne - 1)
    o[:, :m] += _ALPHA * (e[:, :m] + e[:, 1 : m + 1])
    m = min(ne, no)
    e[:, 1:m] += _BETA * (o[:, 0 : m - 1] + o[:, 1:m])
    m = min(no, ne - 1)
    o[:, :m] += _GAMMA * (e[:, :m] + e[:, 1 : m + 1])
    m = min(ne, no)
    e[:, 1:m] += _DELTA * (o[:, 0 : m - 1] + o[:, 1:m])


def _lift_inv(y):
    """Inverse lifting passes, in place, on an extended 2-D block (rows)."""
    e = y[:, 0::2]
    o = y[:, 1::2]
    ne = e.shape[1]
    no = o.shape[1]
    m = min(ne, no)
    e[:, 1:m] -= _DELTA * (o[:, 0 : m - 1] + o[:, 1:m])
    m = min(no, ne - 1)
    o[:, :m] -= _GAMMA * (e[:, :m] + e[:, 1 : m + 1])
    m = min(ne, no)
    e[:, 1:m] -= _BETA * (o[:, 0 : m - 1] + o[:, 1:m])
    m = min(no, ne - 1)
    o[:, :m] -= _ALPHA * (e[:, :m] + e[:, 1 : m + 1])


def _analyze_rows(block):
    """One 1-D analysis pass along axis 1; returns the packed (low|high) block."""
    w = block.shape[1]
    y = np.pad(block, ((0, 0), (_PAD, _PAD)), mode="reflect")
    _lift_fwd(y)
    core = y[:, _PAD : _PAD + w]
    nlow = (w + 1) // 2
    out = np.empty_like(block)
    out[:, :nlow] = core[:, 0::2] * _ZETA
    out[:, nlow:] = core[:, 1::2] * (1.0 / _ZETA)
    return out

def _synthesize_rows(block):
    """Inverse of :func:`_analyze_rows`."""
    w = block.shape[1]
    nlow = (w + 1) // 2
    core = np.empty_like(block)
    core[:, 0::2] = block[:, :nlow] * (1.0 / _ZETA)
    core[:, 1::2] = block[:, nlow:] * _ZETA
    y = np.pad(core, ((0, 0), (_PAD, _PAD)), mode="reflect")
    _lift_inv(y)
    return y[:, _PAD : _PAD + w].copy()


class WaveletPyramid:
    """Subband-organized transform coefficients in the packed layout.

    ``data`` is an H x W float array; level-l subbands live in the usual
    nested rectangles (lowpass toward the top-left).  Level 1 is the finest;
    only the coarsest level carries LL.
    """

    def __init__(self, data, levels):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError("pyramid data must be 2-D")
        h, w = data.shape
        if levels < 1:
            raise ValueError("levels must be >= 1")
        if min(h, w) < (1 << levels):
            raise ValueError(
                f"{h}x{w} does not admit {levels} halvings (need min dim >= {1 << levels})"
            )
        self.data = data
        self.levels = levels
        self.height = h
        self.width = w
        # region_dims[l] = dims of the lowpass region after l splits
        dims = [(h, w)]
        for _ in range(levels):
            ph, pw = dims[-1]
            dims.append(((ph + 1) // 2, (pw + 1) // 2))
        self._region = dims

    @classmethod
    def zeros(cls, height, width, levels):
        return cls(np.zeros((height, width)), levels)

    @classmethod
    def from_subbands(cls, height, width, levels, subbands):
        """Assemble from a {(level, orient): array} map; dims are validated."""
        pyr = cls.zeros(height, width, levels)
        seen = set()
        for key, grid in subbands.items():
            grid = np.asarray(grid, dtype=np.float64)
            r0, c0, sh, sw = pyr.subband_rect(*key)
            if grid.shape != (sh, sw):
                raise ValueError(f"subband {key}: expected {(sh, sw)}, got {grid.shape}")
            pyr.data[r0 : r0 + sh, c0 : c0 + sw] = grid
            seen.add(key)
        missing = set(pyr.subband_keys()) - seen
        if missing:
            raise ValueError(f"missing subbands: {sorted(missing)}")
        return pyr

    def subband_rect(self, level, orient):
        """(row0, col0, height, width) of a subband; LL only at the top level."""
        if not 1 <= level <= self.levels:
            raise ValueError(f"level {level} out of range")
        oh, ow = self._region[level - 1]
        lh, lw = self._region[level]
        if orient == "LL":
            if level != self.levels:
                raise ValueError("LL exists only at the coarsest level")
            return 0, 0, lh, lw
        if orient == "HL":
            return 0, lw, lh, ow - lw
        if orient == "LH":
            return lh, 0, oh - lh, lw
        if orient == "HH":
            return lh, lw, oh - lh, ow - lw
        raise ValueError(f"unknown orientation {orient!r}")

    def subband(self, level, orient):
        r0, c0, h, w = self.subband_rect(level, orient)
        return self.data[r0 : r0 + h, c0 : c0 + w]

    def subband_keys(self):
        keys = [(self.levels, "LL")]
        for level in range(self.levels, 0, -1):
            keys.extend((level, o) for o in ORIENTS)
        return keys

    def max_magnitude(self):
        return float(np.max(np.abs(self.data)))


def forward_dwt97(image, levels=5):
    """Forward 5-level-style 9/7 transform of an 8-bit grayscale plane."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("image must be a 2-D grayscale plane")
    pyr = WaveletPyramid(image.astype(np.float64), levels)
    data = pyr.data
    for level in range(1, levels + 1):
        oh, ow = pyr._region[level - 1]
        region = data[:oh, :ow]
        region[:] = _analyze_rows(region)
        region[:] = _analyze_rows(region.T).T
    return pyr


def inverse_dwt97(pyramid):
    """Real-valued image from a pyramid; callers clamp/round for display."""
    data = pyramid.data.copy()
    for level in range(pyramid.levels, 0, -1):
        oh, ow = pyramid._region[level - 1]
        region = data[:oh, :ow]
        region[:] = _synthesize_rows(region.T).T
        region[:] = _synthesize_rows(region)
    return data


def to_uint8(image):
    """Clamp and round a real-valued reconstruction to 8-bit samples."""
    return np.clip(np.rint(image), 0, 255).astype(np.uint8)

"""Context-weight prediction: 14-feature least-squares training per orientation.

Each detail coefficient gets a 14-entry context: twelve spatial neighbors,
the parent in the next-coarser subband of the same orientation, and the
mean of its four children one level finer.  Training regresses coefficient
magnitudes on magnitude contexts (binary significance contexts make the
normal equations singular); the trained weights are then applied to binary
significance flags to score how likely an untested coefficient is to be
significant.

Weights are clamped to (-8, 8) and carried as signed 16-bit fixed point
with 12 fractional bits, so encoder and decoder evaluate the score from
identical dequantized values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Spatial context offsets, in feature order B1..B12.
OFFSETS = (
    (-2, 0), (-1, -1), (-1, 0), (-1, 1),
    (0, -2), (0, -1), (0, 1), (0, 2),
    (1, -1), (1, 0), (1, 1), (2, 0),
)

N_FEATURES = 14
_Q_ONE = 4096  # 12 fractional bits
_Q_MAX = 32767  # keeps |alpha| strictly below 8

RIDGE_SCALE = 1e-6


class DegenerateTrainingError(Exception):
    """Too little data to train; callers fall back to all-zero weights."""


def quantize(alphas):
    q = np.rint(np.asarray(alphas, dtype=np.float64) * _Q_ONE)
    return np.clip(q, -_Q_MAX, _Q_MAX).astype(np.int16)


def dequantize(q):
    return np.asarray(q, dtype=np.float64) / _Q_ONE


@dataclass(frozen=True)
class WeightSet:
    orientation: str
    quantized: np.ndarray  # int16[14]

    @property
    def alphas(self):
        """Dequantized weights; the only values either codec side evaluates."""
        return dequantize(self.quantized)

    @classmethod
    def from_alphas(cls, orientation, alphas):
        return cls(orientation, quantize(alphas))

    @classmethod
    def zero(cls, orientation):
        return cls(orientation, np.zeros(14, dtype=np.int16))


def magnitude_context(pyramid, level, orient, r, c):
    """Training-side context of |coefficient| features at one position."""
    if orient == "LL":
        raise ValueError("LL positions carry no context weights")
    grid = pyramid.subband(level, orient)
    h, w = grid.shape
    feats = np.zeros(N_FEATURES)
    for k, (dr, dc) in enumerate(OFFSETS):
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w:
            feats[k] = abs(grid[rr, cc])
    if level + 1 <= pyramid.levels:
        parent = pyramid.subband(level + 1, orient)
        pr, pc = r >> 1, c >> 1
        if pr < parent.shape[0] and pc < parent.shape[1]:
            feats[12] = abs(parent[pr, pc])
    if level - 1 >= 1:
        child = pyramid.subband(level - 1, orient)
        ch, cw = child.shape
        total = 0.0
        for rr in (2 * r, 2 * r + 1):
            if rr < ch:
                for cc in (2 * c, 2 * c + 1):
                    if cc < cw:
                        total += abs(child[rr, cc])
        feats[13] = total / 4.0
    return feats


def significance_context(sig_maps, levels, level, orient, r, c):
    """Binary S features from {(level, orient): 0/1 grid} codec state."""
    if orient == "LL":
        raise ValueError("LL positions carry no context weights")
    grid = sig_maps[(level, orient)]
    h, w = grid.shape
    feats = np.zeros(N_FEATURES)
    for k, (dr, dc) in enumerate(OFFSETS):
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w:
            feats[k] = 1.0 if grid[rr, cc] else 0.0
    if level + 1 <= levels:
        parent = sig_maps[(level + 1, orient)]
        pr, pc = r >> 1, c >> 1
        if pr < parent.shape[0] and pc < parent.shape[1] and parent[pr, pc]:
            feats[12] = 1.0
    if level - 1 >= 1:
        child = sig_maps[(level - 1, orient)]
        ch, cw = child.shape
        total = 0
        for rr in (2 * r, 2 * r + 1):
            if rr < ch:
                for cc in (2 * c, 2 * c + 1):
                    if cc < cw and child[rr, cc]:
                        total += 1
        feats[13] = total / 4.0
    return feats


def significance_degree(weight_set, features):
    """Predicted significance score: dot(dequantized weights, S features)."""
    return float(np.dot(weight_set.alphas, np.asarray(features, dtype=np.float64)))


def _shifted(grid, dr, dc):
    out = np.zeros_like(grid)
    h, w = grid.shape
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    if r0 < r1 and c0 < c1:
        out[r0:r1, c0:c1] = grid[r0 + dr : r1 + dr, c0 + dc : c1 + dc]
    return out


def _context_matrix(pyramid, level, orient):
    """All magnitude contexts of one subband as an (h*w) x 14 matrix."""
    a = np.abs(pyramid.subband(level, orient))
    h, w = a.shape
    cols = [_shifted(a, dr, dc).ravel() for dr, dc in OFFSETS]
    parent_feat = np.zeros_like(a)
    if level + 1 <= pyramid.levels:
        pa = np.abs(pyramid.subband(level + 1, orient))
        ph, pw = pa.shape
        rr = (np.arange(h) >> 1)[:, None]
        cc = (np.arange(w) >> 1)[None, :]
        mask = (rr < ph) & (cc < pw)
        parent_feat = np.where(mask, pa[np.minimum(rr, ph - 1), np.minimum(cc, pw - 1)], 0.0)
    cols.append(parent_feat.ravel())
    child_feat = np.zeros_like(a)
    if level - 1 >= 1:
        ca = np.abs(pyramid.subband(level - 1, orient))
        padded = np.zeros((2 * h, 2 * w))
        ch, cw = min(ca.shape[0], 2 * h), min(ca.shape[1], 2 * w)
        padded[:ch, :cw] = ca[:ch, :cw]
        child_feat = (
            padded[0::2, 0::2] + padded[0::2, 1::2] + padded[1::2, 0::2] + padded[1::2, 1::2]
        ) / 4.0
    cols.append(child_feat.ravel())
    return np.column_stack(cols), a.ravel()


def training_system(pyramid, orient):
    """Pooled (C, x) over levels 2..levels; the finest level is excluded."""
    if pyramid.levels < 2:
        raise ValueError("training needs a pyramid with at least 2 levels")
    blocks = [_context_matrix(pyramid, level, orient) for level in range(2, pyramid.levels + 1)]
    c = np.vstack([b[0] for b in blocks])
    x = np.concatenate([b[1] for b in blocks])
    return c, x


def solve_ridge(c, x):
    """Least squares via ridge-stabilized normal equations.

    Returns (alpha, lam) with lam = 1e-6 * trace(C'C) / 14; the normal
    equations make C'(x - C a) = lam * a hold exactly at the solution.
    """
    g = c.T @ c
    trace = float(np.trace(g))
    if not np.isfinite(trace) or trace <= 0.0:
        raise DegenerateTrainingError("zero or invalid training data")
    lam = RIDGE_SCALE * trace / N_FEATURES
    rhs = c.T @ x
    try:
        alpha = np.linalg.solve(g + lam * np.eye(N_FEATURES), rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateTrainingError(str(exc)) from exc
    return alpha, lam


def train_weights(pyramid, orient):
    """Train one orientation's WeightSet; raises DegenerateTrainingError."""
    c, x = training_system(pyramid, orient)
    if c.shape[0] < N_FEATURES:
        raise DegenerateTrainingError(f"only {c.shape[0]} training rows")
    alpha, _ = solve_ridge(c, x)
    alpha = np.clip(alpha, -8.0, 8.0)
    return WeightSet.from_alphas(orient, alpha)


def train_all(pyramid):
    """WeightSets for HL, LH, HH with the zero-weight degenerate fallback."""
    out = {}
    for orient in ("HL", "LH", "HH"):
        try:
            out[orient] = train_weights(pyramid, orient)
        except DegenerateTrainingError:
            out[orient] = WeightSet.zero(orient)
    return out

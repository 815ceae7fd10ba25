"""Codeword-length algebra checks for the group coding methods.

Enumerates, for every significance pattern of an N-member group, the exact
number of significance bits each coding method spends (signs excluded:
sign bits are pattern-independent and the averages below count only test
bits).  Alongside the enumeration there are the closed-form averages and
the threshold inequalities the codec's strategy selector relies on, plus
an M-histogram collector for measuring how group significance counts are
distributed on real transforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

METHODS = ("Direct", "GroupTest", "VLGroupTest", "VLPerfectOrder", "ControlDilation")


def _vl_bits(bits):
    """Significance bits of the variable-length group test on one pattern."""
    n = len(bits)
    m = sum(bits)
    if m == 0:
        return 1  # group bit only
    if m == 1:
        count = 2  # group bit + pre-bit
        for i, b in enumerate(bits):
            if i == n - 1:
                break  # the last member is inferred, no bit
            count += 1
            if b:
                break
        return count
    count = 2
    zeros = 0
    for b in bits:
        if zeros == n - 2:
            break  # remaining members inferred significant
        count += 1
        if not b:
            zeros += 1
    return count


def _control_bits(bits):
    """Bits of weight-controlled dilation: stop on one 0 or after two 1s."""
    count = 0
    ones = 0
    for b in bits:
        count += 1
        if b:
            ones += 1
            if ones == 2:
                break
        else:
            break
    return count


def pattern_length(n, method, pattern):
    """Significance-bit cost of one pattern (bit k of ``pattern`` = member k)."""
    bits = [(pattern >> k) & 1 for k in range(n)]
    m = sum(bits)
    if method == "Direct":
        return n
    if method == "GroupTest":
        return 1 if m == 0 else n + 1
    if method == "VLGroupTest":
        return _vl_bits(bits)
    if method == "VLPerfectOrder":
        # ideal ordering: the lone significant member first for M = 1,
        # all insignificant members first for M > 1
        if m == 1:
            reordered = [1] + [0] * (n - 1)
        else:
            reordered = sorted(bits)
        return _vl_bits(reordered)
    if method == "ControlDilation":
        return _control_bits(bits)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class LengthTable:
    n: int
    method: str
    lengths: list  # cost per pattern, index = significance bitmask
    per_m_average: list  # mean cost over the C(n, m) placements of each m

    def average(self, distribution):
        """Expected cost under a distribution over M (uniform within each M)."""
        dist = np.asarray(distribution, dtype=np.float64)
        if dist.shape != (self.n + 1,):
            raise ValueError(f"distribution must have {self.n + 1} entries")
        if dist.min() < 0 or abs(dist.sum() - 1.0) > 1e-9:
            raise ValueError("distribution must be nonnegative and sum to 1")
        return float(np.dot(dist, self.per_m_average))


def enumerate_lengths(n, method):
    if not 1 <= n <= 8:
        raise ValueError("group size must be in 1..8")
    lengths = [pattern_length(n, method, p) for p in range(1 << n)]
    sums = [0.0] * (n + 1)
    counts = [0] * (n + 1)
    for pattern, cost in enumerate(lengths):
        m = bin(pattern).count("1")
        sums[m] += cost
        counts[m] += 1
    return LengthTable(n, method, lengths, [s / c for s, c in zip(sums, counts)])


def expected_length(table, distribution):
    return table.average(distribution)


# -- closed-form averages ---------------------------------------------------

def group_test_average(n, p0):
    """Plain group test: 1 * p0 + (N + 1) * (1 - p0)."""
    return 1.0 * p0 + (n + 1) * (1.0 - p0)


def vl_m1_average(n):
    """Mean member-bit cost for M = 1: 2 + (1 + 2 + ... + (N-2) + (N-1) + (N-1)) / N."""
    return 2.0 + (sum(range(1, n - 1)) + (n - 1) + (n - 1)) / n


def vl_average(n, p0, p1):
    return 1.0 * p0 + vl_m1_average(n) * p1 + (2.0 + n) * (1.0 - p0 - p1)


def vl_perfect_average(n, p0, p1, p2):
    """Perfect-order bound: 1*p0 + 3*p1 + N*p2 + (2+N)*(1-p0-p1-p2)."""
    return 1.0 * p0 + 3.0 * p1 + float(n) * p2 + (2.0 + n) * (1.0 - p0 - p1 - p2)


def group_test_threshold(n):
    """p0 above which the group test beats direct coding."""
    return 1.0 / n


def vl_over_group_threshold(n):
    """min(p0, p1) above which variable-length beats the plain group test."""
    return 2.0 * n / (n * n + n + 2)


def vl_over_direct_threshold(n):
    """min(p0, p1) above which variable-length beats direct coding."""
    return 4.0 * n / (3 * n * n + n + 2)


def verify_inequalities(n, p0, p1):
    """Antecedent/consequent truth values for the three selector implications."""
    report = {
        "gt_condition": p0 > group_test_threshold(n),
        "gt_beats_direct": group_test_average(n, p0) < n,
        "vl_condition": min(p0, p1) > vl_over_group_threshold(n),
        "vl_beats_gt": vl_average(n, p0, p1) < group_test_average(n, p0),
        "select_condition": min(p0, p1) > vl_over_direct_threshold(n),
        "vl_beats_direct": vl_average(n, p0, p1) < n,
    }
    report["gt_implication"] = (not report["gt_condition"]) or report["gt_beats_direct"]
    report["vl_implication"] = (not report["vl_condition"]) or report["vl_beats_gt"]
    report["select_implication"] = (
        not report["select_condition"]
    ) or report["vl_beats_direct"]
    return report


def sweep_inequalities(ns=range(2, 9), step=0.01):
    """Grid-search for counterexamples to the three implications.

    Returns a list of (n, p0, p1, which) tuples; empty means all hold.
    """
    probs = np.arange(step, 1.0, step)
    p0, p1 = np.meshgrid(probs, probs, indexing="ij")
    valid = p0 + p1 <= 1.0 + 1e-12
    bad = []
    for n in ns:
        pmin = np.minimum(p0, p1)
        gt = group_test_average(n, p0)
        vl = vl_average(n, p0, p1)
        checks = (
            ("gt", (p0 > group_test_threshold(n)) & ~(gt < n)),
            ("vl", (pmin > vl_over_group_threshold(n)) & ~(vl < gt)),
            ("select", (pmin > vl_over_direct_threshold(n)) & ~(vl < n)),
        )
        for name, fail in checks:
            hits = np.argwhere(fail & valid)
            for i, j in hits:
                bad.append((n, float(probs[i]), float(probs[j]), name))
    return bad


# -- measured M distribution -------------------------------------------------

def m_histogram(pyramid, bitplane):
    """Counts[N][M] of significant-neighbor patterns at one bitplane.

    For every coefficient of the detail subbands that is significant at the
    plane, N is its number of in-bounds 8-neighbors and M how many of those
    are significant.  Returns a 9x9 integer array (rows N in 1..8).
    """
    threshold = 1 << bitplane
    hist = np.zeros((9, 9), dtype=np.int64)
    for level in range(1, pyramid.levels + 1):
        for orient in ("HL", "LH", "HH"):
            grid = pyramid.subband(level, orient)
            if grid.size == 0:
                continue
            sig = np.floor(np.abs(grid)) >= threshold
            if not sig.any():
                continue
            h, w = sig.shape
            neighbors = np.zeros((h, w), dtype=np.int64)
            avail = np.zeros((h, w), dtype=np.int64)
            ones = np.ones((h, w), dtype=np.int64)
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == 0 and dc == 0:
                        continue
                    r0, r1 = max(0, -dr), min(h, h - dr)
                    c0, c1 = max(0, -dc), min(w, w - dc)
                    if r0 < r1 and c0 < c1:
                        neighbors[r0:r1, c0:c1] += sig[r0 + dr : r1 + dr, c0 + dc : c1 + dc]
                        avail[r0:r1, c0:c1] += ones[r0 + dr : r1 + dr, c0 + dc : c1 + dc]
            ns = avail[sig]
            ms = neighbors[sig]
            np.add.at(hist, (ns, ms), 1)
    return hist


def m_distribution(hist):
    """P(M = m) aggregated over N from an m_histogram array."""
    totals = hist.sum(axis=0).astype(np.float64)
    s = totals.sum()
    return totals / s if s else totals


def spearman(x, y):
    """Spearman rank correlation (no ties expected in the M frequencies)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    def ranks(v):
        order = np.argsort(v, kind="stable")
        r = np.empty_like(v)
        r[order] = np.arange(len(v), dtype=np.float64)
        # average ranks over ties
        out = r.copy()
        for val in np.unique(v):
            mask = v == val
            out[mask] = r[mask].mean()
        return out
    rx = ranks(x)
    ry = ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx ** 2).sum() * (ry ** 2).sum())
    return float((rx * ry).sum() / denom) if denom else 0.0

"""Test-side harness bits: recording sinks and hand-built coder engines."""

from __future__ import annotations

import numpy as np

from mdwc.bitio import MODEL_SIG
from mdwc.codec import CoderEngine, EncoderChannel, compute_nmax


class RecordingSink:
    """Captures every (bit, model) pair instead of packing bytes."""

    def __init__(self):
        self.bits = []

    def put(self, bit, model=0):
        self.bits.append((bit, model))

    def bits_emitted(self):
        return len(self.bits)

    def significance_bits(self):
        return [b for b, m in self.bits if m == MODEL_SIG]

    def clear(self):
        self.bits.clear()


def encoder_engine(pyramid, weight_sets=None, sink=None, budget=None,
                   fingerprint=False):
    """Encoder-side engine over a pyramid, wired to a recording sink."""
    if weight_sets is None:
        from mdwc.weights import WeightSet

        weight_sets = {o: WeightSet.zero(o) for o in ("HL", "LH", "HH")}
    n_max, _ = compute_nmax(pyramid)
    sink = sink if sink is not None else RecordingSink()
    channel = EncoderChannel(sink, budget)
    engine = CoderEngine(
        pyramid.height, pyramid.width, pyramid.levels,
        weight_sets, n_max, channel, fingerprint,
    )
    engine.load_truth(pyramid)
    return engine, sink


def set_threshold(engine, plane):
    engine.plane = plane
    engine.threshold = 1 << plane
    engine.channel.threshold = engine.threshold


def find_subband(engine, level, orient):
    for sb in engine.subbands:
        if sb.level == level and sb.orient == orient:
            return sb
    raise LookupError((level, orient))


def snapshot_equal(a, b):
    """Deep equality of two engine state snapshots."""
    for key in ("status", "sign", "rec", "sig_plane"):
        for ga, gb in zip(a[key], b[key]):
            if not np.array_equal(ga, gb):
                return False, key
    if a["lis"] != b["lis"]:
        return False, "lis"
    if a["lsp"] != b["lsp"]:
        return False, "lsp"
    if a["stats"] != b["stats"]:
        return False, "stats"
    return True, None

import math

import numpy as np
import pytest

from mdwc.bitio import (
    MODEL_REF,
    MODEL_SIG,
    MODEL_SIGN,
    ArithBitSink,
    ArithBitSource,
    RawBitSink,
    RawBitSource,
    TruncatedStream,
)


def test_raw_msb_first_packing():
    sink = RawBitSink()
    for b in (1, 0, 1, 1, 0, 0, 0, 0):
        sink.put(b)
    assert sink.getvalue() == b"\xb0"


def test_raw_partial_byte_zero_padded():
    sink = RawBitSink()
    for b in (1, 1, 1):
        sink.put(b)
    assert sink.getvalue() == b"\xe0"


def test_bit_counts():
    sink = RawBitSink()
    assert sink.bits_emitted() == 0
    for _ in range(13):
        sink.put(1)
    assert sink.bits_emitted() == 13


def test_raw_round_trip():
    rng = np.random.default_rng(1)
    bits = rng.integers(0, 2, 1000).tolist()
    sink = RawBitSink()
    for b in bits:
        sink.put(b)
    src = RawBitSource(sink.getvalue())
    assert [src.get() for _ in bits] == bits
    assert src.bits_consumed() == len(bits)


def test_raw_source_exhaustion():
    src = RawBitSource(b"\xff")
    for _ in range(8):
        src.get()
    with pytest.raises(TruncatedStream):
        src.get()


def _roundtrip_arith(bits, models):
    sink = ArithBitSink()
    for b, m in zip(bits, models):
        sink.put(b, m)
    data = sink.getvalue()
    src = ArithBitSource(data)
    out = [src.get(m) for m in models]
    return out, data, sink, src


def test_arith_round_trip_interleaved_models():
    rng = np.random.default_rng(2)
    n = 100_000
    bits = rng.integers(0, 2, n).tolist()
    models = rng.integers(0, 3, n).tolist()
    out, _, sink, src = _roundtrip_arith(bits, models)
    assert out == bits
    assert sink.bits_emitted() == src.bits_consumed()


def test_arith_skewed_round_trip_and_entropy():
    rng = np.random.default_rng(3)
    n = 10_000
    bits = (rng.random(n) >= 0.9).astype(int).tolist()  # P(0) = 0.9
    out, data, _, _ = _roundtrip_arith(bits, [MODEL_SIG] * n)
    assert out == bits
    h = -(0.9 * math.log2(0.9) + 0.1 * math.log2(0.1))
    bound = n * h
    assert len(data) * 8 <= bound * 1.05
    assert len(data) * 8 >= bound * 0.95


def test_arith_emission_counter_mirrors_decoder():
    rng = np.random.default_rng(4)
    bits = rng.integers(0, 2, 5000).tolist()
    models = rng.integers(0, 3, 5000).tolist()
    sink = ArithBitSink()
    src_counts = []
    for b, m in zip(bits, models):
        sink.put(b, m)
        src_counts.append(sink.bits_emitted())
    src = ArithBitSource(sink.getvalue())
    for b, m, expected in zip(bits, models, src_counts):
        assert src.get(m) == b
        assert src.bits_consumed() == expected


def test_arith_flush_lower_bounds_within_four_bytes():
    rng = np.random.default_rng(5)
    for n in (0, 1, 7, 100, 3133):
        sink = ArithBitSink()
        for b in rng.integers(0, 2, n).tolist():
            sink.put(b, MODEL_REF)
        emitted = sink.bits_emitted()
        flushed = len(sink.getvalue()) * 8
        assert 0 <= flushed - emitted <= 32


def test_arith_never_balloons_past_raw():
    # 32 bits + 2 bytes of slack over the raw length, across input shapes
    rng = np.random.default_rng(6)
    cases = [
        rng.integers(0, 2, 10_000).tolist(),
        [0] * 10_000,
        [0, 1] * 5_000,
        (rng.random(10_000) >= 0.95).astype(int).tolist(),
    ]
    for bits in cases:
        sink = ArithBitSink()
        for b in bits:
            sink.put(b, MODEL_SIGN)
        assert len(sink.getvalue()) * 8 <= len(bits) + 32 + 16


def test_arith_truncated_source_signals():
    sink = ArithBitSink()
    for b in (1, 0) * 200:
        sink.put(b)
    data = sink.getvalue()
    src = ArithBitSource(data[: len(data) // 2])
    with pytest.raises(TruncatedStream):
        for _ in range(400):
            src.get()


def test_arith_empty_source_signals_immediately():
    src = ArithBitSource(b"")
    with pytest.raises(TruncatedStream):
        src.get()

"""Bit-exact bit I/O: raw MSB-first packing and adaptive binary arithmetic coding.

Both back ends speak the same protocol (``put``/``get`` plus an emission
counter), so the coding layer never needs to know which one is active.
The arithmetic coder keeps three independent zeroth-order models, one per
bit class (significance, sign, refinement).

The emission counters are the rate-control contract: after any number of
coded symbols the encoder's ``bits_emitted()`` equals the decoder's
``bits_consumed()``, for either back end.  Budget decisions made from these
counters therefore fall on the same symbol on both sides.
"""

from __future__ import annotations

MODEL_SIG = 0
MODEL_SIGN = 1
MODEL_REF = 2

_STATE_BITS = 32
_FULL = 1 << _STATE_BITS
_HALF = _FULL >> 1
_QUARTER = _FULL >> 2
_THREEQ = _HALF + _QUARTER
_MASK = _FULL - 1
_MAX_TOTAL = 1 << 16
# Counted up front so the real flush tail (32 bits + byte padding) exceeds
# bits_emitted() by at most 4 bytes.
_FLUSH_RESERVE = 8

_FNV = 0x100000001B3
_M64 = 0xFFFFFFFFFFFFFFFF


class TruncatedStream(Exception):
    """A bit source ran out of data; the codec stops cleanly at this point."""


class RawBitSink:
    """MSB-first bit packer; the final byte is zero-padded."""

    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._n = 0
        self._count = 0

    def put(self, bit, model=0):
        self._acc = (self._acc << 1) | bit
        self._n += 1
        self._count += 1
        if self._n == 8:
            self._buf.append(self._acc)
            self._acc = 0
            self._n = 0

    def bits_emitted(self):
        return self._count

    def getvalue(self):
        out = bytes(self._buf)
        if self._n:
            out += bytes((self._acc << (8 - self._n),))
        return out


class RawBitSource:
    """MSB-first bit reader over a byte string."""

    def __init__(self, data):
        self._data = data
        self._nbits = 8 * len(data)
        self._pos = 0

    def get(self, model=0):
        pos = self._pos
        if pos >= self._nbits:
            raise TruncatedStream
        self._pos = pos + 1
        return (self._data[pos >> 3] >> (7 - (pos & 7))) & 1

    def bits_consumed(self):
        return self._pos


class ArithBitSink:
    """Adaptive binary arithmetic encoder (32-bit low/high, carry-free).

    Counts start at (1, 1), grow by 1 per coded symbol and are both halved
    (rounding up) once their sum reaches 2**16.  ``bits_emitted`` counts
    committed bits: renormalization outputs plus pending underflow bits,
    plus a fixed flush reserve.  The decoder mirrors the same quantity.
    """

    def __init__(self):
        self._low = 0
        self._high = _MASK
        self._pending = 0
        self._out = RawBitSink()
        self._c0 = [1, 1, 1]
        self._c1 = [1, 1, 1]
        self._count = 0
        self._flushed = None

    def put(self, bit, model=0):
        if self._flushed is not None:
            raise RuntimeError("sink already flushed")
        c0 = self._c0[model]
        c1 = self._c1[model]
        total = c0 + c1
        low = self._low
        high = self._high
        split = low + ((high - low + 1) * c0) // total - 1
        if bit:
            low = split + 1
        else:
            high = split
        while True:
            if high < _HALF:
                self._bit_plus_follow(0)
            elif low >= _HALF:
                self._bit_plus_follow(1)
                low -= _HALF
                high -= _HALF
            elif low >= _QUARTER and high < _THREEQ:
                self._pending += 1
                self._count += 1
                low -= _QUARTER
                high -= _QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
        self._low = low
        self._high = high
        if bit:
            self._c1[model] = c1 = c1 + 1
        else:
            self._c0[model] = c0 = c0 + 1
        if c0 + c1 >= _MAX_TOTAL:
            self._c0[model] = (c0 + 1) >> 1
            self._c1[model] = (c1 + 1) >> 1

    def _bit_plus_follow(self, bit):
        out = self._out
        out.put(bit)
        inv = bit ^ 1
        for _ in range(self._pending):
            out.put(inv)
        self._pending = 0
        self._count += 1

    def bits_emitted(self):
        return self._count + _FLUSH_RESERVE

    def getvalue(self):
        if self._flushed is None:
            # Disambiguate the final interval, then give the decoder enough
            # lookahead that it never starves on a complete stream.  Any bit
            # suffix after the follow bits still decodes the coded symbols.
            self._pending += 1
            self._bit_plus_follow(0 if self._low < _QUARTER else 1)
            for _ in range(_STATE_BITS - 1):
                self._out.put(0)
            self._flushed = self._out.getvalue()
        return self._flushed


class ArithBitSource:
    """Decoder matching :class:`ArithBitSink` bit for bit."""

    def __init__(self, data):
        self._data = data
        self._nbits = 8 * len(data)
        self._pos = 0
        self._low = 0
        self._high = _MASK
        self._code = None  # filled on first get()
        self._c0 = [1, 1, 1]
        self._c1 = [1, 1, 1]
        self._count = 0

    def _next_raw(self):
        pos = self._pos
        if pos >= self._nbits:
            raise TruncatedStream
        self._pos = pos + 1
        return (self._data[pos >> 3] >> (7 - (pos & 7))) & 1

    def get(self, model=0):
        code = self._code
        if code is None:
            code = 0
            for _ in range(_STATE_BITS):
                code = (code << 1) | self._next_raw()
            self._code = code
        c0 = self._c0[model]
        c1 = self._c1[model]
        total = c0 + c1
        low = self._low
        high = self._high
        split = low + ((high - low + 1) * c0) // total - 1
        if code > split:
            bit = 1
            low = split + 1
        else:
            bit = 0
            high = split
        while True:
            if high < _HALF:
                pass
            elif low >= _HALF:
                low -= _HALF
                high -= _HALF
                code -= _HALF
            elif low >= _QUARTER and high < _THREEQ:
                low -= _QUARTER
                high -= _QUARTER
                code -= _QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
            code = (code << 1) | self._next_raw()
            self._count += 1
        self._low = low
        self._high = high
        self._code = code
        if bit:
            self._c1[model] = c1 = c1 + 1
        else:
            self._c0[model] = c0 = c0 + 1
        if c0 + c1 >= _MAX_TOTAL:
            self._c0[model] = (c0 + 1) >> 1
            self._c1[model] = (c1 + 1) >> 1
        return bit

    def bits_consumed(self):
        return self._count + _FLUSH_RESERVE


def make_sink(arithmetic):
    return ArithBitSink() if arithmetic else RawBitSink()


def make_source(data, arithmetic):
    return ArithBitSource(data) if arithmetic else RawBitSource(data)

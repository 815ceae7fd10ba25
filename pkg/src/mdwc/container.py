"""The .mdw container: a fixed 96-byte header plus the embedded payload.

Header layout (little endian):
  magic   4s   "MDWC"
  version u8   1
  flags   u8   bit0 = arithmetic coding, bit1 = empty payload
  width   u16
  height  u16
  levels  u8
  n_max   u8
  weights 3 x 14 x i16, order HL, LH, HH, 12 fractional bits

The payload may be truncated at any byte; a truncated header is rejected.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"MDWC"
VERSION = 1
FLAG_AC = 0x01
FLAG_EMPTY = 0x02
HEADER_SIZE = 96
HEADER_BITS = HEADER_SIZE * 8

_FMT = "<4sBBHHBB42h"
WEIGHT_ORDER = ("HL", "LH", "HH")


class FormatError(ValueError):
    """Stream does not parse as a .mdw container."""


@dataclass
class Header:
    width: int
    height: int
    levels: int
    n_max: int
    arithmetic: bool
    empty: bool
    weights: dict  # orient -> np.int16[14], quantized

    def pack(self):
        flags = (FLAG_AC if self.arithmetic else 0) | (FLAG_EMPTY if self.empty else 0)
        qs = []
        for orient in WEIGHT_ORDER:
            q = np.asarray(self.weights[orient], dtype=np.int16)
            if q.shape != (14,):
                raise ValueError(f"weights[{orient}] must have 14 entries")
            qs.extend(int(v) for v in q)
        return struct.pack(
            _FMT, MAGIC, VERSION, flags, self.width, self.height,
            self.levels, self.n_max, *qs,
        )

    @classmethod
    def unpack(cls, data):
        if len(data) < HEADER_SIZE:
            raise FormatError(f"stream too short for header ({len(data)} bytes)")
        magic, version, flags, width, height, levels, n_max, *qs = struct.unpack(
            _FMT, data[:HEADER_SIZE]
        )
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"unsupported version {version}")
        weights = {}
        for i, orient in enumerate(WEIGHT_ORDER):
            weights[orient] = np.array(qs[14 * i : 14 * (i + 1)], dtype=np.int16)
        return cls(
            width=width,
            height=height,
            levels=levels,
            n_max=n_max,
            arithmetic=bool(flags & FLAG_AC),
            empty=bool(flags & FLAG_EMPTY),
            weights=weights,
        )


def split_stream(data):
    """(header, payload bytes); payload may be truncated, header may not."""
    header = Header.unpack(data)
    return header, data[HEADER_SIZE:]


def write_stream(path, data):
    with open(path, "wb") as f:
        f.write(data)


def read_stream(path):
    with open(path, "rb") as f:
        data = f.read()
    return split_stream(data)

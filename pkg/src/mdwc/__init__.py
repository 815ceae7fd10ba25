"""Embedded wavelet image codec with weight-driven morphological dilation."""

from .codec import (
    compute_nmax,
    decode,
    decode_image,
    decode_with_engine,
    encode,
    encode_image,
    encode_with_engine,
)
from .pgm import psnr, read_pgm, write_pgm
from .transform import WaveletPyramid, forward_dwt97, inverse_dwt97, to_uint8
from .weights import WeightSet, train_all, train_weights

__version__ = "0.1.0"

__all__ = [
    "WaveletPyramid",
    "WeightSet",
    "compute_nmax",
    "decode",
    "decode_image",
    "decode_with_engine",
    "encode",
    "encode_image",
    "encode_with_engine",
    "forward_dwt97",
    "inverse_dwt97",
    "psnr",
    "read_pgm",
    "to_uint8",
    "train_all",
    "train_weights",
    "write_pgm",
]

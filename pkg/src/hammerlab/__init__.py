"""hammerlab: RowHammer trackers as streaming algorithms, adversarial
activation streams, a REF-schedule simulator, and per-bank cost models."""

__version__ = "0.1.0"

from .model import (
    DEFAULT_GEOMETRY,
    DEFAULT_TIMING,
    ActivationStream,
    BankGeometry,
    TimingParams,
    build_stream,
    max_acts_per_trefi,
    max_stream_len,
)

__all__ = [
    "ActivationStream",
    "BankGeometry",
    "DEFAULT_GEOMETRY",
    "DEFAULT_TIMING",
    "TimingParams",
    "build_stream",
    "max_acts_per_trefi",
    "max_stream_len",
]

"""Correlation-filter tracking with primary/secondary peak confidence gating."""
from mdrcf.tracker import FrameRecord, Tracker, TrackerConfig, run_sequence
from mdrcf.types import BoundingBox

__all__ = ["BoundingBox", "FrameRecord", "Tracker", "TrackerConfig", "run_sequence"]
__version__ = "0.1.0"

"""Quality-improvement loop for task-oriented semantic parsers.

The package is organised as a pipeline over a file-backed bug ledger:

- :mod:`framefix.frames` parses and serializes bracketed intent/slot frames.
- :mod:`framefix.detection` samples likely failures from request logs.
- :mod:`framefix.attribution` classifies each bug's root cause.
- :mod:`framefix.correction` turns attributed bugs into fix proposals.
- :mod:`framefix.refmodel` is the small deterministic parser under repair.
- :mod:`framefix.store` persists bugs, proposals, rules, and training data.
- :mod:`framefix.service` exposes the loop as an HTTP JSON API.
- :mod:`framefix.cli` drives everything from the command line.
"""

from .frames import Frame, FrameError, Slot, parse_frame, serialize_frame
from .store import Store

__version__ = "0.1.0"

__all__ = [
    "Frame",
    "FrameError",
    "Slot",
    "Store",
    "parse_frame",
    "serialize_frame",
    "__version__",
]

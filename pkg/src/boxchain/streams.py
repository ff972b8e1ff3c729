"""Counter-based random streams keyed by run seed and stream label.

Every consumer of randomness asks for its own labelled stream, so adding draws in one
place never shifts the numbers another place sees.
"""
import hashlib

import numpy as np


def stream_key(seed: int, label: str) -> int:
    """Derive the 128-bit Philox key of a stream from the seed and the label."""
    digest = hashlib.sha256("{}/{}".format(int(seed), label).encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "big")


def stream(seed: int, label: str) -> np.random.Generator:
    """Return an independent generator for ``label`` under ``seed``."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, label)))

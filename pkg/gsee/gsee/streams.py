"""Counter-based random streams derived from one root seed."""
import zlib

import numpy as np


def _word(part):
    """Map a path component onto a non-negative integer spawn key."""
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"stream path components must be non-negative, got {part}")
        return int(part)
    return zlib.crc32(str(part).encode('utf-8'))


def generator(root_seed, *path):
    """Return a Philox generator for the stream addressed by ``path``.

    Streams with different paths are statistically independent, and the draws
    of one stream never depend on what other streams consumed.
    """
    seq = np.random.SeedSequence(int(root_seed), spawn_key=tuple(_word(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))

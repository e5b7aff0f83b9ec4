"""Deterministic stream derivation for reproducible parallel Monte Carlo.

Every random quantity in the package is drawn from a counter-based Philox
generator keyed by (master seed, stream path).  Replica i of any experiment
uses stream (seed, tag, i), so results are independent of worker scheduling
and identical across worker counts.
"""

from __future__ import annotations

import numpy as np

_TAGS = {}


def _tag_code(tag):
    # stable small integer per tag string
    code = _TAGS.get(tag)
    if code is None:
        code = sum((i + 1) * b for i, b in enumerate(tag.encode())) % (2 ** 31)
        _TAGS[tag] = code
    return code


def stream(seed, *path):
    """A numpy Generator on an independent Philox stream.

    ``path`` entries may be ints or short strings; strings are hashed to
    stable integers so call sites can label their streams.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for p in path:
        entropy.append(_tag_code(p) if isinstance(p, str) else int(p))
    ss = np.random.SeedSequence(entropy)
    return np.random.Generator(np.random.Philox(ss))

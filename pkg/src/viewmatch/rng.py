"""Deterministic random streams.

All randomness flows through numpy's PCG64 generator seeded via SeedSequence,
which is documented to produce identical streams across platforms and numpy
versions. Independent parts of the pipeline (sampling, augmentation, dropout,
weight init, per-exam synthesis) get their own streams derived from the run
seed plus string/int tags, so reordering or parallelizing one part can never
perturb another.
"""

import zlib

import numpy as np


def _tag_to_int(tag):
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFF
    if isinstance(tag, str):
        return zlib.crc32(tag.encode("utf-8"))
    raise TypeError(f"rng tag must be int or str, got {type(tag).__name__}")


def derive_rng(seed, *tags):
    """Generator for stream (seed, *tags); same arguments, same stream."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_to_int(t) for t in tags]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

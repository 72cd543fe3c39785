"""Stable seed derivation: every random stream hangs off one root seed."""

from __future__ import annotations

import hashlib


def derive_seed(root: int, *labels) -> int:
    """64-bit seed from a root seed and any hashable labels.

    Uses blake2b over the repr of the inputs, so results are stable across
    platforms, processes and thread counts.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(repr(int(root)).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(repr(label).encode())
    return int.from_bytes(h.digest(), "big")

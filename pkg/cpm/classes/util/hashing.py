#!/usr/bin/env python3
"""Portable 64-bit hashes and seed streams.

FNV-1a (64-bit)
    h = 0xcbf29ce484222325
    for each byte b of the UTF-8 input: h = ((h ^ b) * 0x100000001b3) mod 2**64

SplitMix64
    state += 0x9e3779b97f4a7c15
    z = state
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
    z = (z ^ (z >> 27)) * 0x94d049bb133111eb
    return z ^ (z >> 31)
(all arithmetic mod 2**64)
"""
from functools import lru_cache

FNV_OFFSET = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
GOLDEN_GAMMA = 0x9e3779b97f4a7c15
MASK_64 = 0xffffffffffffffff


@lru_cache(maxsize=1 << 16)
def fnv1a_64(s: str) -> int:
    h = FNV_OFFSET
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * FNV_PRIME) & MASK_64
    return h


def splitmix64_mix(z: int) -> int:
    z &= MASK_64
    z = ((z ^ (z >> 30)) * 0xbf58476d1ce4e5b9) & MASK_64
    z = ((z ^ (z >> 27)) * 0x94d049bb133111eb) & MASK_64
    return z ^ (z >> 31)


def splitmix64_stream(seed: int, index: int) -> int:
    """The index-th output (0-based) of a SplitMix64 generator seeded with seed."""
    return splitmix64_mix(seed + (index + 1) * GOLDEN_GAMMA)

"""Deterministic derivation of per-trial seeds from a master seed.

derive_seed mixes (master_seed, index) through the SplitMix64 finalizer, so
independent trials get decorrelated generator streams without coordination.
The constants below are part of the on-disk/CSV reproducibility contract and
must not change.
"""

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def derive_seed(master_seed, index):
    """64-bit seed for trial `index` under `master_seed`."""
    if index < 0:
        raise ValueError("trial index must be >= 0")
    z = (int(master_seed) + (index + 1) * GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return (z ^ (z >> 31)) & MASK64

"""
Counter-based random streams.

Every random draw in the package comes from numpy's Philox4x64 generator.
The 128-bit key holds the 64-bit user seed in its low word and a domain tag
in its high word; a stream index (one per simulated interval, one per sweep
realization) is placed in the most significant word of the 256-bit counter.
Substreams are therefore disjoint and can be produced in any order, so a
parallel run reproduces a serial one draw for draw.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1

# Domain tags
GEOMETRY = 1
STATIC = 2
FSMC_CHAIN = 3
ONLINE = 5
PROPERTY = 6


def generator(seed, domain, stream=0) -> np.random.Generator:
    key = (int(seed) & SEED_MASK) | (int(domain) << 64)
    counter = int(stream) << 192
    return np.random.Generator(np.random.Philox(key=key, counter=counter))

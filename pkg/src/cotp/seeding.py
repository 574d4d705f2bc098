"""Counter-based seed derivation.

Per-trial seeds are the outputs of a SplitMix64 generator started at the
master seed: seed ``i`` is the ``(i+1)``-th output.  Constants are the
standard SplitMix64 ones (increment ``0x9E3779B97F4A7C15``, multipliers
``0xBF58476D1CE4E5B9`` and ``0x94D049BB133111EB``, shifts 30/27/31).  Each
derived seed only depends on ``(master, i)``, so trials can run in any order.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    z = state & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, counter: int) -> int:
    return splitmix64((int(master) + (int(counter) + 1) * GOLDEN) & MASK64)


def trial_seeds(master: int, count: int) -> list[int]:
    return [derive_seed(master, i) for i in range(count)]

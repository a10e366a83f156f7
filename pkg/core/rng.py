import numpy as np

_SEED_MASK = (1 << 64) - 1


class RandomSource:
    """
    Deterministic pseudo-random stream.
    The draw sequence is a pure function of the seed (PCG64 bit generator).
    Single owner: do not draw from one source on several threads.
    """

    def __init__(self, seed):
        self.seed = int(seed) & _SEED_MASK
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, size=None):
        # [0, 1)
        return self._gen.random(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def beta(self, a, b, size=None):
        return self._gen.beta(a, b, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def permutation(self, n):
        return self._gen.permutation(n)

    def choice(self, values, size=None, replace=True):
        return self._gen.choice(values, size=size, replace=replace)

    def get_state(self):
        return self._gen.bit_generator.state

    def set_state(self, state):
        self._gen.bit_generator.state = state

    def child_seed(self):
        """A fresh 63-bit seed drawn from this stream (for torch generators etc.)."""
        return int(self._gen.integers(0, 2**63 - 1))


def seeded_rng(seed):
    return RandomSource(seed)

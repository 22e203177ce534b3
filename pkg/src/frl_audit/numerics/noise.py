import numpy as np


class NoiseTape:
    """Source of random draws and detached constants for one loss evaluation.

    Unfrozen, every request is computed fresh. After :meth:`freeze` the first
    evaluation records every value in call order and later evaluations replay
    them, which turns a stochastic loss into a deterministic function of the
    parameters for finite-difference checks.
    """

    def __init__(self, rng=None):
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.frozen = False
        self._record = []
        self._cursor = 0

    def freeze(self):
        self.frozen = True
        self._record = []
        self._cursor = 0
        return self

    def rewind(self):
        self._cursor = 0

    def remember(self, make):
        if not self.frozen:
            return make()
        if self._cursor < len(self._record):
            value = self._record[self._cursor]
        else:
            value = make()
            self._record.append(value)
        self._cursor += 1
        return value

    def normal(self, shape):
        return self.remember(lambda: self.rng.standard_normal(shape))

    def uniform(self, shape):
        return self.remember(lambda: self.rng.random(shape))

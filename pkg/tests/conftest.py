import numpy as np
import pytest


class FixedRng:
    """Stand-in generator that replays injected uniform draws."""

    def __init__(self, draws):
        self._draws = list(draws)

    def random(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        out, self._draws = self._draws[:n], self._draws[n:]
        if len(out) < n:
            raise AssertionError("ran out of injected draws")
        return out[0] if size is None else np.array(out, dtype=float).reshape(size)


@pytest.fixture
def fixed_rng():
    return FixedRng


def random_hurwitz(rng, count):
    out = []
    while len(out) < count:
        A = rng.uniform(-5, 5, size=(2, 2))
        if np.trace(A) < 0 and np.linalg.det(A) > 0:
            out.append(A)
    return out

import itertools
from pathlib import Path

import numpy as np
import pytest

from annealprep import IsingModel, SpinAssignment

FIXTURES = Path(__file__).parent / "fixtures"


def random_ising(rng, n, j_scale=10.0, h_scale=5.0, density=1.0, integer=False):
    """Seeded random Ising model on variables 1..n."""
    h = {}
    J = {}
    for i in range(1, n + 1):
        v = rng.uniform(-h_scale, h_scale)
        h[i] = round(v) if integer else v
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() < density:
                v = rng.uniform(-j_scale, j_scale)
                J[(i, j)] = round(v) if integer else v
    return IsingModel(h, J)


def brute_ground_states(model):
    """Independent ground-state oracle: scalar energy over all assignments."""
    ids = model.variables
    best = None
    states = []
    for spins in itertools.product((-1, 1), repeat=len(ids)):
        st = SpinAssignment(dict(zip(ids, spins)))
        e = model.energy(st)
        if best is None or e < best:
            best = e
            states = [st]
        elif e == best:
            states.append(st)
    return states, best


def assignment_set(states):
    return {s.as_tuple() for s in states}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

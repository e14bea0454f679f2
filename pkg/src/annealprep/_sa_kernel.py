"""Jitted inner loop of the simulated-annealing sampler."""

import numpy as np
from numba import njit


@njit(cache=True)
def metropolis_run(state, h, indptr, indices, values, betas, uniforms):
    """Run len(betas) sweeps of sequential single-spin-flip Metropolis in place.

    ``state`` holds +/-1 spins; the adjacency is CSR over both directions of
    every coupling; ``uniforms[s, v]`` is the acceptance draw for variable v
    in sweep s.
    """
    n = state.shape[0]
    for s in range(betas.shape[0]):
        beta = betas[s]
        for v in range(n):
            local = h[v]
            for p in range(indptr[v], indptr[v + 1]):
                local += values[p] * state[indices[p]]
            delta = -2.0 * state[v] * local
            if delta <= 0.0 or uniforms[s, v] < np.exp(-beta * delta):
                state[v] = -state[v]

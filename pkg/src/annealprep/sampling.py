"""Samplers standing in for the quantum annealer.

Three interchangeable sources of samples: a seeded simulated-annealing
sampler, an exact enumeration sampler (zero-temperature or Boltzmann), and a
wrapper that models limited hardware precision by rescaling the Hamiltonian
and perturbing every programmed coefficient with a fresh noise draw per read.

Every sampler is deterministic given its seed: read r derives its RNG stream
from (seed, r), so reads may be computed in any order or in parallel without
changing the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from ._sa_kernel import metropolis_run
from .model import (
    ENUMERATION_CAP,
    AcceptRanges,
    IsingModel,
    SpinAssignment,
    _enumerate_spins,
    enumerate_energies,
    ground_states,
    rescale,
)

# A sampler used inside the noise wrapper: (model, read_index) -> samples.
InnerSampler = Callable[[IsingModel, int], "SampleSet"]


@dataclass(frozen=True)
class SampleRecord:
    assignment: SpinAssignment
    energy: float
    occurrences: int = 1
    chain_broken: bool = False

    def __post_init__(self):
        if self.occurrences < 1:
            raise ValueError(f"occurrences must be >= 1, got {self.occurrences}")


@dataclass(frozen=True)
class SampleSet:
    """Samples with energies, occurrence counts and chain-break flags.

    Record energies are always evaluated by the module that produced the set,
    against the model it declares (samplers: their input model; unembedding:
    the logical model; projection: the original model).
    """

    records: tuple[SampleRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def total_occurrences(self) -> int:
        return sum(r.occurrences for r in self.records)

    @property
    def variables(self) -> tuple[int, ...]:
        if not self.records:
            return ()
        ids = self.records[0].assignment.as_tuple()
        return tuple(i for i, _ in ids)

    def lowest(self) -> SampleRecord:
        if not self.records:
            raise ValueError("empty sample set")
        return min(self.records, key=lambda r: r.energy)


def concat_samples(sets: Iterable[SampleSet]) -> SampleSet:
    records: list[SampleRecord] = []
    for s in sets:
        records.extend(s.records)
    return SampleSet(tuple(records))


@dataclass(frozen=True)
class SaParams:
    """Simulated-annealing schedule: geometric inverse-temperature ramp."""

    num_reads: int = 100
    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.num_reads < 1:
            raise ValueError("num_reads must be >= 1")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if not (0 < self.beta_start <= self.beta_end):
            raise ValueError("need 0 < beta_start <= beta_end")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class NoiseModel:
    """Per-coefficient control error relative to the accepted range bounds.

    The draw scale for a family (fields or couplings) is
    ``relative_sigma * max(|range lo|, range hi)``: a gaussian standard
    deviation, or the half-width of a centred uniform draw.
    """

    relative_sigma_h: float = 0.03
    relative_sigma_j: float = 0.03
    distribution: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.relative_sigma_h < 0 or self.relative_sigma_j < 0:
            raise ValueError("noise magnitudes must be >= 0")
        if self.distribution not in ("gaussian", "uniform"):
            raise ValueError(f"distribution must be gaussian or uniform, got {self.distribution!r}")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


def _model_arrays(model: IsingModel):
    """Flatten a model to (ids, h vector, CSR adjacency) for the kernel."""
    ids = list(model.variables)
    pos = {v: t for t, v in enumerate(ids)}
    n = len(ids)
    h = np.zeros(n, dtype=np.float64)
    for i, v in model.h.items():
        h[pos[i]] = v
    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), v in model.J.items():
        neighbors[pos[i]].append((pos[j], v))
        neighbors[pos[j]].append((pos[i], v))
    indptr = np.zeros(n + 1, dtype=np.int64)
    for t in range(n):
        indptr[t + 1] = indptr[t] + len(neighbors[t])
    indices = np.zeros(indptr[-1], dtype=np.int64)
    values = np.zeros(indptr[-1], dtype=np.float64)
    for t in range(n):
        for q, (u, v) in enumerate(neighbors[t]):
            indices[indptr[t] + q] = u
            values[indptr[t] + q] = v
    return ids, h, indptr, indices, values


def _sa_read(model, arrays, betas, params: SaParams, read_index: int) -> SampleRecord:
    ids, h, indptr, indices, values = arrays
    rng = np.random.default_rng([params.seed, read_index])
    state = 2 * rng.integers(0, 2, size=len(ids), dtype=np.int64) - 1
    uniforms = rng.random((len(betas), len(ids)))
    metropolis_run(state, h, indptr, indices, values, betas, uniforms)
    assignment = SpinAssignment({ids[t]: int(state[t]) for t in range(len(ids))})
    return SampleRecord(assignment, model.energy(assignment))


def sa_sample(model: IsingModel, params: SaParams) -> SampleSet:
    """num_reads independent Metropolis anneals over a geometric beta schedule.

    Deterministic given the seed; read r uses the stream (seed, r).
    """
    if model.num_variables == 0:
        raise ValueError("cannot sample an empty model")
    arrays = _model_arrays(model)
    betas = np.geomspace(params.beta_start, params.beta_end, params.sweeps)
    records = [
        _sa_read(model, arrays, betas, params, r) for r in range(params.num_reads)
    ]
    return SampleSet(tuple(records))


def sa_inner(params: SaParams) -> InnerSampler:
    """One-read-per-call adapter for :func:`noisy_sample`.

    Call r uses the stream (params.seed, r), so pooling the calls over a fixed
    model reproduces ``sa_sample`` with ``num_reads`` reads record-for-record.
    """

    def run(model: IsingModel, read_index: int) -> SampleSet:
        arrays = _model_arrays(model)
        betas = np.geomspace(params.beta_start, params.beta_end, params.sweeps)
        return SampleSet((_sa_read(model, arrays, betas, params, read_index),))

    return run


def exact_sample(
    model: IsingModel,
    temperature: float = 0.0,
    num_reads: int | None = None,
    seed: int | Sequence[int] = 0,
) -> SampleSet:
    """Exact sampler for small models (enumeration cap applies).

    * temperature 0: one record per exact ground state (uniform support);
    * temperature inf: one record per state;
    * finite temperature > 0: ``num_reads`` draws from the Boltzmann
      distribution, seeded, returned as occurrence counts.
    """
    if model.num_variables > ENUMERATION_CAP:
        raise ValueError(
            f"model has {model.num_variables} variables, exceeding the cap {ENUMERATION_CAP}"
        )
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0.0:
        states, _ = ground_states(model)
        return SampleSet(tuple(SampleRecord(st, model.energy(st)) for st in states))
    ids, energies = enumerate_energies(model)
    n = len(ids)
    spins = _enumerate_spins(n)

    def state_at(row: int) -> SpinAssignment:
        return SpinAssignment({ids[t]: int(spins[row, t]) for t in range(n)})

    if math.isinf(temperature):
        return SampleSet(
            tuple(SampleRecord(state_at(r), model.energy(state_at(r))) for r in range(1 << n))
        )
    if num_reads is None:
        raise ValueError("finite temperature requires num_reads")
    weights = np.exp(-(energies - energies.min()) / temperature)
    probs = weights / weights.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(num_reads, probs)
    records = [
        SampleRecord(state_at(r), model.energy(state_at(r)), occurrences=int(c))
        for r, c in enumerate(counts)
        if c > 0
    ]
    return SampleSet(tuple(records))


def exact_inner(temperature: float = 0.0, seed: int = 0) -> InnerSampler:
    """Exact-sampler adapter for :func:`noisy_sample` (one draw per read at
    finite temperature, the full ground-state set at temperature 0)."""

    def run(model: IsingModel, read_index: int) -> SampleSet:
        if temperature == 0.0 or math.isinf(temperature):
            return exact_sample(model, temperature)
        return exact_sample(model, temperature, num_reads=1, seed=[seed, read_index])

    return run


def noisy_sample(
    model: IsingModel,
    ranges: AcceptRanges,
    noise: NoiseModel,
    inner: InnerSampler,
    num_reads: int,
) -> SampleSet:
    """Sample the rescaled model through a simulated hardware-precision error.

    Builds H'' = rescale(H) + dH with one fresh draw of dH per read (each
    anneal sees its own control error), runs the inner sampler on H'', then
    re-evaluates all energies against the noiseless rescaled model.  Noise is
    applied only to programmed (nonzero) coefficients.
    """
    if num_reads < 1:
        raise ValueError("num_reads must be >= 1")
    base = rescale(model, ranges)
    scale_h = noise.relative_sigma_h * max(abs(ranges.h_min), ranges.h_max)
    scale_j = noise.relative_sigma_j * max(abs(ranges.j_min), ranges.j_max)
    h_keys = sorted(base.h)
    j_keys = sorted(base.J)
    records: list[SampleRecord] = []
    for r in range(num_reads):
        rng = np.random.default_rng([noise.seed, r])
        if noise.distribution == "gaussian":
            dh = rng.normal(0.0, scale_h, len(h_keys)) if scale_h > 0 else np.zeros(len(h_keys))
            dj = rng.normal(0.0, scale_j, len(j_keys)) if scale_j > 0 else np.zeros(len(j_keys))
        else:
            dh = rng.uniform(-scale_h, scale_h, len(h_keys))
            dj = rng.uniform(-scale_j, scale_j, len(j_keys))
        noisy = IsingModel(
            {k: base.h[k] + dh[t] for t, k in enumerate(h_keys)},
            {k: base.J[k] + dj[t] for t, k in enumerate(j_keys)},
            base.offset,
        )
        for rec in inner(noisy, r).records:
            records.append(
                SampleRecord(
                    rec.assignment,
                    base.energy(rec.assignment),
                    rec.occurrences,
                    rec.chain_broken,
                )
            )
    return SampleSet(tuple(records))


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

def _spin_string(assignment: SpinAssignment, ids: Sequence[int]) -> str:
    return "".join("+1" if assignment.spin(i) > 0 else "-1" for i in ids)


def write_samples_csv(samples: SampleSet) -> str:
    """Columns: assignment (+1/-1 string in variable-id order), energy,
    occurrences, chain_broken; the id order is recorded in a comment line."""
    ids = samples.variables
    lines = ["# variables: " + " ".join(str(i) for i in ids)]
    lines.append("assignment,energy,occurrences,chain_broken")
    for rec in samples.records:
        if rec.assignment.as_tuple() and tuple(i for i, _ in rec.assignment.as_tuple()) != ids:
            raise ValueError("all records must share one variable set")
        lines.append(
            f"{_spin_string(rec.assignment, ids)},{rec.energy!r},"
            f"{rec.occurrences},{int(rec.chain_broken)}"
        )
    return "\n".join(lines) + "\n"


def parse_samples_csv(text: str) -> SampleSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# variables:"):
        raise ValueError("samples CSV must start with a '# variables:' line")
    ids = [int(tok) for tok in lines[0].split(":", 1)[1].split()]
    if lines[1] != "assignment,energy,occurrences,chain_broken":
        raise ValueError("unexpected samples CSV header")
    records = []
    for ln in lines[2:]:
        spin_str, energy, occ, broken = ln.split(",")
        if len(spin_str) != 2 * len(ids):
            raise ValueError(f"assignment string {spin_str!r} does not match {len(ids)} variables")
        spins = {}
        for t, i in enumerate(ids):
            tok = spin_str[2 * t : 2 * t + 2]
            if tok not in ("+1", "-1"):
                raise ValueError(f"bad spin token {tok!r}")
            spins[i] = 1 if tok == "+1" else -1
        records.append(
            SampleRecord(
                SpinAssignment(spins),
                float(energy),
                int(occ),
                bool(int(broken)),
            )
        )
    return SampleSet(tuple(records))

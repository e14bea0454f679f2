"""Coefficient-reduction transforms for Ising/QUBO models.

Three mechanisms, each attacking a different source of large coefficients:

* interaction extension -- splits a coupling above a bound M into a fan of
  couplings of magnitude |J|/k through k-1 auxiliary spins, preserving the
  ground states of the original variables;
* bounded integer encoding -- represents an integer interval with binary
  variables whose weights never exceed a cap mu;
* perturbed penalty / multiplier updates -- rewrites a penalty
  ``lam * g**2`` as ``lam * (g - eps)**2 - lam * eps**2`` with
  ``eps = -u / (2 lam)``, raising effective penalties without raising lam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .model import (
    IsingModel,
    QuboModel,
    SpinAssignment,
    _enumerate_spins,
    normalize_pair,
)
from .sampling import SampleRecord, SampleSet


@dataclass(frozen=True)
class ReductionResult:
    """A reduced model plus the provenance of every auxiliary variable."""

    model: IsingModel
    aux_registry: Mapping[int, dict]

    def __post_init__(self):
        originals = set(self.model.variables) - set(self.aux_registry)
        for a in self.aux_registry:
            if a in originals:
                raise ValueError(f"auxiliary id {a} collides with an original variable")

    @property
    def original_variables(self) -> tuple[int, ...]:
        return tuple(v for v in self.model.variables if v not in self.aux_registry)


def next_free_id(model: IsingModel) -> int:
    """First id of the auxiliary namespace: past every existing variable."""
    ids = model.variables
    return ids[-1] + 1 if ids else 0


def reduction_to_json_dict(result: ReductionResult) -> dict:
    """Ising JSON of the reduced model plus an ``aux`` provenance section."""
    from .model import ising_to_json_dict

    obj = ising_to_json_dict(result.model)
    obj["aux"] = {str(a): prov for a, prov in sorted(result.aux_registry.items())}
    return obj


def reduction_from_json_dict(obj: Mapping) -> ReductionResult:
    from .model import ising_from_json_dict

    registry = {int(a): dict(prov) for a, prov in obj.get("aux", {}).items()}
    return ReductionResult(ising_from_json_dict(obj), registry)


def iem_reduce(model: IsingModel, bound: float) -> ReductionResult:
    """Bound every |coupling| by ``bound`` via interaction extension.

    Each coupling J_ij with |J_ij| > bound is split into k = ceil(|J_ij|/bound)
    couplings of weight w = J_ij/k: the direct edge keeps w, and each of the
    k-1 auxiliary spins a couples as ``+w s_i s_a - w s_j s_a`` (for J_ij > 0)
    or ``+w s_i s_a + w s_j s_a`` (for J_ij < 0).  Either gadget leaves the
    energy gap between aligned and anti-aligned (i, j) at 2|J_ij|, so ground
    states projected to the original variables are unchanged.  External fields
    are untouched.  Single-pass use only: reducing an already-reduced model
    would stack gadgets on gadget edges.
    """
    if bound <= 0:
        raise ValueError(f"bound must be positive, got {bound}")
    new_J: dict[tuple[int, int], float] = {}
    registry: dict[int, dict] = {}
    next_id = next_free_id(model)
    for (i, j), v in sorted(model.J.items()):
        if abs(v) <= bound:
            new_J[(i, j)] = v
            continue
        k = max(2, math.ceil(abs(v) / bound))
        w = v / k
        new_J[(i, j)] = w
        for leg in range(k - 1):
            a = next_id
            next_id += 1
            registry[a] = {"kind": "coupling", "edge": [i, j], "leg": leg}
            new_J[normalize_pair(i, a)] = w
            new_J[normalize_pair(j, a)] = -w if v > 0 else w
    return ReductionResult(IsingModel(model.h, new_J, model.offset), registry)


def project_samples(
    samples: SampleSet, original: IsingModel, aux_registry: Mapping[int, dict]
) -> SampleSet:
    """Drop auxiliary variables, re-evaluate energies against ``original`` and
    merge duplicate records (same assignment and chain flag), summing counts.

    Every sampled variable must be either an original variable or a
    registered auxiliary; anything else indicates a model mixup.
    """
    keep = list(original.variables)
    known = set(keep) | set(aux_registry)
    merged: dict[tuple, list] = {}
    order: list[tuple] = []
    for rec in samples.records:
        unknown = set(rec.assignment.spins) - known
        if unknown:
            raise ValueError(
                f"sample contains variables {sorted(unknown)} that are neither "
                "original nor registered auxiliaries"
            )
        proj = rec.assignment.restrict(keep)
        key = (proj.as_tuple(), rec.chain_broken)
        if key in merged:
            merged[key][1] += rec.occurrences
        else:
            merged[key] = [proj, rec.occurrences, rec.chain_broken]
            order.append(key)
    records = [
        SampleRecord(
            assignment=merged[k][0],
            energy=original.energy(merged[k][0]),
            occurrences=merged[k][1],
            chain_broken=merged[k][2],
        )
        for k in order
    ]
    return SampleSet(tuple(records))


def projected_ground_states(
    model: IsingModel, keep: Iterable[int], max_enumerated: int = 20
) -> tuple[list[SpinAssignment], float]:
    """Exact ground states of ``model`` projected onto the ``keep`` variables.

    Enumerates only the ``keep`` variables; every other variable must couple
    exclusively to ``keep`` variables (no couplings among them), so its
    optimal value given the enumerated spins is independent and contributes
    ``-|local field|``.  The auxiliary spins of :func:`iem_reduce` satisfy
    this, which makes reduced models with hundreds of auxiliaries checkable
    against the brute-force oracle on the original.
    """
    keep = sorted(set(keep))
    keep_set = set(keep)
    rest = [v for v in model.variables if v not in keep_set]
    rest_set = set(rest)
    if len(keep) > max_enumerated:
        raise ValueError(f"cannot enumerate {len(keep)} variables (cap {max_enumerated})")
    for (i, j) in model.J:
        if i in rest_set and j in rest_set:
            raise ValueError(
                f"variables {i} and {j} are coupled but both outside the projection"
            )
    n = len(keep)
    pos = {v: t for t, v in enumerate(keep)}
    spins = _enumerate_spins(n)
    e = np.full(1 << n, model.offset, dtype=np.float64)
    for i, v in model.h.items():
        if i in pos:
            e += v * spins[:, pos[i]]
    for (i, j), v in model.J.items():
        if i in pos and j in pos:
            e += v * (spins[:, pos[i]] * spins[:, pos[j]])
    # Independent minimization of each non-enumerated variable.
    for a in rest:
        local = np.full(1 << n, model.h.get(a, 0.0), dtype=np.float64)
        for (i, j), v in model.J.items():
            if i == a and j in pos:
                local += v * spins[:, pos[j]]
            elif j == a and i in pos:
                local += v * spins[:, pos[i]]
        e -= np.abs(local)
    emin = float(e.min())
    states = [
        SpinAssignment({keep[t]: int(spins[r, t]) for t in range(n)})
        for r in np.flatnonzero(e == emin)
    ]
    return states, emin


# ---------------------------------------------------------------------------
# Bounded-coefficient integer encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegerEncoding:
    """Binary encoding of an integer interval [lower, upper] with coefficients
    capped at a bound: value = lower + sum_i coefficients[i] * y_i."""

    lower: int
    upper: int
    coefficients: tuple[int, ...]
    variable_ids: tuple[int, ...]

    def __post_init__(self):
        if len(self.coefficients) != len(self.variable_ids):
            raise ValueError("coefficients and variable_ids must have equal length")
        if sum(self.coefficients) != self.upper - self.lower:
            raise ValueError("coefficients must sum to upper - lower")

    def __len__(self) -> int:
        return len(self.coefficients)

    def decode_bits(self, bits: Mapping[int, int]) -> int:
        """Value of the encoded integer for a bit assignment keyed by variable id."""
        return self.lower + sum(
            a * bits[v] for a, v in zip(self.coefficients, self.variable_ids)
        )

    def bits_for(self, value: int) -> dict[int, int]:
        """A bit assignment realizing ``value``; greedy descending suffices
        because every coefficient is at most 1 + the sum of the smaller ones."""
        if not self.lower <= value <= self.upper:
            raise ValueError(f"value {value} outside [{self.lower}, {self.upper}]")
        remaining = value - self.lower
        bits = {v: 0 for v in self.variable_ids}
        for a, v in sorted(zip(self.coefficients, self.variable_ids), reverse=True):
            if remaining >= a:
                bits[v] = 1
                remaining -= a
        assert remaining == 0
        return bits


def bce_encode(lower: int, upper: int, mu: int, first_id: int = 0) -> IntegerEncoding:
    """Encode the interval [lower, upper] with coefficients bounded by ``mu``.

    With D = upper - lower: m = floor(D/mu), r = mu + (D - mu*m),
    k = floor(log2 r); the coefficients are 2^i for i < k, then r + 1 - 2^k,
    then m - 1 copies of mu.  All lie in (0, mu], they sum to D, and every
    integer in [lower, upper] is reachable.  mu = D recovers the usual binary
    encoding.
    """
    if upper <= lower:
        raise ValueError(f"need upper > lower, got [{lower}, {upper}]")
    D = upper - lower
    if not 1 <= mu <= D:
        raise ValueError(f"coefficient bound must be in [1, {D}], got {mu}")
    m = D // mu
    r = mu + (D - mu * m)
    k = r.bit_length() - 1
    coeffs = [1 << i for i in range(k)]
    coeffs.append(r + 1 - (1 << k))
    coeffs.extend([mu] * (m - 1))
    ids = tuple(range(first_id, first_id + len(coeffs)))
    return IntegerEncoding(lower, upper, tuple(coeffs), ids)


def bce_decode(enc: IntegerEncoding, bits: Iterable[int]) -> int:
    """Value of the encoding for an ordered 0/1 bit sequence."""
    bits = list(bits)
    if len(bits) != len(enc.coefficients):
        raise ValueError(
            f"expected {len(enc.coefficients)} bits, got {len(bits)}"
        )
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {b!r}")
    return enc.lower + sum(a * b for a, b in zip(enc.coefficients, bits))


# ---------------------------------------------------------------------------
# Perturbed penalties and multiplier updates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearConstraint:
    """Equality constraint g(v) = sum_i terms[i] * v_i - constant = 0 over
    binary or spin variables."""

    terms: Mapping[int, float]
    constant: float = 0.0
    domain: str = "binary"

    def __post_init__(self):
        if not self.terms:
            raise ValueError("constraint needs at least one term")
        if self.domain not in ("binary", "spin"):
            raise ValueError(f"domain must be 'binary' or 'spin', got {self.domain!r}")
        object.__setattr__(self, "terms", {int(i): float(b) for i, b in self.terms.items()})
        object.__setattr__(self, "constant", float(self.constant))

    def residual(self, values: Mapping[int, int]) -> float:
        """g evaluated on an assignment in the constraint's own domain."""
        return sum(b * values[i] for i, b in self.terms.items()) - self.constant

    def to_binary(self) -> "LinearConstraint":
        """Equivalent constraint over bits via s = 2x - 1."""
        if self.domain == "binary":
            return self
        terms = {i: 2.0 * b for i, b in self.terms.items()}
        constant = self.constant + sum(self.terms.values())
        return LinearConstraint(terms, constant, "binary")


def perturbed_penalty(g: LinearConstraint, lam: float, eps: float) -> QuboModel:
    """QUBO expansion of ``lam*(g - eps)**2 - lam*eps**2 = lam*g**2 - 2*lam*eps*g``.

    eps = 0 gives the plain penalty lam*g**2.  For integer-valued g with a
    satisfiable constraint, any |eps| < 0.5 leaves the minimizer set equal to
    {g = 0}; the shifted target merely re-weights infeasible assignments
    (e.g. a one-hot violation at g = -1 costs 1 + 2*eps instead of 1).
    """
    if lam <= 0:
        raise ValueError(f"penalty coefficient must be positive, got {lam}")
    g = g.to_binary()
    c = g.constant
    Q: dict[tuple[int, int], float] = {}
    items = sorted(g.terms.items())
    for idx, (i, bi) in enumerate(items):
        Q[(i, i)] = Q.get((i, i), 0.0) + lam * (bi * bi - 2.0 * (c + eps) * bi)
        for (j, bj) in items[idx + 1:]:
            key = (i, j) if i < j else (j, i)
            Q[key] = Q.get(key, 0.0) + 2.0 * lam * bi * bj
    offset = lam * (c * c + 2.0 * c * eps)
    return QuboModel(Q, offset)


@dataclass(frozen=True)
class AlmState:
    """Multiplier-method state: multiplier u, penalty lam > 0, growth alpha > 1."""

    multiplier: float
    penalty: float
    growth: float

    def __post_init__(self):
        if self.penalty <= 0:
            raise ValueError(f"penalty must be positive, got {self.penalty}")
        if self.growth <= 1:
            raise ValueError(f"growth factor must exceed 1, got {self.growth}")

    @property
    def epsilon(self) -> float:
        """Equivalent perturbation width: eps = -u / (2 lam)."""
        return -self.multiplier / (2.0 * self.penalty)


def alm_update(state: AlmState, g_value: float) -> AlmState:
    """One multiplier-method step: u += 2*lam*g (with the current lam), then
    lam *= alpha."""
    u = state.multiplier + 2.0 * state.penalty * g_value
    return AlmState(u, state.penalty * state.growth, state.growth)

"""Sparse Ising/QUBO models: energy evaluation, conversion, scaling and exact solving.

An Ising model is ``sum_ij J_ij s_i s_j + sum_i h_i s_i + offset`` over spins
``s_i in {-1, +1}``; a QUBO is ``sum_{i<=j} Q_ij x_i x_j + offset`` over bits
``x_i in {0, 1}``, with diagonal entries acting as linear terms.  Both are kept
sparse as plain dicts and are immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

# Coefficients below this magnitude are dropped at construction so that
# dynamic-range figures are not polluted by floating-point dust.
COEFF_EPS = 1e-12

# Default variable cap for exhaustive enumeration (2^20 states).
ENUMERATION_CAP = 20


def normalize_pair(i: int, j: int) -> tuple[int, int]:
    """Order an index pair; self-pairs are rejected."""
    if i == j:
        raise ValueError(f"self-coupling ({i}, {j}) is not allowed")
    return (i, j) if i < j else (j, i)


def _clean_linear(h: Mapping[int, float]) -> dict[int, float]:
    return {int(i): float(v) for i, v in h.items() if abs(v) > COEFF_EPS}


def _clean_quadratic(J: Mapping[tuple[int, int], float]) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    for (i, j), v in J.items():
        key = normalize_pair(int(i), int(j))
        out[key] = out.get(key, 0.0) + float(v)
    return {k: v for k, v in out.items() if abs(v) > COEFF_EPS}


@dataclass(frozen=True)
class SpinAssignment:
    """A full assignment of spins, each exactly -1 or +1."""

    spins: Mapping[int, int]

    def __post_init__(self):
        clean = {}
        for i, s in self.spins.items():
            if s not in (-1, 1):
                raise ValueError(f"spin for variable {i} must be -1 or +1, got {s!r}")
            clean[int(i)] = int(s)
        object.__setattr__(self, "spins", clean)

    def spin(self, i: int) -> int:
        return self.spins[i]

    def as_tuple(self) -> tuple[tuple[int, int], ...]:
        """Canonical hashable form, sorted by variable id."""
        return tuple(sorted(self.spins.items()))

    def restrict(self, ids: Iterable[int]) -> "SpinAssignment":
        return SpinAssignment({i: self.spins[i] for i in ids})

    def to_bits(self) -> dict[int, int]:
        """Map spins to bits via x = (s + 1) / 2."""
        return {i: (s + 1) // 2 for i, s in self.spins.items()}

    @staticmethod
    def from_bits(bits: Mapping[int, int]) -> "SpinAssignment":
        return SpinAssignment({i: 2 * int(b) - 1 for i, b in bits.items()})

    def __eq__(self, other):
        if not isinstance(other, SpinAssignment):
            return NotImplemented
        return self.spins == other.spins

    def __hash__(self):
        return hash(self.as_tuple())


@dataclass(frozen=True)
class IsingModel:
    """Sparse Ising Hamiltonian with external fields ``h``, couplings ``J`` and
    a constant ``offset``.

    Coupling keys are normalized to ``i < j`` (duplicates are summed) and
    entries of magnitude below ``COEFF_EPS`` are dropped.
    """

    h: Mapping[int, float] = field(default_factory=dict)
    J: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "h", _clean_linear(self.h))
        object.__setattr__(self, "J", _clean_quadratic(self.J))
        object.__setattr__(self, "offset", float(self.offset))

    @cached_property
    def variables(self) -> tuple[int, ...]:
        ids = set(self.h)
        for i, j in self.J:
            ids.add(i)
            ids.add(j)
        return tuple(sorted(ids))

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def energy(self, assignment: SpinAssignment) -> float:
        spins = assignment.spins
        e = self.offset
        for i, hi in self.h.items():
            if i not in spins:
                raise ValueError(f"assignment is missing variable {i}")
            e += hi * spins[i]
        for (i, j), jij in self.J.items():
            if i not in spins:
                raise ValueError(f"assignment is missing variable {i}")
            if j not in spins:
                raise ValueError(f"assignment is missing variable {j}")
            e += jij * spins[i] * spins[j]
        return e


@dataclass(frozen=True)
class QuboModel:
    """Sparse upper-triangular QUBO matrix plus constant offset.

    Keys are normalized to ``i <= j``; diagonal entries are the linear terms.
    """

    Q: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        out: dict[tuple[int, int], float] = {}
        for (i, j), v in self.Q.items():
            key = (int(i), int(j)) if i <= j else (int(j), int(i))
            out[key] = out.get(key, 0.0) + float(v)
        out = {k: v for k, v in out.items() if abs(v) > COEFF_EPS}
        object.__setattr__(self, "Q", out)
        object.__setattr__(self, "offset", float(self.offset))

    @cached_property
    def variables(self) -> tuple[int, ...]:
        ids = set()
        for i, j in self.Q:
            ids.add(i)
            ids.add(j)
        return tuple(sorted(ids))

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def energy(self, bits: Mapping[int, int]) -> float:
        e = self.offset
        for (i, j), v in self.Q.items():
            if i not in bits:
                raise ValueError(f"assignment is missing variable {i}")
            if j not in bits:
                raise ValueError(f"assignment is missing variable {j}")
            e += v * bits[i] * (bits[j] if j != i else 1)
        return e

    def __add__(self, other: "QuboModel") -> "QuboModel":
        if not isinstance(other, QuboModel):
            return NotImplemented
        Q = dict(self.Q)
        for k, v in other.Q.items():
            Q[k] = Q.get(k, 0.0) + v
        return QuboModel(Q, self.offset + other.offset)


@dataclass(frozen=True)
class AcceptRanges:
    """Hardware-accepted coefficient ranges [h_min, h_max] and [j_min, j_max]."""

    h_min: float
    h_max: float
    j_min: float
    j_max: float

    def __post_init__(self):
        if not (self.h_min < 0 < self.h_max):
            raise ValueError("field range must satisfy h_min < 0 < h_max")
        if not (self.j_min < 0 < self.j_max):
            raise ValueError("coupling range must satisfy j_min < 0 < j_max")

    @classmethod
    def dwave_advantage(cls) -> "AcceptRanges":
        """Ranges of current D-Wave devices: h in [-4, 4], J in [-2, 1]."""
        return cls(-4.0, 4.0, -2.0, 1.0)


@dataclass(frozen=True)
class ScalingReport:
    """Scaling factors and dynamic-range figures for one model.

    ``s_H = max(s_h, s_j)`` is the divisor applied before hardware submission;
    the dynamic ranges are ``s_H / min |coefficient|`` over the nonzero
    entries of each family (0.0 when the family is empty).
    """

    s_h: float
    s_j: float
    s_H: float
    dynamic_range_h: float
    dynamic_range_j: float


def scaling_factors(model: IsingModel, ranges: AcceptRanges) -> ScalingReport:
    """How far the model's coefficients exceed the accepted ranges."""
    if model.h:
        hs = list(model.h.values())
        s_h = max(max(hs) / ranges.h_max, min(hs) / ranges.h_min)
    else:
        s_h = 0.0
    if model.J:
        js = list(model.J.values())
        s_j = max(max(js) / ranges.j_max, min(js) / ranges.j_min)
    else:
        s_j = 0.0
    s_H = max(s_h, s_j)
    dr_h = s_H / min(abs(v) for v in model.h.values()) if model.h else 0.0
    dr_j = s_H / min(abs(v) for v in model.J.values()) if model.J else 0.0
    return ScalingReport(s_h=s_h, s_j=s_j, s_H=s_H, dynamic_range_h=dr_h, dynamic_range_j=dr_j)


def rescale(model: IsingModel, ranges: AcceptRanges) -> IsingModel:
    """Divide the model by max(s_H, 1) so it fits the accepted ranges.

    Models already inside the ranges are returned unchanged (never magnified).
    The offset is divided as well, a convention: hardware behaviour for the
    constant term is unobservable.
    """
    s = scaling_factors(model, ranges).s_H
    if s <= 1.0:
        return model
    return IsingModel(
        {i: v / s for i, v in model.h.items()},
        {k: v / s for k, v in model.J.items()},
        model.offset / s,
    )


def _enumerate_spins(n: int) -> np.ndarray:
    """All 2^n spin states as an int8 matrix; column t is bit t of the row index."""
    states = np.arange(1 << n, dtype=np.int64)
    bits = (states[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def enumerate_energies(
    model: IsingModel, variables: Iterable[int] | None = None
) -> tuple[tuple[int, ...], np.ndarray]:
    """Vectorized energies of all states. Returns (variable order, energy array).

    ``variables`` may widen the enumerated set (e.g. to include decoupled
    variables); it must cover every variable of the model.
    """
    if variables is None:
        ids = model.variables
    else:
        ids = tuple(sorted(set(variables)))
        if not set(model.variables) <= set(ids):
            raise ValueError("explicit variable list must cover the model's variables")
    pos = {v: t for t, v in enumerate(ids)}
    n = len(ids)
    spins = _enumerate_spins(n)
    e = np.full(1 << n, model.offset, dtype=np.float64)
    for i, v in model.h.items():
        e += v * spins[:, pos[i]]
    for (i, j), v in model.J.items():
        e += v * (spins[:, pos[i]] * spins[:, pos[j]])
    return ids, e


def ground_states(
    model: IsingModel,
    max_variables: int = ENUMERATION_CAP,
    variables: Iterable[int] | None = None,
) -> tuple[list[SpinAssignment], float]:
    """Exact set of minimum-energy states by exhaustive enumeration.

    Refuses models with more than ``max_variables`` variables.  ``variables``
    may widen the enumerated set beyond the model's own (fully degenerate
    directions then multiply the returned states).
    """
    ids = model.variables if variables is None else tuple(sorted(set(variables)))
    n = len(ids)
    if n > max_variables:
        raise ValueError(
            f"model has {n} variables, exceeding the enumeration cap {max_variables}"
        )
    if n == 0:
        return [SpinAssignment({})], model.offset
    ids, e = enumerate_energies(model, ids)
    emin = float(e.min())
    spins = _enumerate_spins(n)
    states = [
        SpinAssignment({ids[t]: int(spins[r, t]) for t in range(n)})
        for r in np.flatnonzero(e == emin)
    ]
    return states, emin


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Substitute x_i = (s_i + 1)/2.  Energies agree pointwise under the bijection."""
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset = q.offset
    for (i, j), v in q.Q.items():
        if i == j:
            h[i] = h.get(i, 0.0) + v / 2.0
            offset += v / 2.0
        else:
            J[(i, j)] = J.get((i, j), 0.0) + v / 4.0
            h[i] = h.get(i, 0.0) + v / 4.0
            h[j] = h.get(j, 0.0) + v / 4.0
            offset += v / 4.0
    return IsingModel(h, J, offset)


def ising_to_qubo(m: IsingModel) -> QuboModel:
    """Substitute s_i = 2 x_i - 1, the inverse of :func:`qubo_to_ising`."""
    Q: dict[tuple[int, int], float] = {}
    offset = m.offset
    for i, v in m.h.items():
        Q[(i, i)] = Q.get((i, i), 0.0) + 2.0 * v
        offset -= v
    for (i, j), v in m.J.items():
        Q[(i, j)] = Q.get((i, j), 0.0) + 4.0 * v
        Q[(i, i)] = Q.get((i, i), 0.0) - 2.0 * v
        Q[(j, j)] = Q.get((j, j), 0.0) - 2.0 * v
        offset += v
    return QuboModel(Q, offset)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    """Malformed input file or text."""


def write_qubo_text(q: QuboModel) -> str:
    """Sparse QUBO text: header ``n nnz``, then ``i j w`` lines with 1-based
    indices, i <= j, i == j meaning a linear term.

    The format is positional: variable ids must already be 1-based integers.
    A nonzero offset is carried in a ``# offset`` comment so round trips are
    lossless.
    """
    ids = q.variables
    if ids and ids[0] < 1:
        raise ValueError("QUBO text format requires 1-based variable ids")
    n = ids[-1] if ids else 0
    entries = sorted(q.Q.items())
    lines = [f"{n} {len(entries)}"]
    if q.offset != 0.0:
        lines.append(f"# offset {q.offset!r}")
    for (i, j), v in entries:
        lines.append(f"{i} {j} {v!r}")
    return "\n".join(lines) + "\n"


def parse_qubo_text(text: str) -> QuboModel:
    offset = 0.0
    body: list[tuple[int, str]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "offset":
                offset = float(parts[1])
            continue
        body.append((ln, line))
    if not body:
        raise ParseError("empty QUBO file")
    ln, header = body[0]
    try:
        n, nnz = (int(tok) for tok in header.split())
    except ValueError:
        raise ParseError(f"line {ln}: expected header 'n nnz', got {header!r}") from None
    if len(body) - 1 != nnz:
        raise ParseError(f"header declares {nnz} entries but file has {len(body) - 1}")
    Q: dict[tuple[int, int], float] = {}
    for ln, line in body[1:]:
        toks = line.split()
        if len(toks) != 3:
            raise ParseError(f"line {ln}: expected 'i j w', got {line!r}")
        try:
            i, j, w = int(toks[0]), int(toks[1]), float(toks[2])
        except ValueError:
            raise ParseError(f"line {ln}: malformed entry {line!r}") from None
        if not (1 <= i <= j <= n):
            raise ParseError(f"line {ln}: indices must satisfy 1 <= i <= j <= n={n}")
        Q[(i, j)] = Q.get((i, j), 0.0) + w
    return QuboModel(Q, offset)


def ising_to_json_dict(m: IsingModel) -> dict:
    return {
        "h": {str(i): m.h[i] for i in sorted(m.h)},
        "J": [[i, j, v] for (i, j), v in sorted(m.J.items())],
        "offset": m.offset,
    }


def ising_from_json_dict(obj: Mapping) -> IsingModel:
    try:
        h = {int(k): float(v) for k, v in obj.get("h", {}).items()}
        J = {(int(i), int(j)): float(v) for i, j, v in obj.get("J", [])}
        offset = float(obj.get("offset", 0.0))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed Ising JSON: {exc}") from None
    return IsingModel(h, J, offset)


def write_ising_json(m: IsingModel) -> str:
    return json.dumps(ising_to_json_dict(m), indent=2) + "\n"


def parse_ising_json(text: str) -> IsingModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return ising_from_json_dict(obj)

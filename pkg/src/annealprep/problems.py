"""Benchmark problem generators, parsers and QUBO formulations.

Covers the evaluation workload: a three-spin problem with a tunable dynamic
range, a bounded-integer toy problem, gka-style random QUBO instances, the
multi-dimensional knapsack problem (slack integers + penalty) and the
quadratic assignment problem (two-way one-hot penalties, optionally
perturbed).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import IsingModel, ParseError, QuboModel, SpinAssignment
from .reduction import IntegerEncoding, LinearConstraint, bce_encode, perturbed_penalty


def trivial_ising(J: float, rescaled: bool = False) -> IsingModel:
    """Three-spin chain s1 s2 + (1/J) s2 s3, whose ground states are
    (+1,-1,+1) and (-1,+1,-1) for every J > 0.

    With ``rescaled`` the equivalent form J s1 s2 + s2 s3 is returned (same
    states, coefficients multiplied by J).
    """
    if J <= 0:
        raise ValueError(f"coupling must be positive, got {J}")
    if rescaled:
        return IsingModel({}, {(1, 2): J, (2, 3): 1.0})
    return IsingModel({}, {(1, 2): 1.0, (2, 3): 1.0 / J})


TRIVIAL_GROUND_STATES = (
    SpinAssignment({1: 1, 2: -1, 3: 1}),
    SpinAssignment({1: -1, 2: 1, 3: -1}),
)


def trivial_integer(mu: int) -> tuple[QuboModel, IntegerEncoding]:
    """Minimize (z - 1)^2 for an integer 0 <= z <= 191 encoded with coefficient
    bound mu; the QUBO minimum is 0, attained exactly by encodings of z = 1."""
    if not 1 <= mu <= 191:
        raise ValueError(f"coefficient bound must be in [1, 191], got {mu}")
    enc = bce_encode(0, 191, mu, first_id=1)
    g = LinearConstraint(
        dict(zip(enc.variable_ids, enc.coefficients)), constant=1.0, domain="binary"
    )
    return perturbed_penalty(g, 1.0, 0.0), enc


def gka_style_random(
    n: int,
    j_range: tuple[float, float],
    h_range: tuple[float, float],
    density: float = 1.0,
    seed: int = 0,
) -> QuboModel:
    """Random QUBO in the shape of the gka benchmark family: couplings drawn
    uniformly from j_range at the given density, linear terms uniformly from
    h_range, variables 1..n.  The offset is zero, so the all-zero bitstring
    always has energy zero.  Deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < density <= 1:
        raise ValueError(f"density must be in (0, 1], got {density}")
    if j_range[0] > j_range[1] or h_range[0] > h_range[1]:
        raise ValueError("ranges must satisfy lo <= hi")
    rng = np.random.default_rng(seed)
    Q: dict[tuple[int, int], float] = {}
    for i in range(1, n + 1):
        Q[(i, i)] = float(rng.uniform(h_range[0], h_range[1]))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if density >= 1.0 or rng.random() < density:
                Q[(i, j)] = float(rng.uniform(j_range[0], j_range[1]))
    return QuboModel(Q)


# ---------------------------------------------------------------------------
# Token stream with line tracking, shared by the instance parsers
# ---------------------------------------------------------------------------

class _Tokens:
    def __init__(self, text: str):
        self._toks: list[tuple[int, str]] = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            for tok in raw.split("#", 1)[0].split():
                self._toks.append((ln, tok))
        self._pos = 0
        self._last_line = self._toks[-1][0] if self._toks else 0

    def next_int(self, what: str) -> int:
        ln, tok = self._next(what)
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"line {ln}: expected integer {what}, got {tok!r}") from None

    def next_float(self, what: str) -> float:
        ln, tok = self._next(what)
        try:
            return float(tok)
        except ValueError:
            raise ParseError(f"line {ln}: expected number {what}, got {tok!r}") from None

    def _next(self, what: str) -> tuple[int, str]:
        if self._pos >= len(self._toks):
            raise ParseError(
                f"line {self._last_line}: unexpected end of input while reading {what}"
            )
        tok = self._toks[self._pos]
        self._pos += 1
        return tok

    def expect_end(self):
        if self._pos < len(self._toks):
            ln, tok = self._toks[self._pos]
            raise ParseError(f"line {ln}: trailing data starting at {tok!r}")


# ---------------------------------------------------------------------------
# Multi-dimensional knapsack
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MkpInstance:
    """maximize sum_j profits[j] x_j subject to, for every row i,
    sum_j weights[i][j] x_j <= capacities[i]."""

    n: int
    m: int
    profits: tuple[int, ...]
    weights: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]
    known_optimum: int | None = None

    def __post_init__(self):
        if len(self.profits) != self.n:
            raise ValueError(f"expected {self.n} profits, got {len(self.profits)}")
        if len(self.weights) != self.m or any(len(row) != self.n for row in self.weights):
            raise ValueError("weight matrix shape must be m x n")
        if len(self.capacities) != self.m:
            raise ValueError(f"expected {self.m} capacities, got {len(self.capacities)}")
        if any(p <= 0 for p in self.profits):
            raise ValueError("profits must be positive")
        if any(w < 0 for row in self.weights for w in row):
            raise ValueError("weights must be nonnegative")
        if any(c <= 0 for c in self.capacities):
            raise ValueError("capacities must be positive")


def mkp_parse(text: str) -> MkpInstance:
    """Normalized knapsack format: ``n m``, an optional known optimum (0 when
    unknown), n profits, m rows of n weights, m capacities.  ``#`` starts a
    comment; whitespace is free-form."""
    toks = _Tokens(text)
    n = toks.next_int("variable count n")
    m = toks.next_int("constraint count m")
    optimum = toks.next_int("known optimum (0 if unknown)")
    profits = tuple(toks.next_int(f"profit {j + 1}") for j in range(n))
    weights = tuple(
        tuple(toks.next_int(f"weight ({i + 1}, {j + 1})") for j in range(n))
        for i in range(m)
    )
    capacities = tuple(toks.next_int(f"capacity {i + 1}") for i in range(m))
    toks.expect_end()
    return MkpInstance(
        n, m, profits, weights, capacities, known_optimum=optimum if optimum > 0 else None
    )


def mkp_serialize(inst: MkpInstance) -> str:
    lines = [f"{inst.n} {inst.m}", str(inst.known_optimum or 0)]
    lines.append(" ".join(str(p) for p in inst.profits))
    for row in inst.weights:
        lines.append(" ".join(str(w) for w in row))
    lines.append(" ".join(str(c) for c in inst.capacities))
    return "\n".join(lines) + "\n"


def mkp_to_qubo(
    inst: MkpInstance, lam: float, mu: int
) -> tuple[QuboModel, list[IntegerEncoding], dict[int, dict]]:
    """Penalty formulation: minimize -sum p_j x_j + sum_i lam (sum_j w_ij x_j - z_i)^2
    with slack integers z_i in [0, C_i] encoded at coefficient bound
    min(mu, C_i).  Item variables are 1..n; slack bits follow.  Feasible
    assignments with tight slacks have energy -(profit)."""
    if lam <= 0:
        raise ValueError(f"penalty coefficient must be positive, got {lam}")
    if not 1 <= mu <= max(inst.capacities):
        raise ValueError(
            f"slack coefficient bound must be in [1, {max(inst.capacities)}], got {mu}"
        )
    qubo = QuboModel({(j, j): -float(p) for j, p in enumerate(inst.profits, start=1)})
    encodings: list[IntegerEncoding] = []
    registry: dict[int, dict] = {}
    next_id = inst.n + 1
    for i in range(inst.m):
        enc = bce_encode(0, inst.capacities[i], min(mu, inst.capacities[i]), first_id=next_id)
        next_id += len(enc)
        encodings.append(enc)
        for bit, v in enumerate(enc.variable_ids):
            registry[v] = {"kind": "slack", "constraint": i, "bit": bit}
        terms: dict[int, float] = {
            j: float(w) for j, w in enumerate(inst.weights[i], start=1) if w != 0
        }
        for a, v in zip(enc.coefficients, enc.variable_ids):
            terms[v] = -float(a)
        qubo = qubo + perturbed_penalty(LinearConstraint(terms, 0.0, "binary"), lam, 0.0)
    return qubo, encodings, registry


def mkp_check(inst: MkpInstance, bits: Sequence[int]) -> tuple[bool, int]:
    """Feasibility of all knapsack rows and the profit of an item bitstring
    (slack bits excluded)."""
    if len(bits) != inst.n:
        raise ValueError(f"expected {inst.n} item bits, got {len(bits)}")
    feasible = all(
        sum(w * b for w, b in zip(row, bits)) <= cap
        for row, cap in zip(inst.weights, inst.capacities)
    )
    objective = sum(p * b for p, b in zip(inst.profits, bits))
    return feasible, objective


def mkp_checker(inst: MkpInstance) -> Callable[[SpinAssignment], tuple[bool, float]]:
    """Metric-callback adapter: reads the item bits 1..n out of a spin
    assignment (slack spins ignored) and applies :func:`mkp_check`."""

    def check(assignment: SpinAssignment) -> tuple[bool, float]:
        bits = [(assignment.spin(j) + 1) // 2 for j in range(1, inst.n + 1)]
        feasible, objective = mkp_check(inst, bits)
        return feasible, float(objective)

    return check


def max_weight_product(inst: MkpInstance) -> int:
    """max over item pairs j != j' of sum_i w_ij w_ij', the coupling magnitude
    that slack encoding cannot reduce (it bounds the penalty QUBO's coupling
    scale from below, whatever the slack coefficient cap)."""
    best = 0
    for j in range(inst.n):
        for jp in range(j + 1, inst.n):
            best = max(best, sum(row[j] * row[jp] for row in inst.weights))
    return best


# ---------------------------------------------------------------------------
# Quadratic assignment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QapInstance:
    """minimize sum f[i][j] d[k][l] x_ik x_jl over permutation matrices x."""

    n: int
    flow: tuple[tuple[float, ...], ...]
    distance: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        for name, mat in (("flow", self.flow), ("distance", self.distance)):
            if len(mat) != self.n or any(len(row) != self.n for row in mat):
                raise ValueError(f"{name} matrix must be {self.n} x {self.n}")
            if any(v < 0 for row in mat for v in row):
                raise ValueError(f"{name} entries must be nonnegative")

    def variable(self, i: int, k: int) -> int:
        """QUBO variable id for facility i at location k (both 1-based)."""
        return (i - 1) * self.n + k


def qap_parse(text: str) -> QapInstance:
    """Taillard layout: first token n, then the n x n flow matrix, then the
    n x n distance matrix, whitespace-separated; ``#`` starts a comment."""
    toks = _Tokens(text)
    n = toks.next_int("problem size n")
    if n < 1:
        raise ParseError("problem size must be >= 1")
    flow = tuple(
        tuple(toks.next_float(f"flow ({i + 1}, {j + 1})") for j in range(n))
        for i in range(n)
    )
    distance = tuple(
        tuple(toks.next_float(f"distance ({i + 1}, {j + 1})") for j in range(n))
        for i in range(n)
    )
    toks.expect_end()
    return QapInstance(n, flow, distance)


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(v)


def qap_serialize(inst: QapInstance) -> str:
    lines = [str(inst.n), ""]
    for mat in (inst.flow, inst.distance):
        for row in mat:
            lines.append(" ".join(_fmt(v) for v in row))
        lines.append("")
    return "\n".join(lines)


def qap_to_qubo(inst: QapInstance, lam: float, eps: float = 0.0) -> QuboModel:
    """QUBO with the objective plus 2n one-hot penalties (one per facility and
    one per location), each perturbed by eps; the per-constraint constants
    -lam*eps^2 are folded into the offset.  A permutation matrix contributes
    zero total penalty.  lam must be positive: without the penalty the
    all-zero assignment is trivially optimal."""
    n = inst.n
    Q: dict[tuple[int, int], float] = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                for l in range(1, n + 1):
                    c = inst.flow[i - 1][j - 1] * inst.distance[k - 1][l - 1]
                    if c == 0.0:
                        continue
                    v1, v2 = inst.variable(i, k), inst.variable(j, l)
                    key = (v1, v1) if v1 == v2 else (min(v1, v2), max(v1, v2))
                    Q[key] = Q.get(key, 0.0) + c
    qubo = QuboModel(Q)
    for i in range(1, n + 1):
        row = LinearConstraint(
            {inst.variable(i, k): 1.0 for k in range(1, n + 1)}, 1.0, "binary"
        )
        qubo = qubo + perturbed_penalty(row, lam, eps)
    for k in range(1, n + 1):
        col = LinearConstraint(
            {inst.variable(i, k): 1.0 for i in range(1, n + 1)}, 1.0, "binary"
        )
        qubo = qubo + perturbed_penalty(col, lam, eps)
    return qubo


def qap_check(inst: QapInstance, bits: Sequence[int]) -> tuple[bool, float]:
    """Permutation feasibility (every row and column sums to 1) and the
    assignment cost of a bitstring ordered by variable id."""
    n = inst.n
    if len(bits) != n * n:
        raise ValueError(f"expected {n * n} bits, got {len(bits)}")
    rows_ok = all(sum(bits[(i - 1) * n + k - 1] for k in range(1, n + 1)) == 1 for i in range(1, n + 1))
    cols_ok = all(sum(bits[(i - 1) * n + k - 1] for i in range(1, n + 1)) == 1 for k in range(1, n + 1))
    if not (rows_ok and cols_ok):
        return False, 0.0
    location = [0] * n
    for i in range(n):
        for k in range(n):
            if bits[i * n + k]:
                location[i] = k
    objective = sum(
        inst.flow[i][j] * inst.distance[location[i]][location[j]]
        for i in range(n)
        for j in range(n)
    )
    return True, objective


def qap_checker(inst: QapInstance) -> Callable[[SpinAssignment], tuple[bool, float]]:
    def check(assignment: SpinAssignment) -> tuple[bool, float]:
        bits = [
            (assignment.spin(v) + 1) // 2 for v in range(1, inst.n * inst.n + 1)
        ]
        return qap_check(inst, bits)

    return check


def qap_optimum(inst: QapInstance) -> tuple[float, tuple[int, ...]]:
    """Exact optimum by enumerating all n! assignments; the returned tuple
    maps facility index (0-based) to location index."""
    n = inst.n
    best = None
    arg = None
    for perm in itertools.permutations(range(n)):
        value = sum(
            inst.flow[i][j] * inst.distance[perm[i]][perm[j]]
            for i in range(n)
            for j in range(n)
        )
        if best is None or value < best:
            best, arg = value, perm
    return best, arg


def permutation_bits(inst: QapInstance, perm: Sequence[int]) -> list[int]:
    """Bitstring (ordered by variable id) of a facility->location permutation."""
    bits = [0] * (inst.n * inst.n)
    for i, k in enumerate(perm):
        bits[i * inst.n + k] = 1
    return bits

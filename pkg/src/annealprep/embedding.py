"""Minor-embedding: coefficient assignment over chains, chain strength,
majority-vote unembedding, validation, synthetic targets and the clique-size
estimate for Pegasus-like hardware.

A chain is the connected set of physical nodes representing one logical
variable.  Coefficients are assigned balanced: each chain member carries
h_i/|C(i)|, each connecting hardware edge carries J_ij/|S(i,j)|, and every
hardware edge inside a chain gets the ferromagnetic coupler -chain_strength.
The sums over a chain (or over the connecting edges) therefore recover the
logical coefficients.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from typing import Mapping

from .model import (
    AcceptRanges,
    IsingModel,
    ParseError,
    ScalingReport,
    SpinAssignment,
    normalize_pair,
    scaling_factors,
)
from .sampling import SampleRecord, SampleSet


class EmbeddingError(ValueError):
    """Embedding does not fit the model/hardware; carries the violation list."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class HardwareGraph:
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(int(v) for v in self.nodes))
        edges = frozenset(normalize_pair(int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        for i, j in edges:
            if i not in self.nodes or j not in self.nodes:
                raise ValueError(f"edge ({i}, {j}) references a missing node")

    def has_edge(self, i: int, j: int) -> bool:
        return i != j and normalize_pair(i, j) in self.edges


@dataclass(frozen=True)
class Embedding:
    """Map logical-id -> chain (nonempty set of physical ids)."""

    chains: Mapping[int, frozenset[int]]

    def __post_init__(self):
        clean = {}
        for i, chain in self.chains.items():
            chain = frozenset(int(k) for k in chain)
            if not chain:
                raise ValueError(f"chain for logical variable {i} is empty")
            clean[int(i)] = chain
        object.__setattr__(self, "chains", clean)

    def chain(self, i: int) -> frozenset[int]:
        return self.chains[i]


def _chain_connected(chain: frozenset[int], hw: HardwareGraph) -> bool:
    if len(chain) == 1:
        return True
    start = next(iter(chain))
    seen = {start}
    queue = deque([start])
    while queue:
        k = queue.popleft()
        for l in chain:
            if l not in seen and hw.has_edge(k, l):
                seen.add(l)
                queue.append(l)
    return seen == chain


def connecting_edges(
    embedding: Embedding, hw: HardwareGraph, i: int, j: int
) -> list[tuple[int, int]]:
    """Hardware edges between chain C(i) and chain C(j), sorted."""
    ci, cj = embedding.chain(i), embedding.chain(j)
    return sorted(
        normalize_pair(k, l) for k in ci for l in cj if hw.has_edge(k, l)
    )


def intra_chain_edges(embedding: Embedding, hw: HardwareGraph) -> frozenset[tuple[int, int]]:
    """All hardware edges inside any chain's induced subgraph."""
    edges = set()
    for chain in embedding.chains.values():
        members = sorted(chain)
        for a_idx, k in enumerate(members):
            for l in members[a_idx + 1:]:
                if hw.has_edge(k, l):
                    edges.add(normalize_pair(k, l))
    return frozenset(edges)


def validate(embedding: Embedding, logical: IsingModel, hw: HardwareGraph) -> list[str]:
    """Check the embedding invariants; the returned list is empty when valid."""
    violations = []
    for i, chain in sorted(embedding.chains.items()):
        missing = chain - hw.nodes
        if missing:
            violations.append(
                f"chain of {i} uses unknown hardware nodes {sorted(missing)}"
            )
    for i in logical.variables:
        if i not in embedding.chains:
            violations.append(f"logical variable {i} has no chain")
    items = sorted(embedding.chains.items())
    for a_idx, (i, ci) in enumerate(items):
        for j, cj in items[a_idx + 1:]:
            if ci & cj:
                violations.append(f"chains of {i} and {j} overlap on {sorted(ci & cj)}")
    for i, chain in items:
        if not (chain - hw.nodes) and not _chain_connected(chain, hw):
            violations.append(f"chain of {i} is not connected in the hardware graph")
    for (i, j) in sorted(logical.J):
        if i in embedding.chains and j in embedding.chains:
            if not connecting_edges(embedding, hw, i, j):
                violations.append(
                    f"no hardware edge connects the chains of {i} and {j}"
                )
    return violations


@dataclass(frozen=True)
class EmbeddedModel:
    """Physical model produced by coefficient assignment over an embedding."""

    physical: IsingModel
    embedding: Embedding
    chain_strength: float
    intra_chain_edges: frozenset[tuple[int, int]]


def assign_coefficients(
    logical: IsingModel,
    embedding: Embedding,
    hw: HardwareGraph,
    chain_strength: float,
) -> EmbeddedModel:
    """Balanced assignment: h_i/|C(i)| per member, J_ij/|S(i,j)| per connecting
    edge, -chain_strength on every intra-chain hardware edge."""
    if chain_strength <= 0:
        raise ValueError(f"chain strength must be positive, got {chain_strength}")
    violations = validate(embedding, logical, hw)
    if violations:
        raise EmbeddingError(violations)
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    for i, hi in logical.h.items():
        chain = embedding.chain(i)
        share = hi / len(chain)
        for k in chain:
            h[k] = share
    for (i, j), jij in logical.J.items():
        edges = connecting_edges(embedding, hw, i, j)
        share = jij / len(edges)
        for e in edges:
            J[e] = J.get(e, 0.0) + share
    intra = intra_chain_edges(embedding, hw)
    for e in intra:
        J[e] = -chain_strength
    physical = IsingModel(h, J, logical.offset)
    return EmbeddedModel(physical, embedding, chain_strength, intra)


def unembed(
    samples: SampleSet, embedded: EmbeddedModel, logical: IsingModel
) -> SampleSet:
    """Contract each chain by majority vote and re-evaluate logical energies.

    Samples must assign every physical node.  A record is flagged
    chain-broken if any of its chains is non-unanimous; even ties resolve to
    -1 (a fixed convention, chosen for reproducibility).
    """
    chains = sorted(embedded.embedding.chains.items())
    records = []
    for rec in samples.records:
        spins = rec.assignment.spins
        out = {}
        broken = False
        for i, chain in chains:
            missing = [k for k in chain if k not in spins]
            if missing:
                raise ValueError(
                    f"sample does not assign physical nodes {missing} of chain {i}"
                )
            total = sum(spins[k] for k in chain)
            if abs(total) != len(chain):
                broken = True
            out[i] = 1 if total > 0 else -1
        assignment = SpinAssignment(out)
        records.append(
            SampleRecord(
                assignment,
                logical.energy(assignment),
                rec.occurrences,
                broken,
            )
        )
    return SampleSet(tuple(records))


def chain_consistent_lift(
    assignment: SpinAssignment, embedding: Embedding
) -> SpinAssignment:
    """Physical state giving every chain member its logical spin."""
    spins = {}
    for i, chain in embedding.chains.items():
        for k in chain:
            spins[k] = assignment.spin(i)
    return SpinAssignment(spins)


def chain_expand(
    logical: IsingModel, chain_length: int, seed: int = 0
) -> tuple[HardwareGraph, Embedding]:
    """Synthetic embedding target: each logical node becomes a path of
    ``chain_length`` physical nodes and each logical edge gets exactly one
    connecting hardware edge, at a round-robin position offset by a seeded
    draw.  chain_length 1 reproduces the logical graph identically.

    Physical node ids are logical_id * chain_length + position, so logical
    ids must be nonnegative.
    """
    if chain_length < 1:
        raise ValueError("chain_length must be >= 1")
    ids = logical.variables
    if ids and ids[0] < 0:
        raise ValueError("chain_expand requires nonnegative variable ids")
    rng = random.Random(seed)
    nodes = set()
    edges = set()
    chains = {}
    for i in ids:
        members = [i * chain_length + t for t in range(chain_length)]
        nodes.update(members)
        chains[i] = frozenset(members)
        for a, b in zip(members, members[1:]):
            edges.add((a, b))
    for e_idx, (i, j) in enumerate(sorted(logical.J)):
        pos_i = (e_idx + rng.randrange(chain_length)) % chain_length
        pos_j = (e_idx + rng.randrange(chain_length)) % chain_length
        edges.add(
            normalize_pair(i * chain_length + pos_i, j * chain_length + pos_j)
        )
    return HardwareGraph(frozenset(nodes), frozenset(edges)), Embedding(chains)


@dataclass(frozen=True)
class PegasusCliqueEstimate:
    """Size estimate for embedding an n-clique into a Pegasus graph P_m."""

    m: int
    chain_len_lo: int
    chain_len_hi: int
    s_h_tilde_bound: float


def pegasus_clique_estimate(n: int, s_h: float) -> PegasusCliqueEstimate:
    """Smallest Pegasus size P_m admitting an n-node clique minor (m >= n/12 + 1),
    with chain lengths m or m+1, so the physical field scaling factor is at
    most s_h / m."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = -(-n // 12) + 1
    return PegasusCliqueEstimate(
        m=m, chain_len_lo=m, chain_len_hi=m + 1, s_h_tilde_bound=s_h / m
    )


def physical_scaling(embedded: EmbeddedModel, ranges: AcceptRanges) -> ScalingReport:
    """Scaling report of the physical model; chain couplers participate in
    s_j (a chain coupler -c counts as c/|j_min| against the negative bound)."""
    return scaling_factors(embedded.physical, ranges)


# ---------------------------------------------------------------------------
# File formats (stable ordering so byte-exact round trips hold)
# ---------------------------------------------------------------------------

def write_embedding_json(embedding: Embedding) -> str:
    obj = {str(i): sorted(embedding.chains[i]) for i in sorted(embedding.chains)}
    return json.dumps(obj, indent=2) + "\n"


def parse_embedding_json(text: str) -> Embedding:
    try:
        obj = json.loads(text)
        chains = {int(k): frozenset(int(x) for x in v) for k, v in obj.items()}
    except (json.JSONDecodeError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"malformed embedding JSON: {exc}") from None
    return Embedding(chains)


def write_hardware_json(hw: HardwareGraph) -> str:
    obj = {
        "nodes": sorted(hw.nodes),
        "edges": [list(e) for e in sorted(hw.edges)],
    }
    return json.dumps(obj, indent=2) + "\n"


def parse_hardware_json(text: str) -> HardwareGraph:
    try:
        obj = json.loads(text)
        nodes = frozenset(int(v) for v in obj["nodes"])
        edges = frozenset((int(i), int(j)) for i, j in obj["edges"])
    except (json.JSONDecodeError, TypeError, ValueError, KeyError) as exc:
        raise ParseError(f"malformed hardware JSON: {exc}") from None
    return HardwareGraph(nodes, edges)

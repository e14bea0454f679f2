"""Experiment orchestration: chain-strength sweeps, sample metrics, optimal
chain-strength selection, multiplier-update loops and scaling surveys.

Everything here is deterministic: each sweep cell derives its RNG stream from
the base seed and its own coordinates, so cells can run in any order (or in
parallel) and reproduce byte-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .embedding import (
    Embedding,
    HardwareGraph,
    assign_coefficients,
    pegasus_clique_estimate,
    unembed,
)
from .model import (
    AcceptRanges,
    IsingModel,
    ParseError,
    SpinAssignment,
    scaling_factors,
)
from .reduction import AlmState, alm_update
from .sampling import (
    NoiseModel,
    SampleSet,
    SaParams,
    concat_samples,
    exact_inner,
    exact_sample,
    noisy_sample,
    sa_inner,
    sa_sample,
)

# Sampler used by experiments: (model, stream key) -> samples.  The key is a
# short sequence of cell coordinates mixed into the sampler's base seed.
Sampler = Callable[[IsingModel, Sequence[int]], SampleSet]

# Embedder: (logical model, embedding seed) -> (hardware graph, embedding).
Embedder = Callable[[IsingModel, int], tuple[HardwareGraph, Embedding]]


class NoPlateauError(RuntimeError):
    """Plateau selection rule found no row reaching the threshold."""


@dataclass(frozen=True)
class MetricOptions:
    """How sample metrics are computed.

    ``truncate_positive_to_zero`` replaces positive energies with zero before
    averaging (useful when wild positive outliers would mask the signal);
    ``objective_sense`` says whether larger or smaller objective values are
    better; ``want_p_opt`` insists on an optimum-rate metric (an oracle set
    must then be supplied).
    """

    truncate_positive_to_zero: bool = False
    objective_sense: str = "max"
    want_p_opt: bool = False

    def __post_init__(self):
        if self.objective_sense not in ("max", "min"):
            raise ValueError("objective_sense must be 'max' or 'min'")


@dataclass(frozen=True)
class MetricsRow:
    """Aggregated sample metrics, optionally tagged with a chain strength."""

    avg_energy: float
    chain_break_rate: float
    chain_strength: float | None = None
    p_opt: float | None = None
    feasibility_rate: float | None = None
    best_objective: float | None = None
    mean_objective: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.avg_energy):
            raise ValueError("avg_energy must be finite")
        for name in ("chain_break_rate", "p_opt", "feasibility_rate"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


def compute_metrics(
    samples: SampleSet,
    options: MetricOptions | None = None,
    oracle: Iterable[SpinAssignment] | None = None,
    checker: Callable[[SpinAssignment], tuple[bool, float]] | None = None,
    chain_strength: float | None = None,
) -> MetricsRow:
    """Occurrence-weighted metrics of a sample set.

    ``oracle`` is the set of acceptable ground states for the optimum rate;
    ``checker`` maps an assignment to (feasible, objective) for constrained
    problems.
    """
    options = options or MetricOptions()
    total = samples.total_occurrences
    if total == 0:
        raise ValueError("cannot compute metrics of an empty sample set")
    if options.want_p_opt and oracle is None:
        raise ValueError("optimum rate requested but no oracle set supplied")

    energy_sum = 0.0
    broken = 0
    for rec in samples.records:
        e = rec.energy
        if options.truncate_positive_to_zero and e > 0.0:
            e = 0.0
        energy_sum += e * rec.occurrences
        if rec.chain_broken:
            broken += rec.occurrences
    avg_energy = energy_sum / total
    chain_break_rate = broken / total

    p_opt = None
    if oracle is not None:
        keys = {a.as_tuple() for a in oracle}
        hit = sum(r.occurrences for r in samples.records if r.assignment.as_tuple() in keys)
        p_opt = hit / total

    feasibility_rate = best = mean = None
    if checker is not None:
        feasible_occ = 0
        obj_sum = 0.0
        best = None
        for rec in samples.records:
            ok, obj = checker(rec.assignment)
            if not ok:
                continue
            feasible_occ += rec.occurrences
            obj_sum += obj * rec.occurrences
            if best is None:
                best = obj
            elif options.objective_sense == "max":
                best = max(best, obj)
            else:
                best = min(best, obj)
        feasibility_rate = feasible_occ / total
        mean = obj_sum / feasible_occ if feasible_occ else None
    return MetricsRow(
        avg_energy=avg_energy,
        chain_break_rate=chain_break_rate,
        chain_strength=chain_strength,
        p_opt=p_opt,
        feasibility_rate=feasibility_rate,
        best_objective=best,
        mean_objective=mean,
    )


def select_chain_strength(
    rows: Sequence[MetricsRow], rule: str = "argmin_energy", threshold: float | None = None
) -> float:
    """Pick the working chain strength from sweep rows.

    ``argmin_energy``: the strength minimizing average energy (ties go to the
    smaller strength).  ``plateau``: the smallest strength whose best
    objective reaches ``threshold``; raises :class:`NoPlateauError` when none
    does.
    """
    if not rows:
        raise ValueError("no rows to select from")
    if any(r.chain_strength is None for r in rows):
        raise ValueError("rows must carry chain strengths")
    if rule == "argmin_energy":
        return min(rows, key=lambda r: (r.avg_energy, r.chain_strength)).chain_strength
    if rule in ("plateau", "plateau_threshold"):
        if threshold is None:
            raise ValueError("plateau rule needs a threshold")
        qualifying = [
            r.chain_strength
            for r in rows
            if r.best_objective is not None and r.best_objective >= threshold
        ]
        if not qualifying:
            raise NoPlateauError(f"no chain strength reaches objective {threshold}")
        return min(qualifying)
    raise ValueError(f"unknown selection rule {rule!r}")


# ---------------------------------------------------------------------------
# Sampler construction from a JSON-able spec
# ---------------------------------------------------------------------------

def _derived_seed(base: int, key: Sequence[int]) -> int:
    return int(np.random.SeedSequence([int(base), *[int(k) for k in key]]).generate_state(1, np.uint64)[0])


def make_sampler(spec: Mapping, num_reads: int) -> Sampler:
    """Build a sampler callable from a JSON-able spec.

    Kinds: ``sa`` (simulated annealing), ``exact`` (enumeration, with a
    ``temperature``), and their noise-wrapped forms ``noisy_sa`` /
    ``noisy_exact`` which also need ``ranges`` ([h_min, h_max, j_min, j_max])
    and ``noise`` ({relative_sigma_h, relative_sigma_j, distribution}).
    """
    kind = spec.get("kind", "sa")
    base = int(spec.get("seed", 0))

    def sa_params(seed: int) -> SaParams:
        return SaParams(
            num_reads=num_reads,
            sweeps=int(spec.get("sweeps", 1000)),
            beta_start=float(spec.get("beta_start", 0.1)),
            beta_end=float(spec.get("beta_end", 10.0)),
            seed=seed,
        )

    def noise_and_ranges(seed: int) -> tuple[NoiseModel, AcceptRanges]:
        noise_spec = spec.get("noise", {})
        noise = NoiseModel(
            relative_sigma_h=float(noise_spec.get("relative_sigma_h", 0.03)),
            relative_sigma_j=float(noise_spec.get("relative_sigma_j", 0.03)),
            distribution=noise_spec.get("distribution", "gaussian"),
            seed=seed,
        )
        r = spec.get("ranges")
        ranges = AcceptRanges(*r) if r else AcceptRanges.dwave_advantage()
        return noise, ranges

    if kind == "sa":

        def sample(model: IsingModel, key: Sequence[int]) -> SampleSet:
            return sa_sample(model, sa_params(_derived_seed(base, key)))

    elif kind == "exact":

        def sample(model: IsingModel, key: Sequence[int]) -> SampleSet:
            t = float(spec.get("temperature", 0.0))
            if t == 0.0 or math.isinf(t):
                return exact_sample(model, t)
            return exact_sample(model, t, num_reads=num_reads, seed=_derived_seed(base, key))

    elif kind in ("noisy_sa", "noisy_exact"):

        def sample(model: IsingModel, key: Sequence[int]) -> SampleSet:
            seed = _derived_seed(base, key)
            noise_seed, inner_seed = (
                int(s) for s in np.random.SeedSequence(seed).generate_state(2, np.uint64)
            )
            noise, ranges = noise_and_ranges(noise_seed)
            if kind == "noisy_sa":
                inner = sa_inner(sa_params(inner_seed))
            else:
                inner = exact_inner(float(spec.get("temperature", 0.0)), seed=inner_seed)
            return noisy_sample(model, ranges, noise, inner, num_reads)

    else:
        raise ValueError(f"unknown sampler kind {kind!r}")

    return sample


# ---------------------------------------------------------------------------
# Chain-strength sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    chain_strength_grid: tuple[float, ...]
    embedding_seeds: tuple[int, ...]
    reads_per_cell: int
    sampler: Mapping = field(default_factory=dict)
    truncate_positive_to_zero: bool = False
    plateau_threshold: float | None = None

    def __post_init__(self):
        if not self.chain_strength_grid:
            raise ValueError("chain_strength_grid must be nonempty")
        if any(c <= 0 for c in self.chain_strength_grid):
            raise ValueError("chain strengths must be positive")
        if not self.embedding_seeds:
            raise ValueError("embedding_seeds must be nonempty")
        if self.reads_per_cell < 1:
            raise ValueError("reads_per_cell must be >= 1")
        object.__setattr__(self, "chain_strength_grid", tuple(float(c) for c in self.chain_strength_grid))
        object.__setattr__(self, "embedding_seeds", tuple(int(s) for s in self.embedding_seeds))

    @classmethod
    def from_dict(cls, obj: Mapping) -> "SweepConfig":
        try:
            return cls(
                chain_strength_grid=tuple(obj["chain_strength_grid"]),
                embedding_seeds=tuple(obj["embedding_seeds"]),
                reads_per_cell=int(obj["reads_per_cell"]),
                sampler=dict(obj.get("sampler", {})),
                truncate_positive_to_zero=bool(obj.get("truncate_positive_to_zero", False)),
                plateau_threshold=(
                    float(obj["plateau_threshold"])
                    if obj.get("plateau_threshold") is not None
                    else None
                ),
            )
        except KeyError as exc:
            raise ParseError(f"sweep config is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed sweep config: {exc}") from None


@dataclass(frozen=True)
class SweepCell:
    embedding_seed: int
    chain_strength: float
    samples: SampleSet
    row: MetricsRow


@dataclass(frozen=True)
class SweepOutcome:
    cells: tuple[SweepCell, ...]
    pooled: tuple[MetricsRow, ...]
    diagnostics: tuple[str, ...]


def run_sweep(
    logical: IsingModel,
    config: SweepConfig,
    embedder: Embedder,
    *,
    oracle: Iterable[SpinAssignment] | None = None,
    checker: Callable[[SpinAssignment], tuple[bool, float]] | None = None,
    options: MetricOptions | None = None,
    postprocess: Callable[[SampleSet], SampleSet] | None = None,
) -> SweepOutcome:
    """Embed, assign, sample and unembed over (embedding seed x chain strength).

    For each embedding seed the logical model is embedded once; every grid
    strength is then applied, sampled (cell RNG keyed by seed and strength
    index), majority-vote unembedded and measured.  ``postprocess`` runs on
    the unembedded samples before metrics (e.g. projecting away reduction
    auxiliaries).  Embedding failures skip the seed and are reported in the
    diagnostics.  Pooled rows aggregate all samples per strength.
    """
    if options is None:
        options = MetricOptions(truncate_positive_to_zero=config.truncate_positive_to_zero)
    oracle = list(oracle) if oracle is not None else None
    sampler = make_sampler(config.sampler, config.reads_per_cell)
    cells: list[SweepCell] = []
    diagnostics: list[str] = []
    strengths = sorted(config.chain_strength_grid)
    for seed in sorted(config.embedding_seeds):
        try:
            hw, emb = embedder(logical, seed)
        except Exception as exc:  # noqa: BLE001 - reported, not fatal
            diagnostics.append(f"embedding seed {seed}: {exc}")
            continue
        for k, strength in enumerate(strengths):
            embedded = assign_coefficients(logical, emb, hw, strength)
            raw = sampler(embedded.physical, (seed, k))
            samples = unembed(raw, embedded, logical)
            if postprocess is not None:
                samples = postprocess(samples)
            row = compute_metrics(samples, options, oracle, checker, chain_strength=strength)
            cells.append(SweepCell(seed, strength, samples, row))
    pooled = []
    for k, strength in enumerate(strengths):
        group = [c.samples for c in cells if c.chain_strength == strength]
        if not group:
            continue
        pooled.append(
            compute_metrics(
                concat_samples(group), options, oracle, checker, chain_strength=strength
            )
        )
    return SweepOutcome(tuple(cells), tuple(pooled), tuple(diagnostics))


def chain_strength_sweep(
    logical: IsingModel,
    config: SweepConfig,
    embedder: Embedder,
    *,
    oracle: Iterable[SpinAssignment] | None = None,
    checker: Callable[[SpinAssignment], tuple[bool, float]] | None = None,
    options: MetricOptions | None = None,
    postprocess: Callable[[SampleSet], SampleSet] | None = None,
) -> list[MetricsRow]:
    """Per-strength metrics pooled across embedding seeds."""
    return list(
        run_sweep(
            logical,
            config,
            embedder,
            oracle=oracle,
            checker=checker,
            options=options,
            postprocess=postprocess,
        ).pooled
    )


# ---------------------------------------------------------------------------
# Multiplier-update experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlmStep:
    """State used in one iteration, the measured metrics, the selected sample
    and its constraint residual."""

    state: AlmState
    row: MetricsRow
    best: SpinAssignment
    residual: float


def alm_experiment(
    build_model: Callable[[float, float], IsingModel],
    g_of: Callable[[SpinAssignment], float],
    state0: AlmState,
    iterations: int,
    sampler: Sampler,
    *,
    options: MetricOptions | None = None,
    oracle: Iterable[SpinAssignment] | None = None,
    checker: Callable[[SpinAssignment], tuple[bool, float]] | None = None,
) -> list[AlmStep]:
    """Iterative multiplier tuning: build the model at (lam, eps = -u/2lam),
    sample, take the lowest-energy sample as the incumbent, update (u, lam)
    with its residual, repeat."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    state = state0
    steps: list[AlmStep] = []
    for t in range(iterations):
        model = build_model(state.penalty, state.epsilon)
        samples = sampler(model, (t,))
        best = samples.lowest()
        residual = g_of(best.assignment)
        row = compute_metrics(samples, options, oracle, checker)
        steps.append(AlmStep(state, row, best.assignment, residual))
        state = alm_update(state, residual)
    return steps


@dataclass(frozen=True)
class PenaltyGridCell:
    penalty: float
    perturbation: float
    row: MetricsRow


def penalty_grid_experiment(
    build_model: Callable[[float, float], IsingModel],
    penalties: Sequence[float],
    perturbations: Sequence[float],
    sampler: Sampler,
    *,
    options: MetricOptions | None = None,
    oracle: Iterable[SpinAssignment] | None = None,
    checker: Callable[[SpinAssignment], tuple[bool, float]] | None = None,
) -> list[PenaltyGridCell]:
    """Non-iterative (lam, eps) grid protocol: sample the model at every pair
    and report metrics, e.g. feasibility against penalty for each
    perturbation width."""
    cells = []
    for ei, eps in enumerate(perturbations):
        for li, lam in enumerate(penalties):
            model = build_model(lam, eps)
            samples = sampler(model, (ei, li))
            row = compute_metrics(samples, options, oracle, checker)
            cells.append(PenaltyGridCell(lam, eps, row))
    return cells


# ---------------------------------------------------------------------------
# Scaling survey
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurveyRow:
    instance: str
    num_variables: int
    s_h: float
    s_j: float
    s_h_tilde: float
    ratio: float
    estimated: bool
    needs_field_reduction: bool


def scaling_survey(
    named_models: Sequence[tuple[str, IsingModel]],
    ranges: AcceptRanges,
    embedding_for: Callable[[str, IsingModel], tuple[HardwareGraph, Embedding] | None]
    | None = None,
) -> list[SurveyRow]:
    """Logical vs physical field scaling per instance.

    With an embedding the physical s_h is computed from the balanced
    assignment (chain strength does not enter the field scaling); without
    one, the clique-minor estimate bound s_h/m is used.  Instances whose
    physical field scaling still exceeds the coupling scaling are flagged:
    only those would benefit from reducing field coefficients before
    embedding.
    """
    rows = []
    for name, model in named_models:
        rep = scaling_factors(model, ranges)
        pair = embedding_for(name, model) if embedding_for is not None else None
        if pair is None:
            est = pegasus_clique_estimate(max(model.num_variables, 1), rep.s_h)
            s_h_tilde = est.s_h_tilde_bound
            estimated = True
        else:
            hw, emb = pair
            embedded = assign_coefficients(model, emb, hw, chain_strength=1.0)
            s_h_tilde = scaling_factors(embedded.physical, ranges).s_h
            estimated = False
        if rep.s_j > 0:
            ratio = s_h_tilde / rep.s_j
        else:
            ratio = math.inf if s_h_tilde > 0 else 0.0
        rows.append(
            SurveyRow(
                instance=name,
                num_variables=model.num_variables,
                s_h=rep.s_h,
                s_j=rep.s_j,
                s_h_tilde=s_h_tilde,
                ratio=ratio,
                estimated=estimated,
                needs_field_reduction=s_h_tilde > rep.s_j,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# CSV reports
# ---------------------------------------------------------------------------

METRICS_CSV_HEADER = (
    "instance,method,param,embedding_seed,chain_strength,avg_energy,p_opt,"
    "feasibility_rate,best_objective,mean_objective,chain_break_rate"
)


def _cell_str(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _metrics_fields(row: MetricsRow) -> list[str]:
    return [
        _cell_str(row.chain_strength),
        _cell_str(row.avg_energy),
        _cell_str(row.p_opt),
        _cell_str(row.feasibility_rate),
        _cell_str(row.best_objective),
        _cell_str(row.mean_objective),
        _cell_str(row.chain_break_rate),
    ]


def write_metrics_csv(
    outcome: SweepOutcome, instance: str = "", method: str = "", param: str = ""
) -> str:
    """Per-cell rows sorted by (embedding seed, chain strength), then pooled
    per-strength rows with embedding_seed = 'all'."""
    lines = [METRICS_CSV_HEADER]
    cells = sorted(outcome.cells, key=lambda c: (c.embedding_seed, c.chain_strength))
    for c in cells:
        lines.append(
            ",".join([instance, method, param, str(c.embedding_seed)] + _metrics_fields(c.row))
        )
    for row in sorted(outcome.pooled, key=lambda r: r.chain_strength):
        lines.append(",".join([instance, method, param, "all"] + _metrics_fields(row)))
    return "\n".join(lines) + "\n"


SURVEY_CSV_HEADER = (
    "instance,num_variables,s_h,s_j,s_h_tilde,ratio,estimated,needs_field_reduction"
)


def write_survey_csv(rows: Sequence[SurveyRow]) -> str:
    lines = [SURVEY_CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.instance,
                    str(r.num_variables),
                    repr(r.s_h),
                    repr(r.s_j),
                    repr(r.s_h_tilde),
                    repr(r.ratio),
                    str(int(r.estimated)),
                    str(int(r.needs_field_reduction)),
                ]
            )
        )
    return "\n".join(lines) + "\n"

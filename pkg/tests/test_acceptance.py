"""Acceptance gate: one test per release criterion, each printing a PASS line
(run with ``pytest tests/test_acceptance.py -v -s`` to see them).

Every tolerance is pinned here; nothing is deferred to later calibration.
Statistical criteria use fixed seeds, so the whole gate is deterministic.
"""

import json
import math
import time

import numpy as np
import pytest

from annealprep import (
    AcceptRanges,
    IsingModel,
    NoiseModel,
    SweepConfig,
    bce_encode,
    chain_consistent_lift,
    chain_expand,
    chain_strength_sweep,
    exact_inner,
    ground_states,
    iem_reduce,
    noisy_sample,
    pegasus_clique_estimate,
    perturbed_penalty,
    project_samples,
    projected_ground_states,
    qubo_to_ising,
)
from annealprep.cli import main
from annealprep.embedding import assign_coefficients
from annealprep.harness import MetricOptions, penalty_grid_experiment, make_sampler
from annealprep.model import write_ising_json
from annealprep.problems import (
    TRIVIAL_GROUND_STATES,
    mkp_check,
    mkp_parse,
    mkp_to_qubo,
    qap_checker,
    qap_optimum,
    qap_parse,
    qap_to_qubo,
    trivial_ising,
)
from annealprep.reduction import LinearConstraint

from conftest import FIXTURES, assignment_set

DWAVE = AcceptRanges.dwave_advantage()


def _report(number, name):
    print(f"\nACCEPTANCE {number} ({name}): PASS")


def _random_reduction_models():
    """The seeded model family shared by criteria 1 and 2: n <= 8, couplings
    uniform in [-10, 10], fields in [-5, 5]."""
    models = []
    for idx in range(50):
        rng = np.random.default_rng(1000 + idx)
        n = int(rng.integers(3, 9))
        h = {i: float(rng.uniform(-5, 5)) for i in range(1, n + 1)}
        J = {}
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if rng.random() < 0.6:
                    J[(i, j)] = float(rng.uniform(-10, 10))
        models.append(IsingModel(h, J))
    return models


def test_criterion_01_iem_ground_state_preservation():
    start = time.time()
    for m in _random_reduction_models():
        target = assignment_set(ground_states(m)[0])
        for bound in (1.0, 2.0, 3.0):
            red = iem_reduce(m, bound)
            projected = assignment_set(projected_ground_states(red.model, m.variables)[0])
            assert projected == target  # exact set equality, zero tolerance
    assert time.time() - start < 30.0
    _report(1, "IEM ground-state preservation")


def test_criterion_02_iem_bound_and_aux_count():
    for m in _random_reduction_models():
        for bound in (1.0, 2.0, 3.0):
            red = iem_reduce(m, bound)
            if red.model.J:
                assert max(abs(v) for v in red.model.J.values()) <= bound
            per_edge = {}
            for info in red.aux_registry.values():
                key = tuple(info["edge"])
                per_edge[key] = per_edge.get(key, 0) + 1
            for (i, j), v in m.J.items():
                expected = math.ceil(abs(v) / bound) - 1 if abs(v) > bound else 0
                assert per_edge.get((i, j), 0) == expected
    red = iem_reduce(trivial_ising(512.0, rescaled=True), 1.0)
    assert len(red.aux_registry) == 511
    _report(2, "IEM bound and auxiliary count")


def test_criterion_03_bce_correctness():
    start = time.time()
    assert list(bce_encode(0, 191, 64).coefficients) == [1, 2, 4, 8, 16, 32, 64, 64]
    for D in range(1, 201):
        for mu in range(1, D + 1):
            enc = bce_encode(0, D, mu)
            assert sum(enc.coefficients) == D
            assert all(0 < a <= mu for a in enc.coefficients)
            if D <= 20:
                coeffs = np.array(enc.coefficients)
                bits = (np.arange(1 << len(coeffs))[:, None] >> np.arange(len(coeffs))) & 1
                assert set((bits @ coeffs).tolist()) == set(range(D + 1))
    assert time.time() - start < 10.0
    _report(3, "BCE correctness")


def test_criterion_04_perturbed_penalty_table():
    g = LinearConstraint({1: 1.0, 2: 1.0, 3: 1.0}, constant=1.0)
    for eps in (0.1, 0.3, 0.49):
        q = perturbed_penalty(g, 1.0, eps)
        assert q.energy({1: 0, 2: 0, 3: 0}) == pytest.approx(1 + 2 * eps, abs=1e-12)
        assert q.energy({1: 1, 2: 0, 3: 0}) == pytest.approx(0.0, abs=1e-12)
        assert q.energy({1: 1, 2: 1, 3: 0}) == pytest.approx(1 - 2 * eps, abs=1e-12)
    _report(4, "perturbed-penalty one-hot table")


def test_criterion_05_noise_precision_reproduction():
    start = time.time()
    oracle = assignment_set(TRIVIAL_GROUND_STATES)
    noise = NoiseModel(relative_sigma_h=0.03, relative_sigma_j=0.03, seed=11)
    p_opt = {}
    for J in (1, 4, 16, 64, 256, 512):
        samples = noisy_sample(trivial_ising(float(J)), DWAVE, noise, exact_inner(), 500)
        hits = sum(r.occurrences for r in samples if r.assignment.as_tuple() in oracle)
        p_opt[J] = hits / samples.total_occurrences
    assert p_opt[1] >= 0.95
    assert 0.4 <= p_opt[256] <= 0.6
    assert 0.4 <= p_opt[512] <= 0.6
    # the full curve degrades as the dynamic range grows
    values = [p_opt[J] for J in (1, 4, 16, 64, 256, 512)]
    assert all(b <= a + 0.05 for a, b in zip(values, values[1:]))
    assert time.time() - start < 10.0
    _report(5, f"noise-precision curve {dict((k, round(v, 3)) for k, v in p_opt.items())}")


def test_criterion_06_iem_rescue_under_embedding():
    start = time.time()
    logical = trivial_ising(512.0, rescaled=True)
    red = iem_reduce(logical, 2.0)
    grid = (2.0, 4.0, 6.0, 8.0)

    def best_p_opt(model, seed, postprocess=None):
        cfg = SweepConfig(
            grid,
            (0,),
            reads_per_cell=100,
            sampler={
                "kind": "noisy_sa",
                "sweeps": 500,
                "seed": seed,
                "noise": {"relative_sigma_h": 0.03, "relative_sigma_j": 0.03},
            },
        )
        rows = chain_strength_sweep(
            model,
            cfg,
            lambda m, s: chain_expand(m, 2, seed=s),
            oracle=TRIVIAL_GROUND_STATES,
            postprocess=postprocess,
        )
        return max(r.p_opt for r in rows)

    margins = []
    for attempt_seed in (0, 1, 2):  # 3-retry flake policy
        base = best_p_opt(logical, attempt_seed)
        rescued = best_p_opt(
            red.model,
            attempt_seed,
            postprocess=lambda s: project_samples(s, logical, red.aux_registry),
        )
        margins.append(rescued - base)
        if margins[-1] >= 0.3:
            break
    assert max(margins) >= 0.3, f"margins across attempts: {margins}"
    assert time.time() - start < 120.0
    _report(6, f"IEM rescue margin {round(max(margins), 3)}")


def test_criterion_07_embedding_algebra():
    lengths = (1, 2, 4)  # powers of two keep the energy identity bit-exact
    for idx in range(100):
        rng = np.random.default_rng(4000 + idx)
        n = int(rng.integers(2, 7))
        h = {i: float(rng.integers(-8, 9)) for i in range(1, n + 1)}
        J = {
            (i, j): float(rng.integers(-8, 9))
            for i in range(1, n + 1)
            for j in range(i + 1, n + 1)
            if rng.random() < 0.7
        }
        m = IsingModel(h, J)
        length = lengths[idx % 3]
        strength = float(rng.integers(1, 6))
        hw, emb = chain_expand(m, length, seed=idx)
        out = assign_coefficients(m, emb, hw, strength)
        for i, hi in m.h.items():
            assert sum(out.physical.h.get(k, 0.0) for k in emb.chain(i)) == pytest.approx(
                hi, abs=1e-9
            )
        for (i, j), jij in m.J.items():
            total = sum(
                v
                for (k, l), v in out.physical.J.items()
                if (k in emb.chain(i) and l in emb.chain(j))
                or (k in emb.chain(j) and l in emb.chain(i))
            )
            assert total == pytest.approx(jij, abs=1e-9)
        spins = {i: int(2 * rng.integers(0, 2) - 1) for i in m.variables}
        from annealprep import SpinAssignment

        st = SpinAssignment(spins)
        lift = chain_consistent_lift(st, emb)
        assert out.physical.energy(lift) == m.energy(st) - strength * len(
            out.intra_chain_edges
        )
    _report(7, "embedding sum conditions and energy identity")


def test_criterion_08_qap_penalty_reduction():
    start = time.time()
    inst = qap_parse((FIXTURES / "nug5.qap").read_text())
    assert inst.n * inst.n == 25
    optimum, _ = qap_optimum(inst)  # 120-permutation brute-force oracle
    assert optimum == 50.0

    def build(lam, eps):
        return qubo_to_ising(qap_to_qubo(inst, lam, eps))

    checker = qap_checker(inst)
    options = MetricOptions(objective_sense="min")
    sampler = make_sampler({"kind": "sa", "sweeps": 300, "seed": 17}, 400)

    def crossing(lambdas, eps):
        cells = penalty_grid_experiment(
            build, lambdas, [eps], sampler, checker=checker, options=options
        )
        qualifying = [c.penalty for c in cells if c.row.feasibility_rate >= 0.5]
        return (min(qualifying) if qualifying else None), cells

    lam_star, _ = crossing(list(np.geomspace(1.0, 64.0, 13)), 0.0)
    assert lam_star is not None
    fine = list(np.geomspace(0.5 * lam_star, 4.0 * lam_star, 13))
    lam_plain, cells_plain = crossing(fine, 0.0)
    lam_perturbed, _ = crossing(fine, 0.3)
    assert lam_plain is not None and lam_perturbed is not None
    assert lam_perturbed <= 0.8 * lam_plain, (lam_perturbed, lam_plain)
    best = min(
        c.row.best_objective for c in cells_plain if c.row.best_objective is not None
    )
    assert best == optimum  # SA attains the brute-force optimum at adequate lambda
    assert time.time() - start < 180.0
    _report(8, f"QAP penalty reduction {round(lam_perturbed / lam_plain, 3)}x")


def test_criterion_09_mkp_formulation_soundness():
    inst = mkp_parse((FIXTURES / "weing1_shape.mkp").read_text())
    assert (inst.n, inst.m) == (28, 2)
    qubo, encodings, registry = mkp_to_qubo(inst, lam=1.0, mu=256)
    rng = np.random.default_rng(77)
    feasible_seen = 0
    for _ in range(1000):
        vec = [int(b) for b in rng.integers(0, 2, inst.n)]
        feasible, objective = mkp_check(inst, vec)
        direct_feasible = all(
            sum(w * b for w, b in zip(row, vec)) <= cap
            for row, cap in zip(inst.weights, inst.capacities)
        )
        direct_objective = sum(p * b for p, b in zip(inst.profits, vec))
        assert feasible == direct_feasible
        assert objective == direct_objective
        if not feasible:
            continue
        feasible_seen += 1
        bits = {j + 1: vec[j] for j in range(inst.n)}
        for enc, row in zip(encodings, inst.weights):
            load = sum(w * b for w, b in zip(row, vec))
            bits.update(enc.bits_for(load))
        assert qubo.energy(bits) == -objective  # integer data, lam=1: exact
    assert feasible_seen > 0
    _report(9, f"MKP soundness over {feasible_seen} feasible draws")


def test_criterion_10_pegasus_estimator():
    assert pegasus_clique_estimate(180, 1.0).m == 16
    sizes = [pegasus_clique_estimate(n, 1.0).m for n in range(1, 1000)]
    assert all(a <= b for a, b in zip(sizes, sizes[1:]))
    for n, s_h in ((180, 8.0), (500, 3.0), (7, 1.5)):
        est = pegasus_clique_estimate(n, s_h)
        assert est.s_h_tilde_bound == s_h / est.m  # formula applied verbatim
        assert (est.chain_len_lo, est.chain_len_hi) == (est.m, est.m + 1)
    _report(10, "clique-embedding size estimator")


def test_criterion_11_sweep_determinism(tmp_path):
    model_path = tmp_path / "model.json"
    model_path.write_text(write_ising_json(trivial_ising(16.0, rescaled=True)))
    config = {
        "model": str(model_path),
        "chain_length": 2,
        "instance": "trivial16",
        "method": "iem",
        "param": "16",
        "oracle": True,
        "chain_strength_grid": [2.0, 8.0, 32.0],
        "embedding_seeds": [0, 1, 2],
        "reads_per_cell": 20,
        "sampler": {"kind": "noisy_sa", "sweeps": 200, "seed": 6,
                    "noise": {"relative_sigma_h": 0.03, "relative_sigma_j": 0.03}},
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert main(["sweep", "--config", str(cfg_path), "--out", str(first)]) == 0
    assert main(["sweep", "--config", str(cfg_path), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    _report(11, "byte-identical sweep reports")

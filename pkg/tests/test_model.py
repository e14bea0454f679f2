import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annealprep import (
    AcceptRanges,
    IsingModel,
    QuboModel,
    SpinAssignment,
    ground_states,
    ising_to_qubo,
    qubo_to_ising,
    rescale,
    scaling_factors,
)
from annealprep.model import (
    ParseError,
    parse_ising_json,
    parse_qubo_text,
    write_ising_json,
    write_qubo_text,
)

from conftest import assignment_set, brute_ground_states, random_ising

DWAVE = AcceptRanges.dwave_advantage()


class TestIsingModel:
    def test_energy_single_linear_term(self):
        m = IsingModel({7: 1.0})
        assert m.energy(SpinAssignment({7: -1})) == -1.0

    def test_energy_three_spin_chain(self):
        m = IsingModel({}, {(1, 2): 1.0, (2, 3): 1 / 512})
        e = m.energy(SpinAssignment({1: 1, 2: -1, 3: 1}))
        assert e == -1 - 1 / 512

    def test_energy_empty_model(self):
        assert IsingModel().energy(SpinAssignment({})) == 0.0

    def test_energy_missing_variable_names_it(self):
        m = IsingModel({3: 1.0}, {(1, 2): 1.0})
        with pytest.raises(ValueError, match="variable 3"):
            m.energy(SpinAssignment({1: 1, 2: 1}))

    def test_self_coupling_rejected(self):
        with pytest.raises(ValueError, match="self-coupling"):
            IsingModel({}, {(2, 2): 1.0})

    def test_duplicate_coupling_keys_are_summed(self):
        m = IsingModel({}, {(1, 2): 1.0, (2, 1): 0.5})
        assert m.J == {(1, 2): 1.5}

    def test_tiny_coefficients_dropped(self):
        m = IsingModel({1: 1e-13}, {(1, 2): 1.0, (2, 3): -1e-15})
        assert m.h == {}
        assert m.J == {(1, 2): 1.0}

    def test_spins_must_be_plus_minus_one(self):
        with pytest.raises(ValueError, match="must be -1 or \\+1"):
            SpinAssignment({1: 0})


class TestConversion:
    def test_linear_qubo_term(self):
        # c*x == (c/2)*s + c/2
        ising = qubo_to_ising(QuboModel({(1, 1): 3.0}))
        assert ising.h == {1: 1.5}
        assert ising.J == {}
        assert ising.offset == 1.5

    def test_quadratic_qubo_term(self):
        # c*x1*x2 == (c/4)(s1 s2 + s1 + s2 + 1)
        ising = qubo_to_ising(QuboModel({(1, 2): 2.0}))
        assert ising.J == {(1, 2): 0.5}
        assert ising.h == {1: 0.5, 2: 0.5}
        assert ising.offset == 0.5

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_energy_bijection_exhaustive(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        Q = {}
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                if rng.random() < 0.7:
                    Q[(i, j)] = float(rng.uniform(-5, 5))
        q = QuboModel(Q, offset=float(rng.uniform(-2, 2)))
        ising = qubo_to_ising(q)
        back = ising_to_qubo(ising)
        for bits in itertools.product((0, 1), repeat=n):
            x = dict(zip(range(1, n + 1), bits))
            s = SpinAssignment({i: 2 * b - 1 for i, b in x.items()})
            assert q.energy(x) == pytest.approx(ising.energy(s), abs=1e-9)
            assert back.energy(x) == pytest.approx(q.energy(x), abs=1e-9)

    def test_energy_bijection_ten_variables(self, rng):
        n = 10
        Q = {
            (i, j): float(rng.uniform(-5, 5))
            for i in range(1, n + 1)
            for j in range(i, n + 1)
            if rng.random() < 0.5
        }
        q = QuboModel(Q, offset=1.5)
        ising = qubo_to_ising(q)
        for bits in itertools.product((0, 1), repeat=n):
            x = dict(zip(range(1, n + 1), bits))
            s = SpinAssignment({i: 2 * b - 1 for i, b in x.items()})
            assert q.energy(x) == pytest.approx(ising.energy(s), abs=1e-9)


class TestScaling:
    def test_fields_against_both_bounds(self):
        m = IsingModel({1: 3.0, 2: -8.0})
        assert scaling_factors(m, DWAVE).s_h == 2.0

    def test_coupling_against_positive_bound(self):
        m = IsingModel({}, {(1, 2): 1.5})
        rep = scaling_factors(m, DWAVE)
        assert rep.s_j == 1.5
        assert rep.s_H == 1.5

    def test_inside_ranges_means_s_below_one(self):
        m = IsingModel({1: 2.0, 2: -3.0}, {(1, 2): -1.5})
        assert scaling_factors(m, DWAVE).s_H <= 1.0

    def test_dynamic_range(self):
        m = IsingModel({}, {(1, 2): 1.0, (2, 3): 1 / 512})
        rep = scaling_factors(m, DWAVE)
        assert rep.s_j == 1.0
        assert rep.dynamic_range_j == 512.0
        assert rep.dynamic_range_h == 0.0

    def test_rescale_divides_everything(self):
        m = IsingModel({1: 8.0}, {(1, 2): -1.0}, offset=4.0)
        r = rescale(m, DWAVE)
        assert r.h == {1: 4.0}
        assert r.J == {(1, 2): -0.5}
        assert r.offset == 2.0

    def test_rescale_never_magnifies(self):
        m = IsingModel({1: 0.5}, {(1, 2): -0.25})
        assert rescale(m, DWAVE) is m

    def test_rescale_preserves_argmin(self, rng):
        for n in [5] * 20 + [10] * 3:
            m = random_ising(rng, n, j_scale=8, h_scale=8)
            a = assignment_set(ground_states(m)[0])
            b = assignment_set(ground_states(rescale(m, DWAVE))[0])
            assert a == b

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_rescaled_model_fits_ranges(self, seed):
        m = random_ising(np.random.default_rng(seed), 4, j_scale=20, h_scale=20)
        rep = scaling_factors(rescale(m, DWAVE), DWAVE)
        assert rep.s_H <= 1 + 1e-12


class TestGroundStates:
    @pytest.mark.parametrize("J", [1.0, 4.5, 512.0])
    def test_three_spin_chain(self, J):
        m = IsingModel({}, {(1, 2): 1.0, (2, 3): 1.0 / J})
        states, energy = ground_states(m)
        assert assignment_set(states) == {
            ((1, 1), (2, -1), (3, 1)),
            ((1, -1), (2, 1), (3, -1)),
        }
        assert energy == pytest.approx(-1 - 1 / J)

    def test_single_spin(self):
        states, energy = ground_states(IsingModel({1: 1.0}))
        assert assignment_set(states) == {((1, -1),)}
        assert energy == -1.0

    def test_fully_degenerate_two_variables(self):
        states, energy = ground_states(IsingModel(), variables=[1, 2])
        assert len(states) == 4
        assert energy == 0.0

    def test_cap_enforced(self):
        m = IsingModel({i: 1.0 for i in range(25)})
        with pytest.raises(ValueError, match="enumeration cap"):
            ground_states(m)

    def test_agrees_with_scalar_oracle(self, rng):
        for _ in range(10):
            m = random_ising(rng, 5, integer=True)
            fast = ground_states(m)
            slow = brute_ground_states(m)
            assert assignment_set(fast[0]) == assignment_set(slow[0])
            assert fast[1] == slow[1]


class TestFileFormats:
    def test_qubo_text_round_trip(self):
        q = QuboModel({(1, 1): -2.5, (1, 3): 4.0, (2, 3): 0.125}, offset=7.5)
        text = write_qubo_text(q)
        assert text.splitlines()[0] == "3 3"
        assert parse_qubo_text(text) == q

    def test_qubo_text_comments_and_whitespace(self):
        text = "# a comment\n3 2\n\n1 1 2.0\n# another\n1 3 -1.0\n"
        q = parse_qubo_text(text)
        assert q.Q == {(1, 1): 2.0, (1, 3): -1.0}

    def test_qubo_text_bad_header(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_qubo_text("nonsense header\n")

    def test_qubo_text_wrong_count(self):
        with pytest.raises(ParseError, match="declares 2"):
            parse_qubo_text("2 2\n1 2 1.0\n")

    def test_qubo_text_bad_indices(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_qubo_text("2 1\n2 1 1.0\n")

    def test_ising_json_round_trip(self):
        m = IsingModel({1: 0.5, 9: -2.0}, {(1, 9): 1.25}, offset=-3.0)
        assert parse_ising_json(write_ising_json(m)) == m

    def test_ising_json_garbage(self):
        with pytest.raises(ParseError):
            parse_ising_json("{not json")

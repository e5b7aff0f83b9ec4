"""Exactness checks of the flower law against independent enumeration."""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

import floralperc.measure as M


def brute_trigger(petals):
    """Independent re-statement: 3 blue, 3 yellow, a contiguous blue pair."""
    blues = [p == M.BLUE for p in petals]
    if sum(blues) != 3:
        return False
    pairs = [(i, (i + 1) % 6) for i in range(6)]
    return any(blues[i] and blues[j] for i, j in pairs)


def all_petal_patterns():
    return [tuple(M.BLUE if (b >> j) & 1 else M.YELLOW for j in range(6))
            for b in range(64)]


def test_trigger_count_is_18():
    n = sum(1 for p in all_petal_patterns() if M.is_trigger(p))
    assert n == 18
    assert M.N_TRIGGER_PATTERNS == 18


def test_trigger_against_bruteforce():
    for p in all_petal_patterns():
        assert M.is_trigger(p) == brute_trigger(p)


def test_trigger_examples():
    B, Y = M.BLUE, M.YELLOW
    assert M.is_trigger((B, B, Y, B, Y, Y))
    assert not M.is_trigger((B, Y, B, Y, B, Y))
    assert not M.is_trigger((B, B, B, B, B, B))
    with pytest.raises(ValueError):
        M.is_trigger((B, B, Y, B, Y, M.UNDETERMINED))


def test_params_validation():
    M.ModelParams(0.35, 0.10)
    M.ModelParams.site_percolation()
    with pytest.raises(ValueError):
        M.ModelParams(0.2, 0.2)      # passes 2a+3s=1, fails a^2 >= 2s^2
    with pytest.raises(ValueError):
        M.ModelParams(0.3, 0.1)      # 2a+3s != 1
    with pytest.raises(ValueError):
        M.ModelParams(Fraction(1, 5), Fraction(1, 5))


def test_iris_distribution_rules():
    p = M.ModelParams(0.35, 0.10)
    B, Y = M.BLUE, M.YELLOW
    assert M.iris_distribution((B,) * 6, p) == (0.35, 0.35, 0.10, 0.10, 0.10)
    trig = (B, B, Y, B, Y, Y)
    assert M.iris_distribution(trig, p) == (0.5, 0.5, 0.0, 0.0, 0.0)
    s0 = M.ModelParams.site_percolation()
    for petals in all_petal_patterns():
        assert M.iris_distribution(petals, s0) == (0.5, 0.5, 0.0, 0.0, 0.0)


def test_flower_prob_examples():
    p = M.ModelParams(Fraction(7, 20), Fraction(1, 10))
    B, Y = M.BLUE, M.YELLOW
    assert M.flower_prob((B,) * 6, M.BLUE, p) == Fraction(7, 20) / 64
    trig = (B, B, Y, B, Y, Y)
    assert M.flower_prob(trig, M.SPLIT0, p) == 0
    total = sum(r[2] for r in M.enumerate_flower(p))
    assert total == 1


def test_enumeration_table_shape_and_mass():
    p = M.ModelParams(0.35, 0.10)
    table = M.enumerate_flower(p)
    assert len(table) == 320
    assert abs(sum(r[2] for r in table) - 1.0) < 1e-12


def test_unconditional_iris_marginal():
    # P(iris blue) = (trigger mass) * 1/2 + (rest) * a, enumerated directly
    p = M.ModelParams(Fraction(7, 20), Fraction(1, 10))
    fm = M.FlowerMeasure(p)
    partial = tuple([M.UNDETERMINED] * 7)
    law = dict(fm.conditional_law(partial, 0))
    expect = Fraction(18, 64) * Fraction(1, 2) + Fraction(46, 64) * Fraction(7, 20)
    assert law[M.BLUE] == expect
    assert law[M.YELLOW] == expect


def test_conditional_all_blue_petals():
    p = M.ModelParams(Fraction(7, 20), Fraction(1, 10))
    fm = M.FlowerMeasure(p)
    partial = (M.UNDETERMINED,) + (M.BLUE,) * 6
    law = dict(fm.conditional_law(partial, 0))
    assert law[M.BLUE] == Fraction(7, 20)
    assert law[M.SPLIT1] == Fraction(1, 10)


def test_conditional_s0_iris_independent():
    p = M.ModelParams.site_percolation()
    fm = M.FlowerMeasure(p)
    marg = dict(fm.conditional_law(tuple([M.UNDETERMINED] * 7), 0))
    for petals in all_petal_patterns()[::7]:
        law = dict(fm.conditional_law((M.UNDETERMINED,) + petals, 0))
        assert law == marg == {M.BLUE: 0.5, M.YELLOW: 0.5}


def test_zero_probability_states():
    # a split iris with triggered petals is the only zero-mass pattern; with
    # any petal still undetermined some completion is non-triggered, so
    # only fully determined partials can have zero mass
    p = M.ModelParams(0.35, 0.10)
    fm = M.FlowerMeasure(p)
    B, Y = M.BLUE, M.YELLOW
    trig = (B, B, Y, B, Y, Y)
    assert fm.partial_prob((M.SPLIT0,) + trig) == 0
    assert fm.partial_prob((M.SPLIT0,) + trig[:5] + (M.UNDETERMINED,)) > 0
    law = dict(fm.conditional_law((M.SPLIT0,) + trig[:5]
                                  + (M.UNDETERMINED,), 6))
    # the triggered completion is impossible given the split iris
    assert law == {B: 1.0}


def test_conditional_sampler_matches_law(grng):
    p = M.ModelParams(0.35, 0.10)
    fm = M.FlowerMeasure(p)
    partial = (M.UNDETERMINED, M.BLUE, M.UNDETERMINED, M.YELLOW,
               M.UNDETERMINED, M.BLUE, M.YELLOW)
    law = dict(fm.conditional_law(partial, 0))
    n = 200000
    counts = {}
    for _ in range(n):
        s = fm.sample_conditional(partial, 0, grng)
        counts[s] = counts.get(s, 0) + 1
    for state, prob in law.items():
        freq = counts.get(state, 0) / n
        se = np.sqrt(prob * (1 - prob) / n)
        assert abs(freq - prob) < 4 * se + 1e-9


def test_color_swap_symmetry_exact():
    p = M.ModelParams(Fraction(7, 20), Fraction(1, 10))
    for petals in all_petal_patterns():
        for iris in M.IRIS_STATES:
            sw_petals, sw_iris = M.swap_flower(petals, iris)
            assert M.flower_prob(petals, iris, p) == \
                M.flower_prob(sw_petals, sw_iris, p)


@given(st.integers(min_value=0, max_value=63),
       st.sampled_from(M.IRIS_STATES))
def test_swap_flower_is_involution(bits, iris):
    petals = tuple(M.BLUE if (bits >> j) & 1 else M.YELLOW for j in range(6))
    p2, i2 = M.swap_flower(*M.swap_flower(petals, iris))
    assert (p2, i2) == (petals, iris)


def test_split_edges_partition():
    for k, state in enumerate(M.SPLIT_STATES):
        blue_edges = {e for e in range(6) if M.edge_is_blue(state, e)}
        assert blue_edges == {(2 * k) % 6, (2 * k + 1) % 6, (2 * k + 2) % 6}
        m1, m2 = M.split_diagonal_vertices(state)
        assert (m2 - m1) % 6 == 3


def test_parse_param_grid():
    grid = M.parse_param_grid("0.35 0.10\n# comment\n0.5 0.0\n")
    assert len(grid) == 2
    with pytest.raises(ValueError, match="line 2"):
        M.parse_param_grid("0.35 0.10\n0.2 0.2\n")
    with pytest.raises(ValueError, match="line 1"):
        M.parse_param_grid("nonsense\n")

"""Tests for flag invariants, checked against independent brute-force oracles.

The oracles here recompute every invariant straight from permutation-sum
determinants (no shared code with the library's elimination routines), or
from the line-projection description of the double ratio.
"""

import itertools
import math
import random
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import shearlam.flags as fl
import shearlam.ratlin as rl


# ---------------------------------------------------------------- oracles

def perm_det(cols):
    """Determinant by the permutation-sum formula; independent oracle."""
    n = len(cols)
    total = Fr(0)
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = Fr(1)
        for j, i in enumerate(perm):
            term *= Fr(cols[j][i])
        total += sign * term
    return total


def oracle_bracket(E, a, F, b, G, c):
    return perm_det(E.subspace(a) + F.subspace(b) + G.subspace(c))


def oracle_triple(E, F, G, a, b, c):
    num = (oracle_bracket(E, a + 1, F, b, G, c - 1)
           * oracle_bracket(E, a, F, b - 1, G, c + 1)
           * oracle_bracket(E, a - 1, F, b + 1, G, c))
    den = (oracle_bracket(E, a - 1, F, b, G, c + 1)
           * oracle_bracket(E, a, F, b + 1, G, c - 1)
           * oracle_bracket(E, a + 1, F, b - 1, G, c))
    return num / den


def oracle_double_projection(E, F, G, H, a):
    """Double ratio via projections of g, h onto the lines E^(a) cap
    F^(n-a+1): completely independent route through the invariant."""
    n = E.n
    lines = []
    for k in range(1, n + 1):
        cols = E.subspace(k) + F.subspace(n - k + 1)
        rows = [[Fr(c[i]) for c in cols] for i in range(n)]
        null = rl.nullspace(rows)
        assert len(null) == 1
        coeff = null[0][:k]
        lines.append([sum(coeff[j] * cols[j][i] for j in range(k))
                      for i in range(n)])
    P = [[lines[k][i] for k in range(n)] for i in range(n)]
    gcoords = rl.solve(P, [Fr(x) for x in G.basis[0]])
    hcoords = rl.solve(P, [Fr(x) for x in H.basis[0]])
    return -(gcoords[a] / hcoords[a]) * (hcoords[a - 1] / gcoords[a - 1])


def random_flag(n, rng):
    while True:
        cols = [[Fr(rng.randint(-9, 9)) for _ in range(n)] for _ in range(n)]
        try:
            return fl.Flag(cols)
        except ValueError:
            continue


def random_generic_triple(n, rng):
    while True:
        E, F, G = (random_flag(n, rng) for _ in range(3))
        if fl.is_generic(fl.FlagTuple([E, F, G]), 3):
            return E, F, G


def random_generic_quadruple(n, rng):
    while True:
        flags = [random_flag(n, rng) for _ in range(4)]
        if fl.is_generic(fl.FlagTuple(flags), 4):
            return flags


# ---------------------------------------------------------- wedge_bracket

def test_bracket_identity_flag():
    E = fl.ascending_flag(4)
    assert fl.wedge_bracket(E, 4, E, 0, E, 0) == 1


def test_bracket_repeated_columns_vanishes():
    E = fl.ascending_flag(4)
    G = fl.veronese_flag(4, Fr(2))
    assert fl.wedge_bracket(E, 2, E, 1, G, 1) == 0


def test_bracket_matches_determinant_oracle():
    E = fl.ascending_flag(3)
    F = fl.descending_flag(3)
    G = fl.Flag([(1, 1, 1), (0, 1, 1), (0, 0, 1)])
    for (a, b, c) in [(1, 1, 1), (2, 1, 0), (0, 1, 2), (1, 0, 2)]:
        assert fl.wedge_bracket(E, a, F, b, G, c) == \
            oracle_bracket(E, a, F, b, G, c)


def test_bracket_random_against_oracle():
    rng = random.Random(11)
    for n in (3, 4, 5):
        E, F, G = (random_flag(n, rng) for _ in range(3))
        for a in range(n + 1):
            for b in range(n + 1 - a):
                c = n - a - b
                assert fl.wedge_bracket(E, a, F, b, G, c) == \
                    oracle_bracket(E, a, F, b, G, c)


# -------------------------------------------------------------- is_generic

def test_self_pair_not_generic():
    E = fl.ascending_flag(3)
    assert not fl.is_generic(fl.FlagTuple([E, E]), 2)


def test_standard_pair_generic():
    assert fl.is_generic(
        fl.FlagTuple([fl.ascending_flag(4), fl.descending_flag(4)]), 2)


def test_veronese_triple_generic():
    flags = [fl.veronese_flag(3, t) for t in (Fr(0), Fr(1), "inf")]
    assert fl.is_generic(fl.FlagTuple(flags), 3)
    for (a, b, c) in fl.theta_points(3):
        assert oracle_bracket(*sum(zip(flags, (a, b, c)), ())) != 0


# ------------------------------------------------------------ triple_ratio

def test_triple_ratio_veronese_is_one():
    for n in (3, 4, 5):
        flags = [fl.veronese_flag(n, t) for t in (Fr(0), Fr(1), Fr(3))]
        for (a, b, c) in fl.interior_points(n):
            assert fl.triple_ratio(*flags, a, b, c) == 1


def test_triple_ratio_symmetries_random():
    rng = random.Random(5)
    for n in (3, 4):
        for _ in range(8):
            E, F, G = random_generic_triple(n, rng)
            for (a, b, c) in fl.interior_points(n):
                t = fl.triple_ratio(E, F, G, a, b, c)
                assert t == fl.triple_ratio(F, G, E, b, c, a)
                assert t * fl.triple_ratio(F, E, G, b, a, c) == 1


def test_triple_ratio_against_oracle():
    rng = random.Random(7)
    E, F, G = random_generic_triple(3, rng)
    assert fl.triple_ratio(E, F, G, 1, 1, 1) == oracle_triple(E, F, G, 1, 1, 1)


def test_triple_ratio_invariant_under_gl():
    rng = random.Random(13)
    E, F, G = random_generic_triple(4, rng)
    while True:
        m = [[Fr(rng.randint(-5, 5)) for _ in range(4)] for _ in range(4)]
        if rl.det(m) != 0:
            break
    M = fl.ProjectiveMap(m)
    for (a, b, c) in fl.interior_points(4):
        assert fl.triple_ratio(E, F, G, a, b, c) == \
            fl.triple_ratio(M.apply(E), M.apply(F), M.apply(G), a, b, c)


def test_triple_ratio_rejects_nongeneric():
    E = fl.ascending_flag(3)
    with pytest.raises(fl.GenericityError):
        fl.triple_ratio(E, E, fl.descending_flag(3), 1, 1, 1)


# --------------------------------------------------------- quadruple_ratio

def test_quadruple_ratio_top_index_is_one():
    rng = random.Random(17)
    for n in (3, 4, 5):
        E, F, G = random_generic_triple(n, rng)
        assert fl.quadruple_ratio(E, F, G, n - 1) == 1


def test_quadruple_ratio_product_of_triples():
    rng = random.Random(19)
    for n in (3, 4, 5):
        E, F, G = random_generic_triple(n, rng)
        for a in range(1, n - 1):
            prod = Fr(1)
            for b in range(1, n - a):
                prod *= fl.triple_ratio(E, F, G, a, b, n - a - b)
            assert fl.quadruple_ratio(E, F, G, a) == prod


def test_quadruple_ratio_swap_inverts():
    rng = random.Random(23)
    E, F, G = random_generic_triple(4, rng)
    for a in range(1, 4):
        assert fl.quadruple_ratio(E, G, F, a) * \
            fl.quadruple_ratio(E, F, G, a) == 1


def test_quadruple_ratio_veronese_is_one():
    flags = [fl.veronese_flag(4, t) for t in (Fr(0), Fr(2), Fr(5))]
    for a in range(1, 4):
        assert fl.quadruple_ratio(*flags, a) == 1


# ------------------------------------------------------------ double_ratio

def test_double_ratio_equal_lines():
    E, F, G = random_generic_triple(3, random.Random(29))
    for a in (1, 2):
        assert fl.double_ratio(E, F, G, G, a) == -1


def test_double_ratio_identities():
    rng = random.Random(31)
    for n in (3, 4):
        E, F, G, H = random_generic_quadruple(n, rng)
        K = random_flag(n, rng)
        while not fl.is_generic(fl.FlagTuple([E, F, K]), 3):
            K = random_flag(n, rng)
        for a in range(1, n):
            d = fl.double_ratio(E, F, G, H, a)
            assert d * fl.double_ratio(E, F, H, G, a) == 1
            assert fl.double_ratio(F, E, G, H, a) * \
                fl.double_ratio(E, F, G, H, n - a) == 1
            assert fl.double_ratio(E, F, G, K, a) == \
                -d * fl.double_ratio(E, F, H, K, a)


def test_double_ratio_against_projection_oracle():
    rng = random.Random(37)
    for n in (3, 4):
        E, F, G, H = random_generic_quadruple(n, rng)
        for a in range(1, n):
            assert fl.double_ratio(E, F, G, H, a) == \
                oracle_double_projection(E, F, G, H, a)


def test_double_ratio_veronese_parameter_dependence():
    # flags at (inf, 0, -1, t): the projection oracle provides the value
    E = fl.veronese_flag(3, "inf")
    F = fl.veronese_flag(3, Fr(0))
    G = fl.veronese_flag(3, Fr(-1))
    for t in (Fr(1), Fr(2), Fr(5, 2)):
        H = fl.veronese_flag(3, t)
        for a in (1, 2):
            expected = oracle_double_projection(E, F, G, H, a)
            assert fl.double_ratio(E, F, G, H, a) == expected
            assert expected > 0


# -------------------------------------------- balanced functions, hexagons

def test_balanced_function_rejects_bad_line_sums():
    with pytest.raises(ValueError):
        fl.BalancedFunction(3, {(1, 1, 1): 1})


def test_wedge_invariant_trivial_and_hexagon():
    rng = random.Random(41)
    E, F, G = random_generic_triple(4, rng)
    zero = fl.BalancedFunction(4, {})
    assert fl.wedge_invariant(zero, E, F, G) == 1
    for (a, b, c) in fl.interior_points(4):
        phi = fl.hexagon_cycle(4, a, b, c)
        assert fl.wedge_invariant(phi, E, F, G) == \
            fl.triple_ratio(E, F, G, a, b, c)


def test_wedge_invariant_multiplicative():
    rng = random.Random(43)
    E, F, G = random_generic_triple(4, rng)
    pts = fl.interior_points(4)
    phi = fl.combine_hexagons(4, {pts[0]: 1, pts[1]: 1})
    assert fl.wedge_invariant(phi, E, F, G) == \
        fl.triple_ratio(E, F, G, *pts[0]) * fl.triple_ratio(E, F, G, *pts[1])


@given(st.integers(3, 6), st.data())
@settings(max_examples=40, deadline=None)
def test_hexagon_decomposition_round_trip(n, data):
    pts = fl.interior_points(n)
    coeffs = {p: data.draw(st.integers(-4, 4)) for p in pts}
    coeffs = {p: v for p, v in coeffs.items() if v}
    phi = fl.combine_hexagons(n, coeffs)
    assert fl.hexagon_decomposition(phi) == coeffs


def test_hexagon_decomposition_basis_element():
    phi = fl.hexagon_cycle(5, 2, 1, 2)
    assert fl.hexagon_decomposition(phi) == {(2, 1, 2): 1}
    assert fl.hexagon_decomposition(fl.BalancedFunction(5, {})) == {}


# ------------------------------------------------------- is_positive_tuple

def test_veronese_tuple_positive():
    for n in (3, 4):
        tup = fl.FlagTuple([fl.veronese_flag(n, Fr(x))
                            for x in (0, 1, 2, 3)])
        assert fl.is_positive_tuple(tup)


def test_repeated_flag_raises():
    E = fl.veronese_flag(3, Fr(0))
    tup = fl.FlagTuple([E, fl.veronese_flag(3, Fr(1)), E])
    with pytest.raises(fl.GenericityError):
        fl.is_positive_tuple(tup)


def test_swapped_tuple_not_positive():
    flags = [fl.veronese_flag(3, Fr(x)) for x in (0, 1, 2, 3)]
    flags[1], flags[2] = flags[2], flags[1]
    assert not fl.is_positive_tuple(fl.FlagTuple(flags))


# ------------------------------------------- realize_triple_from_ratios

def test_realize_definitional_round_trip():
    E, F, G = fl.realize_triple_from_ratios(3, {(1, 1, 1): Fr(2)})
    assert fl.triple_ratio(E, F, G, 1, 1, 1) == 2


def test_realize_all_ones_matches_veronese():
    for n in (3, 4):
        ratios = {p: Fr(1) for p in fl.interior_points(n)}
        E, F, G = fl.realize_triple_from_ratios(n, ratios)
        for p in fl.interior_points(n):
            assert fl.triple_ratio(E, F, G, *p) == 1


@given(st.sampled_from([3, 4, 5]), st.data())
@settings(max_examples=30, deadline=None)
def test_realize_random_round_trip(n, data):
    ratios = {}
    for p in fl.interior_points(n):
        num = data.draw(st.integers(1, 12))
        den = data.draw(st.integers(1, 12))
        sign = data.draw(st.sampled_from([1, -1]))
        ratios[p] = Fr(sign * num, den)
    E, F, G = fl.realize_triple_from_ratios(n, ratios)
    for p in fl.interior_points(n):
        assert fl.triple_ratio(E, F, G, *p) == ratios[p]


def test_realize_rejects_zero_ratio():
    with pytest.raises(ValueError):
        fl.realize_triple_from_ratios(3, {(1, 1, 1): Fr(0)})


# -------------------------------------------------- veronese / irreducible

def test_veronese_endpoints():
    assert fl.veronese_flag(4, Fr(0)) == fl.ascending_flag(4)
    assert fl.veronese_flag(4, "inf") == fl.descending_flag(4)


def test_veronese_at_one():
    G = fl.veronese_flag(3, Fr(1))
    assert G == fl.Flag([(1, 1, 1), (0, 1, 2), (0, 0, 1)])


def test_irreducible_rep_identity_and_diagonal():
    n = 4
    ident = fl.irreducible_rep([[Fr(1), Fr(0)], [Fr(0), Fr(1)]], n)
    assert ident.projectively_equal(fl.identity_map(n))
    lam = Fr(3)
    D = fl.irreducible_rep([[lam, Fr(0)], [Fr(0), 1 / lam]], n)
    diag = sorted(D.matrix[k][k] for k in range(n))
    assert diag == sorted(lam ** (2 * k - (n - 1)) for k in range(n))


def test_irreducible_rep_functorial_and_inverse():
    rng = random.Random(47)
    for _ in range(5):
        a, b, c = (Fr(rng.randint(-3, 3)) for _ in range(3))
        # complete to determinant 1
        if a == 0:
            a = Fr(1)
        d = (1 + b * c) / a
        A = [[a, b], [c, d]]
        Ai = [[d, -b], [-c, a]]
        rA = fl.irreducible_rep(A, 4)
        rAi = fl.irreducible_rep(Ai, 4)
        assert (rA @ rAi).projectively_equal(fl.identity_map(4))


def test_irreducible_rep_intertwines_veronese():
    A = [[Fr(2), Fr(1)], [Fr(1), Fr(1)]]
    rA = fl.irreducible_rep(A, 5)
    for t in (Fr(0), Fr(1, 3), Fr(-2)):
        img = (A[0][0] * t + A[0][1]) / (A[1][0] * t + A[1][1])
        assert rA.apply(fl.veronese_flag(5, t)) == fl.veronese_flag(5, img)
    assert rA.apply(fl.veronese_flag(5, "inf")) == fl.veronese_flag(5, Fr(2))


def test_irreducible_rep_rejects_non_unimodular():
    with pytest.raises(ValueError):
        fl.irreducible_rep([[Fr(2), Fr(0)], [Fr(0), Fr(2)]], 3)


# -------------------------------------------------------- normalize_triple

def test_normalize_self_reference():
    E0 = fl.veronese_flag(3, "inf")
    F0 = fl.veronese_flag(3, Fr(0))
    G0 = fl.veronese_flag(3, Fr(1))
    M, Gi = fl.normalize_triple(E0, F0, G0, E0, F0, G0)
    for a in (1, 2):
        assert fl.double_ratio(E0, F0, G0, Gi, a) == 1
    assert M.apply(E0) == E0 and M.apply(F0) == F0


def test_normalize_output_invariant_under_projective_action():
    rng = random.Random(53)
    E, F, G = random_generic_triple(3, rng)
    E0 = fl.veronese_flag(3, "inf")
    F0 = fl.veronese_flag(3, Fr(0))
    G0 = fl.veronese_flag(3, Fr(1))
    _, Gi = fl.normalize_triple(E, F, G, E0, F0, G0)
    while True:
        m = [[Fr(rng.randint(-5, 5)) for _ in range(3)] for _ in range(3)]
        if rl.det(m) != 0:
            break
    psi = fl.ProjectiveMap(m)
    _, Gi2 = fl.normalize_triple(psi.apply(E), psi.apply(F), psi.apply(G),
                                 E0, F0, G0)
    assert Gi == Gi2
    for a in (1, 2):
        assert fl.double_ratio(E0, F0, G0, Gi, a) == 1


# --------------------------------------------------------------- theta_map

def test_theta_map_zero_is_identity():
    E0 = fl.ascending_flag(3)
    F0 = fl.descending_flag(3)
    assert fl.theta_map([0, 0], E0, F0).projectively_equal(fl.identity_map(3))


def test_theta_map_unimodular_and_eigenvalues():
    E0 = fl.veronese_flag(4, "inf")
    F0 = fl.veronese_flag(4, Fr(0))
    t = [0.3, -0.7, 1.1]
    M = fl.theta_map(t, E0, F0).as_array()
    M = M / np.linalg.det(M) ** (1.0 / 4)  # unimodular representative
    eig = sorted(np.linalg.eigvals(M).real)
    u = [0.0]
    for x in t:
        u.append(u[-1] - x)
    u = np.array(u) - np.mean(u)
    assert np.allclose(eig, sorted(np.exp(u)), atol=1e-9)


def test_theta_map_n2_diagonal():
    E0 = fl.ascending_flag(2)
    F0 = fl.descending_flag(2)
    s = 0.8
    M = fl.theta_map([s], E0, F0).as_array()
    M = M / np.linalg.det(M) ** 0.5
    assert np.allclose(M, np.diag([math.exp(s / 2), math.exp(-s / 2)]),
                       atol=1e-12)


# ---------------------------------------------------- elementary_slithering

def test_slithering_same_flag_is_identity():
    E = fl.veronese_flag(3, "inf")
    G = fl.veronese_flag(3, Fr(1))
    assert fl.elementary_slithering(E, G, G).projectively_equal(
        fl.identity_map(3))


def test_slithering_determinant_and_flag_transport():
    rng = random.Random(59)
    for n in (3, 4):
        E, Fg, Fgp = random_generic_triple(n, rng)
        S = fl.elementary_slithering(E, Fg, Fgp)
        assert rl.det([list(r) for r in S.matrix]) == 1
        assert S.apply(Fgp) == Fg


def test_slithering_unipotent_in_adapted_basis():
    rng = random.Random(61)
    n = 4
    E, Fg, Fgp = random_generic_triple(n, rng)
    S = fl.elementary_slithering(E, Fg, Fgp)
    B = [[Fr(E.basis[j][i]) for j in range(n)] for i in range(n)]
    conj = rl.mat_mul(rl.inverse(B),
                      rl.mat_mul([list(r) for r in S.matrix], B))
    for i in range(n):
        assert conj[i][i] == 1
        for j in range(i):
            assert conj[i][j] == 0

from fractions import Fraction

import pytest

from tauforge.derive import (
    ExpSum,
    derive_operator,
    exp_product,
    orbit_sum_to_tau,
    reduce_exp_sum,
)
from tauforge.exactpoly import MultiPoly, NuLinear
from tauforge.oracle import verify_tables
from tauforge.rootsys import _orbit_elements, build_system, weyl_orbit

A1 = build_system("A1")
A2 = build_system("A2")
G2 = build_system("G2")


def tau_exp(sysr, a):
    return ExpSum.orbit(weyl_orbit(sysr, a).elements)


def expand(sysr, poly):
    """Evaluate a tau polynomial back into an exponential sum (nu-free)."""
    taus = [tau_exp(sysr, a) for a in range(1, sysr.rank + 1)]
    total = ExpSum()
    for exp, coef in poly.terms.items():
        assert coef.c1 == 0
        term = ExpSum({(Fraction(0),) * sysr.ambient_dim: coef.c0})
        for t, p in zip(taus, exp):
            for _ in range(p):
                term = exp_product(term, t)
        total = total - term.scaled(-1)
    return total


def test_exp_product_squares_the_a1_generator():
    t = tau_exp(A1, 1)
    sq = exp_product(t, t)
    w = A1.fundamental_weights[0]
    two_w = tuple(2 * c for c in w)
    # m_w^2 = m_2w + 2
    assert sq.terms[two_w] == 1
    assert sq.terms[(Fraction(0), Fraction(0))] == 2


def test_exp_product_commutes():
    s = tau_exp(G2, 1)
    t = tau_exp(G2, 2)
    assert exp_product(s, t) == exp_product(t, s)


def test_fundamental_orbit_sums_are_the_variables():
    for sysr in (A1, A2, G2):
        for a in range(1, sysr.rank + 1):
            got = orbit_sum_to_tau(sysr, sysr.fundamental_weights[a - 1])
            assert got.poly == MultiPoly.variable(sysr.rank, a)
    zero = (Fraction(0),) * A2.ambient_dim
    assert orbit_sum_to_tau(A2, zero).poly == MultiPoly.constant(2, 1)


def test_a1_double_weight_reduction():
    w = A1.fundamental_weights[0]
    got = orbit_sum_to_tau(A1, tuple(2 * c for c in w)).poly
    t = MultiPoly.variable(1, 1)
    assert got == t * t - MultiPoly.constant(1, 2)


@pytest.mark.parametrize("sysr,coords", [(A2, (2, 1)), (G2, (1, 1)), (G2, (0, 2))])
def test_reduction_round_trips_through_expansion(sysr, coords):
    lam = tuple(
        sum(p * w[k] for p, w in zip(coords, sysr.fundamental_weights))
        for k in range(sysr.ambient_dim)
    )
    reduced = orbit_sum_to_tau(sysr, lam)
    back = expand(sysr, reduced.poly)
    assert back == ExpSum.orbit(_orbit_elements(lam, sysr.simple_roots))


def test_reduce_exp_sum_inverts_expand():
    t1, t2 = tau_exp(G2, 1), tau_exp(G2, 2)
    s = exp_product(t1, t2)
    poly = reduce_exp_sum(G2, s)
    assert poly == MultiPoly.variable(2, 1) * MultiPoly.variable(2, 2)


def test_non_invariant_input_is_rejected():
    # e^{w_1} alone is not Weyl invariant; after removing the peak orbit a
    # non-dominant residue remains
    s = ExpSum({tuple(A2.fundamental_weights[0]): Fraction(1, 2)})
    bad = s - ExpSum.orbit(_orbit_elements(
        tuple(A2.fundamental_weights[0]), A2.simple_roots
    )).scaled(Fraction(1, 2))
    assert not bad.is_zero()
    with pytest.raises(ValueError):
        reduce_exp_sum(A2, ExpSum({next(iter(bad.terms)): Fraction(1)}))


def test_weights_outside_the_cone_are_rejected():
    half = tuple(Fraction(c, 2) for c in A2.fundamental_weights[0])
    with pytest.raises(ValueError):
        orbit_sum_to_tau(A2, half)


def test_rank_limit():
    with pytest.raises(ValueError):
        derive_operator(build_system("E7"))


def test_derived_a1_closed_form():
    op = derive_operator(A1)
    t = MultiPoly.variable(1, 1)
    assert op.a_entry(1, 1) == MultiPoly.constant(1, 2) - t * t.scale(Fraction(1, 2))
    assert op.b_entry(1) == t * MultiPoly.constant(
        1, NuLinear.of(Fraction(-1, 2), -1)
    )
    assert op.variant == "derived"
    assert op.violations == ()


def test_derived_a2_leading_terms():
    op = derive_operator(A2)
    t1 = MultiPoly.variable(2, 1)
    t2 = MultiPoly.variable(2, 2)
    assert op.a_entry(1, 1) == t2.scale(2) - (t1 * t1).scale(Fraction(2, 3))
    assert op.a_entry(1, 2) == MultiPoly.constant(2, 3) - (t1 * t2).scale(
        Fraction(1, 3)
    )
    assert op.b_entry(1) == t1 * MultiPoly.constant(
        2, NuLinear.of(Fraction(-2, 3), -2)
    )


@pytest.mark.parametrize("sysr", [A2, G2])
def test_derived_tables_match_the_oracle(sysr):
    op = derive_operator(sysr)
    assert op.violations == ()
    rep = verify_tables(op, samples=6, seed=7, tol=1e-10, precision="hp")
    assert rep["all_pass"]


def test_derived_a_entries_are_symmetric_and_nu_free():
    op = derive_operator(G2)
    for i in range(1, 3):
        for j in range(1, 3):
            assert op.a_entry(i, j) == op.a_entry(j, i)
            assert op.a_entry(i, j).is_nu_free()

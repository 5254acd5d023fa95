from fractions import Fraction

import pytest

from tauforge.exactpoly import MultiPoly, NuLinear
from tauforge.operator import (
    E7_CV,
    WP_PARAM_NAMES,
    apply,
    e7_operator,
    enumerate_flag_basis,
    exact_det,
    flag_degree_check,
    flag_matrix,
    operator_to_json,
    spectrum,
    stored_data_report,
    weighted_projective_check,
)
from tauforge.rootsys import build_system


def test_variants_load_and_are_checksummed():
    raw = e7_operator("raw")
    can = e7_operator("canonical")
    assert raw.variant == "raw" and can.variant == "canonical"
    assert raw.cv == E7_CV == can.cv


def test_a_is_symmetric_and_nu_free():
    for variant in ("raw", "canonical"):
        op = e7_operator(variant)
        for i in range(1, 8):
            for j in range(1, 8):
                assert op.a_entry(i, j) == op.a_entry(j, i)
                assert op.a_entry(i, j).is_nu_free()


def test_leading_law_report():
    # the stored tables violate the leading law in exactly one place
    assert stored_data_report(e7_operator("raw")) == (
        "A17: coefficient of tau_1tau_7 is 0, leading law needs -3",
    )
    assert stored_data_report(e7_operator("canonical")) == ()


def test_leading_coefficients_match_weight_products():
    op = e7_operator("canonical")
    sysr = build_system("E7")
    w = [sysr.y_rep(v) for v in sysr.fundamental_weights]
    for i in range(1, 8):
        for j in range(i, 8):
            exp = tuple(
                (1 if k in (i - 1, j - 1) else 0) + (1 if i == j == k + 1 else 0)
                for k in range(7)
            )
            coef = op.a_entry(i, j).terms.get(exp, NuLinear())
            assert coef.c1 == 0
            assert coef.c0 == -sysr.dot_y(w[i - 1], w[j - 1])


def test_apply_to_constants_and_tau1():
    raw = e7_operator("raw")
    one = MultiPoly.constant(7, 1)
    assert apply(raw, one).is_zero()
    t1 = MultiPoly.variable(7, 1)
    assert apply(raw, t1) == t1 * MultiPoly.constant(
        7, NuLinear.of(Fraction(-3, 2), Fraction(27, 2))
    )
    can = e7_operator("canonical")
    assert apply(can, t1) == t1 * MultiPoly.constant(
        7, NuLinear.of(Fraction(-3, 2), Fraction(-27))
    )


def test_flag_dimensions():
    dims = [enumerate_flag_basis(E7_CV, n, kind="E7").dim for n in range(7)]
    assert dims == [1, 2, 6, 12, 25, 44, 79]


def test_flag_basis_grades_are_sorted_and_bounded():
    basis = enumerate_flag_basis(E7_CV, 4, kind="E7")
    assert list(basis.grades) == sorted(basis.grades)
    assert all(g <= 4 for g in basis.grades)
    for mono, grade in zip(basis.monomials, basis.grades):
        assert sum(c * p for c, p in zip(E7_CV, mono)) == grade


def test_flag_degree_bounds_hold_for_both_variants():
    assert flag_degree_check(e7_operator("raw"))["ok"]
    assert flag_degree_check(e7_operator("canonical"))["ok"]


def test_flag_matrix_small():
    mat = flag_matrix(e7_operator("raw"), 1, Fraction(1, 3))
    assert mat == [[0, 0], [0, 3]]


def test_spectrum_on_the_two_smallest_flags():
    s = spectrum(e7_operator("raw"), 1)
    assert s.certificate == "dominance-triangular"
    assert s.eigenvalues == (
        NuLinear.of(0),
        NuLinear.of(Fraction(-3, 2), Fraction(27, 2)),
    )
    c = spectrum(e7_operator("canonical"), 1)
    assert c.eigenvalues == (
        NuLinear.of(0),
        NuLinear.of(Fraction(-3, 2), Fraction(-27)),
    )
    assert c.at(Fraction(1, 2)) == [0, Fraction(-3, 2) - Fraction(27, 2)]


def test_free_spectrum_matches_weight_norms():
    # at nu = 0 the eigenvalue on the monomial lambda-flag is -(lambda, lambda)
    sysr = build_system("E7")
    w = [sysr.y_rep(v) for v in sysr.fundamental_weights]
    s = spectrum(e7_operator("raw"), 3)
    got = sorted(s.at(0))
    expected = []
    for mono in s.basis.monomials:
        lam = tuple(
            sum(p * w[a][k] for a, p in enumerate(mono)) for k in range(7)
        )
        expected.append(-sysr.dot_y(lam, lam))
    assert got == sorted(expected)


def test_wp_invariance_sequential_round_trip():
    params = {k: Fraction(0) for k in WP_PARAM_NAMES}
    params.update(
        {"a2": Fraction(3, 2), "b3_2": Fraction(-1), "c7_1": Fraction(2, 5)}
    )
    rep = weighted_projective_check(params, 5, mode="sequential")
    assert rep["ok"]
    assert rep["det"] == "1"
    assert rep["unit_triangular_lines"]


def test_wp_simultaneous_can_be_singular():
    # applying all lines at once is not a composition of transvections
    params = {k: Fraction(0) for k in WP_PARAM_NAMES}
    params["b2_1"] = Fraction(1)
    params["b3_1"] = Fraction(1)
    rep = weighted_projective_check(params, 6, mode="simultaneous")
    assert rep["det"] == "0"
    assert not rep["ok"]


def test_wp_rejects_bad_input():
    with pytest.raises(ValueError):
        weighted_projective_check({"a2": 1}, 3)
    with pytest.raises(ValueError):
        weighted_projective_check([0] * 30, 3)
    params = {k: Fraction(0) for k in WP_PARAM_NAMES}
    with pytest.raises(ValueError):
        weighted_projective_check(params, 3, mode="diagonal")


def test_exact_det():
    assert exact_det([[Fraction(2), Fraction(1)], [Fraction(4), Fraction(3)]]) == 2
    assert exact_det([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]) == 0


def test_operator_json_round_trip():
    op = e7_operator("raw")
    payload = operator_to_json(op)
    assert payload["system"] == "E7"
    rebuilt = MultiPoly.from_terms(7, payload["A"][0][0])
    assert rebuilt == op.a_entry(1, 1)
    rebuilt_b = MultiPoly.from_terms(7, payload["B"][6])
    assert rebuilt_b == op.b_entry(7)
    assert len(payload["checksum"]) == 64
    assert operator_to_json(op) == payload

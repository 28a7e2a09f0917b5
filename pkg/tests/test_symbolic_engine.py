from fractions import Fraction

import pytest

from suspcond.errors import IndexCollision, NonSolvable, SeriesFailure, ValidationError
from suspcond.symbolic import (
    Add, CSym, Const, Coord, Mul, Norm, Pow, Pt, R0, Reindex, Sum, X, ZSym, canonical_form,
    conductivity_system, expand, FunctionalSystem, is_normal, procedure_u, reference_constant,
    reference_u, rename, same_canonical, series_truncate, simplify, successive_approximation,
    to_text,
)
from suspcond.symbolic.approx import _solve_linear, merge_alpha
from suspcond.symbolic.expr import contains, depth_of_sums, free_indices
from suspcond.symbolic.series import r0_orders

f = lambda i: Coord(Pt(i), 1)  # noqa: E731
g = lambda i: Pow(Norm(X(), Pt(i)), -1)  # noqa: E731


# ------------------------------------------------------------------ Rules 1-4

def test_rule1_distributes_over_addition():
    e = simplify(Sum(Add((f(1), g(1))), [1]))
    assert e == simplify(Add((Sum(f(1), [1]), Sum(g(1), [1]))))


def test_rule2_pulls_factor_inside():
    e = simplify(Mul((f(1), Sum(g(2), [2]))))
    assert isinstance(e, Sum) and e.indices == (2,)
    assert e == simplify(Sum(Mul((f(1), g(2))), [2]))


def test_rule2_detects_capture():
    with pytest.raises(IndexCollision):
        simplify(Mul((f(2), Sum(g(2), [2]))))


def test_rule3_flattens_nested_sums():
    e = simplify(Sum(Sum(Mul((f(1), g(2))), [2]), [1]))
    assert isinstance(e, Sum) and set(e.indices) == {1, 2}
    assert depth_of_sums(e) == 1


def test_rule3_collision():
    with pytest.raises(IndexCollision):
        simplify(Sum(Sum(f(1), [1]), [1]))


def test_rule4_zero_sum():
    assert simplify(Sum(Const(0), [1])) == Const(0)
    assert simplify(Sum(Mul((Const(0), f(1))), [1])) == Const(0)


def test_simplify_idempotent_on_corpus():
    corpus = [
        successive_approximation(conductivity_system(), q, order=q) for q in range(4)
    ] + [procedure_u(3), reference_u(6), Sum(Add((f(1), Mul((Const(2), g(1))))), [1])]
    for e in corpus:
        once = simplify(e)
        assert simplify(once) == once
        assert is_normal(once)


def test_constant_multiple_of_sum_is_distributed():
    e = simplify(Mul((Const(-1), Add((Sum(f(1), [1]), Sum(g(1), [1]))))))
    assert isinstance(e, Add) and all(isinstance(t, Sum) for t in e.args)


# ------------------------------------------------------------------ Rules 5-6

def test_expand_then_truncate_polynomial_body():
    body = Pow(Add((R0(), Pow(R0(), 2))), 3)
    e = series_truncate(expand(Sum(body, [1])), 4)
    want = simplify(Add((Sum(Pow(R0(), 3), [1]), Sum(Mul((Const(3), Pow(R0(), 4))), [1]))))
    assert e == want


def test_truncation_nests():
    e = successive_approximation(conductivity_system(), 4)
    assert series_truncate(series_truncate(e, 6), 4) == series_truncate(e, 4)


def test_truncated_recurrence_degree_profile():
    e = successive_approximation(conductivity_system(), 6, order=6)
    assert r0_orders(e) == {0, 1, 2, 3, 4, 5, 6}


def test_truncating_each_step_equals_truncating_at_end():
    sys_ = conductivity_system()
    for q in (2, 3):
        assert series_truncate(successive_approximation(sys_, q), q) == successive_approximation(sys_, q, order=q)


def test_non_analytic_power_guard():
    with pytest.raises(SeriesFailure):
        series_truncate(Sum(Pow(R0(), Fraction(1, 2)), [1]), 3)


# ------------------------------------------------------------------ recurrence

def test_recurrence_base_case():
    e = successive_approximation(conductivity_system(), 0)
    assert e == simplify(Add((Mul((Const(-1), CSym(0))), Coord(X(), "j"))))


def test_recurrence_first_iterate():
    e = successive_approximation(conductivity_system(), 1, order=1)
    kernel = Mul((Const(-1), R0(), Pow(Norm(X(), Pt(0)), -1)))
    want = Add((
        Mul((Const(-1), CSym(1))), Coord(X(), "j"),
        Sum(Mul((kernel, Add((Coord(Pt(0), "j"), Mul((Const(-1), CSym(0))))))), [0], [(0, 1)]),
    ))
    assert e == expand(want)


def test_generic_sign_convention():
    e = successive_approximation(FunctionalSystem(), 0)
    assert e == simplify(Add((CSym(0), Coord(X(), "j"))))


def test_no_nesting_through_order_six():
    for q in range(7):
        assert is_normal(successive_approximation(conductivity_system(), q, order=q))


def test_negative_q_rejected():
    with pytest.raises(ValidationError):
        successive_approximation(conductivity_system(), -1)


# ------------------------------------------------------------------ procedure u(q)

def test_reindex_shifts_to_negative_indices():
    e = Add((ZSym(2), Coord(Pt(2), "j"), Sum(f(1), [1], [(1, 2)])))
    r = Reindex(e, 3, 0)
    assert ZSym(-1) in r.args and Coord(Pt(-1), "j") in r.args
    assert free_indices(r) == {-1}


def test_constants_at_order_three():
    _, z = procedure_u(3, return_constants=True)
    assert same_canonical(z, reference_constant(3), 3)


def test_procedure_u3_matches_reference():
    assert same_canonical(procedure_u(3), reference_u(3), 3)


def test_procedure_u6_matches_reference():
    assert same_canonical(procedure_u(6), reference_u(6), 6)


def test_procedure_output_free_of_constants():
    for q in (1, 2, 4, 5):
        e = procedure_u(q)
        assert not contains(e, lambda n: isinstance(n, (CSym, ZSym)))
        assert is_normal(e)


def test_orders_present_in_u6():
    assert r0_orders(procedure_u(6)) == {0, 3, 6}


def test_procedure_range():
    for q in (0, 7):
        with pytest.raises(ValidationError):
            procedure_u(q)


def test_numeric_axis():
    e = procedure_u(3, axis=2)
    assert "_2" in to_text(e) and "_j" not in to_text(e)


def test_solve_linear_guard():
    with pytest.raises(NonSolvable):
        _solve_linear(Mul((ZSym(1), ZSym(1))), ZSym(1))
    with pytest.raises(NonSolvable):
        _solve_linear(f(1), ZSym(1))


def test_canonical_form_ignores_index_names():
    a = Sum(Mul((f(1), g(1))), [1], [(1, 3)])
    b = rename(a, {1: 7})
    assert canonical_form(a, 3) == canonical_form(b, 3)
    merged = merge_alpha(Add((a, b)), 3)
    assert isinstance(merged, Sum) and merged.indices == (2,)
    assert same_canonical(merged, Mul((Const(2), a)), 3)

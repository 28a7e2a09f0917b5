import math

import numpy as np
import pytest

from suspcond.errors import DomainError, NoConvergence, UnboundSymbol, ValidationError
from suspcond.symbolic import (
    CSym, Coord, Mul, Norm, Pow, Pt, R0, Sum, X, procedure_u, reference_constant,
)
from suspcond.symbolic.numeric import gradient_formula, numeric_eval, numeric_gradient
from suspcond.symbolic.oracle import (
    fixed_point_oracle, order_estimates, random_cluster, real_harmonics, sphere_grid,
)


@pytest.fixture(scope="module")
def u3():
    return procedure_u(3)


@pytest.fixture(scope="module")
def u6():
    return procedure_u(6)


# ------------------------------------------------------------------ numeric_eval

def test_ordered_pair_sum():
    c = np.array([[0.0, 0, 0], [0.7, 0, 0]])
    e = Sum(Norm(Pt(1), Pt(2)), [1, 2])
    assert numeric_eval(e, c) == pytest.approx(1.4)
    assert numeric_eval(Sum(Norm(Pt(1), Pt(2)), [1, 2], [(1, 2)]), c) == pytest.approx(1.4)


def test_empty_admissible_set():
    e = Sum(Coord(Pt(0), 1), [0], [(0, 1)])
    assert numeric_eval(e, [[0.3, 0, 0]], anchor=(1, 0)) == 0.0


def test_chain_exclusions():
    c = np.arange(9, dtype=float).reshape(3, 3)
    e = Sum(Coord(Pt(0), 1), [1, 0], [(1, 2), (0, 1)])
    # k=0: m in {1,2}, s != m: 2 choices each
    got = numeric_eval(e, c, anchor=(2, 0))
    want = sum(c[s, 0] for m in (1, 2) for s in range(3) if s != m)
    assert got == pytest.approx(want)


def test_unbound_symbols():
    c = [[0.0, 0, 0], [0.5, 0, 0]]
    with pytest.raises(UnboundSymbol):
        numeric_eval(CSym(1), c)
    with pytest.raises(UnboundSymbol):
        numeric_eval(Coord(Pt(3), 1), c)
    with pytest.raises(UnboundSymbol):
        numeric_eval(Coord(X(), 1), c)
    with pytest.raises(UnboundSymbol):
        numeric_eval(Sum(Coord(Pt(0), 1), [0], [(0, 5)]), c)
    with pytest.raises(ValidationError):
        numeric_eval(Coord(Pt(1), 1), c, anchor=(1, 4))


def test_vectorized_matches_pointwise(u6):
    c = random_cluster(3, 4)
    pts = c[0] + 0.05 * np.array([[1.0, 0, 0], [0, 0.6, 0.8], [-0.6, 0, 0.8]])
    vec = numeric_eval(u6, c, pts, anchor=(6, 0), r0=0.05)
    one = [numeric_eval(u6, c, p, anchor=(6, 0), r0=0.05) for p in pts]
    assert np.allclose(vec, one, rtol=1e-14, atol=1e-17)


def test_u_vanishes_at_anchor(u3, u6):
    c = random_cluster(4, 9)
    for r0 in (0.02, 0.04, 0.08):
        for e, q in ((u3, 3), (u6, 6)):
            for k in range(4):
                assert abs(numeric_eval(e, c, c[k], anchor=(q, k), r0=r0)) < 1e-15


def test_constant_expression_evaluates():
    c = np.array([[0.0, 0, 0], [1.0, 0, 0]])
    z = numeric_eval(reference_constant(3), c, anchor=(3, 0), r0=0.1, j=1)
    # z_0 = r0^3 (a_01 - a_11) / |a_0 - a_1|^3
    assert z == pytest.approx(-1e-3)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_gradient_matches_direct_formula(u6, seed):
    c = random_cluster(3, seed)
    for k in range(3):
        g = numeric_gradient(u6, c, c[k], anchor=(6, k), r0=0.1)[0]
        assert abs(g - gradient_formula(c, k, 0.1)) < 1e-6


# ------------------------------------------------------------------ oracle

def test_harmonics_orthonormal_on_grid():
    pts, w = sphere_grid(12, 24)
    y = real_harmonics(pts, 4)
    gram = (y.T * w) @ y
    assert np.allclose(gram, np.eye(25), atol=1e-12)


def test_single_sphere():
    s = fixed_point_oracle([[0.1, -0.2, 0.3]], 0.1, axis=1)
    assert s.constants[0] == pytest.approx(0.1, abs=1e-15)
    assert np.allclose(s.gradient(0), [1, 0, 0], atol=1e-13)
    s2 = fixed_point_oracle([[0.1, -0.2, 0.3]], 0.1, axis=3)
    assert s2.constants[0] == pytest.approx(0.3, abs=1e-15)


def test_two_spheres_constants_order():
    c = np.array([[0.0, 0, 0], [1.0, 0, 0]])
    ratios = []
    for r0 in (0.1, 0.05, 0.025):
        s = fixed_point_oracle(c, r0, degree=8)
        sym = c[:, 0] - [numeric_eval(reference_constant(3), c, anchor=(3, k), r0=r0) for k in range(2)]
        ratios.append(float(np.max(np.abs(s.constants - sym))) / r0**4)
    assert ratios[0] < 0.05 and ratios[0] > ratios[1] > ratios[2]


def test_three_sphere_gradient_scaling():
    c = random_cluster(3, 5)
    gaps = []
    for r0 in (0.1, 0.05):
        s = fixed_point_oracle(c, r0, degree=12)
        gaps.append(max(abs(s.gradient(k)[0] - gradient_formula(c, k, r0)) for k in range(3)))
    assert math.log2(gaps[0] / gaps[1]) > 6.7


def test_oracle_value_at_center_is_zero():
    c = random_cluster(3, 2)
    s = fixed_point_oracle(c, 0.1, degree=6)
    for k in range(3):
        assert abs(s.values(k, c[k])[0]) < 1e-14


def test_oracle_guards():
    c = np.array([[0.0, 0, 0], [1.0, 0, 0]])
    with pytest.raises(DomainError):
        fixed_point_oracle(c, 0.2)
    with pytest.raises(DomainError):
        fixed_point_oracle(np.arange(33.0).reshape(11, 3) * 10, 0.1)
    with pytest.raises(NoConvergence):
        fixed_point_oracle(c, 0.1, max_sweeps=1)
    with pytest.raises(ValidationError):
        fixed_point_oracle(c, 0.1, axis=4)


def test_truncation_error_order(u3, u6):
    """Gap to the oracle falls like r0^(p+1), p the first omitted nonzero order."""
    c = random_cluster(3, 1)
    radii = (0.1, 0.05, 0.025)
    for e, q, p in ((u3, 3, 6), (u6, 6, 8)):
        _, slopes = order_estimates(e, q, c, radii)
        assert all(abs(s - (p + 1)) < 0.3 for s in slopes), slopes

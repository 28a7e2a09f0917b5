import math

import numpy as np
import pytest
import sympy as sp

from suspcond.eisenstein import (
    FOUR_PI_3, PAIRS, EisensteinEvaluator, _p11, _p12, eisenstein_oracle_E11,
    eisenstein_oracle_E12,
)
from suspcond.errors import SingularInput, ValidationError
from suspcond.lattice_sums import coulombic_table

X = sp.symbols("x1 x2 x3")


@pytest.mark.parametrize("block", [_p11, _p12])
@pytest.mark.parametrize("l", [2, 4, 6, 8])
def test_polynomial_blocks_are_harmonic(block, l):
    e = sp.expand(block(l, *X))
    assert sp.expand(sum(sp.diff(e, v, 2) for v in X)) == 0


@pytest.mark.parametrize("l", [2, 4, 6, 8])
def test_three_fold_cancellation(l):
    x1, x2, x3 = X
    s = _p11(l, x1, x2, x3) + _p11(l, x2, x1, x3) + _p11(l, x3, x2, x1)
    assert sp.expand(s) == 0


def test_trace_identity(evaluator):
    rng = np.random.default_rng(11)
    x = rng.uniform(-0.5, 0.5, (200, 3))
    tr = evaluator.evaluate("11", x) + evaluator.evaluate("22", x) + evaluator.evaluate("33", x)
    assert np.allclose(tr, 4 * math.pi, rtol=0, atol=1e-9 * np.max(np.abs(evaluator.evaluate("11", x))))


def test_e12_symmetric_in_first_two_coordinates(evaluator):
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.5, 0.5, (100, 3))
    a = evaluator.evaluate("12", x)
    b = evaluator.evaluate("12", x[:, [1, 0, 2]])
    assert np.all(np.abs(a - b) <= 1e-12 * np.maximum(1.0, np.abs(a)))


def test_parity(evaluator):
    rng = np.random.default_rng(6)
    x = rng.uniform(-0.45, 0.45, (50, 3))
    flip = x * [-1, 1, 1]
    assert np.allclose(evaluator.evaluate("11", x), evaluator.evaluate("11", flip), rtol=1e-13)
    assert np.allclose(evaluator.evaluate("12", x), -evaluator.evaluate("12", flip), rtol=1e-13)
    assert np.allclose(evaluator.evaluate("23", x), evaluator.evaluate("23", flip), rtol=1e-13)


@pytest.mark.parametrize("x", [(0.3, 0.0, 0.0), (0.2, 0.2, 0.2), (0.1, -0.25, 0.15)])
def test_matches_iterated_summation(evaluator, x):
    assert math.isclose(evaluator.E11(x), eisenstein_oracle_E11(x, M=40), rel_tol=2e-4)
    if x[0] * x[1] != 0:
        assert math.isclose(evaluator.E12(x), eisenstein_oracle_E12(x, M=40), rel_tol=2e-4)


def test_oracle_converges_in_m():
    x = (0.2, 0.1, -0.15)
    v = [eisenstein_oracle_E11(x, M=m) for m in (20, 40, 80)]
    assert abs(v[1] - v[2]) < abs(v[0] - v[1])
    assert math.isclose(v[1], v[2], rel_tol=1e-5)


def test_higher_degrees_improve_agreement():
    x = (0.3, 0.15, 0.05)
    ref = eisenstein_oracle_E11(x, M=40)
    errs = [abs(EisensteinEvaluator(d_max=d).E11(x) - ref) for d in (2, 4, 6, 8)]
    assert errs[3] == min(errs)
    assert errs[3] < 1e-4 * abs(ref)


def test_permuted_pairs(evaluator):
    x = np.array([0.11, -0.23, 0.31])
    assert math.isclose(evaluator.E("22", x), evaluator.E11(x[[1, 0, 2]]))
    assert math.isclose(evaluator.E("33", x), evaluator.E11(x[[2, 1, 0]]))
    assert math.isclose(evaluator.E13(x), evaluator.E12(x[[0, 2, 1]]))
    assert math.isclose(evaluator.E("23", x), evaluator.E12(x[[1, 2, 0]]))


def test_origin_conventions(evaluator):
    z = np.zeros(3)
    for pq in PAIRS:
        v = float(evaluator.evaluate(pq, z))
        assert v == (FOUR_PI_3 if pq in ("11", "22", "33") else 0.0)
    with pytest.raises(SingularInput):
        evaluator.E11(z)


def test_validation(evaluator):
    with pytest.raises(ValidationError):
        evaluator.evaluate("14", np.zeros(3))
    with pytest.raises(ValidationError):
        EisensteinEvaluator(d_max=10)
    with pytest.raises(ValidationError):
        eisenstein_oracle_E11((0.1, 0.1, 0.1), M=5)


def test_custom_table():
    ev = EisensteinEvaluator(coulombic_table(20))
    assert ev.table.rmax == 20
    assert math.isclose(ev.E11((0.2, 0.1, 0.0)), EisensteinEvaluator().E11((0.2, 0.1, 0.0)), rel_tol=1e-4)

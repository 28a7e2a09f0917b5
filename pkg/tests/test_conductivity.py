import itertools
import math

import numpy as np
import pytest

from suspcond.conductivity import (
    ISOTROPIC_F3, KAPPA_SCALE, asymptotic, berdichevsky_sc, clausius_mossotti, combined_rsa,
    conductivity_report, contrast, einstein_viscosity, f3_coefficient, isotropic_rsa, jeffrey,
    jeffrey_bracket, jeffrey_f2_coefficient, kappa, lambda11, lambda12, lambda13, report_for,
    simple_cubic_cma,
)
from suspcond.errors import DomainError, ValidationError
from suspcond.geometry import generate_rsa, simple_cubic
from suspcond.structural_sums import compute_structural_sums


@pytest.fixture(scope="module")
def rsa():
    return generate_rsa(40, 0.25, seed=8)


@pytest.fixture(scope="module")
def sums(rsa):
    return compute_structural_sums(rsa)


def test_simple_cubic_series():
    s = compute_structural_sums(simple_cubic(0.1))
    for f in (0.05, 0.1, 0.2):
        assert math.isclose(lambda11(s, f), 1 + 3 * f + 3 * f**2 + 3 * f**3, rel_tol=1e-14)
        tail = (simple_cubic_cma(f) - lambda11(s, f)) / f**4
        assert math.isclose(tail, 3 / (1 - f), rel_tol=1e-9)
    assert kappa(s) == 0.0


def test_f3_coefficient_formula():
    assert math.isclose(f3_coefficient(19.4667, 1.42768, 1.45402), 4.8066, rel_tol=1e-4)


def test_lambda12_mirror(rsa, sums):
    m = compute_structural_sums(rsa.transformed(signs=(-1, 1, 1)))
    assert lambda12(m, 0.25) == pytest.approx(-lambda12(sums, 0.25), rel=1e-9)
    assert lambda13(m, 0.25) == pytest.approx(-lambda13(sums, 0.25), rel=1e-9)
    assert lambda11(m, 0.25) == pytest.approx(lambda11(sums, 0.25), rel=1e-12)


def test_lambda13_is_lambda12_with_axes_swapped(rsa, sums):
    swapped = compute_structural_sums(rsa.permuted((0, 2, 1)))
    assert lambda13(sums, 0.25) == pytest.approx(lambda12(swapped, 0.25), rel=1e-9)


def test_kappa_invariant_under_cubic_group(rsa, sums):
    k0 = kappa(sums)
    for perm in itertools.permutations(range(3)):
        for signs in ((1, 1, 1), (-1, 1, -1)):
            k = kappa(compute_structural_sums(rsa.transformed(perm, signs)))
            assert k == pytest.approx(k0, rel=1e-8, abs=1e-14)


def test_report_contents(rsa, sums):
    rep = conductivity_report(sums, rsa.concentration)
    d = rep.as_dict()
    for key in ("lambda11", "lambda12", "Lambda2_23", "dev_33", "kappa", "jeffrey_f2_coefficient",
                "clausius_mossotti", "berdichevsky_sc", "combined_rsa"):
        assert key in d
    assert np.allclose(rep.Lambda2, rep.Lambda2.T)
    assert abs(np.trace(rep.deviator)) < 1e-12
    assert rep.kappa_normalized == rep.kappa / KAPPA_SCALE
    assert report_for(rsa).lambda11 == rep.lambda11


def test_reference_formulas():
    assert contrast(math.inf) == 1.0
    assert contrast(3.0) == pytest.approx(0.4)
    assert clausius_mossotti(0.2) == simple_cubic_cma(0.2)
    assert einstein_viscosity(0.1) == pytest.approx(1.25)
    assert jeffrey_bracket() == pytest.approx(1.03125)
    assert jeffrey_f2_coefficient() == pytest.approx(6.09375)
    assert jeffrey(0.1) == pytest.approx(1 + 0.3 + 6.09375 * 0.01)
    assert isotropic_rsa(0.1) == pytest.approx(1 + 0.3 + 0.03 + ISOTROPIC_F3 * 1e-3)
    assert berdichevsky_sc(0.1) > simple_cubic_cma(0.1)
    assert combined_rsa(0.0) == 1.0
    assert asymptotic("jeffrey", 0.1) == jeffrey(0.1)


def test_reference_formula_errors():
    with pytest.raises(ValidationError):
        asymptotic("nope", 0.1)
    with pytest.raises(DomainError):
        clausius_mossotti(1.0)
    with pytest.raises(DomainError):
        lambda11(compute_structural_sums(simple_cubic(0.1)), -0.1)

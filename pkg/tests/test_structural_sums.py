import itertools
import math

import numpy as np
import pytest

from suspcond.eisenstein import FOUR_PI_3
from suspcond.errors import ValidationError
from suspcond.geometry import SphereConfiguration, generate_rsa, simple_cubic, wrap
from suspcond.structural_sums import (
    REQUIRED_CONVOLUTIONS, KernelCache, compute_structural_sums, convolution_sum,
    convolution_sum_naive, kernel_values, pair_sum, starred_sums,
)


def full_orbit(a, radius):
    """All 48 signed coordinate permutations of one point."""
    pts = {tuple(s[i] * a[p[i]] for i in range(3))
           for p in itertools.permutations(range(3))
           for s in itertools.product((1, -1), repeat=3)}
    return SphereConfiguration(wrap(np.array(sorted(pts))), radius)


@pytest.fixture(scope="module")
def rsa50():
    return generate_rsa(50, 0.2, seed=3)


@pytest.fixture(scope="module")
def sums50(rsa50):
    return compute_structural_sums(rsa50)


def test_single_sphere_degenerations():
    s = compute_structural_sums(simple_cubic(0.3))
    assert s.e11 == FOUR_PI_3
    assert s.c("11", "11") == FOUR_PI_3**2
    assert s.c("12", "12") == 0.0 and s.c("13", "13") == 0.0
    assert s.e12 == s.e13 == s.e23 == 0.0


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_factorized_matches_triple_loop(seed):
    cfg = generate_rsa(7, 0.15, seed)
    for ij, pl in REQUIRED_CONVOLUTIONS:
        a = convolution_sum(cfg, ij, pl)
        b = convolution_sum_naive(cfg, ij, pl)
        assert abs(a - b) <= 1e-12 * abs(b)


def test_convolution_lookup_symmetric(sums50):
    assert sums50.c("21", "11") == sums50.c("12", "11")
    assert sums50.c("11", "12") == sums50.c("12", "11")
    assert sums50.c("32", "12") == sums50.c("23", "12")
    with pytest.raises(KeyError):
        sums50.c("11", "23")


def test_convolution_reversal(rsa50):
    cache = KernelCache(rsa50)
    assert math.isclose(cache.convolution_sum("12", "11"), cache.convolution_sum("11", "12"), rel_tol=1e-12)


def test_trace_identity(sums50):
    assert math.isclose(sums50.e11 + sums50.e11_star + sums50.e11_dstar, 4 * math.pi, rel_tol=1e-12)


def test_starred_sums_two_routes(rsa50, sums50):
    a, b = starred_sums(rsa50)
    assert math.isclose(a, sums50.e11_star, rel_tol=1e-12)
    assert math.isclose(b, sums50.e11_dstar, rel_tol=1e-12)


def test_translation_invariance(rsa50, sums50):
    moved = compute_structural_sums(rsa50.translated([0.123, -0.31, 0.27]))
    assert math.isclose(moved.e11, sums50.e11, rel_tol=1e-10)
    assert math.isclose(moved.c("11", "11"), sums50.c("11", "11"), rel_tol=1e-10)


def test_mirror_negates_off_diagonal(rsa50, sums50):
    m = compute_structural_sums(rsa50.transformed(signs=(-1, 1, 1)))
    assert m.e12 == pytest.approx(-sums50.e12, rel=1e-9, abs=1e-12)
    assert m.e13 == pytest.approx(-sums50.e13, rel=1e-9, abs=1e-12)
    assert m.e23 == pytest.approx(sums50.e23, rel=1e-9, abs=1e-12)
    assert m.e11 == pytest.approx(sums50.e11, rel=1e-12)


def test_full_orbit_is_isotropic():
    s = compute_structural_sums(full_orbit((0.1, 0.2, 0.3), 0.01))
    assert abs(s.e11 - FOUR_PI_3) < 1e-10
    assert abs(s.e11_star - FOUR_PI_3) < 1e-10
    assert max(abs(s.e12), abs(s.e13), abs(s.e23)) < 1e-10


def test_face_points_keep_parity(evaluator):
    d = np.array([[-0.5, 0.2, 0.1], [-0.5, -0.5, 0.3]])
    flipped = d * [-1, 1, 1]
    a = kernel_values(evaluator, "12", wrap(d))
    b = kernel_values(evaluator, "12", wrap(flipped))
    assert np.allclose(a, -b, rtol=1e-13)


def test_unknown_pair(rsa50):
    with pytest.raises(ValidationError):
        pair_sum(rsa50, "14")


def test_as_dict_keys(sums50):
    d = sums50.as_dict()
    for k in ("N", "e11", "e11_star", "e11_dstar", "conv_11_11", "conv_23_13"):
        assert k in d

import itertools
import math

import numpy as np
import pytest

from suspcond.errors import DivergenceGuard, ValidationError
from suspcond.lattice_sums import (
    PUBLISHED, coulombic_table, l4_six_term, raw_sum, raw_sums, write_table,
)
from suspcond.report import parse_kv


def naive_raw(ell, p, rmax):
    """Plain loop over the full cube."""
    r = np.arange(-rmax, rmax + 1, dtype=float)
    x, y, z = np.meshgrid(r, r, r, indexing="ij")
    rr = x * x + y * y + z * z
    mask = rr > 0
    num = x[mask] ** p[0] * y[mask] ** p[1] * z[mask] ** p[2]
    return math.fsum(num / rr[mask] ** (ell / 2))


@pytest.mark.parametrize("ell,p", [(9, (2, 2, 0)), (9, (4, 0, 0)), (13, (2, 2, 2)),
                                   (17, (6, 2, 0)), (21, (4, 4, 2)), (6, (0, 0, 0))])
def test_octant_loop_matches_full_cube(ell, p):
    assert math.isclose(raw_sum(ell, *p, rmax=12), naive_raw(ell, p, 12), rel_tol=1e-13)


def test_odd_powers_vanish():
    assert raw_sum(9, 3, 1, 0, rmax=10) == 0.0


def test_permutation_symmetry_exact():
    vals = {p: raw_sum(13, *p, rmax=20) for p in set(itertools.permutations((4, 2, 0)))}
    assert len(set(vals.values())) == 1


def test_divergence_guard():
    with pytest.raises(DivergenceGuard):
        raw_sum(5, 2, 0, 0)
    with pytest.raises(ValidationError):
        raw_sum(9, -1, 0, 0)


def test_thread_count_does_not_change_result():
    req = [(9, (2, 2, 0)), (13, (4, 2, 0))]
    assert raw_sums(req, 40, threads=1) == raw_sums(req, 40, threads=4)


def test_l4_reduction_matches_six_term_form():
    assert math.isclose(coulombic_table(60).L4, l4_six_term(60), rel_tol=1e-12)


def test_higher_sums_converge_quickly():
    # L8 and L10 are settled to 6 digits already at small truncation
    t = coulombic_table(20)
    assert abs(t.L8 - PUBLISHED.L8) < 1e-5
    assert abs(t.L10 - PUBLISHED.L10) < 1e-5


def test_l4_l6_approach_published_values():
    gaps = [abs(coulombic_table(r).L4 - PUBLISHED.L4) for r in (15, 30, 60)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


def test_rmax_too_small():
    with pytest.raises(ValidationError):
        coulombic_table(5)


def test_write_table(tmp_path):
    t = coulombic_table(20)
    p = tmp_path / "t.txt"
    write_table(t, p)
    kv = parse_kv(p.read_text())
    assert float(kv["L4"]) == t.L4 and kv["rmax"] == "20"

"""Absolutely convergent cubic-lattice sums and the Coulombic sums L_n^0.

The raw sums are

    e_l^(i1,i2,i3) = sum'_{R in Z^3, max|R_i| <= rmax} R1^i1 R2^i2 R3^i3 / |R|^l

over the full truncation cube minus the origin. Only even powers survive, so
the loop runs over the closed positive octant with multiplicity weights.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceGuard, ValidationError

DEFAULT_RMAX = 250
FAST_RMAX = 60
THREADS_ENV = "SUSPCOND_THREADS"

# (l, (i1, i2, i3)) with i1 >= i2 >= i3, coefficient
_L_COMBOS = {
    "L4": (-7 / 4, [(9, (2, 2, 0), 3), (9, (4, 0, 0), -1)]),
    "L6": (3 / 8, [(13, (2, 2, 2), 30), (13, (4, 2, 0), -15), (13, (6, 0, 0), 1)]),
    "L8": (99 / 64, [(17, (4, 4, 0), 35), (17, (6, 2, 0), -28), (17, (8, 0, 0), 1)]),
    "L10": (
        -65 / 128,
        [
            (21, (4, 4, 2), 630),
            (21, (6, 2, 2), -504),
            (21, (6, 4, 0), -42),
            (21, (8, 2, 0), 45),
            (21, (10, 0, 0), -1),
        ],
    ),
}


def thread_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _check(ell: int, powers) -> tuple[int, int, int]:
    p = tuple(int(i) for i in powers)
    if len(p) != 3 or min(p) < 0:
        raise ValidationError(f"powers must be three non-negative integers, got {powers}")
    if ell - sum(p) < 4:
        raise DivergenceGuard(f"e_{ell}^{p} does not converge absolutely (l - sum(i) < 4)")
    return p


def _slice_sums(r1: int, rmax: int, keys) -> list[float]:
    """Octant slice R1 = r1 contribution for every requested (l, sorted powers)."""
    r = np.arange(rmax + 1, dtype=float)
    r2, r3 = np.meshgrid(r, r, indexing="ij")
    w = np.where(r2 > 0, 2.0, 1.0) * np.where(r3 > 0, 2.0, 1.0) * (2.0 if r1 > 0 else 1.0)
    if r1 == 0:
        w[0, 0] = 0.0
    rr = r1 * r1 + r2 * r2 + r3 * r3
    rr[0, 0] = rr[0, 0] or 1.0  # origin carries zero weight
    sq = (float(r1 * r1), r2 * r2, r3 * r3)
    out = []
    for ell, p in keys:
        num = w
        for s, i in zip(sq, p):
            if i:
                num = num * s ** (i // 2)
        out.append(float(np.sum(num / rr ** (ell / 2.0))))
    return out


def raw_sums(requests, rmax: int = DEFAULT_RMAX, threads: int | None = None) -> dict:
    """Evaluate several raw sums in a single pass over the lattice.

    ``requests`` is an iterable of ``(l, (i1, i2, i3))``. The result maps each
    request to its value. Odd powers give exactly 0. Powers are sorted before
    summation, which makes permutation symmetry exact.
    """
    if rmax < 1:
        raise ValidationError("rmax must be >= 1")
    requests = [(int(ell), _check(ell, p)) for ell, p in requests]
    keys = sorted({(ell, tuple(sorted(p, reverse=True))) for ell, p in requests
                   if all(i % 2 == 0 for i in p)})
    values = {}
    if keys:
        threads = threads or thread_count()
        rows = range(rmax + 1)
        if threads > 1:
            with ThreadPoolExecutor(threads) as ex:
                parts = list(ex.map(lambda r1: _slice_sums(r1, rmax, keys), rows))
        else:
            parts = [_slice_sums(r1, rmax, keys) for r1 in rows]
        # slices reduced in fixed order: result independent of thread count
        for j, key in enumerate(keys):
            values[key] = math.fsum(part[j] for part in parts)
    out = {}
    for ell, p in requests:
        if any(i % 2 for i in p):
            out[(ell, p)] = 0.0
        else:
            out[(ell, p)] = values[(ell, tuple(sorted(p, reverse=True)))]
    return out


def raw_sum(ell: int, i1: int, i2: int, i3: int, rmax: int = DEFAULT_RMAX) -> float:
    """Single raw lattice sum e_l^(i1,i2,i3) truncated at ``rmax``."""
    p = (i1, i2, i3)
    return raw_sums([(ell, p)], rmax)[(ell, _check(ell, p))]


@dataclass(frozen=True)
class LatticeSumTable:
    """Coulombic lattice sums L_4^0 .. L_10^0 at a given truncation."""

    L4: float
    L6: float
    L8: float
    L10: float
    rmax: int

    def as_dict(self) -> dict:
        return {"L4": self.L4, "L6": self.L6, "L8": self.L8, "L10": self.L10}


#: Reference values at rmax = 250 (used as defaults when no table is supplied).
PUBLISHED = LatticeSumTable(3.10822, 0.573329, 3.25929, 1.00922, 250)


def coulombic_table(rmax: int = DEFAULT_RMAX, threads: int | None = None) -> LatticeSumTable:
    if rmax < 10:
        raise ValidationError("rmax must be >= 10 for the Coulombic table")
    req = [(ell, p) for _, terms in _L_COMBOS.values() for ell, p, _ in terms]
    vals = raw_sums(req, rmax, threads)
    out = {}
    for name, (pref, terms) in _L_COMBOS.items():
        out[name] = pref * math.fsum(c * vals[(ell, p)] for ell, p, c in terms)
    return LatticeSumTable(rmax=rmax, **out)


def l4_six_term(rmax: int = DEFAULT_RMAX) -> float:
    """L_4^0 from the unreduced six-term combination of e_9 sums."""
    terms = [
        ((4, 0, 0), 3), ((0, 4, 0), 3), ((0, 0, 4), 8),
        ((2, 2, 0), 6), ((2, 0, 2), -24), ((0, 2, 2), -24),
    ]
    vals = raw_sums([(9, p) for p, _ in terms], rmax)
    return math.fsum(c * vals[(9, p)] for p, c in terms) / 8.0


def write_table(table: LatticeSumTable, path) -> None:
    from .report import format_kv

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_kv({**table.as_dict(), "rmax": table.rmax}))

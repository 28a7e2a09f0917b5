"""Truncated power series in r0 (Rule 6).

Sum bodies are converted to a polynomial representation over the atoms

* ``r0``
* ``c_i``, ``z_i``
* ``P_axis`` -- a component of a point P (x or a_i)
* ``|P - R|`` -- a distance between two distinct points, any rational power

Points produced by inversions are affine combinations of x and the centers
with series coefficients. Squared norms and dot products of such
differences reduce to pairwise distances through

    (sum_P v_P P) . (sum_R w_R R) = -1/2 sum_{P,R} v_P w_R |P - R|^2,

valid whenever sum v = sum w = 0. This removes every vector quantity, so
two bodies are equal exactly when their polynomials are equal.
"""
from __future__ import annotations

import math
from fractions import Fraction

from ..errors import SeriesFailure
from .expr import (
    ONE, Add, CSym, Const, Coord, Dot, Inv, Mul, Node, Norm, Pow, Pt, R0, Sum, X, ZSym,
)
from .rules import simplify

Mono = tuple  # (r-exponent, ((atom, exponent), ...))
Poly = dict  # Mono -> Fraction

X_KEY = (0, 0)


def point_key(p: Node) -> tuple:
    if isinstance(p, X):
        return X_KEY
    if isinstance(p, Pt):
        return (1, p.index)
    raise TypeError(p)


def key_point(k: tuple) -> Node:
    return X() if k == X_KEY else Pt(k[1])


def norm_atom(p: tuple, q: tuple) -> tuple:
    return ("n",) + tuple(sorted((p, q)))


# ------------------------------------------------------------------ monomials / polys

def _mono_mul(a: Mono, b: Mono) -> Mono:
    if not a[1]:
        return (a[0] + b[0], b[1])
    if not b[1]:
        return (a[0] + b[0], a[1])
    d = dict(a[1])
    for atom, e in b[1]:
        s = d.get(atom, 0) + e
        if s:
            d[atom] = s
        else:
            d.pop(atom, None)
    return (a[0] + b[0], tuple(sorted(d.items())))


def _mono_pow(m: Mono, e: Fraction) -> Mono:
    return (m[0] * e, tuple((a, x * e) for a, x in m[1]))


def const_poly(c) -> Poly:
    c = Fraction(c)
    return {(0, ()): c} if c else {}


def atom_poly(atom: tuple, e=1) -> Poly:
    return {(0, ((atom, Fraction(e)),)): Fraction(1)}


def r_poly(k: int) -> Poly:
    return {(k, ()): Fraction(1)}


def p_add(*ps: Poly) -> Poly:
    out: Poly = {}
    for p in ps:
        for m, c in p.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def p_scale(p: Poly, c) -> Poly:
    c = Fraction(c)
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def p_mul(a: Poly, b: Poly, order: int) -> Poly:
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            if ma[0] + mb[0] > order:
                continue
            m = _mono_mul(ma, mb)
            s = out.get(m, 0) + ca * cb
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def p_trunc(p: Poly, order: int) -> Poly:
    return {m: c for m, c in p.items() if m[0] <= order}


def valuation_of(p: Poly):
    return min((m[0] for m in p), default=math.inf)


def _binom(e: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for i in range(n):
        out = out * (e - i) / (i + 1)
    return out


_POSITIVE_ATOMS = ("n",)


def _rational_power(c: Fraction, e: Fraction) -> Fraction:
    if e.denominator == 1:
        return c ** int(e)
    if c <= 0:
        raise SeriesFailure("fractional power of a non-positive leading coefficient")
    num = round(c.numerator ** float(e)) if c.numerator else 0
    den = round(c.denominator ** float(e))
    out = Fraction(num, den)
    if out ** e.denominator != c ** e.numerator:
        raise SeriesFailure(f"leading coefficient {c} has no rational power {e}")
    return out


def p_power(p: Poly, e, order: int) -> Poly:
    """Truncated series of p**e about r0 = 0.

    The lowest-order part of ``p`` must be a single monomial; for a
    non-integer exponent its atoms must be distances and its coefficient
    positive.
    """
    e = Fraction(e)
    if e.denominator == 1 and e >= 0:
        out = const_poly(1)
        base = p
        n = int(e)
        # binary powering with truncation
        while n:
            if n & 1:
                out = p_mul(out, base, order)
            n >>= 1
            if n:
                base = p_mul(base, base, order)
        return out
    if not p:
        raise SeriesFailure("negative or fractional power of zero")
    v = valuation_of(p)
    lead = [(m, c) for m, c in p.items() if m[0] == v]
    if len(lead) != 1:
        raise SeriesFailure("leading part of the series is not a single monomial")
    (lm, lc), = lead
    if e.denominator != 1 and any(a[0] not in _POSITIVE_ATOMS for a, _ in lm[1]):
        raise SeriesFailure("fractional power of a factor of unknown sign")
    shift = v * e
    if shift.denominator != 1:
        raise SeriesFailure("fractional power of r0")
    shift = int(shift)
    if shift < 0:
        raise SeriesFailure("the expansion has a negative power of r0 (not analytic at r0 = 0)")
    rel = order - shift
    if rel < 0:
        return {}
    inv_lead = (-v, tuple((a, -x) for a, x in lm[1]))
    inv_c = 1 / lc
    t = {}
    for m, c in p.items():
        if m == lm:
            continue
        mm = _mono_mul(m, inv_lead)
        t[mm] = c * inv_c
    t = p_trunc(t, rel)
    series = const_poly(1)
    term = const_poly(1)
    tv = valuation_of(t)
    n = 0
    while t and (n + 1) * tv <= rel:
        n += 1
        term = p_mul(term, t, rel)
        series = p_add(series, p_scale(term, _binom(e, n)))
    lead_pow = (shift, tuple((a, x * e) for a, x in lm[1]))
    c_pow = _rational_power(lc, e)
    return {_mono_mul(m, lead_pow): c * c_pow for m, c in series.items()}


# ------------------------------------------------------------------ tree -> poly

def _val(e: Node) -> int:
    """Lower bound on the r0 order of ``e``."""
    if isinstance(e, R0):
        return 1
    if isinstance(e, Const):
        return 0
    if isinstance(e, Mul):
        return sum(_val(a) for a in e.args)
    if isinstance(e, Add):
        return min(_val(a) for a in e.args)
    if isinstance(e, Pow):
        if isinstance(e.base, R0):
            return int(e.exp)
        if e.exp > 0:
            return int(math.floor(e.exp * _val(e.base)))
        return 0
    if isinstance(e, Sum):
        return _val(e.body)
    return 0


Affine = dict  # point key -> Poly


def affine(p: Node, order: int) -> Affine:
    """Point expression as an affine combination of x and the centers."""
    if isinstance(p, (X, Pt)):
        return {point_key(p): const_poly(1)}
    if isinstance(p, Inv):
        if order < 2:
            return {(1, p.center): const_poly(1)}
        arg = affine(p.arg, order - 2)
        c = (1, p.center)
        d = dict(arg)
        d[c] = p_add(d.get(c, {}), const_poly(-1))
        d = {k: v for k, v in d.items() if v}
        s2 = _sqnorm(d, order - 2)
        if valuation_of(s2) != 0:
            raise SeriesFailure("inversion of a point that coincides with the center to leading order")
        inv = p_power(s2, -1, order - 2)
        out = {c: const_poly(1)}
        for k, coef in d.items():
            term = p_mul(p_mul(coef, inv, order - 2), r_poly(2), order)
            out[k] = p_add(out.get(k, {}), term)
        return {k: v for k, v in out.items() if v}
    raise TypeError(f"not a point expression: {p!r}")


def _diff(a: Affine, b: Affine) -> Affine:
    out = dict(a)
    for k, v in b.items():
        out[k] = p_add(out.get(k, {}), p_scale(v, -1))
    return {k: v for k, v in out.items() if v}


def _pair_dot(v: Affine, w: Affine, order: int) -> Poly:
    out: Poly = {}
    for pk, pc in v.items():
        for rk, rc in w.items():
            if pk == rk:
                continue
            prod = p_mul(pc, rc, order)
            if prod:
                out = p_add(out, p_scale(p_mul(prod, atom_poly(norm_atom(pk, rk), 2), order), Fraction(-1, 2)))
    return out


def _sqnorm(v: Affine, order: int) -> Poly:
    return _pair_dot(v, v, order)


def _coef_valuation(v: Affine) -> int:
    return min((valuation_of(c) for c in v.values()), default=0)


def _norm_power(p: Node, q: Node, e: Fraction, order: int) -> Poly:
    v = _diff(affine(p, order), affine(q, order))
    w = _coef_valuation(v)
    if w > 0 and e < 1:
        extra = int(math.ceil(w * (1 - e)))
        v = _diff(affine(p, order + extra), affine(q, order + extra))
        return p_power(_sqnorm(v, order + extra), e / 2, order)
    return p_power(_sqnorm(v, order), e / 2, order)


def to_poly(e: Node, order: int) -> Poly:
    """Series of a Sum-free scalar expression, truncated after r0**order."""
    if order < 0:
        return {}
    if isinstance(e, Const):
        return const_poly(e.value)
    if isinstance(e, R0):
        return r_poly(1) if order >= 1 else {}
    if isinstance(e, CSym):
        return atom_poly(("c", e.index))
    if isinstance(e, ZSym):
        return atom_poly(("z", e.index))
    if isinstance(e, Coord):
        out: Poly = {}
        for k, coef in affine(e.point, order).items():
            out = p_add(out, p_mul(coef, atom_poly(("cmp", k, str(e.axis))), order))
        return out
    if isinstance(e, Norm):
        return _norm_power(e.p, e.q, Fraction(1), order)
    if isinstance(e, Dot):
        v = _diff(affine(e.p, order), affine(e.q, order))
        w = _diff(affine(e.r, order), affine(e.s, order))
        return _pair_dot(v, w, order)
    if isinstance(e, Add):
        return p_add(*(to_poly(a, order) for a in e.args))
    if isinstance(e, Mul):
        vals = [_val(a) for a in e.args]
        total = sum(vals)
        if total > order:
            return {}
        out = const_poly(1)
        for a, va in zip(e.args, vals):
            part = to_poly(a, order - (total - va))
            out = p_mul(out, part, order)
            if not out:
                return {}
        return out
    if isinstance(e, Pow):
        b, x = e.base, e.exp
        if isinstance(b, R0):
            if x.denominator != 1 or x < 0:
                raise SeriesFailure("non-analytic power of r0")
            return r_poly(int(x)) if x <= order else {}
        if isinstance(b, Norm):
            return _norm_power(b.p, b.q, x, order)
        vb = _val(b)
        budget = order - int(math.floor(vb * (x - 1))) if vb else order
        return p_power(to_poly(b, budget), x, order)
    if isinstance(e, Sum):
        raise SeriesFailure("nested sum inside a series body")
    raise SeriesFailure(f"cannot expand {type(e).__name__} as a scalar")


# ------------------------------------------------------------------ poly -> tree

def _atom_tree(atom: tuple, x: Fraction) -> Node:
    kind = atom[0]
    if kind == "n":
        base = Norm(key_point(atom[1]), key_point(atom[2]))
    elif kind == "cmp":
        axis = atom[2]
        base = Coord(key_point(atom[1]), int(axis) if axis.isdigit() else axis)
    elif kind == "c":
        base = CSym(atom[1])
    elif kind == "z":
        base = ZSym(atom[1])
    else:
        raise TypeError(atom)
    return base if x == 1 else Pow(base, x)


def mono_tree(m: Mono, c: Fraction) -> Node:
    factors: list[Node] = []
    if c != 1:
        factors.append(Const(c))
    if m[0]:
        factors.append(R0() if m[0] == 1 else Pow(R0(), m[0]))
    factors.extend(_atom_tree(a, x) for a, x in m[1])
    if not factors:
        return ONE
    return factors[0] if len(factors) == 1 else Mul(factors)


def poly_tree(p: Poly) -> Node:
    terms = [mono_tree(m, c) for m, c in sorted(p.items(), key=lambda mc: (mc[0][0], repr(mc[0][1])))]
    if not terms:
        return Const(0)
    return terms[0] if len(terms) == 1 else Add(terms)


def series_truncate(e: Node, q: int) -> Node:
    """Rule 6: replace every term (and every Sum body) by its series to O(r0**(q+1))."""
    e = simplify(e)
    terms = e.args if isinstance(e, Add) else (e,)
    out = []
    for t in terms:
        if isinstance(t, Sum):
            body = poly_tree(to_poly(t.body, q))
            out.append(Sum(body, t.indices, t.excl))
        else:
            out.append(poly_tree(to_poly(t, q)))
    return simplify(Add(out))


def r0_orders(e: Node) -> set[int]:
    """Set of r0 degrees present in a series-normal expression."""
    e = simplify(e)
    terms = e.args if isinstance(e, Add) else (e,)
    out = set()
    for t in terms:
        body = t.body if isinstance(t, Sum) else t
        for m in to_poly(body, 10**6):
            out.add(m[0])
    return out

"""Automatic simplification (Rules 1-4) and algebraic expansion (Rule 5).

Normal form produced by :func:`simplify`:

* Add and Mul are flat; constants are folded and placed first in a product.
* Like terms are collected, with the numeric coefficient of a Sum kept
  inside its body.
* A product containing a Sum is absorbed into that Sum (Rule 2), a Sum
  whose body is a Sum is flattened (Rule 3), a Sum of an Add is split
  (Rule 1) and a Sum of zero disappears (Rule 4). Hence no Sum is ever
  nested inside another Sum's body.
"""
from __future__ import annotations

from fractions import Fraction

from ..errors import IndexCollision
from .expr import (
    ONE, ZERO, Add, Const, Coord, Dot, Inv, Mul, Node, Norm, Pow, R0, Sum, free_indices,
)

#: bases for which (b^p)^q = b^(pq) and b^p b^q = b^(p+q) hold for rational p, q
_POSITIVE = (Norm, R0)


def _mergeable(base: Node, exps) -> bool:
    return isinstance(base, _POSITIVE) or all(Fraction(e).denominator == 1 for e in exps)


def _split_coef(t: Node) -> tuple[Fraction, Node]:
    if isinstance(t, Const):
        return t.value, ONE
    if isinstance(t, Mul) and isinstance(t.args[0], Const):
        rest = t.args[1:]
        return t.args[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    if isinstance(t, Sum):
        c, body = _split_coef(t.body)
        return c, Sum(body, t.indices, t.excl)
    return Fraction(1), t


def _with_coef(c: Fraction, key: Node) -> Node:
    if key == ONE:
        return Const(c)
    if c == 1:
        return key
    if isinstance(key, Sum):
        return Sum(_with_coef(c, key.body), key.indices, key.excl)
    if isinstance(key, Mul):
        return Mul((Const(c),) + key.args)
    return Mul((Const(c), key))


class _Simplifier:
    def __init__(self):
        self.memo: dict[Node, Node] = {}

    def __call__(self, e: Node) -> Node:
        hit = self.memo.get(e)
        if hit is not None:
            return hit
        out = self._dispatch(e)
        self.memo[e] = out
        return out

    def _dispatch(self, e: Node) -> Node:
        if isinstance(e, Add):
            return self._add(e)
        if isinstance(e, Mul):
            return self._mul(e)
        if isinstance(e, Pow):
            return self._pow(e)
        if isinstance(e, Sum):
            return self._sum(e)
        if isinstance(e, Inv):
            a = self(e.arg)
            return e if a is e.arg else Inv(a, e.center)
        if isinstance(e, Coord):
            p = self(e.point)
            return e if p is e.point else Coord(p, e.axis)
        if isinstance(e, Norm):
            return Norm(self(e.p), self(e.q))
        if isinstance(e, Dot):
            return Dot(self(e.p), self(e.q), self(e.r), self(e.s))
        return e

    def _add(self, e: Add) -> Node:
        terms: list[Node] = []
        stack = [self(a) for a in e.args]
        for t in stack:
            if isinstance(t, Add):
                terms.extend(t.args)
            else:
                terms.append(t)
        acc: dict[Node, Fraction] = {}
        for t in terms:
            c, key = _split_coef(t)
            if c:
                acc[key] = acc.get(key, Fraction(0)) + c
        out = [_with_coef(c, k) for k, c in acc.items() if c != 0]
        if not out:
            return ZERO
        if len(out) == 1:
            return out[0]
        out.sort(key=lambda n: n.sort_key())
        return Add(out)

    def _mul(self, e: Mul) -> Node:
        factors: list[Node] = []
        for a in e.args:
            a = self(a)
            if isinstance(a, Mul):
                factors.extend(a.args)
            else:
                factors.append(a)
        coef = Fraction(1)
        powers: dict[Node, list] = {}
        order: list[Node] = []
        sums: list[Sum] = []
        for f in factors:
            if isinstance(f, Const):
                coef *= f.value
                continue
            if isinstance(f, Sum):
                sums.append(f)
                continue
            base, exp = (f.base, f.exp) if isinstance(f, Pow) else (f, Fraction(1))
            if base not in powers:
                powers[base] = []
                order.append(base)
            powers[base].append(exp)
        if coef == 0:
            return ZERO
        rest: list[Node] = []
        for base in order:
            exps = powers[base]
            if _mergeable(base, exps):
                total = sum(exps, Fraction(0))
                if total != 0:
                    rest.append(base if total == 1 else Pow(base, total))
            else:
                rest.extend(base if x == 1 else Pow(base, x) for x in exps)
        if sums:
            # Rule 2: move every other factor into the first Sum
            s = sums[0]
            others = rest + list(sums[1:])
            outside = Mul([Const(coef)] + others) if others or coef != 1 else None
            if outside is not None:
                captured = free_indices(outside) & set(s.indices)
                if captured:
                    raise IndexCollision(
                        f"factor depends on summation index {sorted(captured)} of the sum it multiplies"
                    )
                body = Mul((outside, s.body))
            else:
                body = s.body
            return self(Sum(body, s.indices, s.excl))
        if coef != 1 and len(rest) == 1 and isinstance(rest[0], Add):
            # a bare numeric multiple of a sum of terms is distributed
            return self(Add([Mul((Const(coef), t)) for t in rest[0].args]))
        rest.sort(key=lambda n: n.sort_key())
        if coef != 1:
            rest.insert(0, Const(coef))
        if not rest:
            return Const(coef)
        if len(rest) == 1:
            return rest[0]
        return Mul(rest)

    def _pow(self, e: Pow) -> Node:
        b = self(e.base)
        p = e.exp
        if p == 0:
            return ONE
        if p == 1:
            return b
        if isinstance(b, Const):
            if p.denominator == 1 and (b.value != 0 or p > 0):
                return Const(b.value ** int(p))
            return Pow(b, p)
        if isinstance(b, Pow) and _mergeable(b.base, (b.exp, p)):
            return self(Pow(b.base, b.exp * p))
        if isinstance(b, Mul) and p.denominator == 1:
            return self(Mul([Pow(f, p) for f in b.args]))
        return Pow(b, p)

    def _sum(self, e: Sum) -> Node:
        body = self(e.body)
        if body == ZERO:  # Rule 4
            return ZERO
        if isinstance(body, Add):  # Rule 1
            return self(Add([Sum(t, e.indices, e.excl) for t in body.args]))
        if isinstance(body, Sum):  # Rule 3
            shared = set(e.indices) & set(body.indices)
            if shared:
                raise IndexCollision(f"nested sums share summation indices {sorted(shared)}")
            return self(Sum(body.body, e.indices + body.indices, e.excl + body.excl))
        if body is e.body:
            return e
        return Sum(body, e.indices, e.excl)


def simplify(e: Node) -> Node:
    """Apply Rules 1-4 and term collection until no rule applies."""
    return _Simplifier()(e)


def _expand(e: Node, memo: dict) -> Node:
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Add):
        out = Add([_expand(a, memo) for a in e.args])
    elif isinstance(e, Mul):
        lists: list[list[Node]] = [[]]
        for f in e.args:
            f = _expand(f, memo)
            terms = list(f.args) if isinstance(f, Add) else [f]
            lists = [acc + [t] for acc in lists for t in terms]
        out = Add([Mul(l) for l in lists]) if len(lists) > 1 else Mul(lists[0])
    elif isinstance(e, Pow) and e.exp.denominator == 1 and e.exp > 1:
        b = _expand(e.base, memo)
        if isinstance(b, Add):
            out = _expand(Mul([b] * int(e.exp)), memo)
        else:
            out = Pow(b, e.exp)
    elif isinstance(e, Sum):
        out = Sum(_expand(e.body, memo), e.indices, e.excl)
    else:
        out = e
    memo[e] = out
    return out


def expand(e: Node) -> Node:
    """Rule 5: distribute products over sums everywhere, then simplify.

    Norms, dot products and inversions are opaque factors.
    """
    e = simplify(e)
    while True:
        out = simplify(_expand(e, {}))
        if out == e:
            return out
        e = out


def is_normal(e: Node) -> bool:
    """True when no Sum node sits inside another Sum's body."""
    from .expr import children

    def walk(n, inside):
        if isinstance(n, Sum):
            if inside:
                return False
            return walk(n.body, True)
        return all(walk(c, inside) for c in children(n))

    return walk(e, False)

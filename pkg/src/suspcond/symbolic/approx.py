"""Successive approximations of the functional equations and procedure u(q).

Index bookkeeping follows the recurrence: in u_q the anchor sphere carries
index q, the outermost sum runs over a_{q-1}, the next over a_{q-2} and so
on; every sum excludes coincidence with the previous link of the chain.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..errors import ComputationError, NonSolvable, ValidationError
from .expr import (
    Add, CSym, Const, Coord, Dot, Inv, Mul, Node, Norm, Pow, Pt, R0, Sum, X, ZSym,
    Reindex, contains, free_indices, substitute,
)
from .rules import expand, simplify
from .series import poly_tree, series_truncate, to_poly

MAX_ORDER = 6


def _coord(axis):
    return lambda x: Coord(x, axis)


def _kernel(x: Node, i: int) -> Node:
    return Mul((Const(-1), R0(), Pow(Norm(x, Pt(i)), -1)))


@dataclass(frozen=True)
class FunctionalSystem:
    """u_k(x) = sign * c_k + f(x) + sum_{m != k} g(x, a_m) u_m(s(x, a_m)).

    Attributes
    ----------
    constant_sign : int
        +1 for the generic form, -1 for the conductivity instance (x_j - c_k).
    driving : callable
        x -> f(x).
    kernel : callable
        (x, m) -> g(x, a_m).
    substitution : callable
        (x, m) -> s(x, a_m), a point expression.
    """

    constant_sign: int = 1
    driving: Callable[[Node], Node] = field(default=_coord("j"))
    kernel: Callable[[Node, int], Node] = field(default=_kernel)
    substitution: Callable[[Node, int], Node] = field(default=lambda x, i: Inv(x, i))

    def constant(self, i: int) -> Node:
        return CSym(i) if self.constant_sign > 0 else Mul((Const(-1), CSym(i)))


def conductivity_system(axis="j") -> FunctionalSystem:
    """The sphere system u_k = -sum r0/|x-a_m| u_m(x*_(m)) + x_j - c_k."""
    return FunctionalSystem(constant_sign=-1, driving=_coord(axis))


def successive_approximation(sys: FunctionalSystem, q: int, order: int | None = None) -> Node:
    """u_q from the recurrence, simplified; anchor index q.

    With ``order`` set, Rule 6 is applied after every step. Dropped terms
    cannot re-enter at a lower order because the composition and the kernel
    never lower the r0 degree, so the result agrees with truncating at the
    end.
    """
    if q < 0:
        raise ValidationError("q must be >= 0")
    u = simplify(Add((sys.constant(0), sys.driving(X()))))
    if order is not None:
        u = series_truncate(u, order)
    for p in range(1, q + 1):
        composed = substitute(u, {X(): sys.substitution(X(), p - 1)})
        body = expand(Mul((sys.kernel(X(), p - 1), composed)))
        u = simplify(Add((sys.constant(p), sys.driving(X()), Sum(body, [p - 1], [(p - 1, p)]))))
        if order is not None:
            u = series_truncate(u, order)
    return u


def _terms(e: Node):
    return e.args if isinstance(e, Add) else (e,)


def _solve_linear(e: Node, z: ZSym) -> Node:
    """Solve e = 0 for z, where z may only occur as a top-level linear term."""
    coef = Fraction(0)
    rest = []
    for t in _terms(e):
        if t == z:
            coef += 1
        elif isinstance(t, Mul) and len(t.args) == 2 and isinstance(t.args[0], Const) and t.args[1] == z:
            coef += t.args[0].value
        else:
            if contains(t, lambda n: n == z):
                raise NonSolvable(f"{z!r} does not enter linearly")
            rest.append(t)
    if coef == 0:
        raise NonSolvable(f"{z!r} does not occur")
    factor = Const(-1 / coef)
    return simplify(Add([Mul((factor, t)) for t in rest])) if rest else Const(0)


def _z_indices(e: Node) -> set[int]:
    out = set()

    def walk(n):
        if isinstance(n, ZSym):
            out.add(n.index)
            return False
        return False

    contains(e, lambda n: walk(n))
    return out


def _rule56(e: Node, q: int) -> Node:
    return series_truncate(expand(e), q)


def procedure_u(q: int, axis="j", return_constants: bool = False):
    """Analytic approximation of u_k(x) to O(r0**(q+1)) with the c_k eliminated.

    The anchor sphere a_k carries index q; summation indices are q-1, q-2, ...
    The result is merged into canonical form (alpha-equivalent sums combined).
    With ``return_constants`` the z_q expression (a_kj - c_k) is returned too.
    """
    if not 1 <= q <= MAX_ORDER:
        raise ValidationError(f"q must lie in 1..{MAX_ORDER}")
    sys = conductivity_system(axis)
    expr = successive_approximation(sys, q, order=q)  # lines 1-2
    zexpr = substitute(expr, {X(): Pt(q)})  # line 4
    csub = {CSym(m): Add((Coord(Pt(m), axis), Mul((Const(-1), ZSym(m))))) for m in range(q + 1)}
    zexpr = _rule56(substitute(zexpr, csub), q)  # lines 5-6
    zexpr = _solve_linear(zexpr, ZSym(q))  # line 7
    for _ in range(4 * q + 4):  # lines 8-11; each pass raises the r0 order of z terms
        present = _z_indices(zexpr)
        if not present:
            break
        mapping = {ZSym(m): Reindex(zexpr, q, m) for m in present}
        zexpr = _rule56(substitute(zexpr, mapping), q)
    else:
        raise ComputationError("z elimination did not terminate")
    zexpr = merge_alpha(zexpr, q)
    csub = {
        CSym(m): Add((Coord(Pt(m), axis), Mul((Const(-1), Reindex(zexpr, q, m)))))
        for m in range(q + 1)
    }
    expr = _rule56(substitute(expr, csub), q)  # lines 12-14
    expr = merge_alpha(expr, q)
    if contains(expr, lambda n: isinstance(n, (CSym, ZSym))):
        raise ComputationError("constants survived elimination")
    if return_constants:
        return expr, zexpr
    return expr


# ------------------------------------------------------------------ canonical form

def _chain_order(indices, excl, anchor) -> list[int]:
    """Bound indices ordered by walking the exclusion graph from the anchor."""
    adj: dict[int, set[int]] = {}
    for a, b in excl:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    bound = set(indices)
    order: list[int] = []
    frontier = [anchor]
    seen = {anchor}
    while frontier:
        nxt = []
        for v in frontier:
            for w in sorted(adj.get(v, ()), reverse=True):
                if w in bound and w not in seen:
                    seen.add(w)
                    order.append(w)
                    nxt.append(w)
        frontier = nxt
    order.extend(sorted(bound - seen, reverse=True))
    return order


def _relabel_atom(atom, lab):
    kind = atom[0]
    if kind == "n":
        p, r = lab(atom[1]), lab(atom[2])
        return ("n",) + tuple(sorted((p, r)))
    if kind == "cmp":
        return ("cmp", lab(atom[1]), atom[2])
    return (kind, lab(("sym", atom[1]))[1])


def canonical_form(e: Node, anchor: int) -> dict:
    """Map (number of bound indices, exclusions, monomial) -> coefficient.

    Labels: the anchor becomes 0 and the bound indices 1, 2, ... in chain
    order, so alpha-equivalent terms produce equal keys.
    """
    out: dict = {}
    for t in _terms(simplify(e)):
        if isinstance(t, Sum):
            indices, excl, body = t.indices, t.excl, t.body
        else:
            indices, excl, body = (), (), t
        free = free_indices(t) - {anchor}
        if free:
            raise ValidationError(f"unexpected free indices {sorted(free)}")
        order = _chain_order(indices, excl, anchor)
        names = {anchor: 0}
        names.update({i: n + 1 for n, i in enumerate(order)})

        def lab(k):
            if k[0] == 0:
                return k
            return (k[0], names[k[1]])

        ex = tuple(sorted(tuple(sorted((names[a], names[b]))) for a, b in excl))
        for (rexp, atoms), c in to_poly(body, 10**6).items():
            mono = (rexp, tuple(sorted((_relabel_atom(a, lab), x) for a, x in atoms)))
            key = (len(indices), ex, mono)
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                out.pop(key)
    return out


def from_canonical(form: dict, anchor: int) -> Node:
    """Rebuild a tree from :func:`canonical_form` with labels anchor, anchor-1, ..."""
    groups: dict = {}
    for (nb, ex, mono), c in form.items():
        groups.setdefault((nb, ex), {})[mono] = c

    def lab(k):
        return k if k[0] == 0 else (1, anchor - k[1])

    def unlabel(atom):
        kind = atom[0]
        if kind == "n":
            return ("n",) + tuple(sorted((lab(atom[1]), lab(atom[2]))))
        if kind == "cmp":
            return ("cmp", lab(atom[1]), atom[2])
        return (kind, anchor - atom[1])

    terms = []
    for (nb, ex), monos in sorted(groups.items()):
        poly = {}
        for (rexp, atoms), c in monos.items():
            poly[(rexp, tuple(sorted((unlabel(a), x) for a, x in atoms)))] = c
        body = poly_tree(poly)
        if nb == 0:
            terms.append(body)
        else:
            terms.append(Sum(body, [anchor - i for i in range(1, nb + 1)],
                             [(anchor - a, anchor - b) for a, b in ex]))
    return simplify(Add(terms)) if terms else Const(0)


def merge_alpha(e: Node, anchor: int) -> Node:
    """Combine sums that differ only by the names of their bound indices."""
    return from_canonical(canonical_form(e, anchor), anchor)


def same_canonical(a: Node, b: Node, anchor: int) -> bool:
    return canonical_form(a, anchor) == canonical_form(b, anchor)


# ------------------------------------------------------------------ reference formula

def reference_u(q: int = 6, anchor: int | None = None, axis="j") -> Node:
    """The main approximate formula for u_k(x), hand-entered, truncated at r0**q (q in {3, 6}).

    Anchor a_k has index ``anchor`` (default q); m and l are anchor-1 and anchor-2.
    """
    k = q if anchor is None else anchor
    m, l = k - 1, k - 2
    x, ak, am, al = X(), Pt(k), Pt(m), Pt(l)

    def c(p):
        return Coord(p, axis)

    def n(p, r, e):
        return Pow(Norm(p, r), e)

    r3 = Pow(R0(), 3)
    r6 = Pow(R0(), 6)
    terms = [
        c(x), Mul((Const(-1), c(ak))),
        Sum(Mul((r3, Add((c(ak), Mul((Const(-1), c(am))))), n(ak, am, -3))), [m], [(k, m)]),
        Sum(Mul((Const(-1), r3, Add((c(x), Mul((Const(-1), c(am))))), n(x, am, -3))), [m], [(k, m)]),
    ]
    if q >= 6:
        both = [m, l]
        ex = [(k, m), (m, l)]
        terms += [
            Sum(Mul((Const(-1), r6, Add((c(ak), Mul((Const(-1), c(am))))), n(ak, am, -3), n(am, al, -3))), both, ex),
            Sum(Mul((r6, Add((c(x), Mul((Const(-1), c(am))))), n(x, am, -3), n(am, al, -3))), both, ex),
            Sum(Mul((Const(-3), r6, Add((c(am), Mul((Const(-1), c(al))))), Dot(x, am, am, al),
                     n(x, am, -3), n(am, al, -5))), both, ex),
            Sum(Mul((Const(3), r6, Add((c(am), Mul((Const(-1), c(al))))), Dot(ak, am, am, al),
                     n(ak, am, -3), n(am, al, -5))), both, ex),
        ]
    return expand(Add(terms))


def reference_constant(q: int = 3, anchor: int | None = None, axis="j") -> Node:
    """z_k = a_kj - c_k to O(r0^4): r0^3 sum_{m != k} (a_kj - a_mj)/|a_k - a_m|^3."""
    k = q if anchor is None else anchor
    m = k - 1
    return expand(Sum(Mul((Pow(R0(), 3), Add((Coord(Pt(k), axis), Mul((Const(-1), Coord(Pt(m), axis))))),
                           Pow(Norm(Pt(k), Pt(m)), -3))), [m], [(k, m)]))

"""Expression trees with indefinite symbolic sums.

Nodes are immutable and hash-consed by structure. Index symbols are
integers: ``Pt(i)`` is the center a_i, ``CSym(i)`` and ``ZSym(i)`` the
constants c_i and z_i. Negative indices are legal; they appear after
reindexing. ``Sum(body, indices, excl)`` sums ``body`` over the listed
indices; ``excl`` holds pairs (i, j) meaning a_i != a_j.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable

from ..errors import ValidationError


class Node:
    __slots__ = ("_hash", "_key")

    def _fields(self) -> tuple:
        raise NotImplementedError

    def _init(self):
        object.__setattr__(self, "_hash", hash((type(self).__name__,) + self._fields()))
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("expression nodes are immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(self) is type(other)
            and self._hash == other._hash
            and self._fields() == other._fields()
        )

    def __repr__(self):
        return to_sexpr(self)

    def sort_key(self) -> str:
        if self._key is None:
            object.__setattr__(self, "_key", to_sexpr(self))
        return self._key

    # arithmetic sugar; results are unsimplified trees
    def __add__(self, other):
        return Add((self, as_node(other)))

    def __radd__(self, other):
        return Add((as_node(other), self))

    def __sub__(self, other):
        return Add((self, Mul((Const(-1), as_node(other)))))

    def __rsub__(self, other):
        return Add((as_node(other), Mul((Const(-1), self))))

    def __mul__(self, other):
        return Mul((self, as_node(other)))

    def __rmul__(self, other):
        return Mul((as_node(other), self))

    def __neg__(self):
        return Mul((Const(-1), self))

    def __truediv__(self, other):
        return Mul((self, Pow(as_node(other), Fraction(-1))))

    def __pow__(self, exp):
        return Pow(self, Fraction(exp))


class Const(Node):
    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", Fraction(value))
        self._init()

    def _fields(self):
        return (self.value,)


class R0(Node):
    """The common radius r0, the expansion parameter."""

    __slots__ = ()

    def __init__(self):
        self._init()

    def _fields(self):
        return ()


class X(Node):
    """The free point x."""

    __slots__ = ()

    def __init__(self):
        self._init()

    def _fields(self):
        return ()


class Pt(Node):
    """Center a_i."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        object.__setattr__(self, "index", int(index))
        self._init()

    def _fields(self):
        return (self.index,)


class Inv(Node):
    """Sphere inversion s(p, a_i) = a_i + r0^2 (p - a_i) / |p - a_i|^2 (a point)."""

    __slots__ = ("arg", "center")

    def __init__(self, arg: Node, center: int):
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "center", int(center))
        self._init()

    def _fields(self):
        return (self.arg, self.center)


POINT_TYPES = (X, Pt, Inv)


class Coord(Node):
    """Component ``axis`` of a point; ``axis`` is 1, 2, 3 or the symbolic 'j'."""

    __slots__ = ("point", "axis")

    def __init__(self, point: Node, axis="j"):
        if not isinstance(point, POINT_TYPES):
            raise ValidationError("Coord expects a point expression")
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "axis", axis)
        self._init()

    def _fields(self):
        return (self.point, str(self.axis))


class CSym(Node):
    __slots__ = ("index",)

    def __init__(self, index: int):
        object.__setattr__(self, "index", int(index))
        self._init()

    def _fields(self):
        return (self.index,)


class ZSym(Node):
    __slots__ = ("index",)

    def __init__(self, index: int):
        object.__setattr__(self, "index", int(index))
        self._init()

    def _fields(self):
        return (self.index,)


class Add(Node):
    __slots__ = ("args",)

    def __init__(self, args: Iterable[Node]):
        object.__setattr__(self, "args", tuple(args))
        self._init()

    def _fields(self):
        return self.args


class Mul(Node):
    __slots__ = ("args",)

    def __init__(self, args: Iterable[Node]):
        object.__setattr__(self, "args", tuple(args))
        self._init()

    def _fields(self):
        return self.args


class Pow(Node):
    __slots__ = ("base", "exp")

    def __init__(self, base: Node, exp):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", Fraction(exp))
        self._init()

    def _fields(self):
        return (self.base, self.exp)


class Norm(Node):
    """Euclidean distance |p - q| between two points."""

    __slots__ = ("p", "q")

    def __init__(self, p: Node, q: Node):
        if not (isinstance(p, POINT_TYPES) and isinstance(q, POINT_TYPES)):
            raise ValidationError("Norm expects two point expressions")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        self._init()

    def _fields(self):
        return (self.p, self.q)


class Dot(Node):
    """(p - q) . (r - s)."""

    __slots__ = ("p", "q", "r", "s")

    def __init__(self, p: Node, q: Node, r: Node, s: Node):
        for v in (p, q, r, s):
            if not isinstance(v, POINT_TYPES):
                raise ValidationError("Dot expects point expressions")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)
        self._init()

    def _fields(self):
        return (self.p, self.q, self.r, self.s)


class Sum(Node):
    """Indefinite sum of ``body`` over the index symbols ``indices``."""

    __slots__ = ("body", "indices", "excl")

    def __init__(self, body: Node, indices: Iterable[int], excl: Iterable[tuple[int, int]] = ()):
        idx = tuple(int(i) for i in indices)
        if len(set(idx)) != len(idx):
            raise ValidationError(f"repeated summation index in {idx}")
        pairs = tuple(sorted({tuple(sorted((int(a), int(b)))) for a, b in excl}))
        object.__setattr__(self, "body", body)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "excl", pairs)
        self._init()

    def _fields(self):
        return (self.body, self.indices, self.excl)


ZERO = Const(0)
ONE = Const(1)


def as_node(v) -> Node:
    if isinstance(v, Node):
        return v
    if isinstance(v, (int, Fraction)):
        return Const(v)
    raise ValidationError(f"cannot convert {v!r} to an expression")


def children(e: Node) -> tuple:
    if isinstance(e, (Add, Mul)):
        return e.args
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Inv):
        return (e.arg,)
    if isinstance(e, Coord):
        return (e.point,)
    if isinstance(e, Norm):
        return (e.p, e.q)
    if isinstance(e, Dot):
        return (e.p, e.q, e.r, e.s)
    if isinstance(e, Sum):
        return (e.body,)
    return ()


def rebuild(e: Node, new_children) -> Node:
    c = tuple(new_children)
    if isinstance(e, Add):
        return Add(c)
    if isinstance(e, Mul):
        return Mul(c)
    if isinstance(e, Pow):
        return Pow(c[0], e.exp)
    if isinstance(e, Inv):
        return Inv(c[0], e.center)
    if isinstance(e, Coord):
        return Coord(c[0], e.axis)
    if isinstance(e, Norm):
        return Norm(*c)
    if isinstance(e, Dot):
        return Dot(*c)
    if isinstance(e, Sum):
        return Sum(c[0], e.indices, e.excl)
    return e


def transform(e: Node, fn: Callable[[Node], Node | None]) -> Node:
    """Bottom-up rewrite; ``fn`` returns a replacement or None to keep the node."""
    memo: dict[Node, Node] = {}

    def go(n: Node) -> Node:
        hit = memo.get(n)
        if hit is not None:
            return hit
        kids = children(n)
        if kids:
            new = tuple(go(k) for k in kids)
            m = n if all(a is b for a, b in zip(new, kids)) else rebuild(n, new)
        else:
            m = n
        r = fn(m)
        out = m if r is None else r
        memo[n] = out
        return out

    return go(e)


def substitute(e: Node, mapping: dict) -> Node:
    """Replace every occurrence of each key node by its value."""
    return transform(e, lambda n: mapping.get(n))


def contains(e: Node, pred: Callable[[Node], bool]) -> bool:
    stack = [e]
    seen = set()
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        if pred(n):
            return True
        stack.extend(children(n))
    return False


def index_symbols(e: Node) -> set[int]:
    """Every index used by a, c, z symbols, inversion centers and sums in ``e``."""
    out: set[int] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, (Pt, CSym, ZSym)):
            out.add(n.index)
        elif isinstance(n, Inv):
            out.add(n.center)
        elif isinstance(n, Sum):
            out.update(n.indices)
            for a, b in n.excl:
                out.update((a, b))
        stack.extend(children(n))
    return out


def free_indices(e: Node) -> set[int]:
    """Indices referenced in ``e`` that are not bound by an enclosing Sum."""
    if isinstance(e, (Pt, CSym, ZSym)):
        return {e.index}
    if isinstance(e, Inv):
        return free_indices(e.arg) | {e.center}
    if isinstance(e, Sum):
        inner = free_indices(e.body)
        for a, b in e.excl:
            inner |= {a, b}
        return inner - set(e.indices)
    out: set[int] = set()
    for c in children(e):
        out |= free_indices(c)
    return out


def reindex(e: Node, shift: int) -> Node:
    """Shift every index symbol (free and bound) by ``shift``."""
    if shift == 0:
        return e

    def fn(n):
        if isinstance(n, Pt):
            return Pt(n.index + shift)
        if isinstance(n, CSym):
            return CSym(n.index + shift)
        if isinstance(n, ZSym):
            return ZSym(n.index + shift)
        if isinstance(n, Inv):
            return Inv(n.arg, n.center + shift)
        if isinstance(n, Sum):
            return Sum(n.body, [i + shift for i in n.indices],
                       [(a + shift, b + shift) for a, b in n.excl])
        return None

    return transform(e, fn)


def Reindex(e: Node, q: int, m: int) -> Node:  # noqa: N802 - mirrors the procedure listing
    """Move the anchor index q to m; a_m becomes a_{2m-q} and so on."""
    return reindex(e, m - q)


def rename(e: Node, mapping: dict[int, int]) -> Node:
    """Rename index symbols by an explicit map (used to avoid Rule 3 collisions)."""

    def r(i):
        return mapping.get(i, i)

    def fn(n):
        if isinstance(n, Pt):
            return Pt(r(n.index))
        if isinstance(n, CSym):
            return CSym(r(n.index))
        if isinstance(n, ZSym):
            return ZSym(r(n.index))
        if isinstance(n, Inv):
            return Inv(n.arg, r(n.center))
        if isinstance(n, Sum):
            return Sum(n.body, [r(i) for i in n.indices], [(r(a), r(b)) for a, b in n.excl])
        return None

    return transform(e, fn)


def depth_of_sums(e: Node) -> int:
    """Largest number of Sum nodes on any root-to-leaf path."""
    own = 1 if isinstance(e, Sum) else 0
    kids = children(e)
    return own + (max(depth_of_sums(k) for k in kids) if kids else 0)


# ------------------------------------------------------------------ printing

def _idx(i: int) -> str:
    return str(i) if i >= 0 else f"m{-i}"


def to_sexpr(e: Node) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, R0):
        return "r0"
    if isinstance(e, X):
        return "x"
    if isinstance(e, Pt):
        return f"a{_idx(e.index)}"
    if isinstance(e, CSym):
        return f"c{_idx(e.index)}"
    if isinstance(e, ZSym):
        return f"z{_idx(e.index)}"
    if isinstance(e, Inv):
        return f"(inv {to_sexpr(e.arg)} a{_idx(e.center)})"
    if isinstance(e, Coord):
        return f"(coord {to_sexpr(e.point)} {e.axis})"
    if isinstance(e, Add):
        return "(+ " + " ".join(to_sexpr(a) for a in e.args) + ")"
    if isinstance(e, Mul):
        return "(* " + " ".join(to_sexpr(a) for a in e.args) + ")"
    if isinstance(e, Pow):
        return f"(^ {to_sexpr(e.base)} {e.exp})"
    if isinstance(e, Norm):
        return f"(norm {to_sexpr(e.p)} {to_sexpr(e.q)})"
    if isinstance(e, Dot):
        return f"(dot {to_sexpr(e.p)} {to_sexpr(e.q)} {to_sexpr(e.r)} {to_sexpr(e.s)})"
    if isinstance(e, Sum):
        idx = " ".join(f"a{_idx(i)}" for i in e.indices)
        ex = " ".join(f"(a{_idx(a)} a{_idx(b)})" for a, b in e.excl)
        return f"(sum {to_sexpr(e.body)} [{idx}] [{ex}])"
    raise TypeError(type(e))


def _paren(s: str, e: Node) -> str:
    return f"({s})" if isinstance(e, Add) else s


def to_text(e: Node) -> str:
    """Infix rendering, e.g. ``r0^3*(a3_j - a2_j)*|a3 - a2|^(-3)``."""
    if isinstance(e, Const):
        v = e.value
        return str(v) if v >= 0 else f"({v})"
    if isinstance(e, (R0, X, Pt, CSym, ZSym)):
        return to_sexpr(e)
    if isinstance(e, Inv):
        return f"s({to_text(e.arg)}, a{_idx(e.center)})"
    if isinstance(e, Coord):
        return f"{to_text(e.point)}_{e.axis}"
    if isinstance(e, Add):
        out = to_text(e.args[0])
        for a in e.args[1:]:
            out += " + " + to_text(a)
        return out
    if isinstance(e, Mul):
        return "*".join(_paren(to_text(a), a) for a in e.args)
    if isinstance(e, Pow):
        b = to_text(e.base)
        if not isinstance(e.base, (R0, X, Pt, CSym, ZSym, Norm, Coord)):
            b = f"({b})"
        exp = str(e.exp) if e.exp >= 0 else f"({e.exp})"
        return f"{b}^{exp}"
    if isinstance(e, Norm):
        return f"|{to_text(e.p)} - {to_text(e.q)}|"
    if isinstance(e, Dot):
        return f"(({to_text(e.p)} - {to_text(e.q)}).({to_text(e.r)} - {to_text(e.s)}))"
    if isinstance(e, Sum):
        idx = ",".join(f"a{_idx(i)}" for i in e.indices)
        ex = ",".join(f"a{_idx(a)}!=a{_idx(b)}" for a, b in e.excl)
        head = f"sum[{idx}" + (f"; {ex}" if ex else "") + "]"
        return f"{head}({to_text(e.body)})"
    raise TypeError(type(e))

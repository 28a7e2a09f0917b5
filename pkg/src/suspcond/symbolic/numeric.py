"""Numeric evaluation of symbolic expressions on a finite cluster of spheres.

Index symbols range over sphere labels 0..n-1. A sum runs over every
assignment of its bound indices that respects its exclusion pairs; an empty
admissible set contributes 0. The evaluation point may be a single point or
an array of points, in which case the result is an array.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..errors import UnboundSymbol, ValidationError
from .expr import (
    Add, CSym, Const, Coord, Dot, Inv, Mul, Node, Norm, Pow, Pt, R0, Sum, X, ZSym,
)


def _axis_index(axis, j: int) -> int:
    a = j if str(axis) == "j" else int(axis)
    if a not in (1, 2, 3):
        raise ValidationError(f"axis must be 1, 2 or 3, got {a}")
    return a - 1


class _Evaluator:
    def __init__(self, centers, x, r0, j):
        self.centers = np.asarray(centers, dtype=float)
        self.x = None if x is None else np.asarray(x, dtype=float)
        self.r0 = float(r0)
        self.j = j

    def point(self, e: Node, env: dict):
        if isinstance(e, X):
            if self.x is None:
                raise UnboundSymbol("the point x is not bound")
            return self.x
        if isinstance(e, Pt):
            if e.index not in env:
                raise UnboundSymbol(f"index a{e.index} is not bound")
            return self.centers[env[e.index]]
        if isinstance(e, Inv):
            p = self.point(e.arg, env)
            a = self.centers[env[e.center]] if e.center in env else None
            if a is None:
                raise UnboundSymbol(f"index a{e.center} is not bound")
            d = p - a
            return a + self.r0**2 * d / np.sum(d * d, axis=-1, keepdims=True)
        raise ValidationError(f"{type(e).__name__} is not a point expression")

    def value(self, e: Node, env: dict):
        if isinstance(e, Const):
            return float(e.value)
        if isinstance(e, R0):
            return self.r0
        if isinstance(e, Coord):
            return self.point(e.point, env)[..., _axis_index(e.axis, self.j)]
        if isinstance(e, Norm):
            d = self.point(e.p, env) - self.point(e.q, env)
            return np.sqrt(np.sum(d * d, axis=-1))
        if isinstance(e, Dot):
            v = self.point(e.p, env) - self.point(e.q, env)
            w = self.point(e.r, env) - self.point(e.s, env)
            return np.sum(v * w, axis=-1)
        if isinstance(e, Add):
            out = 0.0
            for a in e.args:
                out = out + self.value(a, env)
            return out
        if isinstance(e, Mul):
            out = 1.0
            for a in e.args:
                out = out * self.value(a, env)
            return out
        if isinstance(e, Pow):
            return self.value(e.base, env) ** float(e.exp)
        if isinstance(e, Sum):
            return self.sum(e, env)
        if isinstance(e, (CSym, ZSym)):
            raise UnboundSymbol(f"{type(e).__name__}({e.index}) has no numeric value")
        raise UnboundSymbol(f"cannot evaluate {type(e).__name__}")

    def sum(self, e: Sum, env: dict):
        n = len(self.centers)
        idx = list(e.indices)
        for a, b in e.excl:
            for i in (a, b):
                if i not in env and i not in idx:
                    raise UnboundSymbol(f"index a{i} is not bound")
        terms = []
        for labels in itertools.product(range(n), repeat=len(idx)):
            local = dict(env)
            local.update(zip(idx, labels))
            if all(local[a] != local[b] for a, b in e.excl):
                terms.append(self.value(e.body, local))
        if not terms:
            return 0.0
        arr = np.broadcast_arrays(*terms)
        if arr[0].ndim == 0:
            return math.fsum(float(t) for t in arr)
        return np.sum(np.stack(arr), axis=0)


def numeric_eval(e: Node, centers, x=None, anchor: tuple[int, int] | None = None,
                 r0: float = 0.0, j: int = 1, bindings: dict | None = None):
    """Evaluate ``e`` on a cluster.

    Parameters
    ----------
    e : Node
        Expression free of c and z symbols.
    centers : array_like, shape (n, 3)
        Sphere centers; index symbols take values in 0..n-1.
    x : array_like, shape (3,) or (P, 3), optional
        Evaluation point(s) for the symbol x.
    anchor : (int, int), optional
        ``(symbol, label)``: binds the free index ``symbol`` to sphere ``label``.
    r0 : float
        Sphere radius.
    j : int
        Value of the symbolic axis j (1, 2 or 3).
    bindings : dict, optional
        Further free-index bindings {symbol: label}.

    Raises
    ------
    UnboundSymbol
        For c or z symbols, an unbound x or an unbound free index.
    """
    env = dict(bindings or {})
    if anchor is not None:
        env[int(anchor[0])] = int(anchor[1])
    n = len(np.asarray(centers))
    for s, lab in env.items():
        if not 0 <= lab < n:
            raise ValidationError(f"label {lab} for a{s} outside 0..{n - 1}")
    return _Evaluator(centers, x, r0, j).value(e, env)


def numeric_gradient(e: Node, centers, x, anchor=None, r0: float = 0.0, j: int = 1,
                     h: float = 1e-5) -> np.ndarray:
    """Gradient of ``e`` with respect to x by central differences."""
    x = np.asarray(x, dtype=float)
    steps = np.eye(3) * h
    pts = np.concatenate([x + steps, x - steps])
    vals = numeric_eval(e, centers, pts, anchor=anchor, r0=r0, j=j)
    return (vals[:3] - vals[3:]) / (2 * h)


def gradient_formula(centers, k: int, r0: float) -> float:
    """du_k/dx1 at a_k for a flux along x1, coded directly to O(r0^6).

    The double sums run over m != k and s != m.
    """
    a = np.asarray(centers, dtype=float)
    n = len(a)

    def quad(d):
        return 2 * d[0] ** 2 - d[1] ** 2 - d[2] ** 2

    first, second = [], []
    for m in range(n):
        if m == k:
            continue
        d = a[k] - a[m]
        nd = math.sqrt(float(d @ d))
        first.append(quad(d) / nd**5)
        for s in range(n):
            if s == m:
                continue
            e = a[m] - a[s]
            ne = math.sqrt(float(e @ e))
            num = quad(d) * quad(e) + 9 * d[0] * e[0] * d[1] * e[1] + 9 * d[0] * e[0] * d[2] * e[2]
            second.append(num / (nd**5 * ne**5))
    return 1.0 + r0**3 * math.fsum(first) + r0**6 * math.fsum(second)

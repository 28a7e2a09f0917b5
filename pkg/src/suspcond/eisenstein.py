"""Triply periodic kernels E_pq of the cubic lattice.

E_11 and E_12 are evaluated from their polynomial expansions about the
origin with Coulombic lattice-sum coefficients; the remaining index pairs
are obtained by permuting coordinates into these two templates, which the
cubic symmetry of the lattice allows. A direct Eisenstein-order summation
serves as an independent check.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import SingularInput, ValidationError
from .lattice_sums import PUBLISHED, LatticeSumTable

FOUR_PI_3 = 4.0 * math.pi / 3.0

#: coordinate order fed to the template for each index pair
_DIAGONAL = {"11": (0, 1, 2), "22": (1, 0, 2), "33": (2, 1, 0)}
_OFF_DIAGONAL = {
    "12": (0, 1, 2), "21": (0, 1, 2),
    "13": (0, 2, 1), "31": (0, 2, 1),
    "23": (1, 2, 0), "32": (1, 2, 0),
}
PAIRS = tuple(_DIAGONAL) + tuple(_OFF_DIAGONAL)


def _p11(l: int, x1, x2, x3):
    """Homogeneous block of degree ``l`` in the E_11 expansion (without L factor)."""
    s1, s2, s3 = x1 * x1, x2 * x2, x3 * x3
    if l == 2:
        return 2 * s1 - (s2 + s3)
    if l == 4:
        return 2 * s1**2 - 6 * (s2 + s3) * s1 - s2**2 - s3**2 + 12 * s2 * s3
    if l == 6:
        return 2 * s1**3 - 15 * (s2 + s3) * s1**2 + 15 * (s2**2 + s3**2) * s1 - s2**3 - s3**3
    if l == 8:
        return (
            10 * s1**4
            - 140 * (s2 + s3) * s1**3
            + 70 * (s2**2 + 24 * s3 * s2 + s3**2) * s1**2
            + 28 * (s2**3 - 30 * s3 * s2**2 - 30 * s3**2 * s2 + s3**3) * s1
            - 5 * s2**4
            - 5 * s3**4
            + 112 * (s2 * s3**3 + s2**3 * s3)
            - 140 * s2**2 * s3**2
        )
    raise ValueError(l)


def _p12(l: int, x1, x2, x3):
    """Degree-``l`` block of the E_12 expansion (without L factor)."""
    s1, s2, s3 = x1 * x1, x2 * x2, x3 * x3
    if l == 2:
        q = 1.0
    elif l == 4:
        q = s1 + s2 - 6 * s3
    elif l == 6:
        q = 3 * s1**2 - 10 * s2 * s1 + 3 * s2**2
    elif l == 8:
        q = (
            5 * s1**3
            - 7 * (s2 + 12 * s3) * s1**2
            - 7 * (s2**2 - 20 * s3 * s2 - 10 * s3**2) * s1
            + 5 * s2**3
            - 28 * s3**3
            + 70 * s2 * s3**2
            - 84 * s2**2 * s3
        )
    else:
        raise ValueError(l)
    return x1 * x2 * q


_C11 = {2: 6.0, 4: 15.0, 6: 28.0, 8: 9.0}
_C12 = {2: -12.0, 4: -60.0, 6: -56.0, 8: -72.0}
_LNAME = {2: "L4", 4: "L6", 6: "L8", 8: "L10"}


class EisensteinEvaluator:
    """Truncated expansions of E_11 and E_12 and their permuted siblings.

    Parameters
    ----------
    table : LatticeSumTable, optional
        Coulombic sums; defaults to the published rmax=250 values.
    d_max : int
        Highest polynomial degree kept (2, 4, 6 or 8).
    """

    def __init__(self, table: LatticeSumTable | None = None, d_max: int = 8):
        if d_max not in (2, 4, 6, 8):
            raise ValidationError(f"d_max must be one of 2, 4, 6, 8, got {d_max}")
        self.table = table or PUBLISHED
        self.d_max = d_max
        self._degrees = [l for l in (2, 4, 6, 8) if l <= d_max]
        self._L = {l: getattr(self.table, _LNAME[l]) for l in self._degrees}

    # template evaluations on unpacked coordinates; r2 > 0 assumed
    def _e11(self, x1, x2, x3, r2):
        out = FOUR_PI_3 + (2 * x1 * x1 - x2 * x2 - x3 * x3) / (r2 * r2 * np.sqrt(r2))
        for l in self._degrees:
            out = out + _C11[l] * self._L[l] * _p11(l, x1, x2, x3)
        return out

    def _e12(self, x1, x2, x3, r2):
        out = 3 * x1 * x2 / (r2 * r2 * np.sqrt(r2))
        for l in self._degrees:
            out = out + _C12[l] * self._L[l] * _p12(l, x1, x2, x3)
        return out

    def polynomial_part(self, pq: str, x):
        """Regular (lattice) part of E_pq: everything except the singular ratio."""
        x = np.asarray(x, dtype=float)
        if pq in _DIAGONAL:
            i, j, k = _DIAGONAL[pq]
            out = FOUR_PI_3
            for l in self._degrees:
                out = out + _C11[l] * self._L[l] * _p11(l, x[..., i], x[..., j], x[..., k])
            return out
        i, j, k = _OFF_DIAGONAL[pq]
        out = 0.0
        for l in self._degrees:
            out = out + _C12[l] * self._L[l] * _p12(l, x[..., i], x[..., j], x[..., k])
        return out

    def evaluate(self, pq: str, x, at_zero: bool = True):
        """E_pq on points of shape ``(..., 3)``.

        With ``at_zero`` true, points exactly at the origin take the
        convention value (4*pi/3 for diagonal pairs, 0 otherwise); otherwise
        they raise :class:`SingularInput`.
        """
        x = np.asarray(x, dtype=float)
        if pq in _DIAGONAL:
            i, j, k = _DIAGONAL[pq]
            template, zero = self._e11, FOUR_PI_3
        elif pq in _OFF_DIAGONAL:
            i, j, k = _OFF_DIAGONAL[pq]
            template, zero = self._e12, 0.0
        else:
            raise ValidationError(f"unknown index pair {pq!r}")
        x1, x2, x3 = x[..., i], x[..., j], x[..., k]
        r2 = x1 * x1 + x2 * x2 + x3 * x3
        origin = r2 == 0.0
        if np.any(origin):
            if not at_zero:
                raise SingularInput(f"E_{pq} is singular at the origin")
            r2 = np.where(origin, 1.0, r2)
            return np.where(origin, zero, template(x1, x2, x3, r2))
        return template(x1, x2, x3, r2)

    def _scalar(self, pq, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (3,):
            raise ValidationError("expected a single point (x1, x2, x3)")
        return float(self.evaluate(pq, x, at_zero=False))

    def E11(self, x):
        return self._scalar("11", x)

    def E12(self, x):
        return self._scalar("12", x)

    def E13(self, x):
        return self._scalar("13", x)

    def E(self, pq: str, x):
        return self._scalar(pq, x)


def _oracle(kernel: str, x, M: int) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValidationError("expected a single point")
    if M < 10:
        raise ValidationError("M must be >= 10")
    rng = np.arange(-M, M + 1, dtype=float)
    d = x[None, :] - np.stack([rng, rng, rng], axis=1)  # d[i, a] = x_a - i
    if np.any(np.all(np.isclose(d, 0.0, atol=0.0), axis=0)) and np.all(np.abs(x - np.round(x)) == 0):
        raise SingularInput("oracle evaluated at a lattice point")
    t = d[:, 0][:, None, None]  # x1 - R1
    y = d[:, 1][None, :, None]  # x2 - R2
    z = d[:, 2][None, None, :]  # x3 - R3
    rho2 = y * y + z * z  # (1, n2, n3)
    r2 = t * t + rho2
    if np.any(r2 == 0.0):
        raise SingularInput("oracle evaluated at a lattice point")
    r5 = r2 * r2 * np.sqrt(r2)
    lo, hi = x[0] - M - 0.5, x[0] + M + 0.5
    # innermost sum over R1: direct part plus the two tails as midpoint integrals
    if kernel == "11":
        direct = np.sum((2 * t * t - rho2) / r5, axis=0)

        def anti(s):
            return -s / (s * s + rho2) ** 1.5
        tails = anti(lo) - anti(hi)
        rows = direct + tails[0]
    else:
        direct = np.sum(3 * t * y / r5, axis=0)

        def anti(s):
            return -y / (s * s + rho2) ** 1.5
        tails = anti(lo) - anti(hi)
        rows = direct + tails[0]
    # then R2, then R3; row sums decay exponentially so the order is immaterial here
    return float(math.fsum(math.fsum(col) for col in rows.T))


def eisenstein_oracle_E11(x, M: int = 100) -> float:
    """E_11 by iterated summation, R1 innermost, then R2, then R3.

    The innermost series over R1 is summed to infinity (direct terms for
    |R1| <= M plus midpoint-rule integrals of the two tails); the outer sums
    are truncated at |R2|, |R3| <= M.
    """
    return _oracle("11", x, M)


def eisenstein_oracle_E12(x, M: int = 100) -> float:
    """E_12 by the same iterated summation as :func:`eisenstein_oracle_E11`."""
    return _oracle("12", x, M)

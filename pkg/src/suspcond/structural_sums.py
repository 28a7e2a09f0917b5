"""Structural sums e_ij and their one-step convolutions e_{ij*pl}.

For a configuration a_1..a_N in the periodic cell,

    e_ij      = N^-2 sum_{k,m} E_ij(a_k - a_m)
    e_{ij*pl} = N^-3 sum_{k,m,s} E_ij(a_k - a_m) E_pl(a_m - a_s)

with every difference reduced to the cell by the minimum-image rule and the
k = m terms taking the E(0) conventions of :mod:`suspcond.eisenstein`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eisenstein import PAIRS, EisensteinEvaluator
from .errors import ValidationError
from .geometry import SphereConfiguration, pairwise_displacements

#: convolutions consumed by lambda11, lambda12, lambda13
REQUIRED_CONVOLUTIONS = (
    ("11", "11"), ("12", "12"), ("13", "13"),
    ("12", "11"), ("12", "22"), ("23", "13"),
    ("13", "11"), ("13", "33"), ("23", "12"),
)


def kernel_values(evaluator: EisensteinEvaluator, pq: str, disp: np.ndarray) -> np.ndarray:
    """E_pq on reduced displacements with face points averaged over both images.

    A component equal to -1/2 is also +1/2 modulo the lattice. The truncated
    expansion is not periodic, so such points take the mean over every
    representative on the cell faces; this keeps the parity of E_pq exact.
    """
    disp = np.asarray(disp, dtype=float)
    out = np.array(evaluator.evaluate(pq, disp, at_zero=True), dtype=float)
    face = disp == -0.5
    hit = np.any(face, axis=-1)
    if np.any(hit):
        d = disp[hit]
        fc = face[hit]
        acc = np.zeros(d.shape[:-1])
        for flips in np.ndindex(2, 2, 2):
            acc += evaluator.evaluate(pq, d + np.asarray(flips) * fc, at_zero=True)
        out[hit] = acc / 8.0
    return out


def conv_key(ij: str, pl: str) -> str:
    return f"{ij}*{pl}"


def _check_pair(pq: str) -> str:
    pq = str(pq)
    if pq not in PAIRS:
        raise ValidationError(f"unknown index pair {pq!r}")
    return pq


class KernelCache:
    """Kernel matrices K_pq[k, m] = E_pq(a_k - a_m) for one configuration.

    Each matrix, together with its column and row sums, is built once and
    reused by every sum that needs it.
    """

    def __init__(self, config: SphereConfiguration, evaluator: EisensteinEvaluator | None = None):
        self.config = config
        self.evaluator = evaluator or EisensteinEvaluator()
        self._disp = pairwise_displacements(config.centers)
        self._mats: dict[str, np.ndarray] = {}
        self._cols: dict[str, list[float]] = {}
        self._rows: dict[str, list[float]] = {}

    @property
    def n(self) -> int:
        return self.config.n

    def matrix(self, pq: str) -> np.ndarray:
        pq = _check_pair(pq)
        if pq not in self._mats:
            self._mats[pq] = kernel_values(self.evaluator, pq, self._disp)
        return self._mats[pq]

    def column_sums(self, pq: str) -> list[float]:
        """sum_k E_pq(a_k - a_m) for every m."""
        if pq not in self._cols:
            m = self.matrix(pq)
            self._cols[pq] = [math.fsum(col) for col in m.T]
        return self._cols[pq]

    def row_sums(self, pq: str) -> list[float]:
        """sum_s E_pq(a_m - a_s) for every m."""
        if pq not in self._rows:
            m = self.matrix(pq)
            self._rows[pq] = [math.fsum(row) for row in m]
        return self._rows[pq]

    def pair_sum(self, pq: str) -> float:
        return math.fsum(self.column_sums(pq)) / self.n**2

    def convolution_sum(self, ij: str, pl: str) -> float:
        c = self.column_sums(ij)
        r = self.row_sums(pl)
        return math.fsum(a * b for a, b in zip(c, r)) / self.n**3


def pair_sum(config: SphereConfiguration, ij: str,
             evaluator: EisensteinEvaluator | None = None) -> float:
    """e_ij of a configuration."""
    return KernelCache(config, evaluator).pair_sum(ij)


def starred_sums(config: SphereConfiguration,
                 evaluator: EisensteinEvaluator | None = None) -> tuple[float, float]:
    """(e11*, e11**): e11 on centers with coordinates (a2, a1, a3) and (a3, a2, a1)."""
    return (
        pair_sum(config.permuted((1, 0, 2)), "11", evaluator),
        pair_sum(config.permuted((2, 1, 0)), "11", evaluator),
    )


def convolution_sum(config: SphereConfiguration, ij: str, pl: str,
                    evaluator: EisensteinEvaluator | None = None) -> float:
    """e_{ij*pl} through the O(N^2) factorization over the middle index."""
    return KernelCache(config, evaluator).convolution_sum(ij, pl)


def convolution_sum_naive(config: SphereConfiguration, ij: str, pl: str,
                          evaluator: EisensteinEvaluator | None = None) -> float:
    """e_{ij*pl} by the plain O(N^3) triple loop (reference only)."""
    ev = evaluator or EisensteinEvaluator()
    d = pairwise_displacements(config.centers)
    n = config.n
    terms = []
    for k in range(n):
        for m in range(n):
            a = float(kernel_values(ev, _check_pair(ij), d[k, m]))
            for s in range(n):
                terms.append(a * float(kernel_values(ev, _check_pair(pl), d[m, s])))
    return math.fsum(terms) / n**3


@dataclass(frozen=True)
class StructuralSums:
    """All structural sums consumed by the conductivity formulas."""

    e11: float
    e12: float
    e13: float
    e23: float
    e11_star: float
    e11_dstar: float
    conv: dict = field(default_factory=dict)
    n: int = 1

    def c(self, ij: str, pl: str) -> float:
        """Convolution e_{ij*pl}, using e_{ij*pl} = e_{pl*ij} and E_qp = E_pq."""
        norm = {"21": "12", "31": "13", "32": "23"}
        ij, pl = norm.get(ij, ij), norm.get(pl, pl)
        for key in (conv_key(ij, pl), conv_key(pl, ij)):
            if key in self.conv:
                return self.conv[key]
        raise KeyError(conv_key(ij, pl))

    def as_dict(self) -> dict:
        out = {
            "N": self.n,
            "e11": self.e11, "e12": self.e12, "e13": self.e13, "e23": self.e23,
            "e11_star": self.e11_star, "e11_dstar": self.e11_dstar,
        }
        for key, v in self.conv.items():
            out["conv_" + key.replace("*", "_")] = v
        return out


def compute_structural_sums(config: SphereConfiguration,
                            evaluator: EisensteinEvaluator | None = None,
                            convolutions=REQUIRED_CONVOLUTIONS) -> StructuralSums:
    """Every pair and convolution sum needed by :mod:`suspcond.conductivity`.

    e11* and e11** equal e22 and e33 here: E_22 and E_33 are defined as the
    E_11 template on the same coordinate permutations.
    """
    cache = KernelCache(config, evaluator)
    conv = {conv_key(ij, pl): cache.convolution_sum(ij, pl) for ij, pl in convolutions}
    return StructuralSums(
        e11=cache.pair_sum("11"),
        e12=cache.pair_sum("12"),
        e13=cache.pair_sum("13"),
        e23=cache.pair_sum("23"),
        e11_star=cache.pair_sum("22"),
        e11_dstar=cache.pair_sum("33"),
        conv=conv,
        n=config.n,
    )

"""Effective conductivity tensor, anisotropy coefficient and reference formulas."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .structural_sums import StructuralSums, compute_structural_sums

C = 3.0 / (4.0 * math.pi)
#: f^3 coefficient of the isotropic RSA formula
ISOTROPIC_F3 = 4.80654


def _check_f(f: float) -> float:
    f = float(f)
    if not 0.0 <= f < 1.0:
        raise DomainError(f"concentration must lie in [0, 1), got {f}")
    return f


def f3_coefficient(e11_11: float, e12_12: float, e13_13: float) -> float:
    """3 (3/4pi)^2 [e_{11*11} + 3 (e_{12*12} + e_{13*13})]."""
    return 3.0 * C**2 * (e11_11 + 3.0 * (e12_12 + e13_13))


def lambda11(sums: StructuralSums, f: float) -> float:
    """lambda_11 to O(f^{10/3}) for perfectly conducting spheres."""
    f = _check_f(f)
    return (
        1.0 + 3.0 * f + 3.0 * f**2 * C * sums.e11
        + f**3 * f3_coefficient(sums.c("11", "11"), sums.c("12", "12"), sums.c("13", "13"))
    )


def lambda12(sums: StructuralSums, f: float) -> float:
    """Off-diagonal lambda_12 to O(f^{10/3}).

    The f^3 bracket keeps the three convolutions that are odd under
    x1 -> -x1 (see the project notes for the omitted mirror-even term).
    """
    f = _check_f(f)
    conv = sums.c("12", "11") + sums.c("12", "22") + sums.c("23", "13")
    return 9.0 * f**2 * (C * sums.e12 + f * C**2 * conv)


def lambda13(sums: StructuralSums, f: float) -> float:
    """lambda_12 with subscripts 2 and 3 interchanged."""
    f = _check_f(f)
    conv = sums.c("13", "11") + sums.c("13", "33") + sums.c("32", "12")
    return 9.0 * f**2 * (C * sums.e13 + f * C**2 * conv)


def lambda2_tensor(sums: StructuralSums) -> np.ndarray:
    """Second-order tensor Lambda^(2), the f^2 coefficient matrix."""
    e12, e13, e23 = sums.e12, sums.e13, sums.e23
    return (9.0 / (4.0 * math.pi)) * np.array([
        [sums.e11, 3 * e12, 3 * e13],
        [3 * e12, sums.e11_star, 3 * e23],
        [3 * e13, 3 * e23, sums.e11_dstar],
    ])


def deviator(sums: StructuralSums) -> np.ndarray:
    a, b, c = sums.e11, sums.e11_star, sums.e11_dstar
    g11, g22, g33 = 2 * a - b - c, 2 * b - a - c, 2 * c - a - b
    e12, e13, e23 = sums.e12, sums.e13, sums.e23
    return C * np.array([
        [g11, 9 * e12, 9 * e13],
        [9 * e12, g22, 9 * e23],
        [9 * e13, 9 * e23, g33],
    ])


def kappa(sums: StructuralSums) -> float:
    """Anisotropy coefficient |det Dev Lambda^(2)|; zero for isotropic media."""
    return abs(float(np.linalg.det(deviator(sums))))


KAPPA_SCALE = (9.0 / (4.0 * math.pi)) ** 3


# ---------------------------------------------------------------- reference formulas

def contrast(lambda1: float, lam: float = 1.0) -> float:
    """beta = (lambda1 - lambda) / (lambda1 + 2 lambda); lambda1 = inf gives 1."""
    if math.isinf(lambda1):
        return 1.0
    return (lambda1 - lam) / (lambda1 + 2.0 * lam)


def clausius_mossotti(f: float, beta: float = 1.0) -> float:
    f = _check_f(f)
    return (1.0 + 2.0 * beta * f) / (1.0 - beta * f)


def einstein_viscosity(f: float, mu: float = 1.0) -> float:
    """Effective viscosity mu_e of a dilute suspension."""
    f = _check_f(f)
    return mu * (1.0 + 2.5 * f)


def jeffrey_bracket(lambda1: float = math.inf) -> float:
    """Truncated bracket 3/4 + (9/16)(lambda1 + 2)/(2 lambda1 + 3) of the baseline formula."""
    ratio = 0.5 if math.isinf(lambda1) else (lambda1 + 2.0) / (2.0 * lambda1 + 3.0)
    return 0.75 + 9.0 / 16.0 * ratio


def jeffrey_f2_coefficient(lambda1: float = math.inf, beta: float | None = None) -> float:
    """f^2 coefficient 3 beta^2 + 3 beta^3 (bracket) of the baseline formula."""
    if beta is None:
        beta = contrast(lambda1)
    return 3.0 * beta**2 + 3.0 * beta**3 * jeffrey_bracket(lambda1)


def jeffrey(f: float, lambda1: float = math.inf, beta: float | None = None) -> float:
    f = _check_f(f)
    if beta is None:
        beta = contrast(lambda1)
    return 1.0 + 3.0 * beta * f + jeffrey_f2_coefficient(lambda1, beta) * f**2


def simple_cubic_cma(f: float) -> float:
    f = _check_f(f)
    return (1.0 + 2.0 * f) / (1.0 - f)


def berdichevsky_sc(f: float) -> float:
    f = _check_f(f)
    return (
        (1.0 + 2.0 * f) / (1.0 - f)
        + 3.913 * f ** (13 / 3) / (1.0 - f) ** 2
        + 1.469 * f ** (17 / 3) / (1.0 - f) ** 2
    )


def isotropic_rsa(f: float) -> float:
    f = _check_f(f)
    return 1.0 + 3.0 * f + 3.0 * f**2 + ISOTROPIC_F3 * f**3


def combined_rsa(f: float) -> float:
    f = _check_f(f)
    return (
        (1.0 + 2.0 * f) / (1.0 - f)
        + 1.80654 * f**3
        + 3.913 * f ** (13 / 3) / (1.0 - f) ** 2
        + 1.469 * f ** (17 / 3) / (1.0 - f) ** 2
    )


FORMULAS = {
    "clausius_mossotti": clausius_mossotti,
    "einstein_viscosity": einstein_viscosity,
    "jeffrey": jeffrey,
    "simple_cubic_cma": simple_cubic_cma,
    "berdichevsky_sc": berdichevsky_sc,
    "isotropic_rsa": isotropic_rsa,
    "combined_rsa": combined_rsa,
}


def asymptotic(formula: str, f: float, **params) -> float:
    """Evaluate a reference formula by id."""
    try:
        fn = FORMULAS[formula]
    except KeyError:
        raise ValidationError(f"unknown formula {formula!r}; choose from {sorted(FORMULAS)}") from None
    return fn(f, **params)


# ---------------------------------------------------------------- report

@dataclass(frozen=True)
class ConductivityReport:
    f: float
    beta: float
    lambda11: float
    lambda12: float
    lambda13: float
    lambda22: float
    lambda33: float
    lambda23: float
    Lambda2: np.ndarray
    deviator: np.ndarray
    kappa: float
    baselines: dict = field(default_factory=dict)
    truncation_order: str = "O(f^{10/3})"

    @property
    def kappa_normalized(self) -> float:
        return self.kappa / KAPPA_SCALE

    def as_dict(self) -> dict:
        out = {
            "f": self.f, "beta": self.beta,
            "lambda11": self.lambda11, "lambda12": self.lambda12, "lambda13": self.lambda13,
            "lambda22": self.lambda22, "lambda33": self.lambda33, "lambda23": self.lambda23,
        }
        for name, mat in (("Lambda2", self.Lambda2), ("dev", self.deviator)):
            for i in range(3):
                for j in range(3):
                    out[f"{name}_{i + 1}{j + 1}"] = float(mat[i, j])
        out["kappa"] = self.kappa
        out["kappa_normalized"] = self.kappa_normalized
        for k, v in self.baselines.items():
            out[k] = v
        out["truncation_order"] = self.truncation_order
        return out


def conductivity_report(sums: StructuralSums, f: float, beta: float = 1.0) -> ConductivityReport:
    """Tensor components, anisotropy and reference values at concentration ``f``.

    The structural-sum formulas hold for perfectly conducting inclusions;
    ``beta`` only enters the reference formulas.

    lambda22 and lambda33 carry terms through f^2 (from the starred sums),
    lambda23 likewise.
    """
    f = _check_f(f)
    lam2 = lambda2_tensor(sums)
    base = {
        "clausius_mossotti": clausius_mossotti(f, beta),
        "einstein_viscosity": einstein_viscosity(f),
        "jeffrey": jeffrey(f, beta=beta),
        "jeffrey_f2_coefficient": jeffrey_f2_coefficient(beta=beta),
        "this_work_f2_coefficient": 3.0 * C * sums.e11,
        "simple_cubic_cma": simple_cubic_cma(f),
        "berdichevsky_sc": berdichevsky_sc(f),
        "isotropic_rsa": isotropic_rsa(f),
        "combined_rsa": combined_rsa(f),
    }
    return ConductivityReport(
        f=f,
        beta=beta,
        lambda11=lambda11(sums, f),
        lambda12=lambda12(sums, f),
        lambda13=lambda13(sums, f),
        lambda22=1.0 + 3.0 * f + f**2 * lam2[1, 1],
        lambda33=1.0 + 3.0 * f + f**2 * lam2[2, 2],
        lambda23=f**2 * lam2[1, 2],
        Lambda2=lam2,
        deviator=deviator(sums),
        kappa=kappa(sums),
        baselines=base,
    )


def report_for(config, beta: float = 1.0, evaluator=None) -> ConductivityReport:
    sums = compute_structural_sums(config, evaluator)
    return conductivity_report(sums, config.concentration, beta)

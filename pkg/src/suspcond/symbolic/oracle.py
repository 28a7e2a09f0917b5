"""Independent numeric solver for the functional equations of a finite cluster.

Each u_k is harmonic in its ball and is stored as real spherical-harmonic
coefficients of degree <= L in the scaled variable (x - a_k) / r0. One Jacobi
sweep evaluates the right-hand side

    -sum_{m != k} r0 / |x - a_m| u_m(x*_(m)) + x_j - c_k

on a Gauss-Legendre x uniform-azimuth grid over each sphere surface and
projects it back; c_k is chosen each sweep so that u_k(a_k) = 0, which by the
mean value property is the surface mean of the right-hand side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sph_harm_y

from ..errors import DomainError, NoConvergence, ValidationError

MAX_SPHERES = 10


def _angles(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    theta = np.arccos(np.clip(u[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * math.pi)
    return theta, phi


def basis_labels(degree: int) -> list[tuple[int, int]]:
    return [(l, m) for l in range(degree + 1) for m in range(-l, l + 1)]


def real_harmonics(u: np.ndarray, degree: int) -> np.ndarray:
    """Orthonormal real spherical harmonics at unit vectors ``u``, shape (..., K)."""
    theta, phi = _angles(np.asarray(u, dtype=float))
    cols = []
    for l, m in basis_labels(degree):
        y = sph_harm_y(l, abs(m), theta, phi)
        if m == 0:
            cols.append(y.real)
        elif m > 0:
            cols.append(math.sqrt(2) * (-1) ** m * y.real)
        else:
            cols.append(math.sqrt(2) * (-1) ** m * y.imag)
    return np.stack(cols, axis=-1)


def sphere_grid(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors and weights that integrate band-limited functions exactly."""
    t, w = np.polynomial.legendre.leggauss(n_theta)
    phi = (np.arange(n_phi) + 0.5) * 2 * math.pi / n_phi
    st = np.sqrt(1 - t**2)
    pts = np.stack([
        np.outer(st, np.cos(phi)).ravel(),
        np.outer(st, np.sin(phi)).ravel(),
        np.repeat(t, n_phi),
    ], axis=-1)
    weights = np.repeat(w, n_phi) * (2 * math.pi / n_phi)
    return pts, weights


@dataclass
class OracleSolution:
    """Converged multipole representation of u_1..u_n."""

    centers: np.ndarray
    r0: float
    axis: int
    degree: int
    coeffs: np.ndarray
    constants: np.ndarray
    sweeps: int
    residual: float

    def values(self, k: int, points) -> np.ndarray:
        """u_k at points inside or on sphere k."""
        y = np.atleast_2d(np.asarray(points, dtype=float)) - self.centers[k]
        rho = np.linalg.norm(y, axis=-1)
        safe = np.where(rho[:, None] > 0, y / np.where(rho > 0, rho, 1)[:, None], [0.0, 0.0, 1.0])
        basis = real_harmonics(safe, self.degree)
        powers = np.array([l for l, _ in basis_labels(self.degree)])
        return (basis * (rho[:, None] / self.r0) ** powers) @ self.coeffs[k]

    def gradient(self, k: int) -> np.ndarray:
        """Gradient of u_k at a_k from the degree-1 coefficients."""
        sel = slice(1, 4)
        y1 = real_harmonics(np.eye(3), 1)[:, sel]
        return y1 @ self.coeffs[k, sel] / self.r0


def fixed_point_oracle(centers, r0: float, axis: int = 1, degree: int = 2,
                       tolerance: float = 1e-15, max_sweeps: int = 200,
                       n_theta: int | None = None, n_phi: int | None = None) -> OracleSolution:
    """Solve the cluster functional equations by Jacobi sweeps.

    Parameters
    ----------
    centers : array_like, shape (n, 3)
        At most ten sphere centers.
    r0 : float
        Common radius; must not exceed a tenth of the smallest center distance.
    axis : int
        Direction j of the driving term x_j.
    degree : int
        Highest spherical-harmonic degree kept per sphere.
    tolerance : float
        Sweep stops once the largest coefficient change is below this.

    Raises
    ------
    DomainError
        Outside the contraction regime or for more than ten spheres.
    NoConvergence
        If ``max_sweeps`` sweeps do not reach ``tolerance``.
    """
    a = np.atleast_2d(np.asarray(centers, dtype=float))
    n = len(a)
    if not 1 <= n <= MAX_SPHERES:
        raise DomainError(f"oracle supports 1..{MAX_SPHERES} spheres, got {n}")
    if axis not in (1, 2, 3):
        raise ValidationError("axis must be 1, 2 or 3")
    if degree < 1:
        raise ValidationError("degree must be at least 1")
    if not r0 > 0:
        raise DomainError("r0 must be positive")
    if n > 1:
        dmin = min(np.linalg.norm(a[i] - a[k]) for i in range(n) for k in range(i + 1, n))
        if r0 > 0.1 * dmin * (1 + 1e-12):
            raise DomainError(f"r0={r0} exceeds a tenth of the minimum distance {dmin}")
    n_theta = n_theta or max(16, 2 * degree + 8)
    n_phi = n_phi or 2 * n_theta
    omega, weights = sphere_grid(n_theta, n_phi)
    basis = real_harmonics(omega, degree)
    proj = basis.T * weights
    powers = np.array([l for l, _ in basis_labels(degree)])

    # maps the coefficients of u_m to the interaction term on sphere k
    inter: dict[tuple[int, int], np.ndarray] = {}
    for k in range(n):
        x = a[k] + r0 * omega
        for m in range(n):
            if m == k:
                continue
            d = x - a[m]
            dist = np.linalg.norm(d, axis=-1)
            rho = r0 / dist
            inter[k, m] = rho[:, None] * real_harmonics(d / dist[:, None], degree) * rho[:, None] ** powers
    drive = [a[k, axis - 1] + r0 * omega[:, axis - 1] for k in range(n)]

    coeffs = np.zeros((n, len(powers)))
    consts = np.zeros(n)
    for sweep in range(1, max_sweeps + 1):
        new = np.empty_like(coeffs)
        for k in range(n):
            f = drive[k].copy()
            for m in range(n):
                if m != k:
                    f -= inter[k, m] @ coeffs[m]
            consts[k] = float(weights @ f) / (4 * math.pi)
            new[k] = proj @ (f - consts[k])
        change = float(np.max(np.abs(new - coeffs)))
        coeffs = new
        if change <= tolerance:
            return OracleSolution(a, float(r0), axis, degree, coeffs, consts.copy(), sweep, change)
    raise NoConvergence(f"residual {change:.3e} after {max_sweeps} sweeps")


def truncation_residual(expr, anchor: int, centers, r0: float, axis: int = 1,
                        degree: int = 12, n_theta: int = 32) -> float:
    """Sup-norm gap max_k max_{|x-a_k|=r0} |u_k^sym(x) - u_k^oracle(x)|.

    ``expr`` is an analytic approximation whose anchor index is ``anchor``.
    """
    from .numeric import numeric_eval

    sol = fixed_point_oracle(centers, r0, axis=axis, degree=degree, n_theta=n_theta)
    omega, _ = sphere_grid(n_theta, 2 * n_theta)
    worst = 0.0
    for k in range(len(sol.centers)):
        pts = sol.centers[k] + r0 * omega
        sym = numeric_eval(expr, sol.centers, pts, anchor=(anchor, k), r0=r0, j=axis)
        worst = max(worst, float(np.max(np.abs(sym - sol.values(k, pts)))))
    return worst


def random_cluster(n: int, seed: int) -> np.ndarray:
    """``n`` uniform random centers rescaled so the closest pair is 1 apart."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    a = rng.random((n, 3))
    if n == 1:
        return a
    dmin = min(np.linalg.norm(a[i] - a[k]) for i in range(n) for k in range(i + 1, n))
    return a / dmin


def order_estimates(expr, anchor: int, centers, radii, axis: int = 1,
                    degree: int = 12) -> tuple[list[float], list[float]]:
    """Residuals at each radius and log2 ratios between consecutive radii."""
    res = [truncation_residual(expr, anchor, centers, r, axis=axis, degree=degree) for r in radii]
    slopes = [math.log(res[i] / res[i + 1]) / math.log(radii[i] / radii[i + 1])
              for i in range(len(res) - 1)]
    return res, slopes

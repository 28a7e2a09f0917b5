"""Periodic sphere configurations in the unit cube.

Coordinates are dimensionless cell coordinates in the half-open cell
[-1/2, 1/2)^3; the lattice is spanned by the unit vectors.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvariantError, PackingFailure, ParseError, ValidationError

#: Concentration above which RSA generation is refused.
RSA_MAX_CONCENTRATION = 0.38
DEFAULT_MAX_ATTEMPTS = 10**6


def wrap(d):
    """Shift every component of ``d`` by an integer into [-1/2, 1/2)."""
    d = np.asarray(d, dtype=float)
    r = d - np.floor(d + 0.5)
    # floor(d + 0.5) can round across the boundary for d within 1 ulp of 1/2
    r = np.where(r >= 0.5, r - 1.0, r)
    r = np.where(r < -0.5, r + 1.0, r)
    return r


def minimum_image(a, b) -> np.ndarray:
    """Periodic displacement ``a - b`` reduced to the half-open cell.

    +1/2 maps to -1/2, so every displacement has a unique representative.
    Works elementwise on stacked points of shape ``(..., 3)``.
    """
    return wrap(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))


def radius_for(n: int, f: float) -> float:
    """Common radius giving concentration ``f`` with ``n`` spheres per cell."""
    return (3.0 * f / (4.0 * math.pi * n)) ** (1.0 / 3.0)


def pairwise_displacements(centers: np.ndarray) -> np.ndarray:
    """(N, N, 3) array of minimum_image(a_k, a_m)."""
    c = np.asarray(centers, dtype=float)
    return wrap(c[:, None, :] - c[None, :, :])


@dataclass(frozen=True, eq=False)
class SphereConfiguration:
    """N equal spheres with centers in the periodic unit cell.

    The constructor validates the invariants: coordinates in the cell,
    pairwise periodic distances at least ``2 * radius`` and a concentration
    strictly between 0 and 1.
    """

    centers: np.ndarray
    radius: float
    attempts: int = field(default=0, compare=False)

    def __post_init__(self):
        c = np.array(self.centers, dtype=float, copy=True)
        if c.ndim == 1 and c.size == 3:
            c = c.reshape(1, 3)
        if c.ndim != 2 or c.shape[1] != 3 or c.shape[0] < 1:
            raise InvariantError(f"centers must have shape (N, 3), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)
        r = float(self.radius)
        object.__setattr__(self, "radius", r)
        if not (r > 0.0 and math.isfinite(r)):
            raise InvariantError(f"radius must be positive, got {r}")
        if not np.all(np.isfinite(c)) or np.any(c < -0.5) or np.any(c >= 0.5):
            raise InvariantError("centers must lie in [-1/2, 1/2)^3")
        if r >= 0.5:
            raise InvariantError("radius >= 1/2: a sphere overlaps its own periodic image")
        f = self.concentration
        if not 0.0 < f < 1.0:
            raise InvariantError(f"concentration {f} outside (0, 1)")
        if self.n > 1:
            dmin = self.min_distance()
            if dmin < 2.0 * r:
                raise InvariantError(
                    f"spheres overlap: minimum periodic distance {dmin:.6g} < 2*r0 = {2 * r:.6g}"
                )

    @property
    def n(self) -> int:
        return int(self.centers.shape[0])

    @property
    def concentration(self) -> float:
        return self.n * 4.0 / 3.0 * math.pi * self.radius**3

    def min_distance(self) -> float:
        """Smallest periodic distance between distinct centers (inf for N=1)."""
        if self.n < 2:
            return math.inf
        d = np.linalg.norm(pairwise_displacements(self.centers), axis=-1)
        np.fill_diagonal(d, np.inf)
        return float(d.min())

    def permuted(self, perm) -> "SphereConfiguration":
        """Configuration with coordinate axes reordered as ``perm``."""
        return SphereConfiguration(self.centers[:, list(perm)], self.radius)

    def transformed(self, perm=(0, 1, 2), signs=(1, 1, 1)) -> "SphereConfiguration":
        """Apply a signed coordinate permutation and re-wrap into the cell."""
        c = self.centers[:, list(perm)] * np.asarray(signs, dtype=float)
        return SphereConfiguration(wrap(c), self.radius)

    def translated(self, shift) -> "SphereConfiguration":
        return SphereConfiguration(wrap(self.centers + np.asarray(shift, dtype=float)), self.radius)

    def __eq__(self, other):
        if not isinstance(other, SphereConfiguration):
            return NotImplemented
        return self.radius == other.radius and np.array_equal(self.centers, other.centers)

    __hash__ = None


def _bin_of(p, nb: int) -> tuple[int, int, int]:
    return tuple(min(nb - 1, max(0, int(math.floor((float(v) + 0.5) * nb)))) for v in p)


def generate_rsa(
    n: int, f: float, seed: int, max_attempts: int = DEFAULT_MAX_ATTEMPTS
) -> SphereConfiguration:
    """Random sequential adsorption of ``n`` equal spheres at concentration ``f``.

    Candidates are uniform in the cell and rejected when they overlap an
    already placed sphere under the periodic minimum-image distance. The
    Philox counter-based generator makes a seed reproduce bit-for-bit.

    Raises
    ------
    PackingFailure
        If a sphere cannot be placed within ``max_attempts`` candidates.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not 0.0 < f <= RSA_MAX_CONCENTRATION:
        raise ValidationError(f"f must lie in (0, {RSA_MAX_CONCENTRATION}] for RSA, got {f}")
    r0 = radius_for(n, f)
    d2min = (2.0 * r0) ** 2
    rng = np.random.Generator(np.random.Philox(seed))

    nb = max(1, int(math.floor(1.0 / (2.0 * r0))))
    if nb >= 3:
        offsets = list(itertools.product((-1, 0, 1), repeat=3))
        neighbours = {
            b: tuple({((b[0] + o[0]) % nb, (b[1] + o[1]) % nb, (b[2] + o[2]) % nb) for o in offsets})
            for b in itertools.product(range(nb), repeat=3)
        }
    else:
        # too few bins for a 27-neighbourhood: every bin is a neighbour
        every = tuple(itertools.product(range(nb), repeat=3))
        neighbours = {b: every for b in every}
    bins: dict[tuple[int, int, int], list[tuple[float, float, float]]] = {}
    centers = np.empty((n, 3))
    floor = math.floor
    attempts = 0
    for k in range(n):
        for trial in range(max_attempts):
            attempts += 1
            p = rng.random(3) - 0.5
            x, y, z = float(p[0]), float(p[1]), float(p[2])
            b = _bin_of(p, nb)
            ok = True
            for cell in neighbours[b]:
                for cx, cy, cz in bins.get(cell, ()):
                    dx = x - cx
                    dx -= floor(dx + 0.5)
                    dy = y - cy
                    dy -= floor(dy + 0.5)
                    dz = z - cz
                    dz -= floor(dz + 0.5)
                    if dx * dx + dy * dy + dz * dz < d2min:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                centers[k] = p
                bins.setdefault(b, []).append((x, y, z))
                break
        else:
            raise PackingFailure(
                f"could not place sphere {k + 1} of {n} after {max_attempts} attempts"
            )
    return SphereConfiguration(centers, r0, attempts=attempts)


def simple_cubic(f: float) -> SphereConfiguration:
    """One sphere per cell at the origin."""
    return SphereConfiguration(np.zeros((1, 3)), radius_for(1, f))


def isotropic_orbit(a, radius: float) -> SphereConfiguration:
    """The 24 points (±a1,±a2,±a3), (±a2,±a1,±a3), (±a3,±a2,±a1)."""
    a1, a2, a3 = (float(v) for v in a)
    pts = []
    for base in ((a1, a2, a3), (a2, a1, a3), (a3, a2, a1)):
        for s in itertools.product((1.0, -1.0), repeat=3):
            pts.append([s[0] * base[0], s[1] * base[1], s[2] * base[2]])
    return SphereConfiguration(wrap(np.array(pts)), radius)


def write_packing(config: SphereConfiguration, path, comment: str | None = None) -> None:
    """Write the plain-text packing format (17 significant digits)."""
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"{config.n} {config.radius:.17g}")
    for x1, x2, x3 in config.centers:
        lines.append(f"{x1:.17g} {x2:.17g} {x3:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_packing(path) -> SphereConfiguration:
    text = Path(path).read_text(encoding="utf-8")
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if header is None:
                if len(parts) != 2:
                    raise ValueError("header must be 'N r0'")
                header = (int(parts[0]), float(parts[1]))
                if header[0] < 1:
                    raise ValueError("N must be positive")
            else:
                if len(parts) != 3:
                    raise ValueError("expected three coordinates")
                rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if header is None:
        raise ParseError("empty packing file")
    if len(rows) != header[0]:
        raise ParseError(f"header announces {header[0]} centers, found {len(rows)}")
    return SphereConfiguration(np.array(rows), header[1])

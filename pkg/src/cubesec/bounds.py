"""Closed-form volume bounds and extremal section constructions.

Covers the classical lower bound 2^k, the two Brascamp-Lieb-type upper
bounds, the optimal affine-cube constant, the subspaces attaining it
(coordinate-block frames), and the planar machinery of circumscribed
angles used to pin down the optimal two-dimensional sections.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .frame_core import TightFrame, EPS_TIGHT
from .polytope import SectionPolytope


def c_cube(n: int, k: int) -> float:
    """Optimal affine-cube section ratio for dimensions (n, k).

    Squared value is ceil(n/k)^(n - k*floor(n/k)) * floor(n/k)^(k - (n - k*floor(n/k))).
    Equals (n/k)^(k/2) when k divides n.
    """
    return math.sqrt(float(c_cube_squared(n, k)))


def c_cube_squared(n: int, k: int) -> int:
    """Exact integer square of the affine-cube ratio."""
    if not 1 <= k <= n:
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    lo, hi = n // k, -(-n // k)
    r = n - k * lo
    return hi**r * lo ** (k - r)


def vaaler_lower(k: int) -> float:
    """Tight lower bound on section volume: the coordinate section 2^k."""
    return float(2**k)


def ball_ratio(n: int, k: int) -> float:
    """Smaller of the two classical upper-bound factors on volume / 2^k."""
    if not 1 <= k <= n:
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    return min((n / k) ** (k / 2), 2 ** ((n - k) / 2))


def ball_upper(n: int, k: int) -> float:
    """Upper bound on the section volume itself."""
    return ball_ratio(n, k) * 2**k


def default_partition(n: int, k: int) -> list:
    """Balanced partition of range(n): first n % k parts get the extra index."""
    sizes = [-(-n // k)] * (n % k) + [n // k] * (k - n % k)
    parts, start = [], 0
    for size in sizes:
        parts.append(list(range(start, start + size)))
        start += size
    return parts


def _check_partition(n: int, k: int, partition) -> list:
    parts = [list(map(int, part)) for part in partition]
    if len(parts) != k or any(len(p) == 0 for p in parts):
        raise ValueError(f"partition must have exactly {k} nonempty parts")
    flat = sorted(i for part in parts for i in part)
    if flat != list(range(n)):
        raise ValueError(f"partition must cover range({n}) exactly once")
    return parts


def extremal_frame(
    n: int,
    k: int,
    partition=None,
    signs=None,
    *,
    eps_tight: float = EPS_TIGHT,
) -> TightFrame:
    """Tight frame whose section is an affine cube (a box).

    Each part of the partition contributes one axis direction; an index in
    a part of size d gets the vector e_axis / sqrt(d), times its sign.  The
    balanced default partition attains the optimal box volume
    2^k * c_cube(n, k); unbalanced partitions give smaller boxes.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    parts = default_partition(n, k) if partition is None else _check_partition(n, k, partition)
    if signs is None:
        signs = [1] * n
    if len(signs) != n or any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be a length-n sequence of +/-1")
    v = np.zeros((n, k))
    for axis, part in enumerate(parts):
        scale = 1.0 / math.sqrt(len(part))
        for i in part:
            v[i, axis] = signs[i] * scale
    return TightFrame(v, eps_tight=eps_tight)


def extremal_squared_volume_exact(n: int, k: int, partition=None) -> Fraction:
    """Exact squared volume of the box section of an axis-block frame.

    Rational route: every vector lies on a coordinate axis with rational
    squared length 1/d, so each slab clips the axis at squared half-width
    d; the squared box volume is the product of 4 * (squared half-width).
    """
    parts = default_partition(n, k) if partition is None else _check_partition(n, k, partition)
    sq_lengths = {}
    for axis, part in enumerate(parts):
        for _ in part:
            sq = Fraction(1, len(part))
            sq_lengths.setdefault(axis, []).append(sq)
    total = Fraction(1)
    for axis in range(k):
        hw_sq = min(1 / sq for sq in sq_lengths[axis])
        total *= 4 * hw_sq
    return total


@dataclass
class PlanarAngles:
    """Central half-angles of a cyclic, centrally symmetric polygon.

    f is the number of opposite facet pairs; phi holds one half-angle per
    pair, summing to pi/2; r is the circumradius.
    """

    f: int
    phi: np.ndarray
    r: float

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        if self.f != len(self.phi) or self.f < 1:
            raise ValueError("need one half-angle per facet pair")
        if np.any(self.phi <= 0) or np.any(self.phi >= np.pi / 2):
            raise ValueError("half-angles must lie in (0, pi/2)")
        if abs(self.phi.sum() - np.pi / 2) > 1e-8:
            raise ValueError("half-angles must sum to pi/2")
        if self.r <= 0:
            raise ValueError("circumradius must be positive")


def planar_angles(p: SectionPolytope, tol_cyclic: float = 1e-6) -> PlanarAngles:
    """Extract circumradius and the half-angle per facet pair of a polygon.

    Requires a cyclic section; raises otherwise.  Opposite facets share an
    angle, so only one representative per pair is returned, in rotational
    order.
    """
    if p.k != 2:
        raise ValueError("planar only")
    verts = np.asarray(p.vertices)
    radii = np.linalg.norm(verts, axis=1)
    if (radii.max() - radii.min()) / radii.mean() > tol_cyclic:
        raise ValueError("section is not cyclic within tolerance")
    r = float(radii.mean())
    if len(p.facets) % 2 != 0:
        raise ValueError("centrally symmetric polygon needs an even facet count")
    f = len(p.facets) // 2

    def centroid_angle(facet):
        return math.atan2(facet.centroid[1], facet.centroid[0])

    ordered = sorted(p.facets, key=centroid_angle)
    half_turn = ordered[:f]
    phi = []
    for facet in half_turn:
        a, b = verts[list(facet.vertex_indices)[:2]]
        ang = math.acos(
            np.clip(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)), -1, 1)
        )
        phi.append(ang / 2)
    return PlanarAngles(f=f, phi=np.array(phi), r=r)


def planar_area(a: PlanarAngles) -> float:
    """Area of a cyclic symmetric polygon from its half-angles: r^2 sum sin 2phi."""
    return float(a.r**2 * np.sum(np.sin(2 * a.phi)))


def g(f: float) -> float:
    """Facet-count side of the planar facet-pair inequality: f tan(pi / 2f)."""
    if f < 2:
        raise ValueError("need f >= 2")
    return float(f * math.tan(math.pi / (2 * f)))


def h(n: float) -> float:
    """Dimension side of the planar facet-pair inequality."""
    if n < 2:
        raise ValueError("need n >= 2")
    return float(4.0 / (n + 1) * math.sqrt(math.floor(n / 2) * math.ceil(n / 2)))


def claim_bounds(n: int, f_max: int = 64) -> int:
    """Largest facet-pair count f compatible with g(f) >= h(n).

    g decreases in f and h increases in n, so planar maximizers in high
    dimension cannot have many facet pairs; for n >= 8 only f = 2 survives.
    """
    best = 2
    for f in range(2, f_max + 1):
        if g(f) >= h(n):
            best = f
        else:
            break
    return best


def isoperimetric_check(a: PlanarAngles, i: int, slack: float = 1e-12) -> bool:
    """Verify the pinned-angle isoperimetric chain for a cyclic polygon.

    With half-angle i pinned and the rest equalized, the area cannot drop
    below the actual polygon area, and the regular polygon tops the chain:
    r^2 f sin(pi/f) >= r^2 (sin 2phi_i + (f-1) sin((pi - 2phi_i)/(f-1))) >= area.
    """
    if a.f < 2:
        raise ValueError("need at least two facet pairs")
    if not 0 <= i < a.f:
        raise IndexError(f"angle index {i} out of range for f={a.f}")
    r2 = a.r**2
    regular = r2 * a.f * math.sin(math.pi / a.f)
    phi_i = float(a.phi[i])
    pinned = r2 * (
        math.sin(2 * phi_i) + (a.f - 1) * math.sin((math.pi - 2 * phi_i) / (a.f - 1))
    )
    area = planar_area(a)
    return regular >= pinned - slack and pinned >= area - slack


def q(phi: float) -> float:
    """Angle weight cos^2(phi) sin(2phi) coupling multiplicity to half-angle."""
    if not 0 < phi < math.pi / 2:
        raise ValueError("need phi in (0, pi/2)")
    return float(math.cos(phi) ** 2 * math.sin(2 * phi))


@dataclass
class BoundsReport:
    """Bounds for a dimension pair, optionally with an achieved volume."""

    n: int
    k: int
    vaaler: float
    ball_ratio: float
    c_cube: float
    achieved_volume: float | None = None

    @classmethod
    def for_dimensions(cls, n: int, k: int, achieved_volume: float | None = None):
        return cls(
            n=n,
            k=k,
            vaaler=vaaler_lower(k),
            ball_ratio=ball_ratio(n, k),
            c_cube=c_cube(n, k),
            achieved_volume=achieved_volume,
        )

    @property
    def ball_volume(self) -> float:
        return self.ball_ratio * 2**self.k

    @property
    def conjectured_volume(self) -> float:
        return self.c_cube * 2**self.k

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "k": self.k,
            "vaaler_volume": self.vaaler,
            "ball_ratio": self.ball_ratio,
            "ball_volume": self.ball_volume,
            "optimal_box_ratio": self.c_cube,
            "optimal_box_volume": self.conjectured_volume,
        }
        if self.achieved_volume is not None:
            d["achieved_volume"] = self.achieved_volume
            d["within_bounds"] = bool(
                self.vaaler <= self.achieved_volume <= self.ball_volume + 1e-12
            )
            d["fraction_of_optimal_box"] = self.achieved_volume / self.conjectured_volume
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

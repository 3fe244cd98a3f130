"""First-order necessary conditions for volume-maximizing frames.

A local maximizer of the section volume must satisfy, for every frame
vector v: the slab of v supports the section in a facet; span{v} pierces
that facet in its centroid; the facet content balances against the vector
lengths; and (in the plane) all vertices lie on one circle.  Global
maximizers additionally obey two-sided bounds on the squared lengths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .frame_core import Frame
from .polytope import SectionPolytope, build_section, volume

TOL_CENTROID = 1e-6
TOL_BALANCE = 1e-6
TOL_CYCLIC = 1e-6
TOL_LENGTH = 1e-8


@dataclass
class CheckResult:
    passed: bool
    residual: float
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
        }


@dataclass
class ConditionsReport:
    """Pass/fail plus residuals for the criticality checks."""

    n: int
    k: int
    checks: dict
    holds_by_construction: tuple = (
        "section equals the intersection of its generating slabs",
    )

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "passed": self.passed,
            "holds_by_construction": list(self.holds_by_construction),
            "checks": {name: c.to_dict() for name, c in self.checks.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def check_facet_correspondence(s: Frame, p: SectionPolytope) -> float:
    """Count generators that are zero or support no facet of the section."""
    violations = 0
    for i in range(s.n):
        v = s.vectors[i]
        if np.linalg.norm(v) <= 1e-14 or p.facet_of_generator(i) is None:
            violations += 1
    return float(violations)


def _generator_facets(s: Frame, p: SectionPolytope):
    """Yield (index, signed facet centroid, facet) for every generator."""
    for i in range(s.n):
        f = p.facet_of_generator(i)
        if f is None:
            raise ValueError(
                f"generator {i} supports no facet; facet correspondence fails"
            )
        sign = next(sgn for j, sgn in f.normals if j == i)
        yield i, sign * f.centroid, f


def check_centroid(s: Frame, p: SectionPolytope) -> float:
    """Largest distance from a facet centroid to span{v} hitting its hyperplane.

    At a critical frame the line through v meets the hyperplane <x, v> = 1
    exactly in the centroid of the corresponding facet.
    """
    worst = 0.0
    for i, centroid, _ in _generator_facets(s, p):
        v = s.vectors[i]
        c_v = v / np.dot(v, v)
        worst = max(worst, float(np.linalg.norm(centroid - c_v)))
    return worst


def check_facet_balance(s: Frame, p: SectionPolytope) -> float:
    """Relative residual of the facet balance identity.

    For every facet with multiplicity d supported by a vector v:
    twice the facet content over |v| equals d |v|^2 times the volume.
    """
    vol = volume(p)
    worst = 0.0
    for i, _, f in _generator_facets(s, p):
        norm = float(np.linalg.norm(s.vectors[i]))
        lhs = 2.0 * f.measure / norm
        rhs = f.multiplicity * norm**2 * vol
        worst = max(worst, abs(lhs - rhs) / max(lhs, rhs))
    return worst


def check_cyclic(p: SectionPolytope) -> float:
    """Vertex-norm spread relative to the mean radius (planar only)."""
    if p.k != 2:
        raise ValueError("planar only")
    r = np.linalg.norm(np.asarray(p.vertices), axis=1)
    return float((r.max() - r.min()) / r.mean())


def check_length_bounds(s: Frame, n: int | None = None, k: int | None = None) -> float:
    """Largest violation of the squared-length window for maximizers.

    General window is [k/(n+k), k/(n-k)]; in the plane the sharper window
    [2/(n+1), 2/(n-1)] applies.
    """
    n = s.n if n is None else n
    k = s.k if k is None else k
    if n <= k:
        raise ValueError("length bounds require n > k")
    if k == 2:
        lo, hi = 2.0 / (n + 1), 2.0 / (n - 1)
    else:
        lo, hi = k / (n + k), k / (n - k)
    sq = s.squared_lengths()
    return float(max(0.0, lo - sq.min(), sq.max() - hi))


def verify_frame(
    s: Frame,
    p: SectionPolytope | None = None,
    *,
    tol_centroid: float = TOL_CENTROID,
    tol_balance: float = TOL_BALANCE,
    tol_cyclic: float = TOL_CYCLIC,
    tol_length: float = TOL_LENGTH,
) -> ConditionsReport:
    """Run all applicable criticality checks and collect a report.

    Facet correspondence gates the centroid and balance checks; when it
    fails they are reported as failed with infinite residual rather than
    raising.
    """
    if p is None:
        p = build_section(s)
    checks: dict[str, CheckResult] = {}
    corr = check_facet_correspondence(s, p)
    checks["facet_correspondence"] = CheckResult(corr == 0.0, corr, 0.0)
    if corr == 0.0:
        cen = check_centroid(s, p)
        bal = check_facet_balance(s, p)
    else:
        cen = bal = float("inf")
    checks["centroid"] = CheckResult(cen <= tol_centroid, cen, tol_centroid)
    checks["facet_balance"] = CheckResult(bal <= tol_balance, bal, tol_balance)
    if s.k == 2:
        cyc = check_cyclic(p)
        checks["cyclic"] = CheckResult(cyc <= tol_cyclic, cyc, tol_cyclic)
    if s.n > s.k:
        ln = check_length_bounds(s)
        checks["length_bounds"] = CheckResult(ln <= tol_length, ln, tol_length)
    return ConditionsReport(n=s.n, k=s.k, checks=checks)

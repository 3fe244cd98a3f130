"""Section polytopes of the cube generated by a frame.

The section generated by a frame S is the intersection of the symmetric
slabs |<x, v>| <= 1 over the frame vectors.  Construction is by brute
force at desk scale: solve every k-subset of the 2n bounding hyperplanes,
keep the feasible solutions, and group vertices into facets by their
active constraints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial import QhullError

from .frame_core import Frame, NotAFrameError, RANK_FLOOR, symmetrize

EPS_GEOM = 1e-9


class DegenerateFacetError(ValueError):
    """Facet has no (k-1)-dimensional content within tolerance."""


@dataclass
class FacetRecord:
    """One facet of a section polytope.

    normals holds (generator_index, sign) pairs for every frame vector
    whose hyperplane (after the sign flip) supports this facet; the pair
    count is the facet multiplicity d.
    """

    normals: tuple
    vertex_indices: tuple
    measure: float
    centroid: np.ndarray
    normal_vector: np.ndarray
    distance: float
    row_ids: tuple = field(default=(), repr=False)

    def __post_init__(self):
        self.centroid = np.asarray(self.centroid, dtype=float)
        self.centroid.setflags(write=False)
        self.normal_vector = np.asarray(self.normal_vector, dtype=float)
        self.normal_vector.setflags(write=False)

    @property
    def multiplicity(self) -> int:
        return len(self.normals)

    def to_dict(self) -> dict:
        return {
            "normals": [[int(i), int(s)] for i, s in self.normals],
            "vertex_indices": [int(i) for i in self.vertex_indices],
            "measure": float(self.measure),
            "centroid": self.centroid.tolist(),
        }


@dataclass
class SectionPolytope:
    """V-representation plus facet data of a cube section."""

    k: int
    vertices: np.ndarray
    facets: tuple
    generator: Frame | None
    eps_geom: float = EPS_GEOM
    _W: np.ndarray | None = field(default=None, repr=False)
    _c: np.ndarray | None = field(default=None, repr=False)
    _volume: float | None = field(default=None, repr=False)

    def facet_of_generator(self, index: int):
        """Facet supported by generator ``index`` (either sign), or None."""
        for f in self.facets:
            for i, _ in f.normals:
                if i == index:
                    return f
        return None

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "volume": volume(self),
            "vertices": self.vertices.tolist(),
            "facets": [f.to_dict() for f in self.facets],
        }


@lru_cache(maxsize=64)
def _combos(m: int, k: int) -> np.ndarray:
    a = np.array(list(itertools.combinations(range(m), k)), dtype=np.intp)
    a.setflags(write=False)
    return a


def _dedup(points: np.ndarray, eps: float) -> np.ndarray:
    """Merge points closer than ``eps`` per coordinate, order-stable."""
    if len(points) == 0:
        return points
    decimals = max(0, int(round(-np.log10(eps))))
    _, idx = np.unique(np.round(points, decimals), axis=0, return_index=True)
    pts = points[np.sort(idx)]
    if len(pts) > 1:
        pairs = cKDTree(pts).query_pairs(r=2 * eps, output_type="ndarray")
        if len(pairs):
            parent = np.arange(len(pts))

            def find(i):
                while parent[i] != i:
                    parent[i] = parent[parent[i]]
                    i = parent[i]
                return i

            for a, b in pairs:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            keep = np.array([find(i) == i for i in range(len(pts))])
            pts = pts[keep]
    return pts


def halfspace_vertices(W: np.ndarray, c: np.ndarray, eps: float = EPS_GEOM) -> np.ndarray:
    """Feasible intersection points of the system W x <= c, deduplicated.

    Brute force over all k-subsets of rows; near-singular subsets are
    skipped.  The caller is responsible for boundedness.
    """
    m, k = W.shape
    combos = _combos(m, k)
    A = W[combos]
    norms = np.linalg.norm(W, axis=1)
    scale = np.prod(norms[combos], axis=1)
    with np.errstate(all="ignore"):
        dets = np.linalg.det(A)
    good = np.abs(dets) > 1e-10 * np.maximum(scale, 1e-300)
    if not np.any(good):
        return np.empty((0, k))
    X = np.linalg.solve(A[good], c[combos[good]][..., None])[..., 0]
    slack = eps * (1.0 + np.abs(c))
    feas = np.all(X @ W.T <= c + slack, axis=1)
    return _dedup(X[feas], eps)


def convex_volume(points: np.ndarray, k: int) -> float:
    """Volume of the convex hull of ``points`` by triangulation."""
    if len(points) <= k:
        return 0.0
    if k == 1:
        return float(points.max() - points.min())
    if k == 2:
        center = points.mean(axis=0)
        d = points - center
        order = np.argsort(np.arctan2(d[:, 1], d[:, 0]))
        p = points[order]
        x, y = p[:, 0], p[:, 1]
        return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2)
    try:
        return float(ConvexHull(points).volume)
    except QhullError as exc:
        raise ValueError("degenerate polytope") from exc


def _extreme_points(points: np.ndarray, k: int) -> np.ndarray:
    """Restrict to actual vertices (tangency points are not extreme)."""
    if len(points) <= k + 1:
        return points
    if k == 1:
        return points[[int(points[:, 0].argmin()), int(points[:, 0].argmax())]]
    try:
        keep = np.sort(ConvexHull(points).vertices)
    except QhullError as exc:
        raise ValueError("degenerate polytope") from exc
    return points[keep]


def _hyperplane_basis(w: np.ndarray) -> np.ndarray:
    """Orthonormal basis (k x (k-1)) of the hyperplane orthogonal to w."""
    k = len(w)
    q, _ = np.linalg.qr(np.column_stack([w / np.linalg.norm(w), np.eye(k)]))
    return q[:, 1:k]


def _poly_geometry(coords: np.ndarray, dim: int):
    """Measure, centroid, and a triangulation of a convex polytope.

    ``coords`` are corner points in R^dim, dim in {0, 1, 2, 3}.  Each
    returned simplex is a (dim+1, dim) array of corner points.  Raises
    :class:`DegenerateFacetError` when the points have no dim-dimensional
    content.
    """
    if dim == 0:
        return 1.0, coords[0].copy(), [coords[:1].copy()]
    if len(coords) <= dim:
        raise DegenerateFacetError("degenerate facet")
    if dim == 1:
        t = coords[:, 0]
        lo, hi = int(t.argmin()), int(t.argmax())
        simplices = [np.vstack([coords[lo], coords[hi]])]
    else:
        try:
            hull = ConvexHull(coords)
        except QhullError as exc:
            raise DegenerateFacetError("degenerate facet") from exc
        if dim == 2:
            order = hull.vertices  # counterclockwise cycle
            apex = coords[order[0]]
            simplices = [
                np.vstack([apex, coords[order[i]], coords[order[i + 1]]])
                for i in range(1, len(order) - 1)
            ]
        else:
            interior = coords[hull.vertices].mean(axis=0)
            simplices = [
                np.vstack([interior] + [coords[i] for i in simplex])
                for simplex in hull.simplices
            ]
    fct = factorial(dim)
    measure = 0.0
    centroid = np.zeros(dim)
    for s in simplices:
        e = s[1:] - s[0]
        g = max(float(np.linalg.det(e @ e.T)), 0.0)
        m = np.sqrt(g) / fct
        measure += m
        centroid += m * s.mean(axis=0)
    if measure <= 0.0:
        raise DegenerateFacetError("degenerate facet")
    return measure, centroid / measure, simplices


def _facet_geometry(pts: np.ndarray, k: int, w: np.ndarray):
    """Triangulate a facet given its corner points in ambient coordinates.

    Returns (measure, centroid, simplices) with simplices as (k, k) arrays
    of (k-1)-simplex corners in R^k.
    """
    if k == 1:
        return 1.0, pts[0].copy(), [pts[:1].copy()]
    basis = _hyperplane_basis(w)
    origin = pts[0]
    measure, centroid, simplices = _poly_geometry((pts - origin) @ basis, k - 1)
    to_ambient = lambda c: origin + c @ basis.T  # noqa: E731
    return measure, to_ambient(centroid), [to_ambient(s) for s in simplices]


def _coincident_row_groups(W: np.ndarray, tol: float):
    """Group constraint rows describing the same oriented hyperplane."""
    m = len(W)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if np.max(np.abs(W[i] - W[j])) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return [groups[r] for r in sorted(groups)]


def _facet_slice(W, c, rows, k, eps):
    """Exact facet of the polytope {W x <= c} on the hyperplane of ``rows``.

    The facet is the hyperplane's slice through all remaining halfspaces,
    computed by a (k-1)-dimensional vertex enumeration inside the plane.
    Returns (measure, centroid, ambient corner points) or None when the
    slice has no (k-1)-dimensional content (tangent or inactive slabs).
    """
    rep = rows[0]
    w = W[rep]
    p0 = w * (c[rep] / np.dot(w, w))
    others = np.setdiff1d(np.arange(len(W)), rows)
    if k == 1:
        if np.all(W[others] @ p0 <= c[others] + eps * (1.0 + np.abs(c[others]))):
            return 1.0, p0, p0[None, :]
        return None
    basis = _hyperplane_basis(w)
    A2 = W[others] @ basis
    b2 = c[others] - W[others] @ p0
    corners = halfspace_vertices(A2, b2, eps)
    try:
        measure, centroid, _ = _poly_geometry(corners, k - 1)
    except DegenerateFacetError:
        return None
    return measure, p0 + centroid @ basis.T, p0 + corners @ basis.T


def build_section(s: Frame, eps_geom: float = EPS_GEOM) -> SectionPolytope:
    """Construct the section of the cube generated by the frame ``s``.

    Zero vectors contribute no constraint.  Generators whose slab only
    touches the section in a face of dimension below k-1 produce no facet
    record; the criticality checks flag them downstream.
    """
    V = s.vectors
    a = symmetrize(V.T @ V)
    if np.linalg.eigvalsh(a)[0] < RANK_FLOOR:
        raise NotAFrameError("not a frame")
    nz = np.linalg.norm(V, axis=1) > 1e-14
    gens = np.nonzero(nz)[0]
    Vnz = V[nz]
    W = np.vstack([Vnz, -Vnz])
    c = np.ones(len(W))
    row_gen = [(int(i), 1) for i in gens] + [(int(i), -1) for i in gens]

    verts = halfspace_vertices(W, c, eps_geom)
    if len(verts) <= s.k:
        raise NotAFrameError("not a frame")
    verts = _extreme_points(verts, s.k)
    lookup = cKDTree(verts) if len(verts) else None

    facets = []
    for rows in _coincident_row_groups(W, eps_geom):
        sliced = _facet_slice(W, c, rows, s.k, eps_geom)
        if sliced is None:
            continue
        measure, centroid, corners = sliced
        # facet corners are polytope vertices; map them to stored indices
        dist, idx = lookup.query(corners, distance_upper_bound=1e-6)
        matched = tuple(sorted(set(int(i) for d, i in zip(dist, idx) if np.isfinite(d))))
        if len(matched) < s.k:
            continue
        w = W[rows[0]]
        facets.append(
            FacetRecord(
                normals=tuple(row_gen[r] for r in rows),
                vertex_indices=matched,
                measure=measure,
                centroid=centroid,
                normal_vector=w.copy(),
                distance=float(c[rows[0]] / np.linalg.norm(w)),
                row_ids=tuple(rows),
            )
        )

    verts.setflags(write=False)
    return SectionPolytope(
        k=s.k,
        vertices=verts,
        facets=tuple(facets),
        generator=s,
        eps_geom=eps_geom,
        _W=W,
        _c=c,
    )


def volume(p: SectionPolytope) -> float:
    """Volume by the pyramid decomposition over facets.

    Each facet contributes distance-to-origin times its content over k.
    Cross-check against :func:`volume_by_triangulation` where independence
    matters.
    """
    if p._volume is None:
        p._volume = float(
            sum(f.distance * f.measure for f in p.facets) / p.k
        )
    return p._volume


def volume_by_triangulation(p: SectionPolytope) -> float:
    """Independent volume oracle: triangulate the vertex hull."""
    return convex_volume(np.asarray(p.vertices), p.k)


def section_volume_fast(vectors: np.ndarray, eps_geom: float = EPS_GEOM) -> float:
    """Volume of the generated section without facet bookkeeping.

    Fast path for optimizer inner loops; agrees with
    ``volume(build_section(...))`` to triangulation accuracy.
    """
    nz = np.linalg.norm(vectors, axis=1) > 1e-14
    Vnz = vectors[nz]
    W = np.vstack([Vnz, -Vnz])
    c = np.ones(len(W))
    verts = halfspace_vertices(W, c, eps_geom)
    k = vectors.shape[1]
    if len(verts) <= k:
        raise NotAFrameError("not a frame")
    return convex_volume(verts, k)


def facet_centroid(p: SectionPolytope, f: FacetRecord) -> np.ndarray:
    """Recompute the centroid of a facet from its vertices by triangulation."""
    pts = np.asarray(p.vertices)[list(f.vertex_indices)]
    _, centroid, _ = _facet_geometry(pts, p.k, f.normal_vector)
    return centroid


def pyramid_volume(p: SectionPolytope, f: FacetRecord) -> float:
    """Volume of the cone from the origin over a facet.

    Computed by full k-dimensional determinants over a facet triangulation,
    independently of the distance-times-measure formula.
    """
    pts = np.asarray(p.vertices)[list(f.vertex_indices)]
    _, _, simplices = _facet_geometry(pts, p.k, f.normal_vector)
    fct = factorial(p.k)
    return float(sum(abs(np.linalg.det(s)) for s in simplices) / fct)


def shift_facet_predict(p: SectionPolytope, f: FacetRecord, h: float) -> float:
    """First-order volume change when a facet is shifted outward by ``h``."""
    return float(h * f.measure)


def shifted_section_volume(p: SectionPolytope, f: FacetRecord, h: float) -> float:
    """Rebuild the section with facet ``f`` shifted outward by ``h``.

    All constraint rows supporting the facet move together (they describe
    the same hyperplane); the opposite facet stays put, so the rebuilt body
    is generally not centrally symmetric.
    """
    c = p._c.copy()
    for r in f.row_ids:
        c[r] += h * np.linalg.norm(p._W[r])
    verts = halfspace_vertices(p._W, c, p.eps_geom)
    return convex_volume(verts, p.k)


def rotate_facet_predict(
    p: SectionPolytope, f: FacetRecord, w: np.ndarray, u: np.ndarray, t: float
) -> float:
    """First-order volume change when ``w`` is tilted to ``w + t u``.

    ``w`` is the scaled outer normal of the facet and ``u`` a unit vector
    orthogonal to it.  The hyperplane pivots around the point c_w where
    span{w} pierces it; the halfspace tightens on the side of the facet
    along +u and loosens on the other, so the net change is minus the
    facet's first moment about the pivot:

        vol' - vol = -(measure / |w|) <centroid - c_w, u> t + o(t).
    """
    w = np.asarray(w, dtype=float)
    u = np.asarray(u, dtype=float)
    if abs(np.dot(u, w)) > 1e-12:
        raise ValueError("u must be orthogonal to w")
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError("u must be a unit vector")
    c_w = w / np.dot(w, w)
    return float(-f.measure / np.linalg.norm(w) * np.dot(f.centroid - c_w, u) * t)


def rotated_section_volume(
    p: SectionPolytope, f: FacetRecord, u: np.ndarray, t: float
) -> float:
    """Rebuild the section with the facet's normal tilted by ``t u``."""
    W = p._W.copy()
    for r in f.row_ids:
        W[r] = W[r] + t * np.asarray(u, dtype=float)
    verts = halfspace_vertices(W, p._c, p.eps_geom)
    return convex_volume(verts, p.k)

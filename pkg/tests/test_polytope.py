"""Tests for section construction, volumes, facets, and facet transformations."""

import math

import numpy as np
import pytest

from cubesec.frame_core import Frame, NotAFrameError, TightFrame, frame_edit, random_tight_frame
from cubesec.polytope import (
    DegenerateFacetError,
    FacetRecord,
    build_section,
    facet_centroid,
    pyramid_volume,
    rotate_facet_predict,
    rotated_section_volume,
    section_volume_fast,
    shift_facet_predict,
    shifted_section_volume,
    volume,
    volume_by_triangulation,
)
from cubesec.bounds import extremal_frame


def square_frame():
    return Frame([[1.0, 0.0], [0.0, 1.0]])


def hexagonal_frame():
    r = math.sqrt(2 / 3)
    return TightFrame(
        [(r * math.cos(j * math.pi / 3), r * math.sin(j * math.pi / 3)) for j in range(3)]
    )


def sorted_rows(a):
    a = np.asarray(a)
    return a[np.lexsort(a.T[::-1])]


class TestBuildSection:
    def test_square(self):
        p = build_section(square_frame())
        assert len(p.vertices) == 4 and len(p.facets) == 4
        expected = [[-1, -1], [-1, 1], [1, -1], [1, 1]]
        np.testing.assert_allclose(sorted_rows(p.vertices), expected, atol=1e-12)
        assert volume(p) == pytest.approx(4.0)

    def test_regular_hexagon(self):
        p = build_section(hexagonal_frame())
        assert len(p.vertices) == 6 and len(p.facets) == 6
        apothem = math.sqrt(3 / 2)
        for f in p.facets:
            assert f.distance == pytest.approx(apothem, rel=1e-12)
        assert volume(p) == pytest.approx(3 * math.sqrt(3), rel=1e-12)
        radii = np.linalg.norm(p.vertices, axis=1)
        np.testing.assert_allclose(radii, math.sqrt(2), rtol=1e-12)

    def test_extremal_rectangle(self):
        p = build_section(extremal_frame(5, 2))
        a, b = math.sqrt(3), math.sqrt(2)
        expected = [[-a, -b], [-a, b], [a, -b], [a, b]]
        np.testing.assert_allclose(sorted_rows(p.vertices), expected, atol=1e-12)
        assert volume(p) == pytest.approx(4 * math.sqrt(6), rel=1e-12)

    def test_one_dimensional_section(self):
        p = build_section(Frame([[0.5], [1.0]]))
        np.testing.assert_allclose(sorted_rows(p.vertices), [[-1.0], [1.0]])
        assert volume(p) == pytest.approx(2.0)
        assert all(f.measure == 1.0 for f in p.facets)

    def test_rank_deficient_rejected(self):
        s = Frame([[1.0, 0.0], [0.0, 1.0]], require_span=False)
        bad = Frame(np.array([[1.0, 0.0], [2.0, 0.0]]), require_span=False)
        assert build_section(s) is not None
        with pytest.raises(NotAFrameError, match="not a frame"):
            build_section(bad)

    def test_tangent_slab_yields_no_facet(self):
        s = Frame([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        p = build_section(s)
        assert len(p.facets) == 4
        assert p.facet_of_generator(2) is None
        assert p.facet_of_generator(0) is not None

    def test_zero_vector_contributes_nothing(self):
        p_with = build_section(Frame([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
        p_without = build_section(square_frame())
        np.testing.assert_allclose(
            sorted_rows(p_with.vertices), sorted_rows(p_without.vertices)
        )

    def test_parallel_generators_share_facet(self):
        s = Frame([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        p = build_section(s)
        f = p.facet_of_generator(0)
        assert f.multiplicity == 2
        assert {i for i, _ in f.normals} == {0, 2}

    def test_central_symmetry_random(self):
        rng = np.random.default_rng(20)
        for _ in range(40):
            k = int(rng.integers(1, 5))
            n = int(rng.integers(k + 1, 9))
            p = build_section(random_tight_frame(n, k, rng))
            v = np.asarray(p.vertices)
            np.testing.assert_allclose(
                sorted_rows(v), sorted_rows(-v), atol=1e-9
            )

    def test_dump_format(self):
        d = build_section(square_frame()).to_dict()
        assert set(d) == {"k", "volume", "vertices", "facets"}
        assert set(d["facets"][0]) == {"normals", "vertex_indices", "measure", "centroid"}


class TestVolume:
    def test_matches_triangulation_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(60):
            k = int(rng.integers(1, 5))
            n = int(rng.integers(k + 1, 9))
            p = build_section(random_tight_frame(n, k, rng))
            assert volume(p) == pytest.approx(volume_by_triangulation(p), rel=1e-9)

    def test_pyramid_additivity(self):
        rng = np.random.default_rng(22)
        for _ in range(30):
            k = int(rng.integers(2, 5))
            n = int(rng.integers(k + 1, 8))
            p = build_section(random_tight_frame(n, k, rng))
            total = sum(pyramid_volume(p, f) for f in p.facets)
            assert total == pytest.approx(volume(p), rel=1e-9)

    def test_removing_a_vector_never_shrinks(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            k = int(rng.integers(2, 4))
            n = int(rng.integers(k + 2, 9))
            s = random_tight_frame(n, k, rng)
            before = volume(build_section(s))
            i = int(rng.integers(n))
            try:
                after = volume(build_section(frame_edit(s, remove=i)))
            except NotAFrameError:
                continue
            assert after >= before - 1e-9 * before

    def test_duplicate_append_leaves_section_unchanged(self):
        rng = np.random.default_rng(24)
        s = random_tight_frame(6, 3, rng)
        dup = frame_edit(s, append=s.vectors[2])
        p, q = build_section(s), build_section(dup)
        assert volume(q) == pytest.approx(volume(p), rel=1e-12)
        np.testing.assert_allclose(
            sorted_rows(p.vertices), sorted_rows(q.vertices), atol=1e-9
        )

    def test_near_coincident_planes_not_double_counted(self):
        # two constraint planes at a ~1e-6 angle cross inside a common
        # facet band; facet contents must tile the band, not overlap
        from cubesec.frame_core import whiten

        base = np.array(
            [
                [1 / math.sqrt(2), 0.0, 0.0],
                [1 / math.sqrt(2), 1e-6, -3e-7],
                [0.0, 1 / math.sqrt(2), 0.0],
                [0.0, 1 / math.sqrt(2), 4e-7],
                [0.0, 0.0, 1.0],
            ]
        )
        _, s = whiten(Frame(base))
        p = build_section(s)
        assert volume(p) == pytest.approx(volume_by_triangulation(p), rel=1e-9)
        total = sum(pyramid_volume(p, f) for f in p.facets)
        assert total == pytest.approx(volume(p), rel=1e-9)
        assert volume(p) <= 16.0 + 1e-9

    def test_fast_path_agrees(self):
        rng = np.random.default_rng(25)
        for _ in range(30):
            k = int(rng.integers(2, 5))
            n = int(rng.integers(k + 1, 9))
            s = random_tight_frame(n, k, rng)
            assert section_volume_fast(s.vectors) == pytest.approx(
                volume(build_section(s)), rel=1e-9
            )


class TestFacetGeometry:
    def test_square_centroids(self):
        p = build_section(square_frame())
        cents = sorted_rows([f.centroid for f in p.facets])
        np.testing.assert_allclose(
            cents, [[-1, 0], [0, -1], [0, 1], [1, 0]], atol=1e-12
        )

    def test_rectangle_centroid_on_axis(self):
        p = build_section(extremal_frame(5, 2))
        f = p.facet_of_generator(0)  # x-block generator
        np.testing.assert_allclose(np.abs(f.centroid), [math.sqrt(3), 0.0], atol=1e-12)

    def test_triangle_facet_barycenter(self):
        # corner of the cube cut by a diagonal slab: triangular facet
        s = Frame([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [0.4, 0.4, 0.4]])
        p = build_section(s)
        f = p.facet_of_generator(3)
        tri = np.asarray(p.vertices)[list(f.vertex_indices)]
        assert len(tri) == 3
        np.testing.assert_allclose(f.centroid, tri.mean(axis=0), atol=1e-12)
        np.testing.assert_allclose(facet_centroid(p, f), f.centroid, atol=1e-12)

    def test_recomputed_centroid_matches_stored(self):
        rng = np.random.default_rng(26)
        for _ in range(20):
            k = int(rng.integers(2, 5))
            n = int(rng.integers(k + 1, 8))
            p = build_section(random_tight_frame(n, k, rng))
            for f in p.facets:
                np.testing.assert_allclose(
                    facet_centroid(p, f), f.centroid, atol=1e-10
                )

    def test_facet_vertices_on_hyperplane(self):
        rng = np.random.default_rng(27)
        p = build_section(random_tight_frame(7, 3, rng))
        for f in p.facets:
            pts = np.asarray(p.vertices)[list(f.vertex_indices)]
            np.testing.assert_allclose(pts @ f.normal_vector, 1.0, atol=1e-9)

    def test_degenerate_facet_raises(self):
        p = build_section(square_frame())
        fake = FacetRecord(
            normals=((0, 1),),
            vertex_indices=(0, 0),
            measure=0.0,
            centroid=np.zeros(2),
            normal_vector=np.array([1.0, 0.0]),
            distance=1.0,
        )
        with pytest.raises(DegenerateFacetError, match="degenerate facet"):
            facet_centroid(p, fake)


class TestShiftPredictor:
    def test_square_facet(self):
        p = build_section(square_frame())
        f = p.facet_of_generator(0)
        assert shift_facet_predict(p, f, 0.1) == pytest.approx(0.2)
        # exact rebuild: moving one side of the square is exactly linear
        assert shifted_section_volume(p, f, 0.1) - volume(p) == pytest.approx(0.2)

    def test_rectangle_facet(self):
        p = build_section(extremal_frame(5, 2))
        f = p.facet_of_generator(0)
        h = 0.05
        assert shift_facet_predict(p, f, h) == pytest.approx(h * 2 * math.sqrt(2))

    def test_zero_shift(self):
        p = build_section(square_frame())
        assert shift_facet_predict(p, p.facets[0], 0.0) == 0.0

    def test_finite_difference_convergence(self):
        rng = np.random.default_rng(28)
        for _ in range(15):
            k = int(rng.integers(2, 4))
            n = int(rng.integers(k + 1, 8))
            p = build_section(random_tight_frame(n, k, rng))
            f = p.facets[int(rng.integers(len(p.facets)))]
            sign = 1.0 if rng.random() < 0.5 else -1.0
            base = volume(p)
            errs = []
            for h in (1e-3, 1e-4, 1e-5):
                delta = shifted_section_volume(p, f, sign * h) - base
                errs.append(abs(delta - shift_facet_predict(p, f, sign * h)))
            if errs[0] < 1e-11:
                continue
            assert errs[0] > errs[1] > errs[2]
            assert errs[2] <= 0.1 * errs[0]


class TestRotatePredictor:
    def test_centered_facet_has_zero_slope(self):
        p = build_section(square_frame())
        f = p.facet_of_generator(0)
        w = f.normal_vector
        u = np.array([0.0, 1.0])
        assert rotate_facet_predict(p, f, w, u, 0.3) == pytest.approx(0.0, abs=1e-14)

    def test_zero_t(self):
        p = build_section(hexagonal_frame())
        f = p.facets[0]
        w = f.normal_vector
        u = np.array([-w[1], w[0]]) / np.linalg.norm(w)
        assert rotate_facet_predict(p, f, w, u, 0.0) == 0.0

    def test_orthogonality_enforced(self):
        p = build_section(square_frame())
        f = p.facet_of_generator(0)
        with pytest.raises(ValueError, match="orthogonal"):
            rotate_facet_predict(p, f, f.normal_vector, np.array([1.0, 0.0]), 0.1)
        with pytest.raises(ValueError, match="unit"):
            rotate_facet_predict(p, f, f.normal_vector, np.array([0.0, 2.0]), 0.1)

    def test_off_center_facet_nonzero_slope(self):
        # square corner clipped asymmetrically: the cut facet's centroid
        # does not lie on the axis of its normal
        s = Frame([[1.0, 0.0], [0.0, 1.0], [0.7, 0.4]])
        p = build_section(s)
        f = p.facet_of_generator(2)
        w = f.normal_vector
        u = np.array([-w[1], w[0]]) / np.linalg.norm(w)
        pred = rotate_facet_predict(p, f, w, u, 1.0)
        assert abs(pred) > 1e-3
        base = volume(p)
        t = 1e-5
        fd = (rotated_section_volume(p, f, u, t) - base) / t
        assert fd == pytest.approx(pred, rel=1e-3)

    def test_finite_difference_convergence(self):
        rng = np.random.default_rng(29)
        for _ in range(15):
            k = int(rng.integers(2, 4))
            n = int(rng.integers(k + 1, 8))
            p = build_section(random_tight_frame(n, k, rng))
            f = p.facets[int(rng.integers(len(p.facets)))]
            w = f.normal_vector
            u = rng.standard_normal(k)
            u -= np.dot(u, w) / np.dot(w, w) * w
            u /= np.linalg.norm(u)
            base = volume(p)
            errs = []
            for t in (1e-3, 1e-4, 1e-5):
                delta = rotated_section_volume(p, f, u, t) - base
                errs.append(abs(delta - rotate_facet_predict(p, f, w, u, t)))
            if errs[0] < 1e-11:
                continue
            assert errs[0] > errs[1] > errs[2]
            assert errs[2] <= 0.1 * errs[0]

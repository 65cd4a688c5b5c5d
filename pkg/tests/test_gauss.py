import numpy as np
import pytest

import flatfronts as ff
from flatfronts import (
    DegenerateQuad,
    DegenerateStep,
    EdgeLabelling,
    Inconsistent,
    InvalidParameter,
    QuadGrid,
    a_of,
    build_front,
    darboux_propagate,
    extract_pair,
    gauss_maps,
    lift_affine,
    make_linear,
    pair_labelling,
    projective_cross_ratio,
    verify_pair_cross_ratios,
)
from flatfronts.frame import minkowski, pauli_unpack
from flatfronts.gauss import det2v, front_pair_laws, validate_projective


def projective_distance(u, v):
    return np.abs(det2v(u, v)) / (
        np.linalg.norm(u, axis=-1) * np.linalg.norm(v, axis=-1)
    )


class TestProjectiveCrossRatio:
    def test_matches_affine(self):
        lifts = lift_affine(np.array([0.0, 1.0, 1.0 + 1.0j, 1.0j]))
        assert projective_cross_ratio(*lifts) == -1

    def test_matches_affine_random(self, rng):
        for _ in range(100):
            z = rng.normal(size=4) + 1j * rng.normal(size=4)
            if min(abs(z[2] - z[1]), abs(z[0] - z[3])) < 0.1:
                continue
            expected = ff.cross_ratio(*z)
            got = projective_cross_ratio(*lift_affine(z))
            assert abs(got - expected) < 1e-13 * max(1.0, abs(expected))

    def test_scale_invariance(self, rng):
        lifts = list(lift_affine(np.array([0.2 + 1j, 1.5, -1.0 + 0.5j, 2.0j])))
        base = projective_cross_ratio(*lifts)
        scales = rng.normal(size=4) + 1j * rng.normal(size=4)
        rescaled = [lam * v for lam, v in zip(scales, lifts)]
        assert abs(projective_cross_ratio(*rescaled) - base) < 1e-14 * abs(base)

    def test_common_unimodular_invariance(self, rng):
        lifts = lift_affine(np.array([0.2 + 1j, 1.5, -1.0 + 0.5j, 2.0j]))
        base = projective_cross_ratio(*lifts)
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        g = g / np.sqrt(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])
        moved = [g @ v for v in lifts]
        assert abs(projective_cross_ratio(*moved) - base) < 1e-12 * abs(base)

    def test_degenerate(self):
        a = np.array([1.0, 2.0], dtype=complex)
        d = 3.0 * a
        b = np.array([0.0, 1.0], dtype=complex)
        c = np.array([1.0, 0.0], dtype=complex)
        with pytest.raises(DegenerateQuad):
            projective_cross_ratio(a, b, c, d)


class TestGaussMaps:
    def test_columns_and_dyads(self, linear_family):
        maps = gauss_maps(linear_family)
        f = linear_family.frame.f
        assert np.array_equal(maps.hplus, f[..., :, 0])
        assert np.array_equal(maps.hminus, f[..., :, 1])
        assert maps.dyadic_residual < 1e-12

    def test_root_values_with_identity_frame(self, linear_family):
        maps = gauss_maps(linear_family)
        assert np.array_equal(maps.hplus[0, 0], np.array([1.0, 0.0]))
        assert np.array_equal(maps.hminus[0, 0], np.array([0.0, 1.0]))
        assert np.array_equal(pauli_unpack(maps.big_hplus[0, 0]), np.array([1.0, 0, 0, 1.0]))

    def test_gauss_maps_lightlike(self, linear_family):
        maps = gauss_maps(linear_family)
        for big in (maps.big_hplus, maps.big_hminus):
            coords = pauli_unpack(big, check=False)
            scale2 = np.maximum(1.0, np.sum(coords * coords, axis=-1))
            assert np.max(np.abs(minkowski(coords, coords)) / scale2) < 1e-12


class TestPairLabelling:
    def test_frozen_values(self):
        grid = QuadGrid(3, 3)
        a = EdgeLabelling.constant(grid, 1.0, -1.0)
        b = pair_labelling(a, 0.5)
        assert np.all(b.alpha == -2.0)
        assert np.all(b.beta == 2.0 / 3.0)

    def test_defining_identity(self, rng):
        t = 0.37
        alpha = rng.uniform(0.2, 2.0, size=6)
        beta = -rng.uniform(0.2, 2.0, size=5)
        a = EdgeLabelling(alpha, beta)
        b = pair_labelling(a, t)
        assert np.max(np.abs((1 - t * a.alpha) * (1 - t * b.alpha) - 1.0)) < 1e-14
        assert np.max(np.abs((1 - t * a.beta) * (1 - t * b.beta) - 1.0)) < 1e-14

    def test_involution(self, rng):
        t = 0.5
        a = EdgeLabelling(np.array([1.0, 1.5]), np.array([-1.0]))
        b = pair_labelling(a, t)
        back = a_of(b, t)
        assert np.max(np.abs(back.alpha - a.alpha)) < 1e-14
        assert np.max(np.abs(back.beta - a.beta)) < 1e-14

    def test_excluded_value(self):
        grid = QuadGrid(3, 3)
        a = EdgeLabelling.constant(grid, 2.0, -1.0)
        with pytest.raises(InvalidParameter):
            pair_labelling(a, 0.5)


class TestPairLaws:
    def test_measured_edge_cross_ratios(self, linear_family):
        # For a = 1 horizontally and t = 1/2 the edge cross ratio is -1;
        # vertically a = -1 gives +1/3.
        pair = extract_pair(linear_family)
        hp, hm = pair.hplus, pair.hminus
        cr_h = projective_cross_ratio(hp[:-1, :], hp[1:, :], hm[1:, :], hm[:-1, :])
        cr_v = projective_cross_ratio(hp[:, :-1], hp[:, 1:], hm[:, 1:], hm[:, :-1])
        assert np.max(np.abs(cr_h + 1.0)) < 1e-10
        assert np.max(np.abs(cr_v - 1.0 / 3.0)) < 1e-10

    def test_measured_face_cross_ratios(self, linear_family):
        # (a_ij/(1-t a_ij)) ((1-t a_jk)/a_jk) = 2 * (3/2) / (-1) = -3.
        pair = extract_pair(linear_family)
        hp = pair.hplus
        cr = projective_cross_ratio(hp[:-1, :-1], hp[1:, :-1], hp[1:, 1:], hp[:-1, 1:])
        assert np.max(np.abs(cr + 3.0)) < 1e-10

    def test_report_residuals(self, linear_family):
        pair = extract_pair(linear_family)
        report = verify_pair_cross_ratios(pair, linear_family.hmap.labelling, linear_family.t)
        assert report.max_residual < 1e-10

    def test_front_pair_laws_large_grid(self):
        hmap = make_linear(QuadGrid(20, 20), 1.0, 1.0)
        family = build_front(hmap, 0.5)
        assert front_pair_laws(family).max_residual < 1e-10

    def test_edge_law_is_tb(self, linear_family):
        # -t a / (1 - t a) coincides with t b for b from the pair labelling.
        t = linear_family.t
        a = linear_family.hmap.labelling
        b = pair_labelling(a, t)
        lhs = -t * a.alpha / (1 - t * a.alpha)
        assert np.max(np.abs(lhs - t * b.alpha)) < 1e-14


class TestDarbouxPropagate:
    def test_forward_oracle(self, linear_family):
        # Seeding with the frame's own second column must reproduce it.
        pair = extract_pair(linear_family)
        out = darboux_propagate(pair.hplus, pair.b, pair.t, pair.hminus[0, 0])
        dist = projective_distance(out.hminus, pair.hminus)
        assert np.max(dist) < 1e-9

    def test_face_consistency_random_seeds(self, rng):
        hmap = make_linear(QuadGrid(10, 10), 1.0, 1.0)
        hp = lift_affine(hmap.g)
        for _ in range(3):
            z = rng.uniform(-2, 2) + 1j * rng.uniform(-2, 2)
            pair = darboux_propagate(hp, hmap.labelling, 0.5, np.array([z, 1.0]))
            assert np.max(pair.face_residuals) < 1e-9

    def test_both_legs_holomorphic(self, rng):
        hmap = make_linear(QuadGrid(8, 8), 1.0, 1.0)
        hp = lift_affine(hmap.g)
        pair = darboux_propagate(hp, hmap.labelling, 0.25, np.array([0.8 + 0.6j, 1.0]))
        assert np.max(validate_projective(pair.hplus, pair.b)) < 1e-10
        assert np.max(validate_projective(pair.hminus, pair.b)) < 1e-10

    def test_excluded_cross_ratio(self):
        grid = QuadGrid(3, 3)
        hmap = make_linear(grid, 1.0, 1.0)
        b = EdgeLabelling.constant(grid, 2.0, -1.0)  # t b = 1 horizontally
        with pytest.raises(DegenerateStep):
            darboux_propagate(lift_affine(hmap.g), b, 0.5, np.array([0.3, 1.0]))

    def test_seed_coincident_with_first_leg(self):
        hmap = make_linear(QuadGrid(3, 3), 1.0, 1.0)
        hp = lift_affine(hmap.g)
        with pytest.raises(DegenerateStep):
            darboux_propagate(hp, hmap.labelling, 0.5, hp[0, 0])

    def test_inconsistent_labelling_detected(self):
        # A first leg that is not holomorphic for the given labelling breaks
        # the two-path consistency and must be reported, not silently kept.
        hmap = make_linear(QuadGrid(5, 5), 1.0, 1.0)
        wrong_b = pair_labelling(hmap.labelling, 0.5)  # labels of the pair, not of g
        with pytest.raises(Inconsistent):
            darboux_propagate(lift_affine(hmap.g), wrong_b, 0.5, np.array([0.37 - 1.21j, 1.0]))

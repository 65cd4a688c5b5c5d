import numpy as np
import pytest

import flatfronts as ff
from flatfronts import (
    DegenerateQuad,
    EdgeLabelling,
    HolomorphicMap,
    Inconsistent,
    PoleOnVertex,
    QuadGrid,
    christoffel_dual,
    cross_ratio,
    factorize_r,
    koenigs_diagonal_check,
    make_linear,
    make_moebius,
    validate_holomorphic,
)
from flatfronts.grid import face_sums
from flatfronts.holo import dual_form


def random_moebius(rng):
    while True:
        a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
        if abs(a * d - b * c) > 0.1:
            return a, b, c, d


def apply_moebius(coeffs, z):
    a, b, c, d = coeffs
    return (a * z + b) / (c * z + d)


class TestCrossRatio:
    def test_unit_square(self):
        assert cross_ratio(0, 1, 1 + 1j, 1j) == -1

    def test_tall_quad(self):
        assert cross_ratio(0, 1, 1 + 2j, 2j) == -0.25

    def test_degenerate(self):
        with pytest.raises(DegenerateQuad):
            cross_ratio(0, 1, 1, 1j)

    def test_moebius_invariance(self, rng):
        checked = 0
        while checked < 200:
            z = rng.normal(size=4) + 1j * rng.normal(size=4)
            if min(abs(z[2] - z[1]), abs(z[0] - z[3])) < 0.1:
                continue
            coeffs = random_moebius(rng)
            if np.min(np.abs(coeffs[2] * z + coeffs[3])) < 0.05:
                continue
            w = apply_moebius(coeffs, z)
            cr1 = cross_ratio(*z)
            cr2 = cross_ratio(*w)
            assert abs(cr1 - cr2) < 1e-12 * max(1.0, abs(cr1))
            checked += 1


class TestMakeLinear:
    def test_two_by_two_values(self):
        h = make_linear(QuadGrid(2, 2), 1.0, 1.0)
        assert h.g[0, 0] == 0
        assert h.g[1, 0] == 1
        assert h.g[0, 1] == 1j
        assert h.g[1, 1] == 1 + 1j

    def test_unit_labels_and_cross_ratio(self):
        h = make_linear(QuadGrid(4, 5), 1.0, 1.0)
        assert np.all(h.labelling.alpha == 1.0)
        assert np.all(h.labelling.beta == -1.0)
        assert np.all(h.face_cross_ratios() == -1.0)

    def test_aniso_labels_and_cross_ratio(self):
        h = make_linear(QuadGrid(3, 3), 1.0, 2.0)
        assert np.all(h.labelling.alpha == 1.0)
        assert np.all(h.labelling.beta == -4.0)
        assert np.all(h.face_cross_ratios() == -0.25)

    def test_validator_exact(self):
        report = make_linear(QuadGrid(6, 6), 1.0, 1.0).validate()
        assert report.max_residual == 0.0
        assert report.regular
        assert report.passed

    def test_rejects_zero_steps(self):
        with pytest.raises(ValueError):
            make_linear(QuadGrid(2, 2), 0.0, 1.0)


class TestValidator:
    def test_perturbation_flags_incident_faces(self):
        h = make_linear(QuadGrid(8, 8), 1.0, 1.0)
        g = h.g.copy()
        g[3, 4] += 1e-3
        report = validate_holomorphic(g, h.labelling)
        flagged = set(report.offending_faces(1e-6))
        assert flagged == {(2, 3), (2, 4), (3, 3), (3, 4)}

    def test_constant_map_flags_all_edges(self):
        grid = QuadGrid(3, 3)
        report = validate_holomorphic(
            np.full(grid.vertex_shape, 2.0 + 1.0j), EdgeLabelling.constant(grid, 1.0, 1.0)
        )
        assert len(report.zero_edges) == 3 * 2 + 3 * 2
        assert not report.regular


class TestMoebius:
    def test_identity(self, generic_map):
        out = make_moebius(generic_map, 1.0, 0.0, 0.0, 1.0)
        assert np.array_equal(out.g, generic_map.g)

    def test_inversion_preserves_cross_ratios(self):
        h = make_linear(QuadGrid(5, 5), 1.0, 1.0)
        shifted = make_moebius(h, 1.0, 0.7 + 0.3j, 0.0, 1.0)
        inverted = make_moebius(shifted, 0.0, 1.0, 1.0, 0.0)
        assert np.max(np.abs(inverted.face_cross_ratios() + 1.0)) < 1e-12
        assert inverted.validate().passed

    def test_pole_on_vertex(self):
        h = make_linear(QuadGrid(3, 3), 1.0, 1.0)
        with pytest.raises(PoleOnVertex):
            make_moebius(h, 1.0, 0.0, 1.0, -h.g[1, 1])

    def test_degenerate_coefficients(self, generic_map):
        with pytest.raises(ValueError):
            make_moebius(generic_map, 1.0, 2.0, 2.0, 4.0)


class TestChristoffelDual:
    def test_linear_dual_closed_form(self):
        # dg* = 1 on horizontal edges and -i on vertical ones, so the dual
        # of m + i n is m - i n.
        h = make_linear(QuadGrid(5, 5), 1.0, 1.0)
        gstar, residual = christoffel_dual(h)
        m = np.arange(5)[:, None]
        n = np.arange(5)[None, :]
        assert np.array_equal(gstar, m - 1j * n)
        assert residual < 1e-15

    def test_root_value(self, generic_map):
        gstar, _ = christoffel_dual(generic_map, root=(0, 0), root_value=0.0)
        assert gstar[0, 0] == 0.0

    def test_closedness_for_valid_map(self, generic_map):
        form = dual_form(generic_map)
        rel = np.max(np.abs(face_sums(form))) / form.max_abs()
        assert rel < 1e-12

    def test_involutive(self, generic_map):
        # The dual of the dual derivative recovers dg: dg = a / conj(dg*).
        gstar, _ = christoffel_dual(generic_map)
        dual = HolomorphicMap(generic_map.grid, generic_map.labelling, gstar)
        ddual = dual_form(dual)
        dg = generic_map.dg()
        assert np.max(np.abs(ddual.h - dg.h) / np.abs(dg.h)) < 1e-12
        assert np.max(np.abs(ddual.v - dg.v) / np.abs(dg.v)) < 1e-12

    def test_dual_is_holomorphic(self, generic_map):
        gstar, _ = christoffel_dual(generic_map)
        report = validate_holomorphic(gstar, generic_map.labelling)
        assert report.passed


class TestFactorizeR:
    def test_linear_alternating(self):
        h = make_linear(QuadGrid(5, 5), 1.0, 1.0)
        r = factorize_r(h)
        n = np.arange(5)[None, :]
        assert np.array_equal(r, np.broadcast_to((-1.0) ** n, (5, 5)))

    def test_root_scaling_bipartite(self):
        h = make_linear(QuadGrid(5, 5), 1.0, 1.0)
        r1 = factorize_r(h, r_root=1.0)
        r2 = factorize_r(h, r_root=2.0)
        m = np.arange(5)[:, None]
        n = np.arange(5)[None, :]
        assert np.array_equal(r2, r1 * 2.0 ** ((-1.0) ** (m + n)))

    def test_defining_relations(self, generic_map):
        r = factorize_r(generic_map, r_root=1.0)
        dg = generic_map.dg()
        lab = generic_map.labelling
        target_h = np.abs(dg.h) ** 2 / lab.h()
        target_v = np.abs(dg.v) ** 2 / lab.v()
        assert np.max(np.abs(r[:-1, :] * r[1:, :] - target_h) / np.abs(target_h)) < 1e-12
        assert np.max(np.abs(r[:, :-1] * r[:, 1:] - target_v) / np.abs(target_v)) < 1e-12
        # dg* = dg / (r_i r_j) on every edge
        gstar, _ = christoffel_dual(generic_map)
        dgs_h = gstar[1:, :] - gstar[:-1, :]
        quot = dg.h / (r[:-1, :] * r[1:, :])
        assert np.max(np.abs(dgs_h - quot) / np.abs(dgs_h)) < 1e-12

    def test_inconsistent_input(self):
        h = make_linear(QuadGrid(5, 5), 1.0, 1.0)
        g = h.g.copy()
        g[2, 2] += 0.05
        broken = HolomorphicMap(h.grid, h.labelling, g)
        with pytest.raises(Inconsistent):
            factorize_r(broken, tol=1e-10)

    def test_rejects_zero_root(self, generic_map):
        with pytest.raises(ValueError):
            factorize_r(generic_map, r_root=0.0)


class TestKoenigsDiagonal:
    def test_linear_exact_zero(self):
        # Integer-valued data make the diagonal relation exact in floats.
        h = make_linear(QuadGrid(2, 2), 1.0, 1.0)
        gstar, _ = christoffel_dual(h)
        r = factorize_r(h)
        assert np.all(koenigs_diagonal_check(h, gstar, r) == 0.0)

    def test_linear_larger_grid(self):
        h = make_linear(QuadGrid(6, 6), 1.0, 1.0)
        gstar, _ = christoffel_dual(h)
        r = factorize_r(h)
        assert np.max(koenigs_diagonal_check(h, gstar, r)) < 1e-13

    def test_generic_map(self, generic_map):
        gstar, _ = christoffel_dual(generic_map)
        r = factorize_r(generic_map)
        assert np.max(koenigs_diagonal_check(generic_map, gstar, r)) < 1e-13

    def test_detects_broken_dual(self, generic_map):
        gstar, _ = christoffel_dual(generic_map)
        r = factorize_r(generic_map)
        gstar = gstar.copy()
        gstar[1, 1] += 0.01
        assert np.max(koenigs_diagonal_check(generic_map, gstar, r)) > 1e-4

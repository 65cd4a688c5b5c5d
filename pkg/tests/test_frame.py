import numpy as np
import pytest

import flatfronts as ff
from flatfronts import (
    E0,
    E1,
    E2,
    E3,
    InvalidParameter,
    NegativeBranch,
    NotFlat,
    NotHermitian,
    QuadGrid,
    build_connection,
    check_flat,
    integrate_frame,
    make_linear,
    minkowski,
    pauli_pack,
    pauli_unpack,
    sl2_act,
)
from flatfronts.frame import det2, frame_closure, inv2, minkowski_herm


def random_hermitian(rng, dyadic=False):
    if dyadic:
        coords = rng.integers(-64, 64, size=4) / 32.0
    else:
        coords = rng.normal(size=4)
    return pauli_pack(coords), coords


class TestPauli:
    def test_basis_matrices(self):
        assert np.array_equal(pauli_pack([1, 0, 0, 0]), E0)
        assert np.array_equal(pauli_pack([0, 1, 0, 0]), E1)
        assert np.array_equal(pauli_pack([0, 0, 1, 0]), E2)
        assert np.array_equal(pauli_pack([0, 0, 0, 1]), E3)
        assert E1[0, 1] == 1 and E1[1, 0] == 1

    def test_minkowski_signature(self):
        assert -np.linalg.det(E0) == -1
        for e in (E1, E2, E3):
            assert -np.linalg.det(e).real == pytest.approx(1.0, abs=1e-15)

    def test_round_trip_exact_on_dyadics(self, rng):
        for _ in range(50):
            x, coords = random_hermitian(rng, dyadic=True)
            assert np.array_equal(pauli_unpack(x), coords)
            assert np.array_equal(pauli_pack(pauli_unpack(x)), x)

    def test_round_trip_floats(self, rng):
        coords = rng.normal(size=(20, 4))
        back = pauli_unpack(pauli_pack(coords))
        assert np.max(np.abs(back - coords)) < 1e-15

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            pauli_unpack(np.array([[1.0, 1.0j], [1.0j, 1.0]]))

    def test_polarization_identity(self, rng):
        for _ in range(100):
            x, cx = random_hermitian(rng)
            y, cy = random_hermitian(rng)
            lhs = minkowski(cx, cy)
            rhs = (np.linalg.det(x) + np.linalg.det(y) - np.linalg.det(x + y)).real / 2
            assert abs(lhs - rhs) < 1e-13
            assert abs(minkowski_herm(x, y) - lhs) < 1e-13


class TestSl2Action:
    def test_identity(self, rng):
        x, _ = random_hermitian(rng)
        assert np.array_equal(sl2_act(np.eye(2), x), x)

    def test_preserves_minkowski_norm(self, rng):
        for _ in range(100):
            g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            g = g / np.sqrt(det2(g))
            x, _ = random_hermitian(rng)
            before = -np.linalg.det(x).real
            after = -np.linalg.det(sl2_act(g, x)).real
            assert abs(after - before) < 1e-12 * max(1.0, abs(before))

    def test_boost(self):
        u = 0.8
        g = np.diag([np.exp(u / 2), np.exp(-u / 2)]).astype(complex)
        coords = pauli_unpack(sl2_act(g, E0))
        expected = np.array([np.cosh(u), 0.0, 0.0, np.sinh(u)])
        assert np.max(np.abs(coords - expected)) < 1e-14


class TestConnection:
    def test_frozen_edge_matrix(self):
        h = make_linear(QuadGrid(2, 2), 1.0, 1.0)
        conn = build_connection(h, 0.5)
        expected = np.sqrt(2.0) * np.array([[1.0, 1.0], [0.5, 1.0]])
        assert np.allclose(conn.w_h[0, 0], expected, rtol=1e-15, atol=0)
        assert abs(det2(conn.w_h[0, 0]) - 1.0) < 1e-15

    def test_unit_determinants(self, linear_family):
        conn = linear_family.connection
        assert np.max(np.abs(det2(conn.w_h) - 1.0)) < 1e-14
        assert np.max(np.abs(det2(conn.w_v) - 1.0)) < 1e-14

    def test_reversed_edge_is_inverse(self, linear_family):
        # W_ji built from the defining formula with the edge reversed must
        # multiply W_ij to the identity.
        h = linear_family.hmap
        t = linear_family.t
        conn = linear_family.connection
        dg = h.dg()
        lab = h.labelling
        rev = np.empty_like(conn.w_h)
        rev[..., 0, 0] = 1.0
        rev[..., 0, 1] = -dg.h
        rev[..., 1, 0] = t * lab.h() / (-dg.h)
        rev[..., 1, 1] = 1.0
        rev = rev / np.sqrt(1.0 - t * lab.h())[..., None, None]
        prod = conn.w_h @ rev
        assert np.max(np.abs(prod - np.eye(2))) < 1e-13

    def test_t_zero_rejected(self, generic_map):
        with pytest.raises(InvalidParameter):
            build_connection(generic_map, 0.0)

    def test_excluded_t_rejected(self):
        h = make_linear(QuadGrid(3, 3), 1.0, 1.0)
        with pytest.raises(InvalidParameter):
            build_connection(h, 1.0)  # 1 - t*a = 0 on horizontal edges

    def test_negative_branch(self):
        h = make_linear(QuadGrid(3, 3), 1.0, 1.0)
        with pytest.raises(NegativeBranch):
            build_connection(h, 2.0)
        conn = build_connection(h, 2.0, allow_complex=True)
        assert np.max(np.abs(det2(conn.w_h) - 1.0)) < 1e-12

    def test_flatness_exact_for_linear(self, linear_family):
        assert np.max(check_flat(linear_family.connection)) < 1e-12

    def test_flatness_flags_perturbed_vertex(self):
        h = make_linear(QuadGrid(8, 8), 1.0, 1.0)
        g = h.g.copy()
        g[4, 4] += 1e-3
        broken = ff.HolomorphicMap(h.grid, h.labelling, g)
        residuals = check_flat(build_connection(broken, 0.5))
        flagged = set(map(tuple, np.argwhere(residuals > 1e-8)))
        assert flagged == {(3, 3), (3, 4), (4, 3), (4, 4)}


class TestFrameIntegration:
    def test_single_step(self):
        h = make_linear(QuadGrid(3, 3), 1.0, 1.0)
        conn = build_connection(h, 0.5)
        frame = integrate_frame(conn)
        assert np.array_equal(frame.f[0, 0], np.eye(2))
        assert np.array_equal(frame.f[1, 0], conn.w_h[0, 0])

    def test_unit_determinant_everywhere(self, linear_family):
        assert linear_family.frame.det_drift() < 1e-12

    def test_two_path_agreement(self, linear_family):
        steps = sum(linear_family.grid.vertex_shape)
        assert linear_family.frame.path_residual < 1e-10 * steps

    def test_closure_residual(self, linear_family):
        assert linear_family.frame.closure_residual < 1e-12

    def test_custom_root(self):
        h = make_linear(QuadGrid(4, 4), 1.0, 1.0)
        conn = build_connection(h, 0.5)
        f_root = np.array([[2.0, 0.0], [0.0, 0.5]], dtype=complex)
        frame = integrate_frame(conn, root=(1, 2), f_root=f_root)
        assert np.max(np.abs(frame.f[1, 2] - f_root)) < 1e-12
        assert frame_closure(conn, frame.f) < 1e-12

    def test_root_frame_must_be_unimodular(self):
        h = make_linear(QuadGrid(3, 3), 1.0, 1.0)
        conn = build_connection(h, 0.5)
        with pytest.raises(ValueError):
            integrate_frame(conn, f_root=2.0 * np.eye(2))

    def test_not_flat_rejected(self):
        h = make_linear(QuadGrid(5, 5), 1.0, 1.0)
        g = h.g.copy()
        g[2, 2] += 1e-3
        broken = ff.HolomorphicMap(h.grid, h.labelling, g)
        conn = build_connection(broken, 0.5)
        with pytest.raises(NotFlat):
            integrate_frame(conn)

    def test_inv2(self, rng):
        mats = rng.normal(size=(10, 2, 2)) + 1j * rng.normal(size=(10, 2, 2))
        prod = inv2(mats) @ mats
        assert np.max(np.abs(prod - np.eye(2))) < 1e-12

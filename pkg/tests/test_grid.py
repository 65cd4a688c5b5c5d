import numpy as np
import pytest

from flatfronts import EdgeForm, EdgeLabelling, NotClosed, QuadGrid, derivative, derived
from flatfronts.grid import derivative_form, derived_form, face_sums, integrate_edge_form


def dyadic_field(rng, shape):
    # Values of the form k/64 make every sum and difference exact in floats.
    return rng.integers(-100, 100, size=shape) / 64.0


class TestGridBasics:
    def test_minimum_size(self):
        with pytest.raises(ValueError):
            QuadGrid(1, 5)
        with pytest.raises(ValueError):
            QuadGrid(3, 0)

    def test_shapes(self):
        g = QuadGrid(4, 7)
        assert g.vertex_shape == (4, 7)
        assert g.hedge_shape == (3, 7)
        assert g.vedge_shape == (4, 6)
        assert g.face_shape == (3, 6)

    def test_labelling_rejects_zero(self):
        with pytest.raises(ValueError):
            EdgeLabelling([1.0, 0.0], [1.0])

    def test_labelling_grid_check(self):
        lab = EdgeLabelling([1.0, 1.0], [2.0])
        lab.check_grid(QuadGrid(3, 2))
        with pytest.raises(ValueError):
            lab.check_grid(QuadGrid(4, 4))


class TestDerivedAndDerivative:
    def test_derived_midpoint(self):
        assert derived(0.0, 2.0) == 1.0

    def test_derived_constant(self):
        assert derived(3.5, 3.5) == 3.5

    def test_derived_complex(self):
        assert derived(1.0, 1.0j) == 0.5 + 0.5j

    def test_derivative_antisymmetric(self):
        assert derivative(1.0, 3.0) == 2.0
        assert derivative(3.0, 1.0) == -2.0

    def test_derivative_constant(self):
        assert derivative(4.0, 4.0) == 0.0

    def test_leibniz_rule(self):
        # d(gh) on an edge with g: 1 -> 2 and h: 3 -> 5.
        g_i, g_j = 1.0, 2.0
        h_i, h_j = 3.0, 5.0
        d_product = derivative(g_i * h_i, g_j * h_j)
        leibniz = derivative(g_i, g_j) * derived(h_i, h_j) + derived(g_i, g_j) * derivative(h_i, h_j)
        assert d_product == 7.0
        assert leibniz == 7.0

    def test_leibniz_rule_random(self, rng):
        g = dyadic_field(rng, (5, 6))
        h = dyadic_field(rng, (5, 6))
        dp = derivative_form(g * h)
        dg = derivative_form(g)
        dh = derivative_form(h)
        gm = derived_form(g)
        hm = derived_form(h)
        assert np.array_equal(dp.h, dg.h * hm.h + gm.h * dh.h)
        assert np.array_equal(dp.v, dg.v * hm.v + gm.v * dh.v)


class TestEdgeForms:
    def test_face_sums_of_derivative_vanish_exactly(self, rng):
        f = dyadic_field(rng, (6, 5)) + 1j * dyadic_field(rng, (6, 5))
        sums = face_sums(derivative_form(f))
        assert np.all(sums == 0)

    def test_face_sums_of_derivative_small_for_floats(self, rng):
        f = rng.normal(size=(6, 5)) + 1j * rng.normal(size=(6, 5))
        sums = face_sums(derivative_form(f))
        assert np.max(np.abs(sums)) < 1e-14 * np.max(np.abs(f))

    def test_integrate_zero_form(self):
        g = QuadGrid(4, 4)
        form = EdgeForm(h=np.zeros(g.hedge_shape), v=np.zeros(g.vedge_shape))
        f = integrate_edge_form(g, form, root_value=2.5)
        assert np.all(f == 2.5)

    def test_integrate_inverts_derivative(self, rng):
        g = QuadGrid(7, 6)
        f = rng.normal(size=g.vertex_shape) + 1j * rng.normal(size=g.vertex_shape)
        out = integrate_edge_form(g, derivative_form(f), root=(2, 3), root_value=f[2, 3])
        assert np.max(np.abs(out - f)) < 1e-14 * np.max(np.abs(f))

    def test_integrate_respects_root(self, rng):
        g = QuadGrid(4, 5)
        f = rng.normal(size=g.vertex_shape)
        out = integrate_edge_form(g, derivative_form(f), root=(3, 1), root_value=0.0)
        assert out[3, 1] == 0.0

    def test_not_closed(self):
        g = QuadGrid(3, 3)
        h = np.zeros(g.hedge_shape)
        h[0, 0] = 1.0  # only face (0, 0) sees this edge
        form = EdgeForm(h=h, v=np.zeros(g.vedge_shape))
        with pytest.raises(NotClosed) as exc:
            integrate_edge_form(g, form)
        assert exc.value.face == (0, 0)
        assert exc.value.residual == 1.0

"""Kernel construction, quadrature identities, and the nonlocal convolution."""

import numpy as np
import pytest
from scipy.integrate import quad

from pulsefront import (
    FieldPair,
    Grid,
    KernelSpec,
    active_weights,
    build_kernel,
    bump_kernel,
    convolve,
    first_half_moment,
    tail_mass,
)


def adaptive_simpson(f, a, b, tol=1e-11, depth=40):
    """Independent adaptive-Simpson oracle."""

    def simpson(a, b):
        m = 0.5 * (a + b)
        return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b)), m

    def recurse(a, b, whole, d):
        m = 0.5 * (a + b)
        left, _ = simpson(a, m)
        right, _ = simpson(m, b)
        if d <= 0 or abs(left + right - whole) < 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, m, left, d - 1) + recurse(m, b, right, d - 1)

    whole, _ = simpson(a, b)
    return recurse(a, b, whole, depth)


class TestBumpKernel:
    def test_normalization_against_simpson_oracle(self, kernel):
        raw = lambda x: np.exp(1.0 / ((x / 3.0) ** 2 - 1.0)) if abs(x) < 3.0 else 0.0
        total = adaptive_simpson(raw, -3.0, 3.0)
        assert kernel.norm_const == pytest.approx(1.0 / total, abs=1e-10)
        assert abs(kernel.mass_defect) < 1e-10

    def test_center_value(self, kernel):
        # J(0) = k * exp(-1)
        expected = kernel.norm_const * np.exp(-1.0)
        assert kernel.density(0.0)[0] == pytest.approx(expected, rel=1e-14)
        assert kernel.density(0.0)[0] == pytest.approx(0.27618961, abs=1e-7)

    def test_vanishes_outside_support(self, kernel):
        assert kernel.density(np.array([3.0, -4.0, 10.0])).tolist() == [0.0, 0.0, 0.0]

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            build_kernel(KernelSpec(family="bump", radius=0.0))


class TestTableKernel:
    def test_triangle_table_normalizes(self):
        spec = KernelSpec(
            family="table", radius=2.0, offsets=(0.0, 2.0), values=(1.0, 0.0)
        )
        tri = build_kernel(spec)
        assert abs(tri.mass_defect) < 1e-10
        # triangle of half-width 2 and unit mass peaks at 1/2
        assert tri.density(0.0)[0] == pytest.approx(0.5, abs=1e-10)
        assert tri.density(1.0)[0] == pytest.approx(tri.density(-1.0)[0], rel=1e-14)

    def test_rescaled_kernel_scales_half_moment(self):
        # J_c(x) = c*J(c*x) corresponds to shrinking the radius by 1/c
        m3 = first_half_moment(bump_kernel(3.0))
        m15 = first_half_moment(bump_kernel(1.5))
        assert m15 == pytest.approx(0.5 * m3, rel=1e-10)

    def test_rejects_negative_table(self):
        with pytest.raises(ValueError):
            build_kernel(
                KernelSpec(
                    family="table", radius=2.0, offsets=(0.0, 2.0), values=(1.0, -0.1)
                )
            )


class TestTailMass:
    def test_symmetry_anchors(self, kernel):
        assert tail_mass(kernel, 0.0) == pytest.approx(0.5, abs=1e-12)
        assert tail_mass(kernel, 3.0) == 0.0
        assert tail_mass(kernel, -3.0) == pytest.approx(1.0, abs=1e-12)

    def test_reflection_identity(self, kernel):
        s = np.linspace(-3, 3, 41)
        k = kernel.tail_mass(s)
        assert np.allclose(k + kernel.tail_mass(-s), 1.0, atol=1e-12)

    def test_monotone_nonincreasing(self, kernel):
        s = np.linspace(-3.5, 3.5, 400)
        vals = kernel.tail_mass(s)
        assert np.all(np.diff(vals) <= 1e-15)

    def test_fubini_half_moment_identity(self, kernel):
        # two independent quadratures: integral of K over (0,R) vs r*J moment
        lhs, _ = quad(lambda s: float(kernel.tail_mass(s)[0]), 0.0, 3.0, limit=200)
        rhs, _ = quad(lambda r: r * float(kernel.density(r)[0]), 0.0, 3.0, limit=200)
        assert lhs == pytest.approx(rhs, abs=1e-8)
        assert first_half_moment(kernel) == pytest.approx(rhs, abs=1e-10)

    def test_half_moment_reference_value(self, kernel):
        assert first_half_moment(kernel) == pytest.approx(0.50168, abs=1e-5)

    def test_mirror_half_moment(self, kernel):
        lhs, _ = quad(
            lambda r: abs(r) * float(kernel.density(r)[0]), -3.0, 0.0, limit=200
        )
        assert lhs == pytest.approx(first_half_moment(kernel), abs=1e-10)


class TestConvolve:
    def test_unit_field_deep_interior(self, kernel):
        grid = Grid.over(-10.0, 10.0, 0.05)
        out = convolve(kernel, grid, np.ones(grid.n), -10.0, 10.0)
        center = np.argmin(np.abs(grid.nodes))
        assert out[center] == pytest.approx(1.0, abs=1e-6)

    def test_unit_field_at_boundary_halves(self, kernel):
        grid = Grid.over(-10.0, 10.0, 0.05)
        out = convolve(kernel, grid, np.ones(grid.n), -10.0, 10.0)
        assert out[0] == pytest.approx(0.5, abs=1e-4)
        assert out[-1] == pytest.approx(0.5, abs=1e-4)

    def test_single_node_matches_brute_force(self, kernel, rng):
        grid = Grid.over(-4.0, 4.0, 0.1)
        field = np.zeros(grid.n)
        j = rng.integers(1, grid.n - 1)
        field[j] = 2.7
        out = convolve(kernel, grid, field, -4.0, 4.0)
        w = active_weights(grid, -4.0, 4.0)
        x = grid.nodes
        brute = np.array(
            [
                sum(
                    w[q] * kernel.density(x[i] - x[q])[0] * field[q]
                    for q in range(grid.n)
                )
                for i in range(grid.n)
            ]
        )
        assert np.allclose(out, brute, atol=1e-14)

    def test_mass_non_expansive(self, kernel, rng):
        grid = Grid.over(-8.0, 8.0, 0.05)
        w = active_weights(grid, -8.0, 8.0)
        field = rng.uniform(0.0, 2.0, grid.n)
        field[[0, -1]] = 0.0
        out = convolve(kernel, grid, field, -8.0, 8.0)
        assert float(w @ out) <= float(w @ field) * (1.0 + 1e-9)

    def test_positivity_and_linearity(self, kernel, rng):
        grid = Grid.over(-5.0, 5.0, 0.1)
        f1 = rng.uniform(0.0, 1.0, grid.n)
        f2 = rng.uniform(0.0, 1.0, grid.n)
        a, b = 0.7, 1.9
        c1 = convolve(kernel, grid, f1, -5.0, 5.0)
        c2 = convolve(kernel, grid, f2, -5.0, 5.0)
        c12 = convolve(kernel, grid, a * f1 + b * f2, -5.0, 5.0)
        assert np.all(c1 >= 0.0)
        assert np.allclose(c12, a * c1 + b * c2, atol=1e-12)

    def test_interval_must_fit_window(self, kernel):
        grid = Grid.over(-2.0, 2.0, 0.1)
        with pytest.raises(ValueError):
            convolve(kernel, grid, np.ones(grid.n), -3.0, 3.0)


class TestActiveWeights:
    def test_full_interval_is_trapezoid(self):
        grid = Grid.over(0.0, 1.0, 0.25)
        w = active_weights(grid, 0.0, 1.0)
        # boundaries on nodes reduce to the standard trapezoid rule
        assert np.allclose(w, [0.125, 0.25, 0.25, 0.25, 0.125])

    def test_offgrid_interval_conserves_length(self):
        grid = Grid.over(-1.0, 1.0, 0.2)
        lo, hi = -0.73, 0.61
        w = active_weights(grid, lo, hi)
        inner = grid.nodes[(grid.nodes > lo) & (grid.nodes < hi)]
        # piecewise-linear hat with zeros at lo and hi integrates to the
        # trapezoid of the same hat
        expected = (inner[-1] - inner[0]) + (inner[0] - lo) / 2 + (hi - inner[-1]) / 2
        assert np.isclose(w.sum(), expected)

    def test_empty_interval(self):
        grid = Grid.over(-1.0, 1.0, 0.2)
        assert active_weights(grid, 0.05, 0.06).sum() == 0.0


class TestFieldPair:
    def test_copy_is_deep(self):
        f = FieldPair(np.ones(4), np.zeros(4))
        g = f.copy()
        g.u[0] = 7.0
        assert f.u[0] == 1.0

    def test_sup(self):
        f = FieldPair(np.array([0.1, 0.9]), np.array([1.4, 0.0]))
        assert f.sup() == 1.4

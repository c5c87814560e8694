"""Parameter containers, assumption screening, and density caps."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulsefront import (
    GrowthSpec,
    ModelParams,
    PulseSpec,
    RootNotBracketedError,
    compute_bounds,
    reproduction_ratio,
    validate,
)


def bisect_ratio_root(growth, target, lo=1e-12, hi=1e12, iters=200):
    """Independent bisection oracle for G(u)/u = target."""
    f = lambda u: float(growth(u)) / u - target
    assert f(lo) > 0 > f(hi)
    for _ in range(iters):
        mid = np.sqrt(lo * hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestValidate:
    def test_reference_configuration_passes(self, params51, growth51, kernel):
        report = validate(params51, growth51, PulseSpec.identity(), kernel)
        assert report.ok, report.summary()

    def test_superlinear_growth_fails_ratio_check(self, params51):
        bad = GrowthSpec.from_callable(lambda u: u * u, gprime0=0.0)
        report = validate(params51, bad, PulseSpec.identity())
        names = [c.name for c in report.failures()]
        assert any("G(u)/u" in n for n in names)

    def test_expanding_pulse_fails_ratio_cap(self, params51, growth51):
        report = validate(params51, growth51, PulseSpec.linear(1.5))
        names = [c.name for c in report.failures()]
        assert any("H(u)/u" in n for n in names)
        assert any("H'(0)" in n for n in names)

    def test_failure_carries_witness(self, params51, growth51):
        report = validate(params51, growth51, PulseSpec.linear(1.5))
        bad = report.failures()[0]
        assert bad.witness


class TestComputeBounds:
    def test_reference_caps(self, params51, growth51):
        b = compute_bounds(params51, growth51, u0_sup=3.0, v0_sup=1.0)
        assert b.u_star == 0.0
        assert b.c1_bound == 3.0
        # c2 = max(1, G(3)/a22) = (0.5*3/13)/0.1 (hand arithmetic)
        assert b.c2_bound == pytest.approx(15.0 / 13.0, abs=1e-14)

    def test_saturation_root_when_ratio_exceeds_one(self, params51, growth_spread):
        target = params51.a11 * params51.a22 / params51.a12
        expected = bisect_ratio_root(growth_spread, target)
        b = compute_bounds(params51, growth_spread, u0_sup=0.1, v0_sup=0.1)
        assert b.u_star == pytest.approx(expected, abs=1e-9)
        assert b.u_star == pytest.approx(0.5714285714, abs=1e-9)

    def test_subcritical_ratio_gives_zero_root(self, growth51):
        for a12 in (0.02, 0.11, 0.3):
            p = ModelParams(
                d1=0.1, d2=0.1, a11=0.35, a12=a12, a22=0.10,
                mu1=1.0, mu2=1.0, tau=1.0, h0=1.0,
            )
            if reproduction_ratio(p, growth51) <= 1.0:
                assert compute_bounds(p, growth51, 1.0, 1.0).u_star == 0.0

    def test_unbracketed_root_rejected(self, params51):
        # G(u) = 0.4*u keeps G(u)/u constant above the saturation level
        # a11*a22/a12 ~ 0.318, so the root never brackets; such a curve
        # violates the tail assumption.
        linear = GrowthSpec.from_callable(lambda u: 0.4 * u, gprime0=0.4)
        with pytest.raises(RootNotBracketedError):
            compute_bounds(params51, linear, 1.0, 1.0)


class TestReproductionRatio:
    def test_reference_value(self, params51, growth51):
        # 0.11*0.05/(0.35*0.10)
        assert reproduction_ratio(params51, growth51) == pytest.approx(
            0.11 * 0.05 / 0.035, rel=1e-14
        )

    def test_steep_growth_value(self, params51, growth_spread):
        assert reproduction_ratio(params51, growth_spread) == pytest.approx(
            0.11 * 0.5 / 0.035, rel=1e-14
        )

    def test_unit_ratio_identity(self, growth51):
        a11, a22 = 0.35, 0.10
        a12 = a11 * a22 / growth51.gprime0
        p = ModelParams(
            d1=0.1, d2=0.1, a11=a11, a12=a12, a22=a22,
            mu1=1.0, mu2=1.0, tau=1.0, h0=1.0,
        )
        assert reproduction_ratio(p, growth51) == pytest.approx(1.0, rel=1e-14)


class TestStructuralInvariants:
    u_grid = np.logspace(-6, 6, 120)

    @given(c=st.floats(0.05, 5.0), b=st.floats(0.05, 50.0))
    @settings(max_examples=60, deadline=None)
    def test_growth_below_tangent(self, c, b):
        g = GrowthSpec.saturating(c, b)
        assert np.all(g(self.u_grid) <= g.gprime0 * self.u_grid + 1e-15)

    @given(c1=st.floats(0.01, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_linear_pulse_contracts(self, c1):
        h = PulseSpec.linear(c1)
        vals = h(self.u_grid)
        assert np.all(vals <= self.u_grid + 1e-15)
        assert np.all(vals <= h.hprime0 * self.u_grid + 1e-15)

    @given(c2=st.floats(0.01, 5.0), scale=st.floats(1.0, 50.0))
    @settings(max_examples=60, deadline=None)
    def test_saturating_pulse_contracts(self, c2, scale):
        h = PulseSpec.beverton_holt(c2, c2 * scale)
        vals = h(self.u_grid)
        assert np.all(vals <= self.u_grid + 1e-15)
        assert np.all(vals <= h.hprime0 * self.u_grid + 1e-12)

    @given(
        a11=st.floats(0.05, 2.0),
        a12=st.floats(0.05, 2.0),
        a22=st.floats(0.05, 2.0),
        c=st.floats(0.05, 2.0),
        b=st.floats(0.1, 20.0),
        u0=st.floats(0.01, 10.0),
        v0=st.floats(0.01, 10.0),
    )
    @settings(max_examples=120, deadline=None)
    def test_caps_satisfy_domination_inequalities(self, a11, a12, a22, c, b, u0, v0):
        g = GrowthSpec.saturating(c, b)
        # keep the tail assumption satisfiable: lim G(u)/u = 0 < a11*a22/a12
        p = ModelParams(
            d1=0.1, d2=0.1, a11=a11, a12=a12, a22=a22,
            mu1=1.0, mu2=1.0, tau=1.0, h0=1.0,
        )
        bounds = compute_bounds(p, g, u0, v0)
        C1, C2 = bounds.c1_bound, bounds.c2_bound
        assert -a11 * C1 + a12 * C2 <= 1e-12 * max(1.0, C1)
        assert -a22 * C2 + float(g(C1)) <= 1e-12 * max(1.0, C2)
        assert C1 >= u0 and C2 >= v0


class TestParamValidation:
    def test_rejects_nonpositive_rates(self):
        with pytest.raises(ValueError):
            ModelParams(
                d1=0.0, d2=0.1, a11=0.35, a12=0.11, a22=0.1,
                mu1=1.0, mu2=1.0, tau=1.0, h0=1.0,
            )
        with pytest.raises(ValueError):
            ModelParams(
                d1=0.1, d2=0.1, a11=0.35, a12=0.11, a22=0.1,
                mu1=1.0, mu2=1.0, tau=-1.0, h0=1.0,
            )

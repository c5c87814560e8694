"""Model parameters, structural assumptions, and a-priori solution bounds.

The two-component system couples an environmental agent density u with an
infected-host density v through positive rates:

    u_t = d1*(J1*u - u) - a11*u + a12*v
    v_t = d2*(J2*v - v) - a22*v + G(u)

with a pulse u -> H(u) applied every tau time units.  This module holds the
scalar parameter set, the growth curve G, the pulse map H, the sampled
validity checks for the structural assumptions on G and H (and on the
dispersal kernel), and the invariant density caps (c1_bound, c2_bound) that
every trajectory from admissible initial data respects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ModelParams",
    "GrowthSpec",
    "PulseSpec",
    "SolutionBounds",
    "ValidationReport",
    "CheckResult",
    "RootNotBracketedError",
    "validate",
    "compute_bounds",
    "reproduction_ratio",
]

# Log-spaced probe grid used for every sampled assumption check.  The
# structural assumptions quantify over all u > 0, which is unverifiable
# pointwise; this grid catches every closed-form violation exercised in
# practice.
_PROBE = np.logspace(-6.0, 6.0, 200)


class RootNotBracketedError(ValueError):
    """The saturation root of G(u)/u is not bracketed; the growth curve
    violates the tail bound lim G(u)/u < a11*a22/a12."""


@dataclass(frozen=True)
class ModelParams:
    """Scalar rates of the model.

    d1, d2  : dispersal coefficients of agents / hosts (1/time)
    a11     : agent decay rate (1/time)
    a12     : agent production rate per host density (1/time)
    a22     : host removal rate (1/time)
    mu1, mu2: front expansion capacities of agents / hosts
    tau     : pulse period (time)
    h0      : initial half-length of the active region (length)
    """

    d1: float
    d2: float
    a11: float
    a12: float
    a22: float
    mu1: float
    mu2: float
    tau: float
    h0: float

    def __post_init__(self):
        for name in ("d1", "d2", "a11", "a12", "a22", "tau", "h0"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"ModelParams.{name} must be strictly positive")
        for name in ("mu1", "mu2"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"ModelParams.{name} must be nonnegative")

    def rate_sum(self) -> float:
        """Sum of rates controlling the explicit-Euler step bound."""
        return self.d1 + self.d2 + self.a11 + self.a22 + self.a12


@dataclass(frozen=True)
class GrowthSpec:
    """Host-infection growth curve G.

    Either the saturating rational form c*u/(b+u), or a user-supplied
    monotone curve given as (slope at zero, pointwise evaluator).
    """

    c: float = 0.0
    b: float = 0.0
    func: Callable[[np.ndarray], np.ndarray] | None = None
    gprime0_user: float | None = None

    @staticmethod
    def saturating(c: float, b: float) -> "GrowthSpec":
        if c <= 0 or b <= 0:
            raise ValueError("saturating growth needs c, b > 0")
        return GrowthSpec(c=c, b=b)

    @staticmethod
    def from_callable(func: Callable, gprime0: float) -> "GrowthSpec":
        return GrowthSpec(func=func, gprime0_user=gprime0)

    @property
    def gprime0(self) -> float:
        if self.func is not None:
            return float(self.gprime0_user)
        return self.c / self.b

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(u), dtype=float)
        return self.c * u / (self.b + u)


@dataclass(frozen=True)
class PulseSpec:
    """Pulse map H applied to the agent density at times k*tau.

    Forms: identity, linear(c1 in (0,1]), or beverton-holt(c2, c3 with
    0 < c2 <= c3).  hprime0 (the derivative at zero, written z) is the
    multiplier entering the linearised period map.
    """

    form: str = "identity"
    c1: float = 1.0
    c2: float = 0.0
    c3: float = 0.0

    @staticmethod
    def identity() -> "PulseSpec":
        return PulseSpec(form="identity")

    @staticmethod
    def linear(c1: float) -> "PulseSpec":
        return PulseSpec(form="linear", c1=c1)

    @staticmethod
    def beverton_holt(c2: float, c3: float) -> "PulseSpec":
        return PulseSpec(form="beverton-holt", c2=c2, c3=c3)

    @property
    def hprime0(self) -> float:
        if self.form == "identity":
            return 1.0
        if self.form == "linear":
            return self.c1
        if self.form == "beverton-holt":
            return self.c2 / self.c3
        raise ValueError(f"unknown pulse form {self.form!r}")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.form == "identity":
            return u.copy()
        if self.form == "linear":
            return self.c1 * u
        if self.form == "beverton-holt":
            return self.c2 * u / (self.c3 + u)
        raise ValueError(f"unknown pulse form {self.form!r}")


@dataclass(frozen=True)
class SolutionBounds:
    """Invariant density caps.

    c1_bound = max{u_star, sup u0, (a12/a11) sup v0}
    c2_bound = max{sup v0, G(c1_bound)/a22}

    where u_star is the positive root of G(u)/u = a11*a22/a12 when the
    comparator a12*G'(0)/(a11*a22) exceeds one, and zero otherwise.  These
    caps satisfy

        -a11*c1_bound + a12*c2_bound <= 0,
        -a22*c2_bound + G(c1_bound) <= 0,

    so the constant pair (c1_bound, c2_bound) dominates every trajectory.
    """

    c1_bound: float
    c2_bound: float
    u_star: float


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            tail = f"  [{c.witness}]" if (c.witness and not c.passed) else ""
            lines.append(f"{status}  {c.name}{tail}")
        return "\n".join(lines)


def _check_growth(params: ModelParams, g: GrowthSpec) -> list[CheckResult]:
    out = []
    vals = g(_PROBE)
    g0 = float(g(np.array([0.0]))[0])
    out.append(CheckResult("G(0) = 0", abs(g0) < 1e-12, f"G(0)={g0:g}"))
    inc = np.diff(vals)
    i_bad = int(np.argmin(inc)) if inc.size else 0
    out.append(
        CheckResult(
            "G strictly increasing",
            bool(np.all(inc > 0)),
            f"G not increasing near u={_PROBE[i_bad]:g}",
        )
    )
    ratio = vals / _PROBE
    dr = np.diff(ratio)
    i_bad = int(np.argmax(dr)) if dr.size else 0
    out.append(
        CheckResult(
            "G(u)/u strictly decreasing",
            bool(np.all(dr < 0)),
            f"G(u)/u not decreasing near u={_PROBE[i_bad]:g}",
        )
    )
    tail = float(ratio[-1])
    lim = params.a11 * params.a22 / params.a12
    out.append(
        CheckResult(
            "tail limit of G(u)/u below a11*a22/a12",
            tail < lim,
            f"G(u)/u={tail:g} at u={_PROBE[-1]:g}, bound {lim:g}",
        )
    )
    out.append(CheckResult("G'(0) > 0", g.gprime0 > 0, f"G'(0)={g.gprime0:g}"))
    return out


def _check_pulse(h: PulseSpec) -> list[CheckResult]:
    out = []
    vals = h(_PROBE)
    h0 = float(h(np.array([0.0]))[0])
    out.append(CheckResult("H(0) = 0", abs(h0) < 1e-12, f"H(0)={h0:g}"))
    inc = np.diff(vals)
    i_bad = int(np.argmin(inc)) if inc.size else 0
    out.append(
        CheckResult(
            "H strictly increasing",
            bool(np.all(inc > 0)),
            f"H not increasing near u={_PROBE[i_bad]:g}",
        )
    )
    ratio = vals / _PROBE
    i_bad = int(np.argmax(ratio))
    out.append(
        CheckResult(
            "0 < H(u)/u <= 1",
            bool(np.all(ratio > 0) and np.all(ratio <= 1.0 + 1e-12)),
            f"H(u)/u={ratio[i_bad]:g} at u={_PROBE[i_bad]:g}",
        )
    )
    dr = np.diff(ratio)
    i_bad = int(np.argmax(dr)) if dr.size else 0
    out.append(
        CheckResult(
            "H(u)/u non-increasing",
            bool(np.all(dr <= 1e-15)),
            f"H(u)/u increases near u={_PROBE[i_bad]:g}",
        )
    )
    z = h.hprime0
    out.append(CheckResult("H'(0) in (0, 1]", 0.0 < z <= 1.0, f"H'(0)={z:g}"))
    return out


def _check_kernel(kernel) -> list[CheckResult]:
    # kernel is a kernels.Kernel; imported lazily to keep this module light.
    out = []
    xs = np.linspace(-1.5 * kernel.radius, 1.5 * kernel.radius, 401)
    vals = kernel.density(xs)
    out.append(
        CheckResult("J >= 0", bool(np.all(vals >= 0.0)), f"min J={vals.min():g}")
    )
    sym = np.max(np.abs(vals - vals[::-1]))
    out.append(CheckResult("J(x) = J(-x)", sym < 1e-12, f"max asymmetry {sym:g}"))
    j0 = float(kernel.density(np.array([0.0]))[0])
    out.append(CheckResult("J(0) > 0", j0 > 0, f"J(0)={j0:g}"))
    outside = np.abs(xs) >= kernel.radius
    out.append(
        CheckResult(
            "J compactly supported",
            bool(np.all(vals[outside] == 0.0)),
            "J nonzero beyond its radius",
        )
    )
    out.append(
        CheckResult(
            "unit mass",
            abs(kernel.mass_defect) < 1e-10,
            f"|integral - 1| = {abs(kernel.mass_defect):g}",
        )
    )
    return out


def validate(
    params: ModelParams, g: GrowthSpec, h: PulseSpec, kernel=None
) -> ValidationReport:
    """Run every structural assumption check and report pass/fail per item.

    Report-only: callers refuse to run on failures.  The kernel argument is
    optional so parameter-only configurations can be screened early.
    """
    checks = _check_growth(params, g) + _check_pulse(h)
    if kernel is not None:
        checks += _check_kernel(kernel)
    return ValidationReport(tuple(checks))


def reproduction_ratio(params: ModelParams, g: GrowthSpec) -> float:
    """Comparator a12*G'(0)/(a11*a22) deciding whether G(u)/u reaches the
    saturation level a11*a22/a12 at a positive density."""
    return params.a12 * g.gprime0 / (params.a11 * params.a22)


def compute_bounds(
    params: ModelParams, g: GrowthSpec, u0_sup: float, v0_sup: float
) -> SolutionBounds:
    """Density caps dominating every run started below (u0_sup, v0_sup)."""
    if not (u0_sup > 0 and v0_sup > 0):
        raise ValueError("u0_sup and v0_sup must be positive")
    target = params.a11 * params.a22 / params.a12
    if reproduction_ratio(params, g) <= 1.0:
        u_star = 0.0
    else:
        lo, hi = 1e-12, 1e12
        f = lambda u: g(u) / u - target
        if not (f(lo) > 0 > f(hi)):
            raise RootNotBracketedError(
                "G(u)/u - a11*a22/a12 does not change sign on [1e-12, 1e12]"
            )
        u_star = float(brentq(f, lo, hi, xtol=1e-12, rtol=1e-14))
    c1 = max(u_star, u0_sup, params.a12 / params.a11 * v0_sup)
    c2 = max(v0_sup, float(g(c1)) / params.a22)
    return SolutionBounds(c1_bound=c1, c2_bound=c2, u_star=u_star)

"""Pulsed dynamics on a fixed interval: period map, periodic states, limit ODE.

One pulse period acts on a field pair (u, v) as the composition

    Pi = E(tau) o P,

where P applies the pulse u -> H(u) (v unchanged) and E(tau) integrates the
dispersal-reaction system by explicit Euler.  Explicit Euler is deliberate:
with the step bound used here it preserves the cooperative comparison
principle exactly at the discrete level, which the monotone iteration and
the ordering property tests rely on.

Periodic states are found by iterating Pi from an upper start (the invariant
density caps, a supersolution) and from a lower start (a small multiple of
the principal eigenfunction slice, shrunk until it is a discrete
subsolution).  The upper iterates decrease, the lower ones increase, and the
two limits agree: on the common limit the iteration detects either the
positive periodic state or collapse to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import spectral
from .kernels import FieldPair, Grid, Kernel, active_weights
from .model import GrowthSpec, ModelParams, PulseSpec, compute_bounds

__all__ = [
    "FixedProblem",
    "PeriodicState",
    "MonotoneIterationResult",
    "LimitTrajectory",
    "InstabilityError",
    "stable_dt",
    "apply_pulse",
    "step_fixed",
    "period_map",
    "periodic_state",
    "solve_limit_ode",
]

SLICES_PER_PERIOD = 50


class InstabilityError(RuntimeError):
    """The explicit step produced NaN or negative densities: dt too large."""


def stable_dt(params: ModelParams, growth: GrowthSpec) -> float:
    """Step bound keeping the explicit update order-preserving."""
    return min(
        params.tau / 2000.0,
        0.2 / (params.rate_sum() + growth.gprime0),
    )


@dataclass(frozen=True)
class FixedProblem:
    """Pulsed problem on the fixed interval [lo, hi].

    Initial data must be positive strictly inside (lo, hi) and zero at the
    endpoints; the grid spans exactly [lo, hi].
    """

    params: ModelParams
    growth: GrowthSpec
    pulse: PulseSpec
    kernel: Kernel
    lo: float
    hi: float
    u0: np.ndarray
    v0: np.ndarray
    dx: float = 0.05
    dt: float | None = None

    @cached_property
    def grid(self) -> Grid:
        return Grid.over(self.lo, self.hi, self.dx)

    @cached_property
    def steps_per_period(self) -> int:
        dt = self.dt if self.dt is not None else stable_dt(self.params, self.growth)
        return max(1, int(np.ceil(self.params.tau / dt)))

    @cached_property
    def _stencil(self) -> np.ndarray:
        return self.kernel.samples(self.grid.dx)

    @cached_property
    def _weights(self) -> np.ndarray:
        return active_weights(self.grid, self.lo, self.hi)

    @staticmethod
    def from_profiles(
        params: ModelParams,
        growth: GrowthSpec,
        pulse: PulseSpec,
        kernel: Kernel,
        lo: float,
        hi: float,
        u_profile,
        v_profile,
        dx: float = 0.05,
        dt: float | None = None,
    ) -> "FixedProblem":
        grid = Grid.over(lo, hi, dx)
        x = grid.nodes
        u0 = np.asarray(u_profile(x), dtype=float)
        v0 = np.asarray(v_profile(x), dtype=float)
        u0[[0, -1]] = 0.0
        v0[[0, -1]] = 0.0
        return FixedProblem(
            params, growth, pulse, kernel, lo, hi, u0, v0, dx=grid.dx, dt=dt
        )

    def initial_fields(self) -> FieldPair:
        return FieldPair(self.u0.copy(), self.v0.copy())


def apply_pulse(fields: FieldPair, pulse: PulseSpec) -> FieldPair:
    """u <- H(u) pointwise; v bitwise unchanged."""
    return FieldPair(pulse(fields.u), fields.v.copy())


def _conv(wf: np.ndarray, stencil: np.ndarray, n: int) -> np.ndarray:
    m = (stencil.size - 1) // 2
    return np.convolve(wf, stencil, mode="full")[m : m + n]


def step_fixed(fields: FieldPair, problem: FixedProblem, dt: float) -> FieldPair:
    """One explicit Euler step; endpoint values held at zero."""
    p = problem.params
    u, v = fields.u, fields.v
    n = problem.grid.n
    w = problem._weights
    st = problem._stencil
    cu = _conv(w * u, st, n)
    cv = _conv(w * v, st, n)
    un = u + dt * (p.d1 * (cu - u) - p.a11 * u + p.a12 * v)
    vn = v + dt * (p.d2 * (cv - v) - p.a22 * v + problem.growth(u))
    un[0] = un[-1] = 0.0
    vn[0] = vn[-1] = 0.0
    if not (np.all(np.isfinite(un)) and np.all(np.isfinite(vn))):
        raise InstabilityError("non-finite density after explicit step")
    if un.min() < -1e-12 or vn.min() < -1e-12:
        raise InstabilityError("negative density after explicit step: dt too large")
    return FieldPair(un, vn)


def _flow_period(fields: FieldPair, problem: FixedProblem, record: list | None = None):
    """Integrate one period after the pulse instant, optionally recording."""
    nsteps = problem.steps_per_period
    dt = problem.params.tau / nsteps
    f = fields
    if record is not None:
        stride = max(1, nsteps // SLICES_PER_PERIOD)
    for k in range(nsteps):
        f = step_fixed(f, problem, dt)
        if record is not None and ((k + 1) % stride == 0 or k + 1 == nsteps):
            record.append(((k + 1) * dt, f.copy()))
    return f


def period_map(fields: FieldPair, problem: FixedProblem) -> FieldPair:
    """Pulse, then flow one period: Pi = E(tau) o P."""
    return _flow_period(apply_pulse(fields, problem.pulse), problem)


@dataclass(frozen=True)
class PeriodicState:
    """One period of a converged periodic orbit.

    U, V hold the pre-pulse slice at t=0, interior slices, and the slice at
    t=tau (equal to t=0 within the iteration tolerance); u_post0/v_post0 are
    the post-pulse values at 0+.
    """

    slice_times: np.ndarray
    U: np.ndarray
    V: np.ndarray
    u_post0: np.ndarray
    v_post0: np.ndarray
    grid: Grid

    @property
    def sup(self) -> float:
        return float(max(self.U.max(initial=0.0), self.V.max(initial=0.0)))


@dataclass
class MonotoneIterationResult:
    state: PeriodicState | None
    iterations: int
    converged: bool
    gap: float
    upper_monotone_violation: float
    lower_monotone_violation: float
    upper_history: list[float] = field(default_factory=list)


def _record_state(slice0: FieldPair, problem: FixedProblem) -> PeriodicState:
    post = apply_pulse(slice0, problem.pulse)
    rec: list[tuple[float, FieldPair]] = [(0.0, slice0.copy())]
    _flow_period(post, problem, record=rec)
    times = np.array([t for t, _ in rec])
    U = np.stack([f.u for _, f in rec])
    V = np.stack([f.v for _, f in rec])
    return PeriodicState(times, U, V, post.u, post.v, problem.grid)


def periodic_state(
    problem: FixedProblem,
    tol: float = 1e-8,
    max_iters: int = 2000,
    eigen_n_nodes: int | None = None,
    zero_floor: float = 1e-6,
) -> MonotoneIterationResult:
    """Monotone double iteration of the period map.

    The upper start is the constant cap pair (c1_bound, c2_bound); the lower
    start is eps times the principal eigen-slice, with eps halved until one
    application of Pi does not decrease it.  Iteration stops when both
    successive differences fall below tol; a collapsed upper iterate means
    the zero state is the limit.
    """
    p = problem.params
    bounds = compute_bounds(
        p, problem.growth, max(problem.u0.max(), 1e-12), max(problem.v0.max(), 1e-12)
    )
    n = problem.grid.n
    upper = FieldPair(np.full(n, bounds.c1_bound), np.full(n, bounds.c2_bound))
    upper.u[[0, -1]] = 0.0
    upper.v[[0, -1]] = 0.0

    report = spectral.lambda1(
        p,
        problem.growth,
        problem.pulse,
        problem.kernel,
        problem.lo,
        problem.hi,
        n_nodes=eigen_n_nodes or max(50, n),
    )
    shape_u = np.interp(problem.grid.nodes, np.linspace(problem.lo, problem.hi, report.n_nodes), report.u_slice)
    shape_v = np.interp(problem.grid.nodes, np.linspace(problem.lo, problem.hi, report.n_nodes), report.v_slice)
    smax = max(shape_u.max(), shape_v.max())
    shape = FieldPair(shape_u / smax, shape_v / smax)

    lower = None
    if report.lambda1 < 0.0:
        eps = 0.5 * min(bounds.c1_bound, bounds.c2_bound)
        for _ in range(50):
            cand = FieldPair(eps * shape.u, eps * shape.v)
            nxt = period_map(cand, problem)
            if np.all(nxt.u >= cand.u - 1e-13) and np.all(nxt.v >= cand.v - 1e-13):
                lower = cand
                break
            eps *= 0.5

    up_viol = 0.0
    low_viol = 0.0
    gap = np.inf
    history: list[float] = []
    converged = False
    it = 0
    while it < max_iters:
        new_upper = period_map(upper, problem)
        up_viol = max(
            up_viol,
            float(max((new_upper.u - upper.u).max(), (new_upper.v - upper.v).max())),
        )
        d_up = max(
            np.abs(new_upper.u - upper.u).max(), np.abs(new_upper.v - upper.v).max()
        )
        upper = new_upper
        history.append(upper.sup())
        d_low = 0.0
        if lower is not None:
            new_lower = period_map(lower, problem)
            low_viol = max(
                low_viol,
                float(
                    max((lower.u - new_lower.u).max(), (lower.v - new_lower.v).max())
                ),
            )
            d_low = max(
                np.abs(new_lower.u - lower.u).max(),
                np.abs(new_lower.v - lower.v).max(),
            )
            lower = new_lower
        it += 1
        if upper.sup() < zero_floor:
            return MonotoneIterationResult(
                None, it, True, upper.sup(), up_viol, low_viol, history
            )
        if max(d_up, d_low) < tol:
            converged = True
            break

    if lower is not None:
        gap = float(
            max(np.abs(upper.u - lower.u).max(), np.abs(upper.v - lower.v).max())
        )
    else:
        gap = float(upper.sup())

    if upper.sup() < zero_floor:
        return MonotoneIterationResult(
            None, it, converged, gap, up_viol, low_viol, history
        )
    state = _record_state(upper, problem)
    return MonotoneIterationResult(
        state, it, converged, gap, up_viol, low_viol, history
    )


@dataclass(frozen=True)
class LimitTrajectory:
    """Per-period pre-pulse states of the space-free pulsed ODE."""

    period_times: np.ndarray
    zeta: np.ndarray
    eta: np.ndarray
    final_delta: float

    @property
    def final(self) -> tuple[float, float]:
        return float(self.zeta[-1]), float(self.eta[-1])


def solve_limit_ode(
    params: ModelParams,
    growth: GrowthSpec,
    pulse: PulseSpec,
    T: float,
    init: tuple[float, float] = (1.0, 1.0),
    steps_per_period: int = 400,
) -> LimitTrajectory:
    """Integrate the space-free pulsed system to time T.

        zeta' = a12*eta - a11*zeta,   eta' = G(zeta) - a22*eta,

    with zeta((k*tau)+) = H(zeta(k*tau)).  Classical RK4 inside each period;
    states are recorded pre-pulse at every period boundary.
    """
    a11, a12, a22 = params.a11, params.a12, params.a22
    g = growth
    tau = params.tau
    n_periods = max(0, int(np.floor(T / tau + 1e-12)))
    dt = tau / steps_per_period

    def rhs(z, e):
        return a12 * e - a11 * z, float(g(z)) - a22 * e

    z, e = float(init[0]), float(init[1])
    times = [0.0]
    zs = [z]
    es = [e]
    for k in range(n_periods):
        z = float(pulse(z))
        for _ in range(steps_per_period):
            k1z, k1e = rhs(z, e)
            k2z, k2e = rhs(z + 0.5 * dt * k1z, e + 0.5 * dt * k1e)
            k3z, k3e = rhs(z + 0.5 * dt * k2z, e + 0.5 * dt * k2e)
            k4z, k4e = rhs(z + dt * k3z, e + dt * k3e)
            z += (dt / 6.0) * (k1z + 2 * k2z + 2 * k3z + k4z)
            e += (dt / 6.0) * (k1e + 2 * k2e + 2 * k3e + k4e)
        times.append((k + 1) * tau)
        zs.append(z)
        es.append(e)
    delta = (
        max(abs(zs[-1] - zs[-2]), abs(es[-1] - es[-2])) if len(zs) >= 2 else np.inf
    )
    return LimitTrajectory(np.array(times), np.array(zs), np.array(es), float(delta))

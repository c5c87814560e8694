"""Full moving-front simulator, outcome detection, and regime classification.

The active region (g(t), h(t)) carries the densities; outside it they are
identically zero.  Fronts move outward with speeds given by kernel tail-mass
integrals of the densities,

    h'(t) = mu1 * int u(x) K1(h - x) dx + mu2 * int v(x) K2(h - x) dx,

and symmetrically at g with a leading minus sign, where K(s) is the kernel
mass beyond s.  Fields advance by the same explicit Euler scheme as the
fixed-interval solver; fronts are continuous real positions (never snapped
to nodes) and the straddling quadrature cells are clipped.  The pulse hits u
at every period start and leaves v and the fronts untouched.

Outcome detection works on per-period summaries (sup-norms, front spans) and
deliberately reports Indeterminate near thresholds: any finite-horizon
reading of an asymptotic dichotomy needs declared thresholds, all of which
are exposed on DetectorThresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import spectral
from .fixed_domain import InstabilityError, stable_dt
from .kernels import Grid, Kernel, active_weights
from .model import GrowthSpec, ModelParams, PulseSpec

__all__ = [
    "FrontState",
    "Snapshot",
    "Trajectory",
    "DetectorThresholds",
    "Classification",
    "WindowCapError",
    "InvalidBracketError",
    "IndeterminateOutcomeError",
    "ThresholdPreconditionError",
    "boundary_speeds",
    "cosine_initial_profiles",
    "Simulator",
    "simulate",
    "detect_outcome",
    "classify",
    "find_mu_star",
]

VANISHING = "Vanishing"
SPREADING = "Spreading"
THRESHOLD = "ThresholdRegime"
INDETERMINATE = "Indeterminate"


class WindowCapError(RuntimeError):
    """The grid window would exceed its configured node cap."""


class InvalidBracketError(ValueError):
    """Both bracket ends produce the same simulated outcome."""


class IndeterminateOutcomeError(RuntimeError):
    """A bisection probe stayed indeterminate: the horizon is too short."""


class ThresholdPreconditionError(ValueError):
    """find_mu_star requires a ThresholdRegime classification."""


@dataclass(frozen=True)
class FrontState:
    g: float
    h: float
    gprime: float
    hprime: float

    @property
    def span(self) -> float:
        return self.h - self.g


@dataclass(frozen=True)
class Snapshot:
    t: float
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    g: float
    h: float


@dataclass
class Trajectory:
    """Per-period summaries plus requested field snapshots."""

    period_times: np.ndarray
    period_sup_u: np.ndarray
    period_sup_v: np.ndarray
    period_g: np.ndarray
    period_h: np.ndarray
    front_times: np.ndarray
    fronts: list[FrontState]
    snapshots: list[Snapshot]
    dt: float
    dx: float

    @property
    def n_periods(self) -> int:
        return len(self.period_times) - 1

    def span_increments(self) -> np.ndarray:
        spans = self.period_h - self.period_g
        return np.diff(spans)


def cosine_initial_profiles(h0: float, u_amp: float = 3.0, v_amp: float = 1.0):
    """Cosine humps vanishing at +-h0: u0 = u_amp*cos(pi*x/(2*h0)), same for v."""

    def u0(x):
        out = u_amp * np.cos(np.pi * np.asarray(x, float) / (2.0 * h0))
        return np.where(np.abs(x) < h0, np.maximum(out, 0.0), 0.0)

    def v0(x):
        out = v_amp * np.cos(np.pi * np.asarray(x, float) / (2.0 * h0))
        return np.where(np.abs(x) < h0, np.maximum(out, 0.0), 0.0)

    return u0, v0


def boundary_speeds(
    u: np.ndarray,
    v: np.ndarray,
    x: np.ndarray,
    dx: float,
    g: float,
    h: float,
    kernel1: Kernel,
    mu1: float,
    mu2: float,
    kernel2: Kernel | None = None,
) -> tuple[float, float]:
    """Front speeds (g', h') from the kernel tail-mass flux integrals."""
    kernel2 = kernel2 or kernel1
    w = active_weights(Grid(xmin=float(x[0]), dx=dx, n=x.size), g, h)
    wu, wv = w * u, w * v
    hp = mu1 * float(wu @ kernel1.tail_mass(h - x)) + mu2 * float(
        wv @ kernel2.tail_mass(h - x)
    )
    gp = -(
        mu1 * float(wu @ kernel1.tail_mass(x - g))
        + mu2 * float(wv @ kernel2.tail_mass(x - g))
    )
    return gp, hp


class Simulator:
    """Owns one moving-front run; advance with run_periods().

    The window preallocates margin*R beyond the initial region and extends by
    extend*R blocks of zero-filled nodes whenever a front comes within one
    kernel radius of an edge.
    """

    def __init__(
        self,
        params: ModelParams,
        growth: GrowthSpec,
        pulse: PulseSpec,
        kernel: Kernel,
        u0_profile=None,
        v0_profile=None,
        dx: float = 0.05,
        dt: float | None = None,
        kernel2: Kernel | None = None,
        window_margin: float = 10.0,
        extend_blocks: float = 5.0,
        max_nodes: int = 400_000,
        snapshot_times: tuple[float, ...] = (),
        front_records_per_period: int = 20,
    ):
        self.params = params
        self.growth = growth
        self.pulse = pulse
        self.k1 = kernel
        self.k2 = kernel2 or kernel
        R = max(self.k1.radius, self.k2.radius)
        self.R = R
        self.dx = float(dx)
        self.max_nodes = max_nodes
        self.extend_nodes = int(np.ceil(extend_blocks * R / self.dx))

        dt_cap = dt if dt is not None else stable_dt(params, growth)
        self.steps_per_period = max(1, int(np.ceil(params.tau / dt_cap)))
        self.dt = params.tau / self.steps_per_period

        h0 = params.h0
        half = h0 + window_margin * R
        n = int(np.ceil(2.0 * half / self.dx)) + 1
        self.x = -half + self.dx * np.arange(n)
        if u0_profile is None or v0_profile is None:
            cu, cv = cosine_initial_profiles(h0)
            u0_profile = u0_profile or cu
            v0_profile = v0_profile or cv
        self.u = np.asarray(u0_profile(self.x), dtype=float)
        self.v = np.asarray(v0_profile(self.x), dtype=float)
        outside = (self.x <= -h0) | (self.x >= h0)
        self.u[outside] = 0.0
        self.v[outside] = 0.0
        self.grid = Grid(xmin=float(self.x[0]), dx=self.dx, n=self.x.size)
        self.g = -h0
        self.h = h0
        self.t = 0.0
        self.period = 0

        self._st1 = self.k1.samples(self.dx)
        self._st2 = self.k2.samples(self.dx)

        self.snapshot_steps = {}
        for ts in snapshot_times:
            k_period = int(np.floor(ts / params.tau + 1e-9))
            step = int(round((ts - k_period * params.tau) / self.dt))
            self.snapshot_steps.setdefault((k_period, step), float(ts))

        self.front_stride = max(1, self.steps_per_period // front_records_per_period)

        gp, hp = self._speeds()
        self.period_times = [0.0]
        self.period_sup_u = [float(self.u.max())]
        self.period_sup_v = [float(self.v.max())]
        self.period_g = [self.g]
        self.period_h = [self.h]
        self.front_times = [0.0]
        self.fronts = [FrontState(self.g, self.h, gp, hp)]
        self.snapshots: list[Snapshot] = []
        self._maybe_snapshot(0, 0)

    # -- internals ---------------------------------------------------------

    def _speeds(self) -> tuple[float, float]:
        return boundary_speeds(
            self.u,
            self.v,
            self.x,
            self.dx,
            self.g,
            self.h,
            self.k1,
            self.params.mu1,
            self.params.mu2,
            kernel2=self.k2,
        )

    def _conv(self, wf: np.ndarray, stencil: np.ndarray) -> np.ndarray:
        m = (stencil.size - 1) // 2
        return np.convolve(wf, stencil, mode="full")[m : m + wf.size]

    def _extend_if_needed(self):
        pad = self.R + 2.0 * self.dx
        grew = False
        while self.g < self.x[0] + pad:
            if self.x.size + self.extend_nodes > self.max_nodes:
                raise WindowCapError(
                    f"window would exceed {self.max_nodes} nodes at t={self.t:.3f}"
                )
            block = self.x[0] - self.dx * np.arange(self.extend_nodes, 0, -1)
            self.x = np.concatenate([block, self.x])
            self.u = np.concatenate([np.zeros(self.extend_nodes), self.u])
            self.v = np.concatenate([np.zeros(self.extend_nodes), self.v])
            grew = True
        while self.h > self.x[-1] - pad:
            if self.x.size + self.extend_nodes > self.max_nodes:
                raise WindowCapError(
                    f"window would exceed {self.max_nodes} nodes at t={self.t:.3f}"
                )
            block = self.x[-1] + self.dx * np.arange(1, self.extend_nodes + 1)
            self.x = np.concatenate([self.x, block])
            self.u = np.concatenate([self.u, np.zeros(self.extend_nodes)])
            self.v = np.concatenate([self.v, np.zeros(self.extend_nodes)])
            grew = True
        if grew:
            self.grid = Grid(xmin=float(self.x[0]), dx=self.dx, n=self.x.size)
        return grew

    def _maybe_snapshot(self, k_period: int, step: int):
        key = (k_period, step)
        if key in self.snapshot_steps:
            self.snapshots.append(
                Snapshot(
                    self.snapshot_steps[key],
                    self.x.copy(),
                    self.u.copy(),
                    self.v.copy(),
                    self.g,
                    self.h,
                )
            )

    def _step(self):
        p = self.params
        dt = self.dt
        x, u, v = self.x, self.u, self.v
        w = active_weights(self.grid, self.g, self.h)
        wu = w * u
        wv = w * v
        cu = self._conv(wu, self._st1)
        cv = self._conv(wv, self._st2)

        th1 = self.k1.tail_mass(self.h - x)
        tg1 = self.k1.tail_mass(x - self.g)
        if self.k2 is self.k1:
            th2, tg2 = th1, tg1
        else:
            th2 = self.k2.tail_mass(self.h - x)
            tg2 = self.k2.tail_mass(x - self.g)
        hp = p.mu1 * float(wu @ th1) + p.mu2 * float(wv @ th2)
        gp = -(p.mu1 * float(wu @ tg1) + p.mu2 * float(wv @ tg2))

        inside = (x > self.g) & (x < self.h)
        du = p.d1 * (cu - u) - p.a11 * u + p.a12 * v
        dv = p.d2 * (cv - v) - p.a22 * v + self.growth(u)
        un = np.where(inside, u + dt * du, 0.0)
        vn = np.where(inside, v + dt * dv, 0.0)
        self.u, self.v = un, vn
        self.g += dt * gp
        self.h += dt * hp
        self.t += dt
        return gp, hp

    # -- public driving ----------------------------------------------------

    def run_periods(self, n: int):
        """Advance n full pulse periods (pulse first, then the flow)."""
        for _ in range(n):
            self.u = self.pulse(self.u)
            umax = vmax = 0.0
            for step in range(1, self.steps_per_period + 1):
                gp, hp = self._step()
                if step % self.front_stride == 0:
                    self.front_times.append(self.t)
                    self.fronts.append(FrontState(self.g, self.h, gp, hp))
                self._maybe_snapshot(self.period, step)
            if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
                raise InstabilityError(
                    f"non-finite density at t={self.t:.4f} (dt={self.dt:g})"
                )
            if self.u.min() < -1e-12 or self.v.min() < -1e-12:
                raise InstabilityError(
                    f"negative density at t={self.t:.4f}: dt too large"
                )
            self.period += 1
            self.period_times.append(self.period * self.params.tau)
            self.period_sup_u.append(float(self.u.max()))
            self.period_sup_v.append(float(self.v.max()))
            self.period_g.append(self.g)
            self.period_h.append(self.h)
            self._extend_if_needed()
        return self

    def trajectory(self) -> Trajectory:
        return Trajectory(
            period_times=np.array(self.period_times),
            period_sup_u=np.array(self.period_sup_u),
            period_sup_v=np.array(self.period_sup_v),
            period_g=np.array(self.period_g),
            period_h=np.array(self.period_h),
            front_times=np.array(self.front_times),
            fronts=list(self.fronts),
            snapshots=list(self.snapshots),
            dt=self.dt,
            dx=self.dx,
        )


def simulate(
    params: ModelParams,
    growth: GrowthSpec,
    pulse: PulseSpec,
    kernel: Kernel,
    T: float,
    **kwargs,
) -> Trajectory:
    """Run the moving-front model for floor(T/tau) full pulse periods."""
    sim = Simulator(params, growth, pulse, kernel, **kwargs)
    n = int(np.floor(T / params.tau + 1e-9))
    if n > 0:
        sim.run_periods(n)
    return sim.trajectory()


# ---------------------------------------------------------------------------
# Outcome detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectorThresholds:
    """Declared thresholds for reading the asymptotic dichotomy at a finite
    horizon.  decay_slope is per period; front_increment_tol is the level the
    extrapolated per-period span growth must undercut within lookahead
    periods for a vanishing verdict."""

    decay_slope: float = 1e-3
    front_increment_tol: float = 1e-6
    spread_front_floor: float = 1e-4
    spread_density_floor: float = 1e-4
    lookahead: float = 10_000.0


def _log_slope(values: np.ndarray) -> float:
    """Least-squares slope of ln(values) per period; -inf for all-zero."""
    vals = np.maximum(np.asarray(values, float), 0.0)
    if np.all(vals == 0.0):
        return -np.inf
    logs = np.log(np.maximum(vals, 1e-300))
    idx = np.arange(logs.size, dtype=float)
    if logs.size < 2:
        return 0.0
    return float(np.polyfit(idx, logs, 1)[0])


def detect_outcome(
    traj: Trajectory,
    horizon: int,
    thresholds: DetectorThresholds = DetectorThresholds(),
    strict_growth: bool = False,
) -> str:
    """Classify a finished trajectory as Vanishing / Spreading / Indeterminate.

    Vanishing: per-period sup-norms and span increments both decay
    geometrically and the extrapolated increments undercut
    front_increment_tol within the lookahead.  Spreading: sup-norms hold
    above their floor with no geometric decay trend and the span keeps
    growing above its floor.  The two rules are mutually exclusive through
    the sup-norm slope; anything else stays Indeterminate, because the
    dichotomy is asymptotic and a finite horizon cannot always call it.

    strict_growth additionally requires clearly rising sup-norms for a
    Spreading verdict; interim reads of an unfinished run use it so a slow
    creep is never upgraded early.
    """
    if traj.n_periods < horizon:
        raise ValueError(
            f"trajectory spans {traj.n_periods} periods, need >= {horizon}"
        )
    th = thresholds
    sups = traj.period_sup_u + traj.period_sup_v
    incs = traj.span_increments()
    half = max(2, horizon // 2)
    quarter = max(2, horizon // 4)
    sups_half = sups[-half:]
    incs_half = incs[-half:]
    incs_quarter = incs[-quarter:]

    if sups[-1] < 1e-12 and incs[-1] < th.front_increment_tol:
        return VANISHING

    sup_slope = _log_slope(sups_half)
    inc_slope = _log_slope(incs_half)

    vanishing = sup_slope < -th.decay_slope and inc_slope < -th.decay_slope
    if vanishing and np.isfinite(inc_slope):
        periods_to_tol = (
            np.log(max(incs[-1], 1e-300) / th.front_increment_tol) / -inc_slope
        )
        vanishing = incs[-1] <= th.front_increment_tol or (
            0.0 <= periods_to_tol <= th.lookahead
        )

    growth_gate = th.decay_slope if strict_growth else -th.decay_slope
    spreading = (
        float(np.min(sups_half)) > th.spread_density_floor
        and float(np.min(incs_quarter)) > th.spread_front_floor
        and sup_slope > growth_gate
    )

    if vanishing and not spreading:
        return VANISHING
    if spreading and not vanishing:
        return SPREADING
    return INDETERMINATE


# ---------------------------------------------------------------------------
# Classification and the critical expansion capacity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    verdict: str
    mu1_limit: float
    lambda_h0: float | None
    mu_star: float | None = None
    caveats: tuple[str, ...] = ()
    stamp: str = ""

    def as_text(self) -> str:
        lines = [
            f"verdict: {self.verdict}",
            f"mu1_limit: {self.mu1_limit!r}",
            f"lambda_h0: {self.lambda_h0!r}",
        ]
        if self.mu_star is not None:
            lines.append(f"mu_star: {self.mu_star!r}")
        for c in self.caveats:
            lines.append(f"caveat: {c}")
        if self.stamp:
            lines.append(f"discretization: {self.stamp}")
        return "\n".join(lines) + "\n"


def classify(
    params: ModelParams,
    growth: GrowthSpec,
    pulse: PulseSpec,
    kernel: Kernel,
    n_nodes: int = 400,
    mu1_zero_tol: float = 1e-6,
) -> Classification:
    """Spreading/vanishing verdict from the two decisive eigenvalues.

    mu1_limit = lambda1 at infinite length decides extinction outright when
    nonnegative; otherwise the sign of lambda1 on the initial region selects
    Spreading or the threshold regime in the expansion capacities.
    """
    z = pulse.hprime0
    mu1 = spectral.mu1_ode(params, growth, z)
    if mu1 > mu1_zero_tol:
        return Classification(VANISHING, mu1, None, stamp="ode-limit")
    if abs(mu1) <= mu1_zero_tol:
        return Classification(
            VANISHING,
            mu1,
            None,
            caveats=(
                "borderline mu1 = 0: extinction of densities is asserted; "
                "boundedness of the active region at this threshold is assumed, "
                "not derived",
            ),
            stamp="ode-limit",
        )
    rep = spectral.lambda1(
        params, growth, pulse, kernel, -params.h0, params.h0, n_nodes=n_nodes
    )
    stamp = f"n={rep.n_nodes} dx={rep.dx:.6g} method={rep.method}"
    if rep.lambda1 <= 0.0:
        return Classification(SPREADING, mu1, rep.lambda1, stamp=stamp)
    return Classification(
        THRESHOLD,
        mu1,
        rep.lambda1,
        caveats=(
            "lambda1 changes sign with expansion capacity: mu_star separates "
            "vanishing from spreading for mu2 = rho*mu1",
        ),
        stamp=stamp,
    )


def _probe_outcome(
    params: ModelParams,
    growth: GrowthSpec,
    pulse: PulseSpec,
    kernel: Kernel,
    horizon: int,
    thresholds: DetectorThresholds,
    min_periods: int,
    sim_kwargs: dict,
) -> str:
    """Simulate until the detector commits, up to the horizon.

    Spreading verdicts are accepted as soon as they appear (past the
    escape/regrowth turnaround they are stable); Vanishing is only accepted
    at the full horizon so a slow creep toward escape is not misread.
    """
    sim = Simulator(params, growth, pulse, kernel, **sim_kwargs)
    chunk = max(4, min_periods // 2)
    while sim.period < horizon:
        todo = min(chunk, horizon - sim.period)
        sim.run_periods(todo)
        if sim.period >= min_periods and sim.period < horizon:
            verdict = detect_outcome(
                sim.trajectory(), sim.period, thresholds, strict_growth=True
            )
            if verdict == SPREADING:
                return verdict
    return detect_outcome(sim.trajectory(), horizon, thresholds)


def find_mu_star(
    params: ModelParams,
    growth: GrowthSpec,
    pulse: PulseSpec,
    kernel: Kernel,
    rho_ratio: float,
    bracket: tuple[float, float],
    horizon: int = 48,
    rel_width: float = 0.05,
    thresholds: DetectorThresholds = DetectorThresholds(),
    min_periods: int = 16,
    **sim_kwargs,
) -> float:
    """Critical agent expansion capacity for mu2 = rho_ratio * mu1.

    Bisection over simulated outcomes; ends when the bracket's relative
    width drops below rel_width.  Probes that stay Indeterminate at the
    horizon abort with the probe value so the caller can lengthen the run.
    """
    cls = classify(params, growth, pulse, kernel)
    if cls.verdict != THRESHOLD:
        raise ThresholdPreconditionError(
            f"classification is {cls.verdict}, not {THRESHOLD}"
        )

    def probe(mu1_val: float) -> str:
        trial = replace(params, mu1=mu1_val, mu2=rho_ratio * mu1_val)
        out = _probe_outcome(
            trial, growth, pulse, kernel, horizon, thresholds, min_periods, sim_kwargs
        )
        if out == INDETERMINATE:
            raise IndeterminateOutcomeError(
                f"outcome indeterminate at mu1={mu1_val:.6g} after {horizon} periods"
            )
        return out

    lo, hi = bracket
    if not (0.0 < lo < hi):
        raise InvalidBracketError("bracket must satisfy 0 < lo < hi")
    out_lo = probe(lo)
    out_hi = probe(hi)
    if out_lo != VANISHING or out_hi != SPREADING:
        raise InvalidBracketError(
            f"bracket outcomes are ({out_lo}, {out_hi}); "
            "need (Vanishing, Spreading)"
        )
    while (hi - lo) > rel_width * 0.5 * (lo + hi):
        mid = 0.5 * (lo + hi)
        if probe(mid) == VANISHING:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

"""Principal eigenvalues of the linearised pulsed problem.

The linearisation of the pulsed system at the extinct state on an interval
[lo, hi] discretizes to a cooperative block generator

    L = [ d1*(K1 - I) - a11*I        a12*I              ]
        [ G'(0)*I                    d2*(K2 - I) - a22*I ]

where K1, K2 apply the dispersal kernel by clipped-trapezoid quadrature on
the interior nodes (endpoint values pinned to zero).  One pulse period maps a
state w to M w with

    M = exp(L*tau) @ diag(z*I, I),        z = H'(0),

and the principal eigenvalue is lambda1 = -ln(rho(M))/tau with rho the Perron
root of M.  The same quantity is recomputed through an affine relation from a
transformed generator with swapped reaction coefficients (time direction
reversed), giving an independent cross-check route.

Dropping dispersal reduces the period map to the 2x2 system

    A = [ -a11   a12  ]
        [ G'(0) -a22  ]

whose pulsed Perron value mu1 = -ln(rho(exp(A*tau) diag(z,1)))/tau is the
l -> infinity limit of lambda1 and the global extinction comparator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .kernels import Grid, Kernel
from .model import GrowthSpec, ModelParams, PulseSpec

__all__ = [
    "EigenReport",
    "PowerIterationError",
    "BracketError",
    "NoRootError",
    "MonotonicityError",
    "mu1_ode",
    "eta1_closed_form",
    "lambda1",
    "lambda1_transformed",
    "find_lstar",
    "sweep_lambda1",
]

POWER_TOL = 1e-10
POWER_CAP = 10_000
RESIDUAL_TOL = 1e-8
_RK4_STEPS = 2000
_DENSE_LIMIT = 1700  # largest 2m handled by the dense-exponential route


class PowerIterationError(RuntimeError):
    """Neither power iteration nor the dense fallback produced a Perron pair."""


class BracketError(ValueError):
    """Bisection bracket does not straddle the requested sign change."""


class NoRootError(ValueError):
    """lambda1(l) is bounded away from zero: mu1 >= 0 forces lambda1 > 0."""


class MonotonicityError(RuntimeError):
    """A sweep that must be strictly decreasing is not; the discretization
    is too coarse for the requested axis resolution."""


@dataclass(frozen=True)
class EigenReport:
    """Principal eigenvalue with its discretization stamp.

    lambda1 = -ln(rho)/tau by construction; residual is the relative Perron
    defect of the returned eigenvector, and eigvec_min certifies interior
    positivity.
    """

    lambda1: float
    rho: float
    residual: float
    n_nodes: int
    dx: float
    method: str
    interval: tuple[float, float]
    z: float
    u_slice: np.ndarray
    v_slice: np.ndarray
    eigvec_min: float
    iterations: int


# ---------------------------------------------------------------------------
# 2x2 helpers
# ---------------------------------------------------------------------------


def _expm_2x2(A: np.ndarray, t: float) -> np.ndarray:
    """exp(A*t) by exact eigendecomposition; scaling-and-squaring when the
    eigenvalues are too close to separate."""
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    disc = (a - d) ** 2 + 4.0 * b * c
    if disc <= 1e-14 * max(1.0, a * a + d * d):
        return expm(A * t)
    rt = np.sqrt(disc)
    lam1 = ((a + d) + rt) / 2.0
    lam2 = ((a + d) - rt) / 2.0
    I2 = np.eye(2)
    return (np.exp(lam1 * t) * (A - lam2 * I2) - np.exp(lam2 * t) * (A - lam1 * I2)) / (
        lam1 - lam2
    )


def _perron_2x2(M: np.ndarray) -> float:
    """Perron root of a nonnegative 2x2 matrix (largest real eigenvalue)."""
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = max(tr * tr - 4.0 * det, 0.0)
    return (tr + np.sqrt(disc)) / 2.0


def _ode_matrix(params: ModelParams, growth: GrowthSpec) -> np.ndarray:
    """Cooperative 2x2 linearisation at zero (off-diagonal entries >= 0)."""
    return np.array(
        [[-params.a11, params.a12], [growth.gprime0, -params.a22]], dtype=float
    )


def mu1_ode(params: ModelParams, growth: GrowthSpec, z: float) -> float:
    """Pulsed principal eigenvalue of the dispersal-free 2x2 system."""
    if not (0.0 < z <= 1.0):
        raise ValueError("z = H'(0) must lie in (0, 1]")
    A = _ode_matrix(params, growth)
    M = _expm_2x2(A, params.tau) @ np.diag([z, 1.0])
    return float(-np.log(_perron_2x2(M)) / params.tau)


def eta1_closed_form(params: ModelParams, growth: GrowthSpec, z: float) -> float:
    """Closed-form principal value of the pulse-shifted reaction block.

    With S = a11 + a22 and D = d1 + d2 + 2 ln(z)/tau:

        eta1 = [S - D + sqrt((D - S)^2 + 4 a12 G'(0))] / 2.
    """
    if not (0.0 < z <= 1.0):
        raise ValueError("z = H'(0) must lie in (0, 1]")
    S = params.a11 + params.a22
    D = params.d1 + params.d2 + 2.0 * np.log(z) / params.tau
    return float((S - D + np.sqrt((D - S) ** 2 + 4.0 * params.a12 * growth.gprime0)) / 2.0)


# ---------------------------------------------------------------------------
# Discrete generator and Perron machinery
# ---------------------------------------------------------------------------


def _interior_kernel_matrix(kernel: Kernel, grid: Grid) -> np.ndarray:
    """Weighted kernel application restricted to interior nodes.

    Endpoint nodes carry the value zero, so their columns drop; their rows
    drop too because the flow keeps them pinned.
    """
    x = grid.nodes
    K = kernel.density(x[:, None] - x[None, :]) * grid.dx
    return K[1:-1, 1:-1]


def _build_generator(
    params: ModelParams,
    growth: GrowthSpec,
    kernel: Kernel,
    grid: Grid,
    transformed: bool,
    z: float,
) -> np.ndarray:
    Ki = _interior_kernel_matrix(kernel, grid)
    m = Ki.shape[0]
    I = np.eye(m)
    if not transformed:
        r1, r2 = -params.a11, -params.a22
    else:
        shift = -np.log(z) / params.tau
        r1, r2 = params.a22 + shift, params.a11 + shift
    return np.block(
        [
            [params.d1 * (Ki - I) + r1 * I, params.a12 * I],
            [growth.gprime0 * I, params.d2 * (Ki - I) + r2 * I],
        ]
    )


def _power_iteration(apply_M, dim: int):
    """Perron pair by power iteration from the all-ones vector.

    Returns (rho, w, residual, iterations, converged).  Iterates keep strict
    positivity because the period map is a positive operator.  Rayleigh
    drift below POWER_TOL triggers a residual check; a handful of failed
    checks hands the problem to the dense fallback.
    """
    w = np.ones(dim)
    w /= np.linalg.norm(w)
    rho = rho_prev = np.inf
    resid = np.inf
    it = 0
    next_check = 0
    checks_left = 5
    while it < POWER_CAP:
        y = apply_M(w)
        rho = float(w @ y)
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            return rho, w, np.inf, it, False
        y = y / ny
        drift = abs(rho - rho_prev)
        rho_prev = rho
        w = y
        it += 1
        if drift < POWER_TOL * max(1.0, abs(rho)) and it >= next_check:
            resid = float(np.linalg.norm(apply_M(w) - rho * w))
            if resid < RESIDUAL_TOL:
                return rho, w, resid, it, True
            checks_left -= 1
            if checks_left <= 0:
                return rho, w, resid, it, False
            next_check = it + 250
    return rho, w, resid, it, False


def _dense_perron(M: np.ndarray):
    """Perron pair from a full eigendecomposition (fallback route)."""
    vals, vecs = np.linalg.eig(M)
    i = int(np.argmax(vals.real))
    rho = float(vals[i].real)
    w = np.abs(vecs[:, i].real)
    n = np.linalg.norm(w)
    if n == 0.0:
        raise PowerIterationError("dense eigensolve produced a null eigenvector")
    w /= n
    resid = np.linalg.norm(M @ w - rho * w) / np.linalg.norm(w)
    return rho, w, float(resid)


def _rk4_flow(L_apply, w: np.ndarray, tau: float, steps: int) -> np.ndarray:
    dt = tau / steps
    for _ in range(steps):
        k1 = L_apply(w)
        k2 = L_apply(w + 0.5 * dt * k1)
        k3 = L_apply(w + 0.5 * dt * k2)
        k4 = L_apply(w + dt * k3)
        w = w + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return w


def _period_map_report(
    params: ModelParams,
    growth: GrowthSpec,
    kernel: Kernel,
    grid: Grid,
    z: float,
    transformed: bool,
    method: str,
):
    """Perron root and eigenvector of exp(L*tau) @ diag(z*I, I)."""
    m = grid.n - 2
    if m < 1:
        raise ValueError("need at least one interior node")
    pulse_vec = np.r_[np.full(m, z), np.ones(m)]

    if method == "auto":
        method = "dense-exponential" if 2 * m <= _DENSE_LIMIT else "monodromy-power"

    if method == "dense-exponential":
        L = _build_generator(params, growth, kernel, grid, transformed, z)
        M = expm(L * params.tau)
        M = M * pulse_vec[None, :]
        rho, w, resid, it, ok = _power_iteration(lambda v: M @ v, 2 * m)
        if not ok:
            rho, w, resid = _dense_perron(M)
            it = -1
        if resid >= RESIDUAL_TOL:
            raise PowerIterationError(
                f"Perron residual {resid:.3e} exceeds {RESIDUAL_TOL:g}"
            )
        return rho, w, resid, it, method

    if method == "monodromy-power":
        L = _build_generator(params, growth, kernel, grid, transformed, z)

        def apply_M(v):
            return _rk4_flow(lambda y: L @ y, v * pulse_vec, params.tau, _RK4_STEPS)

        rho, w, resid, it, ok = _power_iteration(apply_M, 2 * m)
        if not ok and 2 * m <= _DENSE_LIMIT:
            M = expm(L * params.tau) * pulse_vec[None, :]
            rho, w, resid = _dense_perron(M)
            it = -1
        if resid >= RESIDUAL_TOL:
            raise PowerIterationError(
                f"Perron residual {resid:.3e} exceeds {RESIDUAL_TOL:g}"
            )
        return rho, w, resid, it, method

    raise ValueError(f"unknown method {method!r}")


def _make_report(
    params, grid, z, rho, w, resid, it, method, lo, hi, lam
) -> EigenReport:
    m = grid.n - 2
    u = np.zeros(grid.n)
    v = np.zeros(grid.n)
    u[1:-1] = w[:m]
    v[1:-1] = w[m:]
    return EigenReport(
        lambda1=float(lam),
        rho=float(rho),
        residual=float(resid),
        n_nodes=grid.n,
        dx=grid.dx,
        method=method,
        interval=(lo, hi),
        z=z,
        u_slice=u,
        v_slice=v,
        eigvec_min=float(w.min()),
        iterations=it,
    )


def lambda1(
    params: ModelParams,
    growth: GrowthSpec,
    pulse: PulseSpec,
    kernel: Kernel,
    lo: float,
    hi: float,
    n_nodes: int = 400,
    method: str = "auto",
) -> EigenReport:
    """Principal eigenvalue of the pulsed linearisation on [lo, hi]."""
    if hi <= lo:
        raise ValueError("interval must have positive length")
    if n_nodes < 50:
        raise ValueError("n_nodes must be at least 50")
    z = pulse.hprime0
    grid = Grid.over(lo, hi, (hi - lo) / (n_nodes - 1))
    rho, w, resid, it, used = _period_map_report(
        params, growth, kernel, grid, z, transformed=False, method=method
    )
    lam = -np.log(rho) / params.tau
    return _make_report(params, grid, z, rho, w, resid, it, used, lo, hi, lam)


def lambda1_transformed(
    params: ModelParams,
    growth: GrowthSpec,
    pulse: PulseSpec,
    kernel: Kernel,
    lo: float,
    hi: float,
    n_nodes: int = 400,
    method: str = "auto",
) -> EigenReport:
    """lambda1 recovered through the transformed generator.

    The transformed system swaps the reaction coefficients (a22 in the first
    row, a11 in the second, both shifted by -ln(z)/tau; its time direction is
    reversed relative to the direct problem).  Its spectral bound s_C enters
    the affine relation

        lambda1 = a11 + a22 - ln(z)/tau - s_C,

    giving an independent route to the same number.
    """
    if hi <= lo:
        raise ValueError("interval must have positive length")
    if n_nodes < 50:
        raise ValueError("n_nodes must be at least 50")
    z = pulse.hprime0
    grid = Grid.over(lo, hi, (hi - lo) / (n_nodes - 1))
    rho, w, resid, it, used = _period_map_report(
        params, growth, kernel, grid, z, transformed=True, method=method
    )
    s_C = np.log(rho) / params.tau
    lam = params.a11 + params.a22 - np.log(z) / params.tau - s_C
    return _make_report(
        params, grid, z, rho, w, resid, it, used + "/transformed", lo, hi, lam
    )


def _nodes_for(l: float, dx_target: float, n_min: int = 51) -> int:
    return max(n_min, int(round(2.0 * l / dx_target)) + 1)


def find_lstar(
    params: ModelParams,
    growth: GrowthSpec,
    pulse: PulseSpec,
    kernel: Kernel,
    l_lo: float,
    l_hi: float,
    dx_target: float = 0.05,
    tol_lambda: float = 1e-3,
) -> float:
    """Critical half-length where lambda1(-l, l) crosses zero.

    Bisection on l, stopping when |lambda1| at the midpoint drops below
    tol_lambda.  Refuses to run when mu1 >= 0, which pins lambda1(l) above
    zero for every l.
    """
    mu1 = mu1_ode(params, growth, pulse.hprime0)
    if mu1 >= 0.0:
        raise NoRootError(
            f"mu1 = {mu1:.6g} >= 0: lambda1(l) >= mu1 never reaches zero"
        )

    def lam(l):
        return lambda1(
            params, growth, pulse, kernel, -l, l, _nodes_for(l, dx_target)
        ).lambda1

    f_lo, f_hi = lam(l_lo), lam(l_hi)
    if not (f_lo > 0.0 > f_hi):
        raise BracketError(
            f"bracket invalid: lambda1({l_lo})={f_lo:.4g}, lambda1({l_hi})={f_hi:.4g}"
        )
    lo, hi = l_lo, l_hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        f_mid = lam(mid)
        if abs(f_mid) < tol_lambda:
            return mid
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
    raise BracketError("bisection failed to reach the lambda tolerance")


def sweep_lambda1(
    params: ModelParams,
    growth: GrowthSpec,
    pulse: PulseSpec,
    kernel: Kernel,
    z_values=None,
    l_values=None,
    l: float | None = None,
    n_nodes: int = 200,
    dx_target: float = 0.05,
) -> list[tuple[float, EigenReport]]:
    """Table of (axis value, eigen report) along a z-list or an l-list.

    Exactly one of z_values / l_values is given, sorted ascending.  The
    computed lambda1 must be strictly decreasing along the axis; a violation
    signals a too-coarse discretization and raises rather than passing
    silently.
    """
    if (z_values is None) == (l_values is None):
        raise ValueError("give exactly one of z_values or l_values")
    rows: list[tuple[float, EigenReport]] = []
    if z_values is not None:
        if l is None:
            raise ValueError("sweeping z needs the half-length l")
        vals = list(z_values)
        if sorted(vals) != vals:
            raise ValueError("axis values must be sorted ascending")
        for z in vals:
            p = PulseSpec.linear(z) if z < 1.0 else PulseSpec.identity()
            rows.append(
                (z, lambda1(params, growth, p, kernel, -l, l, n_nodes))
            )
    else:
        vals = list(l_values)
        if sorted(vals) != vals:
            raise ValueError("axis values must be sorted ascending")
        for li in vals:
            rows.append(
                (
                    li,
                    lambda1(
                        params,
                        growth,
                        pulse,
                        kernel,
                        -li,
                        li,
                        _nodes_for(li, dx_target),
                    ),
                )
            )
    lams = [r.lambda1 for _, r in rows]
    for (a0, l0), (a1, l1) in zip(
        zip(vals, lams), zip(vals[1:], lams[1:])
    ):
        if not l1 < l0:
            raise MonotonicityError(
                f"lambda1 not strictly decreasing between axis {a0} and {a1}: "
                f"{l0:.8g} -> {l1:.8g}"
            )
    return rows

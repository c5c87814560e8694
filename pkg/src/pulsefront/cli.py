"""Command line driver: deterministic runs, CSV and report emission.

    pulsefront <subcommand> --config <path> [--out <dir>]

Subcommands: simulate, eigen, steady, classify, sweep, mustar.  The output
directory comes from --out, falling back to the PULSEFRONT_OUT environment
variable, then the working directory.  Every output file starts with a
comment carrying the config hash and the discretization stamp; numbers are
written as shortest round-trip decimals, so identical configs produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import fixed_domain, free_boundary, spectral
from .config import ConfigError, ScenarioConfig, parse_config

SUBCOMMANDS = ("simulate", "eigen", "steady", "classify", "sweep", "mustar")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header_comment: str, columns: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(f"# {header_comment}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(c) for c in row) + "\n")


def _stamp(cfg: ScenarioConfig, extra: str = "") -> str:
    s = f"config {cfg.config_hash()} | dx={cfg.dx!r} n_nodes={cfg.n_nodes}"
    return f"{s} | {extra}" if extra else s


def _cmd_simulate(cfg: ScenarioConfig, out: Path) -> str:
    params = cfg.model_params()
    u0, v0 = cfg.initial_profiles()
    traj = free_boundary.simulate(
        params,
        cfg.growth(),
        cfg.pulse(),
        cfg.kernel(),
        cfg.T,
        u0_profile=u0,
        v0_profile=v0,
        dx=cfg.dx,
        dt=(cfg.dt or None),
        snapshot_times=cfg.snapshot_list(),
        front_records_per_period=cfg.output_every,
    )
    stamp = _stamp(cfg, f"dt={traj.dt!r}")
    _write_csv(
        out / "fronts.csv",
        stamp,
        ["t", "g", "h", "gprime", "hprime"],
        (
            (t, f.g, f.h, f.gprime, f.hprime)
            for t, f in zip(traj.front_times, traj.fronts)
        ),
    )
    for i, snap in enumerate(traj.snapshots):
        _write_csv(
            out / f"snapshot_{i:03d}.csv",
            f"{stamp} | t={snap.t!r}",
            ["x", "u", "v"],
            zip(snap.x, snap.u, snap.v),
        )
    if traj.n_periods:
        return (
            f"simulated {traj.n_periods} periods: "
            f"g(T)={traj.period_g[-1]:.4f} h(T)={traj.period_h[-1]:.4f} "
            f"sup u={traj.period_sup_u[-1]:.4g}"
        )
    return "simulated 0 periods (empty trajectory)"


def _cmd_eigen(cfg: ScenarioConfig, out: Path) -> str:
    l = cfg.effective_eigen_l()
    rep = spectral.lambda1(
        cfg.model_params(),
        cfg.growth(),
        cfg.pulse(),
        cfg.kernel(),
        -l,
        l,
        n_nodes=cfg.n_nodes,
    )
    _write_csv(
        out / "eigen.csv",
        _stamp(cfg, f"method={rep.method}"),
        ["axis", "lambda1", "rho", "residual", "n_nodes"],
        [(l, rep.lambda1, rep.rho, rep.residual, rep.n_nodes)],
    )
    return f"lambda1({-l:g},{l:g}) = {rep.lambda1:.6f}  (rho={rep.rho:.6f})"


def _cmd_steady(cfg: ScenarioConfig, out: Path) -> str:
    l = cfg.effective_eigen_l()
    u0, v0 = cfg.initial_profiles()
    problem = fixed_domain.FixedProblem.from_profiles(
        cfg.model_params(),
        cfg.growth(),
        cfg.pulse(),
        cfg.kernel(),
        -l,
        l,
        u0,
        v0,
        dx=cfg.dx,
        dt=(cfg.dt or None),
    )
    result = fixed_domain.periodic_state(problem, tol=cfg.tol_periodic)
    stamp = _stamp(cfg, f"iterations={result.iterations}")
    if result.state is None:
        _write_csv(
            out / "steady_000.csv",
            f"{stamp} | zero state",
            ["x", "u", "v", "t"],
            ((x, 0.0, 0.0, 0.0) for x in problem.grid.nodes),
        )
        return f"zero periodic state after {result.iterations} iterations"
    st = result.state
    stride = max(1, (len(st.slice_times) - 1) // 5)
    for i in range(0, len(st.slice_times), stride):
        _write_csv(
            out / f"steady_{i:03d}.csv",
            f"{stamp} | t={st.slice_times[i]!r}",
            ["x", "u", "v", "t"],
            (
                (x, u, v, st.slice_times[i])
                for x, u, v in zip(st.grid.nodes, st.U[i], st.V[i])
            ),
        )
    return (
        f"positive periodic state after {result.iterations} iterations "
        f"(sup={st.sup:.5f}, gap={result.gap:.2e})"
    )


def _cmd_classify(cfg: ScenarioConfig, out: Path) -> str:
    cls = free_boundary.classify(
        cfg.model_params(),
        cfg.growth(),
        cfg.pulse(),
        cfg.kernel(),
        n_nodes=cfg.n_nodes,
    )
    text = f"# {_stamp(cfg)}\n" + cls.as_text()
    (out / "classify.txt").write_text(text)
    return cls.verdict


def _cmd_sweep(cfg: ScenarioConfig, out: Path) -> str:
    values = cfg.sweep_list()
    if cfg.sweep_axis == "z":
        rows = spectral.sweep_lambda1(
            cfg.model_params(),
            cfg.growth(),
            cfg.pulse(),
            cfg.kernel(),
            z_values=values,
            l=cfg.effective_eigen_l(),
            n_nodes=cfg.n_nodes,
        )
    elif cfg.sweep_axis == "l":
        rows = spectral.sweep_lambda1(
            cfg.model_params(),
            cfg.growth(),
            cfg.pulse(),
            cfg.kernel(),
            l_values=values,
            dx_target=cfg.dx,
        )
    else:
        raise ConfigError(f"sweep_axis must be 'z' or 'l', got {cfg.sweep_axis!r}")
    _write_csv(
        out / "eigen.csv",
        _stamp(cfg, f"axis={cfg.sweep_axis}"),
        ["axis", "lambda1", "rho", "residual", "n_nodes"],
        [(a, r.lambda1, r.rho, r.residual, r.n_nodes) for a, r in rows],
    )
    lam = [r.lambda1 for _, r in rows]
    return (
        f"swept {cfg.sweep_axis} over {len(values)} values: "
        f"lambda1 from {lam[0]:.6f} to {lam[-1]:.6f} (strictly decreasing)"
    )


def _cmd_mustar(cfg: ScenarioConfig, out: Path) -> str:
    params = cfg.model_params()
    u0, v0 = cfg.initial_profiles()
    mu_star = free_boundary.find_mu_star(
        params,
        cfg.growth(),
        cfg.pulse(),
        cfg.kernel(),
        rho_ratio=cfg.rho_ratio,
        bracket=(cfg.bracket_lo, cfg.bracket_hi),
        horizon=cfg.horizon,
        thresholds=cfg.thresholds(),
        u0_profile=u0,
        v0_profile=v0,
        dx=cfg.dx,
        dt=(cfg.dt or None),
    )
    cls = free_boundary.classify(
        params, cfg.growth(), cfg.pulse(), cfg.kernel(), n_nodes=cfg.n_nodes
    )
    cls = free_boundary.Classification(
        verdict=cls.verdict,
        mu1_limit=cls.mu1_limit,
        lambda_h0=cls.lambda_h0,
        mu_star=mu_star,
        caveats=cls.caveats,
        stamp=cls.stamp,
    )
    (out / "classify.txt").write_text(f"# {_stamp(cfg)}\n" + cls.as_text())
    return f"mu_star = {mu_star:.6g} (rho_ratio={cfg.rho_ratio:g})"


_HANDLERS = {
    "simulate": _cmd_simulate,
    "eigen": _cmd_eigen,
    "steady": _cmd_steady,
    "classify": _cmd_classify,
    "sweep": _cmd_sweep,
    "mustar": _cmd_mustar,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pulsefront",
        description="Pulsed nonlocal-dispersal front model: simulate, analyze, classify.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="path to a key = value config")
    parser.add_argument(
        "--out", default=None, help="output directory (default: $PULSEFRONT_OUT or .)"
    )
    args = parser.parse_args(argv)

    out = Path(args.out or os.environ.get("PULSEFRONT_OUT") or ".")
    try:
        cfg = parse_config(Path(args.config).read_text())
        out.mkdir(parents=True, exist_ok=True)
        summary = _HANDLERS[args.subcommand](cfg, out)
    except Exception as exc:  # surfaced verbatim with context, nonzero exit
        print(f"pulsefront {args.subcommand}: error: {exc}", file=sys.stderr)
        return 2
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Experiment command line: figure-style sweeps to CSV, plus a verify suite.

Verbs:
  run <recipe>   execute a registered sweep (or a custom one) and write CSV
  verify         run the analytic-vs-numeric cross-check suite

CSV schema (stable): axis,strategy,metric,value,std_err,n_trials,seed.
The strategy column carries variant tags such as "exact/N=2"; analytic
curves appear as strategies ("analytic-exact", "analytic-high-snr",
"lower-bound") with n_trials = 0. Re-running a recipe with the same seed
writes byte-identical data rows regardless of worker count.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import analysis, beamform, montecarlo, timesplit
from .channel import SystemParams, decompose, sample_channel

__all__ = ["main", "RECIPES", "default_params", "run_recipe", "run_verify"]

CSV_HEADER = "axis,strategy,metric,value,std_err,n_trials,seed"


def default_params(config: str | None = None, **overrides) -> SystemParams:
    """Parameters from a key=value file, or the packaged default scenario."""
    if config is not None:
        return SystemParams.from_config(config, **overrides)
    with resources.as_file(resources.files("wprelay") / "default.cfg") as path:
        return SystemParams.from_config(path, **overrides)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _write_csv(path: Path, rows: list[dict]) -> None:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            _fmt(r["axis"]), str(r["strategy"]), str(r["metric"]),
            repr(float(r["value"])), repr(float(r["std_err"])),
            str(r["n_trials"]), str(r["seed"]),
        ]))
    path.write_text("\n".join(lines) + "\n")


def _mc_rows(params: SystemParams, axis_name: str, values, strategy: str,
             tag: str, trials: int, seed: int, metric: str,
             tau: float | None, workers: int) -> list[dict]:
    rows = []
    for v in values:
        p = replace(params, **{axis_name: v})
        est = montecarlo.estimate(p, strategy, trials, seed, metric=metric,
                                  tau=tau, workers=workers)
        rows.append({"axis": v, "strategy": tag, "metric": metric,
                     "value": est.value, "std_err": est.std_err,
                     "n_trials": est.n_trials, "seed": seed})
    return rows


def _analytic_rows(params: SystemParams, axis_name: str, values, tag: str,
                   metric: str, fn, seed: int) -> list[dict]:
    rows = []
    for v in values:
        p = replace(params, **{axis_name: v})
        rows.append({"axis": v, "strategy": tag, "metric": metric,
                     "value": fn(p), "std_err": 0.0, "n_trials": 0,
                     "seed": seed})
    return rows


# ---------------------------------------------------------------------------
# Recipes. Each returns (rows, summary_lines, all_checks_passed).

def _check_trend(name: str, ok: bool, lines: list[str]) -> bool:
    lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return ok


def _recipe_fig4(params, trials, seed, workers):
    """Throughput of all four beam designs vs transmit power, N in {2, 10}."""
    params = replace(params, d1=20.0, d2=20.0, d3=2.0)
    ps = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]
    rows = []
    means = {}
    for n in (2, 10):
        for strat in ("exact", "suboptimal", "large-n", "mrt-user"):
            p = replace(params, n_antennas=n)
            got = _mc_rows(p, "ps_dbm", ps, strat, f"{strat}/N={n}",
                           trials, seed, "throughput", None, workers)
            rows.extend(got)
            means[(n, strat)] = [r["value"] for r in got]
    lines = []
    ok = True
    for n in (2, 10):
        dominated = all(e >= s - 1e-12 for e, s in
                        zip(means[(n, "exact")], means[(n, "suboptimal")]))
        near = all(s >= 0.97 * e for e, s in
                   zip(means[(n, "exact")], means[(n, "suboptimal")]))
        ok &= _check_trend(f"N={n}: exact dominates suboptimal", dominated, lines)
        ok &= _check_trend(f"N={n}: suboptimal within 3% of exact", near, lines)
    return rows, lines, ok


def _recipe_fig5(params, trials, seed, workers, variant_axis, variants):
    """Suboptimal throughput vs relay->AP distance with d2 + d3 = 12 m."""
    params = replace(params, n_antennas=20)
    d2s = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
    rows = []
    lines = []
    ok = True
    for v in variants:
        p = replace(params, **{variant_axis: v})
        vals = []
        for d2 in d2s:
            q = replace(p, d2=d2, d3=12.0 - d2)
            est = montecarlo.estimate(q, "suboptimal", trials, seed,
                                      metric="throughput", workers=workers)
            rows.append({"axis": d2, "strategy": f"suboptimal/{variant_axis}={v}",
                         "metric": "throughput", "value": est.value,
                         "std_err": est.std_err, "n_trials": est.n_trials,
                         "seed": seed})
            vals.append(est.value)
        interior = max(vals) >= max(vals[0], vals[-1])
        ok &= _check_trend(f"{variant_axis}={v}: relay placement has an optimum",
                           interior, lines)
    return rows, lines, ok


def _recipe_fig6(params, trials, seed, workers):
    """Circuit-power impact on the suboptimal throughput."""
    ps = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
    rows = []
    lines = []
    curves = {}
    for pc in (None, -30.0, -20.0):
        p = replace(params, pc_dbm=pc)
        tag = "suboptimal/pc=none" if pc is None else f"suboptimal/pc={pc:g}dBm"
        got = _mc_rows(p, "ps_dbm", ps, "suboptimal", tag, trials, seed,
                       "throughput", None, workers)
        rows.extend(got)
        curves[pc] = [r["value"] for r in got]
    ok = True
    for pc in (-30.0, -20.0):
        below = all(c <= f + 1e-12 for c, f in zip(curves[pc], curves[None]))
        ok &= _check_trend(f"pc={pc:g} dBm never beats free circuitry", below, lines)
    gap_low = curves[None][0] - curves[-20.0][0]
    gap_high = curves[None][-1] - curves[-20.0][-1]
    ok &= _check_trend("circuit-power gap shrinks at high power",
                       gap_high <= gap_low, lines)
    return rows, lines, ok


def _recipe_fig7(params, trials, seed, workers, variant_axis, variants):
    """Mean optimized harvest fraction vs transmit power."""
    ps = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0]
    rows = []
    lines = []
    ok = True
    for v in variants:
        p = replace(params, **{variant_axis: v})
        got = _mc_rows(p, "ps_dbm", ps, "suboptimal",
                       f"suboptimal/{variant_axis}={v}", trials, seed,
                       "tau", None, workers)
        rows.extend(got)
        vals = [r["value"] for r in got]
        ok &= _check_trend(f"{variant_axis}={v}: harvest fraction falls with power",
                           all(a >= b for a, b in zip(vals, vals[1:])), lines)
    return rows, lines, ok


def _recipe_fig8(params, trials, seed, workers, metric):
    """Relay vs direct transmission in the far geometry (alpha = 3)."""
    params = replace(params, d1=30.0, d2=16.0, d3=16.0, alpha=3.0)
    tau = 0.5
    ps = [-45.0, -35.0, -25.0, -10.0, 5.0, 20.0, 35.0] if metric == "throughput" \
        else [14.0, 17.0, 20.0, 23.0, 26.0, 29.0, 32.0]
    rows = []
    for strat in ("mrt-user", "no-relay"):
        rows.extend(_mc_rows(params, "ps_dbm", ps, strat, strat, trials, seed,
                             metric, tau, workers))
    relay = [r["value"] for r in rows if r["strategy"] == "mrt-user"]
    direct = [r["value"] for r in rows if r["strategy"] == "no-relay"]
    lines = []
    if metric == "outage":
        ok = _check_trend("relay outage never exceeds direct transmission",
                          all(a <= b + 1e-12 for a, b in zip(relay, direct)), lines)
    else:
        ok = _check_trend("relay wins at low power", relay[0] >= direct[0], lines)
        ok &= _check_trend("direct transmission wins at high power",
                           direct[-1] >= relay[-1], lines)
    return rows, lines, ok


def _recipe_fig9a(params, trials, seed, workers):
    """Outage vs transmit power with exact and high-power analytic curves."""
    tau = 0.5
    ps = [-40.0, -35.0, -30.0, -25.0, -20.0]
    rows = []
    lines = []
    ok = True
    for n in (2, 3):
        p = replace(params, n_antennas=n)
        mc = _mc_rows(p, "ps_dbm", ps, "mrt-user", f"mrt-user/N={n}",
                      trials, seed, "outage", tau, workers)
        ana = _analytic_rows(p, "ps_dbm", ps, f"analytic-exact/N={n}", "outage",
                             lambda q: analysis.outage_exact(q, tau), seed)
        hs = _analytic_rows(p, "ps_dbm", ps, f"analytic-high-snr/N={n}", "outage",
                            lambda q: analysis.outage_high_snr(q, tau), seed)
        rows.extend(mc + ana + hs)
        close = True
        for r_mc, r_an in zip(mc, ana):
            if r_mc["std_err"] > 0:
                close &= abs(r_mc["value"] - r_an["value"]) <= 3.5 * r_mc["std_err"]
        ok &= _check_trend(f"N={n}: analytic outage tracks simulation", close, lines)
        ok &= _check_trend(f"N={n}: outage falls with power",
                           all(a >= b for a, b in
                               zip([r["value"] for r in ana][:-1],
                                   [r["value"] for r in ana][1:])), lines)
    return rows, lines, ok


def _recipe_fig9b(params, trials, seed, workers, m4_mode="moment"):
    """Mean throughput vs transmit power with the analytic lower bound."""
    tau = 0.5
    ps = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]
    rows = []
    lines = []
    ok = True
    for n in (5, 10):
        p = replace(params, n_antennas=n)
        mc = _mc_rows(p, "ps_dbm", ps, "mrt-user", f"mrt-user/N={n}",
                      trials, seed, "throughput", tau, workers)
        lb = _analytic_rows(
            p, "ps_dbm", ps, f"lower-bound/N={n}", "throughput",
            lambda q: analysis.throughput_lower_bound(q, tau, m4_mode=m4_mode),
            seed)
        rows.extend(mc + lb)
        below = all(b["value"] <= m["value"] + 3 * m["std_err"]
                    for b, m in zip(lb, mc))
        ok &= _check_trend(f"N={n}: lower bound stays below simulation", below, lines)
    return rows, lines, ok


def _recipe_custom(params, trials, seed, workers, axis, values, strategies,
                   metric, tau):
    if not values:
        raise ValueError("custom recipe needs a non-empty --values list")
    if not strategies:
        raise ValueError("custom recipe needs a non-empty --strategies list")
    rows = montecarlo.sweep(params, axis, values, strategies, trials, seed,
                            metric=metric, tau=tau, workers=workers)
    return rows, [f"[PASS] custom sweep over {axis} completed"], True


RECIPES = {
    "fig4": dict(fn=_recipe_fig4, trials=200),
    "fig5a": dict(fn=lambda p, t, s, w: _recipe_fig5(p, t, s, w, "d1", [6.0, 8.0, 10.0]),
                  trials=2000),
    "fig5b": dict(fn=lambda p, t, s, w: _recipe_fig5(
        replace_default(p, d1=10.0), t, s, w, "ps_dbm", [10.0, 20.0, 30.0]),
        trials=2000),
    "fig6": dict(fn=_recipe_fig6, trials=2000),
    "fig7a": dict(fn=lambda p, t, s, w: _recipe_fig7(p, t, s, w, "n_antennas",
                                                     [2, 10, 50]), trials=2000),
    "fig7b": dict(fn=lambda p, t, s, w: _recipe_fig7(p, t, s, w, "d1",
                                                     [10.0, 15.0, 20.0]), trials=2000),
    "fig8a": dict(fn=lambda p, t, s, w: _recipe_fig8(p, t, s, w, "outage"),
                  trials=200000),
    "fig8b": dict(fn=lambda p, t, s, w: _recipe_fig8(p, t, s, w, "throughput"),
                  trials=20000),
    "fig9a": dict(fn=_recipe_fig9a, trials=400000),
    "fig9b": dict(fn=_recipe_fig9b, trials=50000),
}


def replace_default(params: SystemParams, **kw) -> SystemParams:
    return replace(params, **kw)


def run_recipe(name: str, params: SystemParams, trials: int | None, seed: int,
               out: Path, workers: int, custom: dict | None = None
               ) -> tuple[list[str], bool]:
    if name == "custom":
        custom = custom or {}
        rows, lines, ok = _recipe_custom(params, trials or 1000, seed, workers,
                                         **custom)
    elif name in RECIPES:
        spec = RECIPES[name]
        rows, lines, ok = spec["fn"](params, trials or spec["trials"], seed,
                                     workers)
    else:
        raise ValueError(f"unknown recipe {name!r}")
    _write_csv(out, rows)
    return lines, ok


# ---------------------------------------------------------------------------
# verify

def _verify_solver_vs_grid(params, count: int) -> tuple[str, bool, str]:
    rng = np.random.default_rng(1)
    xs = np.linspace(0.0, 1.0, 20001)
    worst = 0.0
    for _ in range(count):
        ch = sample_channel(params, rng)
        dec = decompose(params, ch, 0.5)
        _, val, _, _ = beamform.solve_suboptimal_xbar(dec)
        grid = float(np.max(beamform.bound_min(dec, xs)))
        worst = max(worst, (grid - val) / grid)
    return ("closed-form beam vs grid search", worst <= 1e-5,
            f"worst relative shortfall {worst:.3g}")


def _verify_lambert(count: int) -> tuple[str, bool, str]:
    worst = 0.0
    for kappa in np.logspace(-3, 8, count):
        t_cf = timesplit.optimal_tau(float(kappa)).tau
        t_gs = timesplit.search_tau(
            lambda t: timesplit.rate_upper(float(kappa), t), tol=1e-12,
            kappa=float(kappa)).tau
        worst = max(worst, abs(t_cf - t_gs))
    return ("closed-form harvest time vs golden search", worst <= 1e-6,
            f"worst |delta tau| {worst:.3g}")


def _verify_outage(params, trials: int, seed: int) -> tuple[str, bool, str]:
    tau = 0.5
    # drop to 2 antennas and low power so the outage level is measurable
    p = replace(params, n_antennas=2, ps_dbm=-25.0)
    ana = analysis.outage_exact(p, tau)
    est = montecarlo.estimate(p, "mrt-user", trials, seed, metric="outage",
                              tau=tau)
    dev = abs(ana - est.value)
    tol = 3.0 * max(est.std_err, 1e-12)
    return ("analytic outage vs simulation", dev <= tol,
            f"analytic {ana:.4g}, simulated {est.value:.4g} +/- {est.std_err:.2g}")


def _verify_throughput_bound(params, trials: int, seed: int,
                             corrupt_m4: bool) -> tuple[str, bool, str]:
    tau = 0.5
    arb = analysis.arbitrate_mean_relay_gain(params, tau, n_trials=trials,
                                             master_seed=seed)
    mode = "printed" if corrupt_m4 else (
        "moment" if arb["z_moment"] <= arb["z_printed"] else "printed")
    z = arb[f"z_{mode}"]
    est = montecarlo.estimate(params, "mrt-user", trials, seed,
                              metric="throughput", tau=tau)
    low = analysis.throughput_lower_bound(params, tau, m4_mode=mode)
    ok = z <= 3.0 and low <= est.value + 3 * est.std_err
    return ("throughput lower bound and relay-gain constant", ok,
            f"m4 mode {mode} (z={z:.2f}), bound {low:.4g} vs mean {est.value:.4g}")


def run_verify(params: SystemParams, level: str, corrupt_m4: bool) -> tuple[list[str], bool]:
    if level not in ("quick", "full"):
        raise ValueError(f"unknown level {level!r}")
    big = level == "full"
    checks = [
        _verify_solver_vs_grid(params, 500 if big else 100),
        _verify_lambert(100),
    ]
    if params.n_antennas >= 2:
        checks.append(_verify_outage(params, 10 ** 6 if big else 2 * 10 ** 5, 99))
        checks.append(_verify_throughput_bound(
            params, 10 ** 6 if big else 2 * 10 ** 5, 99, corrupt_m4))
    else:
        checks.append(("analytic layer", True, "skipped: needs at least 2 antennas"))
    lines = []
    ok = True
    for name, passed, detail in checks:
        lines.append(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        ok &= passed
    return lines, ok


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wprelay",
                                 description="wireless-powered relay experiments")
    sub = ap.add_subparsers(dest="verb", required=True)

    rp = sub.add_parser("run", help="execute a sweep recipe and write CSV")
    rp.add_argument("recipe", help=f"one of {sorted(RECIPES)} or 'custom'")
    rp.add_argument("--trials", type=int, default=None)
    rp.add_argument("--seed", type=int, default=20260823)
    rp.add_argument("--out", type=Path, default=None)
    rp.add_argument("--config", default=None, help="flat key=value parameter file")
    rp.add_argument("--workers", type=int, default=1)
    rp.add_argument("--axis", default="ps_dbm", help="custom recipe sweep field")
    rp.add_argument("--values", default="", help="custom recipe axis values (csv)")
    rp.add_argument("--strategies", default="", help="custom recipe strategies (csv)")
    rp.add_argument("--metric", default="throughput", choices=montecarlo.METRICS)
    rp.add_argument("--tau", type=float, default=None)

    vp = sub.add_parser("verify", help="run the cross-check suite")
    vp.add_argument("--level", default="quick", choices=("quick", "full"))
    vp.add_argument("--config", default=None)
    vp.add_argument("--corrupt-m4", action="store_true",
                    help="debug: force the mismatched relay-gain constant")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    params = default_params(args.config)
    if args.verb == "verify":
        lines, ok = run_verify(params, args.level, args.corrupt_m4)
        print("\n".join(lines))
        return 0 if ok else 1

    custom = None
    if args.recipe == "custom":
        values = [float(v) for v in args.values.split(",") if v.strip()]
        if args.axis == "n_antennas":
            values = [int(v) for v in values]
        strategies = [s for s in args.strategies.split(",") if s.strip()]
        custom = dict(axis=args.axis, values=values, strategies=strategies,
                      metric=args.metric, tau=args.tau)
    out = args.out or Path(f"{args.recipe}.csv")
    t0 = time.time()
    lines, ok = run_recipe(args.recipe, params, args.trials, args.seed, out,
                           args.workers, custom=custom)
    print(f"wrote {out} in {time.time() - t0:.1f} s")
    print("\n".join(lines))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line scenario runner.

    hybridlink sweep fig2.scn --points 31 --out fig2.csv
    hybridlink validate fig2.scn --samples 1000000
    hybridlink diversity fig2.scn --state 1

Scenario arguments may be a path or the name of a bundled scenario
(``fig2.scn``, ``fig3.scn``).  Exit codes: 0 success, 1 validation
failure, 2 usage or parse error, 3 numerical failure.

The sweep CSV plots directly in gnuplot, e.g.::

    plot '< grep ",2," fig2.csv' using 1:4 with lines logscale y
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import mc, outage
from .errors import DomainError, NumericalError
from .scenario import McConfig, PowerSweep, ScenarioParseError, bundled_scenario_path, load_scenario

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

# state token -> (analytic, asymptotic); None means no asymptote column
_STATE_TOKENS = {
    "0": (lambda s: outage.outage_state(s, 0), lambda s: outage.asymptotic_state(s, 0)),
    "1": (lambda s: outage.outage_state(s, 1), lambda s: outage.asymptotic_state(s, 1)),
    "2": (lambda s: outage.outage_state(s, 2), lambda s: outage.asymptotic_state(s, 2)),
    "avg": (outage.average_outage, None),
    "dual0": (lambda s: outage.dual_mode_outage(s, 0), None),
    "dual1": (lambda s: outage.dual_mode_outage(s, 1), None),
    "dual2": (lambda s: outage.dual_mode_outage(s, 2), None),
    "dualavg": (outage.dual_mode_average, None),
    "fso0": (lambda s: outage.fso_outage(s, 0, outage.state_powers(s, 0)[0]), None),
    "rf0": (lambda s: outage.rf_outage(s, 0, outage.state_powers(s, 0)[1]), None),
}


def _fmt(x) -> str:
    return "%.10e" % x


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_scenario_path(path)
    return bundled if bundled.exists() else p


def _load(path):
    return load_scenario(_resolve(path))


def _parse_states(text: str) -> list[str]:
    out = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in out if t not in _STATE_TOKENS]
    if bad or not out:
        raise argparse.ArgumentTypeError(
            f"unknown state token(s) {bad}; choose from {', '.join(_STATE_TOKENS)}")
    return out


def _sweep_row(sc, token, with_mc, cfg):
    analytic_fn, asym_fn = _STATE_TOKENS[token]
    try:
        a = analytic_fn(sc)
        asym = asym_fn(sc) if asym_fn else float("nan")
        row = [_fmt(a), _fmt(asym)]
        if with_mc:
            if token not in ("0", "1", "2"):
                row += ["nan", "nan"]
            else:
                est = mc.simulate_state(sc, int(token), cfg)
                row += [_fmt(est.p_hat), _fmt(est.stderr)]
        return row, False
    except NumericalError as exc:
        width = 4 if with_mc else 2
        print(f"numerical failure at P_t={sc.total_power_dbm:g} dBm, state {token}: {exc}", file=sys.stderr)
        return ["error"] * width, True


def cmd_sweep(args) -> int:
    sf = _load(args.scenario)
    base = sf.scenario
    lo = base.sweep.start_dbm if args.power_from is None else args.power_from
    hi = base.sweep.stop_dbm if args.power_to is None else args.power_to
    grid = PowerSweep(lo, hi, base.sweep.points).grid(args.points)
    use_pointing = args.pointing == "on" and sf.has_pointing
    variants = list(sf.variants()) if use_pointing else [({}, base.replace(pointing=None))]
    cfg = base.mc
    if args.samples is not None or args.seed is not None:
        cfg = McConfig(samples=args.samples or cfg.samples, seed=cfg.seed if args.seed is None else args.seed,
                       batch=min(cfg.batch, args.samples or cfg.batch))

    header = (["boresight_m", "aperture_diameter_m"] if use_pointing else []) + \
        ["P_t_dbm", "state", "analytic_op", "asymptotic_op"] + (["mc_op", "mc_stderr"] if args.mc else [])
    jobs = [(labels, sc.with_power(p), tok) for labels, sc in variants for p in grid for tok in args.states]

    def run(job):
        return _sweep_row(job[1], job[2], args.mc, cfg)

    if args.jobs > 1:
        with ThreadPoolExecutor(args.jobs) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    failed = False
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for (labels, sc, tok), (vals, err) in zip(jobs, results):
            failed |= err
            lead = [repr(labels["boresight_m"]), repr(labels["aperture_diameter_m"])] if use_pointing else []
            w.writerow(lead + ["%.6g" % sc.total_power_dbm, tok] + vals)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_validate(args) -> int:
    sf = _load(args.scenario)
    base = sf.scenario
    samples = base.mc.samples if args.samples is None else args.samples
    seed = base.mc.seed if args.seed is None else args.seed
    cfg = McConfig(samples=samples, seed=seed, batch=min(base.mc.batch, samples))
    grid = base.sweep.grid(args.points)
    variants = list(sf.variants()) if args.pointing == "on" else [({}, base.replace(pointing=None))]
    rows = []
    for labels, sc in variants:
        for r in mc.validate(sc, grid, cfg, workers=args.jobs):
            rows.append({**labels, **r})
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        mc.write_report(rows, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    bad = mc.flagged(rows)
    skipped = sum(r["flag"] == "insufficient_resolution" for r in rows)
    print(f"{len(rows)} rows, {len(bad)} flagged, {skipped} insufficient resolution", file=sys.stderr)
    return EXIT_VALIDATION if bad else EXIT_OK


def cmd_diversity(args) -> int:
    sf = _load(args.scenario)
    sc = sf.scenario if args.pointing == "on" else sf.scenario.replace(pointing=None)
    fitted = outage.fitted_diversity(sc, args.state, decades=args.decades, top_dbm=args.top_dbm)
    expected = outage.diversity_order(sc)[args.state]
    dev = abs(fitted - expected) / expected
    print(f"state {args.state}: fitted slope {fitted:.4f}, diversity order {expected:.4f}, "
          f"deviation {100 * dev:.2f}%")
    if args.state == 0:
        print(f"  product-form slope (FSO + RF orders): {outage.sc_product_diversity(sc):.4f}")
    return EXIT_OK if dev <= args.tolerance else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hybridlink", description="Hybrid RF/FSO satellite downlink outage analysis.")
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="outage curves over transmit power")
    sw.add_argument("scenario")
    sw.add_argument("--power-from", type=float, help="first power point, dBm")
    sw.add_argument("--power-to", type=float, help="last power point, dBm")
    sw.add_argument("--points", type=int)
    sw.add_argument("--states", type=_parse_states, default=_parse_states("0,1,2,avg"),
                    help="comma list of " + ",".join(_STATE_TOKENS))
    sw.add_argument("--pointing", choices=("on", "off"), default="on")
    sw.add_argument("--mc", action="store_true", help="add Monte Carlo columns")
    sw.add_argument("--samples", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--out")
    sw.set_defaults(func=cmd_sweep)

    va = sub.add_parser("validate", help="analytic vs Monte Carlo report")
    va.add_argument("scenario")
    va.add_argument("--samples", type=int)
    va.add_argument("--seed", type=int)
    va.add_argument("--points", type=int, default=10)
    va.add_argument("--pointing", choices=("on", "off"), default="on")
    va.add_argument("--jobs", type=int, default=1)
    va.add_argument("--out")
    va.set_defaults(func=cmd_validate)

    dv = sub.add_parser("diversity", help="fit the high-SNR outage slope")
    dv.add_argument("scenario")
    dv.add_argument("--state", type=int, choices=(0, 1, 2), required=True)
    dv.add_argument("--decades", type=float, default=1.0)
    dv.add_argument("--top-dbm", type=float)
    dv.add_argument("--pointing", choices=("on", "off"), default="off")
    dv.add_argument("--tolerance", type=float, default=0.05, help="allowed relative deviation")
    dv.set_defaults(func=cmd_diversity)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for name in ("points", "samples", "jobs"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            print(f"hybridlink: --{name} must be >= 1", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        print(f"hybridlink: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, DomainError, ValueError) as exc:
        print(f"hybridlink: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"hybridlink: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

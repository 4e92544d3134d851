"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
"acceptance criteria" section at the end of the pytest run.  Run alone
with ``pytest tests/test_acceptance.py -v``.
"""

import math

import numpy as np
import pytest

from hybridlink import mc, outage
from hybridlink.fso import (EwParams, PointingParams, beam_geometry, combined_cdf_quadrature,
                            combined_irradiance_cdf, ew_draw, pointing_sample)
from hybridlink.linkgeo import dbm_to_watt
from hybridlink.rf import sr_derived
from hybridlink.scenario import McConfig

GRID10 = np.linspace(0.0, 30.0, 10)


def _all_scenarios(fig2, fig3_variants):
    return [("fig2", fig2)] + [(f"fig3 s={lab['boresight_m']} D={lab['aperture_diameter_m']}", sc)
                               for lab, sc in fig3_variants]


def test_criterion_1_mc_equivalence(fig2, fig3_variants, criterion):
    cfg = McConfig(samples=10_000_000, seed=20211, batch=1_000_000)
    judged = skipped = 0
    bad = []
    for name, sc in _all_scenarios(fig2, fig3_variants):
        for r in mc.validate(sc, GRID10, cfg):
            if r["flag"] == "insufficient_resolution":
                skipped += 1
                continue
            judged += 1
            if r["flag"] != "ok":
                z = (r["mc_p_hat"] - r["analytic"]) / r["mc_stderr"]
                bad.append(f"{name} state {r['state']} P={r['P_t_dbm']:.2f} z={z:+.2f}")
    detail = (f"{judged} rows judged at 3 sigma, {len(bad)} outside, "
              f"{skipped} below {mc.MIN_EXPECTED_EVENTS} expected events")
    criterion(1, "analytic OP inside MC 3-sigma, 1e7 samples", not bad, detail + ("; " + "; ".join(bad) if bad else ""))


def test_criterion_2_state2_closed_form(fig2, criterion):
    # hand arithmetic: nu - delta = 1/(2b) - Omega/(2b(2b + Omega)) = 1/(0.126 + 0.000894)
    hand = 1.0 / (2 * 0.063 + 8.94e-4)
    d = sr_derived(fig2.sr)
    s = fig2.with_power(16.0)
    snr = outage.rf_mean_snr(s, 2, dbm_to_watt(16.0))
    worst = 0.0
    for th_db in np.linspace(-10.0, 30.0, 100):
        t = s.replace(snr_threshold_db=float(th_db))
        ref = -math.expm1(-hand * 10 ** (th_db / 10) / snr)
        worst = max(worst, abs(outage.outage_state2(t) - ref))
    ok = worst <= 1e-10 and abs((d.nu - d.delta) - 7.8806) < 5e-5 and abs(d.nu - d.delta - hand) < 1e-12
    criterion(2, "state-2 exponential closed form", ok,
              f"nu-delta={d.nu - d.delta:.6f} (hand {hand:.6f}), max |diff| over 100 thresholds {worst:.2e}")


def test_criterion_3_diversity_slopes(fig2, criterion):
    expected = outage.diversity_order(fig2)
    fitted = {k: outage.fitted_diversity(fig2, k) for k in (0, 1, 2)}
    dev = {k: abs(fitted[k] - expected[k]) / expected[k] for k in fitted}
    detail = ", ".join(f"state {k} fitted {fitted[k]:.4f} vs {expected[k]:.4f} ({100 * dev[k]:.1f}%)"
                       for k in (2, 1, 0))
    detail += f"; SC product order alpha*beta/2+1 = {outage.sc_product_diversity(fig2):.4f}"
    criterion(3, "high-SNR slopes within 5%", all(v <= 0.05 for v in dev.values()), detail)


def test_criterion_4_crossover(fig2, criterion):
    p = np.linspace(0.0, 30.0, 301)
    diff = np.array([math.log10(outage.outage_state1(fig2.with_power(x))) -
                     math.log10(outage.outage_state2(fig2.with_power(x))) for x in p])
    k = np.nonzero(np.diff(np.sign(diff)))[0]
    crosses = [p[i] - diff[i] * (p[i + 1] - p[i]) / (diff[i + 1] - diff[i]) for i in k]
    ok = len(crosses) == 1 and abs(crosses[0] - 16.0) <= 2.0
    criterion(4, "fog/rain crossover at 16 +/- 2 dBm", ok, f"crossings at {[round(float(c), 3) for c in crosses]} dBm")


def test_criterion_5_truncation(fig2, fig3_variants, criterion):
    eq5 = 0.0
    for p in np.linspace(0.0, 30.0, 31):
        s = fig2.with_power(p)
        for state, power in ((0, dbm_to_watt(p) / 2), (1, dbm_to_watt(p))):
            ten = outage.fso_outage_series(s, state, power, terms=10)
            for n in (11, 20, 50):
                eq5 = max(eq5, abs(outage.fso_outage_series(s, state, power, terms=n) - ten))
    eq6 = 0.0
    for _, sc in fig3_variants:
        for p in GRID10:
            s = sc.with_power(p)
            for state, frac in ((0, 0.5), (1, 1.0)):
                ew = s.ew[state]
                geom = beam_geometry(s.pointing, ew.beta)
                power = frac * dbm_to_watt(p)
                i_th = math.sqrt(outage.threshold(s) / outage.fso_mean_snr(s, power))
                Ia = outage.fso_gain(s, state)
                small = combined_irradiance_cdf(i_th, ew, geom, s.pointing, Ia, terms=(5, 5))
                full = combined_irradiance_cdf(i_th, ew, geom, s.pointing, Ia)
                eq6 = max(eq6, abs(small - full))
    ok = eq5 < 1e-6 and eq6 < 2e-7
    criterion(5, "series truncation", ok,
              f"binomial series: max change beyond 10 terms {eq5:.2e} (< 1e-6); "
              f"pointing double series: 5x5 vs converged {eq6:.2e} (< 2e-7)")


def test_criterion_6_pointing_monotonicity(fig3_file, criterion):
    variants = {(lab["boresight_m"], lab["aperture_diameter_m"]): sc for lab, sc in fig3_file.variants()}
    S = sorted(fig3_file.boresights_m)
    D = sorted(fig3_file.apertures_m)
    violations = []
    checks = 0
    for p in np.linspace(0.0, 30.0, 31):
        op = {key: [outage.outage_state(sc.with_power(p), k) for k in (0, 1)] + [outage.average_outage(sc.with_power(p))]
              for key, sc in variants.items()}
        for d in D:
            for s0, s1 in zip(S, S[1:]):
                for a, b, k in zip(op[(s0, d)], op[(s1, d)], ("0", "1", "avg")):
                    checks += 1
                    if b < a:
                        violations.append(f"P={p:g} D={d} state {k}: s {s0}->{s1} lowered OP")
        for s in S:
            for d0, d1 in zip(D, D[1:]):
                for a, b, k in zip(op[(s, d0)], op[(s, d1)], ("0", "1", "avg")):
                    checks += 1
                    if b > a:
                        violations.append(f"P={p:g} s={s} state {k}: D {d0}->{d1} raised OP")
    criterion(6, "OP non-decreasing in s, non-increasing in D", not violations,
              f"{checks} pairwise checks, {len(violations)} violations" + ("; " + "; ".join(violations[:5]) if violations else ""))


def test_criterion_7_dual_mode(fig2, fig3_variants, criterion):
    bad = []
    n = 0
    for name, sc in _all_scenarios(fig2, fig3_variants):
        for p in np.linspace(0.0, 30.0, 31):
            s = sc.with_power(p)
            for k in (1, 2):
                n += 1
                if outage.outage_state(s, k) > outage.dual_mode_outage(s, k):
                    bad.append(f"{name} P={p:g} state {k}")
    criterion(7, "proposed OP <= dual-mode OP (states 1, 2)", not bad,
              f"{n} grid points, {len(bad)} violations" + ("; " + "; ".join(bad[:5]) if bad else ""))


def _probe_cases(fig3_variants):
    cases = []
    for _, sc in fig3_variants[:2]:
        for state in (0, 1):
            cases.append((sc.ew[state], sc.pointing))
    short = PointingParams(0.5, 0.3, 1e-3, 0.1, 1000.0)
    cases.append((EwParams(2.0, 1.5, 0.9), short))
    cases.append((EwParams(3.0, 0.8, 1.1), short))
    return cases


def test_criterion_8_meijer_g_path(fig3_variants, criterion):
    worst = 0.0
    probes = 0
    for ew, pp in _probe_cases(fig3_variants):
        geom = beam_geometry(pp, ew.beta)
        lo, hi = 1e-4, 1.0
        while combined_cdf_quadrature(lo, ew, geom, pp) > 1e-6:
            lo /= 2
        while combined_cdf_quadrature(hi, ew, geom, pp) < 1 - 1e-6:
            hi *= 1.5
        for I in np.geomspace(lo, hi, 12):
            ref = combined_cdf_quadrature(I, ew, geom, pp)
            worst = max(worst, abs(combined_irradiance_cdf(I, ew, geom, pp) - ref) / ref)
            probes += 1
    # empirical CDF of simulated irradiance against the series
    rng = np.random.default_rng(8)
    n = 1_000_000
    zs = []
    for ew, pp in _probe_cases(fig3_variants):
        geom = beam_geometry(pp, ew.beta)
        irr = ew_draw(rng, ew, n) * pointing_sample(rng, geom, pp, n)
        for q in (0.01, 0.1, 0.5, 0.9):
            I = float(np.quantile(irr, q))
            F = combined_irradiance_cdf(I, ew, geom, pp)
            zs.append(abs(np.mean(irr <= I) - F) / math.sqrt(F * (1 - F) / n))
    ok = probes >= 50 and worst <= 1e-6 and max(zs) <= 3.0
    criterion(8, "Meijer-G series vs quadrature and MC", ok,
              f"{probes} probes, max relative error {worst:.2e} (<= 1e-6); "
              f"{len(zs)} empirical-CDF points, max |z| {max(zs):.2f} (<= 3)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))

"""Monte Carlo outage oracle.

Each batch draws from its own PCG64 stream keyed by ``(seed, state, batch
index)`` through :class:`numpy.random.SeedSequence`, so results do not
depend on how batches are scheduled and a batch can be replayed alone.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import outage
from .fso import beam_geometry, ew_draw, pointing_sample
from .rf import sr_sample
from .scenario import McConfig, Scenario

MIN_EXPECTED_EVENTS = 10
REPORT_COLUMNS = ("state", "P_t_dbm", "analytic", "mc_p_hat", "mc_stderr", "flag")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    ci95: tuple[float, float]
    n: int
    low_count: bool = False

    @classmethod
    def from_counts(cls, hits: int, n: int) -> "McEstimate":
        p = hits / n
        se = math.sqrt(p * (1.0 - p) / n)
        lo, hi = max(0.0, p - 1.96 * se), min(1.0, p + 1.96 * se)
        # normal approximation is poor below ~5 events either side
        low = hits < 5 or (n - hits) < 5
        return cls(p_hat=p, stderr=se, ci95=(lo, hi), n=n, low_count=low)


def _batch_rng(cfg: McConfig, state: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(state, batch))))


def _fso_snr(sc: Scenario, state: int, power_w: float, rng, n):
    ew = sc.ew[state]
    Ia = outage.fso_gain(sc, state)
    if ew is None or power_w <= 0.0 or Ia == 0.0:
        return np.zeros(n)
    irr = ew_draw(rng, ew, n) * Ia
    if sc.pointing is not None:
        geom = beam_geometry(sc.pointing, ew.beta)
        irr *= pointing_sample(rng, geom, sc.pointing, n)
    return outage.fso_mean_snr(sc, power_w) * irr * irr


def _rf_snr(sc: Scenario, state: int, power_w: float, rng, n):
    if power_w <= 0.0:
        return np.zeros(n)
    return outage.rf_mean_snr(sc, state, power_w) * sr_sample(rng, sc.sr, n)


def _count_batch(sc: Scenario, state: int, n: int, rng) -> int:
    p1, p2 = outage.state_powers(sc, state)
    gth = outage.threshold(sc)
    if state == 0:
        best = np.maximum(_fso_snr(sc, 0, p1, rng, n), _rf_snr(sc, 0, p2, rng, n))
    elif state == 1:
        best = _fso_snr(sc, 1, p1, rng, n)
    else:
        best = _rf_snr(sc, 2, p2, rng, n)
    return int(np.count_nonzero(best <= gth))


def simulate_state(sc: Scenario, state: int, cfg: McConfig | None = None, workers: int = 1) -> McEstimate:
    """Estimate the outage of one weather state by direct simulation.

    State 0 applies selection combining: outage iff the better branch is
    below threshold.
    """
    cfg = sc.mc if cfg is None else cfg
    sizes = [cfg.batch] * (cfg.samples // cfg.batch)
    if cfg.samples % cfg.batch:
        sizes.append(cfg.samples % cfg.batch)

    def run(item):
        b, size = item
        return _count_batch(sc, state, size, _batch_rng(cfg, state, b))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            hits = sum(pool.map(run, enumerate(sizes)))
    else:
        hits = sum(map(run, enumerate(sizes)))
    return McEstimate.from_counts(hits, cfg.samples)


def judge(analytic: float, est: McEstimate, sigmas: float = 3.0) -> str:
    """'ok', 'outside_3sigma', or 'insufficient_resolution'."""
    if analytic * est.n < MIN_EXPECTED_EVENTS or (1.0 - analytic) * est.n < MIN_EXPECTED_EVENTS:
        return "insufficient_resolution"
    return "ok" if abs(est.p_hat - analytic) <= sigmas * est.stderr else "outside_3sigma"


def validate(sc: Scenario, grid, cfg: McConfig | None = None, states=(0, 1, 2),
             ctl=outage.DEFAULT_CONTROL, workers: int = 1) -> list[dict]:
    """Compare analytic and simulated outage over a power grid.

    Returns one row per (power, state) with the columns of
    :data:`REPORT_COLUMNS`; rows whose expected event count is below
    :data:`MIN_EXPECTED_EVENTS` are marked ``insufficient_resolution``
    instead of being judged.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("power grid is empty")
    cfg = sc.mc if cfg is None else cfg
    rows = []
    for p_dbm in grid:
        s = sc.with_power(p_dbm)
        for k in states:
            analytic = outage.outage_state(s, k, ctl)
            est = simulate_state(s, k, cfg, workers=workers)
            rows.append({
                "state": k, "P_t_dbm": float(p_dbm), "analytic": analytic,
                "mc_p_hat": est.p_hat, "mc_stderr": est.stderr, "flag": judge(analytic, est),
            })
    return rows


def flagged(rows) -> list[dict]:
    return [r for r in rows if r["flag"] == "outside_3sigma"]


def write_report(rows, fh) -> None:
    """CSV report; pointing-variant labels, when present, lead each row."""
    labels = [k for k in ("boresight_m", "aperture_diameter_m") if rows and k in rows[0]]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(labels + list(REPORT_COLUMNS))
    for r in rows:
        w.writerow([repr(r[k]) for k in labels] + [r["state"], f"{r['P_t_dbm']:.6g}", f"{r['analytic']:.10e}",
                    f"{r['mc_p_hat']:.10e}", f"{r['mc_stderr']:.10e}", r["flag"]])

"""Weather-switched hybrid RF/FSO outage analysis.

Switching table (state = weather):

====== =========== ============== ===================
state  weather     links          power split
====== =========== ============== ===================
0      thin cloud  FSO + RF, SC   P1 = P2 = P_t / 2
1      rain        FSO only       P1 = P_t
2      fog         RF only        P2 = P_t
====== =========== ============== ===================

Powers enter in dBm and thresholds in dB; everything below the public
functions is linear.  The FSO mean SNR is ``zeta P1 / N0`` and the RF mean
SNR is ``P2 h_l / N0``; with ``normalize_fading_power`` the latter is
divided by ``E|h|^2 = omega + 2b`` so the fading has unit power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SeriesDivergenceError
from .fso import beam_geometry, combined_cdf_asymptote, combined_irradiance_cdf, ew_cdf
from .linkgeo import db_to_linear, dbm_to_watt, fso_attenuation_gain, rf_path_gain
from .rf import sr_cdf_finite, sr_cdf_phi2, sr_derived
from .scenario import STATES, Scenario
from .specfun import DEFAULT_CONTROL, SeriesControl, binom

# state -> (fraction of P_t on FSO, fraction on RF)
POWER_SPLIT = {0: (0.5, 0.5), 1: (1.0, 0.0), 2: (0.0, 1.0)}


@dataclass(frozen=True)
class OutageResult:
    power_dbm: float
    analytic: dict
    asymptotic: dict
    average: float
    diversity: dict
    mc: dict | None = None


# ---------------------------------------------------------------------------
# link-level quantities
# ---------------------------------------------------------------------------

def threshold(sc: Scenario) -> float:
    return db_to_linear(sc.snr_threshold_db)


def noise_power(sc: Scenario) -> float:
    return dbm_to_watt(sc.noise_power_dbm)


def fso_mean_snr(sc: Scenario, power_w: float) -> float:
    return sc.conversion_zeta * power_w / noise_power(sc)


def rf_mean_snr(sc: Scenario, state: int, power_w: float) -> float:
    h_l = rf_path_gain(sc.rf_link, sc.slant_range_km, sc.weathers[state].rf_rain_rate)
    snr = power_w * h_l / noise_power(sc)
    if sc.normalize_fading_power:
        snr /= sc.sr.mean_power
    return snr


def fso_gain(sc: Scenario, state: int) -> float:
    return fso_attenuation_gain(sc.weathers[state])


def state_powers(sc: Scenario, state: int) -> tuple[float, float]:
    pt = dbm_to_watt(sc.total_power_dbm)
    f1, f2 = POWER_SPLIT[state]
    return f1 * pt, f2 * pt


def fso_outage(sc: Scenario, state: int, power_w: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Pr[zeta P |I|^2 / N0 <= gamma_th] for the weather of ``state``.

    Uses the pointing-error double series when the scenario carries
    pointing parameters, otherwise the closed-form EW CDF.
    """
    if power_w <= 0.0:
        return 1.0
    ew = sc.ew[state]
    Ia = fso_gain(sc, state)
    if ew is None or Ia == 0.0:
        return 1.0
    i_th = math.sqrt(threshold(sc) / fso_mean_snr(sc, power_w))
    if sc.pointing is not None:
        geom = beam_geometry(sc.pointing, ew.beta)
        return combined_irradiance_cdf(i_th, ew, geom, sc.pointing, Ia, ctl)
    return ew_cdf(i_th / Ia, ew)


def fso_outage_series(sc: Scenario, state: int, power_w: float, ctl: SeriesControl = DEFAULT_CONTROL,
                      terms: int | None = None) -> float:
    """Zero-pointing FSO outage as the binomial series in ``rho``.

    ``sum_rho C(alpha, rho) (-1)**rho exp(-rho (gamma_th / (eta**2 zeta P Ia**2 / N0))**(beta/2))``.
    Terminates for integer ``alpha``.  Otherwise the remainder after term
    ``R`` is bounded by ``|C(alpha-1, R)| x**(R+1)`` once ``R > alpha`` and
    summation stops when that bound is below ``ctl.tol``; ``terms`` forces
    a fixed number of terms.
    """
    if power_w <= 0.0:
        return 1.0
    ew = sc.ew[state]
    Ia = fso_gain(sc, state)
    if ew is None or Ia == 0.0:
        return 1.0
    snr = ew.eta ** 2 * fso_mean_snr(sc, power_w) * Ia ** 2
    x = math.exp(-((threshold(sc) / snr) ** (ew.beta / 2.0)))
    a = ew.alpha
    integer_alpha = float(a).is_integer()
    cap = terms if terms is not None else ctl.max_terms
    total = 0.0
    for rho in range(cap):
        c = binom(a, rho)
        if c == 0.0 and integer_alpha and rho > a:
            break
        total += c * (-x) ** rho
        if terms is None and not integer_alpha and rho > a:
            if abs(binom(a - 1.0, rho)) * x ** (rho + 1) < ctl.tol:
                break
    else:
        if terms is None and not (integer_alpha and cap > a):
            raise SeriesDivergenceError(
                "FSO binomial series did not converge",
                {"alpha": a, "x": x, "terms": cap, "partial_sum": total,
                 "tail_bound": abs(binom(a - 1.0, cap - 1)) * x ** cap},
            )
    return min(max(total, 0.0), 1.0)


def rf_outage(sc: Scenario, state: int, power_w: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    if power_w <= 0.0:
        return 1.0
    snr = rf_mean_snr(sc, state, power_w)
    if snr == 0.0:
        return 1.0
    if float(sc.sr.m).is_integer():
        return sr_cdf_finite(threshold(sc), sc.sr, snr)
    return sr_cdf_phi2(threshold(sc), sc.sr, snr, ctl)


# ---------------------------------------------------------------------------
# per-state outage
# ---------------------------------------------------------------------------

def _state0_fso(sc, p1, ctl):
    # the closed form equals the binomial series for every alpha, and unlike
    # the series it does not slow down as the argument approaches 1
    return fso_outage(sc, 0, p1, ctl)


def outage_state0(sc: Scenario, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Thin cloud: both links at half power, selection combining.

    The links fade independently, so the SC outage is the product of the
    two single-link outages.
    """
    p1, p2 = state_powers(sc, 0)
    return _state0_fso(sc, p1, ctl) * rf_outage(sc, 0, p2, ctl)


def outage_state1(sc: Scenario, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Rain: FSO alone at full power."""
    p1, _ = state_powers(sc, 1)
    return fso_outage(sc, 1, p1, ctl)


def outage_state2(sc: Scenario, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Fog: RF alone at full power."""
    _, p2 = state_powers(sc, 2)
    return rf_outage(sc, 2, p2, ctl)


_STATE_FUNCS = {0: outage_state0, 1: outage_state1, 2: outage_state2}


def outage_state(sc: Scenario, state: int, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    return _STATE_FUNCS[state](sc, ctl)


def average_outage(sc: Scenario, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    return sum(p * outage_state(sc, k, ctl) for k, p in zip(STATES, sc.state_probs) if p > 0)


def dual_mode_outage(sc: Scenario, state: int, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Conventional baseline: both links always at P_t/2 with SC.

    The RF branch sees the state's rain; in fog the optical branch is
    counted as always in outage.
    """
    half = dbm_to_watt(sc.total_power_dbm) / 2.0
    fso = 1.0 if state == 2 else (_state0_fso(sc, half, ctl) if state == 0 else fso_outage(sc, state, half, ctl))
    return fso * rf_outage(sc, state, half, ctl)


def dual_mode_average(sc: Scenario, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    return sum(p * dual_mode_outage(sc, k, ctl) for k, p in zip(STATES, sc.state_probs) if p > 0)


# ---------------------------------------------------------------------------
# high-SNR behaviour
# ---------------------------------------------------------------------------

def _fso_asymptote(sc, state, power_w):
    ew = sc.ew[state]
    Ia = fso_gain(sc, state)
    if Ia == 0.0:
        return math.inf
    snr = fso_mean_snr(sc, power_w)
    if sc.pointing is not None:
        geom = beam_geometry(sc.pointing, ew.beta)
        return combined_cdf_asymptote(math.sqrt(threshold(sc) / snr), ew, geom, sc.pointing, Ia)
    d = ew.alpha * ew.beta / 2.0
    return (threshold(sc) / (ew.eta * Ia) ** 2) ** d * snr ** (-d)


def _rf_asymptote(sc, state, power_w):
    return sr_derived(sc.sr).mu * threshold(sc) / rf_mean_snr(sc, state, power_w)


def asymptotic_state1(sc: Scenario) -> float:
    """``(gamma_th / (eta Ia)**2)**(ab/2) * (zeta P1 / N0)**(-ab/2)``."""
    p1, _ = state_powers(sc, 1)
    return _fso_asymptote(sc, 1, p1)


def asymptotic_state2(sc: Scenario) -> float:
    """``mu gamma_th / mean_snr``."""
    _, p2 = state_powers(sc, 2)
    return _rf_asymptote(sc, 2, p2)


def asymptotic_state0(sc: Scenario) -> float:
    """Product of the two single-link asymptotes at half power."""
    p1, p2 = state_powers(sc, 0)
    return _fso_asymptote(sc, 0, p1) * _rf_asymptote(sc, 0, p2)


_ASYMPTOTES = {0: asymptotic_state0, 1: asymptotic_state1, 2: asymptotic_state2}


def asymptotic_state(sc: Scenario, state: int) -> float:
    return _ASYMPTOTES[state](sc)


def diversity_order(sc: Scenario) -> dict:
    """Quoted diversity orders: ``{0: max(ab/2, 1), 1: ab/2, 2: 1}``.

    ``ab/2`` uses each state's own EW shapes.  Note that the SC outage of
    state 0 is a product of two power laws, so its measured high-SNR slope
    is ``ab/2 + 1`` (see :func:`sc_product_diversity`).
    """
    d0 = sc.ew[0].alpha * sc.ew[0].beta / 2.0
    d1 = sc.ew[1].alpha * sc.ew[1].beta / 2.0
    return {0: max(d0, 1.0), 1: d1, 2: 1.0}


def sc_product_diversity(sc: Scenario) -> float:
    """Slope implied by the state-0 product form: FSO order plus RF order."""
    return sc.ew[0].alpha * sc.ew[0].beta / 2.0 + 1.0


def evaluate(sc: Scenario, ctl: SeriesControl = DEFAULT_CONTROL) -> OutageResult:
    analytic = {k: outage_state(sc, k, ctl) for k in STATES}
    asym = {k: asymptotic_state(sc, k) for k in STATES}
    avg = sum(p * analytic[k] for k, p in zip(STATES, sc.state_probs))
    return OutageResult(sc.total_power_dbm, analytic, asym, avg, diversity_order(sc))


def fitted_diversity(sc: Scenario, state: int, decades: float = 1.0, top_dbm: float | None = None,
                     points_per_decade: int = 10, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Least-squares high-SNR slope, ``-d log10(OP) / d log10(SNR)``.

    The mean SNR of every link is proportional to P_t, so the fit runs over
    P_t from ``top_dbm - 10*decades`` to ``top_dbm``.
    """
    top = sc.sweep.stop_dbm if top_dbm is None else top_dbm
    n = max(2, int(round(points_per_decade * decades)) + 1)
    p_dbm = np.linspace(top - 10.0 * decades, top, n)
    op = np.array([outage_state(sc.with_power(p), state, ctl) for p in p_dbm])
    if np.any(op <= 0.0):
        raise ValueError("outage underflowed to zero inside the fit window")
    slope = np.polyfit(p_dbm / 10.0, np.log10(op), 1)[0]
    return -float(slope)

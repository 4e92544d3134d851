"""Shadowed-Rician RF channel (squared envelope |h|**2)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedParameterError
from .specfun import DEFAULT_CONTROL, SeriesControl, phi2, pochhammer


@dataclass(frozen=True)
class ShadowedRicianParams:
    """``m``: Nakagami severity of the LOS term, ``2b``: multipath power,
    ``omega``: LOS power."""

    m: float
    b: float
    omega: float

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError(f"m must be positive, got {self.m}")
        if not self.b > 0:
            raise DomainError(f"b must be positive, got {self.b}")
        if self.omega < 0:
            raise DomainError(f"omega must be >= 0, got {self.omega}")

    @property
    def mean_power(self) -> float:
        return self.omega + 2.0 * self.b


@dataclass(frozen=True)
class SrDerived:
    mu: float
    nu: float
    vartheta: float
    delta: float
    phi: float


def sr_derived(p: ShadowedRicianParams, mean_snr: float = 1.0) -> SrDerived:
    two_b = 2.0 * p.b
    denom = two_b * p.m + p.omega
    mu = (1.0 / two_b) * (two_b * p.m / denom) ** p.m
    nu = 1.0 / two_b
    delta = p.omega / (two_b * denom)
    return SrDerived(mu=mu, nu=nu, vartheta=p.m / denom, delta=delta, phi=(nu - delta) / mean_snr)


def _check(gamma, mean_snr):
    if gamma < 0:
        raise DomainError(f"SNR threshold must be >= 0, got {gamma}")
    if not mean_snr > 0:
        raise DomainError(f"mean SNR must be positive, got {mean_snr}")


def sr_cdf_finite(gamma: float, p: ShadowedRicianParams, mean_snr: float) -> float:
    """CDF of ``mean_snr * |h|**2`` at ``gamma`` for integer ``m``.

    Evaluates the double finite sum
    ``1 - sum_p sum_q mu (1-m)_p (-delta)**p gamma**q exp(-phi gamma)
    / (q! phi**(p-q+1) mean_snr**(p+1) p!)``.
    """
    _check(gamma, mean_snr)
    if not float(p.m).is_integer():
        raise UnsupportedParameterError(
            f"finite-sum CDF needs integer m (got {p.m}); use sr_cdf_phi2 instead"
        )
    d = sr_derived(p, mean_snr)
    m = int(p.m)
    acc = 0.0
    for pp in range(m):
        head = d.mu * pochhammer(1.0 - m, pp) * (-d.delta) ** pp / math.factorial(pp)
        for q in range(pp + 1):
            acc += head * gamma ** q / (
                math.factorial(q) * d.phi ** (pp - q + 1) * mean_snr ** (pp + 1)
            )
    out = 1.0 - acc * math.exp(-d.phi * gamma)
    return min(max(out, 0.0), 1.0)


def sr_cdf_phi2(gamma: float, p: ShadowedRicianParams, mean_snr: float,
                ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``mu h Phi2(1-m, m; 2; -nu h, -vartheta h)`` at ``h = gamma / mean_snr``."""
    _check(gamma, mean_snr)
    if gamma == 0.0:
        return 0.0
    d = sr_derived(p)
    h = gamma / mean_snr
    return d.mu * h * phi2(1.0 - p.m, p.m, 2.0, -d.nu * h, -d.vartheta * h, ctl)


def sr_sample(rng: np.random.Generator, p: ShadowedRicianParams, size=None):
    """Draw |h|**2: Nakagami-m LOS amplitude plus circular Gaussian scatter."""
    los_power = rng.gamma(p.m, p.omega / p.m, size)
    phase = rng.uniform(0.0, 2.0 * math.pi, size)
    amp = np.sqrt(los_power)
    sd = math.sqrt(p.b)
    re = amp * np.cos(phase) + sd * rng.standard_normal(size)
    im = amp * np.sin(phase) + sd * rng.standard_normal(size)
    return re * re + im * im

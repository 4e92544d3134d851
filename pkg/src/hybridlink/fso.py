"""Optical channel: exponentiated-Weibull turbulence and pointing error.

The irradiance is the product ``I = I_t * I_p * I_a`` of turbulence
fading, pointing loss and deterministic atmospheric loss.  Pointing loss
follows the Gaussian-beam collection model ``I_p = A0 exp(-2 r**2 / w_eq**2)``
with a Rician radial displacement ``r`` (equal jitter on both axes,
boresight offset on one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ConsistencyError, DomainError, SeriesDivergenceError
from .specfun import DEFAULT_CONTROL, SeriesControl, binom, scaled_meijer_g_pointing


@dataclass(frozen=True)
class EwParams:
    """Exponentiated-Weibull shape ``alpha``, ``beta`` and scale ``eta``."""

    alpha: float
    beta: float
    eta: float

    def __post_init__(self):
        for name in ("alpha", "beta", "eta"):
            if not getattr(self, name) > 0:
                raise DomainError(f"EW parameter {name} must be positive, got {getattr(self, name)!r}")

    @property
    def diversity(self) -> float:
        return self.alpha * self.beta / 2.0


@dataclass(frozen=True)
class PointingParams:
    boresight_s: float  # m
    jitter_sigma: float  # m
    divergence_theta: float  # rad
    aperture_radius_a: float  # m
    distance_z: float  # m

    def __post_init__(self):
        if self.boresight_s < 0:
            raise DomainError(f"boresight must be >= 0, got {self.boresight_s}")
        for name in ("jitter_sigma", "divergence_theta", "aperture_radius_a", "distance_z"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")

    @property
    def boresight_ratio(self) -> float:
        """``s**2 / (2 sigma_s**2)``, the Poisson rate of the boresight series."""
        return self.boresight_s ** 2 / (2.0 * self.jitter_sigma ** 2)


@dataclass(frozen=True)
class BeamGeometry:
    w_z: float
    v: float
    A0: float
    w_eq: float
    g: float
    T1: float


def beam_geometry(p: PointingParams, beta: float) -> BeamGeometry:
    w_z = p.divergence_theta * p.distance_z
    v = math.sqrt(math.pi / 2.0) * p.aperture_radius_a / w_z
    erf_v = math.erf(v)
    A0 = erf_v ** 2
    w_eq = w_z * math.sqrt(math.sqrt(math.pi) * erf_v / (2.0 * v * math.exp(-v * v)))
    g = w_eq / (2.0 * p.jitter_sigma)
    return BeamGeometry(w_z=w_z, v=v, A0=A0, w_eq=w_eq, g=g, T1=g * g / beta)


# ---------------------------------------------------------------------------
# Exponentiated Weibull
# ---------------------------------------------------------------------------

def ew_cdf(I, p: EwParams):
    """``(1 - exp(-(I/eta)**beta))**alpha``; accepts scalars or arrays."""
    I = np.asarray(I, dtype=float)
    if np.any(I < 0):
        raise DomainError("irradiance must be >= 0")
    z = (I / p.eta) ** p.beta
    out = (-np.expm1(-z)) ** p.alpha
    return float(out) if out.ndim == 0 else out


def ew_sample(u, p: EwParams):
    """Inverse-CDF map from uniforms in (0, 1) to EW irradiance."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise DomainError("uniform variates must lie strictly inside (0, 1)")
    # -ln(1 - w), w = u**(1/alpha): log1p for small w, expm1 near w = 1
    lw = np.log(u) / p.alpha
    w = np.exp(lw)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.where(w < 0.5, -np.log1p(-w), -np.log(-np.expm1(lw)))
    out = p.eta * inner ** (1.0 / p.beta)
    return float(out) if out.ndim == 0 else out


def open_uniform(rng: np.random.Generator, size):
    """Uniform variates on the open interval (0, 1) at 53-bit resolution."""
    return (rng.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) * (1.0 / (1 << 53))


def ew_draw(rng: np.random.Generator, p: EwParams, size):
    return ew_sample(open_uniform(rng, size), p)


def ew_moment(n: float, p: EwParams) -> float:
    """E[I_t**n] by quadrature of the quantile function over (0, 1)."""
    val, _ = integrate.quad(lambda u: ew_sample(u, p) ** n, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def ew_unit_power_eta(alpha: float, beta: float) -> float:
    """Scale eta that makes E[I_t**2] = 1 for the given shapes."""
    return 1.0 / math.sqrt(ew_moment(2.0, EwParams(alpha, beta, 1.0)))


# ---------------------------------------------------------------------------
# Pointing error
# ---------------------------------------------------------------------------

def pointing_sample(rng: np.random.Generator, geom: BeamGeometry, p: PointingParams, size=None):
    """Draw pointing loss factors ``I_p`` in (0, A0]."""
    x = p.boresight_s + p.jitter_sigma * rng.standard_normal(size)
    y = p.jitter_sigma * rng.standard_normal(size)
    r2 = x * x + y * y
    return geom.A0 * np.exp(-2.0 * r2 / geom.w_eq ** 2)


def _noncentral_weight(t, K):
    # density of t = g**2 * (-ln(I_p / A0)): exp(-t - K) I0(2 sqrt(K t))
    if K == 0.0:
        return math.exp(-t)
    z = 2.0 * math.sqrt(K * t)
    return float(special.i0e(z)) * math.exp(-((math.sqrt(t) - math.sqrt(K)) ** 2))


def _weight_breaks(K, extra=()):
    upper = K + 4.0 * math.sqrt(K + 1.0) * 6.0 + 60.0
    cuts = {K} | {c for c in extra if 0.0 < c < upper}
    return [0.0, *sorted(c for c in cuts if 0.0 < c < upper), upper]


def pointing_mean(geom: BeamGeometry, p: PointingParams) -> float:
    """E[I_p] by one-dimensional quadrature over the displacement law."""
    K = p.boresight_ratio
    g2 = geom.g ** 2
    total = 0.0
    edges = _weight_breaks(K)
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate.quad(lambda t: math.exp(-t / g2) * _noncentral_weight(t, K),
                                lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    return geom.A0 * total


# ---------------------------------------------------------------------------
# Combined turbulence + pointing CDF
# ---------------------------------------------------------------------------

def _j_series(t_i: float, T1: float, K: float, ctl: SeriesControl) -> tuple[float, int]:
    """exp(-K) sum_j K**j/j! * T1**(j+1) G_j(t_i), truncated on the Poisson tail."""
    if K == 0.0:
        return scaled_meijer_g_pointing(t_i, T1, 0), 1
    total = 0.0
    weight = math.exp(-K)
    for j in range(ctl.max_terms):
        total += weight * scaled_meijer_g_pointing(t_i, T1, j)
        # each scaled G is <= 1, so the Poisson tail bounds what is left;
        # hold it to tol relative to the sum so small CDF values keep digits
        tail = special.gammainc(j + 1, K)
        if tail < ctl.tol * min(total, 1.0) or tail < 1e-300:
            return total, j + 1
        weight *= K / (j + 1)
    raise SeriesDivergenceError(
        "boresight series did not converge",
        {"K": K, "T1": T1, "t": t_i, "terms": ctl.max_terms, "partial_sum": total,
         "tail_bound": float(special.gammainc(ctl.max_terms, K))},
    )


def combined_irradiance_cdf(I: float, ew: EwParams, geom: BeamGeometry, p: PointingParams,
                            Ia: float = 1.0, ctl: SeriesControl = DEFAULT_CONTROL,
                            terms: tuple[int, int] | None = None) -> float:
    """CDF of ``I_t I_p I_a`` as the turbulence/boresight double series.

    The outer index runs over the binomial expansion of the EW law and
    terminates on its own for integer ``alpha``.  Otherwise the weights left
    after term ``i`` share one sign and sum to ``(-1)**(i+1) C(alpha-1, i+1)``,
    and the factors they multiply lie between the current inner sum and 1,
    so the remainder is bracketed; summation stops once half the bracket is
    under ``ctl.tol`` and the midpoint is added.
    The inner index is the boresight expansion, truncated when the Poisson
    tail falls under ``ctl.tol``.  ``terms=(ni, nj)`` forces a fixed
    truncation instead, for convergence studies.
    """
    if I < 0:
        raise DomainError(f"irradiance must be >= 0, got {I}")
    if I == 0.0:
        return 0.0
    if Ia <= 0.0:
        return 1.0
    a, b = ew.alpha, ew.beta
    K = p.boresight_ratio
    c_beta = (I / (ew.eta * geom.A0 * Ia)) ** b
    integer_alpha = float(a).is_integer()
    ni_cap = terms[0] if terms else ctl.max_terms
    total = 0.0
    for i in range(ni_cap):
        w = (-1) ** i * binom(a, i + 1)
        if w == 0.0 and integer_alpha:
            break
        t_i = (1 + i) * c_beta
        if terms:
            inner = _fixed_j_series(t_i, geom.T1, K, terms[1])
        else:
            inner, _ = _j_series(t_i, geom.T1, K, ctl)
        total += w * inner
        if not integer_alpha and not terms and i + 1 > a:
            # the remaining weights share one sign and sum to tail; each is
            # multiplied by a CDF factor in [inner, 1], so bracket the rest
            tail = (-1) ** (i + 1) * binom(a - 1.0, i + 1)
            err = abs(tail) * (1.0 - inner) / 2.0
            if err < ctl.tol:
                total += tail * (1.0 + inner) / 2.0
                break
    else:
        if not terms and not (integer_alpha and binom(a, ni_cap + 1) == 0.0):
            raise SeriesDivergenceError(
                "turbulence series did not converge within budget",
                {"alpha": a, "terms": ni_cap, "partial_sum": total,
                 "tail_bound": abs(binom(a - 1.0, ni_cap)) * (1.0 - inner) / 2.0},
            )
    tol = ctl.tol if not terms else 1e-9
    if not -tol <= total <= 1.0 + tol:
        raise ConsistencyError("irradiance CDF left [0, 1]", {"value": total, "I": I})
    return min(max(total, 0.0), 1.0)


def _fixed_j_series(t_i, T1, K, nj):
    weight = math.exp(-K)
    total = 0.0
    for j in range(nj):
        total += weight * scaled_meijer_g_pointing(t_i, T1, j)
        weight *= K / (j + 1)
    return total


def combined_cdf_quadrature(I: float, ew: EwParams, geom: BeamGeometry, p: PointingParams,
                            Ia: float = 1.0) -> float:
    """Reference value of the combined CDF, ``E[F_EW(I / (I_a I_p))]``.

    Integrates the EW CDF against the exact pointing-loss density; no
    series expansion or Meijer G is involved.
    """
    if I == 0.0:
        return 0.0
    if Ia <= 0.0:
        return 1.0
    K = p.boresight_ratio
    g2 = geom.g ** 2
    x0 = I / (Ia * geom.A0)

    def integrand(t):
        return ew_cdf(x0 * math.exp(t / g2), ew) * _noncentral_weight(t, K)

    knee = g2 * math.log(ew.eta / x0) if x0 < ew.eta else 0.0
    total = 0.0
    edges = _weight_breaks(K, extra=(knee,))
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)[0]
    return total


def combined_cdf_asymptote(I: float, ew: EwParams, geom: BeamGeometry, p: PointingParams,
                           Ia: float = 1.0) -> float:
    """Leading small-``I`` term of the combined CDF.

    ``(I / (Ia eta A0))**(alpha beta) * g2/(g2 - ab) * exp(K ab / (g2 - ab))``
    with ``ab = alpha beta``; only defined when ``g**2 > alpha beta`` (the
    turbulence-limited regime).  Returns NaN otherwise.
    """
    ab = ew.alpha * ew.beta
    g2 = geom.g ** 2
    if g2 <= ab or Ia <= 0.0:
        return float("nan")
    K = p.boresight_ratio
    return (I / (Ia * ew.eta * geom.A0)) ** ab * g2 / (g2 - ab) * math.exp(K * ab / (g2 - ab))

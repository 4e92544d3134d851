"""Special functions used by the outage expressions.

Gamma and erf come straight from :mod:`math`; the two functions that are
specific to this model are authored here:

* :func:`meijer_g_pointing`, the Meijer G instance
  ``G^{j+2,1}_{j+2,j+3}(x | 1, T1+1 (j+1 times); 1, T1 (j+1 times), 0)``
  that appears in the turbulence/pointing irradiance CDF;
* :func:`phi2`, the bivariate confluent hypergeometric series used by the
  shadowed-Rician CDF.

The Meijer G instance has Mellin transform ``-Gamma(z) / (z + T1)**(j+1)``,
which gives two independent evaluation routes:

``"mellin"``
    direct quadrature of the Mellin-Barnes contour integral (reference);
``"laplace"``
    the equivalent real integral
    ``T1**-(j+1) * E[1 - exp(-x * exp(S / T1))]`` with ``S ~ Gamma(j+1, 1)``,
    which is cheaper and well conditioned for the very large ``T1`` values
    met at satellite distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericalError, SeriesDivergenceError


@dataclass(frozen=True)
class SeriesControl:
    """Truncation budget for the infinite series in this package."""

    max_terms: int = 50
    tol: float = 1e-10

    def __post_init__(self):
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError(f"max_terms must be a positive integer, got {self.max_terms!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")


DEFAULT_CONTROL = SeriesControl()


def _is_nonpositive_integer(x) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma_fn(x: float) -> float:
    """Gamma function; poles raise :class:`DomainError` instead of returning inf."""
    if _is_nonpositive_integer(x):
        raise DomainError(f"Gamma has a pole at {x!r}")
    return math.gamma(x)


def pochhammer(a: float, p: int) -> float:
    """Rising factorial (a)_p by the product definition.

    Valid for any real ``a``, including the non-positive integers where
    ``Gamma(a + p) / Gamma(a)`` is not directly computable.
    """
    if p < 0 or int(p) != p:
        raise DomainError(f"pochhammer order must be a non-negative integer, got {p!r}")
    out = 1.0
    for k in range(int(p)):
        out *= a + k
    return out


def erf_fn(x: float) -> float:
    return math.erf(x)


def gamma_ratio(alpha: float, i: int) -> float:
    """``Gamma(alpha) / Gamma(alpha - i)`` as the falling product, pole free."""
    out = 1.0
    for k in range(1, int(i) + 1):
        out *= alpha - k
    return out


def binom(alpha: float, k: int) -> float:
    """Generalised binomial coefficient C(alpha, k) for real alpha."""
    out = 1.0
    for r in range(int(k)):
        out *= (alpha - r) / (r + 1)
    return out


# ---------------------------------------------------------------------------
# Meijer G for the pointing-error parameter pattern
# ---------------------------------------------------------------------------

def _check_g_args(x, T1, j):
    if x < 0 or not math.isfinite(x):
        raise DomainError(f"x must be finite and >= 0, got {x!r}")
    if not T1 > 0:
        raise DomainError(f"T1 must be positive, got {T1!r}")
    if j < 0 or int(j) != j:
        raise DomainError(f"j must be a non-negative integer, got {j!r}")


def _scaled_g_laplace(x: float, T1: float, j: int, epsrel: float = 1e-13) -> float:
    # T1**(j+1) * G == E[-expm1(-x exp(S/T1))], S ~ Gamma(j+1)
    lgj = math.lgamma(j + 1.0)

    def integrand(s):
        if s <= 0.0:
            w = 1.0 if j == 0 else 0.0
        else:
            w = math.exp(j * math.log(s) - s - lgj)
        e = s / T1
        if e > 700.0:
            return w
        return -math.expm1(-x * math.exp(e)) * w

    # break points: the gamma-weight mode and the saturation knee of the kernel
    cuts = {float(j)}
    if x < 1.0:
        cuts.add(T1 * math.log(1.0 / x))
    upper = j + 60.0 + 12.0 * math.sqrt(j + 1.0)
    edges = sorted(c for c in cuts if 0.0 < c < upper)
    edges = [0.0, *edges, upper]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err, info = integrate.quad(
            integrand, lo, hi, epsabs=0.0, epsrel=epsrel, limit=200, full_output=1
        )[:3]
        total += val
    return total


def _scaled_g_mellin(x: float, T1: float, j: int, epsabs: float = 1e-15) -> float:
    # (1/2 pi i) int Gamma(1-s)/s (1 - s/T1)^-(j+1) x^s ds on Re s = c
    cap = min(1.0, T1)
    c = 0.5 * cap if x < 1.0 else 0.3 * cap
    lx = math.log(x)

    def integrand(tau):
        s = complex(c, tau)
        val = np.exp(special.loggamma(1.0 - s) + s * lx) / s * (1.0 - s / T1) ** (-(j + 1))
        return val.real

    # |Gamma(1-s)| ~ exp(-pi |tau| / 2): the integrand is below 1e-40 past this
    tau_max = 2.0 / math.pi * (95.0 + max(0.0, c * lx)) + 10.0
    val, err, info, *rest = integrate.quad(
        integrand, 0.0, tau_max, epsabs=epsabs, epsrel=1e-12, limit=2000, full_output=1
    )
    if rest and rest[0]:
        raise NumericalError(
            "Mellin-Barnes contour quadrature did not converge",
            {"x": x, "T1": T1, "j": j, "contour": c, "abserr": err,
             "message": rest[-1] if isinstance(rest[-1], str) else rest[0]},
        )
    return val / math.pi


def scaled_meijer_g_pointing(x: float, T1: float, j: int, method: str = "laplace") -> float:
    """Same as :func:`meijer_g_pointing` multiplied by ``T1**(j+1)``.

    The scaled value lies in [0, 1] and is what the irradiance CDF consumes;
    the bare value underflows quickly for T1 ~ 1e5.
    """
    _check_g_args(x, T1, j)
    if x == 0.0:
        return 0.0
    if method == "laplace":
        return _scaled_g_laplace(x, T1, int(j))
    if method == "mellin":
        return _scaled_g_mellin(x, T1, int(j))
    raise ValueError(f"unknown method {method!r}")


def meijer_g_pointing(x: float, T1: float, j: int, method: str = "mellin") -> float:
    """``G^{j+2,1}_{j+2,j+3}(x | 1, T1+1,...,T1+1; 1, T1,...,T1, 0)``.

    The upper row repeats ``T1 + 1`` and the lower row repeats ``T1``,
    each ``j + 1`` times.  ``method="mellin"`` integrates the defining
    contour integral; ``method="laplace"`` uses the real-line form.
    """
    scaled = scaled_meijer_g_pointing(x, T1, j, method=method)
    return scaled * T1 ** (-(int(j) + 1))


# ---------------------------------------------------------------------------
# Bivariate confluent hypergeometric Phi2
# ---------------------------------------------------------------------------

def phi2(b1: float, b2: float, c: float, x: float, y: float,
         ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Humbert Phi2(b1, b2; c; x, y) as a double power series.

    Summed along anti-diagonals ``m + n = N``.  Summation stops once the
    diagonal magnitudes are shrinking and a geometric tail estimate drops
    below ``ctl.tol``; ``ctl.max_terms`` caps the number of diagonals.
    For two negative arguments below -1 the series is first mapped to
    ``exp(x) Phi2(c-b1-b2, b2; c; -x, y-x)`` (with ``x`` the more negative
    one), whose terms are all positive; it needs about ``|x|`` diagonals.
    """
    if _is_nonpositive_integer(c):
        raise DomainError(f"c must not be a non-positive integer, got {c!r}")
    if x == 0.0 and y == 0.0:
        return 1.0
    if y < x:
        b1, b2, x, y = b2, b1, y, x
    # exp(x) Phi2(c - b1 - b2, b2; c; -x, y - x) has only positive terms when
    # x <= y <= 0, which removes the cancellation of the alternating series
    if x < -1.0 and y <= 0.0 and c > 0 and b2 > 0 and c - b1 - b2 >= 0:
        return _phi2_positive(c - b1 - b2, b2, c, -x, y - x, x, ctl)
    return _phi2_direct(b1, b2, c, x, y, ctl)


def _log_poch(a, k):
    return special.gammaln(a + k) - special.gammaln(a) if a > 0 else (0.0 if k == 0 else -np.inf)


def _phi2_positive(b1, b2, c, X, Y, log_scale, ctl):
    # X > 0, Y >= 0, b1 >= 0, b2 > 0, c > 0: every term is non-negative
    M = ctl.max_terms
    k = np.arange(M)
    la = np.array([_log_poch(b1, i) for i in k]) + k * math.log(X) - special.gammaln(k + 1)
    if Y > 0.0:
        lb = np.array([_log_poch(b2, i) for i in k]) + k * math.log(Y) - special.gammaln(k + 1)
    else:
        lb = np.where(k == 0, 0.0, -np.inf)
    lc = np.array([-_log_poch(c, i) for i in k])
    total = 0.0
    prev = None
    for N in range(M):
        d = float(np.sum(np.exp(la[: N + 1] + lb[N::-1] + lc[N] + log_scale)))
        total += d
        if prev is not None and N >= 2 and d < prev:
            r = d / prev
            if d * r / (1.0 - r) < ctl.tol and d < ctl.tol:
                return total
        if d == 0.0 and N > X:
            return total
        prev = d
    raise SeriesDivergenceError(
        "Phi2 series did not reach tolerance",
        {"b1": b1, "b2": b2, "c": c, "x": -X, "y": Y - X, "form": "positive",
         "diagonals": M, "last_diagonal_magnitude": prev, "partial_sum": total},
    )


def _phi2_direct(b1, b2, c, x, y, ctl):
    M = ctl.max_terms
    # A[m] = (b1)_m x^m / m!, B[n] = (b2)_n y^n / n!, C[N] = 1 / (c)_N
    A = np.empty(M)
    B = np.empty(M)
    C = np.empty(M)
    A[0] = B[0] = C[0] = 1.0
    # late coefficients may overflow; they are only reached if the series
    # has not converged by then, and the finiteness check below catches it
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, M):
            A[k] = A[k - 1] * (b1 + k - 1) * x / k
            B[k] = B[k - 1] * (b2 + k - 1) * y / k
            C[k] = C[k - 1] / (c + k - 1)
    total = 0.0
    prev = None
    for N in range(M):
        with np.errstate(over="ignore", invalid="ignore"):
            terms = A[: N + 1] * B[N::-1] * C[N]
        total += float(np.sum(terms))
        mag = float(np.sum(np.abs(terms)))
        if not math.isfinite(mag):
            break
        if prev is not None and N >= 2:
            if mag == 0.0 and prev == 0.0:
                return total
            if mag < prev:
                r = mag / prev
                tail = mag * r / (1.0 - r)
                if tail < ctl.tol and mag < ctl.tol:
                    return total
        prev = mag
    raise SeriesDivergenceError(
        "Phi2 series did not reach tolerance",
        {"b1": b1, "b2": b2, "c": c, "x": x, "y": y,
         "diagonals": M, "last_diagonal_magnitude": prev, "partial_sum": total},
    )

"""Link geometry and the deterministic part of both link budgets.

All distances are in km unless a name says otherwise.  Attenuation figures
are dB/km; gains leave this module as linear factors.

Two readings of the source formulas are worth knowing about:

* the RF free-space term is ``20 log10(4 pi L / lambda)`` with the carrier
  wavelength ``lambda`` expressed in km like ``L``;
* oxygen and rain losses are charged over the full slant range ``L``;
  the FSO weather losses instead use the configurable layer thickness
  ``attenuation_path``.
"""

from __future__ import annotations

import configparser
import enum
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DomainError

SPEED_OF_LIGHT_KM_S = 299_792.458


def db_to_linear(db):
    """Power ratio from dB."""
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


class WeatherKind(enum.IntEnum):
    """Weather classes; the integer value is the switching-state index."""

    THIN_CLOUD = 0
    RAIN = 1
    FOG = 2


@dataclass(frozen=True)
class LinkGeometry:
    sat_altitude: float  # km
    gs_altitude: float  # km
    zenith_angle: float  # degrees

    def __post_init__(self):
        if not self.sat_altitude > self.gs_altitude >= 0.0:
            raise DomainError(
                f"need sat_altitude > gs_altitude >= 0, got {self.sat_altitude}, {self.gs_altitude}"
            )
        if not 0.0 <= self.zenith_angle < 90.0:
            raise DomainError(f"zenith angle must lie in [0, 90) degrees, got {self.zenith_angle}")


@dataclass(frozen=True)
class WeatherCondition:
    """Weather seen along the slant path.

    ``fso_specific_attenuation`` is used for thin cloud and fog; under rain
    the optical extinction follows from ``rain_rate``.
    """

    kind: WeatherKind
    rain_rate: float = 0.0  # mm/h
    fso_specific_attenuation: float = 0.0  # dB/km
    attenuation_path: float = 0.0  # km

    def __post_init__(self):
        object.__setattr__(self, "kind", WeatherKind(self.kind))
        if self.rain_rate < 0:
            raise DomainError(f"rain_rate must be >= 0, got {self.rain_rate}")
        if self.fso_specific_attenuation < 0:
            raise DomainError(
                f"fso_specific_attenuation must be >= 0, got {self.fso_specific_attenuation}"
            )
        if self.attenuation_path < 0:
            raise DomainError(f"attenuation_path must be >= 0, got {self.attenuation_path}")

    @property
    def rf_rain_rate(self) -> float:
        """Rain rate seen by the RF link (zero unless it is raining)."""
        return self.rain_rate if self.kind is WeatherKind.RAIN else 0.0


@dataclass(frozen=True)
class RfLinkParams:
    tx_gain: float  # dB
    rx_gain: float  # dB
    carrier_frequency: float  # GHz
    oxygen_attenuation: float  # dB/km
    rain_coeff_k: float
    rain_coeff_rho: float

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise DomainError(f"carrier_frequency must be positive, got {self.carrier_frequency}")
        for name in ("oxygen_attenuation", "rain_coeff_k", "rain_coeff_rho"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")

    @property
    def wavelength_km(self) -> float:
        return SPEED_OF_LIGHT_KM_S / (self.carrier_frequency * 1e9)


def slant_range(geom: LinkGeometry) -> float:
    """Secant slant range in km; no Earth curvature."""
    if not 0.0 <= geom.zenith_angle < 90.0:
        raise DomainError(f"zenith angle must lie in [0, 90), got {geom.zenith_angle}")
    return (geom.sat_altitude - geom.gs_altitude) / math.cos(math.radians(geom.zenith_angle))


def fso_rain_extinction(rain_rate: float) -> float:
    """Optical rain extinction in dB/km, ``1.067 R**0.67``."""
    if rain_rate < 0:
        raise DomainError(f"rain_rate must be >= 0, got {rain_rate}")
    return 1.067 * rain_rate ** 0.67


def fso_attenuation_db(weather: WeatherCondition) -> float:
    if weather.kind is WeatherKind.RAIN:
        specific = fso_rain_extinction(weather.rain_rate)
    else:
        specific = weather.fso_specific_attenuation
    return specific * weather.attenuation_path


def fso_attenuation_gain(weather: WeatherCondition) -> float:
    """Amplitude factor on irradiance, ``10**(-dB/20)``.

    Squared in the SNR, so the full dB figure lands on the power budget.
    May underflow to 0.0 for fog-scale losses, which simply means the
    optical link is unusable.
    """
    return 10.0 ** (-fso_attenuation_db(weather) / 20.0)


def rf_rain_attenuation(params: RfLinkParams, rain_rate: float) -> float:
    """Specific rain attenuation ``k R**rho`` in dB/km."""
    if rain_rate < 0:
        raise DomainError(f"rain_rate must be >= 0, got {rain_rate}")
    return params.rain_coeff_k * rain_rate ** params.rain_coeff_rho


def rf_path_gain_db(params: RfLinkParams, L: float, rain_rate: float = 0.0) -> float:
    if not L > 0:
        raise DomainError(f"path length must be positive, got {L}")
    free_space = 20.0 * math.log10(4.0 * math.pi * L / params.wavelength_km)
    return (
        params.tx_gain
        + params.rx_gain
        - free_space
        - params.oxygen_attenuation * L
        - rf_rain_attenuation(params, rain_rate) * L
    )


def rf_path_gain(params: RfLinkParams, L: float, rain_rate: float = 0.0) -> float:
    """Linear power factor h_l of the RF link budget."""
    return db_to_linear(rf_path_gain_db(params, L, rain_rate))


# ---------------------------------------------------------------------------
# ITU-R P.838 coefficient table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RainCoefficients:
    frequency_ghz: float
    k: float
    rho: float


def load_rain_table(path=None) -> list[RainCoefficients]:
    """Read the rain-coefficient table (INI: one section per frequency)."""
    parser = configparser.ConfigParser()
    if path is None:
        text = resources.files("hybridlink.data").joinpath("itu_p838.ini").read_text()
        parser.read_string(text, source="itu_p838.ini")
    else:
        with open(Path(path)) as fh:
            parser.read_file(fh)
    rows = []
    for section in parser.sections():
        sec = parser[section]
        rows.append(RainCoefficients(sec.getfloat("frequency_ghz"), sec.getfloat("k"), sec.getfloat("rho")))
    rows.sort(key=lambda r: r.frequency_ghz)
    return rows


def rain_coefficients(frequency_ghz: float, table=None) -> tuple[float, float]:
    """(k, rho) at ``frequency_ghz``.

    Between rows, log k is interpolated linearly in log f and rho linearly
    in log f, the usual practice for this table.
    """
    rows = load_rain_table() if table is None else table
    for r in rows:
        if math.isclose(r.frequency_ghz, frequency_ghz, rel_tol=1e-12):
            return r.k, r.rho
    if not rows[0].frequency_ghz <= frequency_ghz <= rows[-1].frequency_ghz:
        raise DomainError(
            f"{frequency_ghz} GHz outside table range "
            f"[{rows[0].frequency_ghz}, {rows[-1].frequency_ghz}]"
        )
    for lo, hi in zip(rows[:-1], rows[1:]):
        if lo.frequency_ghz <= frequency_ghz <= hi.frequency_ghz:
            t = math.log(frequency_ghz / lo.frequency_ghz) / math.log(hi.frequency_ghz / lo.frequency_ghz)
            k = math.exp(math.log(lo.k) + t * (math.log(hi.k) - math.log(lo.k)))
            rho = lo.rho + t * (hi.rho - lo.rho)
            return k, rho
    raise AssertionError("unreachable")

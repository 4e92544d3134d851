"""Scenario description and the ``.scn`` file format.

A scenario file is INI-style text with the sections ``[geometry]``,
``[weather]``, ``[fso]``, ``[pointing]`` (optional), ``[rf]``, ``[power]``,
``[mc]`` and ``[states]``.  Every physical key carries its unit in the
name.  Unknown keys are rejected, as are missing required ones; errors
name the offending key path and, where the key appears in the file, its
line number.

``[pointing]`` may list several comma-separated values for
``boresight_m`` and ``aperture_diameter_m``; the file then describes the
Cartesian product of those variants.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .fso import EwParams, PointingParams
from .linkgeo import LinkGeometry, RfLinkParams, WeatherCondition, WeatherKind, rain_coefficients, load_rain_table, slant_range
from .rf import ShadowedRicianParams

STATES = (0, 1, 2)


@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 0
    batch: int = 1_000_000

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class PowerSweep:
    start_dbm: float = 0.0
    stop_dbm: float = 30.0
    points: int = 31

    def grid(self, points=None):
        n = self.points if points is None else points
        if n == 1:
            return [float(self.start_dbm)]
        step = (self.stop_dbm - self.start_dbm) / (n - 1)
        return [self.start_dbm + k * step for k in range(n)]


@dataclass(frozen=True)
class Scenario:
    """Everything needed to evaluate the three weather states.

    ``weathers`` and ``ew`` are indexed by state (0 thin cloud, 1 rain,
    2 fog).  The fog state never uses its EW entry, which may be None.
    """

    geometry: LinkGeometry
    weathers: tuple[WeatherCondition, WeatherCondition, WeatherCondition]
    ew: tuple[EwParams | None, EwParams | None, EwParams | None]
    sr: ShadowedRicianParams
    rf_link: RfLinkParams
    total_power_dbm: float
    noise_power_dbm: float
    snr_threshold_db: float
    state_probs: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    conversion_zeta: float = 1.0
    pointing: PointingParams | None = None
    normalize_fading_power: bool = False
    sweep: PowerSweep = field(default_factory=PowerSweep)
    mc: McConfig = field(default_factory=McConfig)

    def __post_init__(self):
        if len(self.weathers) != 3 or len(self.ew) != 3 or len(self.state_probs) != 3:
            raise ValueError("weathers, ew and state_probs need one entry per state")
        for k, w in enumerate(self.weathers):
            if w.kind != k:
                raise ValueError(f"weather for state {k} has kind {w.kind.name}")
        if any(p < 0 for p in self.state_probs) or not math.isclose(sum(self.state_probs), 1.0, abs_tol=1e-9):
            raise ValueError(f"state probabilities must be >= 0 and sum to 1, got {self.state_probs}")
        if not 0.0 < self.conversion_zeta <= 1.0:
            raise ValueError(f"conversion_zeta must lie in (0, 1], got {self.conversion_zeta}")
        if not math.isfinite(self.snr_threshold_db):
            raise ValueError("snr_threshold_db must be finite")
        L = slant_range(self.geometry)
        for w in self.weathers:
            if w.attenuation_path > L:
                raise ValueError(f"{w.kind.name} attenuation path {w.attenuation_path} km exceeds slant range {L:.1f} km")
        for k in (0, 1):
            if self.ew[k] is None:
                raise ValueError(f"state {k} needs EW parameters")

    def with_power(self, dbm: float) -> "Scenario":
        return dataclasses.replace(self, total_power_dbm=float(dbm))

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    @property
    def slant_range_km(self) -> float:
        return slant_range(self.geometry)


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

class ScenarioParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


_STATE_NAMES = ("thin_cloud", "rain", "fog")

# section -> {key: required}
_SCHEMA = {
    "geometry": {"sat_altitude_km": True, "gs_altitude_km": True, "zenith_angle_deg": True},
    "weather": {
        "thin_cloud_attenuation_db_km": True, "thin_cloud_path_km": True,
        "rain_rate_mm_h": True, "rain_path_km": False,
        "fog_attenuation_db_km": True, "fog_path_km": False,
    },
    "fso": {
        "thin_cloud_alpha": True, "thin_cloud_beta": True, "thin_cloud_eta": True,
        "rain_alpha": True, "rain_beta": True, "rain_eta": True,
        "fog_alpha": False, "fog_beta": False, "fog_eta": False,
        "conversion_zeta": False, "wavelength_nm": False,
    },
    "pointing": {
        "boresight_m": True, "jitter_sigma_m": True, "divergence_mrad": True,
        "aperture_diameter_m": True, "distance_km": False,
    },
    "rf": {
        "tx_gain_db": True, "rx_gain_db": True, "carrier_frequency_ghz": True,
        "oxygen_attenuation_db_km": True, "rain_coeff_k": False, "rain_coeff_rho": False,
        "nakagami_m": True, "multipath_b": True, "los_omega": True,
        "normalize_fading_power": False,
    },
    "power": {
        "total_power_dbm": False, "noise_power_dbm": True, "snr_threshold_db": True,
        "sweep_from_dbm": False, "sweep_to_dbm": False, "sweep_points": False,
    },
    "mc": {"samples": False, "seed": False, "batch": False},
    "states": {"p_thin_cloud": True, "p_rain": True, "p_fog": True},
}
_OPTIONAL_SECTIONS = {"pointing", "mc"}

# defaults for the layer thicknesses the source parameter set leaves open
DEFAULT_RAIN_PATH_KM = 4.0
DEFAULT_FOG_PATH_KM = 1.0


@dataclass(frozen=True)
class ScenarioFile:
    """A parsed scenario file: the base scenario plus pointing variants."""

    scenario: Scenario
    boresights_m: tuple[float, ...] = ()
    apertures_m: tuple[float, ...] = ()
    pointing_distance_km: float | None = None
    jitter_sigma_m: float | None = None
    divergence_mrad: float | None = None

    @property
    def has_pointing(self) -> bool:
        return bool(self.boresights_m)

    def variants(self):
        """Yield ``(labels, scenario)`` for every pointing combination.

        Without a ``[pointing]`` section this is the single base scenario
        with an empty label dict.
        """
        if not self.has_pointing:
            yield {}, self.scenario
            return
        for a, s in itertools.product(self.apertures_m, self.boresights_m):
            yield ({"boresight_m": s, "aperture_diameter_m": a},
                   self.scenario.replace(pointing=self._pointing(s, a)))

    def _pointing(self, s, d):
        z_km = self.pointing_distance_km if self.pointing_distance_km is not None else self.scenario.slant_range_km
        return PointingParams(
            boresight_s=s, jitter_sigma=self.jitter_sigma_m,
            divergence_theta=self.divergence_mrad * 1e-3,
            aperture_radius_a=d / 2.0, distance_z=z_km * 1e3,
        )


def _key_lines(text):
    """Map (section, key) -> 1-based line number."""
    out = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            out.setdefault((section, None), n)
            continue
        m = re.match(r"^([A-Za-z0-9_]+)\s*[=:]", line)
        if m and section is not None:
            out[(section, m.group(1).lower())] = n
    return out


def parse_scenario(text: str, source="<string>") -> ScenarioFile:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ScenarioParseError(f"malformed line in {source}", line) from exc
    except configparser.Error as exc:
        raise ScenarioParseError(str(exc), getattr(exc, "lineno", None)) from exc
    lines = _key_lines(text)

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ScenarioParseError(f"unknown section [{section}]", lines.get((section, None)))
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ScenarioParseError(f"unknown key {section}.{key}", lines.get((section, key)))
    for section, keys in _SCHEMA.items():
        if section not in parser:
            if section in _OPTIONAL_SECTIONS:
                continue
            raise ScenarioParseError(f"missing section [{section}]")
        for key, required in keys.items():
            if required and key not in parser[section]:
                raise ScenarioParseError(f"missing required key {section}.{key}", lines.get((section, None)))

    def raw(section, key):
        return parser[section][key].strip()

    def num(section, key, default=None, kind=float):
        if section not in parser or key not in parser[section]:
            if default is None:
                raise ScenarioParseError(f"missing required key {section}.{key}", lines.get((section, None)))
            return default
        text_value = raw(section, key)
        try:
            if kind is int:
                return int(text_value)
            return float(Fraction(text_value)) if "/" in text_value else float(text_value)
        except (ValueError, ZeroDivisionError):
            raise ScenarioParseError(
                f"{section}.{key}: cannot read {text_value!r} as a number", lines.get((section, key))
            ) from None

    def num_list(section, key):
        items = [t.strip() for t in raw(section, key).split(",") if t.strip()]
        try:
            return tuple(float(t) for t in items)
        except ValueError:
            raise ScenarioParseError(f"{section}.{key}: expected comma-separated numbers",
                                     lines.get((section, key))) from None

    def flag(section, key, default=False):
        if key not in parser[section]:
            return default
        try:
            return parser[section].getboolean(key)
        except ValueError:
            raise ScenarioParseError(f"{section}.{key}: expected a boolean", lines.get((section, key))) from None

    try:
        geometry = LinkGeometry(num("geometry", "sat_altitude_km"), num("geometry", "gs_altitude_km"),
                                num("geometry", "zenith_angle_deg"))
        weathers = (
            WeatherCondition(WeatherKind.THIN_CLOUD,
                             fso_specific_attenuation=num("weather", "thin_cloud_attenuation_db_km"),
                             attenuation_path=num("weather", "thin_cloud_path_km")),
            WeatherCondition(WeatherKind.RAIN, rain_rate=num("weather", "rain_rate_mm_h"),
                             attenuation_path=num("weather", "rain_path_km", DEFAULT_RAIN_PATH_KM)),
            WeatherCondition(WeatherKind.FOG,
                             fso_specific_attenuation=num("weather", "fog_attenuation_db_km"),
                             attenuation_path=num("weather", "fog_path_km", DEFAULT_FOG_PATH_KM)),
        )
        ew = []
        for name in _STATE_NAMES:
            keys = [f"{name}_{p}" for p in ("alpha", "beta", "eta")]
            present = [k in parser["fso"] for k in keys]
            if all(present):
                ew.append(EwParams(*(num("fso", k) for k in keys)))
            elif any(present):
                raise ScenarioParseError(f"fso: give all of {', '.join(keys)} or none", lines.get(("fso", None)))
            else:
                ew.append(None)
        freq = num("rf", "carrier_frequency_ghz")
        if "rain_coeff_k" in parser["rf"] or "rain_coeff_rho" in parser["rf"]:
            k_r, rho = num("rf", "rain_coeff_k"), num("rf", "rain_coeff_rho")
        else:
            k_r, rho = rain_coefficients(freq, load_rain_table())
        rf_link = RfLinkParams(num("rf", "tx_gain_db"), num("rf", "rx_gain_db"), freq,
                               num("rf", "oxygen_attenuation_db_km"), k_r, rho)
        sr = ShadowedRicianParams(num("rf", "nakagami_m"), num("rf", "multipath_b"), num("rf", "los_omega"))
        sweep = PowerSweep(num("power", "sweep_from_dbm", 0.0), num("power", "sweep_to_dbm", 30.0),
                           num("power", "sweep_points", 31, kind=int))
        mc = McConfig(*(num("mc", k, d, kind=int) if "mc" in parser else d
                        for k, d in (("samples", 1_000_000), ("seed", 0), ("batch", 1_000_000))))
        scenario = Scenario(
            geometry=geometry, weathers=weathers, ew=tuple(ew), sr=sr, rf_link=rf_link,
            total_power_dbm=num("power", "total_power_dbm", sweep.start_dbm),
            noise_power_dbm=num("power", "noise_power_dbm"),
            snr_threshold_db=num("power", "snr_threshold_db"),
            state_probs=tuple(num("states", f"p_{n}") for n in _STATE_NAMES),
            conversion_zeta=num("fso", "conversion_zeta", 1.0),
            normalize_fading_power=flag("rf", "normalize_fading_power"),
            sweep=sweep, mc=mc,
        )
        if "pointing" in parser:
            sf = ScenarioFile(
                scenario=scenario,
                boresights_m=num_list("pointing", "boresight_m"),
                apertures_m=num_list("pointing", "aperture_diameter_m"),
                pointing_distance_km=(num("pointing", "distance_km")
                                      if "distance_km" in parser["pointing"] else None),
                jitter_sigma_m=num("pointing", "jitter_sigma_m"),
                divergence_mrad=num("pointing", "divergence_mrad"),
            )
            if not sf.boresights_m or not sf.apertures_m:
                raise ScenarioParseError("pointing: boresight_m and aperture_diameter_m need values",
                                         lines.get(("pointing", None)))
            first = next(sf.variants())[1]
            return dataclasses.replace(sf, scenario=first)
        return ScenarioFile(scenario=scenario)
    except ScenarioParseError:
        raise
    except ValueError as exc:
        raise ScenarioParseError(str(exc)) from exc


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    return parse_scenario(path.read_text(), source=str(path))


def bundled_scenario_path(name: str) -> Path:
    """Filesystem path of a scenario shipped with the package (``fig2.scn``...)."""
    return Path(str(resources.files("hybridlink.data").joinpath(name)))


def load_bundled(name: str) -> ScenarioFile:
    return load_scenario(bundled_scenario_path(name))


def _fmt(x):
    return repr(float(x))


def serialize_scenario(sf: ScenarioFile) -> str:
    """Write a :class:`ScenarioFile` back to ``.scn`` text (round-trips exactly)."""
    sc = sf.scenario
    cp = configparser.ConfigParser(interpolation=None)
    g = sc.geometry
    cp["geometry"] = {"sat_altitude_km": _fmt(g.sat_altitude), "gs_altitude_km": _fmt(g.gs_altitude),
                      "zenith_angle_deg": _fmt(g.zenith_angle)}
    w0, w1, w2 = sc.weathers
    cp["weather"] = {
        "thin_cloud_attenuation_db_km": _fmt(w0.fso_specific_attenuation),
        "thin_cloud_path_km": _fmt(w0.attenuation_path),
        "rain_rate_mm_h": _fmt(w1.rain_rate), "rain_path_km": _fmt(w1.attenuation_path),
        "fog_attenuation_db_km": _fmt(w2.fso_specific_attenuation), "fog_path_km": _fmt(w2.attenuation_path),
    }
    fso = {}
    for name, ew in zip(_STATE_NAMES, sc.ew):
        if ew is not None:
            fso.update({f"{name}_alpha": _fmt(ew.alpha), f"{name}_beta": _fmt(ew.beta), f"{name}_eta": _fmt(ew.eta)})
    fso["conversion_zeta"] = _fmt(sc.conversion_zeta)
    cp["fso"] = fso
    if sf.has_pointing:
        pt = {"boresight_m": ", ".join(_fmt(s) for s in sf.boresights_m),
              "jitter_sigma_m": _fmt(sf.jitter_sigma_m), "divergence_mrad": _fmt(sf.divergence_mrad),
              "aperture_diameter_m": ", ".join(_fmt(a) for a in sf.apertures_m)}
        if sf.pointing_distance_km is not None:
            pt["distance_km"] = _fmt(sf.pointing_distance_km)
        cp["pointing"] = pt
    r = sc.rf_link
    cp["rf"] = {
        "tx_gain_db": _fmt(r.tx_gain), "rx_gain_db": _fmt(r.rx_gain),
        "carrier_frequency_ghz": _fmt(r.carrier_frequency),
        "oxygen_attenuation_db_km": _fmt(r.oxygen_attenuation),
        "rain_coeff_k": _fmt(r.rain_coeff_k), "rain_coeff_rho": _fmt(r.rain_coeff_rho),
        "nakagami_m": _fmt(sc.sr.m), "multipath_b": _fmt(sc.sr.b), "los_omega": _fmt(sc.sr.omega),
        "normalize_fading_power": "true" if sc.normalize_fading_power else "false",
    }
    cp["power"] = {
        "total_power_dbm": _fmt(sc.total_power_dbm), "noise_power_dbm": _fmt(sc.noise_power_dbm),
        "snr_threshold_db": _fmt(sc.snr_threshold_db),
        "sweep_from_dbm": _fmt(sc.sweep.start_dbm), "sweep_to_dbm": _fmt(sc.sweep.stop_dbm),
        "sweep_points": str(sc.sweep.points),
    }
    cp["mc"] = {"samples": str(sc.mc.samples), "seed": str(sc.mc.seed), "batch": str(sc.mc.batch)}
    cp["states"] = {f"p_{n}": _fmt(p) for n, p in zip(_STATE_NAMES, sc.state_probs)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()

"""Run configuration: YAML document in lab units -> validated core objects.

Lab units (kHz cyclic, degrees, microseconds, microtesla) stop here; every
object handed to the physics modules is in SI with angular frequencies.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .integrate import IntegratorConfig
from .pulse import BOHR_MAGNETON, HBAR, LANDE_G_RB87_F1, PulseParams, rabi_coupling
from .scan import Model, ScanGrid, TransmissionModel, visibility_matched
from .spin import SpinSystem, maximally_mixed, pumped_initial_state

TWO_PI = 2 * math.pi
KHZ = 1e3
US = 1e-6
UT = 1e-6


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# None marks optional keys with no default
DEFAULTS = {
    "pulse": {
        "nu1_khz": 50.0,
        "nu2_khz": 150.0,
        "phi1_deg": 0.0,
        "phi2_deg": 0.0,
        "b1_ut": 0.1,
        "b2_ut": 0.1,
        "rabi1_khz": None,
        "rabi2_khz": None,
        "fwhm_us": 130.0,
        "match_visibility": False,
    },
    "system": {
        "splitting_khz": 150.0,
        "b0_ut": None,
        "gamma_per_s": 0.0,
        "g": LANDE_G_RB87_F1,
        "mu0": None,
        "hbar": None,
        "rho_eq": "mixed",
    },
    "grid": {
        "band_khz": [100.0, 200.0],
        "points": 201,
        "phases_deg": [0.0],
    },
    "model": "perturbative",
    "integrator": {
        "rel_tol": 1e-10,
        "abs_tol": 1e-12,
        "max_step_us": None,
        "t_cut_multiple": 4.0,
        "samples": 2048,
    },
    "peaks": {
        "min_height_frac": 0.2,
        "smooth_window": 5,
    },
    "transmission": {
        "scale": 1.0,
        "weights": [1.0, 1.0],
    },
    "output": None,
}


@dataclass(frozen=True)
class PeakSettings:
    min_height_frac: float = 0.2
    smooth_window: int = 5


@dataclass
class RunConfig:
    pulse: PulseParams
    system: SpinSystem
    grid: ScanGrid
    model: Model
    integrator: IntegratorConfig
    peaks: PeakSettings
    transmission: TransmissionModel
    weights: tuple
    output: str | None
    document: dict = field(repr=False, compare=False)


def _merge(defaults, given, prefix=""):
    if not isinstance(given, dict):
        raise ConfigError(prefix.rstrip(".") or "<root>", "expected a mapping")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        path = f"{prefix}{key}"
        if key not in defaults:
            raise ConfigError(path, "unknown key")
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], value if value is not None else {}, path + ".")
        else:
            out[key] = value
    return out


def _num(doc, section, key, positive=False, nonneg=False, allow_none=False):
    path = f"{section}.{key}" if section else key
    value = doc[section][key] if section else doc[key]
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if positive and not value > 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    if nonneg and not value >= 0:
        raise ConfigError(path, f"must be non-negative, got {value!r}")
    return value


def _num_list(doc, section, key, length=None):
    value = doc[section][key]
    path = f"{section}.{key}"
    if not isinstance(value, (list, tuple)) or (length is not None and len(value) != length):
        raise ConfigError(path, f"expected a list of {length or 'some'} numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(path, f"expected numbers, got {v!r}")
        out.append(float(v))
    return out


def build_config(document: dict) -> RunConfig:
    """Validate a (possibly partial) config mapping and convert units."""
    doc = _merge(DEFAULTS, document or {})

    # system first: the pulse amplitude conversion needs g, mu0, hbar
    s = doc["system"]
    g = _num(doc, "system", "g")
    if g == 0:
        raise ConfigError("system.g", "must be non-zero")
    mu0 = _num(doc, "system", "mu0", positive=True, allow_none=True) or BOHR_MAGNETON
    hbar = _num(doc, "system", "hbar", positive=True, allow_none=True) or HBAR
    gamma = _num(doc, "system", "gamma_per_s", nonneg=True)
    if s["rho_eq"] not in ("mixed", "pumped"):
        raise ConfigError("system.rho_eq", "must be 'mixed' or 'pumped'")
    rho_eq = maximally_mixed() if s["rho_eq"] == "mixed" else pumped_initial_state()
    if s["b0_ut"] is not None:
        if document and (document.get("system") or {}).get("splitting_khz") is not None:
            raise ConfigError("system.b0_ut", "conflicts with system.splitting_khz")
        b0 = _num(doc, "system", "b0_ut", nonneg=True) * UT
        system = SpinSystem(b0=b0, g=g, mu0=mu0, hbar=hbar, gamma=gamma, rho_eq=rho_eq)
        doc["system"]["splitting_khz"] = None
    else:
        split = _num(doc, "system", "splitting_khz", nonneg=True)
        system = SpinSystem.from_splitting(TWO_PI * split * KHZ, g=g, mu0=mu0, hbar=hbar,
                                           gamma=gamma, rho_eq=rho_eq)

    p = doc["pulse"]
    coupling = abs(rabi_coupling(g, mu0, hbar))
    amps = []
    for i in (1, 2):
        b_key, r_key = f"b{i}_ut", f"rabi{i}_khz"
        if p[r_key] is not None:
            if document and (document.get("pulse") or {}).get(b_key) is not None:
                raise ConfigError(f"pulse.{r_key}", f"conflicts with pulse.{b_key}")
            amps.append(_num(doc, "pulse", r_key, nonneg=True) * TWO_PI * KHZ / coupling)
            doc["pulse"][b_key] = None
        else:
            amps.append(_num(doc, "pulse", b_key, nonneg=True) * UT)
    if not isinstance(p["match_visibility"], bool):
        raise ConfigError("pulse.match_visibility", "expected true or false")
    pulse = PulseParams(
        nu1=TWO_PI * _num(doc, "pulse", "nu1_khz", positive=True) * KHZ,
        nu2=TWO_PI * _num(doc, "pulse", "nu2_khz", positive=True) * KHZ,
        phi1=math.radians(_num(doc, "pulse", "phi1_deg")),
        phi2=math.radians(_num(doc, "pulse", "phi2_deg")),
        b1=amps[0], b2=amps[1],
        fwhm=_num(doc, "pulse", "fwhm_us", positive=True) * US,
    )
    if p["match_visibility"]:
        try:
            pulse = visibility_matched(pulse, system.coupling)
        except ValueError as exc:
            raise ConfigError("pulse.match_visibility", str(exc)) from exc

    try:
        model = Model(doc["model"])
    except ValueError:
        raise ConfigError("model", f"must be one of {[m.value for m in Model]}") from None

    lo, hi = _num_list(doc, "grid", "band_khz", 2)
    points = doc["grid"]["points"]
    if isinstance(points, bool) or not isinstance(points, int) or points < 2:
        raise ConfigError("grid.points", "must be an integer >= 2")
    if not 0 <= lo < hi:
        raise ConfigError("grid.band_khz", "need 0 <= low < high")
    phases = _num_list(doc, "grid", "phases_deg")
    if not phases:
        raise ConfigError("grid.phases_deg", "need at least one phase")
    grid = ScanGrid(TWO_PI * lo * KHZ, TWO_PI * hi * KHZ, points,
                    tuple(math.radians(x) for x in phases), model)

    max_step = _num(doc, "integrator", "max_step_us", positive=True, allow_none=True)
    samples = doc["integrator"]["samples"]
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
        raise ConfigError("integrator.samples", "must be an integer >= 2")
    integrator = IntegratorConfig(
        rel_tol=_num(doc, "integrator", "rel_tol", positive=True),
        abs_tol=_num(doc, "integrator", "abs_tol", positive=True),
        max_step=None if max_step is None else max_step * US,
        t_cut_multiple=_num(doc, "integrator", "t_cut_multiple", positive=True),
        samples=samples,
    )

    frac = _num(doc, "peaks", "min_height_frac", nonneg=True)
    if frac >= 1:
        raise ConfigError("peaks.min_height_frac", "must be below 1")
    window = doc["peaks"]["smooth_window"]
    if isinstance(window, bool) or not isinstance(window, int) or window < 1:
        raise ConfigError("peaks.smooth_window", "must be an integer >= 1")

    transmission = TransmissionModel(_num(doc, "transmission", "scale", positive=True))
    weights = tuple(_num_list(doc, "transmission", "weights", 2))
    out = doc["output"]
    if out is not None and not isinstance(out, str):
        raise ConfigError("output", "expected a path string")

    return RunConfig(pulse, system, grid, model, integrator, PeakSettings(frac, window),
                     transmission, weights, out, doc)


def load_config(text: str) -> RunConfig:
    """Parse a YAML (or JSON) config document."""
    try:
        document = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError("<document>", f"parse error: {exc}") from exc
    return build_config(document or {})


def dump_config(cfg: RunConfig) -> str:
    """Serialize back to the lab-unit document (round-trips through load_config)."""
    return yaml.safe_dump(cfg.document, sort_keys=False)


def default_document() -> dict:
    return copy.deepcopy(DEFAULTS)


def phases_deg(grid: ScanGrid) -> list[float]:
    return [float(np.degrees(x)) for x in grid.phase_values]

"""Sweeps over Zeeman splitting and CEP, the probe observable, and peak finding."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, optimize, signal

from .dynamics import evolve_density, evolve_two_level
from .integrate import IntegratorConfig
from .perturbation import c1_closed, c3_closed, c_total
from .pulse import PulseParams
from .spin import SpinSystem, pumped_initial_state, upper_population


class Model(str, enum.Enum):
    PERTURBATIVE = "perturbative"
    TWO_LEVEL = "two_level_ode"
    THREE_LEVEL = "three_level_dm"


@dataclass(frozen=True)
class ScanGrid:
    omega_min: float
    omega_max: float
    omega_points: int
    phase_values: tuple = (0.0,)
    model: Model = Model.PERTURBATIVE

    def __post_init__(self):
        if not self.omega_min < self.omega_max:
            raise ValueError("omega_min must be below omega_max")
        if self.omega_points < 2:
            raise ValueError("omega_points must be >= 2")
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "phase_values", tuple(float(x) for x in self.phase_values))

    @property
    def omegas(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.omega_points)

    @property
    def step(self) -> float:
        return (self.omega_max - self.omega_min) / (self.omega_points - 1)


@dataclass
class Spectrum:
    """Signal vs Zeeman splitting for one pulse setting.

    Failed points hold NaN and are listed in ``failures`` (index -> message).
    """

    omega: np.ndarray
    signal: np.ndarray
    model: Model
    pulse: PulseParams
    failures: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.signal = np.asarray(self.signal, dtype=float)
        if self.omega.shape != self.signal.shape:
            raise ValueError("omega and signal lengths differ")
        if np.any(np.diff(self.omega) <= 0):
            raise ValueError("omega samples must be strictly increasing")
        finite = self.signal[np.isfinite(self.signal)]
        if np.any(finite < 0):
            raise ValueError("signal must be non-negative")

    @property
    def phi1(self) -> float:
        return self.pulse.phi1

    @property
    def phi2(self) -> float:
        return self.pulse.phi2


@dataclass(frozen=True)
class TransmissionModel:
    """``-ln(I1/I2) = scale * P_a`` with ``scale`` standing in for N sigma L."""

    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class Peak:
    omega_center: float
    height: float
    width_fwhm: float


def transmission_signal(p_a: float, tm: TransmissionModel) -> float:
    if not 0.0 <= p_a <= 1.0:
        raise ValueError(f"population must lie in [0, 1], got {p_a!r}")
    return tm.scale * p_a


def excitation_signal(omega: float, p: PulseParams, sys: SpinSystem, model,
                      cfg: IntegratorConfig | None = None, weights=(1.0, 1.0)) -> float:
    """Transferred population at splitting ``omega`` for the chosen model.

    ``perturbative`` gives ``|C1 + C3|^2``; ``two_level_ode`` gives
    ``|C_a|^2`` at the end of the window; ``three_level_dm`` gives the
    ``m_F = 0, -1`` population starting from the pumped state.
    """
    model = Model(model)
    if model is Model.PERTURBATIVE:
        return c_total(omega, p, coupling=sys.coupling).probability
    if model is Model.TWO_LEVEL:
        tr = evolve_two_level(omega, p, cfg, coupling=sys.coupling)
        return abs(tr.final.c_a) ** 2
    tr = evolve_density(sys.with_splitting(omega), p, cfg, pumped_initial_state())
    return upper_population(tr.final, weights)


def _point(args):
    omega, p, sys, model, cfg = args
    try:
        return excitation_signal(omega, p, sys, model, cfg), None
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        return math.nan, f"{type(exc).__name__}: {exc}"


def _evaluate(tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map keeps submission order, so output order never depends on scheduling
            return list(pool.map(_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_point(t) for t in tasks]


def spectrum(grid: ScanGrid, p: PulseParams, sys: SpinSystem,
             cfg: IntegratorConfig | None = None, jobs: int = 1) -> list[Spectrum]:
    """One spectrum per ``grid.phase_values`` entry (each sets ``phi2``)."""
    omegas = grid.omegas
    pulses = [p.with_(phi2=phi) for phi in grid.phase_values]
    tasks = [(w, q, sys, grid.model, cfg) for q in pulses for w in omegas]
    results = _evaluate(tasks, jobs)
    out = []
    n = len(omegas)
    for k, q in enumerate(pulses):
        chunk = results[k * n:(k + 1) * n]
        values = np.array([v for v, _ in chunk])
        failures = {i: msg for i, (_, msg) in enumerate(chunk) if msg is not None}
        out.append(Spectrum(omegas.copy(), values, grid.model, q, failures))
    return out


@dataclass(frozen=True)
class SinusoidFit:
    """``offset + amplitude cos(2 pi phi / period - phase)``."""

    offset: float
    amplitude: float
    phase: float
    period: float
    residual: float  # rms


def fit_sinusoid(phis, values, free_period: bool = True) -> SinusoidFit:
    phis = np.asarray(phis, dtype=float)
    values = np.asarray(values, dtype=float)
    design = np.column_stack([np.ones_like(phis), np.cos(phis), np.sin(phis)])
    (a, c, s), *_ = np.linalg.lstsq(design, values, rcond=None)
    amp, ph, period = math.hypot(c, s), math.atan2(s, c), 2 * math.pi
    # a free period adds a fourth parameter, so it needs more than four points
    if free_period and len(phis) > 4:
        def model(x, a_, b_, ph_, per_):
            return a_ + b_ * np.cos(2 * np.pi * x / per_ - ph_)
        popt, _ = optimize.curve_fit(model, phis, values, p0=[a, amp, ph, period])
        a, amp, ph, period = popt
        if amp < 0:
            amp, ph = -amp, ph + math.pi
    pred = a + amp * np.cos(2 * np.pi * phis / period - ph)
    rms = float(np.sqrt(np.mean((values - pred) ** 2)))
    return SinusoidFit(float(a), float(amp), float(math.remainder(ph, 2 * math.pi)),
                       float(period), rms)


@dataclass
class PhaseScan:
    phis: np.ndarray
    signal: np.ndarray
    omega: float
    model: Model
    fit: SinusoidFit | None = None


def phase_scan(phis, omega_fixed: float, p: PulseParams, sys: SpinSystem, model,
               cfg: IntegratorConfig | None = None, jobs: int = 1) -> PhaseScan:
    """Signal vs ``phi2`` at fixed splitting, with a sinusoid fit when possible."""
    phis = np.asarray(phis, dtype=float)
    tasks = [(omega_fixed, p.with_(phi2=phi), sys, Model(model), cfg) for phi in phis]
    results = _evaluate(tasks, jobs)
    values = np.array([v for v, _ in results])
    fit = None
    if len(phis) >= 3 and np.all(np.isfinite(values)):
        fit = fit_sinusoid(phis, values)
    return PhaseScan(phis, values, omega_fixed, Model(model), fit)


def _half_crossing(x, y, i, half, step):
    j = i
    while 0 <= j + step < len(y) and y[j + step] > half:
        j += step
    k = j + step
    if not 0 <= k < len(y):
        return x[j]
    # linear interpolation between j (above) and k (at/below half)
    return x[j] + (half - y[j]) * (x[k] - x[j]) / (y[k] - y[j])


def find_peaks(s: Spectrum, min_height_frac: float = 0.2, smooth_window: int = 5) -> list[Peak]:
    """Local maxima of the smoothed signal above ``min_height_frac`` of its maximum.

    Centers are refined by a parabola through the three samples around each
    maximum; widths come from linearly interpolated half-height crossings.
    """
    mask = np.isfinite(s.signal)
    x, y = s.omega[mask], s.signal[mask]
    if len(x) == 0:
        raise ValueError("spectrum is empty")
    if len(x) < 5:
        raise ValueError("need at least 5 spectrum points for peak finding")
    if smooth_window > 1:
        y = ndimage.uniform_filter1d(y, size=int(smooth_window), mode="nearest")
    top = y.max()
    if not top > 0:
        return []
    # pad so maxima on the boundary are seen too
    padded = np.concatenate([[-np.inf], y, [-np.inf]])
    idx, _ = signal.find_peaks(padded, height=min_height_frac * top)
    peaks = []
    for i in idx - 1:
        center = x[i]
        if 0 < i < len(y) - 1:
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            denom = y0 - 2 * y1 + y2
            if denom < 0:
                shift = 0.5 * (y0 - y2) / denom
                center = x[i] + shift * (x[i + 1] - x[i - 1]) / 2
        half = y[i] / 2
        width = _half_crossing(x, y, i, half, +1) - _half_crossing(x, y, i, half, -1)
        if width > 0:
            peaks.append(Peak(float(center), float(y[i]), float(width)))
    return peaks


def normalize_family(spectra: list[Spectrum]) -> list[Spectrum]:
    """Scale a family of spectra by their common maximum."""
    top = max((np.nanmax(s.signal) for s in spectra if np.any(np.isfinite(s.signal))),
              default=0.0)
    if not top > 0:
        return spectra
    return [Spectrum(s.omega, s.signal / top, s.model, s.pulse, dict(s.failures)) for s in spectra]


def visibility_matched(p: PulseParams, coupling: float | None = None) -> PulseParams:
    """Return ``p`` with ``b2`` chosen so ``|C1| = |C3|`` at ``w = nu2``."""
    if p.b1 <= 0:
        raise ValueError("visibility matching needs b1 > 0")
    unit = p.with_(b2=1.0)
    c1_per_tesla = abs(c1_closed(p.nu2, unit, coupling=coupling))
    c3 = abs(c3_closed(p.nu2, p, coupling=coupling))
    return p.with_(b2=c3 / c1_per_tesla)

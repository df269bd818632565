"""Bichromatic Gaussian rf pulse.

The transverse field is

    B_x(t) = exp(-alpha^2 t^2) [B1 cos(nu1 t + phi1) + B2 cos(nu2 t + phi2)]

with ``alpha = 2 sqrt(ln 2) / T`` for a field-envelope FWHM ``T``. All
frequencies are angular (rad/s). Phases are kept exactly as given (no
wrapping).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants

BOHR_MAGNETON = constants.physical_constants["Bohr magneton"][0]  # J/T
HBAR = constants.hbar  # J s
LANDE_G_RB87_F1 = -0.5

_TWO_SQRT_LN2 = 2.0 * math.sqrt(math.log(2.0))


def alpha_from_fwhm(fwhm: float) -> float:
    """Gaussian rate ``alpha`` whose field envelope has full width ``fwhm``."""
    if not fwhm > 0:
        raise ValueError(f"fwhm must be positive, got {fwhm!r}")
    return _TWO_SQRT_LN2 / fwhm


def rabi_coupling(g: float = LANDE_G_RB87_F1, mu0: float = BOHR_MAGNETON,
                  hbar: float = HBAR) -> float:
    """Field-to-Rabi conversion ``g mu0 / (2 sqrt(2) hbar)`` in rad/(s T).

    Signed: carries the sign of ``g``.
    """
    return g * mu0 / (2.0 * math.sqrt(2.0) * hbar)


@dataclass(frozen=True)
class PulseParams:
    """Carrier frequencies (rad/s), CEPs (rad), amplitudes (T), FWHM (s)."""

    nu1: float
    nu2: float
    phi1: float
    phi2: float
    b1: float
    b2: float
    fwhm: float

    def __post_init__(self):
        for name in ("nu1", "nu2", "fwhm"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("b1", "b2"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)!r}")

    @property
    def alpha(self) -> float:
        return alpha_from_fwhm(self.fwhm)

    def t_cut(self, multiple: float = 4.0) -> float:
        """Half-width of the truncated pulse window."""
        return multiple * self.fwhm

    def with_(self, **changes) -> "PulseParams":
        return replace(self, **changes)

    @classmethod
    def from_rabi(cls, nu1, nu2, phi1, phi2, omega1, omega2, fwhm,
                  coupling: float | None = None) -> "PulseParams":
        """Build a pulse from Rabi amplitudes ``|Omega_1|, |Omega_2|`` (rad/s).

        Only magnitudes are used; the sign comes back through ``coupling``
        (default: the Rb-87 F=1 value, negative).
        """
        c = abs(rabi_coupling() if coupling is None else coupling)
        return cls(nu1, nu2, phi1, phi2, abs(omega1) / c, abs(omega2) / c, fwhm)


def envelope(t, alpha: float):
    """Shared Gaussian envelope ``exp(-alpha^2 t^2)``."""
    t = np.asarray(t, dtype=float)
    return np.exp(-(alpha * t) ** 2)


def _carriers(t, p: PulseParams, a1: float, a2: float):
    return a1 * np.cos(p.nu1 * t + p.phi1) + a2 * np.cos(p.nu2 * t + p.phi2)


def field_amplitude(t, p: PulseParams):
    """Transverse field ``B_x(t)`` in tesla (``B_y`` is identically zero)."""
    t = np.asarray(t, dtype=float)
    out = envelope(t, p.alpha) * _carriers(t, p, p.b1, p.b2)
    return out if out.ndim else float(out)


def rabi_amplitudes(p: PulseParams, coupling: float | None = None) -> tuple[float, float]:
    """Signed ``(Omega_1, Omega_2)`` in rad/s."""
    c = rabi_coupling() if coupling is None else coupling
    return c * p.b1, c * p.b2


def rabi_frequency(t, p: PulseParams, g: float = LANDE_G_RB87_F1,
                   mu0: float = BOHR_MAGNETON, hbar: float = HBAR):
    """Bichromatic Rabi frequency

        Omega(t) = 2 exp(-alpha^2 t^2) [Omega_1 cos(nu1 t + phi1) + Omega_2 cos(nu2 t + phi2)]

    in rad/s, with ``Omega_i = g mu0 B_i / (2 sqrt 2 hbar)``.
    """
    o1, o2 = rabi_amplitudes(p, rabi_coupling(g, mu0, hbar))
    t = np.asarray(t, dtype=float)
    out = 2.0 * envelope(t, p.alpha) * _carriers(t, p, o1, o2)
    return out if out.ndim else float(out)


def rabi_frequency_fn(p: PulseParams, coupling: float | None = None):
    """Scalar closure ``t -> Omega(t)`` for inner integration loops."""
    o1, o2 = rabi_amplitudes(p, coupling)
    a2 = p.alpha ** 2
    nu1, nu2, phi1, phi2 = p.nu1, p.nu2, p.phi1, p.phi2
    exp, cos = math.exp, math.cos

    def omega_t(t: float) -> float:
        return 2.0 * exp(-a2 * t * t) * (o1 * cos(nu1 * t + phi1) + o2 * cos(nu2 * t + phi2))

    return omega_t


def reference_pulse(phi1: float = 0.0, phi2: float = 0.0, b1: float = 1e-7,
                b2: float = 1e-7) -> PulseParams:
    """50 kHz + 150 kHz carriers, 130 us FWHM."""
    return PulseParams(nu1=2 * np.pi * 50e3, nu2=2 * np.pi * 150e3, phi1=phi1, phi2=phi2,
                       b1=b1, b2=b2, fwhm=130e-6)

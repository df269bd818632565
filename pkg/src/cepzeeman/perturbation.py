"""Perturbative excitation amplitudes of the two-level model.

Closed forms (rotating-wave reduced, exact as derived for ``C_b ~= 1``)::

    C1 = i (sqrt(pi)/alpha) Omega_2 exp(-[(w - nu2)/2 alpha]^2) exp(-i phi2)
    C3 = -i sqrt(pi) / (2 sqrt(3) alpha nu1 (w - nu1)) Omega_1^3
         exp(-(w - 3 nu1)^2 / 12 alpha^2) exp(-3 i phi1)

and brute-force oracles that evaluate the defining first- and third-order
time integrals with the full bichromatic Rabi frequency (both carriers,
co- and counter-rotating parts).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .pulse import PulseParams, rabi_amplitudes, rabi_frequency_fn

SQRT_PI = math.sqrt(math.pi)
POLE_GUARD = 1e-6


class PoleError(ArithmeticError):
    """Three-photon closed form evaluated too close to its ``w = nu1`` pole."""


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PathAmplitudes:
    c1: complex
    c3: complex
    total: complex

    @property
    def probability(self) -> float:
        return abs(self.total) ** 2


def c1_closed(omega: float, p: PulseParams, *, coupling: float | None = None) -> complex:
    """One-photon (``nu2``) amplitude after the pulse."""
    _, o2 = rabi_amplitudes(p, coupling)
    a = p.alpha
    x = (omega - p.nu2) / (2 * a)
    return 1j * (SQRT_PI / a) * o2 * math.exp(-x * x) * complex(math.cos(p.phi2), -math.sin(p.phi2))


def c3_closed(omega: float, p: PulseParams, *, coupling: float | None = None,
              pole_guard: float = POLE_GUARD) -> complex:
    """Three-photon (``3 nu1``) amplitude after the pulse.

    Raises :class:`PoleError` when ``|w - nu1| < pole_guard * nu1``.
    """
    detuning = omega - p.nu1
    if abs(detuning) < pole_guard * p.nu1:
        raise PoleError(
            f"omega = {omega:.6g} rad/s is within {pole_guard:g} nu1 of the nu1 pole")
    o1, _ = rabi_amplitudes(p, coupling)
    a = p.alpha
    prefactor = SQRT_PI / (2 * math.sqrt(3) * a * p.nu1 * detuning)
    gauss = math.exp(-(omega - 3 * p.nu1) ** 2 / (12 * a * a))
    three_phi = 3 * p.phi1
    return -1j * prefactor * o1 ** 3 * gauss * complex(math.cos(three_phi), -math.sin(three_phi))


def c_total(omega: float, p: PulseParams, *, coupling: float | None = None,
            pole_guard: float = POLE_GUARD) -> PathAmplitudes:
    c1 = c1_closed(omega, p, coupling=coupling)
    c3 = c3_closed(omega, p, coupling=coupling, pole_guard=pole_guard)
    return PathAmplitudes(c1, c3, c1 + c3)


def c1_quadrature(omega: float, p: PulseParams, *, coupling: float | None = None,
                  t_cut_multiple: float = 4.0, rel_target: float = 1e-10) -> complex:
    """``i * integral Omega(t) exp(i w t) dt`` by adaptive Gauss-Kronrod quadrature.

    The window is cut into panels a few periods of the fastest oscillation
    long; each panel is integrated adaptively to its share of the absolute
    error budget ``rel_target * sqrt(pi) max|Omega_i| / alpha``.
    """
    o1, o2 = rabi_amplitudes(p, coupling)
    scale = SQRT_PI / p.alpha * max(abs(o1), abs(o2))
    if scale == 0:
        return 0j
    rabi = rabi_frequency_fn(p, coupling)
    tc = p.t_cut(t_cut_multiple)
    fastest = abs(omega) + max(p.nu1, p.nu2)
    n_panels = max(1, int(math.ceil(2 * tc * fastest / (2 * math.pi) / 4)))
    edges = np.linspace(-tc, tc, n_panels + 1)
    budget = rel_target * scale / n_panels

    def re(t):
        return rabi(t) * math.cos(omega * t)

    def im(t):
        return rabi(t) * math.sin(omega * t)

    total = 0j
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            try:
                vr, _ = integrate.quad(re, lo, hi, epsabs=budget, epsrel=0.0, limit=200)
                vi, _ = integrate.quad(im, lo, hi, epsabs=budget, epsrel=0.0, limit=200)
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(
                    f"c1 quadrature did not converge on [{lo:.6g}, {hi:.6g}] s: {exc}") from exc
            total += complex(vr, vi)
    return 1j * total


def c3_grid_size(omega: float, p: PulseParams, t_cut_multiple: float = 4.0,
                 points_per_period: int = 64) -> int:
    fastest = abs(omega) + max(p.nu1, p.nu2)
    span = 2 * p.t_cut(t_cut_multiple)
    n = int(math.ceil(span * fastest / (2 * math.pi) * points_per_period))
    return n + (n % 2 == 0)  # odd count: whole number of Simpson panels


def c3_quadrature(omega: float, p: PulseParams, *, coupling: float | None = None,
                  t_cut_multiple: float = 4.0, points_per_period: int = 64,
                  max_points: int = 20_000_000) -> complex:
    """Third-order amplitude from the nested time-ordered integral.

    The two inner integrals are tabulated once as cumulative Simpson sums on
    a shared grid, then the outer integral is taken over the table. No
    rotating-wave approximation is made.
    """
    if points_per_period < 40:
        raise QuadratureError("need at least 40 grid points per fastest period")
    n = c3_grid_size(omega, p, t_cut_multiple, points_per_period)
    if n > max_points:
        raise QuadratureError(f"c3 quadrature needs {n} grid points (limit {max_points})")
    o1, o2 = rabi_amplitudes(p, coupling)
    if o1 == 0 and o2 == 0:
        return 0j
    tc = p.t_cut(t_cut_multiple)
    t = np.linspace(-tc, tc, n)
    a = p.alpha
    rabi = 2 * np.exp(-(a * t) ** 2) * (o1 * np.cos(p.nu1 * t + p.phi1)
                                       + o2 * np.cos(p.nu2 * t + p.phi2))
    phase = np.exp(1j * omega * t)
    g = rabi * phase
    inner = _cumulative(g, t)
    middle = _cumulative(np.conj(rabi) / phase * inner, t)
    return -1j * integrate.simpson(g * middle, x=t)


def _cumulative(y, t):
    # cumulative_simpson is real-only
    return (integrate.cumulative_simpson(y.real, x=t, initial=0)
            + 1j * integrate.cumulative_simpson(y.imag, x=t, initial=0))

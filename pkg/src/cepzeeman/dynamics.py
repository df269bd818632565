"""Time evolution over the truncated pulse window.

Two models share one adaptive integrator:

* the F=1 density matrix under ``drho/dt = -(i/hbar)[H, rho] - Gamma (rho - rho_eq)``,
  integrated in the lab frame (no rotating-wave approximation);
* the reduced two-level amplitudes
  ``dC_a/dt = i Omega(t) e^{i omega t} C_b``,
  ``dC_b/dt = i Omega*(t) e^{-i omega t} C_a``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .integrate import IntegrationError, IntegratorConfig, dopri45, rk4_fixed
from .pulse import PulseParams, rabi_frequency_fn
from .spin import (DIM, HERMITIAN_TOL, TRACE_TOL, SpinSystem, check_density_matrix,
                   density_matrix_defects, hamiltonian, hamiltonian_parts, zeeman_splitting)


@dataclass(frozen=True)
class AmplitudePair:
    c_a: complex
    c_b: complex

    @property
    def norm(self) -> float:
        return abs(self.c_a) ** 2 + abs(self.c_b) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.c_a, self.c_b], dtype=complex)

    @classmethod
    def ground(cls) -> "AmplitudePair":
        """Everything in the initial level ``b``."""
        return cls(0j, 1 + 0j)


@dataclass
class Trajectory:
    """Sampled evolution. ``states`` is ``(n, 3, 3)`` or ``(n, 2)``."""

    t: np.ndarray
    states: np.ndarray
    kind: str  # "density" or "two_level"
    accepted_steps: int = 0
    rejected_steps: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def final(self):
        last = self.states[-1]
        if self.kind == "two_level":
            return AmplitudePair(complex(last[0]), complex(last[1]))
        return last


def default_max_step(p: PulseParams, omega: float) -> float:
    """20 steps per period of the fastest frequency in play."""
    fastest = max(p.nu1, p.nu2, abs(omega))
    return 2 * math.pi / fastest / 20


def _window(p: PulseParams, cfg: IntegratorConfig, t_span):
    if t_span is None:
        tc = p.t_cut(cfg.t_cut_multiple)
        return (-tc, tc)
    return (float(t_span[0]), float(t_span[1]))


def _field_fn(p: PulseParams):
    a2 = p.alpha ** 2
    b1, b2, nu1, nu2, phi1, phi2 = p.b1, p.b2, p.nu1, p.nu2, p.phi1, p.phi2
    exp, cos = math.exp, math.cos

    def bx(t: float) -> float:
        return exp(-a2 * t * t) * (b1 * cos(nu1 * t + phi1) + b2 * cos(nu2 * t + phi2))

    return bx


def liouville_rhs(rho, t: float, sys: SpinSystem, p: PulseParams) -> np.ndarray:
    """``-(i/hbar)[H(t), rho] - Gamma (rho - rho_eq)`` in 1/s."""
    rho = np.asarray(rho, dtype=complex)
    h = hamiltonian(t, sys, p)
    out = -1j / sys.hbar * (h @ rho - rho @ h)
    if sys.gamma:
        out = out - sys.gamma * (rho - sys.rho_eq)
    return out


def _density_rhs(sys: SpinSystem, p: PulseParams):
    # same equation as liouville_rhs, as a row-major superoperator acting on vec(rho):
    # vec(A rho - rho A) = (A (x) I - I (x) A^T) vec(rho)
    h_z, h_x = hamiltonian_parts(sys)
    eye = np.eye(DIM)
    lz = -1j / sys.hbar * (np.kron(h_z, eye) - np.kron(eye, h_z.T))
    lx = -1j / sys.hbar * (np.kron(h_x, eye) - np.kron(eye, h_x.T))
    if sys.gamma:
        lz = lz - sys.gamma * np.eye(DIM * DIM)
        source = sys.gamma * np.asarray(sys.rho_eq, dtype=complex).ravel()
    else:
        source = None
    bx = _field_fn(p)

    def f(t, y):
        out = lz @ y + bx(t) * (lx @ y)
        if source is not None:
            out += source
        return out

    return f


def _sample_times(t_span, samples: int) -> np.ndarray:
    t = np.linspace(t_span[0], t_span[1], samples)
    t[0], t[-1] = t_span
    return t


def evolve_density(sys: SpinSystem, p: PulseParams, cfg: IntegratorConfig | None = None,
                   rho_init=None, *, t_span=None, method: str = "dopri45",
                   rk4_steps: int | None = None) -> Trajectory:
    """Integrate the density-matrix equation across the pulse window.

    ``rho_init`` defaults to the optically pumped state. The final state is
    checked (not re-imposed) for Hermiticity and unit trace; a violation
    raises :class:`IntegrationError`.
    """
    from .spin import pumped_initial_state

    cfg = cfg or IntegratorConfig()
    rho0 = check_density_matrix(pumped_initial_state() if rho_init is None else rho_init,
                                "rho_init")
    span = _window(p, cfg, t_span)
    f = _density_rhs(sys, p)
    t_eval = _sample_times(span, cfg.samples)
    if method == "rk4":
        sol = rk4_fixed(f, span, rho0.ravel(), rk4_steps or cfg.samples - 1)
    else:
        max_step = cfg.max_step or default_max_step(p, zeeman_splitting(sys))
        sol = dopri45(f, span, rho0.ravel(), rtol=cfg.rel_tol, atol=cfg.abs_tol,
                      max_step=max_step, t_eval=t_eval, max_steps=cfg.max_steps)
    states = sol.y.reshape(-1, DIM, DIM)
    defects = density_matrix_defects(states[-1])
    if defects["hermiticity"] > HERMITIAN_TOL or defects["trace"] > TRACE_TOL:
        raise IntegrationError(f"final density matrix invalid: {defects}", span[1])
    return Trajectory(sol.t, states, "density", sol.accepted, sol.rejected,
                      {"final_defects": defects, "nfev": sol.nfev})


def _two_level_rhs(omega: float, p: PulseParams, coupling: float | None):
    rabi = rabi_frequency_fn(p, coupling)
    expi = cmath.exp
    array = np.array

    def f(t, y):
        om = rabi(t)
        ph = expi(1j * omega * t)
        # Omega(t) is real, so Omega* = Omega
        return array([1j * om * ph * y[1], 1j * om.conjugate() / ph * y[0]])

    return f


def evolve_two_level(omega: float, p: PulseParams, cfg: IntegratorConfig | None = None,
                     init: AmplitudePair | None = None, *, coupling: float | None = None,
                     t_span=None, method: str = "dopri45",
                     rk4_steps: int | None = None) -> Trajectory:
    """Integrate the two-level amplitude equations across the pulse window.

    ``init`` defaults to ``C_b = 1``. ``coupling`` is the signed
    field-to-Rabi factor (default Rb-87 F=1).
    """
    cfg = cfg or IntegratorConfig()
    init = init or AmplitudePair.ground()
    if abs(init.norm - 1.0) > 1e-9:
        raise ValueError(f"initial amplitudes not normalised (|C|^2 = {init.norm!r})")
    span = _window(p, cfg, t_span)
    f = _two_level_rhs(omega, p, coupling)
    t_eval = _sample_times(span, cfg.samples)
    if method == "rk4":
        sol = rk4_fixed(f, span, init.as_array(), rk4_steps or cfg.samples - 1)
    else:
        max_step = cfg.max_step or default_max_step(p, omega)
        sol = dopri45(f, span, init.as_array(), rtol=cfg.rel_tol, atol=cfg.abs_tol,
                      max_step=max_step, t_eval=t_eval, max_steps=cfg.max_steps)
    norm = np.sum(np.abs(sol.y[-1]) ** 2)
    return Trajectory(sol.t, sol.y, "two_level", sol.accepted, sol.rejected,
                      {"norm_drift": float(abs(norm - 1.0)), "nfev": sol.nfev})

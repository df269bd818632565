"""Explicit Runge-Kutta integrators for complex-valued state vectors.

Two schemes live here:

* :func:`dopri45` -- adaptive Dormand-Prince 5(4) pair with the standard
  4th-order continuous extension, used for every production evolution.
* :func:`rk4_fixed` -- classical fixed-step RK4, kept for convergence-order
  checks.

Both integrate ``dy/dt = f(t, y)`` where ``y`` is a 1-D complex array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class IntegrationError(RuntimeError):
    """Raised when the adaptive integrator cannot advance."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t = {t:.9g} s)")
        self.t = t


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and sampling for the pulse-window evolutions.

    ``max_step`` of ``None`` means "derive from the fastest frequency in
    the problem" (20 steps per period).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float | None = None
    t_cut_multiple: float = 4.0
    samples: int = 2048
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if not self.t_cut_multiple > 0:
            raise ValueError("t_cut_multiple must be positive")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")


# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
], dtype=complex)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84], dtype=complex)
# difference between the 5th- and embedded 4th-order weights, 7 stages (FSAL)
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40],
              dtype=complex)
# continuous extension: y(t + s h) = y + h * K.T @ (_P @ [s, s^2, s^3, s^4])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), n)
    accepted: int = 0
    rejected: int = 0
    nfev: int = 0
    extras: dict = field(default_factory=dict)


def _error_norm(err, y, y_new, rtol, atol):
    # overflow here means the tolerances are unreachable; the caller sees inf/nan
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        e = err / (atol + rtol * np.maximum(np.abs(y), np.abs(y_new)))
        return math.sqrt(np.vdot(e, e).real / e.size)


def _initial_step(f, t0, y0, f0, direction, rtol, atol, max_step):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        h = _initial_step_estimate(f, t0, y0, f0, direction, rtol, atol, max_step)
    return h if np.isfinite(h) and h > 0 else min(1e-6, max_step)


def _initial_step_estimate(f, t0, y0, f0, direction, rtol, atol, max_step):
    # Hairer, Norsett & Wanner, "Solving ODEs I", II.4
    scale = atol + np.abs(y0) * rtol
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y0 + direction * h0 * f0
    f1 = f(t0 + direction * h0, y1)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, max_step)


def dopri45(f, t_span, y0, *, rtol=1e-10, atol=1e-12, max_step=np.inf,
            t_eval=None, max_steps=5_000_000) -> Solution:
    """Integrate ``y' = f(t, y)`` over ``t_span`` with Dormand-Prince 5(4).

    Parameters
    ----------
    f : callable
        ``f(t, y) -> ndarray``; must return a fresh array.
    t_span : (t0, t1)
        Integration limits; ``t1 < t0`` integrates backwards.
    y0 : array_like
        Initial state (cast to complex).
    t_eval : array_like, optional
        Monotone output times inside ``t_span``. Values are produced by the
        continuous extension, independent of where the steps fall. When
        omitted only the endpoints are returned.

    Raises
    ------
    IntegrationError
        On step-size underflow, non-finite states, or when ``max_steps``
        is exceeded.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = np.array(y0, dtype=complex).ravel()
    direction = 1.0 if t1 >= t0 else -1.0
    if t_eval is None:
        t_eval = np.array([t0, t1])
    t_eval = np.asarray(t_eval, dtype=float)
    out = np.empty((len(t_eval), y.size), dtype=complex)

    # samples at (or behind) the start point
    k_out = 0
    while k_out < len(t_eval) and direction * (t_eval[k_out] - t0) <= 0:
        out[k_out] = y
        k_out += 1

    n = y.size
    K = np.empty((7, n), dtype=complex)
    t = t0
    K[0] = f(t, y)
    nfev = 1
    if t1 == t0:
        return Solution(t_eval, out, nfev=nfev)

    h = _initial_step(f, t0, y, K[0], direction, rtol, atol, max_step)
    nfev += 1
    accepted = rejected = 0

    while direction * (t1 - t) > 0:
        if accepted + rejected >= max_steps:
            raise IntegrationError("maximum number of steps exceeded", t)
        min_step = 10 * np.spacing(abs(t)) if t != 0 else 1e-300
        h = min(h, max_step)
        if h < min_step:
            raise IntegrationError("step size underflow", t)
        if direction * (t + direction * h - t1) > 0:
            h = abs(t1 - t)
        hs = direction * h

        for i in range(1, 6):
            K[i] = f(t + _C[i] * hs, y + hs * (_A[i, :i] @ K[:i]))
        y_new = y + hs * (_B @ K[:6])
        t_new = t + hs if direction * (t1 - (t + hs)) > 0 else t1
        K[6] = f(t_new, y_new)
        nfev += 6

        err = hs * (_E @ K)
        err_norm = _error_norm(err, y, y_new, rtol, atol)
        if not np.isfinite(err_norm):
            raise IntegrationError("non-finite state", t)

        if err_norm <= 1.0:
            # dense output for samples in (t, t_new]
            while k_out < len(t_eval) and direction * (t_eval[k_out] - t_new) <= 0:
                s = (t_eval[k_out] - t) / hs
                q = _P @ np.array([s, s * s, s ** 3, s ** 4])
                out[k_out] = y + hs * (q @ K)
                k_out += 1
            if k_out and t_eval[k_out - 1] == t_new:
                out[k_out - 1] = y_new
            factor = _MAX_FACTOR if err_norm == 0 else min(
                _MAX_FACTOR, _SAFETY * err_norm ** -0.2)
            t, y = t_new, y_new
            K[0] = K[6]
            accepted += 1
        else:
            factor = max(_MIN_FACTOR, _SAFETY * err_norm ** -0.2)
            rejected += 1
        h = h * factor

    return Solution(t_eval, out, accepted=accepted, rejected=rejected, nfev=nfev)


def rk4_fixed(f, t_span, y0, n_steps: int, t_eval=None) -> Solution:
    """Classical 4th-order Runge-Kutta with ``n_steps`` equal steps.

    Only the step nodes are available as output; ``t_eval`` (if given) must
    be a subset of them.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    t0, t1 = float(t_span[0]), float(t_span[1])
    h = (t1 - t0) / n_steps
    y = np.array(y0, dtype=complex).ravel()
    ts = t0 + h * np.arange(n_steps + 1)
    ts[-1] = t1
    ys = np.empty((n_steps + 1, y.size), dtype=complex)
    ys[0] = y
    for i in range(n_steps):
        t = ts[i]
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[i + 1] = y
    if t_eval is not None:
        idx = np.searchsorted(ts, t_eval)
        return Solution(ts[idx], ys[idx], accepted=n_steps, nfev=4 * n_steps)
    return Solution(ts, ys, accepted=n_steps, nfev=4 * n_steps)

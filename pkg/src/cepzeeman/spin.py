"""F=1 ground state in a static field plus transverse rf field.

Basis order is fixed repo-wide as ``(m_F=+1, m_F=0, m_F=-1)``; index 0 is
``m_F=+1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .pulse import BOHR_MAGNETON, HBAR, LANDE_G_RB87_F1, PulseParams, field_amplitude, rabi_coupling

DIM = 3
M_F = (1, 0, -1)
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8

# transverse coupling pattern: only |delta m_F| = 1
_SX_PATTERN = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
_SZ_PATTERN = np.diag([1.0, 0.0, -1.0]).astype(complex)


class DensityMatrixError(ValueError):
    pass


def maximally_mixed() -> np.ndarray:
    return np.eye(DIM, dtype=complex) / DIM


def pumped_initial_state() -> np.ndarray:
    """All population in ``m_F=+1`` (optically pumped)."""
    rho = np.zeros((DIM, DIM), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def density_matrix_defects(rho) -> dict[str, float]:
    """Max Hermiticity deviation, trace error and most negative eigenvalue."""
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = float(abs(np.trace(rho) - 1.0))
    min_eig = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
    return {"hermiticity": herm, "trace": tr, "min_eigenvalue": min_eig}


def check_density_matrix(rho, name: str = "rho") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (DIM, DIM):
        raise DensityMatrixError(f"{name} must be {DIM}x{DIM}, got shape {rho.shape}")
    d = density_matrix_defects(rho)
    if d["hermiticity"] > HERMITIAN_TOL:
        raise DensityMatrixError(f"{name} is not Hermitian (deviation {d['hermiticity']:.3g})")
    if d["trace"] > TRACE_TOL:
        raise DensityMatrixError(f"{name} trace differs from 1 by {d['trace']:.3g}")
    if d["min_eigenvalue"] < -POSITIVITY_TOL:
        raise DensityMatrixError(f"{name} has negative eigenvalue {d['min_eigenvalue']:.3g}")
    return rho


def upper_population(rho, weights=(1.0, 1.0)) -> float:
    """Population ``P_a`` of the rf-excited sublevels ``m_F = 0, -1``.

    ``weights`` scales the two populations (probe coupling); equal weights
    give the plain sum.
    """
    rho = np.asarray(rho)
    return float(weights[0] * rho[1, 1].real + weights[1] * rho[2, 2].real)


@dataclass(frozen=True)
class SpinSystem:
    """Static field ``b0`` (T), Lande factor, relaxation rate ``gamma`` (1/s).

    ``mu0`` and ``hbar`` default to CODATA values and can be overridden,
    e.g. ``hbar=1`` for natural units.
    """

    b0: float
    g: float = LANDE_G_RB87_F1
    mu0: float = BOHR_MAGNETON
    hbar: float = HBAR
    gamma: float = 0.0
    rho_eq: np.ndarray = field(default_factory=maximally_mixed, compare=False)

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma!r}")
        if not (self.mu0 > 0 and self.hbar > 0):
            raise ValueError("mu0 and hbar must be positive")
        rho = check_density_matrix(self.rho_eq, "rho_eq").copy()
        rho.setflags(write=False)
        object.__setattr__(self, "rho_eq", rho)

    @classmethod
    def from_splitting(cls, omega: float, **kwargs) -> "SpinSystem":
        """System whose Zeeman splitting is ``omega`` (rad/s)."""
        g = kwargs.get("g", LANDE_G_RB87_F1)
        mu0 = kwargs.get("mu0", BOHR_MAGNETON)
        hbar = kwargs.get("hbar", HBAR)
        if g == 0:
            raise ValueError("g must be non-zero to set a splitting")
        return cls(b0=omega * hbar / (abs(g) * mu0), **kwargs)

    @property
    def omega(self) -> float:
        return zeeman_splitting(self)

    @property
    def coupling(self) -> float:
        """Signed field-to-Rabi factor for this system (rad/(s T))."""
        return rabi_coupling(self.g, self.mu0, self.hbar)

    def with_splitting(self, omega: float) -> "SpinSystem":
        return replace(self, b0=omega * self.hbar / (abs(self.g) * self.mu0))


def zeeman_splitting(sys: SpinSystem) -> float:
    """Adjacent-level splitting ``|g| mu0 B0 / hbar`` in rad/s."""
    return abs(sys.g) * sys.mu0 * sys.b0 / sys.hbar


def hamiltonian_parts(sys: SpinSystem) -> tuple[np.ndarray, np.ndarray]:
    """``(H_z, H_x)`` in joules with ``H(t) = H_z + B_x(t) H_x``."""
    h_z = -sys.g * sys.mu0 * sys.b0 * _SZ_PATTERN
    h_x = -sys.g * sys.mu0 / math.sqrt(2.0) * _SX_PATTERN
    return h_z, h_x


def hamiltonian(t: float, sys: SpinSystem, p: PulseParams) -> np.ndarray:
    """F=1 Zeeman Hamiltonian (J) at time ``t`` with ``B_z = b0``, ``B_y = 0``."""
    h_z, h_x = hamiltonian_parts(sys)
    return h_z + field_amplitude(t, p) * h_x

"""Acceptance criteria, each at its stated tolerance and runtime budget."""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from cepzeeman.dynamics import AmplitudePair, evolve_density, evolve_two_level
from cepzeeman.integrate import IntegratorConfig, rk4_fixed
from cepzeeman.perturbation import (c1_closed, c1_quadrature, c3_closed, c3_quadrature,
                                    c_total)
from cepzeeman.pulse import HBAR, reference_pulse, rabi_frequency
from cepzeeman.scan import (Model, ScanGrid, find_peaks, fit_sinusoid, spectrum,
                            visibility_matched)
from cepzeeman.spin import SpinSystem, density_matrix_defects, hamiltonian_parts

from conftest import NU1, NU2, TWO_PI, pulse_from_rabi

KHZ = TWO_PI * 1e3
GOLDEN = Path(__file__).parent / "golden" / "c3_residual.json"


def test_c1_quadrature_matches_closed_form(acceptance_report):
    p = reference_pulse()
    start = time.perf_counter()
    quad = c1_quadrature(NU2, p)
    elapsed = time.perf_counter() - start
    closed = c1_closed(NU2, p)
    rel = abs(quad - closed) / abs(closed)
    ok = acceptance_report(1, "one-photon closed form vs quadrature", rel <= 1e-4 and elapsed < 1,
                           f"rel={rel:.2e}, {elapsed:.3f} s")
    assert ok


def test_c3_quadrature_matches_closed_form(acceptance_report):
    golden = json.loads(GOLDEN.read_text())
    p = reference_pulse(b1=golden["b1_t"], b2=0.0)
    omega = 3 * NU1
    start = time.perf_counter()
    quad = c3_quadrature(omega, p, points_per_period=golden["points_per_period"],
                         t_cut_multiple=golden["t_cut_multiple"])
    elapsed = time.perf_counter() - start
    closed = c3_closed(omega, p)
    rel = abs(quad - closed) / abs(closed)
    ok = rel <= 5e-2 and elapsed < 60
    # the recorded residual is reproduced, so drift in either route shows up here
    ok = ok and rel == pytest.approx(golden["relative_residual"], rel=1e-6)
    ok = acceptance_report(2, "three-photon closed form vs quadrature", ok,
                           f"rel={rel:.3e} (golden {golden['relative_residual']:.3e}), "
                           f"{elapsed:.2f} s")
    assert ok


def test_perturbation_validity(acceptance_report):
    fwhm = 130e-6
    om = 0.1 / (4 * fwhm)
    p = pulse_from_rabi(om, om, 0.0, 0.0, fwhm)
    t = np.linspace(-4 * fwhm, 4 * fwhm, 200_001)
    max_area = np.max(np.abs(rabi_frequency(t, p))) * fwhm
    sys = SpinSystem.from_splitting(NU2)
    cfg = IntegratorConfig(samples=2)
    grid = ScanGrid(140 * KHZ, 160 * KHZ, 11)
    start = time.perf_counter()
    worst = 0.0
    for w in grid.omegas:
        pert = c_total(w, p).probability
        ode = abs(evolve_two_level(w, p, cfg, coupling=sys.coupling).final.c_a) ** 2
        worst = max(worst, abs(ode - pert) / pert)
    elapsed = time.perf_counter() - start
    ok = acceptance_report(3, "two-level ODE vs perturbative (max|Omega| T <= 0.1)",
                           max_area <= 0.1 + 1e-12 and worst <= 0.05 and elapsed < 30,
                           f"max|Omega|T={max_area:.4f}, worst rel={worst:.2e}, {elapsed:.1f} s")
    assert ok


def _random_rho(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_conservation_suite(acceptance_report):
    rng = np.random.default_rng(4242)
    cfg3 = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-11, samples=17)
    cfg2 = IntegratorConfig(samples=17)
    worst_trace = worst_herm = worst_norm = 0.0
    start = time.perf_counter()
    for _ in range(100):
        p = reference_pulse(rng.uniform(-math.pi, math.pi), rng.uniform(-math.pi, math.pi),
                        b1=rng.uniform(0, 10e-6), b2=rng.uniform(0, 2e-6)).with_(
            fwhm=rng.uniform(60e-6, 200e-6))
        omega = rng.uniform(100, 200) * KHZ
        sys = SpinSystem.from_splitting(omega)
        rho0 = _random_rho(rng)
        tr = evolve_density(sys, p, cfg3, rho0)
        for rho in tr.states:
            d = density_matrix_defects(rho)
            worst_trace = max(worst_trace, d["trace"])
            worst_herm = max(worst_herm, d["hermiticity"])
        phase = rng.uniform(0, TWO_PI)
        theta = rng.uniform(0, math.pi / 2)
        init = AmplitudePair(math.sin(theta) * np.exp(1j * phase), math.cos(theta) + 0j)
        tw = evolve_two_level(omega, p, cfg2, init, coupling=sys.coupling)
        norms = np.sum(np.abs(tw.states) ** 2, axis=1)
        worst_norm = max(worst_norm, float(np.max(np.abs(norms - 1))))
    elapsed = time.perf_counter() - start
    ok = (worst_trace <= 1e-10 and worst_herm <= 1e-10 and worst_norm <= 1e-9
          and elapsed < 300)
    ok = acceptance_report(4, "conservation over 100 random draws", ok,
                           f"trace {worst_trace:.1e}, hermiticity {worst_herm:.1e}, "
                           f"norm {worst_norm:.1e}, {elapsed:.0f} s")
    assert ok


def _dominant(peaks):
    return max(peaks, key=lambda pk: pk.height)


def test_interference_structure(acceptance_report):
    p = visibility_matched(reference_pulse(b1=4e-6))
    sys = SpinSystem.from_splitting(NU2)
    balance = abs(c1_closed(NU2, p)) / abs(c3_closed(NU2, p))
    grid = ScanGrid(100 * KHZ, 200 * KHZ, 201, phase_values=tuple(
        math.radians(x) for x in (0, 120, 180, 360)))
    s0, s120, s180, s360 = spectrum(grid, p, sys)
    counts = [len(find_peaks(s)) for s in (s0, s120, s180)]
    same = np.allclose(s0.signal, s360.signal, rtol=1e-12, atol=1e-12 * s0.signal.max())
    c0 = _dominant(find_peaks(s0)).omega_center
    c180 = _dominant(find_peaks(s180)).omega_center
    shift = abs(c0 - c180)
    ok = (abs(balance - 1) < 1e-12 and counts == [1, 2, 1] and same and shift > grid.step)
    ok = acceptance_report(5, "interference peak structure", ok,
                           f"peak counts at 0/120/180 deg = {counts} (want [1, 2, 1]), "
                           f"360 deg identical={same}, "
                           f"center shift={shift / KHZ:.3f} kHz vs step {grid.step / KHZ:.3f} kHz")
    assert ok


def test_phase_algebra(acceptance_report):
    rng = np.random.default_rng(7)
    p = visibility_matched(reference_pulse(b1=4e-6))
    omegas = np.linspace(130, 170, 81) * KHZ
    worst = 0.0
    for phi1, phi2 in rng.uniform(-math.pi, math.pi, (10, 2)):
        q = p.with_(phi1=phi1, phi2=phi2)
        r = q.with_(phi1=phi1 + TWO_PI / 3)
        for w in omegas:
            a, b = abs(c_total(w, q).total), abs(c_total(w, r).total)
            worst = max(worst, abs(a - b) / max(a, b, 1e-300))
    phis = np.linspace(0, TWO_PI, 37)
    values = [c_total(NU2, p.with_(phi2=x)).probability for x in phis]
    fit = fit_sinusoid(phis, values)
    period_err = abs(fit.period / TWO_PI - 1)
    ok = acceptance_report(6, "phase algebra", worst <= 1e-12 and period_err <= 0.01,
                           f"phi1 -> phi1 + 2pi/3 worst rel={worst:.1e}, "
                           f"fitted period error={period_err:.1e}")
    assert ok


def test_strong_drive_shift_direction(acceptance_report):
    sys = SpinSystem.from_splitting(NU2)
    cfg = IntegratorConfig(rel_tol=1e-7, abs_tol=1e-9, samples=2)
    grid = ScanGrid(126 * KHZ, 155 * KHZ, 30, model=Model.THREE_LEVEL)
    centers = []
    for b1 in (5e-6, 7e-6, 9e-6):
        (s,) = spectrum(grid, reference_pulse(b1=b1, b2=0.0), sys, cfg)
        centers.append(_dominant(find_peaks(s)).omega_center)
    shifts = [NU2 - c for c in centers]
    ok = all(c < NU2 for c in centers) and shifts[0] < shifts[1] < shifts[2]
    ok = acceptance_report(7, "strong-drive shift below 150 kHz, growing with B1", ok,
                           "centers " + ", ".join(f"{c / KHZ:.2f}" for c in centers) + " kHz")
    assert ok


def test_rk4_convergence_order(acceptance_report):
    sys = SpinSystem.from_splitting(NU2)
    h_z, h_x = hamiltonian_parts(sys)
    h = (h_z + 5e-6 * h_x) / HBAR
    psi0 = np.array([1, 0, 0], dtype=complex)
    t_end = 20e-6
    exact = expm(-1j * h * t_end) @ psi0
    steps = np.array([200, 400, 800, 1600])
    errs = [np.max(np.abs(rk4_fixed(lambda t, y: -1j * (h @ y), (0, t_end), psi0, n).y[-1]
                          - exact)) for n in steps]
    slope = -np.polyfit(np.log(steps), np.log(errs), 1)[0]
    ok = acceptance_report(8, "RK4 global convergence order", abs(slope - 4) <= 0.3,
                           f"slope={slope:.3f}")
    assert ok

"""CSV serialization of spectra, peaks, trajectories and model comparisons.

Signals are written with round-trip ``.17g`` formatting, frequencies and
phases with ``.15g``; no locale is involved, so identical runs give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from collections import OrderedDict

import numpy as np

from .dynamics import Trajectory
from .pulse import PulseParams
from .scan import Model, Peak, Spectrum
from .spin import M_F

SPECTRUM_COLUMNS = ("omega_khz", "signal", "model", "phi1_deg", "phi2_deg")
PEAK_COLUMNS = ("model", "phi1_deg", "phi2_deg", "omega_khz", "height", "width_khz")
COMPARE_COLUMNS = ("omega_khz", "phi1_deg", "phi2_deg", "signal_a", "signal_b", "rel_diff")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def fmt_unit(x: float) -> str:
    # kHz and degree columns: drop the last-bit noise of unit conversion
    return format(float(x), ".15g")


def to_khz(omega: float) -> float:
    return omega / (2 * math.pi) / 1e3


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def spectra_to_csv(spectra: list[Spectrum]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(SPECTRUM_COLUMNS)
    for s in spectra:
        phi1, phi2 = fmt_unit(math.degrees(s.phi1)), fmt_unit(math.degrees(s.phi2))
        for om, sig in zip(s.omega, s.signal):
            w.writerow([fmt_unit(to_khz(om)), fmt(sig), Model(s.model).value, phi1, phi2])
    return buf.getvalue()


def read_spectra_csv(text: str, template: PulseParams | None = None) -> list[Spectrum]:
    """Group rows by (model, phi1_deg, phi2_deg), keeping first-seen order.

    The returned spectra carry ``template`` (or a placeholder pulse) with the
    phases from the file; only omega/signal/model are needed downstream.
    """
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != SPECTRUM_COLUMNS:
        raise ValueError(f"spectrum CSV header must be {','.join(SPECTRUM_COLUMNS)}")
    groups: OrderedDict = OrderedDict()
    for row in reader:
        key = (row["model"], row["phi1_deg"], row["phi2_deg"])
        groups.setdefault(key, []).append((float(row["omega_khz"]), float(row["signal"])))
    base = template or PulseParams(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    out = []
    for (model, phi1, phi2), rows in groups.items():
        om = np.array([r[0] for r in rows]) * 2 * math.pi * 1e3
        sig = np.array([r[1] for r in rows])
        pulse = base.with_(phi1=math.radians(float(phi1)), phi2=math.radians(float(phi2)))
        out.append(Spectrum(om, sig, Model(model), pulse))
    return out


def peaks_to_csv(found: list[tuple[Spectrum, list[Peak]]]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(PEAK_COLUMNS)
    for s, peaks in found:
        for pk in peaks:
            w.writerow([Model(s.model).value, fmt_unit(math.degrees(s.phi1)),
                        fmt_unit(math.degrees(s.phi2)), fmt_unit(to_khz(pk.omega_center)),
                        fmt(pk.height), fmt_unit(to_khz(pk.width_fwhm))])
    return buf.getvalue()


def trajectory_columns(kind: str) -> list[str]:
    if kind == "two_level":
        return ["t_us", "ca_re", "ca_im", "cb_re", "cb_im"]
    names = {1: "p1", 0: "0", -1: "m1"}
    cols = ["t_us"]
    for mi in M_F:
        for mj in M_F:
            cols += [f"rho_{names[mi]}_{names[mj]}_re", f"rho_{names[mi]}_{names[mj]}_im"]
    return cols


def trajectory_to_csv(tr: Trajectory) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(trajectory_columns(tr.kind))
    flat = tr.states.reshape(len(tr.t), -1)
    for t, state in zip(tr.t, flat):
        row = [fmt(t * 1e6)]
        for z in state:
            row += [fmt(z.real), fmt(z.imag)]
        w.writerow(row)
    return buf.getvalue()


def relative_difference(a: float, b: float) -> float:
    """``|a - b| / max(|a|, |b|)``, zero when both vanish."""
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def comparison_to_csv(first: list[Spectrum], second: list[Spectrum]) -> tuple[str, float]:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(COMPARE_COLUMNS)
    worst = 0.0
    for sa, sb in zip(first, second):
        for om, a, b in zip(sa.omega, sa.signal, sb.signal):
            d = relative_difference(a, b)
            if math.isfinite(d):
                worst = max(worst, d)
            w.writerow([fmt_unit(to_khz(om)), fmt_unit(math.degrees(sa.phi1)),
                        fmt_unit(math.degrees(sa.phi2)), fmt(a), fmt(b), fmt(d)])
    return buf.getvalue(), worst

"""Command-line entry point.

Exit codes: 0 success, 1 usage, 2 config/input, 3 numeric failure. Output
files are written atomically, so a failed run leaves no partial CSV.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile

import yaml

from . import records
from .config import ConfigError, RunConfig, build_config, phases_deg
from .dynamics import AmplitudePair, evolve_density, evolve_two_level
from .figures import FIGURES, figure_config, run_figure
from .integrate import IntegrationError
from .scan import Model, find_peaks, phase_scan, spectrum
from .spin import pumped_initial_state, zeeman_splitting

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_document(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc.strerror}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(path, f"parse error: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(path, "top level must be a mapping")
    return doc


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _report_gaps(spectra):
    for s in spectra:
        for i, msg in sorted(s.failures.items()):
            print(f"warning: gap at omega={records.to_khz(s.omega[i]):.6g} kHz "
                  f"(phi2={math.degrees(s.phi2):g} deg): {msg}", file=sys.stderr)


def _with_model(cfg: RunConfig, model: str | None) -> RunConfig:
    if model is None:
        return cfg
    doc = dict(cfg.document)
    doc["model"] = model
    return build_config(doc)


def cmd_simulate(args, cfg: RunConfig) -> str:
    model = cfg.model
    if model is Model.PERTURBATIVE:
        raise UsageError("simulate needs model two_level_ode or three_level_dm")
    if model is Model.TWO_LEVEL:
        tr = evolve_two_level(zeeman_splitting(cfg.system), cfg.pulse, cfg.integrator,
                              AmplitudePair.ground(), coupling=cfg.system.coupling)
    else:
        tr = evolve_density(cfg.system, cfg.pulse, cfg.integrator, pumped_initial_state())
    print(f"accepted_steps={tr.accepted_steps} rejected_steps={tr.rejected_steps}",
          file=sys.stderr)
    return records.trajectory_to_csv(tr)


def cmd_spectrum(args, cfg: RunConfig) -> str:
    spectra = spectrum(cfg.grid, cfg.pulse, cfg.system, cfg.integrator, jobs=args.jobs)
    _report_gaps(spectra)
    return records.spectra_to_csv(spectra)


def cmd_phase_scan(args, cfg: RunConfig) -> str:
    phis = [math.radians(x) for x in (args.phases_deg or phases_deg(cfg.grid))]
    omega = (2 * math.pi * args.omega_khz * 1e3 if args.omega_khz is not None
             else zeeman_splitting(cfg.system))
    scan = phase_scan(phis, omega, cfg.pulse, cfg.system, cfg.model, cfg.integrator,
                      jobs=args.jobs)
    if scan.fit is not None:
        f = scan.fit
        print(f"fit offset={f.offset:.9g} amplitude={f.amplitude:.9g} "
              f"phase_deg={math.degrees(f.phase):.6g} period_deg={math.degrees(f.period):.6g} "
              f"rms_residual={f.residual:.3g}", file=sys.stderr)
    lines = [",".join(records.SPECTRUM_COLUMNS)]
    phi1 = records.fmt_unit(math.degrees(cfg.pulse.phi1))
    for phi, sig in zip(scan.phis, scan.signal):
        lines.append(",".join([records.fmt_unit(records.to_khz(omega)), records.fmt(sig),
                               scan.model.value, phi1, records.fmt_unit(math.degrees(phi))]))
    return "\n".join(lines) + "\n"


def cmd_peaks(args, cfg: RunConfig) -> str:
    try:
        with open(args.spectrum_csv, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(args.spectrum_csv, f"cannot read spectrum: {exc.strerror}") from exc
    try:
        spectra = records.read_spectra_csv(text)
    except (KeyError, ValueError) as exc:
        raise ConfigError(args.spectrum_csv, f"bad spectrum CSV: {exc}") from exc
    frac = cfg.peaks.min_height_frac if args.min_height_frac is None else args.min_height_frac
    window = cfg.peaks.smooth_window if args.smooth_window is None else args.smooth_window
    found = [(s, find_peaks(s, frac, window)) for s in spectra]
    for s, peaks in found:
        print(f"{s.model.value} phi1={math.degrees(s.phi1):g} phi2={math.degrees(s.phi2):g}: "
              f"{len(peaks)} peak(s)", file=sys.stderr)
    return records.peaks_to_csv(found)


def cmd_compare(args, cfg: RunConfig) -> str:
    runs = []
    for model in args.models:
        grid = type(cfg.grid)(cfg.grid.omega_min, cfg.grid.omega_max, cfg.grid.omega_points,
                              cfg.grid.phase_values, Model(model))
        spectra = spectrum(grid, cfg.pulse, cfg.system, cfg.integrator, jobs=args.jobs)
        _report_gaps(spectra)
        runs.append(spectra)
    text, worst = records.comparison_to_csv(*runs)
    print(f"max_rel_diff={records.fmt(worst)} ({args.models[0]} vs {args.models[1]})",
          file=sys.stderr)
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cepzeeman", description=__doc__.splitlines()[0])
    parser.add_argument("--jobs", type=int, default=1, help="concurrent grid evaluations")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(name, help_, config_required=True):
        sp = sub.add_parser(name, help=help_)
        if config_required:
            sp.add_argument("config", help="YAML run configuration")
        sp.add_argument("-o", "--output", help="output CSV (default: config output or stdout)")
        return sp

    sp = add("simulate", "evolve one trajectory at the configured splitting")
    sp.add_argument("--model", choices=[Model.TWO_LEVEL.value, Model.THREE_LEVEL.value])
    sp = add("spectrum", "signal vs Zeeman splitting for each configured phi2")
    sp.add_argument("--model", choices=[m.value for m in Model])
    sp = add("phase-scan", "signal vs phi2 at fixed splitting")
    sp.add_argument("--model", choices=[m.value for m in Model])
    sp.add_argument("--omega-khz", type=float, help="fixed splitting (default: system)")
    sp.add_argument("--phases-deg", type=lambda s: [float(x) for x in s.split(",")],
                    help="comma-separated phi2 values (default: grid.phases_deg)")
    sp = add("peaks", "find peaks in a spectrum CSV", config_required=False)
    sp.add_argument("spectrum_csv")
    sp.add_argument("--config")
    sp.add_argument("--min-height-frac", type=float)
    sp.add_argument("--smooth-window", type=int)
    sp = add("compare", "run two models on one grid")
    sp.add_argument("--models", nargs=2, default=[Model.PERTURBATIVE.value, Model.TWO_LEVEL.value],
                    choices=[m.value for m in Model])
    sp = add("figure", "run a canned figure recipe", config_required=False)
    sp.add_argument("name", choices=FIGURES)
    sp.add_argument("--config", help="YAML overrides for the recipe")
    sp.add_argument("--disable-nu2", action="store_true", help="zero the nu2 amplitude")
    return parser


def _run(argv) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if args.command == "figure":
        cfg = figure_config(args.name, _read_document(args.config), args.disable_nu2)
        spectra = run_figure(args.name, cfg, jobs=args.jobs)
        _report_gaps(spectra)
        _emit(records.spectra_to_csv(spectra), args.output or cfg.output)
        return EXIT_OK
    if args.command == "peaks":
        cfg = build_config(_read_document(args.config))
    else:
        cfg = build_config(_read_document(args.config))
        cfg = _with_model(cfg, getattr(args, "model", None))
    handler = {
        "simulate": cmd_simulate,
        "spectrum": cmd_spectrum,
        "phase-scan": cmd_phase_scan,
        "peaks": cmd_peaks,
        "compare": cmd_compare,
    }[args.command]
    text = handler(args, cfg)
    _emit(text, args.output or cfg.output)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return _run(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, IntegrationError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()

"""Command-line entry point: ``chirpqpm <command> [options]``.

Commands: simulate, peaks, sweep, optimize, factor, validate, fixtures.
Exit status: 0 success, 2 configuration error, 3 numeric error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, config, engine, fixtures, gaussfactor, optimize, spectra
from .model import AperiodicPolingSpec, PeriodicPolingSpec, PhotonicChirpSpec, ValidationError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
THREADS_ENV = "CHIRPQPM_THREADS"

SPECTRUM_FIELDS = ("omega_over_c_um_inv", "wavelength_um", "density_norm")
VALIDATE_TOL = 1e-9
FALLBACK_TOL = 1e-7
# |dk| * l_max below this counts as the near-zero-mismatch window
FALLBACK_WINDOW = 1e-4


class UsageError(Exception):
    """Inconsistent command-line options (reported as a configuration error)."""


# ---------------------------------------------------------------- output


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".9g")


def format_table(fields, rows, fmt: str = "csv") -> str:
    """Deterministic text: CSV with a header, or one JSON object per row."""
    out = []
    if fmt == "csv":
        out.append(",".join(fields))
        for row in rows:
            out.append(",".join(v if isinstance(v, str) else _num(v) for v in row))
    else:
        for row in rows:
            items = []
            for k, v in zip(fields, row):
                if isinstance(v, str):
                    text = json.dumps(v)
                else:
                    text = _num(v)
                    if text in ("nan", "inf", "-inf"):
                        text = "null"
                items.append(f"{json.dumps(k)}: {text}")
            out.append("{" + ", ".join(items) + "}")
    return "\n".join(out) + "\n"


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------- inputs


def resolve_threads(flag: int | None, environ=os.environ) -> int:
    """Explicit flag wins, then the environment variable, then 1.  0 means all cores."""
    if flag is None:
        raw = environ.get(THREADS_ENV)
        if raw is None or raw.strip() == "":
            return 1
        try:
            flag = int(raw)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if flag < 0:
        raise UsageError("thread count must be >= 0")
    return flag if flag > 0 else (os.cpu_count() or 1)


def _load_config(args) -> config.RunConfig:
    if getattr(args, "config", None) and getattr(args, "fixture", None):
        raise UsageError("give either --config or --fixture, not both")
    if getattr(args, "fixture", None):
        fx = fixtures.get(args.fixture)
        cfg = config.RunConfig(fx.structure, fx.dispersion, fx.grid)
    elif getattr(args, "config", None):
        cfg = config.load(args.config)
    else:
        cfg = config.RunConfig()
    if getattr(args, "method", None):
        cfg.method = config.METHOD_NAMES[args.method]
    if getattr(args, "format", None):
        cfg.format = args.format
    if getattr(args, "out", None):
        cfg.out = args.out
    return cfg


def _need(cfg: config.RunConfig, *parts):
    for part in parts:
        if getattr(cfg, part) is None:
            raise config.ConfigError(f"missing [{part}] section", source=cfg.source)


def _grid(cfg):
    return cfg.grid if cfg.grid is not None else spectra.auto_grid(cfg.structure, cfg.dispersion)


# ---------------------------------------------------------------- commands


def cmd_simulate(args, cfg, threads):
    _need(cfg, "structure", "dispersion")
    sr = spectra.evaluate_spectrum(cfg.structure, cfg.dispersion, _grid(cfg), cfg.method, threads)
    rows = zip(sr.omega, sr.signal_wavelength, sr.density)
    _emit(format_table(SPECTRUM_FIELDS, rows, cfg.format), cfg.out)


def cmd_peaks(args, cfg, threads):
    _need(cfg, "structure", "dispersion")
    sr = spectra.evaluate_spectrum(cfg.structure, cfg.dispersion, _grid(cfg), cfg.method, threads)
    fields = ("source", "omega_over_c_um_inv", "wavelength_um", "height", "width_omega_over_c", "resolved")
    rows = []
    sets = []
    if isinstance(cfg.structure, PhotonicChirpSpec):
        sets.append(("predicted", spectra.predict_peaks(cfg.structure, cfg.dispersion)))
    sets.append(("detected", spectra.detect_peaks(sr, args.threshold, args.min_prominence)))
    for name, ps in sets:
        for p in ps.peaks:
            rows.append((name, p.omega_over_c, p.wavelength, p.height, p.width, ps.resolved))
    _emit(format_table(fields, rows, cfg.format), cfg.out)


def cmd_sweep(args, cfg, threads):
    _need(cfg, "structure", "dispersion")
    if "sweep" not in cfg.sections:
        raise config.ConfigError("missing [sweep] section", source=cfg.source)
    param = cfg.text("sweep", "parameter")
    objectives = tuple(s.strip() for s in cfg.text("sweep", "objectives", "bandwidth").split(","))
    values = cfg.numbers("sweep", "values", unit_key=param)
    try:
        spec = optimize.SweepSpec(cfg.structure, cfg.dispersion, param, tuple(values), objectives, cfg.grid,
                                  cfg.method, cfg.text("sweep", "hold", "length"))
    except ValueError as exc:
        e = cfg.entry("sweep", "parameter")
        raise config.ConfigError(str(exc), e.line if e else None, cfg.source) from None
    rows = optimize.sweep(spec, threads)
    fields = ("value",) + objectives + ("error",)
    table = [(r.value,) + tuple(r.objectives[o] if r.objectives else math.nan for o in objectives)
             + (r.error or "",) for r in rows]
    _emit(format_table(fields, table, cfg.format), cfg.out)


def cmd_optimize(args, cfg, threads):
    _need(cfg, "dispersion")
    n = args.n_layers if args.n_layers is not None else cfg.number("optimize", "n_layers", integer=True)
    L = args.total_length if args.total_length is not None else cfg.number("optimize", "total_length")
    objective = cfg.text("optimize", "objective", "bandwidth")
    seeds = cfg.numbers("optimize", "seeds", unit_key="zeta") if cfg.entry("optimize", "seeds") else (2.82,)
    res = optimize.optimize_zeta(n, L, cfg.dispersion, objective,
                                 cfg.grid if cfg.grid is not None else spectra.DEFAULT_GRID, seeds,
                                 cfg.number("optimize", "n_coarse", 32, integer=True),
                                 cfg.number("optimize", "rtol", 1e-3), cfg.method)
    k = max(range(len(res.trace)), key=lambda i: res.trace[i][1])
    rows = [(z, v, i == k) for i, (z, v) in enumerate(res.trace)]
    _emit(format_table(("zeta_um", objective, "best"), rows, cfg.format), cfg.out)


def cmd_factor(args, cfg, threads):
    n = args.n if args.n is not None else cfg.number("factor", "n", integer=True)
    m = args.m if args.m is not None else cfg.number("factor", "m", 8, integer=True)
    thr = args.threshold if args.threshold is not None else cfg.number("factor", "threshold",
                                                                        gaussfactor.THRESHOLD)
    res = gaussfactor.factor_scan(n, m, thr)
    accepted = set(res.accepted)
    rows = [("trial", ell, v, ell in accepted) for ell, v in res.candidates]
    trials = {ell for ell, _ in res.candidates}
    for c in res.accepted:
        if c not in trials:
            rows.append(("cofactor", c, gaussfactor.factor_magnitude(n, c, m), True))
    _emit(format_table(("role", "ell", "magnitude", "accepted"), rows, cfg.format), cfg.out)


def _window(spec, d, w):
    lmax = float(spectra.build_layers(spec).lengths.max())
    return np.abs(np.asarray(engine.phase_mismatch(w, d))) * lmax < FALLBACK_WINDOW


def validate_rows(named, threads: int = 1, stride: int = 1):
    """Pairwise max relative deviation between all forms, per structure."""
    jobs = []
    for name, spec, d, grid in named:
        w = grid.points[::stride]
        for s in range(0, w.size, spectra.BLOCK):
            jobs.append((name, spec, d, w[s:s + spectra.BLOCK]))

    def run(job):
        _, spec, d, wb = job
        return spectra.form_densities(spec, d, wb)

    if threads == 1:
        parts = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, jobs))
    rows = []
    for name, spec, d, grid in named:
        mine = [p for j, p in zip(jobs, parts) if j[0] == name]
        forms = {k: np.concatenate([p[k] for p in mine]) for k in mine[0]}
        w = grid.points[::stride]
        win = _window(spec, d, w)
        for a, b in itertools.combinations(forms, 2):
            peak = max(float(np.max(forms[a])), float(np.max(forms[b])))
            out = spectra.max_rel_dev(forms[a][~win], forms[b][~win], peak=peak)
            rows.append((name, a, b, "regular", out, VALIDATE_TOL, out < VALIDATE_TOL))
            if win.any():
                near = spectra.max_rel_dev(forms[a][win], forms[b][win], peak=peak)
                rows.append((name, a, b, "near_zero_dk", near, FALLBACK_TOL, near < FALLBACK_TOL))
    return rows


def cmd_validate(args, cfg, threads):
    if cfg.structure is not None:
        _need(cfg, "dispersion")
        named = [(args.fixture or "config", cfg.structure, cfg.dispersion, _grid(cfg))]
    else:
        named = [(f.name, f.structure, f.dispersion, f.grid) for f in fixtures.FIXTURES.values()]
    rows = validate_rows(named, threads, args.stride)
    fields = ("structure", "form_a", "form_b", "region", "max_rel_dev", "tolerance", "pass")
    _emit(format_table(fields, rows, cfg.format), cfg.out)
    return EXIT_OK if all(r[-1] for r in rows) else EXIT_NUMERIC


def cmd_fixtures(args, cfg, threads):
    names = [args.name] if args.name else list(fixtures.FIXTURES)
    texts = {}
    for name in names:
        fx = fixtures.get(name)
        comments = (f"{fx.name}: {fx.description}",) + tuple(f"flag: {f}" for f in fx.flags)
        texts[name] = config.dump(config.RunConfig(fx.structure, fx.dispersion, fx.grid), comments)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, text in texts.items():
            with open(os.path.join(args.out, f"{name}.ini"), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    else:
        _emit("\n".join(texts.values()), None)


COMMANDS = {
    "simulate": cmd_simulate,
    "peaks": cmd_peaks,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "factor": cmd_factor,
    "validate": cmd_validate,
    "fixtures": cmd_fixtures,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run configuration file")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=config.FORMATS, help="output format (default csv)")
    common.add_argument("--method", choices=tuple(config.METHOD_NAMES), help="evaluation path")
    common.add_argument("--threads", type=int, metavar="K",
                        help=f"worker threads, 0 = all cores (default: ${THREADS_ENV} or 1)")

    p = argparse.ArgumentParser(prog="chirpqpm", description="Biphoton spectra of chirped layered crystals.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    for name in ("simulate", "peaks", "validate"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--fixture", choices=tuple(fixtures.FIXTURES), help="use a built-in parameter set")
    sub.choices["peaks"].add_argument("--threshold", type=float, default=0.1,
                                      help="relative height threshold (default 0.1)")
    sub.choices["peaks"].add_argument("--min-prominence", type=float, default=0.0,
                                      help="drop maxima less prominent than this fraction of the max")
    sub.choices["validate"].add_argument("--stride", type=int, default=1,
                                         help="use every K-th grid point (default 1)")
    sub.add_parser("sweep", parents=[common])
    sp = sub.add_parser("optimize", parents=[common])
    sp.add_argument("--n-layers", type=int)
    sp.add_argument("--total-length", type=float, help="um")
    sp = sub.add_parser("factor", parents=[common])
    sp.add_argument("--n", type=int, help="number under test")
    sp.add_argument("--m", type=int, help="truncation (default 8)")
    sp.add_argument("--threshold", type=float, help="acceptance level (default 1/sqrt(2))")
    sp = sub.add_parser("fixtures", parents=[common])
    sp.add_argument("--name", choices=tuple(fixtures.FIXTURES))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = resolve_threads(args.threads)
        if getattr(args, "stride", 1) < 1:
            raise UsageError("--stride must be >= 1")
        cfg = _load_config(args)
        status = COMMANDS[args.command](args, cfg, threads)
    except (config.ConfigError, UsageError) as exc:
        print(f"chirpqpm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error of ours
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        print(f"chirpqpm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, ValueError, ArithmeticError) as exc:
        print(f"chirpqpm: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return status or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

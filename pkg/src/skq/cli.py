"""Command line driver: one experiment per invocation, config in, files out.

    skq run <config> [--threads T] [--output-dir D]
    skq validate <config>
    skq list-experiments

Typed failures exit with the ``exit_code`` of their error class; usage
errors exit 2 and unreadable files 3.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import ensemble, exports, koopman, quasienergy
from .config import DESCRIPTIONS, Experiment, ExperimentConfig, load_config
from .errors import SKQError
from .torus import MapKind

IO_EXIT = 3


def _branch(cfg: ExperimentConfig, label=None):
    branches = quasienergy.fundamental_branches(cfg.kick, cfg.map, np.array(cfg.anchor), cfg.cycle_length)
    return quasienergy.select_branch(branches, label or cfg.branch)


def _state_field(cfg: ExperimentConfig, threads):
    """Quasienergy-state field of the configured branch on the configured grid."""
    if cfg.map.kind is MapKind.CyclicCat:
        return quasienergy.cyclic_field_superposition(cfg.kick, cfg.map, cfg.grid, cfg.branch)
    return quasienergy.quasienergy_field(_branch(cfg), cfg.kick, cfg.map, cfg.grid, cfg.N_average, threads=threads)


def _spectrum(cfg, out, threads):
    G = cfg.grid
    files = []
    for label in ("Up", "Down"):
        if cfg.map.kind is MapKind.CyclicCat:
            f = quasienergy.cyclic_field_superposition(cfg.kick, cfg.map, G, label)
            chi = f.metadata["chi"]
        else:
            # away from cycles the fundamental quasienergy is the anchored constant
            chi = np.full((G, G), _branch(cfg, label).chi)
        path = out / f"spectrum_{label.lower()}.csv"
        exports.write_field(path, chi, np.ones((G, G), dtype=bool), cfg.sha256)
        files.append((path, f"chi_{label.lower()} on {G}x{G} grid, range [{np.nanmin(chi):.6f}, {np.nanmax(chi):.6f}]"))
    return files


def _qfield(cfg, out, threads):
    f = _state_field(cfg, threads)
    paths = exports.write_occupation(out, f, cfg.sha256, stem="field")
    flagged = f.flagged()
    mask = out / "mask.pgm"
    exports.write_pgm(mask, flagged.astype(float), np.ones_like(flagged), cfg.sha256)
    valid = f.valid.mean()
    return [
        (paths[0], f"occupation field, {100 * valid:.2f}% valid cells"),
        (paths[1], "occupation heatmap"),
        (mask, f"flagged-cell mask, {100 * flagged.mean():.2f}% flagged"),
    ]


def _skmode(cfg, out, threads):
    f = quasienergy.sk_mode_field(_branch(cfg), cfg.kick, cfg.map, cfg.grid, cfg.N_average, threads=threads)
    paths = exports.write_occupation(out, f, cfg.sha256, stem="sk_mode")
    return [(paths[0], f"SK-mode occupation, {100 * f.valid.mean():.2f}% nonzero cells"), (paths[1], "SK-mode heatmap")]


def _initial_condition(cfg, threads):
    spec = cfg.initial_condition
    field = None
    if spec.spatial == "FieldWeighted" or spec.spin == "FromField":
        field = _state_field(cfg, threads)
    if spec.spatial == "UniformSquare":
        spatial = ensemble.UniformSquare(spec.center, spec.side)
    elif spec.spatial == "UniformTorus":
        spatial = ensemble.UniformTorus()
    else:
        spatial = ensemble.FieldWeighted(field)
    if spec.spin == "FixedState":
        spin = ensemble.FixedState(spec.psi)
    else:
        spin = ensemble.FromField(field)
    return ensemble.InitialCondition(spatial, spin)


def _dynamics(cfg, out, threads):
    ic = _initial_condition(cfg, threads)
    series = ensemble.run_experiment(ic, cfg.kick, cfg.map, cfg.N_ensemble, cfg.steps, cfg.seed, threads)
    path = out / "timeseries.csv"
    exports.write_timeseries(path, series, cfg.sha256)
    final = ensemble.final_field(series.meta["final"], cfg.grid)
    paths = exports.write_occupation(out, final, cfg.sha256, stem="final_field")
    return [
        (path, f"{len(series)} steps, final entropy {series.entropy_nats[-1]:.6f} nats"),
        (paths[0], f"final occupation field, {100 * final.valid.mean():.2f}% occupied cells"),
        (paths[1], "final occupation heatmap"),
    ]


def _phase(cfg, out, threads):
    branch = _branch(cfg)
    ledger = quasienergy.phase_decomposition(
        branch, cfg.kick, cfg.map, np.array(cfg.theta0), cfg.steps, N_V=cfg.N_average, threads=threads
    )
    rows = [
        (str(k + 1), d.real, d.imag, g.real, g.imag)
        for k, (d, g) in enumerate(zip(ledger.dynamical_series, ledger.geometric_series))
    ]
    path = out / "phase.csv"
    exports.write_rows(path, "n,dynamical_re,dynamical_im,geometric_re,geometric_im", rows, cfg.sha256)
    diff = ledger.difference
    return [(path, f"Re(dynamical - geometric) = {diff.real:.6f}, chi = {branch.chi:.6f}")]


def _correlation(cfg, out, threads):
    f = koopman.fourier(1, 0)
    rows = []
    for t in range(cfg.steps + 1):
        est, se = koopman.correlation(cfg.map, f, f, t, cfg.samples, cfg.seed)
        rows.append((str(t), est.real, est.imag, se))
    path = out / "correlation.csv"
    exports.write_rows(path, "t,estimate_re,estimate_im,stderr", rows, cfg.sha256)
    return [(path, f"autocorrelation of exp(i theta1) at lags 0..{cfg.steps}")]


RUNNERS = {
    Experiment.QuasienergySpectrum: _spectrum,
    Experiment.QuasienergyField: _qfield,
    Experiment.SKModeField: _skmode,
    Experiment.EnsembleDynamics: _dynamics,
    Experiment.PhaseDecomposition: _phase,
    Experiment.CorrelationScan: _correlation,
}


def run(cfg: ExperimentConfig, output_dir=None, threads: int = 1):
    """Run one experiment and return [(path, summary)] for the files written."""
    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg.experiment](cfg, out, threads)


def _parser():
    p = argparse.ArgumentParser(prog="skq", description="Schroedinger-Koopman quasienergy experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--output-dir", default=None)
    v = sub.add_parser("validate", help="parse and validate a config file")
    v.add_argument("config")
    sub.add_parser("list-experiments", help="list the available experiments")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-experiments":
            for exp in Experiment:
                print(f"{exp.value}: {DESCRIPTIONS[exp]}")
            return 0
        cfg = load_config(args.config)
        if args.command == "validate":
            print(f"ok: {cfg.experiment.value} on {cfg.map.kind.value}, config-sha256={cfg.sha256}")
            return 0
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        for path, summary in run(cfg, args.output_dir, args.threads):
            print(f"{path}: {summary}")
        return 0
    except SKQError as exc:
        where = ""
        if getattr(exc, "line", None) is not None:
            where = f" (line {exc.line})"
        elif getattr(exc, "field", None) is not None:
            where = f" (field {exc.field})"
        print(f"error: {type(exc).__name__}{where}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return IO_EXIT


if __name__ == "__main__":
    sys.exit(main())

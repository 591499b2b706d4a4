"""Command-line entry point: ``spinllg simulate|oracle|compare|sweep|analyze``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import math
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, export, oracle, semiclassical
from .backend import NAME as BACKEND
from .config import MODES, ConfigError, RunSpec, emit_config, parse_config
from .errors import SpinLLGError, WindowError

log = logging.getLogger("spinllg")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


def _simulate(spec: RunSpec) -> semiclassical.Trajectory:
    traj = semiclassical.integrate(spec.a, spec.b, spec.params, spec.integrator)
    if np.linalg.norm(traj.m[0]) < 1e-12:
        log.warning("initial <m> is zero for a=%g, b=%g: the composite spin stays zero",
                    spec.a, spec.b)
    return traj


def _oracle(spec: RunSpec, times) -> oracle.OracleResult:
    res = oracle.simulate(spec.params, spec.a, spec.b, times,
                          n_modes=spec.n_modes, n_max=spec.n_max)
    if res.truncation_flagged:
        log.warning("bath occupation exceeded %.3g (half the cutoff n_max=%d); "
                    "truncation error may be significant",
                    0.5 * spec.n_max, spec.n_max)
    return res


def run_simulate(spec: RunSpec, out: Path):
    traj = _simulate(spec)
    export.export_csv(traj, out / "trajectory.csv")
    export.export_svg(traj, "S", out / "s_components.svg")
    export.export_svg(traj, "m", out / "m_components.svg")
    export.export_svg(traj, "3d", out / "trajectory3d.svg")
    (out / "config.txt").write_text(emit_config(spec))
    return traj


def run_oracle(spec: RunSpec, out: Path):
    times = spec.integrator.sample_times()
    res = _oracle(spec, times)
    export.write_table(
        out / "oracle.csv", "t,Sx,Sy,Sz,mx,my,mz,S_norm,energy,norm,max_occupation",
        [res.t, res.S, res.m, np.linalg.norm(res.S, axis=1), res.energy, res.norm,
         res.occupations.max(axis=1) if res.occupations.size else np.zeros(len(res.t))])
    report = oracle.verify_identities()
    text = report.format()
    text += f"hilbert_dim {res.bath.hilbert_dim}\n"
    text += f"energy_drift {np.ptp(res.energy):.3e}\n"
    text += f"norm_drift {np.max(np.abs(res.norm - 1.0)):.3e}\n"
    text += f"truncation_flagged {res.truncation_flagged}\n"
    (out / "identity_report.txt").write_text(text)
    return res


def run_compare(spec: RunSpec, out: Path):
    traj = _simulate(spec)
    res = _oracle(spec, traj.t)
    dS = res.S - traj.S
    dm = res.m - traj.m
    export.write_table(
        out / "compare.csv",
        "t,Sx_sc,Sy_sc,Sz_sc,Sx_q,Sy_q,Sz_q,dSx,dSy,dSz,mx_sc,my_sc,mz_sc,mx_q,my_q,mz_q,"
        "dmx,dmy,dmz",
        [traj.t, traj.S, res.S, dS, traj.m, res.m, dm])
    summary = (f"max_abs_delta_S {np.max(np.abs(dS)):.6e}\n"
               f"max_abs_delta_m {np.max(np.abs(dm)):.6e}\n")
    (out / "compare_summary.txt").write_text(summary)
    return float(np.max(np.abs(dS)))


def _sweep_point(args):
    spec, out = args
    out.mkdir(parents=True, exist_ok=True)
    traj = run_simulate(spec, out)
    try:
        t1 = analysis.fit_T1(traj).T1
    except WindowError as exc:
        log.warning("%s: %s", out.name, exc)
        t1 = math.nan
    p = spec.params
    try:
        formula = analysis.t1_formula(p.eta, p.eps, float(traj.S_norm[0]))
    except ValueError:
        formula = math.nan
    return t1, formula


def run_sweep(spec: RunSpec, out: Path, jobs: int = 1):
    points = [(spec.with_value(spec.sweep_key, v), out / f"{spec.sweep_key}={v!r}")
              for v in spec.sweep_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, points))
    else:
        results = [_sweep_point(pt) for pt in points]
    rows = [(v, t1, f, t1 / f if f else math.nan)
            for v, (t1, f) in zip(spec.sweep_values, results)]
    with open(out / "sweep_summary.csv", "w", newline="\n") as fh:
        fh.write(f"{spec.sweep_key},T1_fit,T1_formula,ratio\n")
        for row in rows:
            fh.write(",".join(export.fmt(x) if math.isfinite(x) else "nan" for x in row) + "\n")
    return rows


def run_analyze(spec: RunSpec, out: Path):
    traj = _simulate(spec)
    fit = analysis.fit_T1(traj)
    t_end = float(traj.t[-1])
    window = (0.5 * t_end, t_end)
    osc = analysis.oscillation_metrics(traj, window)
    p = spec.params
    lines = [
        f"T1 {fit.T1:.9g}",
        f"T1_fit_window {fit.window[0]:.6g} {fit.window[1]:.6g}",
        f"T1_fit_residual {fit.residual:.3e}",
        "S_stationary " + " ".join(f"{v:.9g}" for v in fit.S_stationary),
    ]
    if p.eta > 0 and p.eps != 0:
        lines.append(f"T1_formula {analysis.t1_formula(p.eta, p.eps, float(traj.S_norm[0])):.9g}")
    lines += [
        f"oscillation_window {window[0]:.6g} {window[1]:.6g}",
        f"m_frequency {osc.frequency:.9g}",
        f"m_frequency_predicted "
        f"{np.linalg.norm(semiclassical.effective_field_m(fit.S_stationary, p)):.9g}",
        f"phase_xy {osc.phase_xy:.9g}",
        f"persistence_ratio {osc.persistence_ratio:.9g}",
    ]
    (out / "metrics.txt").write_text("\n".join(lines) + "\n")
    return fit, osc


def run(spec: RunSpec, jobs: int = 1) -> int:
    """Execute ``spec`` into ``spec.out_dir``; outputs appear only on success."""
    out = Path(spec.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    except OSError as exc:
        log.error("cannot create output directory %s: %s", out, exc)
        return EXIT_RUNTIME
    try:
        if spec.mode == "simulate":
            run_simulate(spec, staging)
        elif spec.mode == "oracle":
            run_oracle(spec, staging)
        elif spec.mode == "compare":
            run_compare(spec, staging)
        elif spec.mode == "sweep":
            run_sweep(spec, staging, jobs)
        elif spec.mode == "analyze":
            run_analyze(spec, staging)
        else:
            raise ConfigError(f"unknown mode {spec.mode!r}")
        for item in sorted(staging.iterdir()):
            dest = out / item.name
            if dest.is_dir():
                shutil.rmtree(dest)
            item.replace(dest)
    except (SpinLLGError, ValueError, ArithmeticError, OSError) as exc:
        log.error("%s failed: %s", spec.mode, exc)
        return EXIT_RUNTIME
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spinllg", description=__doc__.splitlines()[0])
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", type=Path, help="key = value config file")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key (repeatable)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            log.error("cannot read config %s: %s", args.config, exc)
            return EXIT_USAGE
    try:
        spec = parse_config(text, args.mode, args.out, args.overrides)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    log.info("running %s with the %s kernels", spec.mode, BACKEND)
    return run(spec, jobs=max(1, args.jobs))


if __name__ == "__main__":
    sys.exit(main())

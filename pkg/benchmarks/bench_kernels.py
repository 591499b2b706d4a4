"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py            # reference run, t_end=200
    python benchmarks/bench_kernels.py --t-end 20 --repeat 5
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from spinllg import _fallback
from spinllg.core import ModelParams
from spinllg.semiclassical import IntegratorConfig, initial_expectations

try:
    from spinllg import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def run_once(kernels, p: ModelParams, cfg: IntegratorConfig):
    S0, m0 = initial_expectations(0.7, 0.3)
    y0 = np.concatenate([S0, m0])
    params = (p.J, p.eta, p.omega_c, p.h, 0.0, p.eps)
    t0 = time.perf_counter()
    out, n_acc, n_rej, status, _ = kernels.integrate(
        y0, tuple(S0), params, cfg.rel_tol, cfg.abs_tol, cfg.dt_init,
        cfg.resolved_dt_max(p), cfg.sample_times())
    return time.perf_counter() - t0, out, n_acc + n_rej


def bench(t_end: float = 200.0, repeat: int = 3) -> dict:
    p = ModelParams()
    cfg = IntegratorConfig(t_end=t_end)
    results = {}
    backends = [("python", _fallback)] + ([("compiled", _compiled)] if _compiled else [])
    for name, kernels in backends:
        runs = [run_once(kernels, p, cfg) for _ in range(repeat)]
        best = min(r[0] for r in runs)
        results[name] = dict(seconds=best, steps=runs[0][2], out=runs[0][1])
    if "compiled" in results:
        results["max_abs_diff"] = float(np.max(np.abs(
            results["compiled"]["out"] - results["python"]["out"])))
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-end", type=float, default=200.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    res = bench(args.t_end, args.repeat)
    for name in ("python", "compiled"):
        if name in res:
            r = res[name]
            print(f"{name:9s} {r['seconds']:8.3f} s  {r['steps']:7d} steps  "
                  f"{1e6 * r['seconds'] / r['steps']:7.2f} us/step")
    if "compiled" in res:
        speedup = res["python"]["seconds"] / res["compiled"]["seconds"]
        print(f"speedup   {speedup:8.1f}x  max |difference| {res['max_abs_diff']:.1e}")
    else:
        print("compiled extension not available")
    return 0 if math.isfinite(res["python"]["seconds"]) else 1


if __name__ == "__main__":
    raise SystemExit(main())

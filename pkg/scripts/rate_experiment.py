"""Empirical convergence rate of the rw estimator under the bandwidth schedule.

    python scripts/rate_experiment.py --c 1.0 1.5 --ns 500 2000 8000 32000

For each schedule constant ``c`` the fitted slope of log(median abs error)
against log(n) is reported per seed, next to the target -1/(m+4).
"""
import argparse

import numpy as np

from laplace_limits.harness import ExperimentConfig, estimate_rate, run_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="box2_uniform")
    ap.add_argument("--function", default="paper_sine")
    ap.add_argument("--c", type=float, nargs="+", default=[1.5])
    ap.add_argument("--ns", type=int, nargs="+", default=[500, 2000, 8000])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--lam", type=float, default=0.0)
    ap.add_argument("--kind", default="rw")
    ap.add_argument("--margin", type=float, default=2.0, help="boundary margin factor")
    ap.add_argument("--out", help="write the report for the last c here")
    args = ap.parse_args()

    print(f"target slope -1/(m+4) = {-1 / 6:.4f}")
    for c in args.c:
        cfg = ExperimentConfig(model=args.model, function=args.function, ns=args.ns, schedule_c=c,
                               lambdas=[args.lam], kinds=[args.kind], seeds=args.seeds,
                               boundary_margin_factor=args.margin)
        report = run_convergence(cfg)
        slopes = []
        for s in args.seeds:
            try:
                slopes.append(estimate_rate(report, args.lam, args.kind, seed=s)[0])
            except ValueError:
                slopes.append(float("nan"))
        print(f"c={c:g}: slopes {' '.join(f'{v:+.3f}' for v in slopes)}  mean {np.nanmean(slopes):+.3f}"
              f"  failed cells {len(report.failures)}")
        if args.out:
            report.write(args.out)


if __name__ == "__main__":
    main()

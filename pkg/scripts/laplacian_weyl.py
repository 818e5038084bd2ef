#!/usr/bin/env python3
"""Weyl distribution of the discrete Laplacian sequence T_n(2 - 2 cos theta).

Runs an eigenvalue-mode distribution check over a size sweep, prints the
per-test-function error table, and writes the CSV/SVG artifacts.

Usage: python scripts/laplacian_weyl.py [out_dir]
"""

import sys

from gltlab.cli import ExperimentConfig, run_experiment


def main() -> int:
    out = sys.argv[1] if len(sys.argv) > 1 else "out/laplacian"
    cfg = ExperimentConfig(
        kind="distribution",
        expr="T(2-2*cos(t1))",
        d=1,
        sizes=[(64,), (128,), (256,), (512,)],
        mode="lambda",
        tolerance=0.05,
        out=out,
        plot=True,
    )
    result = run_experiment(cfg)
    for check in result.summary["checks"]:
        print(f"{check['name']}: error {check['error_at_largest']:.3e} "
              f"(tol {check['tolerance']})")
    print(f"verdict: {result.summary['verdict']}; artifacts in {out}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())

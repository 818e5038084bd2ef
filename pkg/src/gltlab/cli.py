"""Config-driven experiment runner binding all modules.

Experiments are described by line-oriented config files::

    [experiment]
    kind = distribution          ; distribution | acs | zero | sacs | spectrum | glt5
    d = 1
    expr = T(2-2*cos(t1))
    sizes = 64; 128; 256         ; multi-indices separated by ';' (',' within)
    mode = lambda
    seed = 1234
    out = out/laplacian

    [tolerances]
    tolerance = 0.05
    slack = 1.5

Artifacts (CSV reports, a JSON summary, optional SVG) are written atomically;
given identical config and seed the bytes are identical across runs.  Exit
codes: 0 all verdicts PASS, 1 failed verdict, 2 usage/config error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import acs as acs_mod
from . import dsl
from .errors import (
    CalculusError,
    ConfigurationError,
    DslSyntaxError,
    EvaluationError,
    GltLabError,
    IndexRangeError,
    InvalidParameterError,
    InvalidSizeError,
    ModeError,
    QuadratureError,
    SingularEvaluationError,
    SizeCapError,
    SolverError,
)
from .gltcalc import glt5_split_check, materialize, symbol_of, truncate_toeplitz
from .multiindex import format_multiindex, min_entry, parse_multiindex
from .reports import summary_json, svg_line_chart, write_with, atomic_write_text
from .spectra import distribution_check, spectrum

EXPERIMENT_KINDS = ("distribution", "acs", "zero", "sacs", "spectrum", "glt5")

_USAGE_ERRORS = (
    ConfigurationError,
    InvalidParameterError,
    DslSyntaxError,
    InvalidSizeError,
    IndexRangeError,
    CalculusError,
    ModeError,
    SizeCapError,
)
_NUMERIC_ERRORS = (QuadratureError, SolverError, EvaluationError, SingularEvaluationError)


def parse_sizes(text: str, d: int | None) -> list[tuple[int, ...]]:
    """Sizes are ';'-separated multi-indices; a bare comma list is accepted
    for one-level (d = 1) structures."""
    text = text.strip()
    if not text:
        return []
    if ";" in text:
        chunks = [c for c in text.split(";") if c.strip()]
    elif d in (None, 1) and "," in text:
        chunks = text.split(",")
    else:
        chunks = [text]
    return [parse_multiindex(c) for c in chunks]


@dataclass
class ExperimentConfig:
    kind: str = ""
    expr: str | None = None
    d: int | None = None
    r: int | None = None
    sizes: list = field(default_factory=list)
    mode: str = "sigma"
    seed: int | None = None
    out: str = "gltlab-out"
    plot: bool = False
    basket: str = "auto"
    tolerance: float = 0.05
    slack: float = 1.5
    quad_tol: float = 1e-7
    grid: int = 64
    m_list: list = field(default_factory=list)
    family: str = "truncate"
    model: str = "designed"
    trials: int = 10000
    p: float = 2.0
    zero_tol: float = 0.1
    numeric_degree: int | None = None

    def validate(self) -> list[str]:
        problems = []
        if self.kind not in EXPERIMENT_KINDS:
            problems.append(f"kind: must be one of {EXPERIMENT_KINDS}, got {self.kind!r}")
        needs_expr = self.kind in ("distribution", "acs", "spectrum", "glt5") or (
            self.kind == "zero" and self.model == "expr"
        )
        if needs_expr and not self.expr:
            problems.append("expr: required for this experiment kind")
        if self.kind != "parse" and not self.sizes:
            problems.append("sizes: at least one size is required")
        if self.sizes:
            mins = [min_entry(n) for n in self.sizes]
            if any(b <= a for a, b in zip(mins, mins[1:])):
                problems.append("sizes: must be strictly increasing in min-entry")
            if self.d is not None and any(len(n) != self.d for n in self.sizes):
                problems.append(f"sizes: every size must have d={self.d} entries")
        if self.mode not in ("sigma", "lambda"):
            problems.append(f"mode: must be sigma or lambda, got {self.mode!r}")
        if self.kind == "sacs":
            if self.seed is None:
                problems.append("seed: required for stochastic experiments")
            if self.trials < 100:
                problems.append("trials: at least 100 required")
            if not self.m_list:
                problems.append("m_list: required for sacs experiments")
            if self.model not in acs_mod.MODEL_ZOO:
                problems.append(
                    f"model: unknown {self.model!r}; choose from {sorted(acs_mod.MODEL_ZOO)}"
                )
        if self.kind == "acs" and not self.m_list:
            problems.append("m_list: required for acs experiments")
        if self.kind == "acs" and self.family not in ("truncate", "same"):
            problems.append(f"family: unknown {self.family!r} (truncate | same)")
        if self.kind == "zero" and self.model not in ("expr", *acs_mod.ZERO_SEQUENCES):
            problems.append(
                f"model: unknown {self.model!r}; choose from "
                f"{sorted(acs_mod.ZERO_SEQUENCES)} or expr"
            )
        if self.kind == "zero" and self.p != np.inf and self.p < 1:
            problems.append(f"p: must be >= 1 or inf, got {self.p}")
        return problems


def config_from_file(path: str) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigurationError(f"config file {path!r} does not exist", fields=["config"])
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse config: {exc}", fields=["config"])
    if "experiment" not in parser:
        raise ConfigurationError("missing [experiment] section", fields=["experiment"])
    cfg = ExperimentConfig()
    problems: list[str] = []
    merged: dict[str, str] = {}
    for section in ("experiment", "tolerances"):
        if section in parser:
            merged.update(parser[section])

    def take(key, conv, default):
        raw = merged.pop(key, None)
        if raw is None:
            return default
        try:
            return conv(raw)
        except (ValueError, GltLabError) as exc:
            problems.append(f"{key}: {exc}")
            return default

    cfg.kind = take("kind", str.strip, "")
    cfg.expr = take("expr", str.strip, None)
    cfg.d = take("d", int, None)
    cfg.r = take("r", int, None)
    cfg.sizes = take("sizes", lambda s: parse_sizes(s, cfg.d), [])
    cfg.mode = take("mode", str.strip, "sigma")
    cfg.seed = take("seed", int, None)
    cfg.out = take("out", str.strip, cfg.out)
    cfg.plot = take("plot", lambda s: s.strip().lower() in ("1", "true", "yes"), False)
    cfg.basket = take("basket", str.strip, "auto")
    cfg.tolerance = take("tolerance", float, cfg.tolerance)
    cfg.slack = take("slack", float, cfg.slack)
    cfg.quad_tol = take("quad_tol", float, cfg.quad_tol)
    cfg.grid = take("grid", int, cfg.grid)
    cfg.m_list = take("m_list", lambda s: [int(v) for v in s.split(",")], [])
    cfg.family = take("family", str.strip, cfg.family)
    cfg.model = take("model", str.strip, cfg.model)
    cfg.trials = take("trials", int, cfg.trials)
    cfg.p = take("p", lambda s: np.inf if s.strip() in ("inf", "oo") else float(s), cfg.p)
    cfg.zero_tol = take("zero_tol", float, cfg.zero_tol)
    cfg.numeric_degree = take("numeric_degree", int, None)
    problems.extend(cfg.validate())
    if problems:
        raise ConfigurationError(
            "invalid configuration: " + "; ".join(problems), fields=problems
        )
    return cfg


@dataclass
class ExperimentResult:
    passed: bool
    summary: dict
    artifacts: list

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def _parse_expression(cfg: ExperimentConfig):
    return dsl.parse(cfg.expr, d=cfg.d, r=cfg.r, numeric_degree=cfg.numeric_degree)


def _emit(cfg: ExperimentConfig, name: str, render) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, name)
    write_with(path, render)
    return path


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    problems = cfg.validate()
    if problems:
        raise ConfigurationError(
            "invalid configuration: " + "; ".join(problems), fields=problems
        )
    runner = {
        "distribution": _run_distribution,
        "spectrum": _run_spectrum,
        "acs": _run_acs,
        "zero": _run_zero,
        "sacs": _run_sacs,
        "glt5": _run_glt5,
    }[cfg.kind]
    result = runner(cfg)
    result.summary["kind"] = cfg.kind
    result.summary["verdict"] = "PASS" if result.passed else "FAIL"
    path = _emit(cfg, "summary.json", lambda fh: fh.write(summary_json(result.summary)))
    result.artifacts.append(path)
    return result


def _run_distribution(cfg: ExperimentConfig) -> ExperimentResult:
    e = _parse_expression(cfg)
    seq = lambda n: materialize(e, n, r=cfg.r)
    sym = symbol_of(e, r=cfg.r)
    basket_ids = None if cfg.basket == "auto" else [s.strip() for s in cfg.basket.split(",")]
    report = distribution_check(
        seq,
        sym,
        cfg.sizes,
        mode=cfg.mode,
        tolerance=cfg.tolerance,
        slack=cfg.slack,
        quad_tol=cfg.quad_tol,
        grid_points_per_dim=cfg.grid,
        basket_ids=basket_ids,
    )
    artifacts = [_emit(cfg, "report.csv", report.write_csv)]
    if cfg.plot:
        series = {fid: report.errors_for(fid) for fid in report.f_ids()}
        svg = svg_line_chart(series, "distribution error vs size", "d_n", "abs error")
        path = os.path.join(cfg.out, "plot.svg")
        atomic_write_text(path, svg)
        artifacts.append(path)
    checks = [
        {
            "name": f"weyl distribution error ({cfg.mode} mode, F={fid})",
            "error_at_largest": report.errors_for(fid)[-1][1],
            "tolerance": report.tolerance,
        }
        for fid in report.f_ids()
    ]
    summary = {
        "expression": dsl.format_expression(e),
        "mode": cfg.mode,
        "checks": checks,
        "policy": report.metadata,
        "artifacts": [os.path.basename(a) for a in artifacts],
    }
    return ExperimentResult(report.passed, summary, artifacts)


def _run_spectrum(cfg: ExperimentConfig) -> ExperimentResult:
    e = _parse_expression(cfg)
    n = cfg.sizes[-1]
    values = spectrum(materialize(e, n, r=cfg.r), cfg.mode)

    def render(fh):
        fh.write("index,re,im\n")
        for idx, v in enumerate(np.atleast_1d(values)):
            c = complex(v)
            fh.write(f"{idx + 1},{c.real!r},{c.imag!r}\n")

    artifacts = [_emit(cfg, "spectrum.csv", render)]
    summary = {
        "expression": dsl.format_expression(e),
        "n": format_multiindex(n),
        "mode": cfg.mode,
        "count": int(np.atleast_1d(values).size),
        "artifacts": [os.path.basename(a) for a in artifacts],
    }
    return ExperimentResult(True, summary, artifacts)


def _run_acs(cfg: ExperimentConfig) -> ExperimentResult:
    e = _parse_expression(cfg)
    target = lambda n: materialize(e, n, r=cfg.r)
    if cfg.family == "truncate":
        family = lambda m, n: materialize(truncate_toeplitz(e, m), n, r=cfg.r)
    else:
        family = lambda m, n: materialize(e, n, r=cfg.r)
    cert = acs_mod.acs_check(family, target, cfg.m_list, cfg.sizes, slack=cfg.slack)
    artifacts = [_emit(cfg, "certificate.csv", cert.write_csv)]
    summary = {
        "expression": dsl.format_expression(e),
        "family": cfg.family,
        "c": {str(m): cert.c[m] for m in cert.m_list},
        "omega": {str(m): cert.omega[m] for m in cert.m_list},
        "checks": [{"name": "approximating-class splitting bounds vanish"}],
        "policy": cert.metadata,
        "artifacts": [os.path.basename(a) for a in artifacts],
    }
    return ExperimentResult(cert.passed, summary, artifacts)


def _run_zero(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.model == "expr":
        e = _parse_expression(cfg)
        seq = lambda n: materialize(e, n, r=cfg.r)
        label = dsl.format_expression(e)
    else:
        seq = acs_mod.ZERO_SEQUENCES[cfg.model]()
        label = cfg.model
    result = acs_mod.zero_distribution_test(seq, cfg.p, cfg.sizes, tol=cfg.zero_tol)

    def render(fh):
        import csv as _csv

        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "d_n", "normalized_norm", "splitting_distance", "verdict"])
        verdict = "PASS" if result.passed else "FAIL"
        for n, d_n, nn, dist in zip(result.sizes, result.d_ns,
                                    result.normalized_norms,
                                    result.splitting_distances):
            writer.writerow([format_multiindex(n), d_n, repr(nn), repr(dist), verdict])

    artifacts = [_emit(cfg, "trend.csv", render)]
    summary = {
        "sequence": label,
        "p": "inf" if cfg.p == np.inf else cfg.p,
        "normalized_norms": result.normalized_norms,
        "splitting_distances": result.splitting_distances,
        "checks": [
            {"name": "normalized Schatten norm vanishes", "verdict": result.norm_criterion},
            {"name": "rank/norm splitting vanishes", "verdict": result.splitting_criterion},
        ],
        "artifacts": [os.path.basename(a) for a in artifacts],
    }
    return ExperimentResult(result.passed, summary, artifacts)


def _run_sacs(cfg: ExperimentConfig) -> ExperimentResult:
    model = acs_mod.MODEL_ZOO[cfg.model](cfg.seed)
    cert = acs_mod.sacs_check(model, cfg.m_list, cfg.sizes, cfg.trials)
    artifacts = [_emit(cfg, "certificate.csv", cert.write_csv)]
    summary = {
        "model": cfg.model,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "s_estimates": {str(m): cert.s[m] for m in cert.m_list},
        "checks": [{"name": "stochastic splitting event frequencies and trends"}],
        "policy": cert.metadata,
        "artifacts": [os.path.basename(a) for a in artifacts],
    }
    return ExperimentResult(cert.passed, summary, artifacts)


def _run_glt5(cfg: ExperimentConfig) -> ExperimentResult:
    e = _parse_expression(cfg)
    seq = lambda n: materialize(e, n, r=cfg.r)
    report = glt5_split_check(seq, cfg.sizes)

    def render(fh):
        import csv as _csv

        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "norm_x", "norm_y", "trace_norm_y_over_nu", "verdict"])
        verdict = "PASS" if report.passed else "FAIL"
        for n, nx, ny, ty in zip(report.sizes, report.norm_x, report.norm_y,
                                 report.trace_norm_y_normalized):
            writer.writerow([format_multiindex(n), repr(nx), repr(ny), repr(ty), verdict])

    artifacts = [_emit(cfg, "split.csv", render)]
    summary = {
        "expression": dsl.format_expression(e),
        "norm_x": report.norm_x,
        "norm_y": report.norm_y,
        "trace_norm_y_over_nu": report.trace_norm_y_normalized,
        "checks": [{"name": "quasi-Hermitian split: bounded norms, vanishing trace norm"}],
        "artifacts": [os.path.basename(a) for a in artifacts],
    }
    return ExperimentResult(report.passed, summary, artifacts)


# ---------------------------------------------------------------------------
# command line


def _add_common(sub):
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--plot", action="store_true")


def _cfg_from_args(args, kind: str) -> ExperimentConfig:
    cfg = ExperimentConfig(kind=kind)
    cfg.expr = getattr(args, "expr", None)
    cfg.d = getattr(args, "d", None)
    cfg.r = getattr(args, "r", None)
    sizes_text = getattr(args, "sizes", None) or getattr(args, "n", None)
    cfg.sizes = parse_sizes(sizes_text, cfg.d) if sizes_text else []
    cfg.mode = getattr(args, "mode", "sigma")
    cfg.tolerance = getattr(args, "tol", cfg.tolerance)
    cfg.zero_tol = getattr(args, "tol", cfg.zero_tol) if kind == "zero" else cfg.zero_tol
    cfg.basket = getattr(args, "basket", cfg.basket)
    if getattr(args, "m_list", None):
        cfg.m_list = [int(v) for v in args.m_list.split(",")]
    cfg.family = getattr(args, "family", cfg.family)
    cfg.model = getattr(args, "model", cfg.model)
    cfg.trials = getattr(args, "trials", cfg.trials)
    p = getattr(args, "p", None)
    if p is not None:
        cfg.p = np.inf if p in ("inf", "oo") else float(p)
    cfg.numeric_degree = getattr(args, "degree", None)
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.plot = bool(getattr(args, "plot", False))
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gltlab",
        description="spectral laboratory for structured matrix-sequences",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run an experiment described by a config file")
    run.add_argument("config")
    _add_common(run)
    run.set_defaults(func=cmd_run)

    pa = subs.add_parser("parse", help="parse an expression and print its canonical form")
    pa.add_argument("--expr", required=True)
    pa.add_argument("--d", type=int, default=None)
    pa.add_argument("--degree", type=int, default=None, help="numeric fallback degree")
    _add_common(pa)
    pa.set_defaults(func=cmd_parse)

    sp = subs.add_parser("spectrum", help="materialize an expression and print its spectrum")
    sp.add_argument("--expr", required=True)
    sp.add_argument("--n", required=True, help="size multi-index, e.g. 64 or 8,8")
    sp.add_argument("--mode", choices=("sigma", "lambda"), default="sigma")
    sp.add_argument("--d", type=int, default=None)
    sp.add_argument("--degree", type=int, default=None)
    _add_common(sp)
    sp.set_defaults(func=cmd_spectrum)

    cd = subs.add_parser("check-dist", help="distribution check of an expression")
    cd.add_argument("--expr", required=True)
    cd.add_argument("--sizes", required=True)
    cd.add_argument("--mode", choices=("sigma", "lambda"), default="sigma")
    cd.add_argument("--d", type=int, default=None)
    cd.add_argument("--tol", type=float, default=0.05)
    cd.add_argument("--degree", type=int, default=None)
    cd.add_argument("--basket", default="auto",
                    help="auto or a comma list of test-function ids")
    _add_common(cd)
    cd.set_defaults(func=cmd_check, kind="distribution")

    ca = subs.add_parser("check-acs", help="a.c.s. certificate for a truncation family")
    ca.add_argument("--expr", required=True)
    ca.add_argument("--sizes", required=True)
    ca.add_argument("--m-list", dest="m_list", required=True)
    ca.add_argument("--family", choices=("truncate", "same"), default="truncate")
    ca.add_argument("--d", type=int, default=None)
    _add_common(ca)
    ca.set_defaults(func=cmd_check, kind="acs")

    cz = subs.add_parser("check-zero", help="zero-distribution test")
    cz.add_argument("--model", default="spike",
                    help="spike | identity | rankone | expr")
    cz.add_argument("--expr", default=None)
    cz.add_argument("--sizes", required=True)
    cz.add_argument("--p", default="1")
    cz.add_argument("--tol", type=float, default=0.1)
    cz.add_argument("--d", type=int, default=None)
    _add_common(cz)
    cz.set_defaults(func=cmd_check, kind="zero")

    cs = subs.add_parser("check-sacs", help="stochastic a.c.s. Monte Carlo verification")
    cs.add_argument("--model", default="designed",
                    help="deterministic | designed | constant_s")
    cs.add_argument("--sizes", required=True)
    cs.add_argument("--m-list", dest="m_list", required=True)
    cs.add_argument("--trials", type=int, default=10000)
    _add_common(cs)
    cs.set_defaults(func=cmd_check, kind="sacs")

    cg = subs.add_parser("check-glt5", help="quasi-Hermitian split check")
    cg.add_argument("--expr", required=True)
    cg.add_argument("--sizes", required=True)
    cg.add_argument("--d", type=int, default=None)
    _add_common(cg)
    cg.set_defaults(func=cmd_check, kind="glt5")

    return parser


def cmd_run(args) -> int:
    cfg = config_from_file(args.config)
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.plot:
        cfg.plot = True
    result = run_experiment(cfg)
    print(f"{cfg.kind}: {'PASS' if result.passed else 'FAIL'} "
          f"({len(result.artifacts)} artifacts in {cfg.out})")
    return result.exit_code


def cmd_parse(args) -> int:
    e = dsl.parse(args.expr, d=args.d, numeric_degree=args.degree)
    print(dsl.format_expression(e))
    return 0


def cmd_spectrum(args) -> int:
    cfg = _cfg_from_args(args, "spectrum")
    if args.out:
        result = run_experiment(cfg)
        print(f"spectrum written to {cfg.out}")
        return result.exit_code
    e = dsl.parse(cfg.expr, d=cfg.d, numeric_degree=cfg.numeric_degree)
    values = spectrum(materialize(e, cfg.sizes[-1], r=cfg.r), cfg.mode)
    for v in np.atleast_1d(values):
        c = complex(v)
        print(f"{c.real!r},{c.imag!r}")
    return 0


def cmd_check(args) -> int:
    cfg = _cfg_from_args(args, args.kind)
    if args.kind == "zero" and args.expr:
        cfg.model = "expr"
    result = run_experiment(cfg)
    print(f"{args.kind}: {'PASS' if result.passed else 'FAIL'}")
    return result.exit_code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

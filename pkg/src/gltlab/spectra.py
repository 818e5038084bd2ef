"""Spectra, Schatten norms, Weyl functionals, and distribution verdicts.

The averaged test-function sums over eigenvalues or singular values are
compared against the symbol-side integrals; since limits are not observable,
verdicts combine a threshold at the largest tested size with a non-increasing
error trend over the last two size doublings (slack factor configurable).
That surrogate policy is recorded in every report's metadata.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    EvaluationError,
    InvalidParameterError,
    ModeError,
    QuadratureError,
    SolverError,
)
from .matgen import as_array, is_hermitian
from .multiindex import MultiIndex, check_size, format_multiindex, min_entry, nu
from .symbols import Symbol, spectral_surfaces

SIGMA = "sigma"
LAMBDA = "lambda"


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """A continuous compactly-supported test function on the real line.

    ``fn`` must be vectorized.  Complex inputs are reduced to their real part
    (used only on quasi-Hermitian waiver paths where imaginary parts vanish
    asymptotically).
    """

    __test__ = False  # domain type, not a pytest collection target

    id: str
    fn: Callable[[np.ndarray], np.ndarray]
    support: tuple

    def evaluate(self, values) -> np.ndarray:
        arr = np.asarray(values)
        if np.iscomplexobj(arr):
            arr = arr.real
        return np.asarray(self.fn(arr), dtype=float)


def poly_on_window(power: int, lo: float, hi: float, fid: str | None = None) -> TestFunction:
    """x^power restricted to [lo, hi] (zero outside)."""

    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= lo) & (x <= hi), x**power, 0.0)

    return TestFunction(fid or f"x^{power}", fn, ("window", float(lo), float(hi)))


def cosine_bump(center: float, halfwidth: float, fid: str | None = None) -> TestFunction:
    """C^1 bump (1 + cos(pi u))/2 with u = (x - center)/halfwidth."""
    if halfwidth <= 0:
        raise InvalidParameterError("bump halfwidth must be positive")

    def fn(x):
        u = (np.asarray(x, dtype=float) - center) / halfwidth
        return np.where(np.abs(u) <= 1.0, 0.5 * (1.0 + np.cos(np.pi * u)), 0.0)

    return TestFunction(fid or f"bump@{center:g}", fn, ("bump", float(center), float(halfwidth)))


def default_basket(lo: float, hi: float) -> list[TestFunction]:
    """Finite default basket: x, x^2, x^3 windowed to the observed hull plus
    two cosine bumps centered at the hull's third points."""
    span = max(hi - lo, 1e-6)
    pad = 0.05 * span + 1e-9
    wlo, whi = lo - pad, hi + pad
    basket = [
        poly_on_window(1, wlo, whi, "x"),
        poly_on_window(2, wlo, whi, "x^2"),
        poly_on_window(3, wlo, whi, "x^3"),
        cosine_bump(lo + span / 3.0, span / 3.0, "bump_lo"),
        cosine_bump(lo + 2.0 * span / 3.0, span / 3.0, "bump_hi"),
    ]
    return basket


# ---------------------------------------------------------------------------
# matrix-side quantities


def _fingerprint(arr: np.ndarray) -> str:
    return f"shape={arr.shape}, fro={np.linalg.norm(arr):.6e}, trace={np.trace(arr):.6e}"


def spectrum(matrix, mode: str = SIGMA) -> np.ndarray:
    """Singular values (descending) or eigenvalues (canonical order).

    Hermitian inputs take the symmetric solver path and yield real ascending
    eigenvalues; general eigenvalues are sorted by (real, imaginary) part.
    """
    arr = as_array(matrix)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError("matrix has non-finite entries")
    try:
        if mode == SIGMA:
            return np.linalg.svd(arr, compute_uv=False)
        if mode == LAMBDA:
            if is_hermitian(arr):
                return np.linalg.eigvalsh(arr)
            return np.sort(np.linalg.eigvals(arr))
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver failed ({exc}); {_fingerprint(arr)}") from exc
    raise ConfigurationError(f"unknown mode {mode!r}")


def schatten_norm(matrix, p) -> float:
    """p-norm of the singular value vector; p=inf is the spectral norm."""
    if p != np.inf and p < 1:
        raise InvalidParameterError(f"Schatten norm requires p >= 1, got {p}")
    sv = spectrum(matrix, SIGMA)
    if sv.size == 0:
        return 0.0
    if p == np.inf:
        return float(sv[0])
    return float(np.sum(sv**p) ** (1.0 / p))


def empirical_functional(values, f: TestFunction) -> float:
    """Arithmetic mean of F over a spectrum, (1/d_n) sum F(values_i)."""
    arr = np.asarray(values)
    if arr.size == 0:
        raise InvalidParameterError("empty value list")
    if not np.all(np.isfinite(arr)):
        raise EvaluationError("spectrum contains non-finite values")
    return float(np.mean(f.evaluate(arr)))


# ---------------------------------------------------------------------------
# symbol-side quadrature


def _midline(count: int, lo: float, hi: float) -> np.ndarray:
    return lo + (np.arange(count) + 0.5) * (hi - lo) / count


def _tensor_nodes(s: Symbol, g: int) -> tuple[np.ndarray, np.ndarray]:
    gx = g if s.depends_space else 1
    gt = g if s.depends_frequency else 1
    lines = [_midline(gx, 0.0, 1.0)] * s.d + [_midline(gt, -np.pi, np.pi)] * s.d
    mesh = np.meshgrid(*lines, indexing="ij")
    flat = [m.ravel() for m in mesh]
    x = np.stack(flat[: s.d], axis=1)
    theta = np.stack(flat[s.d :], axis=1)
    return x, theta


def _node_count(s: Symbol, g: int) -> int:
    gx = g if s.depends_space else 1
    gt = g if s.depends_frequency else 1
    return (gx**s.d) * (gt**s.d)


def _probe_nodes(s: Symbol, per_dim: int, node_budget: int = 2**16):
    """Endpoint-including evaluation grid capped at ``node_budget`` nodes.

    Endpoints matter: symbol surfaces often attain their extremes on the
    domain boundary, and the hull estimated from these samples must cover
    the range so that windowed test functions never clip it.
    """
    active = s.d * (int(s.depends_space) + int(s.depends_frequency))
    g = per_dim
    if active > 0:
        g = min(per_dim, max(3, int(node_budget ** (1.0 / active))))
    gx = g if s.depends_space else 1
    gt = g if s.depends_frequency else 1
    x_line = np.linspace(0.0, 1.0, gx) if gx > 1 else np.array([0.5])
    t_line = np.linspace(-np.pi, np.pi, gt) if gt > 1 else np.array([0.0])
    lines = [x_line] * s.d + [t_line] * s.d
    mesh = np.meshgrid(*lines, indexing="ij")
    flat = [m.ravel() for m in mesh]
    return np.stack(flat[: s.d], axis=1), np.stack(flat[s.d :], axis=1)


def _quad_value(s: Symbol, f: TestFunction, mode: str, g: int) -> float:
    x, theta = _tensor_nodes(s, g)
    surfaces = spectral_surfaces(s, x, theta, mode)
    return float(np.mean(f.evaluate(surfaces)))


def symbol_functional(s: Symbol, f: TestFunction, mode: str = SIGMA,
                      grid_points_per_dim: int = 64, tol: float = 1e-8,
                      max_nodes: int = 2**22) -> float:
    """Tensor midpoint quadrature of the averaged surface functional,
    (1/mu(D)) int mean_i F(surface_i(x, theta)) d(x, theta).

    The grid is doubled until two consecutive values differ by less than
    ``tol``; the finer value is reported.  Inactive variables (a frequency-only
    symbol does not depend on x, and vice versa) use a single midpoint node.
    The starting resolution shrinks automatically so that at least one
    doubling fits inside the ``max_nodes`` budget.
    """
    g = max(int(grid_points_per_dim), 2)
    active = s.d * (int(s.depends_space) + int(s.depends_frequency))
    if active > 0:
        g_cap = int(max_nodes ** (1.0 / active)) // 2
        g = min(g, max(g_cap, 2))
    if _node_count(s, 2 * g) > max_nodes:
        raise QuadratureError(
            f"node budget {max_nodes} cannot fit one grid doubling "
            f"({active} active dimensions)"
        )
    prev = _quad_value(s, f, mode, g)
    while True:
        g2 = 2 * g
        if _node_count(s, g2) > max_nodes:
            raise QuadratureError(
                f"quadrature for {f.id!r} did not converge to {tol} within "
                f"{max_nodes} nodes (last delta at g={g})"
            )
        cur = _quad_value(s, f, mode, g2)
        if abs(cur - prev) < tol:
            return cur
        prev, g = cur, g2


# ---------------------------------------------------------------------------
# trend policies shared by the verdict-producing checks


def non_increasing(series: Sequence[float], slack: float = 1.5,
                   floor: float = 1e-12, steps: int | None = None) -> bool:
    """True when consecutive values do not grow beyond ``slack`` (last
    ``steps`` transitions only, all of them when ``steps`` is None)."""
    vals = [float(v) for v in series]
    pairs = list(zip(vals, vals[1:]))
    if steps is not None:
        pairs = pairs[-steps:]
    return all(b <= slack * a + floor for a, b in pairs)


def trending_to_zero(series: Sequence[float], slack: float = 1.5,
                     decay: float = 0.5, floor: float = 1e-10) -> bool:
    """Finite surrogate for ``lim = 0``: non-increasing steps (with slack)
    plus an overall decay of at least ``decay`` from first to last value."""
    vals = [float(v) for v in series]
    if not vals:
        return True
    if max(vals) <= floor:
        return True
    if not non_increasing(vals, slack=slack, floor=floor):
        return False
    return vals[-1] <= decay * vals[0] + floor


# ---------------------------------------------------------------------------
# distribution report


@dataclass(frozen=True)
class ReportRow:
    n: MultiIndex
    d_n: int
    f_id: str
    empirical: float
    symbol: float
    abs_error: float


@dataclass
class DistributionReport:
    mode: str
    rows: list[ReportRow]
    tolerance: float
    slack: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def errors_for(self, f_id: str) -> list[tuple[int, float]]:
        return [(row.d_n, row.abs_error) for row in self.rows if row.f_id == f_id]

    def f_ids(self) -> list[str]:
        seen: list[str] = []
        for row in self.rows:
            if row.f_id not in seen:
                seen.append(row.f_id)
        return seen

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "d_n", "mode", "F_id", "empirical", "symbol", "abs_error"])
        for row in self.rows:
            writer.writerow(
                [
                    format_multiindex(row.n),
                    row.d_n,
                    self.mode,
                    row.f_id,
                    repr(row.empirical),
                    repr(row.symbol),
                    repr(row.abs_error),
                ]
            )


def _normalize_sizes(sizes: Sequence) -> list[MultiIndex]:
    norm = [check_size(n) for n in sizes]
    if not norm:
        raise InvalidParameterError("at least one size is required")
    d = len(norm[0])
    if any(len(n) != d for n in norm):
        raise InvalidParameterError("sizes must share the same number of levels")
    mins = [min_entry(n) for n in norm]
    if any(b <= a for a, b in zip(mins, mins[1:])):
        raise InvalidParameterError(f"sizes must be strictly increasing in min-entry: {norm}")
    return norm


def distribution_check(seq, symbol: Symbol, sizes: Sequence, mode: str = SIGMA,
                       basket: Sequence[TestFunction] | None = None,
                       tolerance: float = 0.05, slack: float = 1.5,
                       quad_tol: float = 1e-7, grid_points_per_dim: int = 64,
                       allow_non_hermitian: bool = False,
                       trend_floor: float = 1e-12,
                       basket_ids: Sequence[str] | None = None) -> DistributionReport:
    """Compare empirical Weyl averages against symbol integrals over a size sweep.

    ``seq`` maps a size multi-index to a matrix.  PASS requires, for every test
    function, the error at the largest size to fall below ``tolerance`` and the
    errors to be non-increasing (slack ``slack``) over the last two size steps.
    Eigenvalue mode demands Hermitian matrices unless ``allow_non_hermitian``
    (the quasi-Hermitian waiver) is set.
    """
    norm_sizes = _normalize_sizes(sizes)
    spectra: list[np.ndarray] = []
    for n in norm_sizes:
        a = as_array(seq(n))
        if mode == LAMBDA and not allow_non_hermitian and not is_hermitian(a):
            raise ModeError(
                f"eigenvalue mode requires Hermitian matrices (size {n}); "
                "pass allow_non_hermitian=True after a quasi-Hermitian split check"
            )
        spectra.append(spectrum(a, mode))
    if basket is None:
        observed = np.concatenate([np.asarray(v).real.ravel() for v in spectra])
        probe_x, probe_t = _probe_nodes(symbol, 17)
        samples = spectral_surfaces(symbol, probe_x, probe_t, mode).real.ravel()
        lo = float(min(observed.min(), samples.min()))
        hi = float(max(observed.max(), samples.max()))
        basket = default_basket(lo, hi)
        if basket_ids is not None:
            known = {f.id: f for f in basket}
            missing = [fid for fid in basket_ids if fid not in known]
            if missing:
                raise InvalidParameterError(
                    f"unknown basket ids {missing}; available: {sorted(known)}"
                )
            basket = [known[fid] for fid in basket_ids]
    rows: list[ReportRow] = []
    passed = True
    for f in basket:
        sval = symbol_functional(symbol, f, mode, grid_points_per_dim, quad_tol)
        errors: list[float] = []
        for n, values in zip(norm_sizes, spectra):
            emp = empirical_functional(values, f)
            err = abs(emp - sval)
            errors.append(err)
            rows.append(ReportRow(n, values.size, f.id, emp, sval, err))
        ok = errors[-1] <= tolerance and non_increasing(
            errors, slack=slack, floor=trend_floor, steps=2
        )
        passed = passed and ok
    rows.sort(key=lambda row: (row.n, 0))
    return DistributionReport(
        mode=mode,
        rows=rows,
        tolerance=tolerance,
        slack=slack,
        passed=passed,
        metadata={
            "verdict_policy": "threshold at largest size plus non-increasing "
            "errors over the last two size steps",
            "tolerance": tolerance,
            "slack": slack,
            "quad_tol": quad_tol,
        },
    )


# ---------------------------------------------------------------------------
# quantile comparison on the equispaced grid


def _split_count(n_i: int) -> tuple[int, int]:
    # Factor n_i = g1 * g2 with g1 <= g2 as balanced as possible.
    g1 = int(np.sqrt(n_i))
    while g1 > 1 and n_i % g1:
        g1 -= 1
    return g1, n_i // g1


def _equispaced_nodes(s: Symbol, n: MultiIndex) -> tuple[np.ndarray, np.ndarray]:
    """Equispaced evaluation grid x_j = a + j (b - a)/count, j = 1..count,
    with exactly nu(n) nodes distributed over the active variables."""
    counts_x: list[int] = []
    counts_t: list[int] = []
    for n_i in n:
        if s.depends_space and s.depends_frequency:
            gx, gt = _split_count(n_i)
        elif s.depends_space:
            gx, gt = n_i, 1
        else:
            gx, gt = 1, n_i
        counts_x.append(gx)
        counts_t.append(gt)
    lines = [np.arange(1, g + 1) / g for g in counts_x]
    lines += [-np.pi + np.arange(1, g + 1) * (2 * np.pi / g) for g in counts_t]
    mesh = np.meshgrid(*lines, indexing="ij")
    flat = [m.ravel() for m in mesh]
    return np.stack(flat[: s.d], axis=1), np.stack(flat[s.d :], axis=1)


def quantile_compare(values, s: Symbol, n, outlier_budget: float | None = None,
                     mode: str = LAMBDA) -> float:
    """Max absolute deviation between sorted spectral values and the sorted
    symbol samples on the equispaced grid, after discarding the worst
    ``outlier_budget * d_n`` entries from both ends.

    The default budget discards ceil(sqrt(d_n)) entries per end, the sublinear
    realization of "up to o(d_n) outliers".
    """
    n = check_size(n)
    vals = np.sort(np.asarray(values, dtype=float).ravel())
    d_n = vals.size
    if outlier_budget is None:
        k = int(np.ceil(np.sqrt(d_n)))
    else:
        if not 0 <= outlier_budget < 0.5:
            raise InvalidParameterError("outlier budget must lie in [0, 0.5)")
        k = int(np.ceil(outlier_budget * d_n))
    x, theta = _equispaced_nodes(s, n)
    samples = np.sort(spectral_surfaces(s, x, theta, mode).real.ravel())
    if samples.size != d_n:
        raise InvalidParameterError(
            f"value count {d_n} does not match nu(n) r = {samples.size}"
        )
    if 2 * k >= d_n:
        raise InvalidParameterError("outlier budget discards every entry")
    middle = slice(k, d_n - k) if k else slice(None)
    return float(np.max(np.abs(vals[middle] - samples[middle])))


# ---------------------------------------------------------------------------
# range check (symbol range inside the closure of observed spectra)


@dataclass(frozen=True)
class RangeCheckResult:
    passed: bool
    max_excess: float
    tol: float
    violations: tuple = ()


def _cross2(u: np.ndarray, v: np.ndarray) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _convex_hull_2d(points: np.ndarray) -> np.ndarray:
    pts = np.unique(points, axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2 and _cross2(out[-1] - out[-2], p - out[-2]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _dist_to_hull(p: np.ndarray, hull: np.ndarray) -> float:
    if len(hull) == 1:
        return float(np.linalg.norm(p - hull[0]))
    best = np.inf
    inside = len(hull) >= 3
    for a, b in zip(hull, np.roll(hull, -1, axis=0)):
        ab = b - a
        denom = float(ab @ ab)
        t = 0.0 if denom == 0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
        best = min(best, float(np.linalg.norm(p - (a + t * ab))))
        if inside and _cross2(ab, p - a) < 0:
            inside = False
    return 0.0 if inside else best


def range_check(values, s: Symbol, tol: float, mode: str = LAMBDA,
                grid_points_per_dim: int = 64, max_violations: int = 20) -> RangeCheckResult:
    """Verify every symbol surface sample lies within ``tol`` of the hull of
    the observed spectral values (interval hull in the real case, convex hull
    in the complex case)."""
    vals = np.asarray(values).ravel()
    x, theta = _probe_nodes(s, grid_points_per_dim)
    samples = spectral_surfaces(s, x, theta, mode)
    real_case = (not np.iscomplexobj(vals) or np.abs(vals.imag).max() < 1e-12) and (
        not np.iscomplexobj(samples) or np.abs(samples.imag).max() < 1e-12
    )
    violations: list[tuple] = []
    max_excess = 0.0
    if real_case:
        rv = vals.real
        lo, hi = float(rv.min()), float(rv.max())
        flat = samples.real
        excess = np.maximum(lo - flat, flat - hi)
        max_excess = float(excess.max())
        bad = np.argwhere(excess > tol)
        for idx in bad[:max_violations]:
            node, surf = int(idx[0]), int(idx[1])
            violations.append(
                (tuple(x[node]), tuple(theta[node]), surf, float(flat[node, surf]))
            )
    else:
        pts = np.stack([vals.real, vals.imag], axis=1)
        hull = _convex_hull_2d(pts)
        flat = np.asarray(samples, dtype=complex)
        for node in range(flat.shape[0]):
            for surf in range(flat.shape[1]):
                z = flat[node, surf]
                dist = _dist_to_hull(np.array([z.real, z.imag]), hull)
                max_excess = max(max_excess, dist)
                if dist > tol and len(violations) < max_violations:
                    violations.append((tuple(x[node]), tuple(theta[node]), surf, complex(z)))
    return RangeCheckResult(
        passed=max_excess <= tol,
        max_excess=max_excess,
        tol=tol,
        violations=tuple(violations),
    )

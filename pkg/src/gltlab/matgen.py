"""Dense generators: multilevel block Toeplitz and diagonal sampling matrices.

Matrices are dense at desk scale by design; the Kronecker assembly used by
:func:`toeplitz` touches disjoint entries per offset, so it is bit-compatible
with the naive block fill (kept as :func:`toeplitz_blockfill`, the oracle).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, EvaluationError, SizeCapError
from .multiindex import (
    MultiIndex,
    check_size,
    format_multiindex,
    iter_interval,
    lex_rank,
    nu,
    size_interval,
)
from .symbols import CoefficientFunction, Symbol, TrigPolynomial

DEFAULT_SIZE_CAP = 8192
_BINARY_MAGIC = b"GLTM"


@dataclass(eq=False)
class BlockMatrix:
    """A dense matrix with its d-level r-block structure metadata.

    ``notes`` carries non-fatal diagnostics (e.g. pseudo-inverse conditioning
    warnings) attached during materialization.
    """

    data: np.ndarray
    r: int
    n: MultiIndex
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.n = check_size(self.n)
        self.data = np.asarray(self.data, dtype=complex)
        expected = self.r * nu(self.n)
        if self.data.shape != (expected, expected):
            raise ConfigurationError(
                f"matrix shape {self.data.shape} != block structure size {expected}"
            )

    @property
    def d(self) -> int:
        return len(self.n)

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def block(self, i: Sequence[int], j: Sequence[int]) -> np.ndarray:
        interval = size_interval(self.n)
        a = lex_rank(i, interval) * self.r
        b = lex_rank(j, interval) * self.r
        return self.data[a : a + self.r, b : b + self.r]

    def write_csv(self, fh) -> None:
        """Entry listing as ``i,j,re,im`` with 1-based indices."""
        fh.write("i,j,re,im\n")
        for i in range(self.size):
            row = self.data[i]
            for j in range(self.size):
                v = complex(row[j])
                fh.write(f"{i + 1},{j + 1},{v.real!r},{v.imag!r}\n")

    def write_binary(self, fh) -> None:
        """Compact dump: magic ``GLTM``, uint32 r, uint32 d, d x uint32 n,
        then row-major (re, im) pairs as little-endian float64."""
        fh.write(_BINARY_MAGIC)
        fh.write(struct.pack("<II", self.r, self.d))
        fh.write(struct.pack(f"<{self.d}I", *self.n))
        inter = np.empty((self.size, self.size, 2))
        inter[:, :, 0] = self.data.real
        inter[:, :, 1] = self.data.imag
        fh.write(inter.astype("<f8").tobytes())

    @classmethod
    def read_binary(cls, fh) -> "BlockMatrix":
        magic = fh.read(4)
        if magic != _BINARY_MAGIC:
            raise ConfigurationError(f"bad magic {magic!r}")
        r, d = struct.unpack("<II", fh.read(8))
        n = struct.unpack(f"<{d}I", fh.read(4 * d))
        size = r * nu(n)
        raw = np.frombuffer(fh.read(size * size * 16), dtype="<f8").reshape(size, size, 2)
        return cls(raw[:, :, 0] + 1j * raw[:, :, 1], r, n)


def as_array(matrix) -> np.ndarray:
    """Accept a BlockMatrix or a bare ndarray."""
    if isinstance(matrix, BlockMatrix):
        return matrix.data
    return np.asarray(matrix)


def _check_cap(rows: int, cap: int | None):
    cap = DEFAULT_SIZE_CAP if cap is None else cap
    if rows > cap:
        raise SizeCapError(f"requested {rows} rows exceeds the size cap {cap}")


def shift_matrix(m: int, offset: int) -> np.ndarray:
    """J^(l): (i, j) entry 1 when i - j = l (0 elsewhere)."""
    return np.eye(m, k=-offset)


def toeplitz(f: TrigPolynomial, n: int | Sequence[int], cap: int | None = None) -> BlockMatrix:
    """Multilevel block Toeplitz matrix with block (i, j) = fhat_{i-j}.

    Assembled as the sum over offsets of Kronecker products of shift matrices
    with the coefficient blocks.
    """
    n = check_size(n)
    if len(n) != f.d:
        raise ConfigurationError(f"size {n} has {len(n)} levels, symbol has {f.d}")
    rows = f.r * nu(n)
    _check_cap(rows, cap)
    out = np.zeros((rows, rows), dtype=complex)
    for k, block in f.coeffs.items():
        if any(abs(kj) >= nj for kj, nj in zip(k, n)):
            continue
        shifts = np.ones((1, 1))
        for kj, nj in zip(k, n):
            shifts = np.kron(shifts, shift_matrix(nj, kj))
        out += np.kron(shifts, block)
    return BlockMatrix(out, f.r, n)


def toeplitz_blockfill(f: TrigPolynomial, n: int | Sequence[int],
                       cap: int | None = None) -> BlockMatrix:
    """Reference construction filling block (i, j) = fhat_{i-j} one pair at a time."""
    n = check_size(n)
    rows = f.r * nu(n)
    _check_cap(rows, cap)
    interval = size_interval(n)
    indices = list(iter_interval(interval))
    out = np.zeros((rows, rows), dtype=complex)
    zero = np.zeros((f.r, f.r), dtype=complex)
    for a, i in enumerate(indices):
        for b, j in enumerate(indices):
            k = tuple(ii - jj for ii, jj in zip(i, j))
            block = f.coeffs.get(k)
            if block is not None:
                out[a * f.r : (a + 1) * f.r, b * f.r : (b + 1) * f.r] = block
            else:
                out[a * f.r : (a + 1) * f.r, b * f.r : (b + 1) * f.r] = zero
    return BlockMatrix(out, f.r, n)


def sampling_grid(n: int | Sequence[int]) -> np.ndarray:
    """Lexicographically ordered grid {i/n : i = 1..n} as an (nu(n), d) array."""
    n = check_size(n)
    pts = np.array(list(iter_interval(size_interval(n))), dtype=float)
    return pts / np.asarray(n, dtype=float)


def diag_sampling(a, n: int | Sequence[int], r: int | None = None,
                  cap: int | None = None) -> BlockMatrix:
    """Block diagonal matrix with i-th block a(i/n), i enumerated lexicographically."""
    n = check_size(n)
    if isinstance(a, Symbol):
        if a.depends_frequency:
            raise ConfigurationError("diagonal sampling requires a space-only symbol")
        sym = a
    elif callable(a):
        if r is None:
            r = 1
        sym = CoefficientFunction.from_scalar(len(n), a) if r == 1 else CoefficientFunction(len(n), r, a)
    else:
        sym = CoefficientFunction.constant(len(n), a)
    if sym.d != len(n):
        raise ConfigurationError(f"coefficient has d={sym.d}, size has {len(n)} levels")
    rows = sym.r * nu(n)
    _check_cap(rows, cap)
    grid = sampling_grid(n)
    vals = sym._eval(grid, np.zeros_like(grid))
    if not np.all(np.isfinite(vals)):
        ok = np.isfinite(vals.reshape(vals.shape[0], -1)).all(axis=1)
        bad = int(np.argmin(ok))
        node = tuple(int(round(v)) for v in grid[bad] * np.asarray(n))
        raise EvaluationError(
            f"coefficient evaluation failed at grid node {format_multiindex(node)}",
            node=node,
        )
    out = np.zeros((rows, rows), dtype=complex)
    for idx in range(vals.shape[0]):
        out[idx * sym.r : (idx + 1) * sym.r, idx * sym.r : (idx + 1) * sym.r] = vals[idx]
    return BlockMatrix(out, sym.r, n)


def identity(n: int | Sequence[int], r: int = 1) -> BlockMatrix:
    n = check_size(n)
    return BlockMatrix(np.eye(r * nu(n), dtype=complex), r, n)


def zeros(n: int | Sequence[int], r: int = 1) -> BlockMatrix:
    n = check_size(n)
    return BlockMatrix(np.zeros((r * nu(n), r * nu(n)), dtype=complex), r, n)


def is_hermitian(matrix, rtol: float = 1e-12) -> bool:
    arr = as_array(matrix)
    scale = np.linalg.norm(arr)
    return np.linalg.norm(arr - arr.conj().T) <= rtol * max(scale, 1e-300)

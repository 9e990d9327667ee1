"""Periodic discretization of L^2(R) with exactly unitary building blocks.

The carrier space is C^N on the uniform grid w_i = -L + i*h, h = 2L/N,
with N a power of two.  Translation by an arbitrary real amount is
diagonal in the DFT basis (phases exp(-2*pi*i*xi_m*x) at the grid
frequencies xi_m = m/(2L)), so translations compose exactly and are
exactly unitary; modulation is diagonal in the position basis.  All
representation identities built from these blocks degrade only through
aliasing of whatever vectors they are applied to, never through the
blocks themselves.

Operators are plain complex numpy matrices.  Schatten norms always go
through a full singular value decomposition; nothing is estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_KRON_CAP = 4096


class CapacityError(ValueError):
    """A requested object exceeds the configured size cap."""


@dataclass(frozen=True)
class GridSpec1D:
    """Uniform periodic grid on [-half_width, half_width)."""

    n_points: int
    half_width: float

    def __post_init__(self) -> None:
        n = self.n_points
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of two >= 8, got {n}")
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ValueError(f"half_width must be positive and finite, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        w = -self.half_width + self.spacing * np.arange(self.n_points)
        w.setflags(write=False)
        return w

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Grid frequencies m/(2L) for m = -N/2 .. N/2-1, in FFT order."""
        xi = np.fft.fftfreq(self.n_points, d=self.spacing)
        xi.setflags(write=False)
        return xi


def fractional_shift_op(grid: GridSpec1D, x: float) -> np.ndarray:
    """Matrix of f |-> f(. - x) under band-limited periodic interpolation.

    Diagonal in the DFT basis with unimodular entries, hence exactly
    unitary, and fractional_shift_op(x1) @ fractional_shift_op(x2)
    equals fractional_shift_op(x1 + x2) up to roundoff.
    """
    if not math.isfinite(x):
        raise ValueError(f"shift amount must be finite, got {x}")
    phase = np.exp(-2j * np.pi * grid.frequencies * x)
    eye = np.eye(grid.n_points, dtype=complex)
    return np.fft.ifft(phase[:, None] * np.fft.fft(eye, axis=0), axis=0)


def modulation_op(grid: GridSpec1D, beta: float) -> np.ndarray:
    """Diagonal matrix diag(exp(-2*pi*i*beta*w_i))."""
    if not math.isfinite(beta):
        raise ValueError(f"modulation frequency must be finite, got {beta}")
    return np.diag(np.exp(-2j * np.pi * beta * grid.nodes))


def singular_values(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.svd(a, compute_uv=False)


def schatten_norm(a: np.ndarray, p: float) -> float:
    """Schatten p-norm for p in {1, 2, inf}, from a full SVD."""
    sv = singular_values(a)
    if p == 1:
        return float(np.sum(sv))
    if p == 2:
        return float(np.sqrt(np.sum(sv * sv)))
    if p == math.inf:
        return float(sv[0]) if sv.size else 0.0
    raise ValueError(f"p must be 1, 2 or inf, got {p}")


def kron(a: np.ndarray, b: np.ndarray, dim_cap: int = DEFAULT_KRON_CAP) -> np.ndarray:
    """Kronecker product with rows (i,j) |-> i*dim(b)+j, guarded by dim_cap."""
    a = np.asarray(a)
    b = np.asarray(b)
    out_dim = a.shape[0] * b.shape[0]
    if out_dim > dim_cap:
        raise CapacityError(f"kron result dimension {out_dim} exceeds cap {dim_cap}")
    return np.kron(a, b)

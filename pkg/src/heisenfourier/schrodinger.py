"""Schrodinger representation matrices and the group Fourier transform.

For t != 0 the representation of a group element (x, y, z) acts on the
periodic carrier grid as

    pi_t(x,y,z) = exp(2*pi*i*t*z + pi*i*t*y*x) * M_{t*y} * T_x,

with T_x the band-limited shift and M_beta the modulation from grid.py.
The ordering is fixed by the group law: translate first, then modulate,
then the central phase.  M and T do not commute; do not reorder.

Matrices built here approximate integral kernels scaled by the carrier
spacing.  With that normalization, matrix traces, Frobenius norms and
singular values approximate their continuum counterparts directly, with
no leftover grid factors.  Errors enter only through aliasing, so test
functions must decay to numerical noise inside their sample box and the
operators they generate must stay band-limited within the carrier.
"""

from __future__ import annotations

import cmath
import math
from collections import OrderedDict

import numpy as np

from .field import OperatorField, TGrid
from .grid import GridSpec1D, fractional_shift_op
from .group import GroupElement, SampledFunction3D, box_axes


def rep_matrix(t: float, g, grid: GridSpec1D) -> np.ndarray:
    if t == 0:
        raise ValueError("representation parameter t must be nonzero")
    if not math.isfinite(t):
        raise ValueError(f"representation parameter must be finite, got {t}")
    x, y, z = g
    phase = cmath.exp(2j * math.pi * t * z + 1j * math.pi * t * y * x)
    mod = np.exp(-2j * np.pi * (t * y) * grid.nodes)
    # diagonal modulation as a row scaling of the shift
    return phase * (mod[:, None] * fractional_shift_op(grid, x))


class _TransformPlan:
    """Shared precomputation for all frequencies over one (grid, box) pair.

    The shift stack is the only heavy item: one unitary per x node.
    Everything frequency-dependent is a cheap phase table.
    """

    def __init__(self, grid: GridSpec1D, box, counts):
        self.grid = grid
        self.xs, self.ys, self.zs = box_axes(box, counts)
        dft = np.fft.fft(np.eye(grid.n_points), axis=0)
        phases = np.exp(-2j * np.pi * self.xs[:, None] * grid.frequencies[None, :])
        self.tstack = np.fft.ifft(phases[:, :, None] * dft[None, :, :], axis=1)

    def _phase_tables(self, t: float):
        P = np.exp(1j * np.pi * t * np.outer(self.xs, self.ys))
        E = np.exp(-2j * np.pi * t * np.outer(self.ys, self.grid.nodes))
        return P, E

    def coefficient(self, samples: np.ndarray, t: float, cell_volume: float):
        """Quadrature of f(v)*pi_t(v) over the box, z summed first."""
        fz = samples @ np.exp(2j * np.pi * t * self.zs)
        P, E = self._phase_tables(t)
        A = (fz * P) @ E
        out = np.einsum("im,imn->mn", A, self.tstack, optimize=True)
        out *= cell_volume
        return out

    def invert_node(self, mat: np.ndarray, t: float) -> np.ndarray:
        """Samples of v -> Tr[mat * pi_t(v)^dagger] on the whole box."""
        D = np.einsum("mn,imn->im", mat, np.conj(self.tstack), optimize=True)
        P, E = self._phase_tables(t)
        vxy = np.conj(P) * (D @ np.conj(E).T)
        ez = np.exp(-2j * np.pi * t * self.zs)
        return vxy[:, :, None] * ez[None, None, :]


_plan_cache: "OrderedDict[tuple, _TransformPlan]" = OrderedDict()
_PLAN_CACHE_MAX = 4


def _plan_for(grid: GridSpec1D, box, counts) -> _TransformPlan:
    key = (grid.n_points, grid.half_width, tuple(box), tuple(counts))
    plan = _plan_cache.get(key)
    if plan is None:
        plan = _TransformPlan(grid, box, counts)
        _plan_cache[key] = plan
        while len(_plan_cache) > _PLAN_CACHE_MAX:
            _plan_cache.popitem(last=False)
    else:
        _plan_cache.move_to_end(key)
    return plan


def fourier_coefficient(
    f: SampledFunction3D, t: float, grid: GridSpec1D, method: str = "fast"
) -> np.ndarray:
    """Discrete pi_t(f): rectangle-rule sum of f(v)*rep_matrix(t, v) over the box.

    method "fast" factors the sum through a partial z transform and a
    precomputed shift stack; "direct" is the literal per-sample sum kept
    as the reference path.  Both produce the same quadrature.
    """
    if t == 0:
        raise ValueError("representation parameter t must be nonzero")
    if not math.isfinite(t):
        raise ValueError(f"representation parameter must be finite, got {t}")
    if method == "fast":
        plan = _plan_for(grid, f.box, f.counts)
        return plan.coefficient(f.samples, t, f.cell_volume)
    if method == "direct":
        return _coefficient_direct(f, t, grid)
    raise ValueError(f"unknown method {method!r}")


def _coefficient_direct(f: SampledFunction3D, t: float, grid: GridSpec1D):
    xs, ys, zs = f.axes
    out = np.zeros((grid.n_points, grid.n_points), dtype=complex)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            for k, z in enumerate(zs):
                out += f.samples[i, j, k] * rep_matrix(t, GroupElement(x, y, z), grid)
    out *= f.cell_volume
    return out


def forward_field(f: SampledFunction3D, tgrid: TGrid, grid: GridSpec1D):
    """The measure-absorbed transform: node matrix |t_k| * pi_{t_k}(f)."""
    plan = _plan_for(grid, f.box, f.counts)
    n = grid.n_points
    mats = np.empty((tgrid.n_nodes, n, n), dtype=complex)
    for pos, t in enumerate(tgrid.nodes):
        mats[pos] = abs(t) * plan.coefficient(f.samples, t, f.cell_volume)
    return OperatorField(tgrid, mats)

"""Coefficient fusion: intertwiners, the theta maps, dual convolution.

For r + s != 0 the matrix gamma(r, s) = [[r/(r+s), s/(r+s)], [-1, 1]]
relates the tensor product of the representations at parameters r and s
to the representation at r + s: composing a two-variable function with
gamma^{-1} intertwines pi_r (x) pi_s with pi_{r+s} (x) 1.  On the
N^2-dimensional tensor carrier that composition is realized here through
the exact factorization

    gamma^{-1} = [[1, 0], [1, 1]] @ [[1, -s/(r+s)], [0, 1]]

into two unit shears.  Each shear is a stack of band-limited fractional
shifts of one variable, indexed by the grid nodes of the other, so the
discrete W is a product of two block-diagonal unitaries and carries no
normalization defect of its own.  Accuracy degrades only through content
pushed past the window or the frequency band, which shows up in the
intertwining residual, never in unitarity.

Point sampling the composed function on the product grid and projecting
onto the carrier band gives an alternative W whose unitarity defect
measures whether the grid resolves the shear at all; half-integer shears
alias colliding frequency pairs into exact rank collapse there (defect
1).  intertwiner() reports that defect as a sampling diagnostic next to
the exact-shear matrix.

theta1 and dual_convolution never materialize W.  For a separable input
kron(A, B), fusing the partial trace into the shear conjugation
contracts each term in O(N^4).  Shift stacks are cached per exact ratio
s/(r+s), held as a Fraction, so lattice pairs sharing a ratio share
cache entries bit for bit.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .field import OperatorField, TGrid, zero_field
from .grid import GridSpec1D, schatten_norm

_DOMAIN_MSG = "fusion needs r, s, r + s all nonzero"


def _in_domain(r: float, s: float) -> bool:
    if not (math.isfinite(r) and math.isfinite(s)):
        return False
    return r != 0.0 and s != 0.0 and r + s != 0.0


@dataclass(frozen=True)
class FusionPair:
    """Parameter pair (r, s); in_domain records whether r, s, r + s are all nonzero."""

    r: float
    s: float
    in_domain: bool = dc_field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "in_domain", _in_domain(self.r, self.s))


def gamma(r: float, s: float) -> np.ndarray:
    """Change-of-variables matrix [[r/(r+s), s/(r+s)], [-1, 1]], det 1."""
    if not _in_domain(r, s):
        raise ValueError(_DOMAIN_MSG + f", got r={r}, s={s}")
    tot = r + s
    return np.array([[r / tot, s / tot], [-1.0, 1.0]])


class IntertwinerResult(NamedTuple):
    matrix: np.ndarray
    sampling_defect: float
    near_singular: bool


def _exact_ratio(r: float, s: float) -> Fraction:
    return Fraction(s) / (Fraction(r) + Fraction(s))


# shift stacks are small (N^3 complex entries), defect entries are floats
_CACHE_CAP = 512

_TL_CACHE: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
_TU_CACHE: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
_DEFECT_CACHE: "OrderedDict[tuple, float]" = OrderedDict()


def clear_intertwiner_cache() -> None:
    _TL_CACHE.clear()
    _TU_CACHE.clear()
    _DEFECT_CACHE.clear()


def _cache_get(cache: OrderedDict, key):
    if key in cache:
        cache.move_to_end(key)
        return cache[key]
    return None


def _cache_put(cache: OrderedDict, key, value) -> None:
    cache[key] = value
    cache.move_to_end(key)
    while len(cache) > _CACHE_CAP:
        cache.popitem(last=False)


def _grid_key(grid: GridSpec1D) -> tuple:
    return (grid.n_points, grid.half_width)


def _shift_stack(grid: GridSpec1D, shifts: np.ndarray) -> np.ndarray:
    """Stack of band-limited shift matrices, stack[i] shifts by shifts[i]."""
    dft = np.fft.fft(np.eye(grid.n_points, dtype=complex), axis=0)
    phases = np.exp(-2j * np.pi * np.outer(shifts, grid.frequencies))
    return np.fft.ifft(phases[:, :, None] * dft[None, :, :], axis=1)


def _tl_stack(grid: GridSpec1D) -> np.ndarray:
    # second-variable shear: the block at first-variable node w shifts by -w
    key = _grid_key(grid)
    got = _cache_get(_TL_CACHE, key)
    if got is None:
        got = _shift_stack(grid, -grid.nodes)
        got.setflags(write=False)
        _cache_put(_TL_CACHE, key, got)
    return got


def _tu_stack(ratio: Fraction, grid: GridSpec1D) -> np.ndarray:
    # first-variable shear: the block at second-variable node w shifts by ratio*w
    key = (_grid_key(grid), ratio)
    got = _cache_get(_TU_CACHE, key)
    if got is None:
        got = _shift_stack(grid, float(ratio) * grid.nodes)
        got.setflags(write=False)
        _cache_put(_TU_CACHE, key, got)
    return got


def _dense_w(ratio: Fraction, grid: GridSpec1D) -> np.ndarray:
    """W[(u,n),(p,q)] = TU[n][u,p] * TL[p][n,q], rows (i,j) -> i*N+j."""
    n = grid.n_points
    tu = _tu_stack(ratio, grid)
    tl = _tl_stack(grid)
    w = np.einsum("nup,pnq->unpq", tu, tl, optimize=True)
    return np.ascontiguousarray(w.reshape(n * n, n * n))


def _eval_weights(points: np.ndarray, grid: GridSpec1D) -> np.ndarray:
    """Rows evaluate a carrier vector at off-grid points by band interpolation."""
    a = np.exp(2j * np.pi * np.outer(points, grid.frequencies))
    b = np.exp(-2j * np.pi * np.outer(grid.frequencies, grid.nodes))
    return (a @ b) / grid.n_points


def _sampled_composition(ratio: Fraction, grid: GridSpec1D) -> np.ndarray:
    """Composition with gamma^{-1} sampled on a doubled grid, band-projected.

    Sampling on the N x N grid itself aliases colliding frequency pairs
    for half-integer shears; the double-then-project route keeps those
    directions distinct, at the cost of a contraction.
    """
    n = grid.n_points
    fine = GridSpec1D(2 * n, grid.half_width)
    rr = float(ratio)
    hh = np.repeat(fine.nodes, 2 * n)
    kk = np.tile(fine.nodes, 2 * n)
    cu = _eval_weights(hh - kk * rr, grid).reshape(2 * n, 2 * n, n)
    cv = _eval_weights(hh + kk * (1.0 - rr), grid).reshape(2 * n, 2 * n, n)
    ph1 = np.exp(2j * np.pi * np.outer(grid.nodes, grid.frequencies))
    ph2 = np.exp(-2j * np.pi * np.outer(grid.frequencies, fine.nodes))
    pd = (ph1 @ ph2) / (2 * n)
    x = np.empty((2 * n, n, n * n), dtype=complex)
    for a in range(2 * n):
        cuv = (cu[a, :, :, None] * cv[a, :, None, :]).reshape(2 * n, n * n)
        x[a] = pd @ cuv
    w = pd @ x.reshape(2 * n, n * n * n)
    return w.reshape(n * n, n * n)


def _sampling_defect(ratio: Fraction, grid: GridSpec1D) -> float:
    key = (_grid_key(grid), ratio)
    got = _cache_get(_DEFECT_CACHE, key)
    if got is None:
        w = _sampled_composition(ratio, grid)
        gram = np.linalg.eigvalsh(w.conj().T @ w)
        got = float(np.max(np.abs(gram - 1.0)))
        _cache_put(_DEFECT_CACHE, key, got)
    return got


def intertwiner(
    r: float, s: float, grid: GridSpec1D, delta_dom: float = 0.0
) -> IntertwinerResult:
    """Unitary intertwiner between pi_r (x) pi_s and pi_{r+s} (x) 1.

    matrix is the exact two-shear composition unitary on the tensor
    carrier, unitary to roundoff for every admissible (r, s).
    sampling_defect is ||Ws* Ws - I||_inf for the band-projected
    point-sampled composition Ws on the same grid, reported as a
    diagnostic of how well the grid resolves the shear; it does not
    enter the returned matrix.  near_singular flags |r + s| below
    delta_dom.

    Raises ValueError for non-finite input or when any of r, s, r + s
    is zero.  The shear matrix itself only degenerates at r + s == 0,
    but the representations being fused need nonzero parameters.
    """
    if not (math.isfinite(r) and math.isfinite(s)):
        raise ValueError(f"fusion parameters must be finite, got r={r}, s={s}")
    if not _in_domain(r, s):
        raise ValueError(_DOMAIN_MSG + f", got r={r}, s={s}")
    if not (math.isfinite(delta_dom) and delta_dom >= 0):
        raise ValueError(f"delta_dom must be finite and >= 0, got {delta_dom}")
    ratio = _exact_ratio(r, s)
    matrix = _dense_w(ratio, grid)
    defect = _sampling_defect(ratio, grid)
    return IntertwinerResult(matrix, defect, bool(abs(r + s) < delta_dom))


def partial_trace_second(big: np.ndarray, dim_first: int) -> np.ndarray:
    """Trace out the second tensor factor, row order (i, j) -> i*dim2 + j."""
    big = np.asarray(big)
    if big.ndim != 2 or big.shape[0] != big.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {big.shape}")
    dim = big.shape[0]
    if dim_first <= 0 or dim % dim_first != 0:
        raise ValueError(f"dimension {dim} does not factor through {dim_first}")
    dim2 = dim // dim_first
    return np.einsum("ijkj->ik", big.reshape(dim_first, dim2, dim_first, dim2))


def _theta_term(
    ratio: Fraction, grid: GridSpec1D, a: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """partial_trace_second(W kron(a, b) W*) without materializing W.

    The diagonal slices (TL[m] b TL[p]*)[n, n] weight a entrywise, then
    one batched similarity by TU and a sum over the traced index finish
    the contraction in O(N^4).
    """
    tl = _tl_stack(grid)
    tu = _tu_stack(ratio, grid)
    y = np.matmul(tl, b)
    g = np.einsum("mnq,pnq->mpn", y, np.conj(tl), optimize=True)
    e = np.ascontiguousarray((a[:, :, None] * g).transpose(2, 0, 1))
    z = np.matmul(np.matmul(tu, e), np.conj(tu).transpose(0, 2, 1))
    return z.sum(axis=0)


def _check_pair(
    field_f: OperatorField, field_g: OperatorField, grid: GridSpec1D
) -> None:
    if not field_f.same_lattice(field_g):
        raise ValueError("fields live on different lattices")
    if field_f.dim != grid.n_points:
        raise ValueError(
            f"field dimension {field_f.dim} does not match grid {grid.n_points}"
        )


def theta1(
    field_f: OperatorField,
    field_g: OperatorField,
    r_node: float,
    s_node: float,
    grid: GridSpec1D,
) -> np.ndarray:
    """Fused coefficient ptrace_2(W (F(r) kron G(s)) W*) at one node pair.

    Returns the zero matrix when (r_node, s_node) falls off the shared
    punctured lattice, off the domain (r, s, r + s all nonzero), or
    where a factor vanishes.
    """
    _check_pair(field_f, field_g, grid)
    n = grid.n_points
    zero = np.zeros((n, n), dtype=complex)
    if not _in_domain(r_node, s_node):
        return zero
    j = field_f.tgrid.lattice_k(r_node)
    m = field_g.tgrid.lattice_k(s_node)
    if j is None or m is None or j + m == 0:
        return zero
    if field_f.tgrid.index_of(j) is None or field_g.tgrid.index_of(m) is None:
        return zero
    return _theta_term(
        Fraction(m, j + m), grid, field_f.at_k(j), field_g.at_k(m)
    )


def dual_convolution(
    field_f: OperatorField,
    field_g: OperatorField,
    grid: GridSpec1D,
    tol_skip: float = 0.0,
    with_theta_bounds: bool = False,
):
    """Dual convolution (F # G)(t_k) = sum_j Delta * theta1(F, G, t_j, t_k - t_j).

    The inner sum runs over lattice pairs (j, k - j) with both indices on
    the punctured lattice.  Pairs whose trace-norm product falls below
    tol_skip times the product of the largest node trace norms are
    skipped; the total skipped mass per node is below tol_skip *
    a_norm(F) * a_norm(G) / Delta.

    With with_theta_bounds=True returns (field, bounds) where bounds[i] =
    sum_j Delta * ||theta1(...)||_1 over the same terms, the node-wise
    triangle-inequality majorant of the result.
    """
    _check_pair(field_f, field_g, grid)
    if not (math.isfinite(tol_skip) and tol_skip >= 0):
        raise ValueError(f"tol_skip must be finite and >= 0, got {tol_skip}")
    tg = field_f.tgrid
    n = grid.n_points
    tn_f = np.array([schatten_norm(m, 1) for m in field_f.mats])
    tn_g = np.array([schatten_norm(m, 1) for m in field_g.mats])
    cut = tol_skip * tn_f.max() * tn_g.max()
    out = np.zeros((tg.n_nodes, n, n), dtype=complex)
    bounds = np.zeros(tg.n_nodes)
    for k in tg.ks:
        acc = np.zeros((n, n), dtype=complex)
        bsum = 0.0
        for j in tg.ks:
            m = k - j
            pos_m = tg.index_of(m)
            if pos_m is None:
                continue
            pos_j = tg.index_of(j)
            if tn_f[pos_j] * tn_g[pos_m] <= cut:
                continue
            term = _theta_term(
                Fraction(m, k), grid, field_f.mats[pos_j], field_g.mats[pos_m]
            )
            acc += term
            if with_theta_bounds:
                bsum += schatten_norm(term, 1)
        pos_k = tg.index_of(k)
        out[pos_k] = tg.delta * acc
        bounds[pos_k] = tg.delta * bsum
    result = OperatorField(tg, out)
    if with_theta_bounds:
        return result, bounds
    return result


def product_coefficient_defect(
    f1, f2, tgrid: TGrid, grid: GridSpec1D, tol_skip: float = 0.0
) -> float:
    """Relative defect of |t| pi_t(f1 f2) against (F1 # F2)(t) over the lattice.

    Both sides are compared in trace norm node by node; the defect is the
    largest node trace-norm gap divided by the largest node trace norm of
    the direct side.  Raises ValueError when the direct side vanishes
    identically while the convolution side does not.
    """
    from .schrodinger import forward_field

    f_one = forward_field(f1, tgrid, grid)
    f_two = forward_field(f2, tgrid, grid)
    direct = forward_field(f1 * f2, tgrid, grid)
    fused = dual_convolution(f_one, f_two, grid, tol_skip=tol_skip)
    gaps = np.array(
        [schatten_norm(a - b, 1) for a, b in zip(direct.mats, fused.mats)]
    )
    scale = max(schatten_norm(m, 1) for m in direct.mats)
    if scale == 0.0:
        if float(gaps.max()) == 0.0:
            return 0.0
        raise ValueError("product coefficients vanish but the convolution does not")
    return float(gaps.max()) / scale

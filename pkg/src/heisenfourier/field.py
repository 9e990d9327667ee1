"""Frequency lattices and operator-valued fields over them.

A TGrid is the punctured symmetric lattice {k*delta : k = -K..K, k != 0}.
An OperatorField assigns one square complex matrix to every lattice node;
it is the discrete stand-in for an integrable trace-class-valued field
over the frequency line.  Stored fields follow the measure-absorbed
convention: the node matrix already contains the |t| density factor, so
downstream sums use plain delta weights.

Off-lattice frequencies (including 0 and points beyond the range) carry
the zero matrix; the excluded set has vanishing measure weight.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

_LATTICE_RTOL = 1e-9


@dataclass(frozen=True)
class TGrid:
    delta: float
    k_max: int

    def __post_init__(self) -> None:
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be positive and finite, got {self.delta}")
        if not (isinstance(self.k_max, int) and self.k_max >= 1):
            raise ValueError(f"k_max must be a positive integer, got {self.k_max}")

    @property
    def ks(self) -> tuple:
        K = self.k_max
        return tuple(range(-K, 0)) + tuple(range(1, K + 1))

    @cached_property
    def nodes(self) -> np.ndarray:
        t = np.array([k * self.delta for k in self.ks])
        t.setflags(write=False)
        return t

    @property
    def n_nodes(self) -> int:
        return 2 * self.k_max

    def index_of(self, k: int) -> Optional[int]:
        """Position of integer node k in the storage order, None if absent."""
        if k == 0 or abs(k) > self.k_max:
            return None
        return k + self.k_max if k < 0 else self.k_max + k - 1

    def lattice_k(self, t: float) -> Optional[int]:
        """Integer k with t = k*delta up to rounding noise, else None."""
        k = round(t / self.delta)
        if abs(t - k * self.delta) <= _LATTICE_RTOL * max(1.0, abs(t)):
            return k
        return None


@dataclass
class OperatorField:
    tgrid: TGrid
    mats: np.ndarray

    def __post_init__(self) -> None:
        self.mats = np.asarray(self.mats, dtype=complex)
        n = self.tgrid.n_nodes
        if self.mats.ndim != 3 or self.mats.shape[0] != n:
            raise ValueError(
                f"expected {n} node matrices, got array of shape {self.mats.shape}"
            )
        if self.mats.shape[1] != self.mats.shape[2]:
            raise ValueError("node matrices must be square")
        if not np.all(np.isfinite(self.mats)):
            raise ValueError("field contains non-finite entries")

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    def zero_mat(self) -> np.ndarray:
        return np.zeros((self.dim, self.dim), dtype=complex)

    def at_k(self, k: int) -> np.ndarray:
        pos = self.tgrid.index_of(k)
        if pos is None:
            return self.zero_mat()
        return self.mats[pos]

    def at_t(self, t: float) -> np.ndarray:
        """Node matrix at frequency t; zero off the punctured lattice."""
        k = self.tgrid.lattice_k(t)
        if k is None:
            return self.zero_mat()
        return self.at_k(k)

    def same_lattice(self, other: "OperatorField") -> bool:
        return self.tgrid == other.tgrid and self.dim == other.dim

    def scaled(self, c: complex) -> "OperatorField":
        return OperatorField(self.tgrid, c * self.mats)

    def __add__(self, other: "OperatorField") -> "OperatorField":
        if not self.same_lattice(other):
            raise ValueError("fields live on different lattices")
        return OperatorField(self.tgrid, self.mats + other.mats)

    def __sub__(self, other: "OperatorField") -> "OperatorField":
        if not self.same_lattice(other):
            raise ValueError("fields live on different lattices")
        return OperatorField(self.tgrid, self.mats - other.mats)


def zero_field(tgrid: TGrid, dim: int) -> OperatorField:
    return OperatorField(tgrid, np.zeros((tgrid.n_nodes, dim, dim), dtype=complex))


# ---------------------------------------------------------------------------
# directory serialization: meta.txt plus one raw little-endian complex-double
# matrix file per node, named by the integer node index


def save_field(F: OperatorField, dirpath) -> None:
    os.makedirs(dirpath, exist_ok=True)
    with open(os.path.join(dirpath, "meta.txt"), "w") as fh:
        fh.write(f"delta {F.tgrid.delta!r}\n")
        fh.write(f"k_max {F.tgrid.k_max}\n")
        fh.write(f"dim {F.dim}\n")
    for pos, k in enumerate(F.tgrid.ks):
        mat = np.ascontiguousarray(F.mats[pos], dtype="<c16")
        with open(os.path.join(dirpath, f"{k}.bin"), "wb") as fh:
            fh.write(mat.tobytes())


def load_field(dirpath) -> OperatorField:
    meta = {}
    with open(os.path.join(dirpath, "meta.txt")) as fh:
        for line in fh:
            parts = line.split()
            if len(parts) == 2:
                meta[parts[0]] = parts[1]
    try:
        tgrid = TGrid(float(meta["delta"]), int(meta["k_max"]))
        dim = int(meta["dim"])
    except KeyError as missing:
        raise ValueError(f"{dirpath}: metadata lacks {missing}") from None
    mats = np.empty((tgrid.n_nodes, dim, dim), dtype=complex)
    for pos, k in enumerate(tgrid.ks):
        path = os.path.join(dirpath, f"{k}.bin")
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) != dim * dim * 16:
            raise ValueError(f"{path}: expected {dim * dim * 16} bytes, got {len(raw)}")
        mats[pos] = np.frombuffer(raw, dtype="<c16").reshape(dim, dim)
    return OperatorField(tgrid, mats)

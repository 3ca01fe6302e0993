"""Geometry of the discrete torus (Z/NZ)^d.

Points are coordinate tuples; bulk array work uses flat integer labels in
row-major (lexicographic) order, label(p) = sum_i p_i * N^(d-1-i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TorusPoint = tuple[int, ...]

_LABEL_CAP = 2**31


@dataclass(frozen=True)
class TorusGeometry:
    d: int
    N: int
    strides: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.d < 3:
            raise ValueError(f"d must be >= 3, got {self.d}")
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.N**self.d > _LABEL_CAP:
            raise ValueError(f"N^d = {self.N**self.d} exceeds label capacity {_LABEL_CAP}")
        object.__setattr__(
            self, "strides", tuple(self.N ** (self.d - 1 - i) for i in range(self.d))
        )

    @property
    def volume(self) -> int:
        return self.N**self.d

    def project(self, p: Sequence[int]) -> TorusPoint:
        """Map a Z^d point onto the torus coordinatewise."""
        if len(p) != self.d:
            raise ValueError(f"point has {len(p)} coordinates, geometry has d = {self.d}")
        return tuple(int(c) % self.N for c in p)

    def label(self, p: Sequence[int]) -> int:
        q = self.project(p)
        return sum(c * s for c, s in zip(q, self.strides))

    def unlabel(self, lab: int) -> TorusPoint:
        if not 0 <= lab < self.volume:
            raise ValueError(f"label {lab} out of range [0, {self.volume})")
        out = []
        for s in self.strides:
            out.append(lab // s)
            lab %= s
        return tuple(out)

    # vectorized forms; coords arrays have shape (n, d), labels shape (n,)

    def labels_of(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords)
        return (np.mod(coords, self.N) @ np.array(self.strides, dtype=np.int64)).astype(np.int64)

    def coords_of(self, labels: np.ndarray) -> np.ndarray:
        labels = np.asarray(labels, dtype=np.int64)
        out = np.empty(labels.shape + (self.d,), dtype=np.int64)
        rem = labels
        for i, s in enumerate(self.strides):
            out[..., i] = rem // s
            rem = rem % s
        return out

    def difference_vector(self, x: Sequence[int], y: Sequence[int]) -> TorusPoint:
        """Minimal-length lift of y - x; even-N antipodal ties resolve to +N/2."""
        xs = self.project(x)
        ys = self.project(y)
        return tuple(_min_lift(yi - xi, self.N) for xi, yi in zip(xs, ys))

    def dist_inf(self, x: Sequence[int], y: Sequence[int]) -> int:
        return max(abs(c) for c in self.difference_vector(x, y))

    def dist_1(self, x: Sequence[int], y: Sequence[int]) -> int:
        return sum(abs(c) for c in self.difference_vector(x, y))

    def diff_vectors(self, labels: np.ndarray, point: Sequence[int]) -> np.ndarray:
        """Minimal lifts of (labels - point), shape (n, d). Same tie rule as above."""
        delta = np.mod(self.coords_of(labels) - np.asarray(self.project(point)), self.N)
        over = 2 * delta > self.N
        delta[over] -= self.N
        return delta

    def dist_inf_many(self, labels: np.ndarray, point: Sequence[int]) -> np.ndarray:
        return np.abs(self.diff_vectors(labels, point)).max(axis=1)

    def step_label(self, lab: int, axis: int, sign: int) -> int:
        """Move one lattice step from a label along +-e_axis."""
        c = (lab // self.strides[axis]) % self.N
        return lab + ((c + sign) % self.N - c) * self.strides[axis]

    def neighbor_labels(self, lab: int) -> list[int]:
        return [self.step_label(lab, a, s) for a in range(self.d) for s in (1, -1)]


def _min_lift(delta: int, N: int) -> int:
    delta %= N
    if 2 * delta > N:
        delta -= N
    return delta  # ties (2*delta == N) stay at +N/2


@dataclass(frozen=True)
class LatticeCube:
    """Q(x, R): the cube x + ([-floor((R-1)/2), ceil((R-1)/2)] cap Z)^d in Z^d."""

    center: TorusPoint
    side: int

    def __post_init__(self) -> None:
        if self.side < 1:
            raise ValueError(f"side must be >= 1, got {self.side}")

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def lo(self) -> TorusPoint:
        h = (self.side - 1) // 2
        return tuple(c - h for c in self.center)

    @property
    def hi(self) -> TorusPoint:
        h = -(-(self.side - 1) // 2)
        return tuple(c + h for c in self.center)

    @property
    def volume(self) -> int:
        return self.side ** self.d

    def contains(self, p: Sequence[int]) -> bool:
        return all(lo <= c <= hi for lo, c, hi in zip(self.lo, p, self.hi))

    def points(self) -> np.ndarray:
        """All cube points as a (side^d, d) array, lexicographic order."""
        axes = [np.arange(lo, hi + 1) for lo, hi in zip(self.lo, self.hi)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)

    def torus_labels(self, geo: TorusGeometry) -> np.ndarray:
        """Projected labels; requires side <= N so the projection is injective."""
        if self.d != geo.d:
            raise ValueError("cube and geometry dimension mismatch")
        if self.side > geo.N:
            raise ValueError(f"side {self.side} > N = {geo.N}: projection not injective")
        return geo.labels_of(self.points())


def bulk_edge_split(geo: TorusGeometry, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Split labels into the central bulk Q(0, (1-delta)N) and its complement.

    Returns (bulk_mask, edge_mask) boolean arrays of length N^d. The bulk side
    is floor((1-delta)N) and must be >= 1.
    """
    if not 0 < delta <= 1:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    side = math.floor((1 - delta) * geo.N)
    if side < 1:
        raise ValueError(f"bulk side floor((1-{delta})*{geo.N}) = {side} < 1")
    bulk = np.zeros(geo.volume, dtype=bool)
    cube = LatticeCube(center=(0,) * geo.d, side=side)
    bulk[cube.torus_labels(geo)] = True
    return bulk, ~bulk


def cube_around(geo: TorusGeometry, center: Sequence[int], side: int) -> LatticeCube:
    return LatticeCube(center=geo.project(center), side=side)


def iter_points(geo: TorusGeometry) -> Iterable[TorusPoint]:
    for lab in range(geo.volume):
        yield geo.unlabel(lab)

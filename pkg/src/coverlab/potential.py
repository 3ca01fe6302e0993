"""Discrete potential theory for the simple random walk on Z^d, d >= 3.

Green's function by two independent routes:

  method A: Dirichlet solve of (I - P) g = delta_0 on a large box, boundary
  data from the leading asymptotic C_d |x|^{2-d}. The solve runs on the
  fundamental domain of the signed-permutation symmetry group (sorted
  nonnegative coordinates), which keeps the system small and makes the
  solution exactly symmetric, so g(0) - g(e_1) = 1 holds to solver precision.

  method B: Monte Carlo. g(0) = E[visits to 0 before exiting an l2 ball of
  radius R] + E[g(X_exit)], with the second term evaluated via the asymptotic.
  The harmonic-tail term is exact in expectation; only the asymptotic error
  at radius R (O(R^{-d})) biases the estimate.

Capacities come from the dense linear system sum_y g(x-y) e(y) = 1 on K.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import _kernels
from .streams import RngStream
from .torus import TorusGeometry

CACHE_ENV = "COVERLAB_CACHE"
TABLE_VERSION = 1

DEFAULT_BOX_RADIUS = 100
DEFAULT_TAB_RADIUS = 40
DEFAULT_MC_WALKS = 12_000_000
DEFAULT_MC_RADIUS = 20.0


class OutsideTableError(ValueError):
    """A Green value was requested beyond the tabulation radius."""


def asymptotic_constant(d: int) -> float:
    """C_d in g(x) ~ C_d |x|_2^{2-d}; computed, not hard-coded."""
    if d < 3:
        raise ValueError("transience needs d >= 3")
    return (d / 2.0) * math.gamma(d / 2.0 - 1.0) / math.pi ** (d / 2.0)


def cache_dir() -> Path:
    root = os.environ.get(CACHE_ENV)
    if root:
        return Path(root)
    return Path.home() / ".cache" / "coverlab"


def _canon(q: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(abs(c) for c in q))


def _orbit_size(p: tuple[int, ...]) -> int:
    nz = sum(1 for c in p if c != 0)
    size = 2**nz * math.factorial(len(p))
    for c in set(p):
        size //= math.factorial(sum(1 for x in p if x == c))
    return size


def _solve_box(d: int, box_radius: int) -> dict[tuple[int, ...], float]:
    """Green values on canonical points of the box, by the reduced CG solve."""
    reps: list[tuple[int, ...]] = []
    index: dict[tuple[int, ...], int] = {}

    def rec(prefix: list[int], lo: int) -> None:
        if len(prefix) == d:
            index[tuple(prefix)] = len(reps)
            reps.append(tuple(prefix))
            return
        for c in range(lo, box_radius + 1):
            rec(prefix + [c], c)

    rec([], 0)
    n = len(reps)
    w = np.array([_orbit_size(p) for p in reps], dtype=np.float64)
    cd = asymptotic_constant(d)

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs = np.zeros(n)
    rhs[index[(0,) * d]] = 1.0
    inv2d = 1.0 / (2 * d)
    for r, p in enumerate(reps):
        rows.append(r)
        cols.append(r)
        vals.append(1.0)
        for axis in range(d):
            for sign in (1, -1):
                q = list(p)
                q[axis] += sign
                if max(abs(c) for c in q) > box_radius:
                    norm = math.sqrt(sum(c * c for c in q))
                    rhs[r] += inv2d * cd * norm ** (2 - d)
                else:
                    rows.append(r)
                    cols.append(index[_canon(tuple(q))])
                    vals.append(-inv2d)
    m = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    # symmetrize with orbit weights: diag(w) @ m is SPD (it is R^T (I-P) R for
    # the orbit-sum prolongation R), so CG applies
    s = scipy.sparse.diags(w) @ m
    s = s.tocsr()
    b = w * rhs
    precond = scipy.sparse.diags(1.0 / s.diagonal())
    g, info = scipy.sparse.linalg.cg(s, b, rtol=1e-12, atol=0.0, maxiter=30_000, M=precond)
    if info != 0:
        raise RuntimeError(f"green solve did not converge (info={info})")
    return {p: float(v) for p, v in zip(reps, g)}


def _mc_green_origin(
    d: int, stream: RngStream, n_walks: int, radius: float
) -> tuple[float, float]:
    """Method B estimate of g(0) and its standard error."""
    cd = asymptotic_constant(d)
    total, total_sq, overflow = _kernels.zd_escape_batch(
        d, stream.kernel_seed(), n_walks, radius * radius, 50_000_000, cd, (2 - d) / 2.0
    )
    if overflow:
        raise RuntimeError(f"{overflow} escape walks exceeded the step budget")
    mean = total / n_walks
    var = max(total_sq / n_walks - mean * mean, 0.0)
    return mean, math.sqrt(var / n_walks)


@dataclass(frozen=True)
class GreenTable:
    """Tabulated g(x) for |x|_inf <= tab_radius, plus build metadata."""

    d: int
    box_radius: int
    tab_radius: int
    values: np.ndarray  # shape (2*tab+1,)*d, index = x + tab per axis
    g0_mc: float
    g0_mc_sigma: float
    mc_walks: int
    mc_radius: float
    digest: str = ""

    def value(self, x) -> float:
        x = tuple(int(c) for c in x)
        if len(x) != self.d:
            raise ValueError("dimension mismatch")
        if max(abs(c) for c in x) > self.tab_radius:
            raise OutsideTableError(f"|x|_inf > tabulation radius {self.tab_radius}")
        return float(self.values[tuple(c + self.tab_radius for c in x)])

    def value_or_asym(self, x) -> float:
        x = tuple(int(c) for c in x)
        if max(abs(c) for c in x) <= self.tab_radius:
            return self.value(x)
        norm = math.sqrt(sum(c * c for c in x))
        return asymptotic_constant(self.d) * norm ** (2 - self.d)

    def values_at(self, coords: np.ndarray) -> np.ndarray:
        """Vectorized lookup; coords (n, d) must be inside the table."""
        coords = np.asarray(coords, dtype=np.int64)
        if np.abs(coords).max(initial=0) > self.tab_radius:
            raise OutsideTableError(f"coords exceed tabulation radius {self.tab_radius}")
        idx = tuple((coords[:, i] + self.tab_radius) for i in range(self.d))
        return self.values[idx]

    @property
    def g0(self) -> float:
        return self.value((0,) * self.d)

    @property
    def g_e1(self) -> float:
        return self.value((1,) + (0,) * (self.d - 1))


def build_green_table(
    d: int,
    box_radius: int = DEFAULT_BOX_RADIUS,
    tab_radius: int = DEFAULT_TAB_RADIUS,
    mc_walks: int = DEFAULT_MC_WALKS,
    mc_radius: float = DEFAULT_MC_RADIUS,
    seed: int = 20260816,
) -> GreenTable:
    if tab_radius >= box_radius:
        raise ValueError("tab_radius must be < box_radius")
    sol = _solve_box(d, box_radius)
    side = 2 * tab_radius + 1
    values = np.empty((side,) * d)
    for idx in np.ndindex(*values.shape):
        x = tuple(i - tab_radius for i in idx)
        values[idx] = sol[_canon(x)]
    g0_mc, sigma = _mc_green_origin(d, RngStream(seed, (101,)), mc_walks, mc_radius)
    return GreenTable(
        d=d,
        box_radius=box_radius,
        tab_radius=tab_radius,
        values=values,
        g0_mc=g0_mc,
        g0_mc_sigma=sigma,
        mc_walks=mc_walks,
        mc_radius=mc_radius,
    )


def _cache_path(d: int, box_radius: int, tab_radius: int) -> Path:
    name = f"green_d{d}_box{box_radius}_tab{tab_radius}_v{TABLE_VERSION}.npz"
    return cache_dir() / name


def load_or_build_green_table(
    d: int,
    box_radius: int = DEFAULT_BOX_RADIUS,
    tab_radius: int = DEFAULT_TAB_RADIUS,
    mc_walks: int = DEFAULT_MC_WALKS,
    mc_radius: float = DEFAULT_MC_RADIUS,
    seed: int = 20260816,
) -> GreenTable:
    path = _cache_path(d, box_radius, tab_radius)
    if path.exists():
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            if meta.get("version") == TABLE_VERSION:
                return GreenTable(
                    d=d,
                    box_radius=box_radius,
                    tab_radius=tab_radius,
                    values=z["values"],
                    g0_mc=meta["g0_mc"],
                    g0_mc_sigma=meta["g0_mc_sigma"],
                    mc_walks=meta["mc_walks"],
                    mc_radius=meta["mc_radius"],
                    digest=meta.get("digest", ""),
                )
    table = build_green_table(d, box_radius, tab_radius, mc_walks, mc_radius, seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    digest = hashlib.sha256(table.values.tobytes()).hexdigest()
    meta = {
        "version": TABLE_VERSION,
        "d": d,
        "box_radius": box_radius,
        "tab_radius": tab_radius,
        "g0_mc": table.g0_mc,
        "g0_mc_sigma": table.g0_mc_sigma,
        "mc_walks": table.mc_walks,
        "mc_radius": table.mc_radius,
        "seed": seed,
        "digest": digest,
    }
    tmp = path.with_suffix(".tmp.npz")
    np.savez_compressed(tmp, values=table.values, meta=np.str_(json.dumps(meta)))
    tmp.replace(path)
    return GreenTable(**{**table.__dict__, "digest": digest})


@lru_cache(maxsize=4)
def green_table(d: int = 3) -> GreenTable:
    return load_or_build_green_table(d)


def green_value(d: int, x) -> float:
    return green_table(d).value_or_asym(x)


@dataclass(frozen=True)
class PotentialConstants:
    d: int
    g0: float
    g_e1: float
    c3: float
    c4: float
    escape: float  # probability of never returning to the start

    @property
    def identity_defect(self) -> float:
        return abs((self.g0 - self.g_e1) - 1.0)


def lattice_constants(d: int = 3) -> PotentialConstants:
    t = green_table(d)
    c4 = 2.0 * t.g0 / (t.g0 + t.g_e1)
    c3 = (1.0 + c4) / 2.0
    consts = PotentialConstants(d=d, g0=t.g0, g_e1=t.g_e1, c3=c3, c4=c4, escape=1.0 / t.g0)
    if consts.identity_defect > 1e-9:
        raise RuntimeError(f"g(0)-g(e_1)=1 violated by {consts.identity_defect:.3e}")
    if not (1.0 < c3 < c4):
        raise RuntimeError(f"constants out of order: c3={c3}, c4={c4}")
    return consts


@dataclass(frozen=True)
class CapacityResult:
    points: np.ndarray  # (n, d) lattice points
    masses: np.ndarray  # equilibrium masses, same order
    capacity: float
    residual: float  # max |G e - 1|

    @property
    def normalized(self) -> np.ndarray:
        return self.masses / self.capacity


MAX_DENSE_POINTS = 4000


def equilibrium_measure(points: np.ndarray, table: GreenTable | None = None) -> CapacityResult:
    """Equilibrium measure and capacity of a finite K subset of Z^d.

    Solves sum_y g(x-y) e(y) = 1 for x in K as a dense SPD system.
    """
    pts = np.asarray(points, dtype=np.int64)
    if pts.ndim != 2:
        raise ValueError("points must be an (n, d) array")
    n, d = pts.shape
    if n == 0:
        raise ValueError("K must be nonempty")
    if n > MAX_DENSE_POINTS:
        raise ValueError(f"|K| = {n} exceeds the dense-solve limit {MAX_DENSE_POINTS}")
    if np.unique(pts, axis=0).shape[0] != n:
        raise ValueError("K has repeated points")
    if table is None:
        table = green_table(d)
    diffs = pts[:, None, :] - pts[None, :, :]
    gmat = table.values_at(diffs.reshape(-1, d)).reshape(n, n)
    try:
        cf = scipy.linalg.cho_factor(gmat)
        e = scipy.linalg.cho_solve(cf, np.ones(n))
    except scipy.linalg.LinAlgError as exc:
        cond = np.linalg.cond(gmat)
        raise RuntimeError(f"green matrix not SPD (cond ~ {cond:.3e})") from exc
    residual = float(np.abs(gmat @ e - 1.0).max())
    return CapacityResult(points=pts, masses=e, capacity=float(e.sum()), residual=residual)


def cube_capacity(d: int, side: int, table: GreenTable | None = None) -> CapacityResult:
    from .torus import LatticeCube

    cube = LatticeCube(center=(0,) * d, side=side)
    return equilibrium_measure(cube.points(), table=table)


def torus_capacity(geo: TorusGeometry, labels: np.ndarray, table: GreenTable | None = None) -> CapacityResult:
    """Capacity of a torus subset via an injective lift to Z^d.

    Each axis is cut inside its widest unoccupied gap, which minimizes the
    lifted span; fails if some axis is fully occupied (the set cannot be
    lifted injectively, which is the operational meaning of diameter >= N).
    """
    labels = np.asarray(labels, dtype=np.int64)
    coords = geo.coords_of(labels)
    lifted = np.empty_like(coords)
    for axis in range(geo.d):
        occupied = np.zeros(geo.N, dtype=bool)
        occupied[coords[:, axis]] = True
        if occupied.all():
            raise ValueError(f"axis {axis} fully occupied: set has torus diameter >= N")
        # longest circular free run; the doubled array handles the wrap
        free2 = np.concatenate([~occupied, ~occupied])
        run = 0
        best_len, best_end = 0, 0
        for i in range(2 * geo.N):
            if free2[i]:
                run = min(run + 1, geo.N)
                if run > best_len:
                    best_len, best_end = run, i
            else:
                run = 0
        shift = (best_end + 1) % geo.N  # first residue past the widest gap
        lifted[:, axis] = (coords[:, axis] - shift) % geo.N
    span = lifted.max(axis=0) - lifted.min(axis=0)
    if (span >= geo.N).any():
        raise ValueError("lifted set spans a full axis")
    lifted -= (lifted.min(axis=0) + lifted.max(axis=0)) // 2
    return equilibrium_measure(lifted, table=table)

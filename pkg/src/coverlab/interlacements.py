"""Local random-interlacement sampler on a finite window K in Z^d.

Trajectories arrive as a Poisson process of rate cap(K) in the level
parameter; each starts from the normalized equilibrium measure of K and
walks simple random walk, recording its trace inside K. Walks are
truncated at a concentric cube of side kappa*(diam K + 1). Truncation
alone would bias vacancy upward (a stopped walk can no longer return),
so at each truncation exit z we apply the exact last-exit identity

    P_z(hit K) = sum_y g(z - y) e_K(y)

as a Bernoulli probe: with that probability the walk re-enters K at a
point drawn from the normalized g(z - .) e_K(.) weights and continues
(the truncation cube doubling each round); otherwise it never returns
and the trajectory ends. The entry weights are exact for a singleton
window and first-order accurate in diam(K)/dist otherwise; the residual
bias is far below the 0.005 budget the vacancy checks allow for. The
probe is skipped once the bound drops under `rtol`.

`corrections=False` gives the pure truncation sampler; continuing the
same walks into a doubled cube (the RNG state is chained through the
jitted legs) then yields coupled samples whose traces only grow, which
pins the direction of the truncation bias.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .potential import (
    CapacityResult,
    GreenTable,
    asymptotic_constant,
    equilibrium_measure,
    green_table,
)
from .streams import RngStream

DEFAULT_KAPPA = 8
DEFAULT_RTOL = 1e-4
MAX_RESUME_ROUNDS = 64


class TruncationBudgetError(RuntimeError):
    pass


def cube_points(d: int, side: int, center: tuple[int, ...] | None = None) -> np.ndarray:
    """Points of the side-`side` cube Q(center, side) in Z^d, row-major."""
    if side < 1:
        raise ValueError(f"side must be >= 1, got {side}")
    if center is None:
        center = (0,) * d
    half = side // 2
    axes = [np.arange(side) - half + c for c in center]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1).astype(np.int64)


@dataclass
class Window:
    """A finite K with everything the trajectory loop needs precomputed."""

    points: np.ndarray                 # (n, d)
    table: GreenTable
    kappa: int = DEFAULT_KAPPA
    rtol: float = DEFAULT_RTOL
    eq: CapacityResult = field(init=False)
    box_lo: np.ndarray = field(init=False)
    box_dims: np.ndarray = field(init=False)
    kmask: np.ndarray = field(init=False)
    flat_of_point: np.ndarray = field(init=False)
    trunc_lo: np.ndarray = field(init=False)
    trunc_hi: np.ndarray = field(init=False)
    start_probs: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.int64)
        if pts.ndim != 2:
            raise ValueError("window points must be an (n, d) array")
        self.points = pts
        self.eq = equilibrium_measure(pts, self.table)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        self.box_lo = lo
        self.box_dims = hi - lo + 1
        flat = np.ravel_multi_index((pts - lo).T, self.box_dims)
        self.kmask = np.zeros(int(np.prod(self.box_dims)), dtype=bool)
        self.kmask[flat] = True
        self.flat_of_point = flat
        diam = int((hi - lo).max())
        side = self.kappa * (diam + 1)
        center = (lo + hi) // 2
        self.trunc_lo = center - side // 2
        self.trunc_hi = self.trunc_lo + side - 1
        # equilibrium masses are escape probabilities, nonnegative up to
        # solver noise; clip for the start law only
        w = np.clip(self.eq.masses, 0.0, None)
        self.start_probs = w / w.sum()

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def capacity(self) -> float:
        return self.eq.capacity

    def hit_bound(self, z: np.ndarray) -> tuple[float, np.ndarray]:
        """P_z(hit K) via the last-exit identity, plus re-entry weights."""
        diffs = z[None, :] - self.points
        inside = np.abs(diffs).max(axis=1) <= self.table.tab_radius
        g = np.empty(self.n, dtype=np.float64)
        if inside.any():
            g[inside] = self.table.values_at(diffs[inside])
        if (~inside).any():
            far = diffs[~inside].astype(np.float64)
            norms = np.sqrt((far * far).sum(axis=1))
            g[~inside] = asymptotic_constant(self.table.d) * norms ** (
                2 - self.table.d
            )
        w = g * self.eq.masses
        total = float(w.sum())
        if total <= 0.0:
            return 0.0, self.start_probs
        w = np.clip(w, 0.0, None)
        return min(total, 1.0), w / w.sum()


def make_window(
    points: np.ndarray,
    table: GreenTable | None = None,
    kappa: int = DEFAULT_KAPPA,
    rtol: float = DEFAULT_RTOL,
) -> Window:
    pts = np.asarray(points, dtype=np.int64)
    if table is None:
        table = green_table(pts.shape[1])
    return Window(points=pts, table=table, kappa=kappa, rtol=rtol)


def _leg_budget(side: int, d: int) -> int:
    # exit time from a side-s cube is of order s^2; leave a wide margin
    return max(100_000, 200 * side * side * d)


def _run_trajectory(
    win: Window,
    start_idx: int,
    kstate: np.ndarray,
    gen: np.random.Generator,
    corrections: bool,
    visited: np.ndarray,
) -> tuple[int, bool]:
    """Walk one trajectory, marking window visits into `visited`.

    Returns (resume rounds used, flagged). flagged means a step budget or
    the resume-round cap was hit and the trace may be incomplete.
    """
    d = win.points.shape[1]
    coords = win.points[start_idx].astype(np.int64).copy()
    trunc_lo = win.trunc_lo.copy()
    trunc_hi = win.trunc_hi.copy()
    rounds = 0
    while True:
        side = int(trunc_hi[0] - trunc_lo[0] + 1)
        took = _kernels.interlace_leg(
            coords,
            trunc_lo,
            trunc_hi,
            win.box_lo,
            win.box_dims,
            win.kmask,
            visited,
            kstate,
            _leg_budget(side, d),
        )
        if took < 0:
            return rounds, True
        if not corrections:
            return rounds, False
        p, entry = win.hit_bound(coords)
        if p <= win.rtol:
            return rounds, False
        if gen.random() >= p:
            return rounds, False
        rounds += 1
        if rounds > MAX_RESUME_ROUNDS:
            return rounds, True
        idx = int(gen.choice(win.n, p=entry))
        coords = win.points[idx].astype(np.int64).copy()
        # double the truncation cube so successive corrections shrink
        center = (trunc_lo + trunc_hi) // 2
        half = (trunc_hi[0] - trunc_lo[0] + 1)
        trunc_lo = center - half
        trunc_hi = center + half


@dataclass
class InterlacementSample:
    """One realization of the trajectory cloud on a window, up to u_max."""

    window: Window
    u_max: float
    levels: np.ndarray                 # arrival levels, strictly increasing
    traces: list[np.ndarray]           # per-trajectory visited point indices
    flagged: bool
    resume_rounds: int

    def occupied_mask(self, u: float) -> np.ndarray:
        if u > self.u_max:
            raise ValueError(f"u = {u} exceeds sampled u_max = {self.u_max}")
        mask = np.zeros(self.window.n, dtype=bool)
        for level, trace in zip(self.levels, self.traces):
            if level > u:
                break
            mask[trace] = True
        return mask

    def vacant_mask(self, u: float) -> np.ndarray:
        return ~self.occupied_mask(u)

    def to_manifest(self) -> dict:
        pts = self.window.points
        return {
            "d": int(pts.shape[1]),
            "n_points": int(pts.shape[0]),
            "points_sha256": hashlib.sha256(
                np.ascontiguousarray(pts).tobytes()
            ).hexdigest()[:16],
            "bbox_lo": [int(c) for c in self.window.box_lo],
            "bbox_dims": [int(c) for c in self.window.box_dims],
            "capacity": self.window.capacity,
            "kappa": self.window.kappa,
            "rtol": self.window.rtol,
            "u_max": self.u_max,
            "levels": [float(x) for x in self.levels],
            "flagged": self.flagged,
            "resume_rounds": self.resume_rounds,
        }


def sample_cloud(
    window: Window,
    u_max: float,
    stream: RngStream,
    corrections: bool = True,
) -> InterlacementSample:
    """Poisson trajectory cloud on the window, levels up to u_max."""
    if u_max <= 0:
        raise ValueError(f"u_max must be > 0, got {u_max}")
    gen = stream.generator()
    levels = []
    traces = []
    flagged = False
    total_rounds = 0
    level = float(gen.exponential(1.0 / window.capacity))
    i = 0
    while level <= u_max:
        kstate = np.array([stream.child(i).kernel_seed()], dtype=np.uint64)
        start = int(gen.choice(window.n, p=window.start_probs))
        visited = np.zeros(window.kmask.shape[0], dtype=bool)
        rounds, bad = _run_trajectory(window, start, kstate, gen, corrections, visited)
        flagged = flagged or bad
        total_rounds += rounds
        trace = np.flatnonzero(visited[window.flat_of_point])
        levels.append(level)
        traces.append(trace.astype(np.int32))
        level += float(gen.exponential(1.0 / window.capacity))
        i += 1
    return InterlacementSample(
        window=window,
        u_max=u_max,
        levels=np.array(levels, dtype=np.float64),
        traces=traces,
        flagged=flagged,
        resume_rounds=total_rounds,
    )


def vacant_probability(
    samples: list[InterlacementSample], probe_indices, u: float
) -> tuple[float, float]:
    """Empirical P(all probes vacant at level u) with its binomial sigma."""
    probe_indices = np.asarray(probe_indices, dtype=np.int64)
    hits = 0
    for s in samples:
        if s.vacant_mask(u)[probe_indices].all():
            hits += 1
    n = len(samples)
    p = hits / n
    return p, float(np.sqrt(p * (1 - p) / n))


@dataclass
class FkgCheck:
    empirical: float
    sigma: float
    floor: float
    ok: bool


def fkg_check(
    samples: list[InterlacementSample], probe_indices, u: float, g0: float
) -> FkgCheck:
    """P(F subset of I^u) against the product floor (1 - e^{-u/g0})^|F|."""
    probe_indices = np.asarray(probe_indices, dtype=np.int64)
    hits = 0
    for s in samples:
        if s.occupied_mask(u)[probe_indices].all():
            hits += 1
    n = len(samples)
    emp = hits / n
    sigma = float(np.sqrt(max(emp * (1 - emp), 1e-12) / n))
    floor = (1.0 - np.exp(-u / g0)) ** len(probe_indices)
    return FkgCheck(empirical=emp, sigma=sigma, floor=float(floor), ok=emp >= floor - 2 * sigma)


@dataclass
class TwoPointSum:
    value: float               # sum over F of P-hat(0, v both vacant)
    n_pairs: int
    u: float                   # level in g(0) units
    box_half: int              # the N in the comparison bound
    fitted_c: float            # C solving value = e^{-2u} (|F| + C u N^2)

    def bound(self, C: float, c1: float) -> float:
        return float(
            np.exp(-2 * self.u) * (self.n_pairs + C * self.u * self.box_half**2)
            + C * np.exp(-c1 * self.u)
        )


def two_point_sum(
    samples: list[InterlacementSample],
    origin_index: int,
    probe_indices,
    u: float,
    g0: float,
    box_half: int,
) -> TwoPointSum:
    """Sum over v in F of the empirical P(0, v in V^{g0 u}); the paper-style
    comparison constant is fitted, not asserted."""
    probe_indices = np.asarray(probe_indices, dtype=np.int64)
    level = g0 * u
    counts = np.zeros(probe_indices.shape[0], dtype=np.int64)
    for s in samples:
        vac = s.vacant_mask(level)
        if vac[origin_index]:
            counts += vac[probe_indices]
    value = float(counts.sum() / len(samples))
    n_pairs = probe_indices.shape[0]
    denom = u * box_half**2
    fitted = (value * np.exp(2 * u) - n_pairs) / denom if denom > 0 else float("nan")
    return TwoPointSum(
        value=value, n_pairs=n_pairs, u=u, box_half=box_half, fitted_c=float(fitted)
    )


# ---------------------------------------------------------------------------
# cover levels

@dataclass
class CoverLevelResult:
    level: float               # level of the covering arrival
    n_trajectories: int
    flagged: bool
    subset_levels: dict[int, float]    # side -> cover level for nested cubes


def cover_level(
    R: int,
    d: int = 3,
    table: GreenTable | None = None,
    stream: RngStream | None = None,
    kappa: int = DEFAULT_KAPPA,
    rtol: float = DEFAULT_RTOL,
    window: Window | None = None,
    subset_sides: tuple[int, ...] = (),
    max_trajectories: int = 200_000,
) -> CoverLevelResult:
    """Level at which Q(0,R) is fully covered, one arrival at a time.

    subset_sides asks for the cover levels of smaller concentric cubes on
    the same cloud; sharing arrivals makes those levels monotone in the
    side by construction.
    """
    if stream is None:
        raise ValueError("stream is required")
    if window is None:
        window = make_window(cube_points(d, R), table, kappa, rtol)
    gen = stream.generator()
    remaining = window.n
    covered = np.zeros(window.n, dtype=bool)
    subset_masks = {}
    subset_levels: dict[int, float] = {}
    for side in subset_sides:
        if side > R:
            raise ValueError(f"subset side {side} exceeds window side {R}")
        half_lo = (np.asarray(window.points) >= -(side // 2)).all(axis=1)
        half_hi = (np.asarray(window.points) <= side - 1 - side // 2).all(axis=1)
        subset_masks[side] = half_lo & half_hi
    level = 0.0
    flagged = False
    i = 0
    while True:
        if i >= max_trajectories:
            raise TruncationBudgetError(
                f"cover_level: {max_trajectories} trajectories without covering"
            )
        level += float(gen.exponential(1.0 / window.capacity))
        kstate = np.array([stream.child(i).kernel_seed()], dtype=np.uint64)
        start = int(gen.choice(window.n, p=window.start_probs))
        visited = np.zeros(window.kmask.shape[0], dtype=bool)
        _, bad = _run_trajectory(window, start, kstate, gen, True, visited)
        flagged = flagged or bad
        newly = visited[window.flat_of_point] & ~covered
        if newly.any():
            covered |= newly
            remaining = int(window.n - covered.sum())
            for side, mask in list(subset_masks.items()):
                if side not in subset_levels and covered[mask].all():
                    subset_levels[side] = level
        i += 1
        if remaining == 0:
            break
    return CoverLevelResult(
        level=level,
        n_trajectories=i,
        flagged=flagged,
        subset_levels=subset_levels,
    )


# ---------------------------------------------------------------------------
# truncation-bias direction on coupled runs

@dataclass
class CoupledVacancy:
    kappas: tuple[int, int]
    vacant_small: np.ndarray    # per-sample indicator, smaller cube
    vacant_large: np.ndarray    # same walks continued into the doubled cube

    @property
    def monotone(self) -> bool:
        # continuing a walk can only add trace, so vacancy may only drop
        return bool((self.vacant_small >= self.vacant_large).all())


def coupled_truncation_vacancy(
    points: np.ndarray,
    probe_indices,
    u: float,
    n_samples: int,
    stream: RngStream,
    kappa: int = 4,
    table: GreenTable | None = None,
) -> CoupledVacancy:
    """Pure-truncation vacancy of the probes at kappa and 2*kappa, coupled
    by continuing the identical walks into the doubled cube.

    Small-cube legs and the continuations are accumulated separately; the
    doubled-cube trace is their union, so per sample the large trace
    contains the small one and vacancy can only decrease.
    """
    pts = np.asarray(points, dtype=np.int64)
    d = pts.shape[1]
    if table is None:
        table = green_table(d)
    win = Window(points=pts, table=table, kappa=kappa, rtol=0.0)
    probe_flat = win.flat_of_point[np.asarray(probe_indices, dtype=np.int64)]
    small = np.zeros(n_samples, dtype=bool)
    large = np.zeros(n_samples, dtype=bool)
    center = (win.trunc_lo + win.trunc_hi) // 2
    side_small = int(win.trunc_hi[0] - win.trunc_lo[0] + 1)
    big_lo = center - side_small
    big_hi = center + side_small
    side_big = int(big_hi[0] - big_lo[0] + 1)
    for s in range(n_samples):
        sub = stream.child(s)
        gen = sub.generator()
        vis_small = np.zeros(win.kmask.shape[0], dtype=bool)
        vis_cont = np.zeros(win.kmask.shape[0], dtype=bool)
        level = float(gen.exponential(1.0 / win.capacity))
        i = 0
        while level <= u:
            kstate = np.array([sub.child(i).kernel_seed()], dtype=np.uint64)
            coords = win.points[int(gen.choice(win.n, p=win.start_probs))].copy()
            took = _kernels.interlace_leg(
                coords, win.trunc_lo, win.trunc_hi, win.box_lo, win.box_dims,
                win.kmask, vis_small, kstate, _leg_budget(side_small, d),
            )
            if took < 0:
                raise TruncationBudgetError("coupled run exceeded its leg budget")
            took = _kernels.interlace_leg(
                coords, big_lo, big_hi, win.box_lo, win.box_dims,
                win.kmask, vis_cont, kstate, _leg_budget(side_big, d),
            )
            if took < 0:
                raise TruncationBudgetError("coupled run exceeded its leg budget")
            level += float(gen.exponential(1.0 / win.capacity))
            i += 1
        small[s] = not vis_small[probe_flat].any()
        large[s] = not (vis_small | vis_cont)[probe_flat].any()
    return CoupledVacancy(
        kappas=(kappa, 2 * kappa), vacant_small=small, vacant_large=large
    )


# ---------------------------------------------------------------------------
# export / replay

def export_sample(sample: InterlacementSample, prefix: str | Path) -> tuple[Path, Path]:
    """Manifest JSON plus a compressed bitmap archive of the traces."""
    prefix = Path(prefix)
    manifest_path = prefix.with_suffix(".json")
    traces_path = prefix.with_suffix(".npz")
    n = sample.window.n
    bitmap = np.zeros((len(sample.traces), n), dtype=bool)
    for row, trace in enumerate(sample.traces):
        bitmap[row, trace] = True
    np.savez_compressed(
        traces_path,
        levels=sample.levels,
        bitmap=np.packbits(bitmap, axis=1),
        n_points=np.array([n]),
        points=sample.window.points,
    )
    manifest_path.write_text(json.dumps(sample.to_manifest(), indent=2) + "\n")
    return manifest_path, traces_path


def load_traces(traces_path: str | Path) -> tuple[np.ndarray, list[np.ndarray], np.ndarray]:
    """(levels, traces, points) from an exported archive."""
    data = np.load(traces_path)
    n = int(data["n_points"][0])
    bitmap = np.unpackbits(data["bitmap"], axis=1)[:, :n].astype(bool)
    traces = [np.flatnonzero(row).astype(np.int32) for row in bitmap]
    return data["levels"], traces, data["points"]

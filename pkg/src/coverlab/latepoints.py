"""Late-point structure on the torus: the proximity graph at scale 3 l_N,
modified total distance, regularity (niceness) and good-path checks, and the
parameter pack shared by the surgery calculus."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .torus import TorusGeometry
from .walk import nearest_on_segment


def l_scale(N: int, policy: str = "clamped", override: int | None = None) -> int:
    """The proximity scale l_N.

    'paper' is floor((log N)^4); 'clamped' additionally caps at floor(N/8) so
    3 l_N stays well under the torus diameter at desk-scale N.
    """
    if override is not None:
        if override < 1:
            raise ValueError(f"l override must be >= 1, got {override}")
        return int(override)
    raw = math.floor(math.log(N) ** 4)
    if policy == "paper":
        value = raw
    elif policy == "clamped":
        value = min(raw, N // 8)
    else:
        raise ValueError(f"unknown l policy {policy!r}")
    if value < 1:
        raise ValueError(
            f"l_N = {value} < 1 for N = {N} under policy {policy!r}; pass an override"
        )
    return value


@dataclass(frozen=True)
class SurgeryParams:
    """Derived time points and budgets for the loop surgery.

    gamma is the target cover fraction; delta the bulk split; eps the slack
    unit; K the early-checkpoint drop (requires K > 6 eps); M the goodness
    budget factor. g0 and g_e1 come from the Green table.
    """

    geo: TorusGeometry
    gamma: float
    delta: float
    eps: float
    K: float
    M: float
    g0: float
    g_e1: float
    l_policy: str = "clamped"
    l_override: int | None = None

    u_n: float = field(init=False)
    alpha: float = field(init=False)
    beta: float = field(init=False)
    t_cov: float = field(init=False)
    T1: int = field(init=False)
    T2: int = field(init=False)
    T3: int = field(init=False)
    T4: int = field(init=False)
    l_n: int = field(init=False)
    c4: float = field(init=False)
    c3: float = field(init=False)
    hit_start: int = field(init=False)

    def __post_init__(self) -> None:
        geo = self.geo
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if self.eps <= 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if self.K <= 6 * self.eps:
            raise ValueError(f"K must exceed 6 eps = {6 * self.eps}, got {self.K}")
        if self.M <= 0:
            raise ValueError(f"M must be > 0, got {self.M}")
        vol = geo.volume
        log_vol = math.log(vol)
        u_n = self.g0 * log_vol
        alpha = self.gamma - self.K / u_n
        beta = self.gamma - 5 * self.eps / u_n
        if alpha <= 0:
            raise ValueError(f"alpha = gamma - K/u_N = {alpha:.6f} must be > 0")
        if beta <= alpha:
            raise ValueError(f"beta = {beta:.6f} must exceed alpha = {alpha:.6f}")
        t_cov = self.g0 * vol * log_vol
        t1 = math.floor(alpha * t_cov)
        t2 = math.floor(beta * t_cov)
        t3 = math.floor(self.gamma * t_cov - self.eps * vol)
        t4 = math.floor(self.gamma * t_cov)
        if not t1 <= t2 <= t3 <= t4:
            raise ValueError(f"time points out of order: {t1}, {t2}, {t3}, {t4}")
        if t3 <= t2:
            raise ValueError(f"empty approach window: T2 = {t2}, T3 = {t3}")
        c4 = 2.0 * self.g0 / (self.g0 + self.g_e1)
        object.__setattr__(self, "u_n", u_n)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "t_cov", t_cov)
        object.__setattr__(self, "T1", t1)
        object.__setattr__(self, "T2", t2)
        object.__setattr__(self, "T3", t3)
        object.__setattr__(self, "T4", t4)
        object.__setattr__(self, "l_n", l_scale(geo.N, self.l_policy, self.l_override))
        object.__setattr__(self, "c4", c4)
        object.__setattr__(self, "c3", (1.0 + c4) / 2.0)
        # all hit-time searches start at the first integer time >= beta * t_cov,
        # computed once so surgery and recovery agree exactly
        object.__setattr__(self, "hit_start", math.ceil(beta * t_cov))

    @property
    def gamma_floor(self) -> float:
        d = self.geo.d
        return (d + 2) / (2 * d)

    @property
    def in_sharp_regime(self) -> bool:
        return self.gamma_floor < self.gamma < 1

    def insertion_budget(self, f_size: int) -> float:
        """J(F, M): the direction-count cost cap for the inserted loops."""
        d = self.geo.d
        return 2 * d * self.M * f_size * self.geo.N ** (-d * self.gamma)

    def check_budget_window(self, f_size: int) -> None:
        j = self.insertion_budget(f_size)
        room = self.eps * self.geo.volume
        if j + 2 > room:
            raise ValueError(
                f"insertion budget J = {j:.1f} needs J + 2 <= eps N^d = {room:.1f}"
            )


@dataclass
class AuxiliaryGraph:
    """Connectivity of a point set at l_inf scale `radius` (edges iff
    dist_inf <= radius); components and their smallest-label representatives."""

    geo: TorusGeometry
    points: np.ndarray  # sorted labels
    radius: int
    component_of: np.ndarray  # component index per point
    n_components: int
    n_edges: int

    @property
    def reps(self) -> np.ndarray:
        """Smallest label in each component, sorted by component index."""
        if self.points.size == 0:
            return np.empty(0, dtype=np.int64)
        out = np.full(self.n_components, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(out, self.component_of, self.points)
        return out

    def components(self) -> list[np.ndarray]:
        return [
            self.points[self.component_of == c] for c in range(self.n_components)
        ]

    def to_json_dict(self) -> dict:
        return {
            "d": self.geo.d,
            "N": self.geo.N,
            "radius": int(self.radius),
            "points": self.points.tolist(),
            "component_of": self.component_of.tolist(),
            "reps": self.reps.tolist(),
            "n_edges": int(self.n_edges),
        }


def _pairwise_adjacency(geo: TorusGeometry, labels: np.ndarray, radius: int) -> np.ndarray:
    coords = geo.coords_of(labels)
    delta = np.mod(coords[:, None, :] - coords[None, :, :], geo.N)
    delta = np.minimum(delta, geo.N - delta)
    dist = delta.max(axis=2)
    adj = dist <= radius
    np.fill_diagonal(adj, False)
    return adj


def build_aux_graph(
    geo: TorusGeometry,
    labels: np.ndarray,
    radius: int,
    method: Literal["auto", "pairwise", "cells"] = "auto",
) -> AuxiliaryGraph:
    labels = np.unique(np.asarray(labels, dtype=np.int64))
    n = labels.size
    if n == 0:
        return AuxiliaryGraph(geo, labels, radius, np.empty(0, dtype=np.int64), 0, 0)
    if method == "auto":
        method = "pairwise" if n <= 1500 else "cells"
    if method == "pairwise":
        adj = _pairwise_adjacency(geo, labels, radius)
        n_edges = int(adj.sum()) // 2
        ncomp, comp = scipy.sparse.csgraph.connected_components(
            scipy.sparse.csr_matrix(adj), directed=False
        )
    elif method == "cells":
        comp, ncomp, n_edges = _cells_components(geo, labels, radius)
    else:
        raise ValueError(f"unknown method {method!r}")
    # renumber components in order of their smallest label for determinism
    order = np.full(ncomp, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(order, comp, labels)
    rank = np.argsort(np.argsort(order))
    return AuxiliaryGraph(geo, labels, radius, rank[comp], ncomp, n_edges)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def _cells_components(
    geo: TorusGeometry, labels: np.ndarray, radius: int
) -> tuple[np.ndarray, int, int]:
    """Union-find over a cell binning; each cell is at least `radius` wide, so
    only same-or-adjacent cells (cyclically) can hold neighbors."""
    n = labels.size
    coords = geo.coords_of(labels)
    dims = max(1, geo.N // max(radius, 1))
    cell_coord = (coords * dims) // geo.N  # (n, d) in [0, dims)
    cells: dict[tuple, list[int]] = {}
    for i in range(n):
        cells.setdefault(tuple(cell_coord[i]), []).append(i)
    uf = _UnionFind(n)
    n_edges = 0
    offsets = np.stack(
        np.meshgrid(*[np.arange(-1, 2)] * geo.d, indexing="ij"), axis=-1
    ).reshape(-1, geo.d)
    seen_pairs: set[tuple] = set()
    for key, idxs in cells.items():
        base = np.array(key)
        for off in offsets:
            nb = tuple((base + off) % dims)
            if nb not in cells:
                continue
            pair = (key, nb) if key <= nb else (nb, key)
            if pair in seen_pairs:
                continue
            seen_pairs.add(pair)
            jdxs = cells[nb]
            for i in idxs:
                for j in jdxs:
                    if (nb == key and j <= i):
                        continue
                    delta = np.mod(coords[i] - coords[j], geo.N)
                    dist = np.minimum(delta, geo.N - delta).max()
                    if dist <= radius:
                        n_edges += 1
                        uf.union(i, j)
    roots = np.array([uf.find(i) for i in range(n)])
    _, comp = np.unique(roots, return_inverse=True)
    return comp, int(comp.max()) + 1 if n else 0, n_edges


@dataclass
class MdistReport:
    value: float
    reps: np.ndarray
    r_values: np.ndarray
    near_labels: np.ndarray
    n_points: int
    n_components: int


def mdist(
    params: SurgeryParams,
    late_labels: np.ndarray,
    segment_labels: np.ndarray,
    graph: AuxiliaryGraph | None = None,
) -> MdistReport:
    """Sum over representatives of (r_x + 2) plus 3 l_N per non-representative
    point, where r_x is the l_inf distance from x to the segment."""
    geo = params.geo
    late_labels = np.unique(np.asarray(late_labels, dtype=np.int64))
    if graph is None:
        graph = build_aux_graph(geo, late_labels, 3 * params.l_n)
    reps = graph.reps
    uniq_seg = np.unique(segment_labels)
    r_values = np.empty(reps.size, dtype=np.int64)
    near = np.empty(reps.size, dtype=np.int64)
    for i, rep in enumerate(reps):
        lab, dist = nearest_on_segment(geo, uniq_seg, geo.unlabel(int(rep)))
        r_values[i] = dist
        near[i] = lab
    value = float((r_values + 2).sum()) + 3.0 * params.l_n * (late_labels.size - reps.size)
    return MdistReport(
        value=value,
        reps=reps,
        r_values=r_values,
        near_labels=near,
        n_points=int(late_labels.size),
        n_components=int(graph.n_components),
    )


@dataclass
class NiceVerdict:
    bulk_count: int
    bulk_bounds: tuple[float, float]
    bulk_ok: bool
    edge_count: int
    edge_bounds: tuple[float, float]
    edge_ok: bool
    separation_excess: int
    separation_cap: float
    separation_ok: bool

    @property
    def nice(self) -> bool:
        return self.bulk_ok and self.edge_ok and self.separation_ok


def regular_bounds(count_expected: float, tol: float) -> tuple[float, float]:
    return ((1 - tol) * count_expected, (1 + tol) * count_expected)


def niceness(
    params: SurgeryParams,
    late_labels: np.ndarray,
    bulk_mask: np.ndarray,
    edge_mask: np.ndarray,
) -> NiceVerdict:
    """Regular late-point counts in bulk (tolerance eps) and edge (tolerance
    1/2), plus the component-excess cap on the edge set."""
    geo = params.geo
    a = params.alpha
    scale = float(geo.N) ** (-geo.d * a)
    late_mask = np.zeros(geo.volume, dtype=bool)
    late_mask[late_labels] = True
    bulk_count = int((late_mask & bulk_mask).sum())
    edge_count = int((late_mask & edge_mask).sum())
    b_lo, b_hi = regular_bounds(bulk_mask.sum() * scale, params.eps)
    e_lo, e_hi = regular_bounds(edge_mask.sum() * scale, 0.5)
    edge_late = np.flatnonzero(late_mask & edge_mask)
    graph = build_aux_graph(geo, edge_late, 3 * params.l_n)
    excess = int(edge_late.size - graph.n_components)
    cap = float(geo.N) ** (geo.d * (1 - params.c3 * a))
    return NiceVerdict(
        bulk_count=bulk_count,
        bulk_bounds=(b_lo, b_hi),
        bulk_ok=b_lo <= bulk_count <= b_hi,
        edge_count=edge_count,
        edge_bounds=(e_lo, e_hi),
        edge_ok=e_lo <= edge_count <= e_hi,
        separation_excess=excess,
        separation_cap=cap,
        separation_ok=excess <= cap,
    )


@dataclass
class GoodPathVerdict:
    covered_ok: bool
    late_labels: np.ndarray
    max_r: int
    r_ok: bool
    budget_lhs: float
    budget_rhs: float
    budget_ok: bool
    mdist_report: MdistReport | None

    @property
    def good(self) -> bool:
        return self.covered_ok and self.r_ok and self.budget_ok


def late_set_of_path(
    params: SurgeryParams, path_labels: np.ndarray, f_mask: np.ndarray
) -> np.ndarray:
    """F-points unvisited within the first T2 steps of the path."""
    visited = np.zeros(params.geo.volume, dtype=bool)
    visited[path_labels[: params.T2 + 1]] = True
    return np.flatnonzero(f_mask & ~visited)


def is_good_path(
    params: SurgeryParams, path_labels: np.ndarray, f_mask: np.ndarray
) -> GoodPathVerdict:
    """Checks the three good-path clauses for a path of length exactly T3."""
    geo = params.geo
    if path_labels.shape[0] != params.T3 + 1:
        raise ValueError(
            f"path must have exactly T3 + 1 = {params.T3 + 1} vertices, got {path_labels.shape[0]}"
        )
    visited = np.zeros(geo.volume, dtype=bool)
    visited[path_labels] = True
    covered_ok = bool((visited | f_mask).all())
    late = late_set_of_path(params, path_labels, f_mask)
    segment = path_labels[params.T2 + 1 : params.T3 + 1]
    if late.size:
        uniq_seg = np.unique(segment)
        max_r = 0
        for lab in late:
            _, dist = nearest_on_segment(geo, uniq_seg, geo.unlabel(int(lab)))
            max_r = max(max_r, dist)
        report = mdist(params, late, segment)
        lhs = 2 * geo.d * report.value
    else:
        max_r = 0
        report = None
        lhs = 0.0
    rhs = params.insertion_budget(int(f_mask.sum()))
    return GoodPathVerdict(
        covered_ok=covered_ok,
        late_labels=late,
        max_r=int(max_r),
        r_ok=max_r <= params.l_n,
        budget_lhs=lhs,
        budget_rhs=rhs,
        budget_ok=lhs <= rhs,
        mdist_report=report,
    )

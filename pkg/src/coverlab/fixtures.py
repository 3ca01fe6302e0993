"""Hand-built good paths with planted late points.

The round-trip machinery needs paths that satisfy the good-path predicate
while keeping full control over the late-point structure: how many
components, which member is the representative, and which loop kind the
representative will receive. Random walks give no such control at feasible
sizes, so we construct the paths directly:

  prefix   a boustrophedon sweep of the whole torus that detours around
           the planted points, so by T2 everything except the planted set
           is covered and the late set is exactly what we planted;
  padding  oscillation on an edge far from the planted band until T2;
  tour     one excursion per planted point in (T2, T3]: travel in the
           plane last-coordinate = 0, drop a straight shaft to a waypoint
           near the point, climb back.  The waypoint offset decides the
           displacement from the late point to its nearest path vertex,
           and with it the loop kind chosen for the representative.

Planted points sit in the two all-edge planes around last coordinate N/2
(the bulk cube is centred at the origin, so that slab is edge for any
delta >= 1/8 or so).  Cluster columns are separated along axis 0 by
3*l_N + 1 so the component partition is forced, and members inside a
column sit 3*l_N - 1 apart along axis 1.  Separations survive the random
translation applied per fixture because they only depend on coordinate
differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .latepoints import SurgeryParams, build_aux_graph, is_good_path
from .potential import green_table
from .streams import RngStream
from .surgery import (
    KIND_AXIS,
    KIND_AXIS_LAST,
    KIND_BUMP,
    KIND_DIAG,
    build_path,
    classify,
)
from .torus import TorusGeometry, bulk_edge_split
from .walk import nearest_on_segment

FIXTURE_PARAMS: dict[int, dict[str, float]] = {
    16: dict(gamma=0.40, delta=0.25, eps=0.20, K=1.3, M=1.20),
    24: dict(gamma=0.30, delta=0.25, eps=0.25, K=1.6, M=1.00),
    32: dict(gamma=0.15, delta=0.25, eps=0.20, K=1.3, M=0.25),
}


class FixtureError(RuntimeError):
    pass


def fixture_params(
    N: int, d: int = 3, g0: float | None = None, g_e1: float | None = None
) -> SurgeryParams:
    """Surgery parameters tuned per torus side so the insertion budget and
    the epsilon window both hold for the planted layouts below."""
    if N not in FIXTURE_PARAMS:
        raise FixtureError(f"no tuned parameters for N = {N}; have {sorted(FIXTURE_PARAMS)}")
    if g0 is None or g_e1 is None:
        tab = green_table(d)
        g0 = tab.g0 if g0 is None else g0
        g_e1 = tab.g_e1 if g_e1 is None else g_e1
    return SurgeryParams(
        geo=TorusGeometry(d, N), g0=g0, g_e1=g_e1, **FIXTURE_PARAMS[N]
    )


# ---------------------------------------------------------------------------
# full-torus snake

_SNAKES: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def snake_labels(geo: TorusGeometry) -> np.ndarray:
    """Labels of a Hamiltonian path visiting every vertex once, consecutive
    entries adjacent: a reflected mixed-radix sweep, axis 0 innermost."""
    return _snake(geo)[0]


def _snake(geo: TorusGeometry) -> tuple[np.ndarray, np.ndarray]:
    key = (geo.d, geo.N)
    if key not in _SNAKES:
        d, N = geo.d, geo.N
        rem = np.arange(geo.volume, dtype=np.int64)
        coords = np.empty((geo.volume, d), dtype=np.int64)
        rev = np.zeros(geo.volume, dtype=bool)
        for axis in range(d - 1, -1, -1):
            base = N**axis
            raw = rem // base
            rem = rem - raw * base
            digit = np.where(rev, N - 1 - raw, raw)
            coords[:, axis] = digit
            rev ^= digit % 2 == 1
        labels = geo.labels_of(coords)
        steps = np.abs(np.diff(coords, axis=0))
        if not (steps.sum(axis=1) == 1).all():
            raise AssertionError("snake enumeration produced a non-unit step")
        inverse = np.empty(geo.volume, dtype=np.int64)
        inverse[labels] = np.arange(geo.volume, dtype=np.int64)
        _SNAKES[key] = (labels, inverse)
    return _SNAKES[key]


def _detoured_snake(geo: TorusGeometry, planted: np.ndarray) -> np.ndarray:
    """The snake with each planted vertex bypassed by a two-step sidestep,
    leaving exactly the planted set unvisited."""
    snake, inverse = _snake(geo)
    if planted.size == 0:
        return snake.copy()
    planted_set = set(int(p) for p in planted)
    positions = np.sort(inverse[planted])
    if positions[0] < 1 or positions[-1] > geo.volume - 2:
        raise FixtureError("planted point at a snake endpoint")
    if np.diff(positions).min(initial=geo.volume) < 3:
        raise FixtureError("planted points too close along the snake")
    pieces = []
    prev = 0
    for t in positions:
        t = int(t)
        a = np.array(geo.unlabel(int(snake[t - 1])), dtype=np.int64)
        p = np.array(geo.unlabel(int(snake[t])), dtype=np.int64)
        b = np.array(geo.unlabel(int(snake[t + 1])), dtype=np.int64)
        ax1 = int(np.nonzero((p - a) % geo.N)[0][0])
        ax2 = int(np.nonzero((b - p) % geo.N)[0][0])
        v_axis = min(set(range(geo.d)) - {ax1, ax2})
        det = np.empty(3, dtype=np.int64)
        for j, q in enumerate((a, p, b)):
            q = q.copy()
            q[v_axis] = (q[v_axis] + 1) % geo.N
            det[j] = geo.label(q)
        if any(int(x) in planted_set for x in det):
            raise FixtureError("detour collides with a planted point")
        pieces.append(snake[prev:t])
        pieces.append(det)
        prev = t + 1
    pieces.append(snake[prev:])
    return np.concatenate(pieces)


# ---------------------------------------------------------------------------
# planted layouts

@dataclass(frozen=True)
class PlantedCluster:
    kind: str                       # loop kind intended for the representative
    labels: tuple[int, ...]         # member labels, one aux-graph component


# waypoint displacement magnitudes; all fit inside l_N for every tuned N
_LATERAL = 2      # axis-kind offset along axis 0
_DROP = 2         # last-axis offset for the axis-last and diagonal kinds


def _band_planes(N: int) -> tuple[int, int]:
    # the two planes around N/2 lie in the edge slab for delta = 1/4
    return N // 2, N // 2 + 1


def layout_menu(d: int, N: int, l_n: int) -> dict[str, list[tuple[str, int]]]:
    """Named layouts as (kind, member count) cluster lists. Component counts
    0 through 4 and all four kinds appear across the menu."""
    menu = {
        "empty": [],
        "single-diag": [(KIND_DIAG, 1)],
        "single-axis": [(KIND_AXIS, 1)],
        "single-axis-last": [(KIND_AXIS_LAST, 1)],
        "single-bump": [(KIND_BUMP, 1)],
        "four-singletons": [
            (KIND_DIAG, 1), (KIND_AXIS, 1), (KIND_AXIS_LAST, 1), (KIND_BUMP, 1)
        ],
        "two-clusters": [(KIND_DIAG, 3), (KIND_AXIS, 2)],
        "cluster-and-singletons": [(KIND_AXIS_LAST, 2), (KIND_BUMP, 1), (KIND_DIAG, 1)],
    }
    sep = 3 * l_n + 1
    if N < 2 * sep:
        raise FixtureError(f"N = {N} too small for two columns at separation {sep}")
    return menu


def place_clusters(
    geo: TorusGeometry,
    layout: list[tuple[str, int]],
    l_n: int,
    stream: RngStream,
) -> list[PlantedCluster]:
    """Realize a layout as concrete planted points, applying a random
    translation in the first d-1 axes plus an independent axis-1 offset per
    column. Distances between members are translation invariant, so the
    component structure is forced by construction and re-verified later."""
    d, N = geo.d, geo.N
    sep = 3 * l_n + 1
    step = 3 * l_n - 1
    lo, hi = _band_planes(N)
    gen = stream.generator()
    shift = gen.integers(0, N, size=d - 1)
    col_jit = gen.integers(0, N, size=2)

    # pack the layout into the two columns: a column holds either one
    # cluster of any size or up to two singletons N//2 apart along axis 1
    columns: list[list[tuple[str, int]]] = [[], []]
    for spec in sorted(layout, key=lambda s: -s[1]):
        if spec[1] > 1:
            home = next((c for c in columns if not c), None)
        else:
            home = next(
                (c for c in columns if len(c) < 2 and all(n == 1 for _, n in c)), None
            )
        if home is None:
            raise FixtureError(f"layout {layout} does not fit two columns")
        home.append(spec)

    clusters: list[PlantedCluster] = []
    for ci, col in enumerate(columns):
        x0 = (ci * sep + int(shift[0])) % N
        for si, (kind, n_members) in enumerate(col):
            z = hi if kind == KIND_AXIS else lo
            y0 = (si * (N // 2) + int(col_jit[ci]) + int(shift[1])) % N
            members = []
            for m in range(n_members):
                coord = [0] * d
                coord[0] = x0
                coord[1] = (y0 + m * step) % N
                for ax in range(2, d - 1):
                    coord[ax] = int(shift[ax])
                coord[d - 1] = z
                members.append(geo.label(coord))
            clusters.append(PlantedCluster(kind=kind, labels=tuple(sorted(members))))
    return clusters


def _waypoint(geo: TorusGeometry, kind: str, rep: int) -> np.ndarray:
    """Waypoint whose nearest-vertex displacement from the representative
    realizes the requested loop kind, given the shaft approach below."""
    d, N = geo.d, geo.N
    p = np.array(geo.unlabel(rep), dtype=np.int64)
    w = p.copy()
    if kind == KIND_BUMP:
        pass
    elif kind == KIND_AXIS:
        # upper band: the shaft arrives from above, ties break to the waypoint
        w[0] = (w[0] + _LATERAL) % N
    elif kind == KIND_AXIS_LAST:
        w[d - 1] = (w[d - 1] - _DROP) % N
    elif kind == KIND_DIAG:
        # strict lateral < drop keeps the nearest vertex unique at the bottom
        w[0] = (w[0] + 1) % N
        w[d - 1] = (w[d - 1] - _DROP) % N
    else:
        raise FixtureError(f"unknown kind {kind!r}")
    return w


@dataclass
class Fixture:
    params: SurgeryParams
    path: np.ndarray                  # exactly T3 + 1 labels
    f_mask: np.ndarray                # edge-region mask used as F
    planted: np.ndarray               # sorted planted labels
    clusters: list[PlantedCluster]
    layout_name: str

    @property
    def intended_kinds(self) -> dict[int, str]:
        return {c.labels[0]: c.kind for c in self.clusters}


def make_good_fixture(
    params: SurgeryParams, layout_name: str, stream: RngStream
) -> Fixture:
    geo = params.geo
    d, N = geo.d, geo.N
    menu = layout_menu(d, N, params.l_n)
    if layout_name not in menu:
        raise FixtureError(f"unknown layout {layout_name!r}")
    clusters = place_clusters(geo, menu[layout_name], params.l_n, stream)
    planted = np.array(sorted(l for c in clusters for l in c.labels), dtype=np.int64)

    bulk_mask, edge_mask = bulk_edge_split(geo, params.delta)
    if planted.size and not edge_mask[planted].all():
        raise FixtureError("planted point outside the edge region")

    pieces = [_detoured_snake(geo, planted)]
    covered_end = len(pieces[0]) - 1
    if covered_end >= params.T2:
        raise FixtureError("snake already longer than T2")

    def pad_to(target_len: int, at: np.ndarray, total: int) -> tuple[np.ndarray, int]:
        # bounce between `at` and its +e0 neighbour until the path holds
        # target_len + 1 vertices in total
        nb = at.copy()
        nb[0] = (nb[0] + 1) % N
        count = target_len - total
        if count < 0:
            raise FixtureError("path already past the padding target")
        pad = np.empty(count, dtype=np.int64)
        pad[0::2] = geo.label(nb)
        pad[1::2] = geo.label(at)
        return pad, count

    cur = np.array(geo.unlabel(int(pieces[0][-1])), dtype=np.int64)
    pad, count = pad_to(params.T2, cur, covered_end)
    pieces.append(pad)
    if count:
        cur = np.array(geo.unlabel(int(pad[-1])), dtype=np.int64)
    total = params.T2

    # one excursion per planted point; the representative's waypoint encodes
    # the kind, other members get a straight pass-through
    for cluster in clusters:
        rep = cluster.labels[0]
        for member in cluster.labels:
            w = _waypoint(geo, cluster.kind if member == rep else KIND_BUMP, member)
            top = w.copy()
            top[d - 1] = 0
            if not np.array_equal(cur, top):
                leg = build_path(geo, cur, top)[1:]
                pieces.append(leg)
                total += len(leg)
            down = build_path(geo, top, w)[1:]
            ascent = np.concatenate([down[:-1][::-1], [geo.label(top)]])
            pieces.append(down)
            pieces.append(ascent)
            total += len(down) + len(ascent)
            cur = top
    if total > params.T3:
        raise FixtureError(
            f"tour overruns T3 by {total - params.T3} steps; layout too dense"
        )
    pad, _ = pad_to(params.T3, cur, total)
    pieces.append(pad)

    path = np.concatenate(pieces)
    if len(path) != params.T3 + 1:
        raise AssertionError("fixture path length mismatch")

    _validate_fixture(params, path, edge_mask, planted, clusters)
    return Fixture(
        params=params,
        path=path,
        f_mask=edge_mask,
        planted=planted,
        clusters=clusters,
        layout_name=layout_name,
    )


def _validate_fixture(params, path, edge_mask, planted, clusters) -> None:
    geo = params.geo
    verdict = is_good_path(params, path, edge_mask)
    if not verdict.good:
        raise FixtureError(f"constructed path is not good: {verdict}")
    if not np.array_equal(np.sort(verdict.late_labels), planted):
        raise FixtureError("late set differs from the planted set")

    graph = build_aux_graph(geo, planted, 3 * params.l_n)
    got = {tuple(sorted(int(x) for x in comp)) for comp in graph.components()}
    want = {tuple(c.labels) for c in clusters}
    if got != want:
        raise FixtureError(f"component partition {got} differs from planted {want}")

    segment = path[params.hit_start:]
    for cluster in clusters:
        rep = cluster.labels[0]
        y, r = nearest_on_segment(geo, segment, geo.unlabel(rep))
        if cluster.kind == KIND_BUMP:
            if r != 0:
                raise FixtureError(f"bump rep {rep} has r = {r}")
            continue
        if r == 0 or r > params.l_n:
            raise FixtureError(f"rep {rep} has out-of-range r = {r}")
        realized = classify(geo, geo.unlabel(rep), geo.unlabel(y))
        if realized != cluster.kind:
            raise FixtureError(
                f"rep {rep}: realized kind {realized} != intended {cluster.kind}"
            )


def random_fixture(params: SurgeryParams, stream: RngStream) -> Fixture:
    """Uniform layout choice plus random placement; the workhorse for bulk
    round-trip sweeps."""
    menu = layout_menu(params.geo.d, params.geo.N, params.l_n)
    names = sorted(menu)
    gen = stream.generator()
    name = names[int(gen.integers(0, len(names)))]
    return make_good_fixture(params, name, stream.child(1))

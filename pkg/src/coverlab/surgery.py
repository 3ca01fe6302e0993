"""Loop surgery on cover-time paths.

A good path of length T3 is rewritten into a covering path of length at most
T3 + J by splicing in closed loops: one anchor loop per late-point component
representative (carrying the walk out to the representative and back), then
one tree loop per component (sweeping the remaining members). The surgered
path extends freely to length T4, and the whole construction is invertible:
`recover` reads the late set off the prefix, locates every inserted loop from
first-hit positions and step-direction patterns alone, verifies each window
against an independent reconstruction, and deletes them.

Axis convention: axes are 0-based; steps are labelled by the axis they move
along. The anchor-loop legs walk axes in increasing order, one axis at a
time, so the direction pattern at the representative's first hit identifies
the loop shape without any side information.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .latepoints import AuxiliaryGraph, SurgeryParams, build_aux_graph, late_set_of_path
from .streams import RngStream
from .torus import TorusGeometry
from .walk import nearest_on_segment

RULES_VERSION = 1

KIND_DIAG = "diag"  # displacement spans >= 2 axes
KIND_AXIS = "axis"  # single axis, not the last one
KIND_AXIS_LAST = "axis-last"  # single axis, the last one
KIND_BUMP = "bump"  # zero displacement
KIND_TREE = "tree"

_EXT = {KIND_DIAG: 0, KIND_AXIS: 2, KIND_AXIS_LAST: 4, KIND_BUMP: 0}


class SurgeryError(Exception):
    pass


class DecodeError(Exception):
    """Recovery failure; `step` names the pipeline stage that could not be
    completed (the input is not a surgered path, or was altered)."""

    def __init__(self, step: str, message: str):
        super().__init__(f"[{step}] {message}")
        self.step = step


def _dv(geo: TorusGeometry, x, y) -> np.ndarray:
    return np.asarray(geo.difference_vector(x, y), dtype=np.int64)


def classify_delta(delta) -> str:
    delta = np.asarray(delta, dtype=np.int64)
    d = delta.shape[0]
    nz = np.flatnonzero(delta)
    if nz.size == 0:
        return KIND_BUMP
    if nz.size >= 2:
        return KIND_DIAG
    return KIND_AXIS_LAST if nz[0] == d - 1 else KIND_AXIS


def classify(geo: TorusGeometry, x, y) -> str:
    return classify_delta(_dv(geo, x, y))


@dataclass
class Loop:
    """Closed unit-step loop; labels[0] == labels[-1] is the anchor y, and
    labels[hit_index] is the target x (equal to y for bump and tree kinds)."""

    kind: str
    x_label: int
    y_label: int
    labels: np.ndarray
    hit_index: int

    @property
    def length(self) -> int:
        return self.labels.shape[0] - 1


def _steps_to_labels(geo: TorusGeometry, start_coord: np.ndarray, steps: list) -> np.ndarray:
    labels = np.empty(len(steps) + 1, dtype=np.int64)
    cur = np.array(start_coord, dtype=np.int64)
    labels[0] = geo.label(cur)
    for t, (axis, sign) in enumerate(steps):
        cur[axis] = (cur[axis] + sign) % geo.N
        labels[t + 1] = geo.label(cur)
    return labels


def _greedy_steps(delta: np.ndarray) -> list:
    """Unit steps realizing delta, one axis at a time in increasing order."""
    steps = []
    for axis in range(delta.shape[0]):
        s = 1 if delta[axis] > 0 else -1
        steps.extend([(axis, s)] * abs(int(delta[axis])))
    return steps


def build_path(geo: TorusGeometry, frm, to) -> np.ndarray:
    """Open greedy path from frm to to along the minimal displacement,
    axes in increasing order. Stays inside the box spanned by the endpoints."""
    frm = np.asarray(frm, dtype=np.int64)
    delta = _dv(geo, frm, to)
    if not delta.any():
        raise SurgeryError("path endpoints coincide")
    return _steps_to_labels(geo, frm, _greedy_steps(delta))


def build_beta(geo: TorusGeometry, x, y) -> Loop:
    """Anchor loop rooted at y visiting x exactly once.

    The y->x leg undoes the displacement axis by axis; the return leg redoes
    it, offset sideways when the displacement is a single axis so the two
    legs cannot be confused on readback (the offset uses the next axis up,
    or the first two axes when the displacement sits on the last axis)."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    delta = _dv(geo, x, y)  # minimal lift of y - x
    kind = classify_delta(delta)
    if kind == KIND_BUMP:
        raise SurgeryError("coincident endpoints; use build_bump")
    d = geo.d
    down = _greedy_steps(-delta)  # y -> x
    up = _greedy_steps(delta)  # x -> y, same axis order
    if kind == KIND_DIAG:
        steps = down + up
    elif kind == KIND_AXIS:
        j = int(np.flatnonzero(delta)[0]) + 1
        steps = down + [(j, 1)] + up + [(j, -1)]
    else:
        steps = down + [(1, 1), (0, 1)] + up + [(0, -1), (1, -1)]
    labels = _steps_to_labels(geo, y, steps)
    if labels[0] != labels[-1]:
        raise SurgeryError("loop failed to close")
    hit = len(down)
    loop = Loop(kind, int(geo.label(x)), int(geo.label(y)), labels, hit)
    _assert_loop_laws(geo, loop)
    return loop


def build_bump(geo: TorusGeometry, x, axis: int) -> Loop:
    """The 2-step loop (x, x+e_axis, x)."""
    if not 0 <= axis < geo.d:
        raise SurgeryError(f"axis {axis} out of range for d={geo.d}")
    x = np.asarray(x, dtype=np.int64)
    lab = int(geo.label(x))
    side = x.copy()
    side[axis] = (side[axis] + 1) % geo.N
    labels = np.array([lab, geo.label(side), lab], dtype=np.int64)
    return Loop(KIND_BUMP, lab, lab, labels, 0)


def _assert_loop_laws(geo: TorusGeometry, loop: Loop) -> None:
    labels = loop.labels
    if labels[loop.hit_index] != loop.x_label:
        raise SurgeryError("loop does not sit on its target at the hit index")
    if int((labels == loop.x_label).sum()) != 1:
        raise SurgeryError("loop visits its target more than once")
    interior = labels[:-1]
    if np.unique(interior).size != interior.size:
        raise SurgeryError("loop self-intersects")
    dist = geo.dist_inf(geo.unlabel(loop.x_label), geo.unlabel(loop.y_label))
    if loop.length > 2 * geo.d * (dist + 2):
        raise SurgeryError("loop exceeds its length bound")


def build_tree_loop(
    geo: TorusGeometry, component_labels: np.ndarray, rep_label: int, radius: int
) -> Loop:
    """Depth-first sweep of a late-point component: walk the proximity graph
    (edges at dist_inf <= radius) from the representative, taking neighbors
    in increasing label order, and splice greedy paths along the tree edges
    down and back up. Length <= 2d * radius * (|C|-1)."""
    comp = np.unique(np.asarray(component_labels, dtype=np.int64))
    if rep_label not in comp:
        raise SurgeryError("representative not in component")
    n = comp.size
    if n == 1:
        return Loop(KIND_TREE, int(rep_label), int(rep_label),
                    np.array([rep_label], dtype=np.int64), 0)
    coords = geo.coords_of(comp)
    delta = np.mod(coords[:, None, :] - coords[None, :, :], geo.N)
    delta = np.minimum(delta, geo.N - delta)
    adj = delta.max(axis=2) <= radius
    np.fill_diagonal(adj, False)
    root = int(np.searchsorted(comp, rep_label))
    seen = np.zeros(n, dtype=bool)
    seen[root] = True
    tour = [root]
    stack = [(root, iter(np.flatnonzero(adj[root])))]
    while stack:
        v, it = stack[-1]
        advanced = False
        for u in it:
            if not seen[u]:
                seen[u] = True
                tour.append(int(u))
                stack.append((int(u), iter(np.flatnonzero(adj[u]))))
                advanced = True
                break
        if not advanced:
            stack.pop()
            if stack:
                tour.append(stack[-1][0])
    if not seen.all():
        raise SurgeryError("component is not connected at this radius")
    pieces = [np.array([comp[root]], dtype=np.int64)]
    for a, b in zip(tour[:-1], tour[1:]):
        pieces.append(build_path(geo, coords[a], coords[b])[1:])
    labels = np.concatenate(pieces)
    loop = Loop(KIND_TREE, int(rep_label), int(rep_label), labels, 0)
    if loop.length > 2 * geo.d * radius * (n - 1):
        raise SurgeryError("tree loop exceeds its length bound")
    return loop


def insert_loop(path: np.ndarray, loop_labels: np.ndarray, k: int) -> np.ndarray:
    if not 0 <= k < path.shape[0]:
        raise SurgeryError(f"insertion index {k} out of range")
    if path[k] != loop_labels[0] or loop_labels[0] != loop_labels[-1]:
        raise SurgeryError("loop anchor does not match the path vertex")
    return np.concatenate([path[: k + 1], loop_labels[1:], path[k + 1 :]])


def delete_loop(path: np.ndarray, k1: int, k2: int) -> np.ndarray:
    if not 0 <= k1 <= k2 < path.shape[0]:
        raise SurgeryError("deletion window out of range")
    if path[k1] != path[k2]:
        raise SurgeryError("deletion window endpoints differ")
    return np.concatenate([path[: k1 + 1], path[k2 + 1 :]])


def _first_hit(path: np.ndarray, label: int, start: int) -> int | None:
    hits = np.flatnonzero(path[start:] == label)
    if hits.size == 0:
        return None
    return start + int(hits[0])


def _step_axis(geo: TorusGeometry, lab_a: int, lab_b: int) -> int | None:
    """Axis of the unit step a -> b, or None if not a unit step."""
    delta = _dv(geo, geo.unlabel(int(lab_a)), geo.unlabel(int(lab_b)))
    if np.abs(delta).sum() != 1:
        return None
    return int(np.flatnonzero(delta)[0])


@dataclass
class LoopRecord:
    rep: int
    near: int
    kind: str
    h_anchor: int  # first hit of the anchor in the base path, >= hit_start
    h0: int  # offset of the rep inside the loop
    length: int
    loop: Loop
    h_rep_stage1: int = -1  # first hit of the rep after stage 1

    def to_json_dict(self) -> dict:
        return {
            "rep": int(self.rep),
            "near": int(self.near),
            "kind": self.kind,
            "h_anchor": int(self.h_anchor),
            "h0": int(self.h0),
            "length": int(self.length),
            "h_rep_stage1": int(self.h_rep_stage1),
            "loop_sha256": hashlib.sha256(self.loop.labels.tobytes()).hexdigest()[:16],
        }


@dataclass
class TreeRecord:
    rep: int
    members: np.ndarray
    length: int
    loop: Loop
    p_anchor: int  # insertion position in the stage-1 path

    def to_json_dict(self) -> dict:
        return {
            "rep": int(self.rep),
            "members": [int(m) for m in self.members],
            "length": int(self.length),
            "p_anchor": int(self.p_anchor),
            "loop_sha256": hashlib.sha256(self.loop.labels.tobytes()).hexdigest()[:16],
        }


@dataclass
class SurgeryResult:
    params: SurgeryParams
    base_path: np.ndarray
    path: np.ndarray  # after both insertion stages
    records: list  # LoopRecord, in insertion (increasing h_anchor) order
    tree_records: list  # TreeRecord, in insertion order
    graph: AuxiliaryGraph
    total_inserted: int
    budget: float

    @property
    def gap(self) -> int:
        return self.params.T4 - (self.path.shape[0] - 1)

    @property
    def extension_count(self) -> int:
        return (2 * self.params.geo.d) ** self.gap

    @property
    def log_extension_count(self) -> float:
        return self.gap * math.log(2 * self.params.geo.d)

    def extend(self, stream: RngStream) -> np.ndarray:
        """One uniformly random free extension to length T4."""
        geo = self.params.geo
        codes = stream.generator().integers(0, 2 * geo.d, size=self.gap)
        return self.extend_with(codes)

    def extend_with(self, codes: np.ndarray) -> np.ndarray:
        from ._kernels import steps_to_labels

        geo = self.params.geo
        codes = np.asarray(codes, dtype=np.uint8)
        if codes.shape[0] != self.gap:
            raise SurgeryError(f"extension must supply exactly {self.gap} steps")
        out = np.empty(self.params.T4 + 1, dtype=np.int64)
        n = self.path.shape[0]
        out[:n] = self.path
        tail = np.empty(codes.shape[0] + 1, dtype=np.int64)
        steps_to_labels(geo.d, geo.N, int(self.path[-1]), codes, tail)
        out[n:] = tail[1:]
        return out

    def enumerate_extension_codes(self, limit: int = 6**8):
        """Yields every free-extension code tuple; refuses if the count
        exceeds limit."""
        if self.extension_count > limit:
            raise SurgeryError(
                f"extension count {self.extension_count} exceeds the enumeration cap {limit}"
            )
        import itertools

        yield from itertools.product(range(2 * self.params.geo.d), repeat=self.gap)

    def to_json_dict(self) -> dict:
        return {
            "rules_version": RULES_VERSION,
            "N": self.params.geo.N,
            "d": self.params.geo.d,
            "T3": self.params.T3,
            "T4": self.params.T4,
            "hit_start": self.params.hit_start,
            "l_n": self.params.l_n,
            "total_inserted": int(self.total_inserted),
            "budget": float(self.budget),
            "gap": int(self.gap),
            "stage1": [r.to_json_dict() for r in self.records],
            "stage2": [r.to_json_dict() for r in self.tree_records],
        }


def build_surgery(
    params: SurgeryParams,
    path: np.ndarray,
    f_mask: np.ndarray,
    check_good: bool = True,
) -> SurgeryResult:
    """Insert anchor loops (stage 1) and component tree loops (stage 2).

    With check_good the three good-path clauses are enforced first; the
    mechanics themselves only require the structural invariants asserted
    below (distinct anchors, disjoint loops, budget window)."""
    geo = params.geo
    path = np.asarray(path, dtype=np.int64)
    if path.shape[0] != params.T3 + 1:
        raise SurgeryError(
            f"path must have T3 + 1 = {params.T3 + 1} vertices, got {path.shape[0]}"
        )
    f_size = int(f_mask.sum())
    params.check_budget_window(f_size)
    budget = params.insertion_budget(f_size)
    if check_good:
        from .latepoints import is_good_path

        verdict = is_good_path(params, path, f_mask)
        if not verdict.good:
            raise SurgeryError(
                "input path is not good: "
                f"covered={verdict.covered_ok} r={verdict.r_ok} budget={verdict.budget_ok}"
            )
    late = late_set_of_path(params, path, f_mask)
    graph = build_aux_graph(geo, late, 3 * params.l_n)
    segment = path[params.T2 + 1 : params.T3 + 1]
    uniq_seg = np.unique(segment)

    records = []
    for comp_labels, rep in zip(graph.components(), graph.reps):
        rep = int(rep)
        y_lab, r = nearest_on_segment(geo, uniq_seg, geo.unlabel(rep))
        if r == 0:
            h = _first_hit(path, rep, params.hit_start)
            axis = _step_axis(geo, path[h - 1], path[h])
            if axis is None:
                raise SurgeryError("non-unit step in the base path")
            loop = build_bump(geo, geo.unlabel(rep), axis)
        else:
            h = _first_hit(path, int(y_lab), params.hit_start)
            loop = build_beta(geo, geo.unlabel(rep), geo.unlabel(int(y_lab)))
        if h is None:
            raise SurgeryError("anchor vertex never hit after the checkpoint")
        records.append(
            LoopRecord(rep, int(y_lab), loop.kind, h, loop.hit_index, loop.length, loop)
        )
    records.sort(key=lambda rec: rec.h_anchor)
    anchors = [rec.h_anchor for rec in records]
    if len(set(anchors)) != len(anchors):
        raise SurgeryError("anchor positions collide")

    late_set = set(int(v) for v in late)
    comp_of = {int(lab): int(c) for lab, c in zip(graph.points, graph.component_of)}
    all_loop_cells: set = set()
    for rec in records:
        cells = set(int(v) for v in rec.loop.labels)
        if all_loop_cells & cells:
            raise SurgeryError("inserted loops are not pairwise disjoint")
        all_loop_cells |= cells
        foreign = {
            v for v in cells if v in late_set and comp_of[v] != comp_of[rec.rep]
        }
        if foreign:
            raise SurgeryError("loop touches a late point of another component")

    # stage 1: single splice of all anchor loops, in increasing anchor order
    pieces = []
    prev = 0
    offset = 0
    for rec in records:
        pieces.append(path[prev : rec.h_anchor + 1])
        pieces.append(rec.loop.labels[1:])
        rec.h_rep_stage1 = rec.h_anchor + offset + rec.h0
        offset += rec.length
        prev = rec.h_anchor + 1
    pieces.append(path[prev:])
    stage1 = np.concatenate(pieces) if records else path.copy()

    # stage 2: one tree loop per component, anchored at the representative's
    # first hit in the stage-1 path (which sits inside its anchor loop)
    tree_records = []
    comp_by_rep = {int(rep): comp for comp, rep in zip(graph.components(), graph.reps)}
    for rec in records:
        tree = build_tree_loop(geo, comp_by_rep[rec.rep], rec.rep, 3 * params.l_n)
        tree_records.append(
            TreeRecord(rec.rep, comp_by_rep[rec.rep], tree.length, tree, rec.h_rep_stage1)
        )
    tree_records.sort(key=lambda rec: rec.p_anchor)
    pieces = []
    prev = 0
    for rec in tree_records:
        if rec.length == 0:
            continue
        pieces.append(stage1[prev : rec.p_anchor + 1])
        pieces.append(rec.loop.labels[1:])
        prev = rec.p_anchor + 1
    pieces.append(stage1[prev:])
    final = np.concatenate(pieces) if pieces else stage1

    total = int(final.shape[0] - path.shape[0])
    if check_good and total > budget:
        raise SurgeryError(f"inserted length {total} exceeds the budget {budget:.2f}")
    if final.shape[0] - 1 > params.T4:
        raise SurgeryError("surgered path exceeds the extension horizon")
    return SurgeryResult(params, path, final, records, tree_records, graph, total, budget)


@dataclass
class RecoveryResult:
    base_path: np.ndarray
    free_tail: np.ndarray  # labels beyond T3 after all deletions
    records: list  # LoopRecord in deletion order (decreasing position)
    tree_records: list
    graph: AuxiliaryGraph

    def to_json_dict(self) -> dict:
        return {
            "rules_version": RULES_VERSION,
            "stage1": [r.to_json_dict() for r in self.records],
            "stage2": [r.to_json_dict() for r in self.tree_records],
            "free_steps": int(self.free_tail.shape[0]),
        }


def recover(params: SurgeryParams, tilde: np.ndarray, f_mask: np.ndarray) -> RecoveryResult:
    """Invert build_surgery on any free extension of its output.

    Every deduction uses only the input path and the shared parameters: the
    late set comes from the prefix up to T2, component sweeps are recomputed
    and matched literally, anchor loops are identified from the step-axis
    pattern at each representative's first hit and re-derived from the
    symmetric window equation. Any mismatch raises DecodeError with the
    failing stage; a successful return is a proof of reconstruction."""
    geo = params.geo
    tilde = np.asarray(tilde, dtype=np.int64)
    if tilde.shape[0] < params.T3 + 1:
        raise DecodeError("length", "input shorter than the surgery horizon T3")
    late = late_set_of_path(params, tilde, f_mask)
    graph = build_aux_graph(geo, late, 3 * params.l_n)

    # stage 2 deletion: recompute each component's tree loop; its window
    # starts right after the representative's first hit past the checkpoint
    tree_records = []
    for comp_labels, rep in zip(graph.components(), graph.reps):
        rep = int(rep)
        tree = build_tree_loop(geo, comp_labels, rep, 3 * params.l_n)
        if tree.length == 0:
            continue
        p = _first_hit(tilde, rep, params.hit_start)
        if p is None:
            raise DecodeError("tree-anchor", f"late representative {rep} never hit")
        if p + tree.length >= tilde.shape[0]:
            raise DecodeError("tree-window", "component sweep window exceeds the path")
        window = tilde[p + 1 : p + tree.length + 1]
        if not np.array_equal(window, tree.labels[1:]):
            raise DecodeError(
                "tree-window", f"window at {p} does not match the recomputed sweep"
            )
        tree_records.append(TreeRecord(rep, comp_labels, tree.length, tree, p))
    tree_records.sort(key=lambda rec: rec.p_anchor)
    for a, b in zip(tree_records[:-1], tree_records[1:]):
        if a.p_anchor + a.length >= b.p_anchor:
            raise DecodeError("tree-window", "component sweep windows overlap")
    path_n = tilde
    for rec in reversed(tree_records):
        path_n = delete_loop(path_n, rec.p_anchor, rec.p_anchor + rec.length)

    # stage 1 deletion: classify each representative's loop from the step
    # axes around its first hit, solve the symmetric window equation for the
    # anchor, and verify against the canonical loop
    records = []
    for rep in graph.reps:
        rep = int(rep)
        h = _first_hit(path_n, rep, params.hit_start)
        if h is None:
            raise DecodeError("beta-anchor", f"late representative {rep} never hit")
        if h < 1 or h + 1 >= path_n.shape[0]:
            raise DecodeError("beta-anchor", "first hit too close to the path ends")
        a_in = _step_axis(geo, path_n[h - 1], path_n[h])
        a_out = _step_axis(geo, path_n[h], path_n[h + 1])
        if a_in is None or a_out is None:
            raise DecodeError("beta-classify", "non-unit step at the first hit")
        if a_in == a_out:
            kind = KIND_BUMP
        elif a_in < a_out:
            kind = KIND_AXIS
        else:
            if h + 2 >= path_n.shape[0]:
                raise DecodeError("beta-classify", "path ends inside a loop window")
            a_next = _step_axis(geo, path_n[h + 1], path_n[h + 2])
            if a_next is None:
                raise DecodeError("beta-classify", "non-unit step at the first hit")
            kind = KIND_DIAG if a_out <= a_next else KIND_AXIS_LAST
        if kind == KIND_BUMP:
            side = geo.step_label(rep, a_in, 1)
            if path_n[h + 1] != side or path_n[h + 2] != rep:
                raise DecodeError("beta-window", f"bump window mismatch at {h}")
            records.append(
                LoopRecord(rep, rep, kind, h, 0, 2, build_bump(geo, geo.unlabel(rep), a_in), h)
            )
            continue
        ext = _EXT[kind]
        k_cap = geo.d * params.l_n + 1
        k_found = None
        for k in range(1, k_cap + 1):
            if h - k < 0 or h + k + ext >= path_n.shape[0]:
                break
            if path_n[h - k] == path_n[h + k + ext]:
                k_found = k
                break
        if k_found is None:
            raise DecodeError("beta-window", f"no symmetric window at hit {h}")
        y_lab = int(path_n[h - k_found])
        delta = _dv(geo, geo.unlabel(rep), geo.unlabel(y_lab))
        if classify_delta(delta) != kind:
            raise DecodeError(
                "beta-classify", f"window displacement contradicts the step pattern at {h}"
            )
        loop = build_beta(geo, geo.unlabel(rep), geo.unlabel(y_lab))
        s = h - k_found
        if s + loop.length >= path_n.shape[0]:
            raise DecodeError("beta-window", "loop window exceeds the path")
        if not np.array_equal(path_n[s : s + loop.length + 1], loop.labels):
            raise DecodeError("beta-window", f"window at {s} does not match the canonical loop")
        records.append(LoopRecord(rep, y_lab, kind, s, loop.hit_index, loop.length, loop, h))
    records.sort(key=lambda rec: rec.h_anchor)
    for a, b in zip(records[:-1], records[1:]):
        if a.h_anchor + a.length >= b.h_anchor:
            raise DecodeError("beta-window", "loop windows overlap")
    base = path_n
    for rec in reversed(records):
        base = delete_loop(base, rec.h_anchor, rec.h_anchor + rec.length)

    if base.shape[0] < params.T3 + 1:
        raise DecodeError("length", "deletions left fewer than T3 + 1 vertices")
    return RecoveryResult(
        base[: params.T3 + 1], base[params.T3 + 1 :], records, tree_records, graph
    )


@dataclass
class RoundTrip:
    ok: bool
    surgery: SurgeryResult
    recovery: RecoveryResult
    extended: np.ndarray


def roundtrip(
    params: SurgeryParams,
    path: np.ndarray,
    f_mask: np.ndarray,
    stream: RngStream,
    check_good: bool = True,
) -> RoundTrip:
    res = build_surgery(params, path, f_mask, check_good=check_good)
    tilde = res.extend(stream)
    rec = recover(params, tilde, f_mask)
    ok = np.array_equal(rec.base_path, res.base_path)
    return RoundTrip(ok, res, rec, tilde)

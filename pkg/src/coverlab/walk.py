"""Random-walk engine on the torus: trajectories, cover times, late points.

Step codes: code 2a is +e_a, code 2a+1 is -e_a (axis a in 0..d-1). The binary
trajectory dump uses this encoding byte per step; see README for the layout.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .streams import RngStream
from .torus import TorusGeometry, TorusPoint

_MAGIC = b"CVLTRJ01"


class NeverHitError(RuntimeError):
    """The requested vertex is not hit in the admissible window."""


class BudgetExceededError(RuntimeError):
    def __init__(self, msg: str, steps_run: int):
        super().__init__(msg)
        self.steps_run = steps_run


def axis_of(code: int) -> int:
    return code >> 1


def sign_of(code: int) -> int:
    return 1 - 2 * (code & 1)


@dataclass
class Trajectory:
    geo: TorusGeometry
    start: TorusPoint
    steps: np.ndarray  # uint8 direction codes
    seed: int = 0
    _labels: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return int(self.steps.shape[0])

    def labels(self) -> np.ndarray:
        """Vertex labels along the path, length len(self)+1."""
        if self._labels is None:
            out = np.empty(len(self) + 1, dtype=np.int64)
            _kernels.steps_to_labels(
                self.geo.d, self.geo.N, self.geo.label(self.start), self.steps, out
            )
            self._labels = out
        return self._labels

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<IIIQ", 1, self.geo.d, self.geo.N, self.seed))
            f.write(struct.pack("<Q", len(self)))
            f.write(struct.pack(f"<{self.geo.d}I", *self.start))
            f.write(self.steps.astype(np.uint8).tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "Trajectory":
        with open(path, "rb") as f:
            if f.read(8) != _MAGIC:
                raise ValueError("not a trajectory dump")
            version, d, n, seed = struct.unpack("<IIIQ", f.read(20))
            if version != 1:
                raise ValueError(f"unsupported trajectory version {version}")
            (n_steps,) = struct.unpack("<Q", f.read(8))
            start = struct.unpack(f"<{d}I", f.read(4 * d))
            steps = np.frombuffer(f.read(n_steps), dtype=np.uint8)
            if steps.shape[0] != n_steps:
                raise ValueError("truncated trajectory dump")
        return cls(geo=TorusGeometry(d, n), start=tuple(start), steps=steps.copy(), seed=seed)


@dataclass
class VisitRecord:
    geo: TorusGeometry
    start_label: int
    first_visit: np.ndarray  # int64[N^d], -1 for never visited
    steps_run: int
    cover_time: int | None  # None when the budget ran out first

    @property
    def covered(self) -> bool:
        return self.cover_time is not None

    def unvisited_count(self) -> int:
        return int(np.count_nonzero(self.first_visit < 0))


def _resolve_start(geo: TorusGeometry, start, stream: RngStream) -> int:
    if start is None:
        # uniform start: the walk law used throughout
        return int(stream.child(0xA11).generator().integers(0, geo.volume))
    return geo.label(start)


def simulate_walk(
    geo: TorusGeometry, n_steps: int, stream: RngStream, start: Sequence[int] | None = None
) -> Trajectory:
    """n_steps of simple random walk; start is uniform when omitted."""
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    start_label = _resolve_start(geo, start, stream)
    codes = stream.child(0x57E9).generator().integers(0, 2 * geo.d, size=n_steps, dtype=np.uint8)
    return Trajectory(geo=geo, start=geo.unlabel(start_label), steps=codes)


def default_cover_budget(geo: TorusGeometry) -> int:
    # about 30x the cover-time scale; overflow then signals a real problem
    return int(50 * geo.volume * math.log(geo.volume)) + 1


def run_cover_time(
    geo: TorusGeometry,
    stream: RngStream,
    start: Sequence[int] | None = None,
    max_steps: int | None = None,
) -> VisitRecord:
    """Walk until the torus is covered (or the budget runs out), streaming
    first-visit times; no full path is kept."""
    budget = default_cover_budget(geo) if max_steps is None else int(max_steps)
    start_label = _resolve_start(geo, start, stream)
    first_visit = np.full(geo.volume, -1, dtype=np.int64)
    cover, _end, steps = _kernels.walk_cover(
        geo.d, geo.N, start_label, stream.child(0x57E9).kernel_seed(), budget, first_visit
    )
    return VisitRecord(
        geo=geo,
        start_label=start_label,
        first_visit=first_visit,
        steps_run=int(steps),
        cover_time=int(cover) if cover >= 0 else None,
    )


def run_steps(
    geo: TorusGeometry,
    n_steps: int,
    stream: RngStream,
    start: Sequence[int] | None = None,
) -> VisitRecord:
    """First-visit record after exactly n_steps (earlier if covered sooner)."""
    return run_cover_time(geo, stream, start=start, max_steps=n_steps)


def cover_time_scale(geo: TorusGeometry, g0: float) -> float:
    """g(0) N^d log N^d, the deterministic cover-time scale."""
    return g0 * geo.volume * math.log(geo.volume)


def late_points(visit: VisitRecord, alpha: float, g0: float) -> np.ndarray:
    """Labels with first visit after alpha * g(0) N^d log N^d (never counts)."""
    threshold = alpha * cover_time_scale(visit.geo, g0)
    cutoff = math.floor(threshold)
    if visit.steps_run < cutoff and visit.cover_time is None:
        raise ValueError(
            f"walk ran {visit.steps_run} steps < floor(alpha t_cov) = {cutoff}; "
            "late set undetermined"
        )
    fv = visit.first_visit
    return np.flatnonzero((fv < 0) | (fv > cutoff)).astype(np.int64)


def first_hit_after(labels: np.ndarray, vertex: int, lam: float, t_cov: float) -> int:
    """Minimal k >= lam * t_cov with labels[k] == vertex."""
    k0 = max(0, math.ceil(lam * t_cov))
    if k0 >= labels.shape[0]:
        raise NeverHitError(f"window start {k0} beyond path end {labels.shape[0] - 1}")
    hits = np.flatnonzero(labels[k0:] == vertex)
    if hits.size == 0:
        raise NeverHitError(f"vertex {vertex} not hit at or after {k0}")
    return int(k0 + hits[0])


def nearest_on_segment(
    geo: TorusGeometry, segment_labels: np.ndarray, point: Sequence[int]
) -> tuple[int, int]:
    """(label, dist_inf) of the segment vertex closest to point; distance ties
    break to the smallest label."""
    if segment_labels.size == 0:
        raise ValueError("empty segment")
    uniq = np.unique(segment_labels)
    dists = geo.dist_inf_many(uniq, point)
    best = int(dists.min())
    label = int(uniq[dists == best].min())
    return label, best


def internal_boundary(geo: TorusGeometry, mask: np.ndarray) -> np.ndarray:
    """Mask of vertices in the set with at least one neighbor outside."""
    coords = geo.coords_of(np.flatnonzero(mask))
    out = np.zeros_like(mask)
    for axis in range(geo.d):
        for sign in (1, -1):
            nb = coords.copy()
            nb[:, axis] = (nb[:, axis] + sign) % geo.N
            onbd = ~mask[geo.labels_of(nb)]
            out[geo.labels_of(coords[onbd])] = True
    return out & mask


def count_excursions(
    geo: TorusGeometry,
    path_labels: np.ndarray,
    a_mask: np.ndarray,
    a_prime_mask: np.ndarray,
    t_max: int | None = None,
) -> int:
    """Completed excursions from A to the internal boundary of A' by t_max.

    An excursion starts when the walk enters A and completes at the next visit
    to the internal boundary of A'; requires A inside A' with a gap
    (A and the boundary of A' disjoint).
    """
    if not (~a_mask | a_prime_mask).all():
        raise ValueError("A must be a subset of A'")
    bnd = internal_boundary(geo, a_prime_mask)
    if (a_mask & bnd).any():
        raise ValueError("A touches the boundary of A'; no gap for excursions")
    if t_max is None:
        t_max = path_labels.shape[0] - 1
    path = path_labels[: t_max + 1]
    starts = np.flatnonzero(a_mask[path])
    ends = np.flatnonzero(bnd[path])
    count = 0
    t = 0
    while True:
        i = np.searchsorted(starts, t)
        if i >= starts.size:
            break
        j = np.searchsorted(ends, starts[i])
        if j >= ends.size:
            break
        count += 1
        t = ends[j] + 1
    return count


def max_local_time(d: int, n_steps: int, stream: RngStream) -> int:
    """Largest number of visits to any single site of an n-step Z^d walk."""
    return int(_kernels.zd_max_local_time(d, stream.kernel_seed(), n_steps))

import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coverlab.fixtures import fixture_params, make_good_fixture, random_fixture
from coverlab.latepoints import build_aux_graph
from coverlab.streams import RngStream
from coverlab.surgery import (
    KIND_AXIS,
    KIND_AXIS_LAST,
    KIND_BUMP,
    KIND_DIAG,
    RULES_VERSION,
    DecodeError,
    SurgeryError,
    build_beta,
    build_bump,
    build_path,
    build_surgery,
    build_tree_loop,
    classify,
    delete_loop,
    insert_loop,
    recover,
    roundtrip,
)
from coverlab.torus import TorusGeometry

GOLDEN = Path(__file__).parent / "data" / "golden_plan.json"

coords16 = st.tuples(st.integers(0, 15), st.integers(0, 15), st.integers(0, 15))


@given(coords16, coords16)
def test_classify_rule(x, y):
    geo = TorusGeometry(3, 16)
    delta = geo.difference_vector(x, y)
    nz = [i for i, c in enumerate(delta) if c != 0]
    kind = classify(geo, x, y)
    if len(nz) == 0:
        assert kind == KIND_BUMP
    elif len(nz) >= 2:
        assert kind == KIND_DIAG
    elif nz[0] == geo.d - 1:
        assert kind == KIND_AXIS_LAST
    else:
        assert kind == KIND_AXIS


@given(coords16, coords16)
def test_build_path_greedy(x, y):
    geo = TorusGeometry(3, 16)
    if geo.difference_vector(x, y) == (0, 0, 0):
        with pytest.raises(SurgeryError):
            build_path(geo, x, y)
        return
    path = build_path(geo, x, y)
    assert path[0] == geo.label(x)
    assert path[-1] == geo.label(y)
    assert path.shape[0] == geo.dist_1(x, y) + 1
    for a, b in zip(path[:-1], path[1:]):
        assert geo.dist_1(geo.unlabel(int(a)), geo.unlabel(int(b))) == 1


def _check_loop_laws(geo, loop):
    labels = loop.labels
    assert labels[0] == labels[-1] == loop.y_label
    assert labels[loop.hit_index] == loop.x_label
    # unit steps throughout
    for a, b in zip(labels[:-1], labels[1:]):
        assert geo.dist_1(geo.unlabel(int(a)), geo.unlabel(int(b))) == 1
    # x visited exactly once
    assert int((labels == loop.x_label).sum()) == 1
    # self-avoiding apart from the closure
    assert np.unique(labels[:-1]).size == labels.size - 1
    dist = geo.dist_inf(geo.unlabel(loop.x_label), geo.unlabel(loop.y_label))
    assert loop.length <= 2 * geo.d * (dist + 2)


@settings(max_examples=150)
@given(coords16, coords16)
def test_beta_loop_laws(x, y):
    geo = TorusGeometry(3, 16)
    if geo.difference_vector(x, y) == (0, 0, 0):
        loop = build_bump(geo, x, 0)
        assert loop.labels.tolist() == [
            geo.label(x),
            geo.label((x[0] + 1, x[1], x[2])),
            geo.label(x),
        ]
    else:
        loop = build_beta(geo, x, y)
        _check_loop_laws(geo, loop)


def test_beta_each_kind_explicit():
    geo = TorusGeometry(3, 16)
    cases = {
        KIND_DIAG: ((2, 3, 4), (4, 5, 6)),
        KIND_AXIS: ((2, 3, 4), (5, 3, 4)),
        KIND_AXIS_LAST: ((2, 3, 4), (2, 3, 7)),
    }
    for kind, (x, y) in cases.items():
        loop = build_beta(geo, x, y)
        assert loop.kind == kind
        _check_loop_laws(geo, loop)
    with pytest.raises(SurgeryError):
        build_beta(geo, (1, 1, 1), (1, 1, 1))


def test_bump_form():
    geo = TorusGeometry(3, 16)
    for axis in range(3):
        loop = build_bump(geo, (5, 5, 5), axis)
        assert loop.kind == KIND_BUMP
        assert loop.length == 2
        probe = [5, 5, 5]
        probe[axis] += 1
        assert loop.labels.tolist() == [
            geo.label((5, 5, 5)),
            geo.label(probe),
            geo.label((5, 5, 5)),
        ]
    with pytest.raises(SurgeryError):
        build_bump(geo, (5, 5, 5), 3)


@settings(max_examples=60)
@given(st.integers(0, 10_000), st.integers(2, 7))
def test_tree_loop_covers_component(case, size):
    geo = TorusGeometry(3, 24)
    radius = 6
    gen = RngStream(70, (case,)).generator()
    root = gen.integers(0, 24, size=3)
    pts = {geo.label(root)}
    while len(pts) < size:
        base = geo.unlabel(int(gen.choice(sorted(pts))))
        pts.add(geo.label((np.array(base) + gen.integers(-radius, radius + 1, size=3)) % 24))
    comp = np.array(sorted(pts), dtype=np.int64)
    g = build_aux_graph(geo, comp, radius)
    if g.n_components != 1:
        return  # jump exceeded the radius; not a valid component
    rep = int(comp.min())
    loop = build_tree_loop(geo, comp, rep, radius)
    assert loop.labels[0] == loop.labels[-1] == rep
    assert set(comp.tolist()) <= set(loop.labels.tolist())
    assert loop.length <= 2 * geo.d * radius * (comp.size - 1)


def test_tree_loop_singleton_is_empty():
    geo = TorusGeometry(3, 16)
    loop = build_tree_loop(geo, np.array([42]), 42, 6)
    assert loop.length == 0
    assert loop.labels.tolist() == [42]


def test_tree_loop_rejects_disconnected():
    geo = TorusGeometry(3, 16)
    comp = np.array([geo.label((0, 0, 0)), geo.label((8, 8, 8))])
    with pytest.raises(SurgeryError):
        build_tree_loop(geo, comp, int(comp.min()), 2)


@settings(max_examples=80)
@given(st.integers(0, 10_000), st.integers(0, 40), st.integers(1, 12))
def test_insert_delete_inverse(case, k, loop_len):
    geo = TorusGeometry(3, 8)
    gen = RngStream(71, (case,)).generator()
    from coverlab.walk import simulate_walk

    path = simulate_walk(geo, 60, RngStream(71, (case, 1)), start=(0, 0, 0)).labels()
    k = min(k, path.shape[0] - 1)
    # a closed excursion from path[k]: out and back by the same route
    out = [int(path[k])]
    cur = np.array(geo.unlabel(int(path[k])))
    for _ in range(loop_len):
        axis = int(gen.integers(0, 3))
        cur[axis] = (cur[axis] + 1) % 8
        out.append(geo.label(cur))
    loop = np.array(out + out[-2::-1], dtype=np.int64)
    bigger = insert_loop(path, loop, k)
    assert bigger.shape[0] == path.shape[0] + loop.shape[0] - 1
    assert np.array_equal(delete_loop(bigger, k, k + loop.shape[0] - 1), path)


def test_surgery_structure():
    p = fixture_params(16)
    fx = make_good_fixture(p, "two-clusters", RngStream(72, (0,)))
    res = build_surgery(p, fx.path, fx.f_mask)
    assert res.path.shape[0] == p.T3 + 1 + res.total_inserted
    assert res.total_inserted <= res.budget
    anchors = [r.h_anchor for r in res.records]
    assert anchors == sorted(anchors)
    assert all(a >= p.hit_start for a in anchors)
    # inserted loops pairwise vertex-disjoint
    seen = set()
    for r in res.records:
        cells = set(r.loop.labels.tolist())
        assert not (seen & cells)
        seen |= cells
    # one tree record per component, in stage-1 anchor order
    assert len(res.tree_records) == res.graph.n_components
    assert [t.p_anchor for t in res.tree_records] == sorted(
        t.p_anchor for t in res.tree_records
    )
    # the base path is untouched outside the splice points
    assert np.array_equal(res.base_path, fx.path)


def test_surgery_plan_shape_singleton_plus_pair():
    # one singleton rep and one 2-point cluster: 2 records in each stage
    p = fixture_params(16)
    fx = make_good_fixture(p, "cluster-and-singletons", RngStream(73, (0,)))
    g = build_aux_graph(p.geo, fx.planted, 3 * p.l_n)
    sizes = sorted(c.size for c in g.components())
    res = build_surgery(p, fx.path, fx.f_mask)
    assert len(res.records) == g.n_components
    assert len(res.tree_records) == g.n_components
    if sizes == [1, 2]:
        lengths = sorted(t.length for t in res.tree_records)
        assert lengths[0] == 0 and lengths[1] > 0


def test_surgery_rejects_bad_input():
    p = fixture_params(16)
    fx = make_good_fixture(p, "single-diag", RngStream(74, (0,)))
    with pytest.raises(SurgeryError):
        build_surgery(p, fx.path[:-1], fx.f_mask)  # wrong length
    lazy = np.tile([fx.path[0], fx.path[1]], p.T3)[: p.T3 + 1]
    with pytest.raises(SurgeryError):
        build_surgery(p, lazy, fx.f_mask)  # not good


def test_extension_bookkeeping():
    p = fixture_params(16)
    fx = make_good_fixture(p, "single-axis", RngStream(75, (0,)))
    res = build_surgery(p, fx.path, fx.f_mask)
    assert res.gap == p.T4 - p.T3 - res.total_inserted
    assert res.extension_count == 6**res.gap
    assert res.log_extension_count == pytest.approx(res.gap * np.log(6), rel=1e-12)
    tilde = res.extend(RngStream(75, (1,)))
    assert tilde.shape[0] == p.T4 + 1
    assert np.array_equal(tilde[: res.path.shape[0]], res.path)
    with pytest.raises(SurgeryError):
        res.extend_with(np.zeros(res.gap + 1, dtype=np.uint8))


@pytest.mark.parametrize("N", [16, 24, 32])
def test_roundtrip_each_layout(N):
    from coverlab.fixtures import layout_menu

    p = fixture_params(N)
    for layout in sorted(layout_menu(3, N, p.l_n)):
        fx = make_good_fixture(p, layout, RngStream(76, (N, hash(layout) % 997)))
        rt = roundtrip(p, fx.path, fx.f_mask, RngStream(77, (N,)))
        assert rt.ok, layout
        assert np.array_equal(rt.recovery.base_path, fx.path)


def test_recover_ignores_free_tail_content():
    p = fixture_params(16)
    fx = make_good_fixture(p, "two-clusters", RngStream(78, (0,)))
    res = build_surgery(p, fx.path, fx.f_mask)
    tilde = res.extend(RngStream(78, (1,)))
    tampered = tilde.copy()
    tampered[-1] = tilde[-2]  # a repeat can never be a first hit
    rec = recover(p, tampered, fx.f_mask)
    assert np.array_equal(rec.base_path, fx.path)


def test_recover_rejects_truncation_and_corruption():
    p = fixture_params(16)
    fx = make_good_fixture(p, "two-clusters", RngStream(79, (0,)))
    res = build_surgery(p, fx.path, fx.f_mask)
    tilde = res.extend(RngStream(79, (1,)))
    with pytest.raises(DecodeError) as exc:
        recover(p, tilde[: p.T3], fx.f_mask)
    assert exc.value.step == "length"
    # corrupt the inside of the first anchor loop
    rec0 = res.records[0]
    pos = rec0.h_anchor + 1
    bad = tilde.copy()
    bad[pos] = tilde[pos - 1]
    with pytest.raises(DecodeError):
        recover(p, bad, fx.f_mask)


def test_recovery_transcript_and_determinism():
    p = fixture_params(16)
    fx = make_good_fixture(p, "four-singletons", RngStream(80, (0,)))
    res = build_surgery(p, fx.path, fx.f_mask)
    tilde = res.extend(RngStream(80, (1,)))
    a = recover(p, tilde, fx.f_mask).to_json_dict()
    b = recover(p, tilde, fx.f_mask).to_json_dict()
    assert a == b
    assert a["rules_version"] == RULES_VERSION


def test_surgered_outputs_distinct():
    p = fixture_params(16)
    seen = set()
    for i in range(60):
        fx = random_fixture(p, RngStream(81, (i,)))
        res = build_surgery(p, fx.path, fx.f_mask)
        tilde = res.extend(RngStream(82, (i,)))
        seen.add(tilde.tobytes())
    assert len(seen) == 60


def test_golden_plan_pinned():
    p = fixture_params(16)
    fx = make_good_fixture(p, "two-clusters", RngStream(83, (0,)))
    res = build_surgery(p, fx.path, fx.f_mask)
    got = json.loads(json.dumps(res.to_json_dict(), sort_keys=True))
    want = json.loads(GOLDEN.read_text())
    assert got == want

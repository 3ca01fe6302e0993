import numpy as np

from coverlab.streams import RngStream


def test_same_identity_same_draws():
    a = RngStream(7, (1, 2)).generator().integers(0, 1000, size=32)
    b = RngStream(7, (1, 2)).generator().integers(0, 1000, size=32)
    assert np.array_equal(a, b)


def test_children_decorrelated():
    rows = [RngStream(7).child(i).generator().integers(0, 2**30, size=8) for i in range(50)]
    assert len({tuple(r) for r in rows}) == 50


def test_path_order_matters():
    a = RngStream(7, (1, 2)).generator().integers(0, 2**30, size=8)
    b = RngStream(7, (2, 1)).generator().integers(0, 2**30, size=8)
    assert not np.array_equal(a, b)


def test_child_does_not_mutate_parent():
    s = RngStream(7, (3,))
    before = s.generator().integers(0, 2**30, size=8)
    s.child(9)
    after = s.generator().integers(0, 2**30, size=8)
    assert np.array_equal(before, after)


def test_kernel_seed_fits_int64():
    seeds = {RngStream(11, (i,)).kernel_seed() for i in range(200)}
    assert len(seeds) == 200
    assert all(0 <= s < 2**63 for s in seeds)
    assert RngStream(11, (5,)).kernel_seed() == RngStream(11, (5,)).kernel_seed()

"""Cell store: assignment, lazy density, seed search, index equivalence."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streampeaks.cells import (
    CellSpace,
    GridIndex,
    Metric,
    MinIdTies,
    SeededRandomTies,
    StreamPoint,
    seed_distance,
)
from streampeaks.decay import DecayParams, decay_density
from streampeaks.errors import DimensionMismatch, OutOfOrderTimestamp, UnknownCell

PARAMS = DecayParams(a=0.998, lam=1.0, v=1000.0, beta=0.0021)


def space(r=0.3, dim=2, **kw):
    return CellSpace(PARAMS, r=r, dim=dim, **kw)


def plant(sp, *coords, t=0.0):
    """Found one cell per coordinate tuple by feeding far-enough points."""
    ids = []
    for c in coords:
        res = sp.assign_point(StreamPoint.of(c, t))
        assert res.created
        ids.append(res.cell_id)
    return ids


class TestNearestSeed:
    def test_unique_minimum(self):
        sp = space()
        id1, id2 = plant(sp, (0.1, 0.0), (5.0, 5.0))
        got = sp.nearest_seed(StreamPoint.of((0.0, 0.0), 1.0))
        assert got == (id1, pytest.approx(0.1))

    def test_empty_store(self):
        assert space().nearest_seed(StreamPoint.of((0.0, 0.0), 0.0)) is None

    def test_equidistant_pair_takes_smaller_id(self):
        sp = space(r=0.15)
        id1, id2 = plant(sp, (0.4, 0.0), (0.6, 0.0))
        cid, dist = sp.nearest_seed(StreamPoint.of((0.5, 0.0), 1.0))
        assert cid == id1 == min(id1, id2)
        assert dist == pytest.approx(0.1)

    def test_inactive_seeds_participate(self):
        sp = space()
        (only,) = plant(sp, (1.0, 1.0))
        assert not sp.cell(only).active
        assert sp.nearest_seed(StreamPoint.of((1.0, 1.05), 1.0))[0] == only

    def test_dimension_mismatch(self):
        sp = space(dim=2)
        with pytest.raises(DimensionMismatch):
            sp.nearest_seed(StreamPoint.of((1.0, 2.0, 3.0), 0.0))


class TestAssignPoint:
    def test_absorb_within_radius(self):
        sp = space(r=0.3)
        (id1,) = plant(sp, (0.1, 0.0))
        res = sp.assign_point(StreamPoint.of((0.0, 0.0), 1.0))
        assert not res.created
        assert res.cell_id == id1
        assert res.distance <= 0.3

    def test_new_cell_outside_radius(self):
        sp = space(r=0.3)
        plant(sp, (0.1, 0.0), (5.0, 5.0))
        res = sp.assign_point(StreamPoint.of((1.0, 1.0), 1.0))
        assert res.created
        assert sp.cell(res.cell_id).rho_last == 1.0
        assert not sp.cell(res.cell_id).active

    def test_three_identical_points(self):
        sp = space(r=0.3)
        for t in (0.0, 1.0, 2.0):
            res = sp.assign_point(StreamPoint.of((0.0, 0.0), t))
        assert len(sp) == 1
        assert res.rho_after == pytest.approx(2.994004, abs=1e-9)

    def test_cell_id_is_founding_point_ordinal(self):
        sp = space(r=0.1)
        ids = plant(sp, (0.0, 0.0), (1.0, 0.0), (2.0, 0.0))
        assert ids == [0, 1, 2]
        sp.assign_point(StreamPoint.of((0.0, 0.01), 1.0))  # absorbed, ordinal 3
        res = sp.assign_point(StreamPoint.of((9.0, 9.0), 2.0))
        assert res.cell_id == 4

    def test_out_of_order_rejected_by_default(self):
        sp = space()
        sp.assign_point(StreamPoint.of((0.0, 0.0), 5.0))
        with pytest.raises(OutOfOrderTimestamp):
            sp.assign_point(StreamPoint.of((1.0, 1.0), 4.0))

    def test_out_of_order_clamp_mode(self):
        sp = space(out_of_order="clamp")
        sp.assign_point(StreamPoint.of((0.0, 0.0), 5.0))
        res = sp.assign_point(StreamPoint.of((0.0, 0.0), 4.0))
        assert res.t == 5.0
        assert sp.cell(res.cell_id).t_last == 5.0

    def test_equal_timestamps_allowed(self):
        sp = space()
        sp.assign_point(StreamPoint.of((0.0, 0.0), 5.0))
        res = sp.assign_point(StreamPoint.of((0.0, 0.0), 5.0))
        assert res.t == 5.0

    def test_new_cell_callback_fires(self):
        sp = space()
        seen = []
        sp.on_new_cell.append(lambda cell: seen.append(cell.id))
        plant(sp, (0.0, 0.0), (5.0, 5.0))
        sp.assign_point(StreamPoint.of((0.0, 0.01), 1.0))
        assert seen == [0, 1]


class TestCellDensityAt:
    def test_identity_now(self):
        sp = space()
        (cid,) = plant(sp, (0.0, 0.0))
        cell = sp.cell(cid)
        cell.rho_last, cell.t_last = 10.0, 0.0
        assert sp.cell_density_at(cid, 0.0) == 10.0

    def test_one_second_later(self):
        sp = space()
        (cid,) = plant(sp, (0.0, 0.0))
        cell = sp.cell(cid)
        cell.rho_last, cell.t_last = 10.0, 0.0
        assert sp.cell_density_at(cid, 1.0) == pytest.approx(9.98, rel=1e-15)

    def test_unknown_cell(self):
        with pytest.raises(UnknownCell):
            space().cell_density_at(99, 0.0)

    def test_matches_point_log_summation(self):
        """Lazy density equals brute-force freshness summation over the
        absorbed point log."""
        sp = space(r=0.5, record_points=True)
        rng = np.random.default_rng(7)
        t = 0.0
        for _ in range(400):
            t += float(rng.random()) * 0.2
            xy = rng.normal(0.0, 0.6, size=2)
            sp.assign_point(StreamPoint.of(xy, t))
        assert sp.point_log is not None
        for cid, times in sp.point_log.items():
            direct = sum(PARAMS.a ** (PARAMS.lam * (t - ti)) for ti in times)
            assert sp.cell_density_at(cid, t) == pytest.approx(direct, rel=1e-9)


class TestPartitionProperty:
    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_each_point_nearest_within_radius(self, seed):
        """At absorption time the chosen seed was within r and minimal
        among all seeds then existing."""
        sp = space(r=0.4)
        rng = np.random.default_rng(seed)
        t = 0.0
        for _ in range(120):
            t += float(rng.random()) * 0.1
            p = StreamPoint.of(rng.normal(0.0, 1.0, size=2), t)
            seeds_before = {cid: c.seed for cid, c in sp.cells.items()}
            res = sp.assign_point(p)
            if res.created:
                dists = [seed_distance(p.coords, s) for s in seeds_before.values()]
                assert not dists or min(dists) > sp.r
            else:
                d = seed_distance(p.coords, seeds_before[res.cell_id])
                assert d <= sp.r
                assert all(d <= seed_distance(p.coords, s)
                           for s in seeds_before.values())


class TestGridIndex:
    @given(seed=st.integers(0, 2**32 - 1), r=st.sampled_from([0.15, 0.4, 1.0]))
    @settings(max_examples=25, deadline=None)
    def test_grid_matches_linear_scan(self, seed, r):
        """The grid-indexed store replays a stream identically to the
        linear-scan store, including after removals."""
        lin = space(r=r)
        grd = space(r=r, index="grid")
        rng = np.random.default_rng(seed)
        t = 0.0
        for i in range(150):
            t += float(rng.random()) * 0.1
            p = StreamPoint.of(rng.normal(0.0, 1.2, size=2), t)
            a, b = lin.assign_point(p), grd.assign_point(p)
            assert (a.cell_id, a.created, a.distance) == (b.cell_id, b.created, b.distance)
            if i % 40 == 39 and len(lin) > 2:
                victim = max(lin.cells)
                lin.remove_cell(victim)
                grd.remove_cell(victim)
        q = StreamPoint.of((0.0, 0.0), t)
        assert lin.nearest_seed(q) == grd.nearest_seed(q)

    def test_far_query_terminates(self):
        g = GridIndex(0.5)
        g.add(1, (100.0, 100.0))
        best, ids = g.scan((0.0, 0.0), lambda cid: (100.0, 100.0), seed_distance)
        assert ids == [1]
        assert best == pytest.approx(seed_distance((0.0, 0.0), (100.0, 100.0)))

    def test_empty_grid(self):
        assert GridIndex(0.5).scan((0.0, 0.0), None, seed_distance) is None


class TestConfigSeams:
    def test_seeded_random_ties_pick_a_tied_candidate(self):
        sp = space(r=0.15, ties=SeededRandomTies(123))
        ids = plant(sp, (0.4, 0.0), (0.6, 0.0))
        cid, dist = sp.nearest_seed(StreamPoint.of((0.5, 0.0), 1.0))
        assert cid in ids
        assert dist == pytest.approx(0.1)

    def test_custom_metric_is_used(self):
        manhattan = Metric(lambda a, b: sum(abs(x - y) for x, y in zip(a, b)),
                           triangle_ok=True)
        sp = space(r=0.15, metric=manhattan)
        id1, id2 = plant(sp, (0.5, 0.0), (0.3, 0.3))
        # Euclidean would prefer id2 (0.424 vs 0.5); Manhattan prefers id1.
        cid, dist = sp.nearest_seed(StreamPoint.of((0.0, 0.0), 1.0))
        assert cid == id1
        assert dist == pytest.approx(0.5)

    def test_invalid_modes_rejected(self):
        with pytest.raises(ValueError):
            space(out_of_order="ignore")
        with pytest.raises(ValueError):
            space(index="kdtree")
        with pytest.raises(ValueError):
            space(r=0.0)

    def test_remove_unknown_cell(self):
        with pytest.raises(UnknownCell):
            space().remove_cell(3)

    def test_copy_cells_is_detached(self):
        sp = space()
        (cid,) = plant(sp, (0.0, 0.0))
        snap = sp.copy_cells()
        sp.cell(cid).rho_last = 99.0
        assert snap[cid].rho_last == 1.0

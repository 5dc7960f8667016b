import math

import numpy as np
import pytest

from splitproj.instances import (
    line_projector,
    random_instance,
    random_instances,
    random_start,
    three_lines,
)
from splitproj.subspaces import intersect_all, intersection_via_nullspace


class TestRandomInstance:
    def test_bitwise_deterministic(self):
        a = random_instance(seed=5, instance_id=7)
        b = random_instance(seed=5, instance_id=7)
        for sa, sb in zip(a.subspaces, b.subspaces):
            assert np.array_equal(sa.projector, sb.projector)
            assert np.array_equal(sa.basis, sb.basis)
        assert np.array_equal(a.intersection.projector, b.intersection.projector)

    def test_streams_are_distinct(self):
        a = random_instance(seed=5, instance_id=0)
        b = random_instance(seed=5, instance_id=1)
        c = random_instance(seed=6, instance_id=0)
        assert not np.allclose(a.subspaces[0].basis, b.subspaces[0].basis)
        assert not np.allclose(a.subspaces[0].basis, c.subspaces[0].basis)

    def test_default_dimension_bound(self):
        rec = random_instance(seed=5, instance_id=3)
        assert [s.dim for s in rec.subspaces] == [5, 5, 5]
        assert rec.intersection.dim >= 3 * 5 - 2 * 6

    def test_full_dims_give_full_intersection(self):
        rec = random_instance(seed=5, instance_id=0, d=6, dims=(6, 6, 6))
        assert np.allclose(rec.intersection.projector, np.eye(6), atol=1e-9)
        for s in rec.subspaces:
            assert np.allclose(s.projector, np.eye(6), atol=1e-9)

    def test_intersection_matches_oracle(self):
        rec = random_instance(seed=8, instance_id=2)
        direct = intersect_all(list(rec.subspaces))
        oracle = intersection_via_nullspace(list(rec.subspaces))
        assert np.linalg.norm(rec.intersection.projector - direct.projector) < 1e-12
        assert np.linalg.norm(rec.intersection.projector - oracle.projector) < 1e-8

    def test_invalid_dims_rejected(self):
        with pytest.raises(ValueError):
            random_instance(seed=0, instance_id=0, d=4, dims=(5, 5, 5))
        with pytest.raises(ValueError):
            random_instance(seed=0, instance_id=0, d=4, dims=())

    def test_batch_helper(self):
        recs = random_instances(seed=9, count=3)
        assert [r.instance_id for r in recs] == [0, 1, 2]


class TestRandomStart:
    def test_deterministic_and_distinct(self):
        a = random_start(seed=3, start_id=0, dim=6)
        b = random_start(seed=3, start_id=0, dim=6)
        c = random_start(seed=3, start_id=1, dim=6)
        assert np.array_equal(a, b)
        assert not np.allclose(a, c)

    def test_start_does_not_collide_with_instance_stream(self):
        # same (seed, index) but different namespaces must differ
        start = random_start(seed=4, start_id=0, dim=30)
        basis = random_instance(seed=4, instance_id=0).subspaces[0].basis.reshape(-1)
        assert not np.allclose(start, basis)


class TestThreeLines:
    def test_projector_entries(self):
        theta = math.pi / 5
        p = line_projector(theta)
        c, s = math.cos(theta), math.sin(theta)
        assert np.allclose(p, [[c * c, s * c], [s * c, s * s]])

    def test_line_angles(self):
        theta = math.pi / 7
        u, v, w = three_lines(theta)
        assert np.allclose(u.projector, [[1.0, 0.0], [0.0, 0.0]])
        assert np.allclose(v.projector, line_projector(theta))
        assert np.allclose(w.projector, line_projector(2 * theta))
        assert (u.dim, v.dim, w.dim) == (1, 1, 1)

    def test_trivial_intersection(self):
        for theta in (0.3, math.pi / 4, 1.2):
            z = intersect_all(list(three_lines(theta)))
            assert z.dim == 0
            assert np.linalg.norm(z.projector) < 1e-10

    def test_angle_validation(self):
        with pytest.raises(ValueError):
            three_lines(0.0)
        with pytest.raises(ValueError):
            three_lines(math.pi / 2)

import numpy as np
import pytest

from twoview.errors import ZeroMass
from twoview.geometry import PointCloud, Projected2D, project_points
from twoview.moments import centroid2d, centroid3d, moment_map, second_moment
from conftest import random_cloud, random_spec


class TestCentroid2D:
    def test_midpoint(self):
        img = Projected2D([[0, 0], [2, 0]], [1.0, 1.0])
        np.testing.assert_array_equal(centroid2d(img).centroid, [1, 0])

    def test_weighted_mean(self):
        img = Projected2D([[0, 0], [3, 0]], [1.0, 2.0])
        np.testing.assert_array_equal(centroid2d(img).centroid, [2, 0])

    def test_arithmetic_mean_formula(self, rng):
        # unit weights reduce to the plain (1/N) sum of coordinates
        pos = rng.standard_normal((50, 2))
        img = Projected2D(pos, np.ones(50))
        expected = np.array([pos[:, 0].sum() / 50, pos[:, 1].sum() / 50])
        np.testing.assert_allclose(centroid2d(img).centroid, expected,
                                   atol=1e-14)

    def test_zero_mass(self):
        with pytest.raises(ZeroMass):
            centroid2d(Projected2D([[1, 1]], [0.0]))


class TestMomentMap:
    def test_single_point(self):
        cloud = PointCloud([[1.0, 2.0, 3.0]], [1.0])
        spec = random_spec(np.random.default_rng(0))
        from twoview.geometry import coordinate_spec
        mv = moment_map(cloud, coordinate_spec(2))
        np.testing.assert_array_equal(mv.centroid, [1, 2])

    def test_translation_equivariance(self, rng):
        cloud = random_cloud(rng, 30)
        spec = random_spec(rng)
        t = rng.standard_normal(3)
        a = moment_map(cloud.translated(t), spec).centroid
        b = moment_map(cloud, spec).centroid
        np.testing.assert_allclose(a - b, [t @ spec.u, t @ spec.w], atol=1e-12)

    def test_commutes_with_projection(self, rng):
        for _ in range(20):
            cloud = random_cloud(rng, 25)
            spec = random_spec(rng)
            lhs = moment_map(cloud, spec).centroid
            c3 = centroid3d(cloud)
            rhs = np.array([c3 @ spec.u, c3 @ spec.w])
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_scale_equivariance(self, rng):
        cloud = random_cloud(rng, 10)
        spec = random_spec(rng)
        scaled = PointCloud(4.0 * cloud.positions, cloud.weights)
        np.testing.assert_allclose(moment_map(scaled, spec).centroid,
                                   4.0 * moment_map(cloud, spec).centroid,
                                   atol=1e-12)

    def test_zero_mass(self):
        cloud = PointCloud([[1, 1, 1]], [0.0])
        with pytest.raises(ZeroMass):
            moment_map(cloud, random_spec(np.random.default_rng(0)))


class TestSecondMoment:
    def test_single_point(self):
        sm = second_moment(PointCloud([[5, 5, 5]], [2.0]))
        np.testing.assert_allclose(sm.matrix, np.zeros((3, 3)), atol=1e-15)

    def test_pair_on_axis(self):
        sm = second_moment(PointCloud([[1, 0, 0], [-1, 0, 0]], [1.0, 1.0]))
        np.testing.assert_allclose(sm.matrix, np.diag([1.0, 0, 0]), atol=1e-15)

    def test_brute_force_oracle(self, rng):
        cloud = random_cloud(rng, 12)
        c = cloud.weights @ cloud.positions / cloud.weights.sum()
        expected = np.zeros((3, 3))
        for p, w in zip(cloud.positions, cloud.weights):  # double loop oracle
            d = p - c
            for i in range(3):
                for j in range(3):
                    expected[i, j] += w * d[i] * d[j]
        expected /= cloud.weights.sum()
        np.testing.assert_allclose(second_moment(cloud).matrix, expected,
                                   atol=1e-12)

    def test_psd_and_symmetric(self, rng):
        sm = second_moment(random_cloud(rng, 40))
        np.testing.assert_allclose(sm.matrix, sm.matrix.T, atol=1e-12)
        assert np.linalg.eigvalsh(sm.matrix).min() >= -1e-10

import numpy as np
import pytest

from twoview import serialization as ser
from twoview.algebra import UNDEFINED, FiniteMagma
from twoview.diffgeo import ConnectionField, GridHeader, VectorFieldGrid
from twoview.errors import InputError
from twoview.geometry import PointCloud, Sinogram, VoxelGrid, coordinate_spec
from conftest import random_cloud, random_spec


class TestCloudAndSpec:
    def test_cloud_round_trip(self, rng, tmp_path):
        cloud = random_cloud(rng, 17)
        path = tmp_path / "cloud.json"
        ser.save_cloud(cloud, path)
        back = ser.load_cloud(path)
        np.testing.assert_array_equal(back.positions, cloud.positions)
        np.testing.assert_array_equal(back.weights, cloud.weights)

    def test_spec_round_trip(self, rng, tmp_path):
        spec = random_spec(rng)
        path = tmp_path / "spec.json"
        ser.save_spec(spec, path)
        back = ser.load_spec(path)
        np.testing.assert_array_equal(back.u, spec.u)
        np.testing.assert_array_equal(back.n, spec.n)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            ser.load_cloud(tmp_path / "absent.json")

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(InputError):
            ser.load_cloud(bad)

    def test_malformed_cloud(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"points": [{"p": [1, 2], "w": 1.0}]}')
        with pytest.raises(InputError):
            ser.load_cloud(bad)

    def test_deterministic_bytes(self, rng, tmp_path):
        cloud = random_cloud(rng, 5)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        ser.save_cloud(cloud, a)
        ser.save_cloud(cloud, b)
        assert a.read_bytes() == b.read_bytes()


class TestGrids:
    def test_voxels_round_trip(self, rng, tmp_path):
        grid = VoxelGrid((3, 4, 5), 0.25, (-1, 0, 2),
                         rng.uniform(0, 1, (3, 4, 5)))
        path = tmp_path / "grid.json"
        ser.save_voxels(grid, path)
        back = ser.load_voxels(path)
        assert back.dims == grid.dims
        np.testing.assert_array_equal(back.values, grid.values)
        np.testing.assert_array_equal(back.origin, grid.origin)

    def test_vector_field_round_trip(self, rng, tmp_path):
        header = GridHeader((3, 3, 4), 0.5, (0, 0, 0))
        field = VectorFieldGrid(header,
                                rng.standard_normal(header.dims + (3,)))
        path = tmp_path / "field.json"
        ser.save_vector_field(field, path)
        back = ser.load_vector_field(path)
        np.testing.assert_array_equal(back.samples, field.samples)
        assert back.header.matches(field.header)

    def test_connection_round_trip(self, rng, tmp_path):
        header = GridHeader((3, 3, 3), 0.1, (0, 0, 0))
        conn = ConnectionField(header,
                               rng.standard_normal(header.dims + (3, 3, 3)))
        path = tmp_path / "conn.json"
        ser.save_connection(conn, path)
        np.testing.assert_array_equal(ser.load_connection(path).gamma,
                                      conn.gamma)

    def test_sinogram_csv_round_trip(self, rng, tmp_path):
        sino = Sinogram(rng.uniform(0, 9, (4, 6)), 0.5, (0.0, 0.0))
        path = tmp_path / "sino.csv"
        ser.save_sinogram_csv(sino, path)
        back = ser.load_sinogram_csv(path, 0.5, (0.0, 0.0))
        np.testing.assert_array_equal(back.values, sino.values)

    def test_pgm_header(self, tmp_path):
        sino = Sinogram([[0.0, 1.0], [0.5, 0.25]], 1.0, (0.0, 0.0))
        path = tmp_path / "sino.pgm"
        ser.save_sinogram_pgm(sino, path)
        raw = path.read_bytes()
        assert raw.startswith(b"P5\n2 2\n65535\n")
        assert len(raw) == len(b"P5\n2 2\n65535\n") + 4 * 2


class TestMagmaCsv:
    def test_round_trip_with_undefined(self, tmp_path):
        table = np.array([[0, UNDEFINED], [1, 0]])
        path = tmp_path / "m.csv"
        ser.save_magma(FiniteMagma(table), path)
        back = ser.load_magma(path)
        np.testing.assert_array_equal(back.table, table)

    def test_ascii_dot_accepted(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0,.\n1,0\n")
        back = ser.load_magma(path)
        assert back.op(0, 1) == UNDEFINED

    def test_malformed(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0,x\n1,0\n")
        with pytest.raises(InputError):
            ser.load_magma(path)


class TestBundledFixtures:
    def test_all_load(self):
        from twoview.data import fixture_path
        cloud = ser.load_cloud(fixture_path("sample_cloud.json"))
        assert len(cloud) == 10
        s1 = ser.load_spec(fixture_path("spec_xy.json"))
        s2 = ser.load_spec(fixture_path("spec_yz.json"))
        assert abs(np.cross(s1.n, s2.n) @ np.cross(s1.n, s2.n) - 1) < 1e-12
        for name in ("field_contact_x", "field_coord_x", "field_coord_y",
                     "field_contact_y"):
            ser.load_vector_field(fixture_path(name + ".json"))
        conn = ser.load_connection(fixture_path("conn_flat.json"))
        assert np.all(conn.gamma == 0)
        magma = ser.load_magma(fixture_path("z4_table.csv"))
        assert magma.order == 4

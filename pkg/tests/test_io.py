"""JSON, CSV and VTK formats."""

from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mesovoids import io
from mesovoids.cloud import Ball, generate_cloud
from mesovoids.elastic import LameParams
from mesovoids.errors import GateError, GeometryError, InputError
from mesovoids.field import EvaluationGrid


class TestCloudFile:
    def test_round_trip(self, small_cloud, tmp_path):
        path = tmp_path / "c.json"
        io.save_cloud(small_cloud, path)
        assert io.load_cloud(path) == small_cloud

    @given(st.integers(0, 10**6), st.floats(0.3, 3.0))
    @settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    def test_round_trip_exact(self, tmp_path, seed, lam):
        cloud = generate_cloud(Ball((0.1, 0.2, 0.3), 1.7), 6, 0.15, 0.0123456789, seed, LameParams(lam, 1.1))
        path = tmp_path / "c.json"
        io.save_cloud(cloud, path)
        back = io.load_cloud(path)
        assert back == cloud
        assert back.centers.tobytes() == cloud.centers.tobytes()

    def test_schema(self, small_cloud):
        d = io.cloud_to_dict(small_cloud)
        assert set(d) == {"lame", "d", "region", "voids"}
        assert set(d["lame"]) == {"lambda", "mu"}
        assert set(d["voids"][0]) == {"center", "radius"}

    @pytest.mark.parametrize(
        "mutate,error,word",
        [
            (lambda d: d.pop("voids"), InputError, "voids"),
            (lambda d: d["voids"].append({"center": [0, 0], "radius": 0.01}), InputError, "center"),
            (lambda d: d["voids"].append(dict(d["voids"][0])), GeometryError, "separation"),
            (lambda d: d["voids"][0].update(center=[0.95, 0, 0]), GeometryError, "clearance"),
            (lambda d: d.update(voids=[{"center": [0, 0, 0], "radius": 0.1}]), GateError, "gate"),
            (lambda d: d["lame"].update(mu=-1), InputError, "mu"),
            (lambda d: d.update(d="x"), InputError, "d"),
        ],
    )
    def test_diagnostics(self, small_cloud, tmp_path, mutate, error, word):
        data = io.cloud_to_dict(small_cloud)
        mutate(data)
        path = tmp_path / "c.json"
        path.write_text(json.dumps(data))
        with pytest.raises(error, match=word):
            io.load_cloud(path)

    def test_unvalidated_load(self, small_cloud, tmp_path):
        data = io.cloud_to_dict(small_cloud)
        data["voids"][0]["radius"] = 0.1
        path = tmp_path / "c.json"
        path.write_text(json.dumps(data))
        assert io.load_cloud(path, validate=False).voids[0].radius == 0.1

    def test_corrupt(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        with pytest.raises(InputError, match="JSON"):
            io.load_cloud(path)
        with pytest.raises(InputError):
            io.load_cloud(tmp_path / "missing.json")


class TestOtherFiles:
    def test_background_round_trip(self, background, params, tmp_path):
        path = tmp_path / "b.json"
        io.save_background(background, path)
        assert io.load_background(path, params) == background

    def test_background_normalizes(self, params):
        bg = io.background_from_dict({"pairs": [{"y0": [3, 0, 0], "axis": [0, 0, 2], "gap": 1, "magnitude": 1}]}, params)
        assert bg.pairs[0].axis == (0.0, 0.0, 1.0)

    def test_background_bad(self, params):
        with pytest.raises(InputError):
            io.background_from_dict({"pairs": [{"y0": [3, 0, 0], "gap": 1, "magnitude": 1}]}, params)
        with pytest.raises(InputError):
            io.background_from_dict([], params)

    def test_coefficients(self, tmp_path, rng):
        c = rng.normal(size=18)
        path = tmp_path / "k.json"
        io.save_coefficients(c, path, "dense")
        np.testing.assert_array_equal(io.load_coefficients(path), c)
        path.write_text('{"coefficients": [[1, 2, 3]]}')
        with pytest.raises(InputError):
            io.load_coefficients(path)

    def test_grid(self):
        g = io.grid_from_dict({"origin": [0, 0, 0], "spacing": [1, 1, 0.5], "counts": [2, 1, 3]})
        assert len(g) == 6
        e = io.grid_from_dict({"points": [[1, 2, 3], [4, 5, 6]]})
        np.testing.assert_array_equal(e.points, [[1, 2, 3], [4, 5, 6]])
        with pytest.raises(InputError):
            io.grid_from_dict({"origin": [0, 0, 0], "spacing": 1})
        with pytest.raises(InputError):
            io.grid_from_dict({"origin": [0, 0, 0], "spacing": 1, "counts": 2.5})

    def test_report_nan_becomes_null(self, tmp_path):
        io.save_json({"a": float("nan"), "b": [np.float64(1.5)]}, tmp_path / "r.json")
        assert json.loads((tmp_path / "r.json").read_text()) == {"a": None, "b": [1.5]}


class TestFieldOutput:
    def test_csv(self, tmp_path):
        pts = np.array([[0.1, 0.2, 0.3], [1.0, 2.0, 3.0]])
        u = np.array([[1 / 3, -2e-20, 5.0], [np.nan] * 3])
        codes = np.array([0, 4])
        path = tmp_path / "f.csv"
        io.write_field(path, pts, u, codes)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,z,ux,uy,uz,status"
        assert lines[2] == "1.0,2.0,3.0,,,,4"
        p2, u2, c2 = io.read_csv(path)
        np.testing.assert_array_equal(p2, pts)
        assert u2[0].tobytes() == u[0].tobytes()
        assert np.isnan(u2[1]).all() and list(c2) == [0, 4]

    def test_vtk(self, tmp_path):
        g = EvaluationGrid.lattice((0, 0, 0), 1.0, 2)
        u = np.ones((8, 3))
        codes = np.zeros(8, dtype=int)
        codes[3] = -1
        path = tmp_path / "f.vtk"
        io.write_field(path, g.points, u, codes, "vtk")
        text = path.read_text().splitlines()
        assert text[3] == "DATASET POLYDATA" and text[4] == "POINTS 8 double"
        i = text.index("VECTORS displacement double")
        assert text[i + 4] == "0.0 0.0 0.0"
        assert text[i + 1] == "1.0 1.0 1.0"

    def test_unknown_format(self, tmp_path):
        with pytest.raises(InputError):
            io.write_field(tmp_path / "x", np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0, dtype=int), "xml")

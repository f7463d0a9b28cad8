import json

import numpy as np

from nlbeltrami import PathGamma, build_field, build_flow, make_grid, sample_map
from nlbeltrami.io import (dumps, read_field, read_flow, read_table, write_field, write_flow,
                           write_json, write_table)
from nlbeltrami.structures import segment_distance_structure


def test_field_round_trip(tmp_path):
    g = make_grid(0.5 - 1j, 2.0, 16)
    f = sample_map(lambda z: np.exp(z) / 3 + np.conj(z) ** 2, g, "sample")
    write_field(tmp_path / "f", f, {"note": "x"})
    back = read_field(tmp_path / "f")
    assert back.grid == g and back.label == "sample"
    assert np.array_equal(back.values, f.values)  # %.17g is lossless
    header = json.loads((tmp_path / "f.json").read_text())
    assert header["extra"] == {"note": "x"}


def test_csv_bodies_are_deterministic(tmp_path):
    g = make_grid(0, 1.0, 8)
    f = sample_map(lambda z: z**3 - 1j, g)
    write_field(tmp_path / "a", f)
    write_field(tmp_path / "b", f)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    first = (tmp_path / "a.csv").read_text().splitlines()[0]
    assert first == "z_re,z_im,v_re,v_im"


def test_table_round_trip(tmp_path):
    table = build_field(2.0, 0.1, m=9)
    write_table(tmp_path / "t", table)
    back = read_table(tmp_path / "t")
    assert np.array_equal(back.enumeration, table.enumeration)
    assert np.array_equal(back.values, table.values)
    assert back.k0 == table.k0 and back.w_grid == table.w_grid and back.z == table.z


def test_flow_round_trip(tmp_path):
    grid = make_grid(0, 4.0, 16)
    flow = build_flow(segment_distance_structure(0.5, 4.0),
                      PathGamma.from_function(lambda s: s + 0.3j * s * (1 - s), m=11),
                      [0.0, 0.5, 1.0], grid)
    write_flow(tmp_path / "flow", flow)
    back = read_flow(tmp_path / "flow")
    assert back.times == flow.times
    for a, b in zip(back.psi, flow.psi):
        assert np.array_equal(a.values, b.values)
    assert back.gamma == flow.gamma


def test_json_encoder_handles_complex_and_numpy(tmp_path):
    obj = {"z": 1 + 2j, "arr": np.array([1.0, 2.0]), "c": np.complex128(3j), "i": np.int64(4)}
    data = json.loads(dumps(obj))
    assert data == {"z": {"re": 1.0, "im": 2.0}, "arr": [1.0, 2.0],
                    "c": {"re": 0.0, "im": 3.0}, "i": 4}
    path = write_json(tmp_path / "deep" / "x.json", obj)
    assert path.exists()

"""JSON-header plus CSV-body serialization of fields, tables and flows."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fields import GridSpec, SampledField
from .kirszbraun import TabulatedField, WGrid


def _default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return obj.item() if not np.iscomplexobj(obj) else _default(complex(obj))
    if isinstance(obj, np.ndarray):
        return obj.tolist() if not np.iscomplexobj(obj) else [_default(complex(x)) for x in obj.ravel()]
    if isinstance(obj, (set, tuple)):
        return list(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, default=_default, indent=2, sort_keys=True, allow_nan=True)


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n")
    return path


def _write_csv(path, columns, names):
    data = np.column_stack(columns)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def write_field(prefix, field: SampledField, extra: dict | None = None):
    """Write ``prefix.json`` (header) and ``prefix.csv`` (row-major lattice samples)."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    header = {"label": field.label, **field.grid.to_header()}
    if extra:
        header["extra"] = extra
    write_json(prefix.with_suffix(".json"), header)
    z = field.grid.lattice().ravel()
    v = field.values.ravel()
    _write_csv(prefix.with_suffix(".csv"), [z.real, z.imag, v.real, v.imag],
               ["z_re", "z_im", "v_re", "v_im"])
    return prefix


def _read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def read_field(prefix) -> SampledField:
    prefix = Path(prefix)
    header = json.loads(prefix.with_suffix(".json").read_text())
    grid = GridSpec(complex(header["center_re"], header["center_im"]), header["R"], header["n"])
    data = _read_csv(prefix.with_suffix(".csv"))
    values = (data[:, 2] + 1j * data[:, 3]).reshape(grid.shape)
    return SampledField(grid, values, header["label"])


def write_table(prefix, table: TabulatedField):
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    header = {"z_re": table.z.real, "z_im": table.z.imag, "t": table.t, "k0": table.k0,
              "w_grid": table.w_grid.to_header() if table.w_grid else None,
              "n_anchors": table.n_anchors, "max_s0": table.max_s0}
    write_json(prefix.with_suffix(".json"), header)
    w, a = np.asarray(table.enumeration), np.asarray(table.values)
    _write_csv(prefix.with_suffix(".csv"), [w.real, w.imag, a.real, a.imag],
               ["w_re", "w_im", "H_re", "H_im"])
    return prefix


def read_table(prefix) -> TabulatedField:
    prefix = Path(prefix)
    header = json.loads(prefix.with_suffix(".json").read_text())
    data = _read_csv(prefix.with_suffix(".csv"))
    wg = header.get("w_grid")
    w_grid = WGrid(wg["radius"], wg["m"], complex(wg["center_re"], wg["center_im"])) if wg else None
    return TabulatedField(complex(header["z_re"], header["z_im"]), header["t"],
                          data[:, 0] + 1j * data[:, 1], data[:, 2] + 1j * data[:, 3],
                          header["k0"], w_grid, header.get("max_s0", 0.0),
                          header.get("n_anchors", 3))


def write_flow(directory, flow, extra: dict | None = None):
    """Per-time ``psi_XXX`` / ``eta_XXX`` field files and a ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for i, (t, psi, eta) in enumerate(zip(flow.times, flow.psi, flow.eta)):
        write_field(directory / f"psi_{i:03d}", psi, {"t": t})
        write_field(directory / f"eta_{i:03d}", eta, {"t": t})
        files.append({"t": t, "psi": f"psi_{i:03d}", "eta": f"eta_{i:03d}"})
    manifest = {
        "times": flow.times,
        "gamma": [{"t": t, "re": g.real, "im": g.imag} for t, g in flow.gamma.samples],
        "residuals": flow.residuals,
        "sup_norms": flow.sup_norms,
        "iterations": flow.iterations,
        "files": files,
    }
    if extra:
        manifest.update(extra)
    write_json(directory / "manifest.json", manifest)
    return directory


def read_flow(directory):
    from .solvers import FlowFamily, PathGamma

    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    psi = [read_field(directory / f["psi"]) for f in manifest["files"]]
    eta = [read_field(directory / f["eta"]) for f in manifest["files"]]
    gamma = PathGamma(tuple((g["t"], complex(g["re"], g["im"])) for g in manifest["gamma"]))
    return FlowFamily(manifest["times"], psi, eta, gamma, manifest["residuals"],
                      manifest["sup_norms"], manifest.get("iterations", []))

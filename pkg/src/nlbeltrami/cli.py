"""Command-line entry point: ``nlbeltrami <command> [options]``.

Every command writes ``manifest.json`` (config, version, runtime, results)
plus CSV data files into ``--out``.  A config may also be given as one JSON
file via ``--config``; explicit flags override its entries.

Exit status: 0 all checks passed, 1 a check failed, 2 usage or precondition
error (a JSON error record goes to stderr and, if possible, ``error.json``).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .derivatives import distortion, wirtinger
from .errors import BeltramiError, NoConvergence
from .exact import (K_DIFF, SQRT2, ExactMapId, MapKind, composed_bound, eval_exact, exact_pair,
                    invert_exact, parse_map, sample_exact, theoretical_distortions)
from .fields import annulus, make_grid, sample_map
from .io import _write_csv, write_field, write_flow, write_json, write_table
from .kirszbraun import build_field, counterexample_k0, lipschitz_audit
from .solvers import (PathGamma, affine_fixed_point, affine_solution, build_flow,
                      change_of_variables, residual, solve_inhomogeneous,
                      truncation_sensitivity)
from .structures import (ClosedFormBeltrami, KirszbraunBeltrami, imaginary_part_structure,
                         segment_distance_structure, windowed_linear, zero_structure)
from .topology import (check_flow_conditions, growth_exponent, modulus_crossing, modulus_ratio,
                       winding_number)

COMMANDS = ("counterexample", "distortion", "solve", "change-vars", "affine", "diagnose",
            "verify-all")
STRUCTURES = ("windowed-linear", "segment-distance", "imaginary-part", "zero")
PIPELINES = ("winding", "crossing", "growth", "flow-check")


class UsageError(BeltramiError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    map: str = "f_t"
    t: float = 0.1
    k: float = 0.25
    K: float = 2.0
    a: complex = 1.0
    b: complex = 0.0
    c: float = 1.0
    R: float = 8.0
    n: int = 256
    tol: float = 1e-10
    max_iter: int = 500
    radii: list = field(default_factory=lambda: [1e1, 1e2, 1e3, 1e4])
    m: int = 1024
    eps: float = 0.5
    delta: float = 0.15
    out: str = "out"
    seed: int = 0
    structure: str = "windowed-linear"
    gamma: complex = 1.0
    flow: bool = False
    truncation: bool = False
    times: int = 11
    w_m: int = 41
    samples: int = 100
    pipeline: str = "winding"
    expect: float | None = None
    rel_tol: float = 0.02
    checks: list | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if not 0 < self.t < 1:
            raise UsageError(f"t must lie in (0, 1), got {self.t}")
        if not 0 <= self.k < 1:
            raise UsageError(f"k must lie in [0, 1), got {self.k}")
        if not self.R > 0 or self.n < 8 or self.n % 2:
            raise UsageError("grid needs R > 0 and an even n >= 8")
        if not self.tol > 0 or self.max_iter < 1:
            raise UsageError("solver needs tol > 0 and max_iter >= 1")
        if self.m < 64:
            raise UsageError("diagnostics need m >= 64 circle samples")
        if self.structure not in STRUCTURES:
            raise UsageError(f"unknown structure {self.structure!r}")
        if self.pipeline not in PIPELINES:
            raise UsageError(f"unknown pipeline {self.pipeline!r}")
        if self.times < 2 or self.w_m < 2 or self.samples < 1:
            raise UsageError("times, w_m and samples must be positive (times, w_m >= 2)")
        return self

    def to_json(self) -> dict:
        d = asdict(self)
        for key in ("a", "b", "gamma"):
            v = complex(d[key])
            d[key] = v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
        return d


def _complex(text) -> complex:
    if isinstance(text, dict):
        return complex(text.get("re", 0.0), text.get("im", 0.0))
    if isinstance(text, (int, float, complex)):
        return complex(text)
    return complex(str(text).replace(" ", "").replace("i", "j"))


def _float_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _map_spec(text: str, cfg: RunConfig) -> str:
    """Accept ``f_t`` or ``name=f_t,t=0.2``; parameters inside the spec update ``cfg``."""
    if "=" not in text:
        return text
    name = None
    for part in text.split(","):
        key, _, val = part.partition("=")
        key = key.strip()
        if key == "name":
            name = val.strip()
        elif key in ("t", "K", "c"):
            setattr(cfg, key, float(val))
        elif key in ("a", "b"):
            setattr(cfg, key, _complex(val))
        else:
            raise UsageError(f"unknown map parameter {key!r}")
    if name is None:
        raise UsageError("map spec needs name=...")
    return name


_CASTS = {"a": _complex, "b": _complex, "gamma": _complex, "radii": _float_list,
          "checks": lambda v: [int(x) for x in _float_list(v)]}


def _coerce(cfg: RunConfig, key: str, value):
    names = {f.name: f for f in fields(RunConfig)}
    if key not in names:
        raise UsageError(f"unknown config key {key!r}")
    if key in _CASTS and value is not None:
        value = _CASTS[key](value)
    elif key in ("n", "max_iter", "m", "seed", "times", "w_m", "samples"):
        value = int(value)
    elif key in ("t", "k", "K", "c", "R", "tol", "eps", "delta", "rel_tol") or (
            key == "expect" and value is not None):
        value = float(value)
    elif key == "flow":
        value = bool(value)
    setattr(cfg, key, value)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlbeltrami", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="JSON file with RunConfig fields (flags override it)")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    s = argparse.SUPPRESS
    p.add_argument("--map", default=s, help="map name or spec, e.g. 'name=f_t,t=0.1'")
    for name in ("t", "k", "K", "c", "R", "tol", "eps", "delta", "rel-tol", "expect"):
        p.add_argument(f"--{name}", type=float, default=s)
    for name in ("n", "max-iter", "m", "seed", "times", "w-m", "samples"):
        p.add_argument(f"--{name}", type=int, default=s)
    p.add_argument("--a", type=_complex, default=s)
    p.add_argument("--b", type=_complex, default=s)
    p.add_argument("--gamma", type=_complex, default=s, help="gamma value for a single solve")
    p.add_argument("--radii", type=_float_list, default=s, help="comma-separated radii")
    p.add_argument("--structure", choices=STRUCTURES, default=s)
    p.add_argument("--pipeline", choices=PIPELINES, default=s)
    p.add_argument("--flow", action="store_true", default=s, help="solve: build the whole flow")
    p.add_argument("--truncation", action="store_true", default=s,
                   help="solve: also compare against a solve on twice the box")
    p.add_argument("--checks", default=s, help="verify-all: comma-separated criterion numbers")
    p.add_argument("--out", default=s, help="output directory")
    return p


def parse_config(argv=None) -> RunConfig:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            raise UsageError("invalid command line") from None
        raise
    cfg = RunConfig()
    if ns.config:
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        for key, value in data.items():
            _coerce(cfg, key, value)
    for key, value in vars(ns).items():
        if key in ("config", "command"):
            continue
        _coerce(cfg, key, value)
    if ns.command:
        cfg.command = ns.command
    cfg.map = _map_spec(cfg.map, cfg)
    return cfg.validate()


# --- commands -----------------------------------------------------------------

def _structure(cfg: RunConfig):
    if cfg.structure == "windowed-linear":
        return windowed_linear(cfg.k, cfg.R)
    if cfg.structure == "segment-distance":
        return segment_distance_structure(cfg.k, cfg.R)
    if cfg.structure == "imaginary-part":
        return imaginary_part_structure(cfg.k, cfg.R)
    return zero_structure()


def _named_map(cfg: RunConfig):
    """Callable, label and, when the map is exact, its identifier."""
    if cfg.map in ("f_t-g_t", "diff"):
        f = ExactMapId(MapKind.f_t, t=cfg.t)
        g = ExactMapId(MapKind.g_t, t=cfg.t)
        return (lambda z: eval_exact(f, z) - eval_exact(g, z)), "f_t-g_t", None
    if cfg.map == "Phi":
        f = ExactMapId(MapKind.f_t, t=cfg.t)
        g = ExactMapId(MapKind.g_t, t=cfg.t)
        return (lambda u: eval_exact(g, invert_exact(f, u))), "g_t o f_t^-1", None
    try:
        ident = parse_map(cfg.map, t=cfg.t, K=cfg.K, a=cfg.a, b=cfg.b, c=cfg.c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return (lambda z: eval_exact(ident, z)), ident.label, ident


def _counterexample(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    t = cfg.t
    grid = make_grid(0, cfg.R, cfg.n)
    f = ExactMapId(MapKind.f_t, t=t)
    g = ExactMapId(MapKind.g_t, t=t)
    k_audit = max(theoretical_distortions(t).k_f, theoretical_distortions(t).k_g) + 1e-9
    step = max(1, cfg.n // 4)
    zs = grid.lattice()[step // 2::step, step // 2::step].ravel().tolist() + [1.0 + 0j, 2.0 + 0j]
    audits = []
    for i, z in enumerate(zs):
        table = build_field(z, t, counterexample_k0(t), m=cfg.w_m)
        ratio, _ = lipschitz_audit(table)
        write_table(out / f"table_{i:03d}", table)
        audits.append({"z": complex(z), "max_ratio": ratio, "max_s0": table.max_s0,
                       "points": len(table.values)})
    H = KirszbraunBeltrami(t)
    fs, gs = sample_exact(f, grid), sample_exact(g, grid)
    res_f = residual(H, fs, exact_pair(f, grid))
    res_g = residual(H, gs, exact_pair(g, grid))
    write_field(out / "f_t", fs)
    write_field(out / "g_t", gs)
    sep = (fs - gs).sup()
    worst = max(a["max_ratio"] for a in audits)
    passed = worst <= k_audit and res_f.sup <= 1e-9 and res_g.sup <= 1e-9 and sep > 0.01
    return {"audit": audits, "audit_max_ratio": worst, "k_audit": k_audit,
            "residual_f_sup": res_f.sup, "residual_g_sup": res_g.sup, "sup_f_minus_g": sep}, passed


def _distortion(cfg: RunConfig, out: Path):
    fn, label, _ = _named_map(cfg)
    grid = make_grid(0, cfg.R, cfg.n)
    field_ = sample_map(fn, grid, label)
    dist = distortion(wirtinger(field_), annulus(1.0, cfg.R))
    write_field(out / "k", field_.with_values(np.nan_to_num(dist.k_field)), {"map": label})
    refs = theoretical_distortions(cfg.t)
    ref = {"f_t": refs.k_f, "g_t": refs.k_g, "f_t-g_t": K_DIFF, "diff": K_DIFF}.get(cfg.map)
    result = {"map": label, "sup_k": dist.sup_k, "sup_K": dist.sup_K, "reference_k": ref}
    passed = True
    if ref is not None:
        rel = abs(dist.sup_k - ref) / ref
        result["rel_err"] = rel
        passed = rel <= cfg.rel_tol
    return result, passed


def _solve(cfg: RunConfig, out: Path):
    H = _structure(cfg)
    grid = make_grid(0, cfg.R, cfg.n)
    if cfg.flow:
        times = np.linspace(0, 1, cfg.times).tolist()
        flow = build_flow(H, PathGamma.segment(), times, grid, cfg.tol, cfg.max_iter)
        write_flow(out / "flow", flow)
        return {"structure": H.describe(), "residuals": flow.residuals,
                "iterations": flow.iterations}, max(flow.residuals) <= max(1e-9, 10 * cfg.tol)
    sol = solve_inhomogeneous(H, cfg.gamma, grid, cfg.tol, cfg.max_iter)
    write_field(out / "eta", sol.eta)
    write_field(out / "omega", sol.omega)
    _write_csv(out / "differences.csv", [np.arange(1, len(sol.differences) + 1),
                                         np.asarray(sol.differences)], ["iter", "l2_diff"])
    result = {"structure": H.describe(), "iterations": sol.iterations, "residual_l2": sol.residual,
            "ratios": sol.ratios, "mean_mode": sol.mean_mode, "lp_norms_d_eta": sol.lp_norms()}
    if cfg.truncation:
        result["truncation"] = truncation_sensitivity(H, cfg.gamma, cfg.R, cfg.n, cfg.tol,
                                                      cfg.max_iter).to_dict()
    return result, sol.residual <= max(1e-9, 10 * cfg.tol)


def _change_vars(cfg: RunConfig, out: Path):
    rng = np.random.default_rng(cfg.seed)
    f = ExactMapId(MapKind.f_t, t=cfg.t)
    H = KirszbraunBeltrami(cfg.t)
    bound = composed_bound(H.k_bound)
    rows, worst_anchor, worst_ratio = [], 0.0, 0.0
    us = rng.uniform(-cfg.R, cfg.R, cfg.samples) + 1j * rng.uniform(-cfg.R, cfg.R, cfg.samples)
    for u in us:
        z = complex(invert_exact(f, u))
        for w in (0.0, 1.0):
            q = change_of_variables(H, f, u, w, z=z)
            worst_anchor = max(worst_anchor, abs(q))
            rows.append((u, w, q))
        w1, w2 = (3 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) for _ in range(2))
        q1 = change_of_variables(H, f, u, w1, z=z)
        q2 = change_of_variables(H, f, u, w2, z=z)
        rows += [(u, w1, q1), (u, w2, q2)]
        worst_ratio = max(worst_ratio, abs(q1 - q2) / abs(w1 - w2))
    u, w, q = (np.array([r[i] for r in rows], dtype=complex) for i in range(3))
    _write_csv(out / "transported.csv", [u.real, u.imag, w.real, w.imag, q.real, q.imag],
               ["u_re", "u_im", "w_re", "w_im", "Ht_re", "Ht_im"])
    passed = worst_anchor <= 1e-10 and worst_ratio <= bound + 0.01
    return {"max_abs_anchor": worst_anchor, "max_ratio": worst_ratio, "bound": bound,
            "k0": H.k_bound}, passed


def _affine(cfg: RunConfig, out: Path):
    k = cfg.k
    H = ClosedFormBeltrami(lambda z, w: k * w, k, name=f"{k:g}*w", z_independent=True)
    a = affine_fixed_point(H, tol=min(cfg.tol, 1e-15))
    sol = affine_solution(H, a)
    grid = make_grid(0, cfg.R, cfg.n)
    samples = sample_exact(sol, grid)
    res = residual(H, samples)
    write_field(out / "affine", samples)
    f1 = complex(eval_exact(sol, 1.0))
    scale = samples.sup()
    passed = abs(a - 1 / (1 + k)) <= 1e-12 and res.sup <= 1e-13 * scale / grid.h
    return {"a": a, "b": sol.b, "expected_a": 1 / (1 + k), "f(1)": f1, "f(0)": complex(eval_exact(sol, 0.0)),
            "residual_sup": res.sup}, passed


def _diagnose(cfg: RunConfig, out: Path):
    if cfg.pipeline == "flow-check":
        grid = make_grid(0, cfg.R, cfg.n)
        H = segment_distance_structure(cfg.k if cfg.k > 0 else 0.5, cfg.R)
        times = np.linspace(0, 1, cfg.times).tolist()
        flow = build_flow(H, PathGamma.segment(), times, grid, cfg.tol, cfg.max_iter)
        identity = sample_map(lambda z: z, grid, "id")
        report = check_flow_conditions(flow, identity, cfg.eps, [0.5 * cfg.R, 0.75 * cfg.R],
                                       cfg.delta, tol=max(10 * cfg.tol, 1e-12))
        return {"pipeline": "flow-check", **report.to_dict()}, report.f1_ok and report.f4_ok
    fn, label, _ = _named_map(cfg)
    if cfg.pipeline == "winding":
        rows = []
        for R in cfg.radii:
            total, w, m = winding_number(fn, R, cfg.m)
            rows.append({"R": R, "winding": w, "increment": total, "m": m})
        _write_csv(out / "winding.csv", [[r["R"] for r in rows], [r["winding"] for r in rows],
                                         [r["increment"] for r in rows]], ["R", "winding", "increment"])
        passed = cfg.expect is None or all(r["winding"] == int(cfg.expect) for r in rows)
        return {"pipeline": "winding", "map": label, "results": rows}, passed
    if cfg.pipeline == "crossing":
        rows = [{"R": R, "theta": modulus_crossing(fn, R, cfg.m),
                 "modulus_ratio": modulus_ratio(fn, R, cfg.m)} for R in cfg.radii]
        return {"pipeline": "crossing", "map": label, "results": rows}, all(
            r["theta"] is not None for r in rows)
    fit = growth_exponent(fn, cfg.radii, cfg.m)
    _write_csv(out / "growth.csv", [np.log(fit.radii), np.asarray(fit.log_max)], ["log_R", "log_max"])
    expect = cfg.expect if cfg.expect is not None else (SQRT2 if label == "f_t-g_t" else None)
    passed = expect is None or abs(fit.alpha - expect) <= 0.01 * abs(expect)
    return {"pipeline": "growth", "map": label, "alpha": fit.alpha, "expected": expect,
            "fit_residual": fit.residual, "local_slopes": fit.local_slopes}, passed


def _verify_all(cfg: RunConfig, out: Path):
    from .verify import CHECKS, run_check

    selected = CHECKS if not cfg.checks else [CHECKS[i - 1] for i in cfg.checks]
    results = []
    for fn in selected:
        check = run_check(fn)
        print(check.line(), flush=True)
        results.append({"number": check.number, "name": check.name, "passed": check.passed,
                        "seconds": check.seconds, "measured": check.measured})
    return {"checks": results}, all(r["passed"] for r in results)


HANDLERS = {"counterexample": _counterexample, "distortion": _distortion, "solve": _solve,
            "change-vars": _change_vars, "affine": _affine, "diagnose": _diagnose,
            "verify-all": _verify_all}


def execute(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"output directory {out} is not writable: {exc}") from None
    start = time.perf_counter()
    status = "ok"
    try:
        result, passed = HANDLERS[cfg.command](cfg, out)
    except NoConvergence as exc:
        result, passed, status = {"error": type(exc).__name__, "message": str(exc),
                                  "iterations": exc.iterations}, False, "no_convergence"
    manifest = {"command": cfg.command, "config": cfg.to_json(), "version": __version__,
                "runtime_seconds": time.perf_counter() - start, "passed": passed,
                "status": status, "result": result}
    write_json(out / "manifest.json", manifest)
    return 0 if passed else 1


def _error(exc: Exception, out: str | None):
    record = {"error": type(exc).__name__, "message": str(exc), "version": __version__}
    print(json.dumps(record), file=sys.stderr)
    if out:
        try:
            write_json(Path(out) / "error.json", record)
        except OSError:
            pass


def main(argv=None) -> int:
    cfg = None
    try:
        cfg = parse_config(argv)
        if not cfg.command:
            raise UsageError("no command given")
        return execute(cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (BeltramiError, ValueError) as exc:
        _error(exc, cfg.out if cfg else None)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: run, converge, spectrum, bench and scenarios.

Configs are JSON objects; every key is validated before anything is
allocated and unknown keys are rejected.  Exit codes: 0 ok, 1 runtime
failure, 2 config error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis, driver, scenarios
from .materials import random_spd
from .mesh import MeshError
from .reference_element import build_reference_element
from .timestepping import DivergenceError
from .wadg import apply_dense, apply_wadg_inverse_matrix, wadg_dense_matrix


class ConfigError(ValueError):
    pass


_num = (int, float)
_opt_num = (int, float, type(None))
_opt_int = (int, type(None))
_opt_bool = (bool, type(None))

# key -> (allowed types, default)
COMMON = {
    "scenario": (str, "harmonic_oscillation"),
    "scenario_args": (dict, {}),
    "flux": (str, "penalty"),
    "tau_v": (_opt_num, None),
    "tau_sigma": (_opt_num, None),
    "gamma_v": (_num, 1.0),
    "gamma_sigma": (_num, 1.0),
    "cfl": (_num, 1.0),
    "dt": (_opt_num, None),
    "t_final": (_opt_num, None),
    "quad_degree": (_opt_int, None),
    "curvilinear": (_opt_bool, None),
    "form": (str, "auto"),
    "seed": (int, 0),
    "threads": (int, 1),
}
SCHEMAS = {
    "run": {**COMMON,
            "N": (int, 3), "h": (_opt_num, 0.125), "nx": (_opt_int, None), "ny": (_opt_int, None),
            "energy_every": (int, 10), "snapshot_every": (int, 0), "snapshot_grid": (list, None)},
    "converge": {**COMMON,
                 "N_list": (list, [1, 2, 3]), "h_list": (list, [0.5, 0.25, 0.125]),
                 "error_tol": (_num, 0.1), "rate_tol": (_num, 0.3)},
    "spectrum": {**COMMON,
                 "N": (int, 4), "h": (_opt_num, 0.25), "nx": (_opt_int, None), "ny": (_opt_int, None),
                 "max_dof": (int, 6000)},
    "bench": {"N_list": (list, [1, 2, 3, 4, 5, 6, 7]), "elements": (int, 512),
              "repeats": (int, 5), "seed": (int, 0), "threads": (int, 1)},
}


def load_config(command: str, path: str | None, overrides: dict | None = None) -> dict:
    raw: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    raw.update(overrides or {})
    return validate_config(command, raw)


def validate_config(command: str, raw: dict) -> dict:
    schema = SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys for {command!r}: {', '.join(unknown)}")
    cfg = {}
    for key, (types, default) in schema.items():
        val = raw.get(key, default)
        if isinstance(val, bool) and types in (int, _num, _opt_num, _opt_int):
            raise ConfigError(f"{key}: expected a number, got a boolean")
        if not isinstance(val, types if types is not None else object):
            if not (types is list and val is None):
                raise ConfigError(f"{key}: unexpected value {val!r}")
        cfg[key] = val

    def positive(key):
        if cfg.get(key) is not None and not cfg[key] > 0:
            raise ConfigError(f"{key} must be positive")

    for key in ("cfl", "dt", "h", "gamma_v", "gamma_sigma", "error_tol", "rate_tol"):
        positive(key)
    for key in ("tau_v", "tau_sigma", "t_final"):
        if cfg.get(key) is not None and cfg[key] < 0:
            raise ConfigError(f"{key} must be nonnegative")
    if cfg["threads"] < 1:
        raise ConfigError("threads must be at least 1")
    if command != "bench":
        if cfg["scenario"] not in scenarios.REGISTRY:
            raise ConfigError(f"unknown scenario {cfg['scenario']!r}; choose from {sorted(scenarios.REGISTRY)}")
        if cfg["flux"] not in ("central", "penalty", "scaled"):
            raise ConfigError(f"flux must be central, penalty or scaled, not {cfg['flux']!r}")
        if cfg["form"] not in ("auto", "strong", "skew"):
            raise ConfigError(f"form must be auto, strong or skew, not {cfg['form']!r}")
    Ns = cfg.get("N_list", [cfg["N"]] if "N" in cfg else [])
    for N in Ns:
        if isinstance(N, bool) or not isinstance(N, int) or not 1 <= N <= 7:
            raise ConfigError(f"polynomial degree must be an integer in 1..7, got {N!r}")
    if "h_list" in cfg:
        if not cfg["h_list"] or not all(isinstance(h, _num) and not isinstance(h, bool) and h > 0
                                        for h in cfg["h_list"]):
            raise ConfigError("h_list must be a nonempty list of positive numbers")
    if "nx" in cfg:
        if (cfg["nx"] is None) != (cfg["ny"] is None):
            raise ConfigError("give both nx and ny or neither")
        if cfg["nx"] is not None and (cfg["nx"] < 1 or cfg["ny"] < 1):
            raise ConfigError("nx and ny must be at least 1")
        if cfg["nx"] is None and cfg["h"] is None:
            raise ConfigError("give h or nx/ny")
    if command == "run":
        if cfg["energy_every"] < 1:
            raise ConfigError("energy_every must be at least 1")
        if cfg["snapshot_every"] < 0:
            raise ConfigError("snapshot_every must be nonnegative")
        grid = cfg["snapshot_grid"]
        if grid is not None and (len(grid) != 2 or not all(isinstance(g, int) and g >= 2 for g in grid)):
            raise ConfigError("snapshot_grid must be two integers >= 2")
    if command == "bench" and (cfg["elements"] < 1 or cfg["repeats"] < 1):
        raise ConfigError("elements and repeats must be at least 1")
    if command == "spectrum" and cfg["max_dof"] < 1:
        raise ConfigError("max_dof must be at least 1")
    return cfg


# ---------------------------------------------------------------------------
# CSV helpers

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, cfg: dict, columns, rows, footer=()) -> None:
    with open(path, "w") as f:
        f.write("# config: " + json.dumps(cfg, sort_keys=True) + "\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) for v in row) + "\n")
        for line in footer:
            f.write("# " + line + "\n")


class Log:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, msg: str) -> None:
        if not self.quiet:
            print(msg, flush=True)


# ---------------------------------------------------------------------------
# commands

def _scenario(cfg):
    try:
        return scenarios.get(cfg["scenario"], **cfg["scenario_args"])
    except TypeError as e:
        raise ConfigError(f"scenario_args: {e}") from None


def _tau(cfg, sc):
    if cfg["tau_v"] is None and cfg["tau_sigma"] is None:
        return None
    tv = sc.flux[0] if cfg["tau_v"] is None else cfg["tau_v"]
    ts = sc.flux[1] if cfg["tau_sigma"] is None else cfg["tau_sigma"]
    return (tv, ts)


def _setup(cfg, sc, N, h=None, nx=None, ny=None):
    return driver.setup(sc, N, h=None if nx is not None else h, nx=nx, ny=ny, flux=cfg["flux"],
                        tau=_tau(cfg, sc), gamma=(cfg["gamma_v"], cfg["gamma_sigma"]),
                        quad_degree=cfg["quad_degree"], form=cfg["form"],
                        curvilinear=cfg["curvilinear"])


def _default_grid(mesh) -> tuple[int, int]:
    x0, x1, y0, y1 = mesh.bbox
    # 200 x 100 per unit aspect: 200 samples along the longer side
    w, hgt = x1 - x0, y1 - y0
    return (200, max(2, int(round(200 * hgt / w)))) if w >= hgt else (max(2, int(round(200 * w / hgt))), 200)


def cmd_run(cfg: dict, out: Path, log: Log) -> int:
    sc = _scenario(cfg)
    pb = _setup(cfg, sc, cfg["N"], cfg["h"], cfg["nx"], cfg["ny"])
    T = sc.t_final if cfg["t_final"] is None else cfg["t_final"]
    dt = pb.dt(cfg["cfl"]) if cfg["dt"] is None else cfg["dt"]
    grid = tuple(cfg["snapshot_grid"] or _default_grid(pb.mesh))
    log(f"{sc.name}: N={cfg['N']} K={pb.mesh.K} dt={dt:.6g} T={T:g}")

    energy_rows = []
    snaps = []

    def energy_obs(step, t, Q):
        if step % cfg["energy_every"] == 0 or t == T:
            energy_rows.append((step, t, pb.energy(Q)))

    def snap_obs(step, t, Q):
        every = cfg["snapshot_every"]
        if (every and step % every == 0) or t == T:
            snaps.append((step, t, Q.copy()))

    Q0 = pb.initial_state()
    from .timestepping import run
    Q, t, nsteps = run(Q0, pb.op, T, dt, [energy_obs, snap_obs], 1)

    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "energy.csv", cfg, ("step", "t", "energy"), energy_rows)
    for step, ts, Qs in snaps:
        x, y, vals = analysis.sample_grid(Qs, pb.ref, pb.mesh, pb.geom, *grid)
        write_csv(out / f"snapshot_{step:06d}.csv", cfg, ("x", "y", "v1", "v2", "sxx", "syy", "sxy"),
                  zip(x, y, *vals), footer=[f"t={ts:.17g}"])
    if sc.exact is not None:
        rec = analysis.l2_error(Q, sc.exact, t, pb.ref, pb.geom, cfg["N"], pb.h, cfg["flux"])
        write_csv(out / "error.csv", cfg,
                  ("N", "h", "K", "steps", "t", "relative", "velocity_relative", "stress_relative"),
                  [(cfg["N"], pb.h, pb.mesh.K, nsteps, t, rec.relative, rec.velocity_relative,
                    rec.stress_relative)])
        log(f"relative L2 error at t={t:g}: {rec.relative:.6e}")
    log(f"{nsteps} steps, wrote {out}")
    return 0


def _reference(sc, flux, N, h):
    for hh, err in sc.reference.get(flux, {}).get(N, []):
        if abs(hh - h) < 1e-12:
            return err
    return None


def cmd_converge(cfg: dict, out: Path, log: Log) -> int:
    sc0 = _scenario(cfg)
    if sc0.exact is None:
        raise ConfigError(f"scenario {sc0.name} has no exact solution")
    hs = sorted((float(h) for h in cfg["h_list"]), reverse=True)
    rows, rate_rows = [], []
    ok = True
    for N in cfg["N_list"]:
        errs = []
        for h in hs:
            sc = _scenario(cfg)
            pb = _setup(cfg, sc, N, h)
            Q, t, nsteps = driver.solve(pb, cfg["t_final"], cfg["cfl"], cfg["dt"])
            rec = analysis.l2_error(Q, sc.exact, t, pb.ref, pb.geom, N, h, cfg["flux"])
            errs.append(rec.relative)
            # reference tables hold errors at the scenario's own final time
            ref = _reference(sc, cfg["flux"], N, h) if cfg["t_final"] is None else None
            rel = np.nan if ref is None else abs(rec.relative - ref) / ref
            status = "" if ref is None else ("pass" if rel <= cfg["error_tol"] else "fail")
            ok &= status != "fail"
            rows.append((N, h, pb.mesh.K, nsteps, rec.relative, rec.velocity_relative,
                         rec.stress_relative, np.nan if ref is None else ref, rel, status))
            log(f"N={N} h={h:g}: error {rec.relative:.6e}" + (f" (reference {ref:.6e}, {status})" if ref else ""))
        if len(hs) > 1:
            r = analysis.convergence_rates(hs, errs)
            slope = sc0.reference.get("slopes", {}).get(cfg["flux"], {}).get(N)
            slope = slope if cfg["t_final"] is None else None
            status = "" if slope is None else ("pass" if abs(r.pairwise[-1] - slope) <= cfg["rate_tol"] else "fail")
            ok &= status != "fail"
            rate_rows.append((N, r.pairwise[-1], r.fitted, np.nan if slope is None else slope, status))
            log(f"N={N}: finest-pair rate {r.pairwise[-1]:.3f}, fitted {r.fitted:.3f}"
                + (f" (reference {slope}, {status})" if slope is not None else ""))
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "converge.csv", cfg,
              ("N", "h", "K", "steps", "relative", "velocity_relative", "stress_relative",
               "reference", "relative_difference", "status"), rows)
    if rate_rows:
        write_csv(out / "rates.csv", cfg, ("N", "finest_pair_rate", "fitted_rate", "reference", "status"),
                  rate_rows)
    return 0 if ok else 1


def cmd_spectrum(cfg: dict, out: Path, log: Log) -> int:
    sc = _scenario(cfg)
    pb = _setup(cfg, sc, cfg["N"], cfg["h"], cfg["nx"], cfg["ny"])
    shape = (5, pb.mesh.K, pb.ref.Np)
    n = int(np.prod(shape))
    if n > cfg["max_dof"]:
        raise ConfigError(f"{n} unknowns exceeds max_dof={cfg['max_dof']}")
    log(f"assembling {n} x {n} operator")
    A = analysis.assemble_operator(pb.op.without_sources(), shape, cfg["max_dof"])
    spec = analysis.spectrum(A)
    out.mkdir(parents=True, exist_ok=True)
    lam = spec.eigenvalues
    write_csv(out / "spectrum.csv", cfg, ("re", "im"), zip(lam.real, lam.imag),
              footer=[f"abscissa={spec.abscissa:.17g}", f"radius={spec.radius:.17g}"])
    log(f"spectral abscissa {spec.abscissa:.3e}, radius {spec.radius:.6g}, "
        f"ratio {spec.abscissa / spec.radius:.3e}")
    return 0


def bench_rows(cfg: dict, log: Log | None = None):
    """Dense weighted projection versus matrix-free WADG on identical inputs."""
    rng = np.random.default_rng(cfg["seed"])
    K = cfg["elements"]
    rows = []
    for N in cfg["N_list"]:
        ref = build_reference_element(N)
        C = random_spd((K, ref.Nq), 0.1, 1.0, rng)
        J = rng.uniform(0.5, 2.0, (K, 1)) * np.ones((1, ref.Nq))
        rhs = rng.standard_normal((3, K, ref.Np))
        mats = wadg_dense_matrix(ref, C, J)

        def best(fn):
            ts = []
            for _ in range(cfg["repeats"]):
                tic = time.perf_counter()
                y = fn()
                ts.append(time.perf_counter() - tic)
            return y, min(ts)

        yd, td = best(lambda: apply_dense(mats, rhs))
        yw, tw = best(lambda: apply_wadg_inverse_matrix(ref, rhs, C, J))
        diff = float(np.max(np.abs(yd - yw)) / max(np.max(np.abs(yd)), 1e-300))
        dense_bytes = (3 * ref.Np) ** 2 * 8
        wadg_bytes = ref.Nq * 9 * 8 + ref.Nq * 8   # C and J at each quadrature point
        rows.append((N, ref.Np, ref.Nq, K, diff, dense_bytes, wadg_bytes,
                     td / K * 1e9, tw / K * 1e9))
        if log:
            log(f"N={N}: max diff {diff:.2e}, storage {dense_bytes} vs {wadg_bytes} bytes/element, "
                f"{td / K * 1e9:.0f} vs {tw / K * 1e9:.0f} ns/element")
    return rows


BENCH_COLUMNS = ("N", "Np", "Nq", "elements", "max_relative_difference", "dense_bytes_per_element",
                 "wadg_bytes_per_element", "dense_ns_per_element", "wadg_ns_per_element")


def cmd_bench(cfg: dict, out: Path, log: Log) -> int:
    rows = bench_rows(cfg, log)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "bench.csv", cfg, BENCH_COLUMNS, rows)
    bad = [r[0] for r in rows if not r[4] <= 1e-10]
    if bad:
        print(f"dense and matrix-free results disagree for N={bad}", file=sys.stderr)
        return 1
    return 0


def cmd_scenarios(log: Log) -> int:
    for name in sorted(scenarios.REGISTRY):
        sc = scenarios.get(name)
        print(f"{name:26s} {sc.description}")
    return 0


COMMANDS = {"run": cmd_run, "converge": cmd_converge, "spectrum": cmd_spectrum, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wadg-elastic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("run", "converge", "spectrum", "bench"):
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file (defaults used when omitted)")
        s.add_argument("--out", default="out", help="output directory (default: out)")
        s.add_argument("--threads", type=int, help="BLAS threads (overrides the config)")
        s.add_argument("--quiet", action="store_true")
    s = sub.add_parser("scenarios", help="list available scenarios")
    s.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = Log(args.quiet)
    if args.command == "scenarios":
        return cmd_scenarios(log)
    try:
        overrides = {} if args.threads is None else {"threads": args.threads}
        cfg = load_config(args.command, args.config, overrides)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        from threadpoolctl import threadpool_limits
        with threadpool_limits(limits=cfg["threads"]):
            return COMMANDS[args.command](cfg, Path(args.out), log)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (DivergenceError, MeshError, ValueError, FloatingPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Experiment runner.

Subcommands mirror the library modules: trace, induce, directions,
filling, sojourn, brownian, accept. A run is described by a JSON config
(--config) overlaid with command-line flags; the merged config is
schema-validated and then fingerprinted, and every CSV row carries the
seed and fingerprint that produced it. Output bytes are a function of
config + seed alone (summaries carry no timestamps), so identical runs
diff clean.

Exit codes: 0 on success, 1 on configuration errors, 2 on declared
runtime errors such as a return-time cap overflow.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import numpy as np
from jsonschema import Draft202012Validator

from . import acceptance as acc
from . import brownian as br
from . import directions as dr
from . import filling as fl
from . import induce as ind
from . import sojourn as so
from . import systems as sy
from .cones import parse_cone
from .engine import ergodic_sums
from .errors import CocycleLabError, ConfigInvalid
from .observables import parse_observable

OPERATIONS = ("trace", "induce", "directions", "filling", "sojourn",
              "brownian", "accept")
NO_CP = 1 << 62


# ---------------------------------------------------------------- config

def _load_schema(name: str) -> dict:
    text = resources.files("cocyclelab").joinpath("schemas", name).read_text()
    return json.loads(text)


def validate_config(cfg: dict) -> None:
    schema = _load_schema("config.schema.json")
    errors = sorted(Draft202012Validator(schema).iter_errors(cfg),
                    key=lambda e: e.json_path)
    if errors:
        e = errors[0]
        field = e.json_path[2:] or "config"
        raise ConfigInvalid(field, e.message)


def config_fingerprint(cfg: dict) -> str:
    """12-hex digest of the numerics-determining part of the config."""
    body = {k: v for k, v in cfg.items() if k not in ("out", "jobs")}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _system_from_string(text: str) -> dict:
    parts = text.split(":")
    kind = parts[0]
    if kind == "rotation":
        if len(parts) != 2:
            raise ConfigInvalid("system", "expected rotation:<alpha-token>")
        return {"kind": "rotation", "alpha": parts[1]}
    if kind in ("doubling", "cat-map"):
        return {"kind": kind}
    if kind == "iid-shift":
        if len(parts) != 3:
            raise ConfigInvalid("system", "expected iid-shift:<law>:<d>")
        return {"kind": "iid-shift", "law": parts[1], "d": int(parts[2])}
    raise ConfigInvalid("system", f"unknown system kind {kind!r}")


def _param(cfg: dict, name: str, default=None, required: bool = False):
    params = cfg.get("parameters") or {}
    if name in params:
        return params[name]
    if required:
        raise ConfigInvalid(f"parameters.{name}", "required parameter is missing")
    return default


def _require(cfg: dict, key: str):
    if key not in cfg or cfg[key] in (None, ""):
        raise ConfigInvalid(key, f"{key} is required for this operation")
    return cfg[key]


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(path: str, header, rows) -> int:
    n = 0
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
            n += 1
    return n


def _resolve_out(cfg: dict, default_name: str):
    """--out may be a directory or a .csv path; summary.json sits next to it."""
    out = cfg.get("out") or "."
    if out.endswith(".csv"):
        csv_path, base = out, os.path.dirname(out) or "."
    else:
        base, csv_path = out, os.path.join(out, default_name)
    os.makedirs(base, exist_ok=True)
    return csv_path, os.path.join(base, "summary.json")


def _write_summary(path: str, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _base_summary(cfg: dict, fp: str, **extra) -> dict:
    out = {"operation": cfg["operation"], "seed": cfg["seed"],
           "fingerprint": fp, "parameters": dict(cfg.get("parameters") or {})}
    if "system" in cfg:
        out["system"] = cfg["system"]
        if cfg["system"].get("kind") == "doubling":
            # windowed surrogate orbits: per-path laws hold in distribution
            out["orbit_mode"] = "distributional-only"
    if "observable" in cfg:
        out["observable"] = cfg["observable"]
    out.update(extra)
    return out


def _map_tasks(fn, payloads, jobs: int):
    if jobs <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=min(jobs, len(payloads))) as ex:
        return list(ex.map(fn, payloads))


def _seed_list(cfg: dict) -> list:
    n = int(_param(cfg, "seeds", 1))
    if n < 1:
        raise ConfigInvalid("parameters.seeds", "seed count must be >= 1")
    return [cfg["seed"] + i for i in range(n)]


# ------------------------------------------------------------- operations

def _op_trace(cfg: dict, fp: str) -> int:
    system = sy.parse_system(_require(cfg, "system"))
    obs = parse_observable(_require(cfg, "observable"))
    N = int(_param(cfg, "N", required=True))
    ce = int(_param(cfg, "checkpoint_every", 1024))
    seed = cfg["seed"]
    tr = ergodic_sums(system, obs, sy.sample_initial(system, seed), N,
                      checkpoint_every=ce)
    csv_path, sum_path = _resolve_out(cfg, "trace.csv")
    header = ["seed", "fingerprint", "n"] + [f"phi_{j}" for j in range(obs.d)] + ["norm"]
    rows = ((seed, fp, n, *map(float, tr.values[n]), float(tr.norms[n]))
            for n in range(1, N + 1))
    n_rows = _write_csv(csv_path, header, rows)
    _write_summary(sum_path, _base_summary(
        cfg, fp, rows=n_rows, d=obs.d, checkpoint_every=ce,
        final_norm=float(tr.norms[N])))
    return 0


def _op_induce(cfg: dict, fp: str) -> int:
    system = sy.parse_system(_require(cfg, "system"))
    obs = parse_observable(_require(cfg, "observable"))
    set_text = _param(cfg, "set", required=True)
    B = ind.parse_set(set_text)
    n_returns = int(_param(cfg, "returns", required=True))
    cap = int(_param(cfg, "cap", 10_000_000))
    seed = cfg["seed"]
    st = ind.first_entry(system, B, sy.sample_initial(system, seed), cap)
    it = ind.induced_trace(system, obs, B, st, n_returns, cap)
    csv_path, sum_path = _resolve_out(cfg, "induce.csv")
    header = ["seed", "fingerprint", "n", "R_n"] + \
        [f"phiB_{j}" for j in range(obs.d)]
    rows = ((seed, fp, n, int(it.return_times[n - 1]), *map(float, it.values[n]))
            for n in range(1, n_returns + 1))
    n_rows = _write_csv(csv_path, header, rows)
    _write_summary(sum_path, _base_summary(
        cfg, fp, rows=n_rows, set=set_text, cap=cap,
        measure=B.measure, mean_return_time=float(it.return_times[-1]) / n_returns))
    return 0


def _dir_task(payload: dict):
    system = sy.parse_system(payload["system"])
    obs = parse_observable(payload["observable"])
    tr = ergodic_sums(system, obs, sy.sample_initial(system, payload["seed"]),
                      payload["N"], checkpoint_every=NO_CP)
    mesh = dr.make_mesh(obs.d)
    h = dr.hist_from_trace(tr, mesh, payload["thresholds"])
    verdict = (dr.recurrence_diagnostic(tr, payload["epsilon"]).verdict
               if tr.N >= 1024 else "inconclusive")
    return h.counts, verdict


def _cell_angles(mesh) -> np.ndarray:
    """Angle rows per cell center: () for d=1 signs, polar for d=2/3."""
    c = mesh.centers
    if mesh.d == 1:
        return np.where(c[:, :1] > 0, 0.0, np.pi)
    if mesh.d == 2:
        return np.arctan2(c[:, 1:2], c[:, 0:1]) % (2.0 * np.pi)
    th = np.arctan2(c[:, 1], c[:, 0]) % (2.0 * np.pi)
    return np.column_stack([th, np.arccos(np.clip(c[:, 2], -1.0, 1.0))])


def _op_directions(cfg: dict, fp: str) -> int:
    system = sy.parse_system(_require(cfg, "system"))
    obs = parse_observable(_require(cfg, "observable"))
    N = int(_param(cfg, "N", required=True))
    seeds = _seed_list(cfg)
    quorum = float(_param(cfg, "quorum", 0.9))
    epsilon = float(_param(cfg, "epsilon", 0.5))
    thresholds = _param(cfg, "thresholds")
    if thresholds is None:
        # one-pass default: ladder centered on the diffusive norm scale
        thresholds = dr.default_m_ladder(float(np.sqrt(N))).tolist()
    thresholds = [float(t) for t in thresholds]
    mesh = dr.make_mesh(obs.d)
    payloads = [{"system": cfg["system"], "observable": obs.text, "N": N,
                 "thresholds": thresholds, "epsilon": epsilon, "seed": s}
                for s in seeds]
    results = _map_tasks(_dir_task, payloads, cfg["jobs"])

    hist = dr.DirectionHistogram.empty(mesh, thresholds)
    for counts, _ in results:
        part = dr.DirectionHistogram(mesh, hist.thresholds, counts,
                                     (counts > 0).astype(np.int64), 1, N)
        hist = hist.merge(part)
    est = dr.direction_set_estimate(hist, quorum)

    angles = _cell_angles(mesh)
    csv_path, sum_path = _resolve_out(cfg, "directions.csv")
    header = ["seed", "fingerprint", "threshold", "cell"] + \
        [f"angle_{j}" for j in range(angles.shape[1])] + ["count"]

    def rows():
        for s, (counts, _) in zip(seeds, results):
            for i, t in enumerate(thresholds):
                for k in range(mesh.K):
                    yield (s, fp, float(t), k, *map(float, angles[k]),
                           int(counts[i, k]))

    n_rows = _write_csv(csv_path, header, rows())
    verdicts = [v for _, v in results]
    _write_summary(sum_path, _base_summary(
        cfg, fp, rows=n_rows, mesh={"d": mesh.d, "K": mesh.K},
        thresholds=thresholds, quorum=quorum, epsilon=epsilon,
        estimate_cells=[int(k) for k in est.cells],
        estimate_angles=[[float(a) for a in angles[k]] for k in est.cells],
        coverage_per_threshold=[int(c) for c in (hist.counts > 0).sum(axis=1)],
        recurrence={v: verdicts.count(v) for v in sorted(set(verdicts))}))
    return 0


def _filling_task(payload: dict):
    system = sy.parse_system(payload["system"])
    obs = parse_observable(payload["observable"])
    st = sy.sample_initial(system, payload["seed"])
    N = payload["N"]
    S = ergodic_sums(system, obs, st, N, checkpoint_every=NO_CP).values[:, 0]
    m = np.minimum.accumulate(S[1:])
    # independent route: m_{n+1} = S_1 + min(m_n o T, 0)
    m_rec = np.empty(N)
    m_rec[0] = S[1]
    if N > 1:
        m_shift = np.minimum.accumulate(S[2:] - S[1])
        m_rec[1:] = S[1] + np.minimum(m_shift, 0.0)
    resid = np.abs(m - m_rec)
    final = fl.decomposition_residual(system, obs, st, N)
    return m, resid, final


def _op_filling(cfg: dict, fp: str) -> int:
    N = int(_param(cfg, "N", required=True))
    seeds = _seed_list(cfg)
    payloads = [{"system": _require(cfg, "system"),
                 "observable": _require(cfg, "observable"), "N": N, "seed": s}
                for s in seeds]
    parse_observable(cfg["observable"])          # fail fast before the pool
    sy.parse_system(cfg["system"])
    results = _map_tasks(_filling_task, payloads, cfg["jobs"])
    csv_path, sum_path = _resolve_out(cfg, "filling.csv")
    header = ["seed", "fingerprint", "n", "m_n", "residual"]

    def rows():
        for s, (m, resid, _) in zip(seeds, results):
            for n in range(1, N + 1):
                yield (s, fp, n, float(m[n - 1]), float(resid[n - 1]))

    n_rows = _write_csv(csv_path, header, rows())
    _write_summary(sum_path, _base_summary(
        cfg, fp, rows=n_rows,
        max_route_residual=float(max(r.max() for _, r, _ in results)),
        max_decomposition_residual=float(max(f for _, _, f in results))))
    return 0


def _sojourn_task(payload: dict):
    system = sy.parse_system(payload["system"])
    obs = parse_observable(payload["observable"])
    cone = parse_cone(payload["cone"], obs.d)
    tr = ergodic_sums(system, obs, sy.sample_initial(system, payload["seed"]),
                      payload["N"], checkpoint_every=NO_CP)
    ser = so.sojourn_series(tr, cone, grid=payload["grid"])
    ball = [so.ball_visit_frequency(tr, int(n), payload["M"]) for n in ser.ns]
    return ser.ns, ser.tau, ser.tau_disc, np.asarray(ball)


def _op_sojourn(cfg: dict, fp: str) -> int:
    N = int(_param(cfg, "N", required=True))
    cone_text = _param(cfg, "cone", required=True)
    grid = _param(cfg, "grid", "dyadic")
    grid_list = None if grid == "dyadic" else [int(n) for n in grid]
    M = float(_param(cfg, "M", 10.0))
    seeds = _seed_list(cfg)
    obs = parse_observable(_require(cfg, "observable"))
    sy.parse_system(_require(cfg, "system"))
    parse_cone(cone_text, obs.d)
    payloads = [{"system": cfg["system"], "observable": obs.text, "N": N,
                 "cone": cone_text, "grid": grid_list, "M": M, "seed": s}
                for s in seeds]
    results = _map_tasks(_sojourn_task, payloads, cfg["jobs"])
    csv_path, sum_path = _resolve_out(cfg, "sojourn.csv")
    header = ["seed", "fingerprint", "n", "tau", "tau_discrete", "ball_freq"]

    def rows():
        for s, (ns, tau, taud, ball) in zip(seeds, results):
            for i in range(len(ns)):
                yield (s, fp, int(ns[i]), float(tau[i]), float(taud[i]),
                       float(ball[i]))

    n_rows = _write_csv(csv_path, header, rows())
    hi = [float(t.max()) for _, t, _, _ in results]
    lo = [float(t.min()) for _, t, _, _ in results]
    _write_summary(sum_path, _base_summary(
        cfg, fp, rows=n_rows, cone=cone_text, grid=grid, ball_radius=M,
        running_max=hi, running_min=lo,
        extreme_rate=float(np.mean([(a >= 0.9) and (b <= 0.1)
                                    for a, b in zip(hi, lo)]))))
    return 0


def _op_brownian(cfg: dict, fp: str) -> int:
    cone_text = _param(cfg, "cone", required=True)
    t = float(_param(cfg, "t", 1.0))
    h = float(_param(cfg, "h", 1e-3))
    samples = int(_param(cfg, "samples", required=True))
    seed = cfg["seed"]
    cone = parse_cone(cone_text)
    taus = br.tau_samples(cone, t, h, samples, seed=seed)
    csv_path, sum_path = _resolve_out(cfg, "brownian.csv")
    rows = ((seed, fp, i, float(taus[i])) for i in range(samples))
    n_rows = _write_csv(csv_path, ["seed", "fingerprint", "i", "tau"], rows)
    _write_summary(sum_path, _base_summary(
        cfg, fp, rows=n_rows, cone=cone_text, t=t, h=h, samples=samples,
        mean_tau=float(taus.mean())))
    return 0


def _op_accept(cfg: dict, fp: str) -> int:
    ids = _param(cfg, "criteria")
    results = acc.run_all([int(c) for c in ids] if ids else None)
    print(acc.format_report(results))
    report = acc.report_dict(results)
    report["fingerprint"] = fp
    schema = _load_schema("accept_report.schema.json")
    Draft202012Validator(schema).validate(report)
    base = cfg.get("out") or "."
    os.makedirs(base, exist_ok=True)
    _write_summary(os.path.join(base, "accept_report.json"), report)
    return 0


_DISPATCH = {"trace": _op_trace, "induce": _op_induce,
             "directions": _op_directions, "filling": _op_filling,
             "sojourn": _op_sojourn, "brownian": _op_brownian,
             "accept": _op_accept}


def run(cfg: dict) -> int:
    """Validate and execute a fully-assembled config."""
    validate_config(cfg)
    return _DISPATCH[cfg["operation"]](cfg, config_fingerprint(cfg))


# ------------------------------------------------------------------ argv

class _Parser(argparse.ArgumentParser):
    def error(self, message):                    # exit 1, not argparse's 2
        raise ConfigInvalid("args", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cocycle-lab",
                description="Cocycle trajectory experiments over ergodic systems.")
    sub = p.add_subparsers(dest="operation", required=True)

    def add(name, **flags):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--jobs", type=int)
        if name not in ("brownian", "accept"):
            sp.add_argument("--system", help="e.g. rotation:golden, doubling, "
                                             "cat-map, iid-shift:gaussian:2")
            sp.add_argument("--obs", help="observable expression")
        for flag, typ in flags.items():
            sp.add_argument(f"--{flag}", type=typ)
        return sp

    add("trace", N=int, **{"checkpoint-every": int})
    add("induce", set=str, returns=int, cap=int)
    add("directions", N=int, seeds=int, thresholds=str, quorum=float,
        epsilon=float)
    add("filling", N=int, seeds=int)
    add("sojourn", cone=str, N=int, grid=str, seeds=int, M=float)
    add("brownian", cone=str, t=float, h=float, samples=int)
    add("accept", criteria=str)
    return p


_LIST_PARAMS = {"thresholds": float, "criteria": int, "grid": int}


def _assemble(args: argparse.Namespace) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as f:
                cfg = json.load(f)
        except OSError as e:
            raise ConfigInvalid("config", str(e)) from None
        except json.JSONDecodeError as e:
            raise ConfigInvalid("config", f"invalid JSON: {e}") from None
    cfg["operation"] = args.operation
    if getattr(args, "system", None):
        cfg["system"] = _system_from_string(args.system)
    if getattr(args, "obs", None):
        cfg["observable"] = args.obs
    params = dict(cfg.get("parameters") or {})
    for flag in ("N", "checkpoint_every", "set", "returns", "cap", "seeds",
                 "thresholds", "quorum", "epsilon", "cone", "grid", "M",
                 "t", "h", "samples", "criteria"):
        v = getattr(args, flag, None)
        if v is None:
            continue
        if flag in _LIST_PARAMS and isinstance(v, str) and v != "dyadic":
            v = [_LIST_PARAMS[flag](x) for x in v.split(",")]
        params[flag] = v
    if params:
        cfg["parameters"] = params
    if args.seed is not None:
        cfg["seed"] = args.seed
    elif "COCYCLE_LAB_SEED" in os.environ:
        try:
            cfg["seed"] = int(os.environ["COCYCLE_LAB_SEED"])
        except ValueError:
            raise ConfigInvalid("seed", "COCYCLE_LAB_SEED must be an integer") \
                from None
    cfg.setdefault("seed", 0)
    if args.out is not None:
        cfg["out"] = args.out
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    cfg.setdefault("jobs", os.cpu_count() or 1)
    return cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return run(_assemble(args))
    except ConfigInvalid as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except CocycleLabError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

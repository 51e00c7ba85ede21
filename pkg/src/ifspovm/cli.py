"""Command-line entry point: ``ifspovm <command> [--config PATH] [--out DIR]``.

Every command writes its artifacts plus ``report.json`` into the output
directory.  The report is a pure function of the validated config (wall
clock times go to ``timings.json``), so reruns produce identical bytes.
Exit status: 0 when all checks pass, 1 when a check fails or a numerical
routine raises, 2 for usage and config errors.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod
from .errors import ConvergenceError, DomainError, PrecisionError
from .geometry import attractor
from .intervals import IntervalUnion
from .io import (
    dump_json,
    povm_to_json,
    read_measure_csv,
    write_convergence_csv,
    write_measure_csv,
    write_points_csv,
)
from .measures import TruncationFamily, hutchinson_measure, hutchinson_sequence, kravchenko_sequence
from .operators import build_f_family, build_t_family, depth_projection
from .povm import CellPartition, cell_masses, dilation_check, lip_dictionary_generate, povm_fixpoint
from .symbolic import ShiftSpaceModel
from .transport import kantorovich_h, modified_kantorovich, solve_h, solve_mh

SCHEMA_VERSION = 1
COMMANDS = (
    "attractor",
    "measure",
    "dist",
    "cuntz-check",
    "povm-fixpoint",
    "dilation-check",
    "completion-demo",
)


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name, value, bound, passed=None):
        ok = bool(value <= bound) if passed is None else bool(passed)
        self.items.append({"name": name, "value": _num(value), "bound": _num(bound), "passed": ok})

    @property
    def ok(self):
        return all(c["passed"] for c in self.items)


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _cmd_attractor(cfg, out, checks, args):
    ifs = cfgmod.build_ifs(cfg)
    a = cfg["attractor"]
    run = attractor(ifs, a["tol"], a["max_iter"], a["dedup_tolerance"])
    write_points_csv(out / "attractor.csv", run.cloud.points)
    checks.add("final_gap_le_tol", run.final_gap, a["tol"])
    worst = max(
        (g1 - (ifs.ratio * g0 + 2 * a["dedup_tolerance"]) for g0, g1 in zip(run.gaps, run.gaps[1:])), default=0.0
    )
    checks.add("gap_contraction_excess", worst, 1e-12)
    return {
        "iterations": run.iterations,
        "points": len(run.cloud),
        "gaps": [_num(g) for g in run.gaps],
        "ratio": ifs.ratio,
    }


def _cmd_measure(cfg, out, checks, args):
    ifs = cfgmod.build_ifs(cfg)
    m = cfg["measure"]
    seq = hutchinson_sequence(ifs, m["depth"], m["merge_radius"])
    mu = seq[-1]
    write_measure_csv(out / "measure.csv", mu)
    checks.add("mass_defect", abs(float(mu.weights.sum()) - 1.0), 1e-12)
    h = [kantorovich_h(seq[k], seq[k + 1]) for k in range(len(seq) - 1)]
    # pooling atoms within merge_radius moves mass by at most that much
    # on each side, hence the additive slack per step
    slack = 2 * m["merge_radius"]
    excess = max((h[k + 1] - (ifs.ratio * h[k] + slack) for k in range(len(h) - 1)), default=0.0)
    checks.add("transfer_decay_excess", excess, 1e-9)
    return {"atoms": len(mu), "depth": m["depth"], "h_steps": [_num(x) for x in h]}


def _cmd_dist(cfg, out, checks, args):
    if not args.inputs or len(args.inputs) != 2:
        raise cfgmod.ConfigError("inputs", "dist needs two measure CSV files")
    mu, nu = (read_measure_csv(p) for p in args.inputs)
    rh, rm = solve_h(mu, nu), solve_mh(mu, nu)
    checks.add("h_dual_feasible", 0.0, 0.0, rh.dual_feasible)
    checks.add("mh_dual_feasible", 0.0, 0.0, rm.dual_feasible)
    checks.add("mh_le_min_2_h", rm.value - min(2.0, rh.value), 1e-12)
    results = [rh.to_json(), rm.to_json()]
    dump_json(out / "dist.json", results)
    return {"results": results}


def _cmd_cuntz(cfg, out, checks, args):
    ifs = cfgmod.build_ifs(cfg)
    K = cfg["measure"]["depth"]
    model = ShiftSpaceModel(ifs.n_maps, K)
    tf = build_t_family(model)
    t1 = tf.relation1_defect()
    t2 = float(tf.relation2_defects(depth_projection(model, K - 1)).max())
    checks.add("t_family_relation1", t1, 1e-12)
    checks.add("t_family_relation2_depth_k_minus_1", t2, 1e-12)
    mu = hutchinson_measure(ifs, K, cfg["measure"]["merge_radius"])
    fam = build_f_family(ifs, mu, "matched").family
    s1 = fam.relation1_defect()
    s2 = fam.relation2_defects()
    checks.add("geometric_relation1", s1, 1e-10)
    return {
        "depth": K,
        "atoms": len(mu),
        "t_relation1": t1,
        "t_relation2": t2,
        "s_relation1": s1,
        "s_relation2_table": [[_num(x) for x in row] for row in s2],
        "s_cross_max": _num(max((s2[i, j] for i in range(ifs.n_maps) for j in range(ifs.n_maps) if i != j), default=0.0)),
    }


def _fixpoint(cfg, ifs):
    K = cfg["measure"]["depth"]
    p = cfg["povm"]
    if ifs.dimension != 1:
        raise cfgmod.ConfigError("ifs.maps", "POVM commands need a 1-D system")
    mu = hutchinson_measure(ifs, K)
    ff = build_f_family(ifs, mu, "symbolic")
    part = CellPartition.for_ifs(ifs, p["cells"])
    dic = lip_dictionary_generate(part, p["dictionary_size"], p["seed"])
    res = povm_fixpoint(ifs, ff.family, part, p["tol"], p["max_iter"], dic, masses=cell_masses(part, mu))
    return mu, ff, part, res


def _cmd_povm(cfg, out, checks, args):
    ifs = cfgmod.build_ifs(cfg)
    mu, ff, part, res = _fixpoint(cfg, ifs)
    A = res.table
    dump_json(out / "povm.json", povm_to_json(A))
    write_convergence_csv(out / "convergence.csv", res)
    checks.add("min_eig", -A.min_eig(), 1e-10)
    checks.add("sum_defect", A.sum_defect(), 1e-10)
    checks.add("final_residual", res.res_lower[-1], cfg["povm"]["tol"])
    return {
        "iterations": res.iterations,
        "decay_ratio": _num(res.decay_ratio),
        "ifs_ratio": ifs.ratio,
        "idempotency_defect": _num(A.idempotency_defects().max()),
        "res_lower": [_num(x) for x in res.res_lower],
        "res_upper": [_num(x) for x in res.res_upper],
    }


def _cmd_dilation(cfg, out, checks, args):
    ifs = cfgmod.build_ifs(cfg)
    mu, ff, part, res = _fixpoint(cfg, ifs)
    rep = dilation_check(ifs, ShiftSpaceModel(ifs.n_maps, cfg["measure"]["depth"]), res.table, ff.V)
    tol = cfg["povm"]["tol"]
    checks.add("isometry_defect", rep.isometry_defect, 1e-12)
    excess = float(np.max(rep.defects - rep.slack))
    checks.add("defect_within_slack", excess, 2 * tol)
    body = rep.to_json()
    body["per_cell_slack"] = [_num(x) for x in rep.slack]
    dump_json(out / "dilation.json", body)
    return body


def _cmd_completion(cfg, out, checks, args):
    which = args.which or "kravchenko"
    c = cfg["completion"]
    rows = []
    if which == "kravchenko":
        for n in range(1, c["n_max"] + 1):
            a = kravchenko_sequence(n, np.arange(n + 1))
            b = kravchenko_sequence(n + 1, np.arange(n + 2))
            val, exp = kantorovich_h(a, b), (n + 1) * 2.0 ** -(n + 1)
            rows.append({"n": n, "h": val, "expected": exp})
            checks.add(f"kravchenko_n{n}", abs(val - exp), 1e-12)
    elif which == "truncation":
        ifs = cfgmod.build_ifs(cfg)
        if ifs.dimension != 1:
            raise cfgmod.ConfigError("ifs.maps", "the truncation demo needs a 1-D system")
        mu = hutchinson_measure(ifs, cfg["measure"]["depth"], cfg["measure"]["merge_radius"])
        x0 = float(ifs.seed()[0])
        diam = ifs.box_diameter()
        T = c["truncations"]
        sets = [IntervalUnion.interval(x0 - diam * n / T, x0 + diam * n / T) for n in range(1, T + 1)]
        fam = TruncationFamily(mu, sets)
        for n in range(T):
            mh = modified_kantorovich(fam.member(n), mu)
            bound = 2.0 * fam.escaped_mass(n)
            rows.append({"n": n + 1, "mh": mh, "bound": bound})
            checks.add(f"truncation_n{n + 1}", mh, bound * (1 + 8 * np.finfo(float).eps))
    else:
        raise cfgmod.ConfigError("--which", f"unknown demo {which!r}")
    dump_json(out / f"completion_{which}.json", rows)
    return {"which": which, "rows": rows}


HANDLERS = {
    "attractor": _cmd_attractor,
    "measure": _cmd_measure,
    "dist": _cmd_dist,
    "cuntz-check": _cmd_cuntz,
    "povm-fixpoint": _cmd_povm,
    "dilation-check": _cmd_dilation,
    "completion-demo": _cmd_completion,
}


def run(command, cfg, out_dir, args=None):
    """Execute one command; returns (report dict, exit status)."""
    args = args or argparse.Namespace(inputs=None, which=None)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    checks = Checks()
    t0 = time.perf_counter()
    error = None
    try:
        metrics = HANDLERS[command](cfg, out, checks, args)
    except cfgmod.ConfigError:
        raise
    except (DomainError, ConvergenceError, PrecisionError) as exc:
        metrics = {}
        error = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConvergenceError):
            error["history"] = [_num(x) for x in exc.history]
    elapsed = time.perf_counter() - t0
    extra = {}
    if command == "dist":
        extra["inputs"] = [str(p) for p in args.inputs]
    if command == "completion-demo":
        extra["which"] = args.which or "kravchenko"
    report = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "command": command,
        "config_hash": cfgmod.config_hash(cfg),
        "config": cfg,
        "arguments": extra,
        "metrics": metrics,
        "checks": checks.items,
        "error": error,
        "ok": error is None and checks.ok,
    }
    dump_json(out / "report.json", report)
    dump_json(out / "timings.json", {"command": command, "seconds": elapsed})
    return report, 0 if report["ok"] else 1


def build_parser():
    p = argparse.ArgumentParser(prog="ifspovm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="TOML experiment config")
        s.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
        s.add_argument("--seed", type=int, help="override povm.seed")
        s.add_argument("--quiet", action="store_true", help="print nothing on success")
        if name == "dist":
            s.add_argument("inputs", nargs=2, type=Path, help="two measure CSV files")
        if name == "completion-demo":
            s.add_argument("--which", choices=("kravchenko", "truncation"), default="kravchenko")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for attr in ("inputs", "which"):
        if not hasattr(args, attr):
            setattr(args, attr, None)
    try:
        cfg = cfgmod.load(args.config) if args.config else cfgmod.validate({})
        if args.seed is not None:
            cfg["povm"]["seed"] = args.seed
        report, status = run(args.command, cfg, args.out, args)
    except cfgmod.ConfigError as exc:
        print(f"ifspovm: config error at {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ifspovm: {exc}", file=sys.stderr)
        return 2
    if not args.quiet or status:
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        line = f"{args.command}: {'ok' if status == 0 else 'FAILED'} ({len(report['checks'])} checks"
        line += f", failed: {', '.join(failed)})" if failed else ")"
        if report["error"]:
            line += f" error: {report['error']['type']}: {report['error']['message']}"
        print(line, file=sys.stdout if status == 0 else sys.stderr)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

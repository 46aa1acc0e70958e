"""Command-line entry point.

Exit codes: 0 success, 1 verified negative (an oracle "no" or a failed
verification), 2 usage error, 3 budget exhausted / inconclusive.  Every
command that consumes randomness takes an explicit --seed; there is no
ambient entropy, so re-running a generator reproduces its output files
byte for byte.  Machine-readable results go to stdout or files;
human-readable progress goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import amplifier, gadgets, oracle, reductions, tournaments
from .graphs import Coloring, Digraph, Graph, Tournament, is_valid_acyclic_coloring
from .instance_io import read_instance, write_instance
from .nae import NaeInstance

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


def _json_dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _write_json(path, payload) -> None:
    Path(path).write_text(_json_dumps(payload), encoding="utf-8")


def _eprint(*args) -> None:
    print(*args, file=sys.stderr)


def _budget_from(args) -> oracle.OracleBudget:
    secs = getattr(args, "budget_secs", None)
    if secs is None:
        env = os.environ.get("ACL_BUDGET_SECS")
        secs = float(env) if env else oracle.DEFAULT_BUDGET.max_seconds
    nodes = getattr(args, "budget_nodes", None) or oracle.DEFAULT_BUDGET.max_nodes
    return oracle.OracleBudget(nodes, secs)


def _load_coloring(path) -> Coloring:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return Coloring(tuple(int(c) for c in data["colors"]), int(data["r"]))


def _load_nae(path) -> NaeInstance:
    return NaeInstance.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# --- gadget ----------------------------------------------------------------


def _cmd_gadget(args) -> int:
    if args.gadget_cmd == "hkr":
        tower = gadgets.build_tower(args.k, args.r)
        meta = {"generator": "hkr", "k": str(args.k), "r": str(args.r)}
        if args.out:
            write_instance(args.out, tower.digraph, meta)
        cert_payload = None
        if args.verify:
            cert = gadgets.verify_tower(tower, args.k, args.r, _budget_from(args))
            cert_payload = cert.to_json_dict()
            if args.out:
                _write_json(str(args.out) + ".cert.json", cert_payload)
        summary = {
            "vertices": tower.digraph.n,
            "arcs": tower.digraph.m,
            "blocks": [len(b) for b in tower.blocks],
        }
        if cert_payload:
            summary["certificate"] = cert_payload
        sys.stdout.write(_json_dumps(summary))
        return EXIT_OK
    # registry
    user = None
    if args.user:
        g, _ = read_instance(args.user)
        edge = tuple(int(x) for x in args.edge.split(",")) if args.edge else None
        if edge is None:
            records = g.arcs if isinstance(g, Digraph) else g.edges
            edge = records[0]
        user = (g, edge)
    try:
        entry = gadgets.registry_get(args.kind, args.r, args.k, _budget_from(args), user)
    except gadgets.RegistryUnavailableError as exc:
        _eprint(f"unavailable: {exc}")
        return EXIT_NEGATIVE
    if args.out:
        write_instance(
            args.out,
            entry.gadget,
            {"generator": "registry", "kind": args.kind, "r": str(args.r), "k": str(args.k)},
        )
        _write_json(str(args.out) + ".cert.json", entry.certificate.to_json_dict())
    sys.stdout.write(
        _json_dumps(
            {
                "vertices": entry.gadget.n,
                "critical_edge": list(entry.edge),
                "certificate": entry.certificate.to_json_dict(),
            }
        )
    )
    return EXIT_OK


# --- oracle ----------------------------------------------------------------


def _cmd_oracle(args) -> int:
    budget = _budget_from(args)
    if args.task == "nae":
        inst = _load_nae(args.infile)
        res = oracle.solve_nae(inst, budget)
        sys.stdout.write(_json_dumps(res.to_json_dict()))
        return {"yes": EXIT_OK, "no": EXIT_NEGATIVE}.get(res.verdict, EXIT_INCONCLUSIVE)

    g, _ = read_instance(args.infile)
    if args.task == "acyclic" or args.task == "proper":
        if args.r is None:
            _eprint("--r is required for this task")
            return EXIT_USAGE
        decide = (
            oracle.decide_acyclic_colorable
            if args.task == "acyclic"
            else oracle.decide_proper_colorable
        )
        res = decide(g, args.r, budget)
        payload = res.to_json_dict()
        if args.out:
            _write_json(args.out, payload)
        sys.stdout.write(_json_dumps(payload))
        return {"yes": EXIT_OK, "no": EXIT_NEGATIVE}.get(res.verdict, EXIT_INCONCLUSIVE)
    if args.task == "maxtrans":
        if not isinstance(g, Tournament):
            _eprint("maxtrans needs a tournament instance")
            return EXIT_USAGE
        res = oracle.max_transitive_subtournament(g, budget)
        sys.stdout.write(
            _json_dumps(
                {
                    "verdict": "exact" if res.exact else "lower-bound",
                    "vertices": sorted(res.vertices),
                    "size": len(res.vertices),
                    "nodes": res.nodes,
                    "seconds": res.seconds,
                }
            )
        )
        return EXIT_OK if res.exact else EXIT_INCONCLUSIVE
    # critical
    if args.r is None:
        _eprint("--r is required for this task")
        return EXIT_USAGE
    try:
        res = oracle.make_edge_critical(g, args.r, budget, proper=args.proper)
    except oracle.PreconditionError as exc:
        _eprint(f"precondition: {exc}")
        return EXIT_NEGATIVE
    except oracle.InconclusiveError as exc:
        _eprint(f"inconclusive: {exc}")
        return EXIT_INCONCLUSIVE
    if args.out:
        write_instance(args.out, res.instance, {"generator": "critical", "r": str(args.r)})
    sys.stdout.write(
        _json_dumps(
            {
                "verdict": "critical",
                "kept": res.instance.m,
                "deleted": [list(e) for e in res.deleted],
                "critical_edge": list(res.edge),
                "nodes": res.nodes,
                "seconds": res.seconds,
            }
        )
    )
    return EXIT_OK


# --- reduce ----------------------------------------------------------------


_PIPELINE_FUNCS = {
    "girth-color": lambda src, r, k, b: reductions.reduce_coloring_girth(src, r, k, b),
    "nae-graph": lambda src, r, k, b: reductions.reduce_nae_to_acyclic2_graph(src, k, b),
    "color-acyclic-graph": lambda src, r, k, b: reductions.reduce_coloring_to_acyclic_graph(
        src, r, k, b
    ),
    "color-acyclic-digraph": lambda src, r, k, b: reductions.reduce_coloring_to_acyclic_digraph(
        src, r, k, b
    ),
    "nae-digraph": lambda src, r, k, b: reductions.reduce_nae_to_acyclic2_digraph(src, k),
}


def _cmd_reduce(args) -> int:
    if args.pipeline in ("nae-graph", "nae-digraph"):
        source = _load_nae(args.infile)
    else:
        source, _ = read_instance(args.infile)
        if not isinstance(source, Graph):
            _eprint("coloring pipelines take an undirected graph input")
            return EXIT_USAGE
    try:
        out = _PIPELINE_FUNCS[args.pipeline](source, args.r, args.k, _budget_from(args))
    except gadgets.RegistryUnavailableError as exc:
        _eprint(f"unavailable: {exc}")
        return EXIT_NEGATIVE
    write_instance(
        args.out,
        out.instance,
        {"generator": "reduce", "pipeline": args.pipeline, "r": str(out.r), "k": str(args.k)},
    )
    _write_json(str(args.out) + ".provenance.json", out.provenance_json())
    sys.stdout.write(
        _json_dumps(
            {
                "vertices": out.instance.n,
                "records": out.instance.m,
                "girth_bound": out.girth_bound,
                "degree_bound": out.degree_bound,
            }
        )
    )
    return EXIT_OK


# --- tournaments -------------------------------------------------------------


def _cmd_plant(args) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(","))
    spec = tournaments.PlantedSpec(sizes, args.seed)
    t, hidden = tournaments.generate_planted(spec)
    write_instance(
        args.out,
        t,
        {"generator": "plant", "sizes": args.sizes, "seed": str(args.seed)},
    )
    if args.truth:
        _write_json(
            args.truth,
            {"classes": [list(c) for c in hidden], "sizes": list(sizes), "seed": args.seed},
        )
    _eprint(f"planted tournament on {t.n} vertices written to {args.out}")
    return EXIT_OK


def _cmd_recover(args) -> int:
    t, _ = read_instance(args.infile)
    if not isinstance(t, Tournament):
        _eprint("recover needs a tournament instance")
        return EXIT_USAGE
    cfg = tournaments.RecoveryConfig(
        c=args.c,
        k0=args.k0,
        u_size=args.u_size,
        tail_mode="approximate" if args.tail == "approx" else "exact",
    )
    truth = None
    if args.truth:
        data = json.loads(Path(args.truth).read_text(encoding="utf-8"))
        truth = tuple(tuple(int(v) for v in c) for c in data["classes"])
    report = tournaments.recover(t, cfg, truth)
    if args.out:
        _write_json(args.out, report.to_json_dict(include_timings=False))
    sys.stdout.write(_json_dumps(report.to_json_dict(include_timings=False)))
    _eprint(
        f"recovered {report.r_found} classes; "
        f"wall ms per phase: { {k: round(v, 1) for k, v in report.phase_wall_ms.items()} }"
    )
    if report.phase2 is not None and report.phase2.capped:
        _eprint("warning: phase-2 enumeration was capped; result is partial")
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _cmd_generate(args) -> int:
    t = tournaments.generate_uniform(args.n, args.seed)
    write_instance(
        args.out, t, {"generator": "uniform", "n": str(args.n), "seed": str(args.seed)}
    )
    return EXIT_OK


# --- amplifier ---------------------------------------------------------------


def _cmd_amplify(args) -> int:
    g, _ = read_instance(args.infile)
    if not isinstance(g, Graph):
        _eprint("amplify takes an undirected graph input")
        return EXIT_USAGE
    spec = amplifier.BlowupSpec(g, args.block, args.seed)
    coloring = _load_coloring(args.coloring) if args.coloring else None
    out, planted = amplifier.blow_up(spec, coloring, _budget_from(args))
    write_instance(
        args.out,
        out,
        {"generator": "amplify", "block": str(args.block), "seed": str(args.seed)},
    )
    if planted is None:
        _eprint("warning: no proper coloring found within budget; planted coloring omitted")
    else:
        _write_json(
            str(args.out) + ".coloring.json",
            {"r": planted.r, "colors": list(planted.colors)},
        )
    return EXIT_OK


def _cmd_bipartite_check(args) -> int:
    writer = csv.writer(sys.stdout)
    writer.writerow(["seed", "pairs_searched", "acyclic_pairs_found"])
    for i in range(args.seeds):
        seed = args.first_seed + i
        h = amplifier.random_bipartite_orientation(args.n, seed)
        res = amplifier.check_biacyclic_pair(h, args.m, count_all=True)
        writer.writerow([seed, res.pairs_searched, res.acyclic_pairs])
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def _cmd_verify(args) -> int:
    g, _ = read_instance(args.infile)
    coloring = _load_coloring(args.coloring)
    ok = is_valid_acyclic_coloring(g, coloring)
    sys.stdout.write(_json_dumps({"valid": ok}))
    return EXIT_OK if ok else EXIT_NEGATIVE


# --- sweep -------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentPlan:
    """Finite command grid plus distinct seeds and an output directory."""

    kind: str
    cells: tuple[tuple, ...]
    out_dir: str
    jobs: int = 1


def _recover_cell(cell) -> dict:
    n, r, c, seed = cell
    size = n // r
    sizes = tuple([size + 1] * (n - size * r) + [size] * (r - (n - size * r)))
    spec = tournaments.PlantedSpec(tuple(sorted(sizes, reverse=True)), seed)
    t, hidden = tournaments.generate_planted(spec)
    report = tournaments.recover(t, tournaments.RecoveryConfig(c=c), hidden)
    return {
        "n": n,
        "r": r,
        "c": c,
        "seed": seed,
        "phase1_rounds": sum(1 for p in report.class_phase if p == 1),
        "exact_match": int(bool(report.exact_match)),
        "phase1_ms": round(report.phase_wall_ms.get(1, 0.0), 3),
        "phase2_ms": round(report.phase_wall_ms.get(2, 0.0), 3),
        "phase3_ms": round(report.phase_wall_ms.get(3, 0.0), 3),
    }


def _gadget_cell(cell) -> dict:
    k, r = cell
    tower = gadgets.build_tower(k, r)
    return {
        "k": k,
        "r": r,
        "vertices": tower.digraph.n,
        "bound_k_pow_r": k**r,
        "arcs": tower.digraph.m,
    }


_CELL_FUNCS = {"recover": _recover_cell, "gadget": _gadget_cell}


def run_sweep(plan: ExperimentPlan) -> tuple[list[dict], dict]:
    """Execute all grid cells and aggregate; cell failures are recorded.

    Cells are independent; with jobs > 1 they run in worker processes.
    Aggregation order is the sorted cell order regardless of completion
    order, so outputs are stable.
    """
    func = _CELL_FUNCS[plan.kind]
    cells = sorted(plan.cells)
    rows: list[dict] = []
    if plan.jobs > 1:
        with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            for cell, result in zip(cells, pool.map(func, cells)):
                rows.append(result)
    else:
        for cell in cells:
            try:
                rows.append(func(cell))
            except Exception as exc:  # cell failure: record, continue
                rows.append({"cell": repr(cell), "error": str(exc)})
    summary: dict = {"kind": plan.kind, "cells": len(rows)}
    if plan.kind == "recover":
        ok_rows = [r for r in rows if "error" not in r]
        groups: dict = {}
        for row in ok_rows:
            key = (row["n"], row["r"], row["c"])
            groups.setdefault(key, []).append(row)
        summary["groups"] = [
            {
                "n": n,
                "r": r,
                "c": c,
                "seeds": len(g),
                "exact_rate": sum(x["exact_match"] for x in g) / len(g),
                "median_phase1_ms": sorted(x["phase1_ms"] for x in g)[len(g) // 2],
            }
            for (n, r, c), g in sorted(groups.items())
        ]
    return rows, summary


def _cmd_sweep(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.sweep_cmd == "recover":
        ns = [int(x) for x in args.n.split(",")]
        rs = [int(x) for x in args.r.split(",")]
        cs = [float(x) for x in args.c.split(",")]
        seeds = _parse_seeds(args.seeds)
        cells = tuple((n, r, c, s) for n in ns for r in rs for c in cs for s in seeds)
    else:
        ks = [int(x) for x in args.k.split(",")]
        rs = [int(x) for x in args.r.split(",")]
        cells = tuple((k, r) for k in ks for r in rs)
    plan = ExperimentPlan(args.sweep_cmd, cells, str(out_dir), args.jobs)
    rows, summary = run_sweep(plan)
    csv_path = out_dir / f"sweep_{args.sweep_cmd}.csv"
    fields: list[str] = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    _write_json(out_dir / f"sweep_{args.sweep_cmd}_summary.json", summary)
    _eprint(f"wrote {csv_path} ({len(rows)} rows)")
    return EXIT_OK


def _parse_seeds(text: str) -> list[int]:
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi)))
    return [int(x) for x in text.split(",")]


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aclab")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_gadget = sub.add_parser("gadget", help="build and certify gadgets")
    gsub = p_gadget.add_subparsers(dest="gadget_cmd", required=True)
    p_hkr = gsub.add_parser("hkr")
    p_hkr.add_argument("--k", type=int, required=True)
    p_hkr.add_argument("--r", type=int, required=True)
    p_hkr.add_argument("--verify", action="store_true")
    p_hkr.add_argument("--out")
    _add_budget_args(p_hkr)
    p_reg = gsub.add_parser("registry")
    p_reg.add_argument("--kind", choices=gadgets.REGISTRY_KINDS, required=True)
    p_reg.add_argument("--r", type=int, required=True)
    p_reg.add_argument("--k", type=int, required=True)
    p_reg.add_argument("--user", help="instance file for a user-supplied gadget")
    p_reg.add_argument("--edge", help="critical edge 'u,v' of the user gadget")
    p_reg.add_argument("--out")
    _add_budget_args(p_reg)

    p_oracle = sub.add_parser("oracle", help="exact decision procedures")
    p_oracle.add_argument(
        "--task", choices=["acyclic", "proper", "nae", "maxtrans", "critical"], required=True
    )
    p_oracle.add_argument("--r", type=int)
    p_oracle.add_argument("--in", dest="infile", required=True)
    p_oracle.add_argument("--out")
    p_oracle.add_argument(
        "--proper", action="store_true",
        help="criticality under proper coloring instead of acyclic",
    )
    _add_budget_args(p_oracle)

    p_reduce = sub.add_parser("reduce", help="hardness reduction pipelines")
    p_reduce.add_argument("--pipeline", choices=reductions.PIPELINES, required=True)
    p_reduce.add_argument("--r", type=int, default=2)
    p_reduce.add_argument("--k", type=int, required=True)
    p_reduce.add_argument("--in", dest="infile", required=True)
    p_reduce.add_argument("--out", required=True)
    _add_budget_args(p_reduce)

    p_plant = sub.add_parser("plant", help="generate a planted tournament")
    p_plant.add_argument("--sizes", required=True)
    p_plant.add_argument("--seed", type=int, required=True)
    p_plant.add_argument("--out", required=True)
    p_plant.add_argument("--truth")

    p_gen = sub.add_parser("uniform", help="generate a uniform random tournament")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True)

    p_rec = sub.add_parser("recover", help="three-phase planted recovery")
    p_rec.add_argument("--in", dest="infile", required=True)
    p_rec.add_argument("--truth")
    p_rec.add_argument("--c", type=float, default=tournaments.DEFAULT_CONFIG.c)
    p_rec.add_argument("--k0", type=int)
    p_rec.add_argument("--u-size", type=int)
    p_rec.add_argument("--tail", choices=["exact", "approx"], default="exact")
    p_rec.add_argument("--out")

    p_sweep = sub.add_parser("sweep", help="seeded experiment grids")
    ssub = p_sweep.add_subparsers(dest="sweep_cmd", required=True)
    p_sr = ssub.add_parser("recover")
    p_sr.add_argument("--n", required=True)
    p_sr.add_argument("--r", required=True)
    p_sr.add_argument("--c", default="0.5")
    p_sr.add_argument("--seeds", required=True, help="'0:20' or comma list")
    p_sr.add_argument("--out-dir", required=True)
    p_sr.add_argument("--jobs", type=int, default=1)
    p_sg = ssub.add_parser("gadget")
    p_sg.add_argument("--k", required=True)
    p_sg.add_argument("--r", required=True)
    p_sg.add_argument("--out-dir", required=True)
    p_sg.add_argument("--jobs", type=int, default=1)

    p_amp = sub.add_parser("amplify", help="block blow-up of a graph")
    p_amp.add_argument("--in", dest="infile", required=True)
    p_amp.add_argument("--block", type=int, required=True)
    p_amp.add_argument("--seed", type=int, required=True)
    p_amp.add_argument("--out", required=True)
    p_amp.add_argument("--coloring", help="JSON proper coloring of the source")
    _add_budget_args(p_amp)

    p_bc = sub.add_parser("bipartite-check", help="exhaustive bi-acyclic pair search")
    p_bc.add_argument("--n", type=int, required=True)
    p_bc.add_argument("--m", type=int, required=True)
    p_bc.add_argument("--seeds", type=int, required=True)
    p_bc.add_argument("--first-seed", type=int, default=0)

    p_ver = sub.add_parser("verify", help="check a coloring certificate")
    p_ver.add_argument("--in", dest="infile", required=True)
    p_ver.add_argument("--coloring", required=True)

    return parser


def _add_budget_args(parser) -> None:
    parser.add_argument("--budget-nodes", type=int)
    parser.add_argument("--budget-secs", type=float)


_HANDLERS = {
    "gadget": _cmd_gadget,
    "oracle": _cmd_oracle,
    "reduce": _cmd_reduce,
    "plant": _cmd_plant,
    "uniform": _cmd_generate,
    "recover": _cmd_recover,
    "sweep": _cmd_sweep,
    "amplify": _cmd_amplify,
    "bipartite-check": _cmd_bipartite_check,
    "verify": _cmd_verify,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _HANDLERS[args.cmd](args)
    except (OSError, ValueError) as exc:
        _eprint(f"error: {exc}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

"""Command-line front end: `orc compute|compare|fixture`.

compute runs one curvature method over selected edges and writes a JSON
or CSV report; compare runs a classical/quantum-simulation pair per edge
and fails (exit 1) when the difference exceeds the tolerance; fixture
writes small named input files. Exit codes: 0 ok, 1 comparison failure,
2 configuration error, 3 solver error.

Reports are byte-identical for identical configuration (including the
seed): timing goes to stderr, never into the report.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import ConfigError, OrcError, UnknownFixture
from .graph import Graph, LocalNeighborhood, all_pairs_geodesic, load_graph, neighborhood
from .qpipeline import (
    AuditTrail,
    QsimConfig,
    pq_qsim_from_cost,
    tree_qsim_standard_error,
    w1_pq_qsim,
    w1_tree_qsim,
)
from .transport import CurvatureResult, curvature, verify_tree

_FIXTURES = {
    "appendix_a": (
        "appendix_a.json",
        json.dumps({"cost": [[1, 3, 3, 2], [2, 3, 3, 3], [3, 2, 2, 3]], "dxy": 1}) + "\n",
    ),
    "path4": ("path4.txt", "0 1\n1 2\n2 3\n"),
    "star": ("star.txt", "0 1\n0 2\n0 3\n"),
}

_QSIM_PARTNER = {"qsim_tree": "tree", "qsim_pq": "assignment"}


@dataclass
class RunConfig:
    """Validated CLI options plus the loaded instance."""

    command: str
    input_path: str | None
    format: str
    method: str
    qsim_method: str
    edges: list[tuple[int, int]] | None
    all_edges: bool
    numeric: str
    tol: float
    out: str | None
    out_format: str
    trace: str | None
    workers: int
    qsim: QsimConfig


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orc",
                                     description="Ollivier-Ricci curvature toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--input", required=True, help="input file path")
        sp.add_argument("--format", choices=["edge_list", "json", "cost_matrix"],
                        default="edge_list")
        sp.add_argument("--edge", action="append", default=None, metavar="U,V",
                        help="edge selector, repeatable")
        sp.add_argument("--all-edges", action="store_true")
        sp.add_argument("--numeric", choices=["rational", "float"], default="rational")
        sp.add_argument("--margin", type=float, default=0.05)
        sp.add_argument("--eps", type=float, default=1e-10)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--shots", type=int, default=None)
        sp.add_argument("--include-endpoints", action="store_true")
        sp.add_argument("--cap", type=int, default=10 ** 6)
        sp.add_argument("--out", default=None, help="report path (default: stdout)")
        sp.add_argument("--out-format", choices=["json", "csv"], default="json")
        sp.add_argument("--trace", default=None, help="audit-trace JSON lines path")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--debug-corrupt-alpha", type=float, default=1.0,
                        help=argparse.SUPPRESS)

    sp_compute = sub.add_parser("compute", help="curvature with one method")
    add_common(sp_compute)
    sp_compute.add_argument(
        "--method", default="lp",
        choices=["lp", "tree", "assignment", "brute_force", "qsim_tree", "qsim_pq"])

    sp_compare = sub.add_parser("compare", help="classical vs quantum-sim per edge")
    add_common(sp_compare)
    sp_compare.add_argument("--qsim-method", default="auto",
                            choices=["auto", "qsim_tree", "qsim_pq"])
    sp_compare.add_argument("--tol", type=float, default=1e-8)

    sp_fixture = sub.add_parser("fixture", help="write a named fixture file")
    sp_fixture.add_argument("name", choices=sorted(_FIXTURES))
    sp_fixture.add_argument("--dir", default=".")
    return parser


def _parse_edges(raw: list[str] | None) -> list[tuple[int, int]] | None:
    if raw is None:
        return None
    edges = []
    for item in raw:
        parts = item.split(",")
        if len(parts) != 2:
            raise ConfigError(f"--edge expects 'u,v', got {item!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"--edge expects integers, got {item!r}") from exc
    return edges


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        input_path=args.input,
        format=args.format,
        method=getattr(args, "method", "lp"),
        qsim_method=getattr(args, "qsim_method", "auto"),
        edges=_parse_edges(args.edge),
        all_edges=args.all_edges,
        numeric=args.numeric,
        tol=getattr(args, "tol", 1e-8),
        out=args.out,
        out_format=args.out_format,
        trace=args.trace,
        workers=max(1, args.workers),
        qsim=QsimConfig(
            margin=args.margin,
            shots=args.shots,
            seed=args.seed,
            eps=args.eps,
            dim_cap=args.cap,
            include_endpoints=args.include_endpoints,
            debug_alpha_scale=args.debug_corrupt_alpha,
        ),
    )


def _config_echo(cfg: RunConfig) -> dict:
    echo = {
        "command": cfg.command,
        "input": cfg.input_path,
        "format": cfg.format,
        "method": cfg.method,
        "numeric": cfg.numeric,
        "edges": [list(e) for e in cfg.edges] if cfg.edges else None,
        "all_edges": cfg.all_edges,
        "margin": cfg.qsim.margin,
        "eps": cfg.qsim.eps,
        "seed": cfg.qsim.seed,
        "shots": cfg.qsim.shots,
        "include_endpoints": cfg.qsim.include_endpoints,
        "cap": cfg.qsim.dim_cap,
        "workers": cfg.workers,
    }
    if cfg.command == "compare":
        echo["qsim_method"] = cfg.qsim_method
        echo["tol"] = cfg.tol
    return echo


# --------------------------------------------------------------------------
# instance loading and validation
# --------------------------------------------------------------------------

@dataclass
class _Instance:
    graph: Graph | None
    dg: object | None
    nb_fixture: LocalNeighborhood | None
    is_tree: bool


def _load_instance(cfg: RunConfig) -> _Instance:
    try:
        text = Path(cfg.input_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read input {cfg.input_path!r}: {exc}") from exc
    if cfg.format == "cost_matrix":
        parse_float = float if cfg.numeric == "float" else Fraction
        try:
            obj = json.loads(text, parse_float=parse_float)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid cost-matrix JSON: {exc}") from exc
        if not isinstance(obj, dict) or "cost" not in obj or "dxy" not in obj:
            raise ConfigError('cost-matrix input must be {"cost": [[...]], "dxy": r}')
        cost = obj["cost"]
        dxy = obj["dxy"]
        if cfg.numeric == "float":
            cost = [[float(v) for v in row] for row in cost]
            dxy = float(dxy)
        try:
            nb = LocalNeighborhood.from_cost(cost, dxy)
        except OrcError as exc:
            raise ConfigError(f"bad cost-matrix fixture: {exc}") from exc
        return _Instance(graph=None, dg=None, nb_fixture=nb, is_tree=False)
    try:
        g = load_graph(text, format=cfg.format, numeric=cfg.numeric)
    except OrcError as exc:
        raise ConfigError(f"cannot parse input: {exc}") from exc
    dg = all_pairs_geodesic(g, workers=cfg.workers)
    return _Instance(graph=g, dg=dg, nb_fixture=None, is_tree=verify_tree(g))


def _select_edges(cfg: RunConfig, inst: _Instance) -> list[tuple[int, int]]:
    if inst.nb_fixture is not None:
        return [(-1, -1)]  # single synthetic record
    if cfg.all_edges and cfg.edges:
        raise ConfigError("use either --edge or --all-edges, not both")
    if cfg.all_edges:
        edges = [(u, v) for u, v, _ in inst.graph.edges]
        if not cfg.qsim.include_endpoints:
            # leaf edges have an empty neighborhood on one side; skip them
            degree = [len(inst.graph.neighbors(v)) for v in range(inst.graph.vertex_count)]
            edges = [(u, v) for u, v in edges if degree[u] > 1 and degree[v] > 1]
        if not edges:
            raise ConfigError("no edges with nonempty neighborhoods to process")
        return edges
    if cfg.edges:
        for u, v in cfg.edges:
            if not inst.graph.has_edge(u, v):
                raise ConfigError(f"({u}, {v}) is not an edge of the input graph")
        return cfg.edges
    raise ConfigError("select edges with --edge u,v or --all-edges")


def _validate_method(cfg: RunConfig, inst: _Instance, method: str,
                     selected: list[tuple[int, int]]) -> None:
    if inst.nb_fixture is not None:
        if method in ("tree", "qsim_tree"):
            raise ConfigError(f"method {method!r} needs a graph input, "
                              "not a cost-matrix fixture")
        nb = inst.nb_fixture
        if method in ("assignment", "brute_force", "qsim_pq") and nb.p != nb.q:
            raise ConfigError(f"NotSquare: method {method!r} needs p = q, "
                              f"got p={nb.p}, q={nb.q}")
        return
    if method in ("tree", "qsim_tree") and not inst.is_tree:
        raise ConfigError(f"NotATree: method {method!r} needs a tree graph")
    if method in ("assignment", "brute_force", "qsim_pq"):
        for u, v in selected:
            nb = neighborhood(inst.graph, inst.dg, u, v,
                              include_endpoints=cfg.qsim.include_endpoints)
            if nb.p != nb.q:
                raise ConfigError(f"NotSquare: edge ({u}, {v}) has "
                                  f"p={nb.p}, q={nb.q} for method {method!r}")


# --------------------------------------------------------------------------
# execution
# --------------------------------------------------------------------------

def _run_method(cfg: RunConfig, inst: _Instance, method: str,
                edge: tuple[int, int], audit: AuditTrail | None) -> CurvatureResult:
    if inst.nb_fixture is not None:
        nb = inst.nb_fixture
        if method == "qsim_pq":
            return pq_qsim_from_cost(nb.cost, nb.dxy, cfg.qsim, audit=audit)
        return curvature(nb, method=method)
    if method == "qsim_tree":
        return w1_tree_qsim(inst.graph, inst.dg, edge, cfg.qsim, audit=audit)
    if method == "qsim_pq":
        return w1_pq_qsim(inst.graph, inst.dg, edge, cfg.qsim, audit=audit)
    nb = neighborhood(inst.graph, inst.dg, edge[0], edge[1],
                      include_endpoints=cfg.qsim.include_endpoints)
    return curvature(nb, method=method, graph=inst.graph)


def _shape_of(cfg: RunConfig, inst: _Instance, edge: tuple[int, int]) -> tuple[int, int]:
    if inst.nb_fixture is not None:
        return inst.nb_fixture.p, inst.nb_fixture.q
    nb = neighborhood(inst.graph, inst.dg, edge[0], edge[1],
                      include_endpoints=cfg.qsim.include_endpoints)
    return nb.p, nb.q


def _ser(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    return v


def _record(cfg: RunConfig, inst: _Instance, edge: tuple[int, int],
            result: CurvatureResult) -> dict:
    p, q = _shape_of(cfg, inst, edge)
    rec = {
        "x": result.x,
        "y": result.y,
        "p": p,
        "q": q,
        "w1": _ser(result.w1),
        "dxy": _ser(result.dxy),
        "curvature": _ser(result.curvature),
        "method": result.method,
    }
    diag = result.diagnostics
    if diag is not None:
        rec["diagnostics"] = {
            "value": diag.value,
            "iterations": diag.iterations,
            "initial_overlap": diag.initial_overlap,
            "gap_proxy": diag.gap_proxy,
            "converged": diag.converged,
        }
    return rec


def _map_edges(cfg: RunConfig, edges, fn):
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(fn, edges))
    return [fn(e) for e in edges]


def _cmd_compute(cfg: RunConfig) -> tuple[dict, int]:
    inst = _load_instance(cfg)
    selected = _select_edges(cfg, inst)
    _validate_method(cfg, inst, cfg.method, selected)
    audit = AuditTrail() if cfg.trace else None

    def run_one(edge):
        try:
            result = _run_method(cfg, inst, cfg.method, edge, audit)
        except OrcError as exc:
            raise _SolverFailure(edge, exc) from exc
        return _record(cfg, inst, edge, result)

    records = _map_edges(cfg, selected, run_one)
    report = {
        "meta": {"version": __version__, "config": _config_echo(cfg)},
        "records": records,
    }
    _write_trace(cfg, audit)
    return report, 0


def _cmd_compare(cfg: RunConfig) -> tuple[dict, int]:
    inst = _load_instance(cfg)
    selected = _select_edges(cfg, inst)
    qsim_method = cfg.qsim_method
    if qsim_method == "auto":
        qsim_method = "qsim_tree" if inst.is_tree else "qsim_pq"
    classical = _QSIM_PARTNER[qsim_method]
    _validate_method(cfg, inst, classical, selected)
    _validate_method(cfg, inst, qsim_method, selected)
    audit = AuditTrail() if cfg.trace else None

    def run_one(edge):
        try:
            res_c = _run_method(cfg, inst, classical, edge, None)
            res_q = _run_method(cfg, inst, qsim_method, edge, audit)
        except OrcError as exc:
            raise _SolverFailure(edge, exc) from exc
        abs_diff = abs(float(res_c.w1) - float(res_q.w1))
        rel_diff = abs_diff / max(abs(float(res_c.w1)), 1e-300)
        tol = cfg.tol
        if cfg.qsim.shots is not None and qsim_method == "qsim_tree":
            se = tree_qsim_standard_error(inst.graph, inst.dg, edge, cfg.qsim)
            tol = max(tol, 5.0 * se)
        rec = _record(cfg, inst, edge, res_q)
        rec.update({
            "w1_classical": _ser(res_c.w1),
            "w1_qsim": res_q.w1,
            "abs_diff": abs_diff,
            "rel_diff": rel_diff,
            "tol": tol,
            "within_tol": abs_diff <= tol,
        })
        return rec

    records = _map_edges(cfg, selected, run_one)
    max_abs = max((r["abs_diff"] for r in records), default=0.0)
    max_rel = max((r["rel_diff"] for r in records), default=0.0)
    ok = all(r["within_tol"] for r in records)
    report = {
        "meta": {"version": __version__, "config": _config_echo(cfg)},
        "summary": {
            "classical_method": classical,
            "qsim_method": qsim_method,
            "max_abs_diff": max_abs,
            "max_rel_diff": max_rel,
            "within_tol": ok,
        },
        "records": records,
    }
    _write_trace(cfg, audit)
    return report, 0 if ok else 1


def _cmd_fixture(args: argparse.Namespace) -> int:
    name = args.name
    if name not in _FIXTURES:
        raise UnknownFixture(f"unknown fixture {name!r}")
    filename, content = _FIXTURES[name]
    path = Path(args.dir) / filename
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    print(str(path))
    return 0


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

class _SolverFailure(Exception):
    def __init__(self, edge: tuple[int, int], cause: OrcError) -> None:
        super().__init__(f"edge {edge}: {type(cause).__name__}: {cause}")
        self.edge = edge
        self.cause = cause


def _report_to_csv(report: dict) -> str:
    records = report["records"]
    fields = ["x", "y", "p", "q", "w1", "dxy", "curvature", "method"]
    extras = ["w1_classical", "w1_qsim", "abs_diff", "rel_diff", "tol", "within_tol"]
    if records and "w1_classical" in records[0]:
        fields = fields + extras
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: rec.get(k) for k in fields})
    return buf.getvalue()


def _emit_report(cfg: RunConfig, report: dict) -> None:
    if cfg.out_format == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        text = _report_to_csv(report)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_trace(cfg: RunConfig, audit: AuditTrail | None) -> None:
    if audit is None or cfg.trace is None:
        return
    lines = [json.dumps(rec, sort_keys=True, default=str) for rec in audit.records]
    Path(cfg.trace).write_text("\n".join(lines) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    start = time.monotonic()
    try:
        if args.command == "fixture":
            return _cmd_fixture(args)
        cfg = _config_from_args(args)
        if args.command == "compute":
            report, code = _cmd_compute(cfg)
        else:
            report, code = _cmd_compare(cfg)
        _emit_report(cfg, report)
        return code
    except ConfigError as exc:
        print(f"orc: config error: {exc}", file=sys.stderr)
        return 2
    except UnknownFixture as exc:
        print(f"orc: {exc}", file=sys.stderr)
        return 2
    except _SolverFailure as exc:
        print(f"orc: solver error: {exc}", file=sys.stderr)
        return 3
    except OrcError as exc:
        print(f"orc: solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    finally:
        print(f"orc: finished in {time.monotonic() - start:.3f}s", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())

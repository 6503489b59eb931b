"""Command-line front end: discover, infer, eval, simulate, stats, export.

Flags are long-form only. A ``--config file.json`` may supply any flag
value; precedence is CLI > config > defaults. ``CAUSALKIT_SEED`` is the
seed fallback. Exit codes: 0 success, 1 module/data error, 2 bad flags.
Output files are written to a temp file and renamed on success, so a
failing run never leaves a partial artifact.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import SPEC_VERSION
from .dataset import DISCRETE, Dataset, csv_text, load_csv, summary_stats
from .errors import CausalKitError, DataError
from .fges import run_fges
from .graphs import (
    MixedGraph,
    as_dag,
    from_dot,
    graph_from_json,
    graph_to_dict,
    graph_to_json,
    to_dot,
)
from .inference import adjustment_estimate, simpson_check
from .knowledge import EMPTY, load_knowledge
from .metrics import compare_graphs
from .pc import run_pc
from .simulate import (
    beam_dataset,
    sample_sem,
    sem_from_dict,
    spalling_dataset,
    table3_dataset,
)


def _write_atomic(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".causalkit-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_dataset(path, kinds_path=None) -> Dataset:
    if not os.path.exists(path):
        raise DataError(f"input file not found: {path}")
    if kinds_path is None:
        sibling = path + ".kinds.json"
        kinds_path = sibling if os.path.exists(sibling) else None
    return load_csv(path, kinds_path)


def _load_graph(path) -> MixedGraph:
    if not os.path.exists(path):
        raise DataError(f"graph file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".dot") or text.lstrip().startswith("digraph"):
        return from_dot(text)
    return graph_from_json(text)


def _emit_graph(g: MixedGraph, fmt: str, out) -> None:
    if fmt == "dot":
        text = to_dot(g)
    elif fmt == "json":
        text = graph_to_json(g)
    else:
        lines = [f"nodes: {', '.join(g.names)}"]
        for i, j, ma, mb in g.edges():
            glyph = {"tail": "-", "arrow": ">", "circle": "o"}
            left = "<" if ma == "arrow" else ("o" if ma == "circle" else "-")
            right = glyph[mb]
            lines.append(f"  {g.names[i]} {left}-{right} {g.names[j]}")
        text = "\n".join(lines) + "\n"
    if out:
        _write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _seed_from(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("CAUSALKIT_SEED")
    return int(env) if env else 0


def _coerce_mixed(d: Dataset, policy: str, bins: int = 3) -> Dataset:
    kinds = set(d.kinds)
    if len(kinds) == 1 or policy == "error":
        return d
    if policy == "as-continuous":
        return d.with_kinds({n: "continuous" for n in d.names})
    if policy == "discretize":
        cols = []
        for name in d.names:
            x = d.col(name)
            if d.kind(name) == DISCRETE:
                cols.append(x)
            else:
                edges = np.quantile(x, [i / bins for i in range(1, bins)])
                cols.append(np.searchsorted(edges, x, side="right").astype(float))
        values = np.column_stack(cols)
        return Dataset(d.names, [DISCRETE] * d.p, values)
    raise DataError(f"unknown mixed-policy '{policy}'")


def cmd_discover(args) -> int:
    data = _load_dataset(args.input, args.kinds)
    if args.columns:
        data = data.select([c.strip() for c in args.columns.split(",")])
    data = _coerce_mixed(data, args.mixed_policy)
    knowledge = load_knowledge(args.knowledge) if args.knowledge else EMPTY
    report = {
        "spec_version": SPEC_VERSION,
        "algorithm": args.algo,
        "parameters": {
            "alpha": args.alpha,
            "penalty": args.penalty,
            "max_cond": args.max_cond,
            "test": args.test,
            "knowledge": args.knowledge,
        },
    }
    if args.algo == "pc":
        res = run_pc(data, test=args.test, alpha=args.alpha,
                     knowledge=knowledge, max_cond=args.max_cond)
        graph = res.graph
        report["sepsets"] = [
            {"pair": [data.names[i], data.names[j]],
             "sepset": [data.names[s] for s in sep]}
            for (i, j), sep in res.sepsets.items()
        ]
        report["ci_tests_run"] = res.tests_run
        report["degenerate_tests"] = res.degenerate_tests
        report["collider_conflicts"] = res.collider_conflicts
        report["knowledge_removed_pairs"] = [list(p) for p in res.knowledge_removed]
    else:
        res = run_fges(data, score="auto" if args.test == "auto" else args.test,
                       penalty=args.penalty, knowledge=knowledge)
        graph = res.scored.graph
        report["operators"] = res.operators
        report["initial_score"] = res.initial_score
        report["final_score_higher_better"] = res.scored.total_score
        report["final_score_lower_better"] = -res.scored.total_score
        report["skipped_collinear"] = res.skipped_collinear
    report["graph"] = graph_to_dict(graph)
    _emit_graph(graph, args.format, args.out)
    if args.report:
        _write_atomic(args.report, json.dumps(report, indent=2) + "\n")
    return 0


def cmd_infer(args) -> int:
    data = _load_dataset(args.input, args.kinds)
    adjust = [c.strip() for c in args.adjust.split(",")] if args.adjust else []
    graph = as_dag(_load_graph(args.graph)) if args.graph else None
    est = adjustment_estimate(
        data, args.treatment, args.outcome, adjust,
        allow_empty_strata=args.allow_empty_strata,
        laplace=args.laplace, graph=graph, force=args.force,
    )
    out = {"spec_version": SPEC_VERSION,
           "treatment": args.treatment, "outcome": args.outcome}
    out.update(est.to_dict())
    if args.simpson_covariate:
        flag, table = simpson_check(
            data, args.treatment, args.outcome, args.simpson_covariate
        )
        out["simpson_reversal"] = flag
        out["simpson_table"] = table
    text = json.dumps(out, indent=2) + "\n"
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    truth = _load_graph(args.truth)
    learned = _load_graph(args.learned)
    cmp = compare_graphs(truth, learned)
    out = {"spec_version": SPEC_VERSION}
    out.update(cmp.to_dict())
    text = json.dumps(out, indent=2) + "\n"
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    defined = lambda v: "undefined" if v is None else f"{v:.3f}"
    sys.stderr.write(
        f"shd={cmp.shd} missing={cmp.missing_edges} extra={cmp.extra_edges} "
        f"wrong-direction={cmp.incorrect_directed} "
        f"adj-P={defined(cmp.adjacency_precision)} "
        f"adj-R={defined(cmp.adjacency_recall)} "
        f"arrow-P={defined(cmp.arrowhead_precision)} "
        f"arrow-R={defined(cmp.arrowhead_recall)}\n"
    )
    return 0


def cmd_simulate(args) -> int:
    seed = _seed_from(args)
    if args.generator == "table3":
        data = table3_dataset()
    elif args.generator == "beams":
        grades = [float(g) for g in args.grades.split(",")] if args.grades \
            else None
        n_sections = max(args.n // (len(grades) if grades else 2), 2)
        data = beam_dataset(n_sections, grades or (345.0, 250.0), seed)
    elif args.generator == "spalling":
        data = spalling_dataset(args.n, seed)
    elif args.generator == "sem":
        if not args.spec:
            raise DataError("simulate sem requires --spec")
        with open(args.spec, "r", encoding="utf-8") as fh:
            sem = sem_from_dict(json.load(fh))
        data = sample_sem(sem, args.n, seed)
    else:
        raise DataError(f"unknown generator '{args.generator}'")
    if not args.out:
        raise DataError("simulate requires --out")
    kinds_text = json.dumps(
        {"kinds": dict(zip(data.names, data.kinds))}, indent=2, sort_keys=True
    ) + "\n"
    _write_atomic(args.out, csv_text(data))
    _write_atomic(args.out + ".kinds.json", kinds_text)
    return 0


def cmd_stats(args) -> int:
    data = _load_dataset(args.input, args.kinds)
    stats = summary_stats(data)
    if args.format == "json":
        obj = {
            name: {
                "minimum": s.minimum, "maximum": s.maximum, "average": s.average,
                "std": s.std, "skewness": s.skewness,
            }
            for name, s in stats.items()
        }
        sys.stdout.write(json.dumps(obj, indent=2) + "\n")
    else:
        fields = ["minimum", "maximum", "average", "std", "skewness"]
        sys.stdout.write("column," + ",".join(fields) + "\n")
        for name, s in stats.items():
            row = [name] + [
                "undefined" if getattr(s, f) is None else f"{getattr(s, f):.6g}"
                for f in fields
            ]
            sys.stdout.write(",".join(row) + "\n")
    return 0


def cmd_export(args) -> int:
    g = _load_graph(args.input)
    fmt = "dot" if args.out.endswith(".dot") else "json"
    _emit_graph(g, fmt, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalkit",
        description="Causal discovery, graph evaluation, and interventional "
                    "inference over CSV datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    disc = sub.add_parser("discover", help="learn a graph from data")
    disc.add_argument("--in", dest="input", required=True)
    disc.add_argument("--kinds", default=None)
    disc.add_argument("--columns", default=None,
                      help="comma-separated subset of columns to use")
    disc.add_argument("--algo", choices=["pc", "fges"], default="pc")
    disc.add_argument("--test", default="auto",
                      help="pc: auto|fisherz|g2; fges: auto|gaussian_bic|discrete_bic")
    disc.add_argument("--alpha", type=float, default=0.05)
    disc.add_argument("--penalty", type=float, default=1.0)
    disc.add_argument("--max-cond", dest="max_cond", type=int, default=3)
    disc.add_argument("--knowledge", default=None)
    disc.add_argument("--mixed-policy", dest="mixed_policy", default="error",
                      choices=["error", "as-continuous", "discretize"])
    disc.add_argument("--out", default=None)
    disc.add_argument("--format", choices=["dot", "json", "text"], default="dot")
    disc.add_argument("--report", default=None)
    disc.set_defaults(fn=cmd_discover)

    inf = sub.add_parser("infer", help="estimate do-probabilities and ATE")
    inf.add_argument("--in", dest="input", required=True)
    inf.add_argument("--kinds", default=None)
    inf.add_argument("--treatment", required=True)
    inf.add_argument("--outcome", required=True)
    inf.add_argument("--adjust", default=None)
    inf.add_argument("--graph", default=None,
                     help="DAG file; adjustment sets must then pass the backdoor check")
    inf.add_argument("--force", action="store_true")
    inf.add_argument("--allow-empty-strata", dest="allow_empty_strata",
                     action="store_true")
    inf.add_argument("--laplace", type=int, default=0)
    inf.add_argument("--simpson-covariate", dest="simpson_covariate", default=None)
    inf.add_argument("--out", default=None)
    inf.set_defaults(fn=cmd_infer)

    ev = sub.add_parser("eval", help="compare a learned graph against truth")
    ev.add_argument("--truth", required=True)
    ev.add_argument("--learned", required=True)
    ev.add_argument("--out", default=None)
    ev.set_defaults(fn=cmd_eval)

    sim = sub.add_parser("simulate", help="generate datasets")
    sim.add_argument("generator", choices=["beams", "table3", "spalling", "sem"])
    sim.add_argument("--spec", default=None, help="SEM spec JSON (generator=sem)")
    sim.add_argument("--n", type=int, default=500)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--grades", default=None,
                     help="comma-separated steel grades in MPa (generator=beams)")
    sim.add_argument("--out", required=True)
    sim.set_defaults(fn=cmd_simulate)

    st = sub.add_parser("stats", help="per-column summary statistics")
    st.add_argument("--in", dest="input", required=True)
    st.add_argument("--kinds", default=None)
    st.add_argument("--format", choices=["json", "text"], default="json")
    st.set_defaults(fn=cmd_stats)

    ex = sub.add_parser("export", help="convert graph files between dot and json")
    ex.add_argument("--in", dest="input", required=True)
    ex.add_argument("--out", required=True)
    ex.set_defaults(fn=cmd_export)

    for sp in (disc, inf, ev, sim, st, ex):
        sp.add_argument("--config", default=None,
                        help="JSON file of flag defaults (CLI values win)")
    return parser


def _apply_config(parser, args, argv):
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read config {args.config}: {exc}") from exc
    explicit = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
    for key, value in config.items():
        flag = "--" + key.replace("_", "-")
        attr = key.replace("-", "_")
        if flag in explicit or not hasattr(args, attr):
            continue
        setattr(args, attr, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(parser, args, argv)
        return args.fn(args)
    except (CausalKitError, OSError, ValueError) as exc:
        sys.stderr.write(f"causalkit: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())

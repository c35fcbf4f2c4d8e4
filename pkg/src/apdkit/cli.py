"""Command-line interface: ``apdkit <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import generate
from .engines import ENGINES, apd_report, gamma
from .errors import ApdError, InputError
from .extension import TreeExtension, scanwidth_exact, scanwidth_heuristic
from .maxapd import construct_hardness_instance, max_apd_exact, max_apd_greedy
from .network import validate
from .newick import emit_enewick, emit_json, format_number, load_network

EXIT_DISAGREE = 1


def _decimal(x) -> str:
    if isinstance(x, float):
        return repr(x)
    exact = format_number(x)
    return exact if exact is not None else f"{float(x):.12g}"


def _exact(x) -> str:
    return repr(x) if isinstance(x, float) else str(x)


def _emit(args, doc: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(doc, sort_keys=True, indent=1))
    else:
        print("\n".join(lines))


def _taxa(arg):
    if arg is None:
        return None
    names = [t.strip() for t in arg.split(",") if t.strip()]
    if not names:
        raise InputError("--taxa needs at least one taxon")
    return names


def _load(path):
    diags: list = []
    net = load_network(path, diags)
    for d in diags:
        print(d, file=sys.stderr)
    return net


def cmd_validate(args) -> int:
    diags: list = []
    net = load_network(args.file, diags)
    report = validate(net)
    doc = {
        "valid": report.ok,
        "violations": [
            {"code": v.code, "message": v.message, "node": v.node, "edge": v.edge}
            for v in report.violations
        ],
        "warnings": [str(w) for w in report.warnings],
        "nodes": net.n_nodes,
        "edges": len(net.edges),
        "reticulations": len(net.reticulations),
    }
    lines = [str(report)] + [f"warning: {w}" for w in report.warnings]
    _emit(args, doc, lines)
    return 0 if report.ok else InputError.exit_code


def _read_extension(path, net):
    try:
        with open(path, encoding="utf-8") as fh:
            return TreeExtension.from_json(fh.read(), net)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def cmd_apd(args) -> int:
    net = _load(args.file)
    ext = _read_extension(args.extension, net) if args.extension else None
    t0 = time.perf_counter()
    rep = apd_report(
        net,
        _taxa(args.taxa),
        engine=args.engine,
        extension=ext,
        numeric="float" if args.float else "exact",
    )
    dt = time.perf_counter() - t0
    doc = {
        "value": _exact(rep.value),
        "decimal": _decimal(rep.value),
        "engine": rep.engine,
        "seconds": round(dt, 6),
    }
    if rep.width is not None:
        doc["width"] = rep.width
    lines = [_exact(rep.value), _decimal(rep.value), f"engine: {rep.engine}", f"time: {dt:.4f}s"]
    _emit(args, doc, lines)
    return 0


def cmd_gamma(args) -> int:
    net = _load(args.file)
    if args.edge_index is not None:
        idx = args.edge_index
    else:
        if not args.edge or "," not in args.edge:
            raise InputError("--edge needs the form tail,head")
        u, v = args.edge.split(",", 1)
        found = net.find_edges(u.strip(), v.strip())
        if not found:
            raise InputError(f"no edge {args.edge}")
        if len(found) > 1:
            raise InputError(f"parallel edges {found}; pick one with --edge-index")
        idx = found[0]
    value = gamma(net, idx, _taxa(args.taxa))
    doc = {"edge": net.edge_name(idx), "value": str(value), "decimal": _decimal(value)}
    _emit(args, doc, [str(value), _decimal(value)])
    return 0


def cmd_scanwidth(args) -> int:
    net = _load(args.file)
    if args.heuristic:
        ext, w = scanwidth_heuristic(net)
        method = "heuristic"
    else:
        ext, w = scanwidth_exact(net, node_budget=args.budget)
        method = "exact"
    if args.emit_extension:
        with open(args.emit_extension, "w", encoding="utf-8") as fh:
            fh.write(ext.to_json(net) + "\n")
    doc = {"width": w, "method": method, "parent": list(ext.parent)}
    _emit(args, doc, [str(w)])
    return 0


def cmd_maximize(args) -> int:
    net = _load(args.file)
    solve = max_apd_greedy if args.greedy else max_apd_exact
    best, value = solve(net, args.k, engine=args.engine)
    names = sorted(best)
    doc = {
        "taxa": names,
        "value": str(value),
        "decimal": _decimal(value),
        "method": "greedy" if args.greedy else "exact",
    }
    _emit(args, doc, [",".join(names), str(value), _decimal(value)])
    return 0


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def cmd_gen(args) -> int:
    seed = args.seed
    if args.kind == "tree":
        net = generate.random_tree(seed, args.leaves)
    elif args.kind == "level1":
        net = generate.level1_network(seed, args.cycles, args.leaves)
    elif args.kind == "random":
        net = generate.random_network(
            seed, args.max_nodes, args.max_retics, tree_child=args.tree_child
        )
    else:
        nap = generate.random_nap(seed, args.leaves)
        inst = construct_hardness_instance(nap)
        prefix = args.output or "nap_reduction"
        meta = {
            "k": inst.k,
            "D": str(inst.D),
            "M": str(inst.M),
            "source": {
                "tree": emit_enewick(nap.tree),
                "survival": {x: str(p) for x, p in sorted(nap.survival.items())},
                "k": nap.k,
                "D": str(nap.D),
                "seed": seed,
            },
        }
        _write(prefix + ".json", emit_json(inst.net))
        _write(prefix + ".enewick", emit_enewick(inst.net))
        _write(prefix + ".meta.json", json.dumps(meta, sort_keys=True, indent=1))
        doc = {"files": [prefix + s for s in (".json", ".enewick", ".meta.json")], **meta}
        _emit(args, doc, doc["files"])
        return 0
    text = emit_enewick(net) if args.format == "enewick" else emit_json(net)
    if args.output:
        _write(args.output, text)
    else:
        print(text)
    return 0


def _selftest_one(seed: int, max_retics: int):
    """Compare every applicable engine on one random network."""
    from .decomp import apd_decomposed
    from .network import is_reticulation_visible
    from .rv import apd_rv
    from .swdp import run_dp
    from .switching import apd_bruteforce

    net = generate.random_network(seed, 14, max_retics, tree_child=seed % 4 == 0)
    values = {
        "brute": apd_bruteforce(net),
        "swdp": run_dp(net),
        "decomp": apd_decomposed(net),
    }
    if is_reticulation_visible(net):
        values["rv"] = apd_rv(net)
    ok = len(set(values.values())) == 1
    return seed, ok, {k: str(v) for k, v in values.items()}


def cmd_selftest(args) -> int:
    seeds = range(args.seed, args.seed + args.n_random)
    t0 = time.perf_counter()
    if args.threads > 1:
        with ProcessPoolExecutor(args.threads) as pool:
            results = list(pool.map(_selftest_one, seeds, [args.max_retics] * len(seeds)))
    else:
        results = [_selftest_one(s, args.max_retics) for s in seeds]
    bad = [(s, v) for s, ok, v in results if not ok]
    dt = time.perf_counter() - t0
    doc = {
        "networks": len(results),
        "disagreements": [{"seed": s, "values": v} for s, v in bad],
        "seconds": round(dt, 3),
    }
    lines = [f"{len(results)} networks, {len(bad)} disagreements, {dt:.2f}s"]
    lines += [f"seed {s}: {v}" for s, v in bad]
    _emit(args, doc, lines)
    return 0 if not bad else EXIT_DISAGREE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=int, default=1, help="worker processes (selftest)")

    p = argparse.ArgumentParser(
        prog="apdkit", description="Average-tree phylogenetic diversity on phylogenetic networks."
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a network file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("apd", parents=[common], help="APD of a taxon set")
    s.add_argument("file")
    s.add_argument("--taxa", help="comma-separated taxa (default: all)")
    s.add_argument("--engine", choices=ENGINES, default="auto")
    s.add_argument("--extension", help="tree-extension JSON for the swdp engine")
    s.add_argument("--float", action="store_true", help="floating-point DP")
    s.set_defaults(func=cmd_apd)

    s = sub.add_parser("gamma", parents=[common], help="routing probability of one edge")
    s.add_argument("file")
    s.add_argument("--edge", help="tail,head (node names or ids)")
    s.add_argument("--edge-index", type=int)
    s.add_argument("--taxa")
    s.set_defaults(func=cmd_gamma)

    s = sub.add_parser("scanwidth", parents=[common], help="tree-extension of small width")
    s.add_argument("file")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="exhaustive search (default)")
    g.add_argument("--heuristic", action="store_true")
    s.add_argument("--budget", type=int, default=20, help="max internal nodes for --exact")
    s.add_argument("--emit-extension", metavar="OUT")
    s.set_defaults(func=cmd_scanwidth)

    s = sub.add_parser("maximize", parents=[common], help="best taxon set of size k")
    s.add_argument("file")
    s.add_argument("-k", type=int, required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="exhaustive (default)")
    g.add_argument("--greedy", action="store_true")
    s.add_argument("--engine", choices=ENGINES, default="auto")
    s.set_defaults(func=cmd_maximize)

    s = sub.add_parser("gen", parents=[common], help="generate instances")
    s.add_argument("kind", choices=["tree", "level1", "random", "nap-reduction"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--leaves", type=int, default=4)
    s.add_argument("--cycles", type=int, default=2)
    s.add_argument("--max-nodes", type=int, default=14)
    s.add_argument("--max-retics", type=int, default=5)
    s.add_argument("--tree-child", action="store_true")
    s.add_argument("--format", choices=["json", "enewick"], default="json")
    s.add_argument("-o", "--output", help="output file (prefix for nap-reduction)")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("selftest", parents=[common], help="cross-engine agreement check")
    s.add_argument("--n-random", type=int, default=500)
    s.add_argument("--max-retics", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ApdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except RecursionError:
        print("error: input nesting too deep", file=sys.stderr)
        return InputError.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


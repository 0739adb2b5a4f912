"""Command line entry point: ``hypermap <subcommand> ...``.

Every output starts with a provenance header (tool version, subcommand,
full argument set, seed). Nothing in the output depends on the clock, so
two runs with the same arguments write identical bytes. Validation
problems exit with status 2.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .graph import giant_subgraph

log = logging.getLogger("hypermap")


class UsageError(ValueError):
    pass


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _pairs(text):
    if text == "all":
        return "all"
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("pairs must be 'all' or a positive integer") from None
    if m <= 0:
        raise argparse.ArgumentTypeError("pairs must be positive")
    return m


ALL_PAIRS_LIMIT = 5000
DEFAULT_SAMPLE = 100_000


def _pair_spec(pairs, n):
    """``None`` means all pairs up to ALL_PAIRS_LIMIT nodes and a 10^5 sample above."""
    if pairs is None:
        return "all" if n <= ALL_PAIRS_LIMIT else DEFAULT_SAMPLE
    if pairs == "all" and n > ALL_PAIRS_LIMIT:
        raise UsageError(f"all-pairs mode is limited to {ALL_PAIRS_LIMIT} nodes; give --pairs M")
    return pairs


def _args_dict(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "log_level")}


def _emit_json(args, payload: dict) -> None:
    doc = {"header": {"tool": "hypermap", "version": io.__version__, "command": args.command,
                      "args": _args_dict(args), "seed": args.seed}}
    doc.update(payload)
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    _write(args.out, text)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit_csv(args, columns, rows, extra_header=()) -> None:
    lines = io.header_lines(args.command, _args_dict(args), args.seed) + list(extra_header)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _write(args.out, "\n".join(lines) + "\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        io.write_text(path, text)


def _rng(args):
    return np.random.default_rng(args.seed)


def _load_graph(path):
    g = io.parse_edge_list(path)
    if g.dropped_self_loops or g.dropped_duplicates:
        log.warning("%s: dropped %d self-loop(s) and %d duplicate edge(s)", path,
                    g.dropped_self_loops, g.dropped_duplicates)
    if g.n == 0:
        raise UsageError(f"{path}: no edges")
    return g


def _load_map(path):
    emap, _ = io.read_map(path)
    return emap


def _routing_graph(g, emap):
    """The part of ``g`` covered by the map."""
    covered = np.isin(g.nodes, emap.nodes)
    if not covered.all():
        log.info("routing on the %d of %d nodes present in the map", int(covered.sum()), g.n)
        g = g.induced_subgraph(g.nodes[covered])
    return g


# -- subcommands ------------------------------------------------------------------------
def cmd_generate(args):
    from .embedder import INITIAL_GUESS, EmbeddedMap
    from .generator import generate_h2, generate_s1, s1_to_h2
    from .geometry import ModelParams, radius_to_kappa

    if args.model == "s1":
        if args.beta is None:
            raise UsageError("--beta is required for the s1 model")
        net = s1_to_h2(generate_s1(args.n, args.k_bar, args.gamma, args.beta, args.seed))
        params, kappa = net.params, net.kappa
    else:
        if args.temperature is None:
            raise UsageError("--temperature is required for the h2 model")
        if not 0 < args.temperature < 1:
            raise UsageError("--temperature must lie in (0, 1) when writing a map")
        net = generate_h2(args.n, args.k_bar, args.gamma, args.temperature, args.seed)
        params = ModelParams(args.n, args.k_bar, args.gamma, 1.0 / args.temperature)
        kappa = radius_to_kappa(net.r, params)
    header = io.header_lines("generate", _args_dict(args), args.seed)
    io.write_edge_list(args.out + ".edges", net.topology, header)
    truth = EmbeddedMap(params, net.topology.nodes, kappa, net.theta,
                        np.full(net.topology.n, INITIAL_GUESS, np.int8))
    io.write_map(args.out + ".map", truth, header)
    log.info("wrote %s.edges (%d nodes, %d edges) and %s.map", args.out, net.topology.n,
             net.topology.edge_count, args.out)


def cmd_estimate(args):
    from .graph import compute_stats
    from .params import estimate_beta, estimate_gamma, solve_finite_size

    g = _load_graph(args.edges)
    stats = compute_stats(g, fit_gamma=False)
    gamma = args.gamma if args.gamma is not None else estimate_gamma(g.degrees, k_min_fit=args.k_min_fit)
    fs = solve_finite_size(stats.n_obs, stats.k_bar_obs, stats.k_max_obs, gamma)
    payload = {"observed": {"n_obs": stats.n_obs, "k_bar_obs": stats.k_bar_obs, "k_max_obs": stats.k_max_obs,
                            "mean_clustering": stats.mean_clustering},
               "gamma": gamma, "finite_size": fs.as_dict()}
    if args.beta_grid:
        beta, diag = estimate_beta(g, args.beta_grid, gamma=gamma, seed=args.seed,
                                   route_pairs=args.route_pairs)
        payload["beta"] = beta
        payload["beta_diagnostics"] = [{"beta": b, "clustering": c, "success_ratio": p}
                                       for b, c, p in diag.rows]
    _emit_json(args, payload)


def cmd_embed(args):
    from .embedder import LayerSchedule, embed_topology

    g = _load_graph(args.edges)
    core = giant_subgraph(g)
    if core.n < g.n:
        log.warning("embedding the giant component only (%d of %d nodes)", core.n, g.n)
    schedule = None
    if args.thresholds:
        crit = args.critical_k if args.critical_k in args.thresholds else args.thresholds[0]
        schedule = LayerSchedule(tuple(args.thresholds), crit)
    emap, fs = embed_topology(core, args.beta, _rng(args), gamma=args.gamma, kernel=args.kernel,
                              critical_threshold=args.critical_k, schedule=schedule)
    io.write_map(args.out, emap, io.header_lines("embed", _args_dict(args), args.seed))


def cmd_route(args):
    from .router import evaluate_routing

    g = _load_graph(args.edges)
    emap = _load_map(args.map)
    g = _routing_graph(g, emap)
    report = evaluate_routing(g, emap, _pair_spec(args.pairs, g.n), _rng(args))
    _emit_json(args, {"report": report.as_dict()})


def cmd_perturb(args):
    from .router import robustness_sweep

    g = _load_graph(args.edges)
    emap = _load_map(args.map)
    g = _routing_graph(g, emap)
    levels = args.levels
    if args.kind == "top-hubs":
        levels = [int(x) for x in levels]
    sweep = robustness_sweep(g, emap, args.kind, levels, _rng(args), pairs=args.pairs)
    cols = ["level", "success_ratio", "mean_stretch", "mean_shortest_hops", "mean_greedy_hops",
            "pairs_evaluated", "pairs_skipped_unreachable", "giant_fraction"]
    rows = [[p.level, p.report.success_ratio, p.report.mean_stretch, p.report.mean_shortest_hops,
             p.report.mean_greedy_hops, p.report.pairs_evaluated, p.report.pairs_skipped_unreachable,
             p.giant_fraction] for p in sweep]
    _emit_csv(args, cols, rows)


def cmd_grow(args):
    from .embedder import embed_topology
    from .router import growth_replay

    g = _load_graph(args.edges)
    snaps = io.read_snapshots(args.snapshots, final_nodes=g.nodes)
    rng = _rng(args)
    embed_rng = np.random.default_rng(rng.integers(0, 2**63 - 1))

    def embed(h):
        return embed_topology(h, args.beta, embed_rng, gamma=args.gamma, kernel=args.kernel,
                              critical_threshold=args.critical_k)[0]

    steps, _ = growth_replay(snaps, g, embed, rng, pairs=args.pairs)
    cols = ["step", "nodes", "new_nodes", "success_ratio", "mean_stretch", "pairs_evaluated"]
    rows = [[s.step, s.nodes, s.new_nodes, s.report.success_ratio, s.report.mean_stretch,
             s.report.pairs_evaluated] for s in steps]
    _emit_csv(args, cols, rows)


def cmd_geo_route(args):
    from .router import geographic_route_eval

    g = _load_graph(args.edges)
    geo = io.read_geo(args.geo)
    if not geo:
        raise UsageError(f"{args.geo}: no coordinates")
    geo = {k: (c.lat, c.lon) for k, c in geo.items()}
    report = geographic_route_eval(g, geo, args.mode, _pair_spec(args.pairs, g.n), _rng(args))
    _emit_json(args, {"report": report.as_dict(), "mode": args.mode})


def cmd_betweenness(args):
    from .router import betweenness, router_count_proxy

    g = _load_graph(args.edges)
    emap = None
    if args.mode == "greedy":
        if not args.map:
            raise UsageError("--map is required for greedy betweenness")
        emap = _load_map(args.map)
        g = _routing_graph(g, emap)
    counts = None
    extra = []
    if args.weighting == "router":
        rc = io.read_router_counts(args.router_counts) if args.router_counts else {}
        if not rc and args.router_counts:
            log.warning("%s holds no router counts; using the degree proxy", args.router_counts)
        if rc:
            missing = [int(v) for v in g.nodes if int(v) not in rc]
            if missing:
                raise UsageError(f"router counts missing for {len(missing)} node(s), e.g. {missing[:10]}")
            counts = np.array([rc[int(v)] for v in g.nodes])
        else:
            counts = router_count_proxy(g.degrees)
            extra.append("# router_counts proxy ceil(degree/2)")
    pairs = _pair_spec(args.pairs, g.n)
    if args.weighting == "router" and pairs == "all":
        pairs = DEFAULT_SAMPLE
    table = betweenness(g, emap, args.mode, args.weighting, pairs, counts, _rng(args))
    deg = g.degrees
    cols = ["node", "degree", "betweenness", "per_router"]
    pr = table.per_router
    rows = [[int(v), int(deg[a]), float(table.values[a]), float(pr[a])] for a, v in enumerate(table.nodes)]
    _emit_csv(args, cols, rows, extra + [f"# paths {table.paths}"])


# -- parser -------------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypermap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--log-level", default="WARNING")
        sp.set_defaults(func=func)
        return sp

    sp = add("generate", cmd_generate, "synthetic S1 or H2 network plus its true map")
    sp.add_argument("--model", choices=("s1", "h2"), required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k-bar", type=float, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--temperature", type=float)
    sp.add_argument("--out", required=True, help="output prefix (.edges and .map are appended)")

    sp = add("estimate", cmd_estimate, "degree exponent and finite-size model parameters")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--k-min-fit", type=int, default=5)
    sp.add_argument("--beta-grid", type=_float_list)
    sp.add_argument("--route-pairs", type=int, default=2000)
    sp.add_argument("--out", default="-")

    sp = add("embed", cmd_embed, "infer a hyperbolic map")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--kernel", choices=("smh", "lmh"), default="smh")
    sp.add_argument("--critical-k", type=int, default=20)
    sp.add_argument("--thresholds", type=_int_list)
    sp.add_argument("--out", required=True)

    sp = add("route", cmd_route, "greedy routing success ratio and stretch")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--map", required=True)
    sp.add_argument("--pairs", type=_pairs, help="'all' or a sample size (default: all up to 5000 nodes)")
    sp.add_argument("--out", default="-")

    sp = add("perturb", cmd_perturb, "routing on damaged graphs with a fixed map")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--map", required=True)
    sp.add_argument("--kind", choices=("random-links", "random-nodes", "top-hubs", "ranked-links"),
                    required=True)
    sp.add_argument("--levels", type=_float_list, required=True)
    sp.add_argument("--pairs", type=_pairs, default=10_000)
    sp.add_argument("--out", default="-")

    sp = add("grow", cmd_grow, "replay network growth with incremental embedding")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--snapshots", nargs="+", required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--kernel", choices=("smh", "lmh"), default="smh")
    sp.add_argument("--critical-k", type=int, default=20)
    sp.add_argument("--pairs", type=_pairs, default=10_000)
    sp.add_argument("--out", default="-")

    sp = add("geo-route", cmd_geo_route, "greedy routing on geographic coordinates")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--geo", required=True)
    sp.add_argument("--mode", choices=("spherical", "hyperbolized"), default="spherical")
    sp.add_argument("--pairs", type=_pairs, help="'all' or a sample size (default: all up to 5000 nodes)")
    sp.add_argument("--out", default="-")

    sp = add("betweenness", cmd_betweenness, "path-count betweenness from shortest or greedy paths")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--map")
    sp.add_argument("--mode", choices=("shortest", "greedy"), default="shortest")
    sp.add_argument("--weighting", choices=("uniform", "router"), default="uniform")
    sp.add_argument("--router-counts")
    sp.add_argument("--pairs", type=_pairs, help="'all' or a sample size (default: all up to 5000 nodes)")
    sp.add_argument("--out", default="-")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"hypermap {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

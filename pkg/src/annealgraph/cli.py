"""annealgraph command line: generate | build | solve | experiment.

Exit codes: 0 success, 1 configuration error, 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import io as fio
from .builders import (build_bisection_ising, build_ch_qubo, build_clique_kfixed_qubo, build_kway_qubo,
                       build_mis_qubo)
from .chimera import ChimeraSpec, chimera_graph, contract_random_edges, degrade
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run_experiment
from .graph import complement, random_graph
from .maxclique import exact_clique, greedy_clique, sa_clique, split_solve
from .model import ising_to_qubo
from .solvers import AnnealSchedule, anneal_flip, brute_force, local_search, tabu_decompose

EXIT_CONFIG = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _shared(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reads", type=int, default=1, help="number of solution attempts")
    p.add_argument("--target", type=float, default=None, help="stop once this energy is reached")
    p.add_argument("--timeout", type=float, default=None, help="seconds")
    p.add_argument("--subproblem-size", type=int, default=47)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="annealgraph", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a graph file")
    g.add_argument("kind", choices=["random", "chimera", "cm"])
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--format", choices=["edgelist", "dimacs"], default="edgelist")
    g.add_argument("--n", type=int, default=45)
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--chimera", type=int, nargs=3, metavar=("M", "N", "L"), default=(12, 12, 4))
    g.add_argument("--remove", type=int, default=0, help="qubits to drop at random")
    g.add_argument("--m", type=int, default=1, help="edge contractions for cm")
    g.add_argument("--embedding", help="cm only: also write the contraction embedding here")
    g.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("build", help="encode a graph problem as a .qubo file")
    b.add_argument("problem", choices=["mis", "clique", "clique-k", "bisection", "kway", "ch"])
    b.add_argument("graph")
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--format", choices=["edgelist", "dimacs"], default="edgelist")
    b.add_argument("--K", type=int, default=2, help="parts, or clique size for clique-k")

    s = sub.add_parser("solve", help="minimize a .qubo file, or find a maximum clique with --clique")
    s.add_argument("input")
    s.add_argument("--solver", default=None,
                   help="qubo: brute|anneal|tabu|local (default tabu); clique: exact|greedy|sa|split (default split)")
    s.add_argument("--clique", action="store_true", help="input is a graph file")
    s.add_argument("--format", choices=["edgelist", "dimacs"], default="edgelist")
    s.add_argument("--t-max", type=int, default=10000)
    s.add_argument("--alpha", type=float, default=0.9996)
    s.add_argument("--size-limit", type=int, default=45)
    s.add_argument("-o", "--output", help="write the JSON result here instead of stdout")
    _shared(s)

    e = sub.add_parser("experiment", help="run a seeded experiment; writes CSV + JSON")
    e.add_argument("name", choices=EXPERIMENTS)
    e.add_argument("--config", help="JSON file with ExperimentConfig fields")
    e.add_argument("--out", default=None, help="output directory")
    e.add_argument("--seeds", type=int, nargs="+", default=None)
    e.add_argument("--workers", type=int, default=None)
    e.add_argument("--n", type=int, nargs="+", default=None)
    e.add_argument("--p", type=float, nargs="+", default=None)
    e.add_argument("--alphas", type=float, nargs="+", default=None)
    e.add_argument("--t-max", type=int, default=None)
    e.add_argument("--size-limit", type=int, default=None)
    e.add_argument("--chain-strengths", type=float, nargs="+", default=None)
    e.add_argument("--subproblem-size", type=int, default=None)
    return ap


def _cmd_generate(a):
    if a.kind == "random":
        g = random_graph(a.n, a.p, a.seed)
    else:
        spec = ChimeraSpec(*a.chimera)
        if a.remove:
            spec = degrade(spec, a.remove, a.seed)
        if a.kind == "chimera":
            g = chimera_graph(spec)
        else:
            g, emb = contract_random_edges(spec, a.m, a.seed)
            if a.embedding:
                fio.save_embedding(emb, a.embedding)
    fio.save_graph(g, a.output, a.format)
    print(f"wrote {a.output}: n={g.n} m={g.num_edges}")


def _cmd_build(a):
    g = fio.load_graph(a.graph, a.format)
    if a.problem == "mis":
        q = build_mis_qubo(g)
    elif a.problem == "clique":
        q = build_mis_qubo(complement(g))
    elif a.problem == "clique-k":
        q = build_clique_kfixed_qubo(g, a.K)
    elif a.problem == "bisection":
        q = ising_to_qubo(build_bisection_ising(g))
    elif a.problem == "kway":
        q, _ = build_kway_qubo(g, a.K)
    else:
        q, _ = build_ch_qubo(g, a.K)
    fio.write_qubo_file(q, a.output)
    print(f"wrote {a.output}: {q.n} variables, {len(q.quadratic)} couplers")


def _solve_qubo(a):
    q = fio.load_qubo_file(a.input)
    solver = a.solver or "tabu"
    if solver == "brute":
        res = brute_force(q)
    elif solver == "anneal":
        sched = AnnealSchedule(a.t_max, "geometric", alpha=1e-3 ** (1 / max(a.t_max, 1)))
        res = anneal_flip(q, sched, seed=a.seed, reads=a.reads)
    elif solver == "tabu":
        res = tabu_decompose(q, subproblem_size=a.subproblem_size, attempts=max(a.reads, 1),
                             target=a.target, timeout=a.timeout, seed=a.seed)
    elif solver == "local":
        import random
        rng = random.Random(a.seed)
        x0 = [rng.randint(0, 1) for _ in range(q.n)]
        x = local_search(q, x0)
        return {"energy": q.energy(x), "assignment": [int(v) for v in x], "stats": {}}
    else:
        raise ConfigError(f"unknown qubo solver {solver!r}")
    best = res.best
    stats = {k: v for k, v in res.stats.items() if isinstance(v, (int, float, str, type(None)))}
    return {"energy": best.energy, "assignment": [int(v) for v in best.assignment], "stats": stats}


def _solve_clique(a):
    g = fio.load_graph(a.input, a.format)
    solver = a.solver or "split"
    if solver == "exact":
        r = exact_clique(g, max_vertices=max(200, g.n))
    elif solver == "greedy":
        r = greedy_clique(g, a.seed)
    elif solver == "sa":
        r = sa_clique(g, a.alpha, seed=a.seed)
    elif solver == "split":
        r = split_solve(g, a.size_limit)
    else:
        raise ConfigError(f"unknown clique solver {solver!r}")
    return {"size": r.size, "vertices": list(r.vertices),
            "stats": {k: v for k, v in r.stats.items() if isinstance(v, (int, float, str, type(None)))}}


def _cmd_solve(a):
    out = _solve_clique(a) if a.clique else _solve_qubo(a)
    text = json.dumps(out, sort_keys=True)
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_experiment(a):
    d = {}
    if a.config:
        with open(a.config, encoding="utf-8") as fh:
            d = json.load(fh)
        if not isinstance(d, dict):
            raise ConfigError("config file must hold a JSON object")
    d["name"] = a.name
    overrides = {
        "out_dir": a.out, "seeds": a.seeds, "workers": a.workers, "n": a.n, "p": a.p, "alphas": a.alphas,
        "t_max": a.t_max, "size_limit": a.size_limit, "chain_strengths": a.chain_strengths,
        "subproblem_size": a.subproblem_size,
    }
    d.update({k: v for k, v in overrides.items() if v is not None})
    res = run_experiment(ExperimentConfig.from_dict(d))
    for kind, path in res["paths"].items():
        print(f"{kind}: {path}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"generate": _cmd_generate, "build": _cmd_build, "solve": _cmd_solve,
               "experiment": _cmd_experiment}[args.command]
    try:
        handler(args)
    except (OSError, fio.ParseError, json.JSONDecodeError) as exc:
        print(f"annealgraph: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"annealgraph: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Seeded experiment drivers that emit plot-ready CSV rows and a JSON summary.

Every experiment is split into independent tasks (one per instance and
seed). Tasks may run in worker processes; rows are assembled in task
order, so the CSV depends only on the config. Wall-clock time goes to a
separate ``*_timing.csv`` file to keep the main CSV byte-reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .builders import (Partition, build_bisection_ising, build_kway_qubo, build_mis_qubo, decode_kway,
                       decode_mis, partition_to_spins, spins_to_partition)
from .chimera import ChimeraSpec, chimera_graph, contract_random_edges, embed_model, unembed
from .graph import Graph, complement, empty_graph, random_graph
from .maxclique import exact_clique, greedy_clique, sa_clique, size_limit_for_qubits, split_solve
from .model import as_ising
from .partition import (ch_cost, edge_cut, multilevel_partition, optimal_balanced_cut, optimal_ch_cost,
                        random_partition, refine_ch_sa)
from .solvers import AnnealSchedule, anneal_flip, anneal_swap_ising, brute_force, local_search, tabu_decompose


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    n: list = field(default_factory=list)
    p: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    t_max: int | None = None
    subproblem_size: int | None = None
    chain_strengths: list = field(default_factory=list)
    size_limit: int | None = None
    m_values: list = field(default_factory=list)
    chimera: tuple | None = None
    K: int | None = None
    sa_restarts: int | None = None
    generations: int | None = None
    base_qubits: int | None = None
    base_limit: int | None = None
    reads: int | None = None
    out_dir: str = "results"
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "name" not in d:
            raise ConfigError("config needs a 'name'")
        cfg = cls(**d)
        if cfg.chimera is not None:
            cfg.chimera = tuple(cfg.chimera)
        return cfg


# defaults per experiment; None-valued fields of a config are filled from here
DEFAULTS = {
    "table1-clique": dict(n=[45], p=[0.3, 0.5, 0.7, 0.9], seeds=list(range(10)), alphas=[0.9996],
                          sa_restarts=10),
    "density-calls": dict(n=[500], p=[0.1, 0.2, 0.3, 0.4], seeds=list(range(10)), size_limit=45),
    "qubit-scaling": dict(n=[500], p=[0.3], seeds=list(range(3)), generations=7, base_qubits=1152,
                          base_limit=45),
    "cm-quality": dict(chimera=(4, 4, 4), m_values=[8, 16, 32, 64], seeds=list(range(10)),
                       alphas=[0.9, 0.99, 0.999, 0.9996]),
    "chain-histogram": dict(chimera=(2, 2, 4), m_values=[8], seeds=list(range(20)),
                            chain_strengths=[0.0, 0.5, 1.0, 2.0], t_max=4000, reads=1),
    "ec-partition": dict(n=list(range(6, 15)), p=[0.9], seeds=list(range(5)), K=2, t_max=2000,
                         subproblem_size=47),
    "ch-partition": dict(n=list(range(4, 9)), p=[0.9], seeds=list(range(5)), K=2, t_max=None),
}

EXPERIMENTS = tuple(DEFAULTS)


def resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill defaults and validate; raises ConfigError before anything runs."""
    if cfg.name not in DEFAULTS:
        raise ConfigError(f"unknown experiment {cfg.name!r}; choose from {', '.join(EXPERIMENTS)}")
    d = asdict(cfg)
    for key, val in DEFAULTS[cfg.name].items():
        if d[key] is None or d[key] == []:
            d[key] = val
    out = ExperimentConfig(**d)
    if out.chimera is not None:
        out.chimera = tuple(int(v) for v in out.chimera)
        if len(out.chimera) != 3 or min(out.chimera) < 1:
            raise ConfigError("chimera must be (M, N, L) with positive entries")
    if not out.seeds:
        raise ConfigError("at least one seed is required")
    for p in out.p:
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"edge probability {p} outside [0, 1]")
    for a in out.alphas:
        if not 0.0 < a < 1.0:
            raise ConfigError(f"alpha {a} outside (0, 1)")
    for s in out.chain_strengths:
        if s < 0:
            raise ConfigError("chain strengths are magnitudes and must be >= 0")
    if out.workers < 1:
        raise ConfigError("workers must be >= 1")
    if out.name in ("ec-partition", "ch-partition") and (out.K is None or out.K < 2):
        raise ConfigError("partition experiments need K >= 2")
    return out


# ---------------------------------------------------------------------------
# rows
# ---------------------------------------------------------------------------

COLUMNS = ("experiment", "instance", "solver", "seed", "objective", "feasible", "stats")


def _row(exp, instance, solver, seed, objective, feasible, **stats):
    return {
        "experiment": exp,
        "instance": instance,
        "solver": solver,
        "seed": seed,
        "objective": objective,
        "feasible": bool(feasible),
        "stats": stats,
    }


def _gname(n, p, seed):
    return f"G({n},{p},{seed})"


def parse_instance(name: str) -> Graph:
    """Rebuild a graph from its instance label (G(n,p,seed) or C(M,N,L;m,seed))."""
    kind, args = name[0], name[2:-1]
    if kind == "G":
        n, p, seed = args.split(",")
        return random_graph(int(n), float(p), int(seed))
    if kind == "C":
        dims, rest = args.split(";")
        M, N, L = (int(t) for t in dims.split(","))
        m, seed = (int(t) for t in rest.split(","))
        return contract_random_edges(ChimeraSpec(M, N, L), m, seed)[0]
    raise ValueError(f"unrecognized instance label {name!r}")


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------

def _tasks(cfg: ExperimentConfig) -> list[dict]:
    name = cfg.name
    if name in ("table1-clique", "density-calls"):
        return [dict(n=n, p=p, seed=s) for n in cfg.n for p in cfg.p for s in cfg.seeds]
    if name == "qubit-scaling":
        return [dict(generation=gen, n=n, p=p, seed=s)
                for gen in range(cfg.generations + 1) for n in cfg.n for p in cfg.p for s in cfg.seeds]
    if name in ("cm-quality", "chain-histogram"):
        return [dict(m=m, seed=s) for m in cfg.m_values for s in cfg.seeds]
    if name in ("ec-partition", "ch-partition"):
        return [dict(n=n, p=p, seed=s) for n in cfg.n for p in cfg.p for s in cfg.seeds]
    raise ConfigError(name)


def _run_table1(cfg, n, p, seed):
    g = random_graph(n, p, seed)
    inst = _gname(n, p, seed)
    ex = exact_clique(g)
    rows = [_row(cfg.name, inst, "exact", seed, ex.size, True, witness=list(ex.vertices),
                 branch_nodes=ex.stats["branch_nodes"])]
    gr = greedy_clique(g, seed)
    rows.append(_row(cfg.name, inst, "greedy", seed, gr.size, True, witness=list(gr.vertices)))
    for alpha in cfg.alphas:
        runs = [sa_clique(g, alpha, seed=1000 * seed + r) for r in range(cfg.sa_restarts)]
        best = max(runs, key=lambda r: r.size)
        rows.append(_row(cfg.name, inst, f"sa-clique@{alpha}", seed, best.size, True,
                         witness=list(best.vertices), restarts=cfg.sa_restarts,
                         steps=sum(r.stats["steps"] for r in runs), matches_exact=best.size == ex.size))
    return rows


def _run_density(cfg, n, p, seed):
    g = random_graph(n, p, seed)
    r = split_solve(g, cfg.size_limit)
    return [_row(cfg.name, _gname(n, p, seed), f"split@{cfg.size_limit}", seed, r.size, True,
                 witness=list(r.vertices), solver_calls=r.stats["solver_calls"],
                 branch_nodes=r.stats["branch_nodes"])]


def _run_scaling(cfg, generation, n, p, seed):
    qubits = cfg.base_qubits * 2 ** generation
    limit = math.floor(cfg.base_limit * math.sqrt(2) ** generation)
    g = random_graph(n, p, seed)
    r = split_solve(g, max(limit, 2))
    return [_row(cfg.name, _gname(n, p, seed), f"split@gen{generation}", seed, r.size, True,
                 witness=list(r.vertices), generation=generation, qubits=qubits,
                 limit_4m1=size_limit_for_qubits(qubits), size_limit=limit,
                 solver_calls=r.stats["solver_calls"])]


def _cm_instance(cfg, m, seed):
    M, N, L = cfg.chimera
    inst = f"C({M},{N},{L};{m},{seed})"
    g, e = contract_random_edges(ChimeraSpec(M, N, L), m, seed)
    return inst, g, e


def _run_cm(cfg, m, seed):
    inst, g, _ = _cm_instance(cfg, m, seed)
    h = complement(g)
    ex = exact_clique(h, max_vertices=max(200, h.n))
    rows = [_row(cfg.name, inst, "exact", seed, ex.size, True, witness=list(ex.vertices))]
    gr = greedy_clique(h, seed)
    rows.append(_row(cfg.name, inst, "greedy", seed, gr.size, True, witness=list(gr.vertices)))
    # PPHa: greedy descent on the MIS QUBO from a random start
    q = build_mis_qubo(g)
    x0 = np.random.default_rng(seed).integers(0, 2, size=g.n)
    x = local_search(q, x0)
    mis, ok = decode_mis(g, x)
    rows.append(_row(cfg.name, inst, "ppha", seed, len(mis), ok, witness=sorted(mis)))
    # speedup protocol: escalate alpha until SA-clique matches the reference
    matched_at = None
    for alpha in cfg.alphas:
        r = sa_clique(h, alpha, seed=seed)
        hit = r.size >= ex.size
        if hit and matched_at is None:
            matched_at = alpha
        rows.append(_row(cfg.name, inst, f"sa-clique@{alpha}", seed, r.size, True,
                         witness=list(r.vertices), steps=r.stats["steps"], matches_reference=hit))
    rows.append(_row(cfg.name, inst, "alpha-escalation", seed, matched_at if matched_at is not None else "",
                     matched_at is not None, reference=ex.size))
    return rows


def _run_chain(cfg, m, seed):
    inst, g, e = _cm_instance(cfg, m, seed)
    M, N, L = cfg.chimera
    physical = chimera_graph(ChimeraSpec(M, N, L))
    logical = as_ising(build_mis_qubo(g))
    rows = []
    gr = greedy_clique(complement(g), seed)
    rows.append(_row(cfg.name, inst, "greedy", seed, gr.size, True, witness=list(gr.vertices)))
    for cs in cfg.chain_strengths:
        phys = embed_model(logical, e, cs, physical)
        sched = AnnealSchedule(cfg.t_max, "geometric", alpha=_alpha_for(cfg.t_max))
        res = anneal_flip(phys, sched, seed=seed, reads=cfg.reads)
        lres = unembed(res, e, "majority_vote", logical)
        best = lres.best
        mis, ok = decode_mis(g, (best.assignment + 1) // 2)
        broken = lres.stats["broken_chains"]
        rate = float(np.mean(broken)) / len(e.chains)
        rows.append(_row(cfg.name, inst, f"anneal@cs{cs}", seed, len(mis), ok, witness=sorted(mis),
                         chain_strength=cs, broken_chains=broken[lres.best_index],
                         broken_rate=rate, chains=len(e.chains)))
    return rows


def _alpha_for(t_max, ratio=1e-3):
    """Geometric factor cooling by ``ratio`` over ``t_max`` steps."""
    return ratio ** (1.0 / max(t_max, 1))


def _run_ec(cfg, n, p, seed):
    g = random_graph(n, p, seed)
    inst = _gname(n, p, seed)
    K = cfg.K
    opt, _ = optimal_balanced_cut(g, K)
    rows = [_row(cfg.name, inst, "enumeration", seed, opt, True)]
    if K == 2:
        bf = brute_force(build_bisection_ising(g))
        pb = spins_to_partition(bf.best.assignment)
        rows.append(_row(cfg.name, inst, "brute-force", seed, edge_cut(g, pb), pb.is_balanced(),
                         assignment=list(pb.assignment)))
    mp = multilevel_partition(g, K, seed=seed)
    rows.append(_row(cfg.name, inst, "multilevel", seed, edge_cut(g, mp), mp.is_balanced(),
                     assignment=list(mp.assignment)))
    if K == 2:
        # pad odd graphs with an isolated vertex so the swap moves stay balanced
        gg = g if n % 2 == 0 else Graph(n + 1, g.edges)
        sw = anneal_swap_ising(build_bisection_ising(gg), cfg.t_max, seed=seed)
        ps = Partition(list(spins_to_partition(sw.best.assignment).assignment[:n]), 2)
        rows.append(_row(cfg.name, inst, "anneal-swap", seed, edge_cut(g, ps), ps.is_balanced(),
                         assignment=list(ps.assignment)))
    q, idx = build_kway_qubo(g, K)
    td = tabu_decompose(q, subproblem_size=cfg.subproblem_size, seed=seed)
    try:
        pt = decode_kway(idx, td.best.assignment)
        rows.append(_row(cfg.name, inst, "tabu-decompose", seed, edge_cut(g, pt), pt.is_balanced(),
                         assignment=list(pt.assignment), calls=td.stats.get("calls")))
    except ValueError:
        rows.append(_row(cfg.name, inst, "tabu-decompose", seed, "", False, calls=td.stats.get("calls")))
    return rows


def _run_ch(cfg, n, p, seed):
    g = random_graph(n, p, seed)
    inst = _gname(n, p, seed)
    K = cfg.K
    opt, _ = optimal_ch_cost(g, K)
    rows = [_row(cfg.name, inst, "enumeration", seed, opt, True)]
    sched = AnnealSchedule(cfg.t_max, "geometric", alpha=_alpha_for(cfg.t_max)) if cfg.t_max else None
    p0 = random_partition(n, K, seed)
    r = refine_ch_sa(g, p0, sched, seed=seed)
    rows.append(_row(cfg.name, inst, "sa-random-start", seed, ch_cost(g, r).total, True,
                     assignment=list(r.assignment), start_cost=ch_cost(g, p0).total,
                     empty_parts=sum(1 for s in r.sizes() if s == 0)))
    mp = multilevel_partition(g, K, seed=seed)
    r2 = refine_ch_sa(g, mp, sched, seed=seed)
    rows.append(_row(cfg.name, inst, "multilevel+sa", seed, ch_cost(g, r2).total, True,
                     assignment=list(r2.assignment), start_cost=ch_cost(g, mp).total,
                     empty_parts=sum(1 for s in r2.sizes() if s == 0)))
    return rows


_RUNNERS = {
    "table1-clique": _run_table1,
    "density-calls": _run_density,
    "qubit-scaling": _run_scaling,
    "cm-quality": _run_cm,
    "chain-histogram": _run_chain,
    "ec-partition": _run_ec,
    "ch-partition": _run_ch,
}


def _execute(args):
    cfg, task = args
    t = time.perf_counter()
    rows = _RUNNERS[cfg.name](cfg, **task)
    return rows, time.perf_counter() - t


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

def _med_sd(vals):
    vals = [float(v) for v in vals]
    return {"median": statistics.median(vals), "stdev": statistics.pstdev(vals), "count": len(vals)}


def _by(rows, key):
    out = {}
    for r in rows:
        out.setdefault(key(r), []).append(r)
    return out


def _graph_p(r):
    return float(r["instance"][2:-1].split(",")[1])


def _graph_n(r):
    return int(r["instance"][2:-1].split(",")[0])


def loglinear_r2(xs, ys) -> float:
    """R^2 of a least-squares line through (x, log y)."""
    x = np.asarray(xs, dtype=float)
    y = np.log(np.asarray(ys, dtype=float))
    if len(x) < 3:
        return 1.0
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    tot = np.sum((y - y.mean()) ** 2)
    return 1.0 if tot == 0 else float(1.0 - np.sum(resid ** 2) / tot)


def _monotone(vals, strict=False):
    pairs = list(zip(vals, vals[1:]))
    return all(b > a for a, b in pairs) if strict else all(b >= a for a, b in pairs)


def summarize(cfg: ExperimentConfig, rows: list[dict]) -> dict:
    name = cfg.name
    out: dict = {"experiment": name, "rows": len(rows)}
    if name == "table1-clique":
        per = {}
        for p, rs in sorted(_by(rows, _graph_p).items()):
            ex = [r["objective"] for r in rs if r["solver"] == "exact"]
            sa = [r for r in rs if r["solver"].startswith("sa-clique")]
            per[str(p)] = {
                "exact": _med_sd(ex),
                "greedy": _med_sd([r["objective"] for r in rs if r["solver"] == "greedy"]),
                "sa_match_rate": sum(r["stats"]["matches_exact"] for r in sa) / max(len(sa), 1),
            }
        out["by_p"] = per
        sa_all = [r for r in rows if r["solver"].startswith("sa-clique")]
        out["sa_match_rate"] = sum(r["stats"]["matches_exact"] for r in sa_all) / max(len(sa_all), 1)
    elif name == "density-calls":
        per = {str(p): _med_sd([r["stats"]["solver_calls"] for r in rs])
               for p, rs in sorted(_by(rows, _graph_p).items())}
        ps = sorted(float(p) for p in per)
        med = [per[str(p)]["median"] for p in ps]
        out.update(by_p=per, strictly_increasing=_monotone(med, strict=True), loglinear_r2=loglinear_r2(ps, med))
    elif name == "qubit-scaling":
        per = {}
        for gen, rs in sorted(_by(rows, lambda r: r["stats"]["generation"]).items()):
            st = rs[0]["stats"]
            per[str(gen)] = {"qubits": st["qubits"], "size_limit": st["size_limit"],
                             "limit_4m1": st["limit_4m1"],
                             "calls": _med_sd([r["stats"]["solver_calls"] for r in rs])}
        out["by_generation"] = per
        reach = [int(g) for g, v in per.items() if v["size_limit"] >= 500]
        out["first_generation_reaching_500"] = min(reach) if reach else None
    elif name == "cm-quality":
        per = {}
        for inst_m, rs in sorted(_by(rows, lambda r: int(r["instance"].split(";")[1].split(",")[0])).items()):
            entry = {}
            for solver, srs in sorted(_by(rs, lambda r: r["solver"]).items()):
                if solver == "alpha-escalation":
                    continue
                entry[solver] = _med_sd([r["objective"] for r in srs])
            per[str(inst_m)] = entry
        out["by_m"] = per
        curve = []
        for alpha in cfg.alphas:
            hits = [r["stats"]["matches_reference"] for r in rows if r["solver"] == f"sa-clique@{alpha}"]
            curve.append({"alpha": alpha, "success_rate": sum(hits) / max(len(hits), 1)})
        out["alpha_curve"] = curve
        out["alpha_curve_monotone"] = _monotone([c["success_rate"] for c in curve])
    elif name == "chain-histogram":
        per = {}
        for cs in cfg.chain_strengths:
            rs = [r for r in rows if r["solver"] == f"anneal@cs{cs}"]
            hist = {}
            for r in rs:
                hist[r["objective"]] = hist.get(r["objective"], 0) + 1
            per[str(cs)] = {"broken_rate": _med_sd([r["stats"]["broken_rate"] for r in rs]),
                            "mis_size": _med_sd([r["objective"] for r in rs]),
                            "histogram": {str(k): v for k, v in sorted(hist.items())}}
        greedy = [r["objective"] for r in rows if r["solver"] == "greedy"]
        hist = {}
        for v in greedy:
            hist[v] = hist.get(v, 0) + 1
        out["greedy"] = {"mis_size": _med_sd(greedy), "histogram": {str(k): v for k, v in sorted(hist.items())}}
        out["by_chain_strength"] = per
    elif name in ("ec-partition", "ch-partition"):
        reference = "enumeration"
        opt = {r["instance"]: r["objective"] for r in rows if r["solver"] == reference}
        per = {}
        for solver, rs in sorted(_by(rows, lambda r: r["solver"]).items()):
            if solver == reference:
                continue
            hit = [r["feasible"] and r["objective"] == opt[r["instance"]] for r in rs]
            per[solver] = {"optimal_rate": sum(hit) / len(hit), "instances": len(hit)}
        out["by_solver"] = per
    return out


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def collect(cfg: ExperimentConfig) -> tuple[list[dict], list[float]]:
    """Run every task of a resolved config; rows in task order plus per-task seconds."""
    tasks = [(cfg, t) for t in _tasks(cfg)]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_execute, tasks))
    else:
        results = [_execute(t) for t in tasks]
    rows, times = [], []
    for task_rows, dt in results:
        rows.extend(task_rows)
        times.append(dt)
    return rows, times


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([r["experiment"], r["instance"], r["solver"], r["seed"], r["objective"],
                    int(r["feasible"]), json.dumps(r["stats"], sort_keys=True)])
    return buf.getvalue()


def read_csv_rows(text: str) -> list[dict]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        rec["stats"] = json.loads(rec["stats"])
        rec["feasible"] = rec["feasible"] == "1"
        rec["seed"] = int(rec["seed"])
        out.append(rec)
    return out


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run, then write ``<name>.csv``, ``<name>_timing.csv`` and ``<name>.json`` into cfg.out_dir."""
    cfg = resolve(cfg)
    rows, times = collect(cfg)
    summary = summarize(cfg, rows)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / f"{cfg.name}.csv",
        "timing": out / f"{cfg.name}_timing.csv",
        "summary": out / f"{cfg.name}.json",
    }
    paths["csv"].write_text(rows_to_csv(rows), encoding="utf-8")
    tasks = _tasks(cfg)
    with paths["timing"].open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["task", "elapsed_s"])
        for t, dt in zip(tasks, times):
            w.writerow([json.dumps(t, sort_keys=True), f"{dt:.6f}"])
    summary["config"] = asdict(cfg)
    paths["summary"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return {"summary": summary, "rows": rows, "paths": {k: str(v) for k, v in paths.items()}}

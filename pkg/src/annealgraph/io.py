"""Flat-file formats: edge lists, DIMACS .col, QBsolv .qubo, embeddings and partitions."""

from __future__ import annotations

import os
from pathlib import Path

from .builders import Partition
from .chimera import Embedding
from .graph import Graph
from .model import QuboModel


class ParseError(ValueError):
    def __init__(self, message, lineno=None, path=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.message = message
        self.lineno = lineno
        self.path = path


def _lines(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line:
            yield lineno, line


def _ints(tokens, lineno, count=None):
    if count is not None and len(tokens) != count:
        raise ParseError(f"expected {count} fields, got {len(tokens)}", lineno)
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"non-integer field in {' '.join(tokens)!r}", lineno) from None


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

def parse_edge_list(text: str) -> Graph:
    """First line "n m", then m lines "u v" with 0-based vertices. '#' starts a comment."""
    rows = [(ln, line) for ln, line in _lines(text) if not line.startswith("#")]
    if not rows:
        raise ParseError("empty edge list", 1)
    ln, head = rows[0]
    n, m = _ints(head.split(), ln, 2)
    if n < 0 or m < 0:
        raise ParseError("negative count in header", ln)
    if len(rows) - 1 != m:
        raise ParseError(f"header announces {m} edges, found {len(rows) - 1}", rows[-1][0])
    edges = []
    for ln, line in rows[1:]:
        u, v = _ints(line.split(), ln, 2)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"vertex out of range 0..{n - 1}", ln)
        if u == v:
            raise ParseError("self-loop", ln)
        edges.append((u, v))
    return Graph(n, edges)


def format_edge_list(g: Graph) -> str:
    edges = g.sorted_edges()
    return f"{g.n} {len(edges)}\n" + "".join(f"{u} {v}\n" for u, v in edges)


def parse_dimacs(text: str) -> Graph:
    """DIMACS .col: "c" comments, "p edge n m", "e u v" with 1-based vertices."""
    n = None
    edges = []
    for ln, line in _lines(text):
        tok = line.split()
        if tok[0] == "c":
            continue
        if tok[0] == "p":
            if n is not None:
                raise ParseError("duplicate problem line", ln)
            if len(tok) != 4:
                raise ParseError("expected 'p edge <n> <m>'", ln)
            n, _ = _ints(tok[2:], ln, 2)
        elif tok[0] == "e":
            if n is None:
                raise ParseError("edge before problem line", ln)
            u, v = _ints(tok[1:], ln, 2)
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(f"vertex out of range 1..{n}", ln)
            if u != v:
                edges.append((u - 1, v - 1))
        else:
            raise ParseError(f"unknown line type {tok[0]!r}", ln)
    if n is None:
        raise ParseError("missing problem line")
    return Graph(n, edges)


def format_dimacs(g: Graph) -> str:
    edges = g.sorted_edges()
    return f"p edge {g.n} {len(edges)}\n" + "".join(f"e {u + 1} {v + 1}\n" for u, v in edges)


def load_graph(path, fmt: str = "edgelist") -> Graph:
    text = _read(path)
    try:
        if fmt == "edgelist":
            return parse_edge_list(text)
        if fmt == "dimacs":
            return parse_dimacs(text)
    except ParseError as exc:
        raise ParseError(exc.message, exc.lineno, path) from None
    raise ValueError(f"unknown graph format {fmt!r}")


def save_graph(g: Graph, path, fmt: str = "edgelist") -> None:
    if fmt == "edgelist":
        _write(path, format_edge_list(g))
    elif fmt == "dimacs":
        _write(path, format_dimacs(g))
    else:
        raise ValueError(f"unknown graph format {fmt!r}")


# ---------------------------------------------------------------------------
# QBsolv .qubo
# ---------------------------------------------------------------------------

def format_qubo(q: QuboModel) -> str:
    """QBsolv layout: header, diagonal lines "i i w", then couplers "i j w" with i<j.

    Every variable gets a diagonal line so the variable count survives a
    round trip; the offset rides in a "c offset" comment.
    """
    couplers = sorted((k, w) for k, w in q.quadratic.items())
    out = [
        "c written by annealgraph\n",
        f"c offset {q.offset!r}\n",
        f"p qubo 0 {q.n} {q.n} {len(couplers)}\n",
    ]
    out += [f"{i} {i} {float(q.linear[i])!r}\n" for i in range(q.n)]
    out += [f"{i} {j} {float(w)!r}\n" for (i, j), w in couplers]
    return "".join(out)


def parse_qubo(text: str) -> QuboModel:
    header = None
    offset = 0.0
    nodes, couplers = [], []
    for ln, line in _lines(text):
        tok = line.split()
        if tok[0] == "c":
            if len(tok) == 3 and tok[1] == "offset":
                try:
                    offset = float(tok[2])
                except ValueError:
                    raise ParseError("bad offset value", ln) from None
            continue
        if tok[0] == "p":
            if header is not None:
                raise ParseError("duplicate header", ln)
            if len(tok) != 6 or tok[1] != "qubo":
                raise ParseError("expected 'p qubo 0 <maxNodes> <nNodes> <nCouplers>'", ln)
            header = _ints(tok[2:], ln, 4)
            if header[0] != 0 or min(header) < 0:
                raise ParseError("header needs topology 0 and nonnegative counts", ln)
            continue
        if header is None:
            raise ParseError("data line before header", ln)
        if len(tok) != 3:
            raise ParseError("expected 'i j w'", ln)
        i, j = _ints(tok[:2], ln)
        try:
            w = float(tok[2])
        except ValueError:
            raise ParseError(f"bad weight {tok[2]!r}", ln) from None
        max_nodes = header[1]
        if not (0 <= i < max_nodes and 0 <= j < max_nodes):
            raise ParseError(f"index out of range 0..{max_nodes - 1}", ln)
        if i == j:
            if couplers:
                raise ParseError("diagonal entry after couplers", ln)
            nodes.append((i, w))
        elif i < j:
            couplers.append((i, j, w))
        else:
            raise ParseError(f"coupler ({i}, {j}) violates i < j", ln)
    if header is None:
        raise ParseError("missing 'p qubo' header")
    _, max_nodes, n_nodes, n_couplers = header
    if len(nodes) != n_nodes:
        raise ParseError(f"header announces {n_nodes} diagonal entries, found {len(nodes)}")
    if len(couplers) != n_couplers:
        raise ParseError(f"header announces {n_couplers} couplers, found {len(couplers)}")
    q = QuboModel(max_nodes, offset=offset)
    for i, w in nodes:
        q.add_linear(i, w)
    for i, j, w in couplers:
        q.add_quadratic(i, j, w)
    return q


def write_qubo_file(q: QuboModel, path) -> None:
    _write(path, format_qubo(q))


def load_qubo_file(path) -> QuboModel:
    try:
        return parse_qubo(_read(path))
    except ParseError as exc:
        raise ParseError(exc.message, exc.lineno, path) from None


# ---------------------------------------------------------------------------
# embeddings and partitions
# ---------------------------------------------------------------------------

def save_embedding(e: Embedding, path) -> None:
    _write(path, e.to_text())


def load_embedding(path) -> Embedding:
    return Embedding.from_text(_read(path))


def format_partition(p: Partition) -> str:
    return "".join(f"{v} {k}\n" for v, k in enumerate(p.assignment))


def parse_partition(text: str, K: int | None = None) -> Partition:
    rows = {}
    for ln, line in _lines(text):
        if line.startswith("#"):
            continue
        v, k = _ints(line.split(), ln, 2)
        if v in rows:
            raise ParseError(f"vertex {v} listed twice", ln)
        rows[v] = k
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise ParseError("vertices must be exactly 0..n-1")
    assign = [rows[v] for v in range(n)]
    return Partition(assign, K if K is not None else max(assign, default=0) + 1)


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path, text: str) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)
    path.write_text(text, encoding="utf-8")

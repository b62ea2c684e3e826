"""Readers and writers for edge lists, embeddings and reports.

Edge list
    One ``u v`` pair of 0-based node ids per line, whitespace separated.
    Lines starting with ``#`` are comments, except ``# nodes: N`` which fixes
    the node count so isolated nodes survive a round trip. Either orientation
    of an edge is accepted and repeats are merged.

Embedding
    CSV with header ``node,k,coord_1,...``; one row per node, floats written
    with 17 significant digits. ``k = 0`` marks a Euclidean embedding, whose
    rows have ``d`` coordinates instead of ``d + 1``.

Report
    A JSON object of scalars and (nested) lists.
"""

import csv
import json
import math
import re

import numpy as np

from .exceptions import ParseError
from .model import EUCLIDEAN, HYPERBOLIC, LatentEmbedding, Network

_NODES = re.compile(r"#\s*nodes\s*:\s*(\S+)\s*$")


def _float_text(x):
    return repr(float(x))


def format_edge_list(net):
    lines = [f"# nodes: {net.n}"]
    lines += [f"{i} {j}" for i, j in net.edges()]
    return "\n".join(lines) + "\n"


def write_edge_list(path, net):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(net))


def parse_edge_list(text, n=None):
    """Network from edge-list text. ``n`` overrides the node count."""
    declared = None
    edges = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _NODES.match(line)
            if m:
                try:
                    declared = int(m.group(1))
                except ValueError:
                    raise ParseError(f"node count {m.group(1)!r} is not an integer", lineno) from None
                if declared < 0:
                    raise ParseError("node count must be non-negative", lineno)
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 node ids, found {len(tokens)} tokens", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"non-integer node id in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise ParseError("node ids must be non-negative", lineno)
        if u == v:
            raise ParseError(f"self-loop on node {u}", lineno)
        if n is not None and max(u, v) >= n or declared is not None and max(u, v) >= declared:
            raise ParseError(f"node id {max(u, v)} exceeds the declared node count", lineno)
        edges.add((min(u, v), max(u, v)))
    if n is None:
        n = declared if declared is not None else (max(max(e) for e in edges) + 1 if edges else 0)
    if n < 2:
        raise ParseError("a network needs at least 2 nodes")
    return Network.from_edges(n, sorted(edges))


def read_edge_list(path, n=None):
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read(), n)


def format_embedding(emb):
    k = emb.k if emb.is_hyperbolic else 0.0
    cols = emb.Z.shape[1]
    rows = [",".join(["node", "k"] + [f"coord_{c + 1}" for c in range(cols)])]
    for i, z in enumerate(emb.Z):
        rows.append(",".join([str(i), _float_text(k)] + [_float_text(x) for x in z]))
    return "\n".join(rows) + "\n"


def write_embedding(path, emb):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_embedding(emb))


def parse_embedding(text):
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty embedding file", 1) from None
    if header[:2] != ["node", "k"] or len(header) < 3:
        raise ParseError("header must start with 'node,k,coord_1'", 1)
    cols = len(header) - 2
    Z, ks = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != cols + 2:
            raise ParseError(f"expected {cols + 2} fields, found {len(row)}", lineno)
        try:
            node = int(row[0])
            vals = [float(x) for x in row[1:]]
        except ValueError:
            raise ParseError("non-numeric field", lineno) from None
        if node != len(Z):
            raise ParseError(f"nodes must be listed in order 0, 1, ...; found {node}", lineno)
        if not all(math.isfinite(x) for x in vals):
            raise ParseError("non-finite value", lineno)
        ks.append(vals[0])
        Z.append(vals[1:])
    if not Z:
        raise ParseError("embedding has no rows")
    if len(set(ks)) != 1:
        raise ParseError("the k column must hold a single value")
    k = ks[0]
    Z = np.array(Z)
    if k == 0:
        return LatentEmbedding(Z, None, EUCLIDEAN)
    try:
        return LatentEmbedding(Z, k, HYPERBOLIC)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def read_embedding(path):
    with open(path, encoding="utf-8") as fh:
        return parse_embedding(fh.read())


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return int(value)
    return value


def format_report(record):
    return json.dumps(_plain(record), indent=2) + "\n"


def write_report(path, record):
    text = format_report(record)
    if path is None or path == "-":
        print(text, end="")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_report(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)

"""Text formats: edge lists and demand sets.

Edge list::

    # comment
    n m
    tail head weight      (m lines)

Demand set: a header ``n k`` followed by ``k`` lines of ``n`` reals (one
demand column per line), or by ``k`` sugared lines ``s t amount``.
"""

from __future__ import annotations

import numpy as np

from .graph import GraphError, WeightedGraph, build_graph


class FormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _header(lines, what: str) -> tuple[int, int, int]:
    try:
        lineno, fields = next(lines)
    except StopIteration:
        raise FormatError(1, f"empty {what}: missing header") from None
    if len(fields) != 2:
        raise FormatError(lineno, f"{what} header must be two integers, got {' '.join(fields)!r}")
    try:
        return lineno, int(fields[0]), int(fields[1])
    except ValueError:
        raise FormatError(lineno, f"{what} header must be two integers") from None


def parse_edge_list(text: str) -> WeightedGraph:
    lines = _content_lines(text)
    lineno, n, m = _header(lines, "edge list")
    edges = []
    for lineno, fields in lines:
        if len(fields) != 3:
            raise FormatError(lineno, f"expected 'tail head weight', got {' '.join(fields)!r}")
        try:
            edge = (int(fields[0]), int(fields[1]), float(fields[2]))
        except ValueError:
            raise FormatError(lineno, f"cannot parse edge {' '.join(fields)!r}") from None
        try:
            build_graph(n, [edge])
        except GraphError as exc:
            raise FormatError(lineno, str(exc).replace("edge 0 ", "edge ")) from None
        edges.append(edge)
    if len(edges) != m:
        raise FormatError(lineno, f"header declares {m} edges, found {len(edges)}")
    return build_graph(n, edges)


def serialize(g: WeightedGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v} {w!r}" for u, v, w in g.edges()]
    return "\n".join(lines) + "\n"


def read_graph(path) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def write_graph(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(g))


def parse_demands(text: str) -> np.ndarray:
    """Return the demand set as an ``(n, k)`` matrix of columns."""
    lines = _content_lines(text)
    lineno, n, k = _header(lines, "demand set")
    cols = []
    for lineno, fields in lines:
        try:
            values = [float(x) for x in fields]
        except ValueError:
            raise FormatError(lineno, f"non-numeric demand entry in {' '.join(fields)!r}") from None
        col = np.zeros(n)
        if len(fields) == n and not (n == 3 and _looks_sugared(fields, n)):
            col[:] = values
        elif len(fields) == 3:
            s, t, amount = fields
            try:
                s, t = int(s), int(t)
            except ValueError:
                raise FormatError(lineno, "sugared demand needs integer endpoints") from None
            if not (0 <= s < n and 0 <= t < n):
                raise FormatError(lineno, f"demand endpoint out of range [0, {n})")
            col[s] += values[2]
            col[t] -= values[2]
        else:
            raise FormatError(lineno, f"expected {n} reals or 's t amount', got {len(fields)} fields")
        cols.append(col)
    if len(cols) != k:
        raise FormatError(lineno, f"header declares {k} demands, found {len(cols)}")
    if not cols:
        return np.zeros((n, 0))
    return np.column_stack(cols)


def _looks_sugared(fields, n: int) -> bool:
    # With n == 3 both layouts have three fields; a dense column must sum to zero.
    try:
        vals = [float(x) for x in fields]
    except ValueError:
        return False
    if abs(sum(vals)) <= 1e-12 * max(1.0, sum(abs(v) for v in vals)):
        return False
    return all(x.lstrip("-").isdigit() for x in fields[:2])

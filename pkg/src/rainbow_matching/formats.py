"""Reading and writing graphs.

Text format::

    # comment
    n 4
    e 0 1 1
    e 2 3 1

JSON format: ``{"n": 4, "edges": [[0, 1, 1], [2, 3, 1]]}``.
Writers emit edges in canonical sorted order, so ``dumps(loads(s)) == s``
for any string produced by a writer.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Union

from .graph import EdgeColouredGraph


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", lineno) from None


def parse_text(text: str) -> EdgeColouredGraph:
    """Parse the line format; structural errors carry the offending line."""
    n: Optional[int] = None
    edges = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "n":
            if len(parts) != 2:
                raise ParseError("header must be 'n <count>'", lineno)
            if n is not None:
                raise ParseError("repeated header", lineno)
            n = _int(parts[1], lineno)
            if n < 0:
                raise ParseError(f"negative vertex count {n}", lineno)
        elif parts[0] == "e":
            if n is None:
                raise ParseError("edge before 'n' header", lineno)
            if len(parts) != 4:
                raise ParseError("edge must be 'e <u> <v> <colour>'", lineno)
            u, v, c = (_int(t, lineno) for t in parts[1:])
            if u == v:
                raise ParseError(f"loop at vertex {u}", lineno)
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"vertex out of range (n = {n})", lineno)
            if c < 1:
                raise ParseError(f"colour must be a positive integer, got {c}", lineno)
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ParseError(f"duplicate edge {key} (first on line {seen[key]})", lineno)
            seen[key] = lineno
            edges.append((u, v, c))
        else:
            raise ParseError(f"unknown record {parts[0]!r}", lineno)
    if n is None:
        raise ParseError("missing 'n <count>' header")
    return EdgeColouredGraph(n, edges)


def format_text(graph: EdgeColouredGraph) -> str:
    lines = [f"n {graph.n}"]
    lines.extend(f"e {u} {v} {c}" for u, v, c in graph.edges)
    return "\n".join(lines) + "\n"


def to_json_obj(graph: EdgeColouredGraph) -> dict:
    return {"n": graph.n, "edges": [list(e) for e in graph.edges]}


def from_json_obj(obj: dict) -> EdgeColouredGraph:
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise ParseError("JSON graph needs fields 'n' and 'edges'")
    try:
        edges = [tuple(int(x) for x in e) for e in obj["edges"]]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad edge list: {exc}") from None
    if any(len(e) != 3 for e in edges):
        raise ParseError("every edge must be [u, v, colour]")
    graph = EdgeColouredGraph(int(obj["n"]), edges)
    if graph.violation is not None:
        raise ParseError(graph.violation)
    return graph


def format_json(graph: EdgeColouredGraph) -> str:
    return json.dumps(to_json_obj(graph), separators=(",", ":")) + "\n"


def parse_json(text: str) -> EdgeColouredGraph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    return from_json_obj(obj)


def loads(text: str) -> EdgeColouredGraph:
    """Parse either format, sniffing JSON by its leading brace."""
    if text.lstrip().startswith("{"):
        return parse_json(text)
    return parse_text(text)


def read_graph(path: Union[str, Path]) -> EdgeColouredGraph:
    return loads(Path(path).read_text())


def write_graph(graph: EdgeColouredGraph, path: Union[str, Path]) -> None:
    path = Path(path)
    body = format_json(graph) if path.suffix == ".json" else format_text(graph)
    path.write_text(body)

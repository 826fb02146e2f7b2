"""Edge-coloured graphs, colour degrees and rainbow matchings.

Vertices are the integers ``0..n-1``; colours are arbitrary positive
integers.  Edges are kept with canonical ``(min, max)`` orientation and in
sorted order, so iteration is deterministic for a given edge set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Tuple

Edge = Tuple[int, int, int]


class GraphError(ValueError):
    """Raised when an operation needs a valid graph and gets a broken one."""


def _canonical(edges: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    out = []
    for u, v, c in edges:
        u, v, c = int(u), int(v), int(c)
        if u > v:
            u, v = v, u
        out.append((u, v, c))
    out.sort()
    return tuple(out)


class EdgeColouredGraph:
    """A simple graph with one colour per edge.

    Construction never raises on structural problems (loops, repeated
    pairs, bad vertex ids); those are reported by :func:`validate`.  The
    adjacency lists are only trustworthy for valid graphs.
    """

    __slots__ = ("n", "edges", "violation", "_adj", "_colour")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        self.n = int(n)
        self.edges = _canonical(edges)
        self.violation = self._find_violation()
        adj: list[list[tuple[int, int]]] = [[] for _ in range(max(self.n, 0))]
        colour: dict[tuple[int, int], int] = {}
        for u, v, c in self.edges:
            if 0 <= u < self.n and 0 <= v < self.n and u != v:
                adj[u].append((v, c))
                adj[v].append((u, c))
                colour.setdefault((u, v), c)
        for row in adj:
            row.sort()
        self._adj = adj
        self._colour = colour

    def _find_violation(self) -> Optional[str]:
        if self.n < 0:
            return f"negative vertex count {self.n}"
        seen = set()
        for u, v, c in self.edges:
            if u < 0 or v >= self.n:
                return f"vertex out of range in edge ({u}, {v}, {c}); n = {self.n}"
            if u == v:
                return f"loop at vertex {u} (colour {c})"
            if c < 1:
                return f"colour {c} on edge ({u}, {v}) is not a positive integer"
            if (u, v) in seen:
                return f"duplicate edge between {u} and {v}"
            seen.add((u, v))
        return None

    def require_valid(self) -> None:
        if self.violation is not None:
            raise GraphError(self.violation)

    def __repr__(self) -> str:
        return f"EdgeColouredGraph(n={self.n}, edges={list(self.edges)!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeColouredGraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbours(self, v: int) -> list[tuple[int, int]]:
        """``(neighbour, colour)`` pairs at ``v``, sorted by neighbour."""
        return self._adj[v]

    def colour(self, u: int, v: int) -> Optional[int]:
        """Colour of the edge ``uv``, or None when absent."""
        if u > v:
            u, v = v, u
        return self._colour.get((u, v))

    def has_edge(self, u: int, v: int) -> bool:
        return self.colour(u, v) is not None

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def colours_at(self, v: int) -> set[int]:
        return {c for _, c in self._adj[v]}

    def palette(self) -> set[int]:
        return {c for _, _, c in self.edges}

    def recoloured(self, relabelling: "ColourRelabelling") -> "EdgeColouredGraph":
        f = relabelling.apply
        return EdgeColouredGraph(self.n, ((u, v, f(c)) for u, v, c in self.edges))

    def is_proper(self) -> bool:
        return all(self.degree(v) == len(self.colours_at(v)) for v in range(self.n))


def validate(graph: EdgeColouredGraph) -> Optional[str]:
    """Return None for a valid graph, else a description of the first problem."""
    return graph.violation


def _check_vertex(graph: EdgeColouredGraph, v: int) -> None:
    if not 0 <= v < graph.n:
        raise IndexError(f"vertex {v} out of range for n = {graph.n}")


def colour_degree(graph: EdgeColouredGraph, v: int) -> int:
    """Number of distinct colours on the edges at ``v``."""
    _check_vertex(graph, v)
    return len(graph.colours_at(v))


def min_colour_degree(graph: EdgeColouredGraph) -> int:
    if graph.n < 1:
        raise GraphError("minimum colour degree of a graph with no vertices")
    return min(len(graph.colours_at(v)) for v in range(graph.n))


def min_colour_degree_vertex(graph: EdgeColouredGraph) -> int:
    """Smallest vertex attaining the minimum colour degree."""
    if graph.n < 1:
        raise GraphError("minimum colour degree of a graph with no vertices")
    return min(range(graph.n), key=lambda v: (len(graph.colours_at(v)), v))


def matching_defect(graph: EdgeColouredGraph, edges: Iterable[Sequence[int]]) -> Optional[str]:
    """Explain why ``edges`` is not a rainbow matching of ``graph``; None if it is."""
    used_vertices: set[int] = set()
    used_colours: set[int] = set()
    for edge in edges:
        try:
            u, v, c = edge
        except (TypeError, ValueError):
            return f"malformed edge {edge!r}"
        if graph.colour(u, v) != c:
            return f"edge ({u}, {v}, {c}) is not in the graph"
        if u in used_vertices or v in used_vertices:
            return f"edge ({u}, {v}, {c}) shares a vertex with an earlier edge"
        if c in used_colours:
            return f"colour {c} repeated"
        used_vertices.update((u, v))
        used_colours.add(c)
    return None


def is_rainbow_matching(graph: EdgeColouredGraph, edges: Iterable[Sequence[int]]) -> bool:
    return matching_defect(graph, edges) is None


@dataclass(frozen=True)
class RainbowMatching:
    """Vertex-disjoint edges with pairwise distinct colours."""

    edges: tuple[Edge, ...] = ()

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges)

    @property
    def colours(self) -> set[int]:
        return {c for _, _, c in self.edges}

    @property
    def vertices(self) -> set[int]:
        return {x for u, v, _ in self.edges for x in (u, v)}

    def canonical(self) -> "RainbowMatching":
        return RainbowMatching(_canonical(self.edges))

    def to_list(self) -> list[list[int]]:
        return [list(e) for e in self.edges]


@dataclass(frozen=True)
class ColourRelabelling:
    """A bijection between colours; colours outside ``forward`` are fixed."""

    forward: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        fwd = {a: b for a, b in self.forward.items() if a != b}
        if sorted(fwd) != sorted(fwd.values()):
            raise ValueError(f"not a bijection on its support: {fwd}")
        object.__setattr__(self, "forward", fwd)

    @property
    def inverse(self) -> dict[int, int]:
        return {b: a for a, b in self.forward.items()}

    def apply(self, colour: int) -> int:
        return self.forward.get(colour, colour)

    def invert(self, colour: int) -> int:
        for a, b in self.forward.items():
            if b == colour:
                return a
        return colour

    def then(self, other: "ColourRelabelling") -> "ColourRelabelling":
        """The relabelling that applies ``self`` first, then ``other``."""
        support = set(self.forward) | set(other.forward)
        return ColourRelabelling({c: other.apply(self.apply(c)) for c in support})

    @classmethod
    def transposition(cls, a: int, b: int) -> "ColourRelabelling":
        return cls({a: b, b: a})

    def is_identity(self) -> bool:
        return not self.forward


def relabel_colours(
    graph: EdgeColouredGraph, matching: Sequence[Edge]
) -> tuple[EdgeColouredGraph, ColourRelabelling]:
    """Recolour ``graph`` so the i-th edge of ``matching`` gets colour i (1-based).

    The colours displaced from ``1..r`` take over the vacated matching
    colours, paired in sorted order, so the map stays a bijection.
    """
    defect = matching_defect(graph, matching)
    if defect is not None:
        raise GraphError(f"cannot normalise on a non-rainbow matching: {defect}")
    sources = [c for _, _, c in matching]
    targets = range(1, len(sources) + 1)
    forward = dict(zip(sources, targets))
    displaced = sorted(set(targets) - set(sources))
    vacated = sorted(set(sources) - set(targets))
    forward.update(zip(displaced, vacated))
    relabelling = ColourRelabelling(forward)
    if relabelling.is_identity():
        return graph, relabelling
    return graph.recoloured(relabelling), relabelling

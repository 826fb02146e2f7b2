"""Colourings up to renaming of colours.

Whether a set of edges is rainbow depends only on which edges share a
colour, so colourings are enumerated as set partitions of the edge set
(restricted growth strings: colour of edge i is at most one more than the
largest colour used before it).
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterator, Sequence

from .graph import EdgeColouredGraph


def bell(m: int) -> int:
    """Number of set partitions of an m-element set (Bell triangle)."""
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def set_partitions(m: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length m with 1-based block labels."""
    if m == 0:
        yield ()
        return
    rgs = [1] * m
    top = [1] * m  # top[i] = max(rgs[:i+1])
    while True:
        yield tuple(rgs)
        i = m - 1
        while i > 0 and rgs[i] > top[i - 1]:
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        top[i] = max(top[i - 1], rgs[i])
        for j in range(i + 1, m):
            rgs[j] = 1
            top[j] = top[i]


def all_pairs(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(n), 2))


def edge_subsets(n: int, min_degree: int = 0) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every labelled simple graph on n vertices, as a sorted edge tuple."""
    pairs = all_pairs(n)
    for mask in range(1 << len(pairs)):
        edges = tuple(p for b, p in enumerate(pairs) if mask >> b & 1)
        if min_degree:
            deg = [0] * n
            for u, v in edges:
                deg[u] += 1
                deg[v] += 1
            if min(deg, default=0) < min_degree:
                continue
        yield edges


def colourings(edges: Sequence[tuple[int, int]]) -> Iterator[tuple[int, ...]]:
    return set_partitions(len(edges))


def canonical_colourings(
    n: int, min_colour_degree: int = 0
) -> Iterator[EdgeColouredGraph]:
    """All colourings of all graphs on n labelled vertices, one per edge partition.

    With ``min_colour_degree`` set, only graphs meeting it are produced;
    the check runs on the growth string before any graph is built.
    """
    for edges in edge_subsets(n, min_degree=min_colour_degree):
        incident = [[i for i, e in enumerate(edges) if v in e] for v in range(n)]
        for rgs in set_partitions(len(edges)):
            if min_colour_degree and any(
                len({rgs[i] for i in inc}) < min_colour_degree for inc in incident
            ):
                continue
            yield EdgeColouredGraph(n, [(u, v, c) for (u, v), c in zip(edges, rgs)])


def count_canonical_colourings(n: int) -> int:
    """Closed-form count: sum over edge subsets of Bell(|subset|) = Bell(C(n,2) + 1)."""
    return bell(n * (n - 1) // 2 + 1)

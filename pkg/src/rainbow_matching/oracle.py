"""Exact maximum rainbow matching by branch and bound.

At most one edge per colour can be used, so the search walks the colour
classes (smallest first) and at each class either takes one of its
still-available edges or skips the colour.  Free vertices are a Python
int bitmask.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .graph import Edge, EdgeColouredGraph, RainbowMatching

DEFAULT_NODE_BUDGET = 10**8
BUDGET_ENV = "RAINBOW_NODE_BUDGET"


def default_node_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw:
        return int(raw)
    return DEFAULT_NODE_BUDGET


@dataclass(frozen=True)
class SolveResult:
    """Outcome of an oracle run.

    ``certified`` means ``size`` is the proven maximum.  When a cutoff was
    reached early ``size >= cutoff`` but larger matchings were not ruled
    out; when the budget ran out ``size`` is only a lower bound.
    """

    size: int
    witness: RainbowMatching
    nodes_explored: int
    certified: bool
    budget_exhausted: bool = False

    def upper_bound_below(self, k: int) -> bool:
        """True when the run proves there is no rainbow matching of size k."""
        return self.size < k and not self.budget_exhausted


class _BudgetExhausted(Exception):
    pass


class _CutoffReached(Exception):
    pass


def max_rainbow_matching(
    graph: EdgeColouredGraph,
    cutoff: Optional[int] = None,
    node_budget: Optional[int] = None,
) -> SolveResult:
    graph.require_valid()
    budget = default_node_budget() if node_budget is None else node_budget

    by_colour: dict[int, list[tuple[int, Edge]]] = {}
    for u, v, c in graph.edges:
        by_colour.setdefault(c, []).append(((1 << u) | (1 << v), (u, v, c)))
    classes = sorted(by_colour.values(), key=lambda cls: (len(cls), cls[0][1][2]))
    n_classes = len(classes)

    best: list[Edge] = []
    chosen: list[Edge] = []
    nodes = 0
    target = cutoff if cutoff is not None else n_classes + 1
    if target <= 0:
        return SolveResult(0, RainbowMatching(), 0, certified=not graph.edges)

    def search(idx: int, free: int) -> None:
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            raise _BudgetExhausted
        size = len(chosen)
        if size > len(best):
            best = list(chosen)
            if size >= target:
                raise _CutoffReached
        if idx == n_classes:
            return
        if size + min(n_classes - idx, free.bit_count() // 2) <= len(best):
            return
        for mask, edge in classes[idx]:
            if free & mask == mask:
                chosen.append(edge)
                search(idx + 1, free ^ mask)
                chosen.pop()
        search(idx + 1, free)

    exhausted = False
    stopped = False
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, n_classes + 200))  # one frame per colour class
    try:
        search(0, (1 << graph.n) - 1)
    except _BudgetExhausted:
        exhausted = True
    except _CutoffReached:
        stopped = True
    finally:
        sys.setrecursionlimit(old_limit)

    trivial_cap = min(n_classes, graph.n // 2)
    certified = not exhausted and (not stopped or len(best) == trivial_cap)
    return SolveResult(
        size=len(best),
        witness=RainbowMatching(tuple(sorted(best))),
        nodes_explored=nodes,
        certified=certified,
        budget_exhausted=exhausted,
    )


def has_rainbow_matching_of_size(graph: EdgeColouredGraph, k: int) -> bool:
    if k <= 0:
        return True
    result = max_rainbow_matching(graph, cutoff=k)
    if result.size >= k:
        return True
    if result.budget_exhausted:
        raise RuntimeError(
            f"node budget exhausted after {result.nodes_explored} nodes; size-{k} question undecided"
        )
    return False


def greedy_rainbow_matching(
    graph: EdgeColouredGraph, order: Optional[Iterable[Sequence[int]]] = None
) -> RainbowMatching:
    """Inclusion-maximal rainbow matching, taking edges in ``order``.

    ``order`` defaults to the graph's canonical edge order; an edge given
    without its colour is looked up in the graph.
    """
    edges = graph.edges if order is None else order
    used_v: set[int] = set()
    used_c: set[int] = set()
    out: list[Edge] = []
    for edge in edges:
        u, v = edge[0], edge[1]
        c = graph.colour(u, v)
        if c is None or (len(edge) > 2 and edge[2] != c):
            raise ValueError(f"edge {tuple(edge)} is not in the graph")
        if u in used_v or v in used_v or c in used_c:
            continue
        used_v.update((u, v))
        used_c.add(c)
        out.append((min(u, v), max(u, v), c))
    return RainbowMatching(tuple(out))

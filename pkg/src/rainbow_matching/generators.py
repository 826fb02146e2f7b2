"""Instance families: sharpness examples, Latin squares, random graphs."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Sequence

from .graph import EdgeColouredGraph, min_colour_degree

FAMILIES = (
    "k4-proper",
    "double-k4",
    "one-factorization",
    "latin-knn",
    "cyclic-latin-knn",
    "k-regular-k-coloured",
    "random",
)

_K4_CLASSES = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def properly_coloured_k4() -> EdgeColouredGraph:
    """K4 whose three perfect matchings get colours 1, 2, 3."""
    return EdgeColouredGraph(
        4, [(u, v, c) for c, cls in enumerate(_K4_CLASSES, start=1) for u, v in cls]
    )


def double_k4() -> EdgeColouredGraph:
    """Two disjoint copies of the proper K4 on the shared palette {1, 2, 3}."""
    edges = [
        (u + off, v + off, c)
        for off in (0, 4)
        for c, cls in enumerate(_K4_CLASSES, start=1)
        for u, v in cls
    ]
    return EdgeColouredGraph(8, edges)


def one_factorization_complete(m: int) -> EdgeColouredGraph:
    """K_m (m even) coloured by the round-robin 1-factorization, colours 1..m-1."""
    if m < 2 or m % 2:
        raise ValueError(f"one-factorization needs an even order >= 2, got {m}")
    hub = m - 1
    edges = []
    for r in range(m - 1):
        edges.append((r, hub, r + 1))
        for i in range(1, m // 2):
            edges.append(((r + i) % hub, (r - i) % hub, r + 1))
    return EdgeColouredGraph(m, edges)


def is_latin(square: Sequence[Sequence[int]]) -> bool:
    n = len(square)
    if n == 0 or any(len(row) != n for row in square):
        return False
    symbols = set(square[0])
    if len(symbols) != n:
        return False
    rows_ok = all(set(row) == symbols for row in square)
    cols_ok = all({square[i][j] for i in range(n)} == symbols for j in range(n))
    return rows_ok and cols_ok


def cyclic_latin(n: int) -> list[list[int]]:
    if n < 1:
        raise ValueError(f"order must be positive, got {n}")
    return [[(i + j) % n + 1 for j in range(n)] for i in range(n)]


def latin_knn(square: Sequence[Sequence[int]]) -> EdgeColouredGraph:
    """K_{n,n} with left i joined to right j (vertex n + j) in colour square[i][j].

    Rainbow perfect matchings are exactly the Latin transversals.
    """
    if not is_latin(square):
        raise ValueError("input is not a Latin square")
    if any(c < 1 for row in square for c in row):
        raise ValueError("symbols must be positive integers")
    n = len(square)
    return EdgeColouredGraph(2 * n, [(i, n + j, square[i][j]) for i in range(n) for j in range(n)])


def k_regular_k_coloured(k: int, m: int) -> EdgeColouredGraph:
    """Bipartite circulant: left i ~ right (i + t) mod m in colour t + 1, t < k."""
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    return EdgeColouredGraph(
        2 * m, [(i, m + (i + t) % m, t + 1) for i in range(m) for t in range(k)]
    )


def random_with_min_colour_degree(
    n: int,
    k: int,
    palette: int,
    p: float = 0.3,
    seed: int = 0,
    max_repairs: int = 10_000,
) -> EdgeColouredGraph:
    """Random colouring of G(n, p) over colours 1..palette, repaired to colour degree >= k.

    Repair adds an edge from a deficient vertex to its lowest-degree
    non-neighbour, in a colour new to the deficient vertex (and to the
    partner where possible).  A vertex adjacent to everything instead
    gets one of its repeated colours recoloured.  Same arguments, same graph.
    """
    if k < 1 or palette < k:
        raise ValueError(f"palette {palette} cannot give colour degree {k}")
    if n - 1 < k:
        raise ValueError(f"n = {n} vertices cannot reach colour degree {k}")
    rng = random.Random(seed)
    colours = range(1, palette + 1)
    col: dict[tuple[int, int], int] = {}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                col[(u, v)] = rng.choice(colours)

    adj: list[dict[int, int]] = [{} for _ in range(n)]
    for (u, v), c in col.items():
        adj[u][v] = c
        adj[v][u] = c

    def seen(v: int) -> set[int]:
        return set(adj[v].values())

    def put(u: int, v: int, c: int) -> None:
        adj[u][v] = c
        adj[v][u] = c

    for _ in range(max_repairs):
        short = [v for v in range(n) if len(seen(v)) < k]
        if not short:
            break
        v = rng.choice(short)
        missing = [c for c in colours if c not in seen(v)]
        others = [u for u in range(n) if u != v and u not in adj[v]]
        if others:
            low = min(len(adj[u]) for u in others)
            u = rng.choice([u for u in others if len(adj[u]) == low])
            both = [c for c in missing if c not in seen(u)]
            put(u, v, rng.choice(both or missing))
            continue
        # v sees every vertex: recolour one of its repeated colours
        counts: dict[int, int] = {}
        for c in adj[v].values():
            counts[c] = counts.get(c, 0) + 1
        options = []
        for u, c in adj[v].items():
            if counts[c] < 2:
                continue
            u_keeps = sum(1 for x in adj[u].values() if x == c) > 1 or len(seen(u)) > k
            for c2 in missing:
                options.append((not u_keeps, c2 in seen(u), u, c2))
        options.sort()
        best = [o for o in options if o[:2] == options[0][:2]]
        _, _, u, c2 = rng.choice(best)
        put(u, v, c2)
    graph = EdgeColouredGraph(n, [(u, v, c) for u in range(n) for v, c in adj[u].items() if u < v])
    if min_colour_degree(graph) < k:
        raise ValueError(
            f"could not repair a graph with n={n}, k={k}, palette={palette} (seed {seed})"
        )
    return graph


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")

    def build(self) -> EdgeColouredGraph:
        p = self.params
        if self.family == "k4-proper":
            return properly_coloured_k4()
        if self.family == "double-k4":
            return double_k4()
        if self.family == "one-factorization":
            return one_factorization_complete(int(p["m"]))
        if self.family == "latin-knn":
            return latin_knn(p["square"])
        if self.family == "cyclic-latin-knn":
            return latin_knn(cyclic_latin(int(p["n"])))
        if self.family == "k-regular-k-coloured":
            return k_regular_k_coloured(int(p["k"]), int(p["m"]))
        return random_with_min_colour_degree(
            int(p["n"]),
            int(p["k"]),
            int(p.get("palette", p["k"])),
            float(p.get("p", 0.3)),
            int(p.get("seed", 0)),
        )

    def label(self) -> str:
        if not self.params:
            return self.family
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()) if k != "square")
        return f"{self.family}({inner})"

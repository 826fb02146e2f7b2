"""Constructive search for a rainbow matching of size k.

The finder grows a rainbow matching one edge at a time.  At level ``k``
it holds a rainbow matching ``M = {x_i y_i}`` of size ``k - 1`` and an
auxiliary rainbow matching ``M' = {z_i w_i : i <= s}`` on vertices outside
``M`` whose colours are among those of ``M``.  Colours are renamed so that
``x_i y_i`` and ``z_i w_i`` both carry colour ``i``; every colour ``>= k``
is then "fresh".

Every step either returns a size-k rainbow matching, or strictly increases
``s`` (a restart), or learns something about the structure around ``M``.
Once ``s = k - 1`` the spare vertices (or, with none left, the fresh
edges inside the quadruples ``{x_i, y_i, z_i, w_i}``) finish the job.
When the graph has minimum colour degree at least ``k`` and enough
vertices (``4k - 4`` for ``k >= 4``, ``4k - 3`` otherwise) the search
cannot get stuck; on other graphs it may still succeed, and otherwise
reports a checkable reason.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .graph import (
    ColourRelabelling,
    Edge,
    EdgeColouredGraph,
    RainbowMatching,
    colour_degree,
    matching_defect,
    min_colour_degree_vertex,
    relabel_colours,
)

TAGS = (
    "induction-base",
    "direct-extension",
    "fact-a-grow",
    "zchain-attach",
    "m0-swap",
    "claim-d-construction",
    "spare-vertex-patch",
    "quadruple-saturation",
    "final-patch",
    "hypothesis-violated",
)


class FinderInvariantError(RuntimeError):
    """An internal invariant broke.  This is a bug, never a property of the input."""


def order_bound(k: int) -> int:
    """Fewest vertices for which a size-k rainbow matching is guaranteed."""
    return 4 * k - 4 if k >= 4 else 4 * k - 3


@dataclass(frozen=True)
class Found:
    matching: RainbowMatching

    @property
    def size(self) -> int:
        return len(self.matching)


@dataclass(frozen=True)
class HypothesisViolated:
    """Why the guarantee did not apply.

    ``reason`` is ``"colour-degree"`` (``vertex`` has colour degree below
    ``k``) or ``"order"`` (``n`` is below the required vertex count).
    """

    reason: str
    k: int
    n: int
    vertex: Optional[int] = None
    colour_degree: Optional[int] = None

    @property
    def required_n(self) -> int:
        return order_bound(self.k)

    def holds_for(self, graph: EdgeColouredGraph) -> bool:
        """Independently re-check the witness against ``graph``."""
        if self.reason == "colour-degree":
            return self.vertex is not None and colour_degree(graph, self.vertex) < self.k
        if self.reason == "order":
            return graph.n < order_bound(self.k)
        return False

    def to_json(self) -> dict:
        return {
            "reason": self.reason,
            "k": self.k,
            "n": self.n,
            "vertex": self.vertex,
            "colour_degree": self.colour_degree,
        }


Outcome = Union[Found, HypothesisViolated]


@dataclass
class TraceStep:
    """One move of the search.  Edges carry the graph's original colours."""

    tag: str
    level: int
    s: int
    edges: tuple[Edge, ...] = ()
    matching: Optional[tuple[Edge, ...]] = None
    absorbed: Optional[Edge] = None
    found: bool = False
    info: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"tag": self.tag, "level": self.level, "s": self.s}
        if self.edges:
            out["edges"] = [list(e) for e in self.edges]
        if self.matching is not None:
            out["matching"] = [list(e) for e in self.matching]
        if self.absorbed is not None:
            out["absorbed"] = list(self.absorbed)
        if self.found:
            out["found"] = True
        if self.info:
            out["info"] = self.info
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "TraceStep":
        def edge(e):
            return tuple(int(x) for x in e)

        return cls(
            tag=obj["tag"],
            level=int(obj["level"]),
            s=int(obj["s"]),
            edges=tuple(edge(e) for e in obj.get("edges", ())),
            matching=(
                tuple(edge(e) for e in obj["matching"]) if obj.get("matching") is not None else None
            ),
            absorbed=edge(obj["absorbed"]) if obj.get("absorbed") is not None else None,
            found=bool(obj.get("found", False)),
            info=dict(obj.get("info", {})),
        )


@dataclass
class AugmentTrace:
    steps: list[TraceStep] = field(default_factory=list)
    # level -> number of times s was increased at that level
    restarts: dict[int, int] = field(default_factory=dict)

    def add(self, step: TraceStep) -> None:
        if step.tag not in TAGS:
            raise ValueError(f"unknown trace tag {step.tag!r}")
        self.steps.append(step)

    def __len__(self) -> int:
        return len(self.steps)

    def tags(self) -> list[str]:
        return [st.tag for st in self.steps]

    def to_json(self) -> dict:
        return {
            "steps": [st.to_json() for st in self.steps],
            "restarts": {str(k): v for k, v in sorted(self.restarts.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj: dict) -> "AugmentTrace":
        return cls(
            steps=[TraceStep.from_json(st) for st in obj["steps"]],
            restarts={int(k): int(v) for k, v in obj.get("restarts", {}).items()},
        )

    @classmethod
    def loads(cls, text: str) -> "AugmentTrace":
        return cls.from_json(json.loads(text))


class Restart:
    """Signal: ``s`` went up, the level loop must start over."""

    def __repr__(self) -> str:
        return "RESTART"


RESTART = Restart()


@dataclass(frozen=True)
class Stuck:
    """The level could not continue; ``vertex`` is a deficient vertex if one was seen."""

    vertex: Optional[int]
    where: str


Pair = tuple[int, int, int]  # (u, v, normalised colour)
Step = Union[RainbowMatching, Restart, Stuck, None]


class AugmentState:
    """Working state of one level of the search.

    ``g`` is the input graph recoloured so that ``x_i y_i`` has colour ``i``;
    ``rel`` maps original colours to those of ``g``.  Index lists are
    1-based (slot 0 unused).  ``chain`` maps ``i`` to ``z_i`` for the
    indices ``s + 1 <= i <= k - 1`` attached so far.
    """

    def __init__(
        self,
        graph: EdgeColouredGraph,
        k: int,
        matching,
        mprime=(),
        trace: Optional[AugmentTrace] = None,
        debug: bool = False,
    ):
        if len(matching) != k - 1:
            raise ValueError(f"level {k} needs a matching of size {k - 1}, got {len(matching)}")
        self.graph = graph
        self.k = k
        self.trace = trace if trace is not None else AugmentTrace()
        self.debug = debug
        self._load([tuple(e[:2]) for e in matching], [tuple(e[:2]) for e in mprime])

    # -- bookkeeping -------------------------------------------------------

    def _load(self, m_pairs: list, mp_pairs: list) -> None:
        """Adopt a new (M, M') and renormalise so M' colours come first."""
        colour = self.graph.colour
        by_colour = {colour(u, v): (u, v) for u, v in m_pairs}
        mp_colours = [colour(u, v) for u, v in mp_pairs]
        try:
            head = [by_colour[c] for c in mp_colours]
        except KeyError as exc:
            raise FinderInvariantError(f"M' uses colour {exc} absent from M") from None
        taken = set(mp_colours)
        order = head + [p for p in m_pairs if colour(*p) not in taken]
        self.x = [-1] + [min(p) for p in order]
        self.y = [-1] + [max(p) for p in order]
        self.z = [-1] + [min(p) for p in mp_pairs]
        self.w = [-1] + [max(p) for p in mp_pairs]
        self.chain: dict[int, int] = {}
        self._renormalise()

    def _renormalise(self) -> None:
        colour = self.graph.colour
        m = [(self.x[i], self.y[i], colour(self.x[i], self.y[i])) for i in range(1, self.k)]
        self.g, self.rel = relabel_colours(self.graph, m)
        self._reindex()

    def _reindex(self) -> None:
        role: dict[int, tuple[str, int]] = {}
        for i in range(1, self.k):
            role[self.x[i]] = ("x", i)
            role[self.y[i]] = ("y", i)
        for i in range(1, self.s + 1):
            role[self.z[i]] = ("z", i)
            role[self.w[i]] = ("w", i)
        for i, v in self.chain.items():
            role[v] = ("c", i)
        self.role = role

    @property
    def s(self) -> int:
        return len(self.z) - 1

    @property
    def relabelling(self) -> ColourRelabelling:
        return self.rel

    def in_w(self, v: int) -> bool:
        """v lies outside V(M) and V(M') (chain vertices included)."""
        r = self.role.get(v)
        return r is None or r[0] == "c"

    def w_set(self) -> list[int]:
        return [v for v in range(self.g.n) if self.in_w(v)]

    def w_minus_chain(self) -> list[int]:
        return [v for v in range(self.g.n) if v not in self.role]

    def m_pairs(self) -> list[Pair]:
        return [(self.x[i], self.y[i], i) for i in range(1, self.k)]

    def mprime_pairs(self) -> list[Pair]:
        return [(self.z[i], self.w[i], i) for i in range(1, self.s + 1)]

    def _pair(self, u: int, v: int) -> Pair:
        c = self.g.colour(u, v)
        if c is None:
            raise FinderInvariantError(f"edge {u}-{v} missing")
        return (u, v, c)

    def _orig(self, pairs) -> tuple[Edge, ...]:
        colour = self.graph.colour
        return tuple(sorted((min(u, v), max(u, v), colour(u, v)) for u, v, *_ in pairs))

    def _record(self, tag: str, **kw) -> None:
        self.trace.add(TraceStep(tag=tag, level=self.k, s=self.s, **kw))

    def _emit(self, tag: str, pairs: list, **info) -> RainbowMatching:
        edges = self._orig(pairs)
        defect = matching_defect(self.graph, edges)
        if defect is not None or len(edges) != self.k:
            raise FinderInvariantError(
                f"{tag} produced an invalid size-{self.k} matching {edges}: {defect or 'wrong size'}"
            )
        self._record(tag, matching=edges, found=True, info=info)
        return RainbowMatching(edges)

    def _count_restart(self) -> None:
        self.trace.restarts[self.k] = self.trace.restarts.get(self.k, 0) + 1

    def check(self) -> None:
        """Assert the structural invariants of the state."""
        g, k, s = self.g, self.k, self.s
        seen: set[int] = set()
        for i in range(1, k):
            if g.colour(self.x[i], self.y[i]) != i:
                raise FinderInvariantError(f"c(x_{i} y_{i}) != {i}")
            seen.update((self.x[i], self.y[i]))
        if len(seen) != 2 * (k - 1):
            raise FinderInvariantError("M is not a matching")
        for i in range(1, s + 1):
            if g.colour(self.z[i], self.w[i]) != i:
                raise FinderInvariantError(f"c(z_{i} w_{i}) != {i}")
            seen.update((self.z[i], self.w[i]))
        if len(seen) != 2 * (k - 1) + 2 * s:
            raise FinderInvariantError("M' is not a matching disjoint from M")
        if any(i <= s or i >= k for i in self.chain):
            raise FinderInvariantError(f"chain indices {sorted(self.chain)} outside ({s}, {k})")
        zs = list(self.chain.values())
        if len(set(zs)) != len(zs) or any(z in seen for z in zs):
            raise FinderInvariantError("chain vertices are not distinct vertices of W")
        for i, z in self.chain.items():
            c = g.colour(self.y[i], z)
            if c is None or c <= i:
                raise FinderInvariantError(f"chain edge y_{i} z_{i} breaks c not in [{i}]")

    def _checked(self) -> None:
        if self.debug:
            self.check()

    # -- operations ----------------------------------------------------------

    def try_direct_extension(self) -> Optional[RainbowMatching]:
        """M plus any fresh-coloured edge missing V(M)."""
        k = self.k
        for u, v, c in self.g.edges:
            if c >= k and not self._in_m(u) and not self._in_m(v):
                return self._emit("direct-extension", self.m_pairs() + [(u, v, c)])
        return None

    def _in_m(self, v: int) -> bool:
        r = self.role.get(v)
        return r is not None and r[0] in "xy"

    def _absorb(self, a: int, b: int, c: int) -> None:
        """Append edge ab (colour c in (s, k-1]) to M' as pair s+1."""
        t = self.s + 1
        if not t <= c < self.k:
            raise FinderInvariantError(f"cannot absorb colour {c} at s = {self.s}")
        edge = self._orig([(a, b)])[0]
        self.x[t], self.x[c] = self.x[c], self.x[t]
        self.y[t], self.y[c] = self.y[c], self.y[t]
        self.z.append(min(a, b))
        self.w.append(max(a, b))
        self.chain = {}
        self._renormalise()
        self._count_restart()
        self._record("fact-a-grow", absorbed=edge, info={"index": t})
        self._checked()

    def _absorb_or_extend(self, a: int, b: int, c: int) -> Union[RainbowMatching, Restart]:
        if c >= self.k:
            return self._emit("direct-extension", self.m_pairs() + [(a, b, c)])
        self._absorb(a, b, c)
        return RESTART

    def grow_mprime(self) -> Optional[RainbowMatching]:
        """Absorb edges inside W until every such edge has colour in [s]."""
        while True:
            for u, v, c in self.g.edges:
                if c > self.s and self.in_w(u) and self.in_w(v):
                    res = self._absorb_or_extend(u, v, c)
                    if res is not RESTART:
                        return res
                    break
            else:
                return None

    def claim_b_matching(self, i: int, j: int) -> list[Pair]:
        """Rainbow matching of size k - i on T_i avoiding colours [i-1] and j."""
        if i > self.k:
            raise ValueError(f"index {i} beyond k = {self.k}")
        out: list[Pair] = []
        while i < self.k:
            if j != i:
                out.append((self.x[i], self.y[i], i))
            else:
                z = self.chain.get(i)
                if z is None:
                    raise FinderInvariantError(f"z_{i} not attached")
                pair = self._pair(self.y[i], z)
                out.append(pair)
                j = pair[2]
            i += 1
        return out

    def m0_swap(self, i: int, w: int) -> Union[RainbowMatching, Restart, None]:
        """Handle an edge x_i w (w in W_i) whose colour lies outside [s].

        Trades M for ``M0 = {x_j y_j : j < i} + M'' + {y_i z_i}``; the edge
        then either extends M0 or joins M'.  Returns None when the colour is
        in [s] and nothing needs doing.
        """
        c = self.g.colour(self.x[i], w)
        if c is None:
            raise FinderInvariantError(f"x_{i} w not an edge")
        if c <= self.s:
            return None
        yz = self._pair(self.y[i], self.chain[i])
        m0 = [(self.x[j], self.y[j], j) for j in range(1, i)]
        m0 += self.claim_b_matching(i + 1, yz[2])
        m0.append(yz)
        e = (self.x[i], w, c)
        if c not in {p[2] for p in m0}:
            return self._emit("m0-swap", m0 + [e], index=i)
        s_before = self.s
        mprime = [(p[0], p[1]) for p in self.mprime_pairs()] + [(self.x[i], w)]
        m0_orig = self._orig(m0)
        absorbed = self._orig([e])[0]
        self._load([(p[0], p[1]) for p in m0], mprime)
        if self.s != s_before + 1:
            raise FinderInvariantError("M0 swap did not increase s")
        self._count_restart()
        self._record("m0-swap", matching=m0_orig, absorbed=absorbed, info={"index": i})
        self._checked()
        return RESTART

    def claim_d_construction(self, u: int, w: int, level: int) -> RainbowMatching:
        """Size-k matching from an edge uw with u in S, w in W_level, colour outside [level-1]."""
        c = self.g.colour(u, w)
        s = self.s
        if c is None or c < level or self.role.get(u, ("", s + 1))[1] > s:
            raise FinderInvariantError(f"claim (d) preconditions fail for {u}-{w} at level {level}")
        pairs: list[Pair] = [(u, w, c)]
        for t in range(1, s + 1):
            if u in (self.x[t], self.y[t]):
                pairs.append((self.z[t], self.w[t], t))
            else:
                pairs.append((self.x[t], self.y[t], t))
        pairs += self.claim_b_matching(level, c)
        pairs += [(self.x[j], self.y[j], j) for j in range(s + 1, level)]
        return self._emit("claim-d-construction", pairs, level=level)

    def _scan(self, z: int, i: int):
        """Classify the edges at z (in W_{i+1}) whose colour lies outside [i].

        Returns a candidate ``(u,)`` for z_i, a found matching, RESTART, or
        None when every such edge goes to y_{i+1..k-1} (then z has colour
        degree at most k - 1).
        """
        s = self.s
        for u, c in self.g.neighbours(z):
            if c <= i:
                continue
            r = self.role.get(u)
            if r is None or r[0] == "c":
                return self._absorb_or_extend(z, u, c)
            kind, t = r
            if kind in "zw" or t <= s:
                return self.claim_d_construction(u, z, i + 1)
            if t > i:
                if kind == "x":
                    return self.m0_swap(t, z)
                continue
            return (u,)
        return None

    def _attach(self, i: int, z: int, u: int) -> None:
        kind, t = self.role[u]
        if t != i:
            self.x[t], self.x[i] = self.x[i], self.x[t]
            self.y[t], self.y[i] = self.y[i], self.y[t]
        if kind == "x":
            self.x[i], self.y[i] = self.y[i], self.x[i]
        self.chain[i] = z
        self._renormalise()
        edge = self._orig([(self.y[i], z)])[0]
        self._record("zchain-attach", edges=(edge,), info={"index": i, "z": z, "swapped_index": t})
        self._checked()

    def build_zchain(self) -> Step:
        """Attach z_{k-1}, ..., z_{s+1}.  None means the chain is complete."""
        for i in range(self.k - 1, self.s, -1):
            if i in self.chain:
                continue
            pool = self.w_minus_chain()
            if not pool:
                return Stuck(None, f"W_{i + 1} empty")
            deficient = None
            for z in pool:
                res = self._scan(z, i)
                if res is None:
                    if deficient is None:
                        deficient = z
                    continue
                if isinstance(res, tuple):
                    self._attach(i, z, res[0])
                    break
                return res
            else:
                return Stuck(deficient, f"no z_{i}")
        return None

    def exploit_low_colour_degree(self) -> Step:
        """With the chain complete, a vertex of W_{s+1} must break the pattern."""
        pool = self.w_minus_chain()
        if not pool:
            return Stuck(None, f"W_{self.s + 1} empty")
        for v in pool:
            res = self._scan(v, self.s)
            if res is not None:
                return res
        return Stuck(pool[0], "pattern holds at every vertex of W_{s+1}")

    def _cross_patch(self, a: int, b: int) -> Optional[list[Pair]]:
        """Fresh edge ab plus, per index, whichever of x_t y_t / z_t w_t it misses."""
        c = self.g.colour(a, b)
        hit = (a, b)
        out: list[Pair] = [(a, b, c)]
        for t in range(1, self.k):
            if self.x[t] not in hit and self.y[t] not in hit:
                out.append((self.x[t], self.y[t], t))
            elif self.z[t] not in hit and self.w[t] not in hit:
                out.append((self.z[t], self.w[t], t))
            else:
                return None
        return out

    def finalize_full_s(self) -> Union[RainbowMatching, Stuck]:
        k = self.k
        if self.s != k - 1:
            raise FinderInvariantError(f"finalize with s = {self.s} < {k - 1}")
        deficient = None
        for w in self.w_minus_chain():
            for u, c in self.g.neighbours(w):
                if c >= k:
                    pairs = self._cross_patch(u, w)
                    if pairs is None:
                        raise FinderInvariantError(f"spare-vertex patch failed at {u}-{w}")
                    return self._emit("spare-vertex-patch", pairs, spare=w)
            if deficient is None:
                deficient = w
        res = self.quadruple_saturation()
        if isinstance(res, RainbowMatching):
            return res
        if isinstance(res, Stuck):
            return Stuck(deficient if deficient is not None else res.vertex, res.where)
        found = self.final_patch(res)
        if found is not None:
            return found
        return Stuck(deficient, "final patch found no usable neighbour")

    def quadruple_saturation(self) -> Union[RainbowMatching, Stuck, dict[int, tuple[int, int]]]:
        """Force fresh edges x_i z_i and y_i w_i inside every quadruple.

        A fresh edge leaving a quadruple is patched into a size-k matching
        at once.  Returns ``{i: (c(x_i z_i), c(y_i w_i))}`` otherwise.
        """
        k = self.k
        structure: dict[int, tuple[int, int]] = {}
        for i in range(1, k):
            quad = (self.x[i], self.y[i], self.z[i], self.w[i])
            fresh: set[frozenset] = set()
            for q in quad:
                covered = False
                for v, c in self.g.neighbours(q):
                    if c < k:
                        continue
                    covered = True
                    if v not in quad:
                        pairs = self._cross_patch(q, v)
                        if pairs is None:
                            raise FinderInvariantError(f"cross patch failed at {q}-{v}")
                        return self._emit("quadruple-saturation", pairs, index=i)
                    fresh.add(frozenset((q, v)))
                if not covered:
                    return Stuck(q, f"no fresh edge at a vertex of quadruple {i}")
            x, y, z, w = quad
            if not (frozenset((x, z)) in fresh and frozenset((y, w)) in fresh):
                if frozenset((x, w)) in fresh and frozenset((y, z)) in fresh:
                    self.z[i], self.w[i] = w, z
                else:
                    raise FinderInvariantError(f"fresh edges of quadruple {i} cover no perfect matching")
            structure[i] = (
                self.g.colour(self.x[i], self.z[i]),
                self.g.colour(self.y[i], self.w[i]),
            )
        self._reindex()
        fresh_edges = []
        for i in range(1, k):
            fresh_edges += [(self.x[i], self.z[i]), (self.y[i], self.w[i])]
        self._record("quadruple-saturation", edges=self._orig(fresh_edges))
        self._checked()
        return structure

    def final_patch(self, structure: dict[int, tuple[int, int]]) -> Optional[RainbowMatching]:
        """Use a non-fresh edge from a quadruple vertex to a vertex outside it.

        For anchor u in quadruple p and an edge uv of colour m != p:
        ``{uv, other colour-p edge of quadruple p, fresh edge of quadruple m
        missing v}`` plus one colour-t edge missing v from each remaining
        quadruple.  Anchor x_1 always works when k >= 4 and the colour
        degree condition holds; the other anchors are tried for graphs
        outside the guarantee.
        """
        k = self.k
        for p in range(1, k):
            quad = (self.x[p], self.y[p], self.z[p], self.w[p])
            for anchor in quad:
                if anchor in (self.x[p], self.y[p]):
                    other = (self.z[p], self.w[p], p)
                else:
                    other = (self.x[p], self.y[p], p)
                for v, c in self.g.neighbours(anchor):
                    if v in quad or c == p:
                        continue
                    if c >= k:
                        pairs = self._cross_patch(anchor, v)
                        if pairs is not None:
                            return self._emit("final-patch", pairs, anchor=anchor, pivot=v)
                        continue
                    m = c
                    fx = (self.x[m], self.z[m])
                    fy = (self.y[m], self.w[m])
                    f = fx if v not in fx else fy
                    pairs = [(anchor, v, c), other, self._pair(*f)]
                    for t in range(1, k):
                        if t in (p, m):
                            continue
                        if v in (self.x[t], self.y[t]):
                            pairs.append((self.z[t], self.w[t], t))
                        else:
                            pairs.append((self.x[t], self.y[t], t))
                    return self._emit("final-patch", pairs, anchor=anchor, pivot=v)
        return None


def _run_level(
    graph: EdgeColouredGraph, matching: RainbowMatching, k: int, trace: AugmentTrace, debug: bool
) -> Union[RainbowMatching, Stuck]:
    state = AugmentState(graph, k, list(matching), trace=trace, debug=debug)
    state._checked()
    budget = k - 1  # s can rise at most k - 1 times
    while True:
        s_before = state.s
        found = state.try_direct_extension()
        if found is not None:
            return found
        found = state.grow_mprime()
        if found is not None:
            return found
        if state.s == k - 1:
            return state.finalize_full_s()
        res = state.build_zchain()
        if res is None:
            res = state.exploit_low_colour_degree()
        if isinstance(res, (RainbowMatching, Stuck)):
            return res
        if res is not RESTART or state.s <= s_before:
            raise FinderInvariantError(f"level {k}: no progress (s = {state.s}, result {res!r})")
        if trace.restarts.get(k, 0) > budget:
            raise FinderInvariantError(f"level {k}: {trace.restarts[k]} restarts exceed {budget}")


def _violation(graph: EdgeColouredGraph, k: int, stuck: Stuck) -> HypothesisViolated:
    v = stuck.vertex
    if v is not None and colour_degree(graph, v) < k:
        return HypothesisViolated("colour-degree", k, graph.n, v, colour_degree(graph, v))
    if graph.n >= 1:
        v = min_colour_degree_vertex(graph)
        if colour_degree(graph, v) < k:
            return HypothesisViolated("colour-degree", k, graph.n, v, colour_degree(graph, v))
    if graph.n < order_bound(k):
        return HypothesisViolated("order", k, graph.n)
    raise FinderInvariantError(
        f"stuck ({stuck.where}) although min colour degree >= {k} and n = {graph.n} >= {order_bound(k)}"
    )


def find_rainbow_matching(
    graph: EdgeColouredGraph, k: int, debug: bool = False
) -> tuple[Outcome, AugmentTrace]:
    """Build a rainbow matching of size k level by level.

    Returns ``Found`` or a ``HypothesisViolated`` witness together with the
    trace of every step.  ``debug`` re-checks the state invariants after
    every transition.
    """
    graph.require_valid()
    trace = AugmentTrace()
    if k <= 0:
        return Found(RainbowMatching()), trace
    if not graph.edges:
        stuck = Stuck(0 if graph.n else None, "no edges")
        outcome = _violation(graph, k, stuck)
        trace.add(TraceStep("hypothesis-violated", 1, 0, info=outcome.to_json()))
        return outcome, trace
    first = graph.edges[0]
    matching = RainbowMatching((first,))
    trace.add(TraceStep("induction-base", 1, 0, matching=(first,), found=True))
    for level in range(2, k + 1):
        res = _run_level(graph, matching, level, trace, debug)
        if isinstance(res, Stuck):
            outcome = _violation(graph, k, res)
            trace.add(TraceStep("hypothesis-violated", level, 0, info=outcome.to_json()))
            return outcome, trace
        matching = res
    return Found(matching), trace


def replay_trace(graph: EdgeColouredGraph, k: int, trace: AugmentTrace) -> Outcome:
    """Re-derive the outcome from the recorded steps alone.

    Each recorded transition is re-validated against the graph: matchings
    must be rainbow of the right size, absorbed edges must avoid M and M'
    and reuse a colour of M not yet in M'.  Raises ValueError on any
    inconsistency.
    """
    if k <= 0:
        return Found(RainbowMatching())
    m: list[Edge] = []
    mp: list[Edge] = []
    outcome: Optional[Outcome] = None

    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise ValueError(msg)

    def absorb(e: Edge) -> None:
        used = {x for a, b, _ in m + mp for x in (a, b)}
        need(graph.colour(e[0], e[1]) == e[2], f"absorbed edge {e} not in graph")
        need(e[0] not in used and e[1] not in used, f"absorbed edge {e} meets M or M'")
        need(e[2] in {c for *_, c in m}, f"absorbed colour {e[2]} not in M")
        need(e[2] not in {c for *_, c in mp}, f"absorbed colour {e[2]} already in M'")
        mp.append(e)

    for n_step, st in enumerate(trace.steps):
        if st.tag == "hypothesis-violated":
            info = st.info
            outcome = HypothesisViolated(
                info["reason"], info["k"], info["n"], info.get("vertex"), info.get("colour_degree")
            )
            need(outcome.holds_for(graph), f"step {n_step}: witness does not hold")
            break
        if st.found:
            need(st.matching is not None, f"step {n_step}: found without matching")
            need(len(st.matching) == len(m) + 1 == st.level, f"step {n_step}: wrong level size")
            need(matching_defect(graph, st.matching) is None, f"step {n_step}: not rainbow")
            m, mp = list(st.matching), []
            continue
        need(st.level == len(m) + 1, f"step {n_step}: level {st.level} with |M| = {len(m)}")
        if st.tag == "fact-a-grow":
            absorb(st.absorbed)
        elif st.tag == "m0-swap":
            m0 = list(st.matching)
            need(len(m0) == len(m), f"step {n_step}: M0 has wrong size")
            need(matching_defect(graph, m0) is None, f"step {n_step}: M0 is not rainbow")
            m0_vertices = {x for a, b, _ in m0 for x in (a, b)}
            need(
                all(a not in m0_vertices and b not in m0_vertices for a, b, _ in mp),
                f"step {n_step}: M0 meets M'",
            )
            m = m0
            absorb(st.absorbed)
        else:
            for e in st.edges:
                need(graph.colour(e[0], e[1]) == e[2], f"step {n_step}: edge {e} not in graph")
    if outcome is None:
        need(len(m) == k, f"trace ends with |M| = {len(m)} < {k}")
        outcome = Found(RainbowMatching(tuple(m)))
    return outcome

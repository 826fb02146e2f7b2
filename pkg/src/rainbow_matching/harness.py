"""Verification suites, the bounds registry and the tightness search."""

from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Union

from .enumeration import canonical_colourings
from .finder import Found, find_rainbow_matching, order_bound, replay_trace
from .formats import read_graph, to_json_obj, write_graph
from .generators import (
    double_k4,
    k_regular_k_coloured,
    one_factorization_complete,
    properly_coloured_k4,
    random_with_min_colour_degree,
)
from .graph import EdgeColouredGraph, is_rainbow_matching, min_colour_degree
from .oracle import max_rainbow_matching

EXHAUSTIVE_MAX_N = 5


@dataclass
class InstanceReport:
    label: str
    n: int
    k: int
    min_colour_degree: int
    meets_hypothesis: bool
    finder_outcome: str
    finder_size: int
    trace_length: int
    restarts: int
    replay_ok: bool
    finder_seconds: float
    oracle_size: Optional[int] = None
    oracle_certified: Optional[bool] = None
    oracle_below_k: Optional[bool] = None
    oracle_seconds: Optional[float] = None
    restarts_by_level: Optional[dict[int, int]] = None
    sound: bool = True
    within_measure: bool = True
    failure: Optional[str] = None
    branches: Optional[list[str]] = None
    graph: Optional[dict] = None

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def evaluate_instance(
    graph: EdgeColouredGraph,
    k: int,
    label: str = "",
    run_oracle: bool = True,
    oracle_exact: bool = False,
    debug: bool = False,
) -> InstanceReport:
    """Run finder (and optionally oracle) on one graph and cross-check them.

    ``failure`` is set when the finder misses under the hypothesis, a found
    matching is invalid, the trace does not replay, the restart count
    exceeds sum(1..k), a violation witness does not hold, or the oracle
    contradicts the finder.
    """
    delta = min_colour_degree(graph) if graph.n else 0
    meets = delta >= k and graph.n >= order_bound(k)
    t0 = time.perf_counter()
    outcome, trace = find_rainbow_matching(graph, k, debug=debug)
    t1 = time.perf_counter()
    problems = []
    sound = True
    if isinstance(outcome, Found):
        kind, size = "found", len(outcome.matching)
        sound = size == k and is_rainbow_matching(graph, outcome.matching)
        if not sound:
            problems.append("found matching is not a size-k rainbow matching")
    else:
        kind, size = "hypothesis-violated", 0
        if meets:
            problems.append("finder did not find a matching although the hypothesis holds")
        if not outcome.holds_for(graph):
            problems.append(f"violation witness does not hold: {outcome.to_json()}")
    try:
        replay_ok = replay_trace(graph, k, trace) == outcome
    except ValueError as exc:
        replay_ok = False
        problems.append(f"trace replay rejected: {exc}")
    else:
        if not replay_ok:
            problems.append("trace replay gave a different outcome")
    restarts = sum(trace.restarts.values())
    within = all(r <= level for level, r in trace.restarts.items()) and restarts <= k * (k + 1) // 2
    if not within:
        problems.append(f"restart count {dict(trace.restarts)} exceeds the termination measure")
    report = InstanceReport(
        label=label,
        n=graph.n,
        k=k,
        min_colour_degree=delta,
        meets_hypothesis=meets,
        finder_outcome=kind,
        finder_size=size,
        trace_length=len(trace),
        restarts=restarts,
        replay_ok=replay_ok,
        finder_seconds=round(t1 - t0, 6),
        restarts_by_level=dict(sorted(trace.restarts.items())),
        sound=sound,
        within_measure=within,
        branches=sorted(set(trace.tags())),
    )
    if run_oracle:
        t2 = time.perf_counter()
        res = max_rainbow_matching(graph, cutoff=None if oracle_exact else k)
        report.oracle_seconds = round(time.perf_counter() - t2, 6)
        report.oracle_size = res.size
        report.oracle_certified = res.certified
        report.oracle_below_k = res.upper_bound_below(k)
        if res.budget_exhausted:
            problems.append("oracle node budget exhausted")
        if report.oracle_below_k and kind == "found":
            problems.append("finder found a matching the oracle rules out")
        if report.oracle_below_k and meets:
            problems.append("oracle finds no size-k rainbow matching although the hypothesis holds")
    if problems:
        report.failure = "; ".join(problems)
        report.graph = to_json_obj(graph)
    return report


@dataclass
class SuiteReport:
    k: int
    n: int
    mode: str
    instances: int = 0
    meeting_hypothesis: int = 0
    found: int = 0
    oracle_checked: int = 0
    oracle_below_k: int = 0
    max_restarts: int = 0
    unsound: int = 0
    replay_failures: int = 0
    measure_violations: int = 0
    max_level_restarts: dict[int, int] = field(default_factory=dict)
    elapsed_seconds: float = 0.0
    failures: list[InstanceReport] = field(default_factory=list)
    below_k_examples: list[InstanceReport] = field(default_factory=list)
    tags: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.failures

    def add(self, rep: InstanceReport, keep_examples: int = 20) -> None:
        self.instances += 1
        self.meeting_hypothesis += rep.meets_hypothesis
        self.found += rep.finder_outcome == "found"
        self.max_restarts = max(self.max_restarts, rep.restarts)
        self.unsound += not rep.sound
        self.replay_failures += not rep.replay_ok
        self.measure_violations += not rep.within_measure
        for level, r in (rep.restarts_by_level or {}).items():
            self.max_level_restarts[level] = max(self.max_level_restarts.get(level, 0), r)
        if rep.oracle_size is not None:
            self.oracle_checked += 1
            if rep.oracle_below_k:
                self.oracle_below_k += 1
                if len(self.below_k_examples) < keep_examples:
                    self.below_k_examples.append(rep)
        if rep.failure:
            self.failures.append(rep)
        self.tags.update(rep.branches or ())

    def summary(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "mode": self.mode,
            "instances": self.instances,
            "meeting_hypothesis": self.meeting_hypothesis,
            "found": self.found,
            "oracle_checked": self.oracle_checked,
            "oracle_below_k": self.oracle_below_k,
            "failures": len(self.failures),
            "max_restarts": self.max_restarts,
            "unsound": self.unsound,
            "replay_failures": self.replay_failures,
            "measure_violations": self.measure_violations,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
        }

    def to_json(self) -> dict:
        out = self.summary()
        out["failure_reports"] = [r.to_json() for r in self.failures]
        out["below_k_examples"] = [r.to_json() for r in self.below_k_examples]
        out["tags"] = dict(sorted(self.tags.items()))
        out["max_level_restarts"] = {str(k): v for k, v in sorted(self.max_level_restarts.items())}
        return out


def sampled_instances(
    k: int, n: int, trials: int, seed: int
) -> Iterator[tuple[str, EdgeColouredGraph]]:
    """Reproducible stream of random graphs with minimum colour degree >= k.

    Palette size and edge density are drawn per trial, mostly sparse and
    with few colours, where the finder has to work hardest.
    """
    rng = random.Random(seed)
    for t in range(trials):
        palette = k + min(rng.randrange(k + 1), rng.randrange(k + 1))
        p = round(rng.uniform(0.0, 0.5) ** 2, 4)
        sub = rng.getrandbits(32)
        label = f"random(n={n},k={k},palette={palette},p={p},seed={sub})#{t}"
        yield label, random_with_min_colour_degree(n, k, palette, p, sub)


def exhaustive_instances(k: int, n: int) -> Iterator[tuple[str, EdgeColouredGraph]]:
    if n > EXHAUSTIVE_MAX_N:
        raise ValueError(f"exhaustive mode is limited to n <= {EXHAUSTIVE_MAX_N}")
    for i, g in enumerate(canonical_colourings(n, min_colour_degree=k)):
        yield f"colouring#{i}", g


def verify_theorem(
    k: int,
    n: int,
    mode: str = "sampled",
    trials: int = 1000,
    seed: int = 0,
    oracle_every: int = 1,
    extra: Iterable[tuple[str, EdgeColouredGraph]] = (),
    jsonl: Optional[io.TextIOBase] = None,
    debug: bool = False,
) -> SuiteReport:
    """Run finder and oracle over a suite of graphs with colour degree >= k.

    ``oracle_every`` spot-checks every j-th instance with the oracle
    (1 = all).  ``extra`` instances are evaluated first.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if mode == "exhaustive":
        stream = exhaustive_instances(k, n)
    elif mode == "sampled":
        stream = sampled_instances(k, n, trials, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    report = SuiteReport(k=k, n=n, mode=mode)
    t0 = time.perf_counter()
    extra = list(extra)
    for idx, (label, g) in enumerate(_chain(extra, stream)):
        rep = evaluate_instance(
            g, k, label, run_oracle=(idx < len(extra) or idx % oracle_every == 0), debug=debug
        )
        if rep.oracle_below_k and rep.graph is None:
            rep.graph = to_json_obj(g)
        report.add(rep)
        if jsonl is not None:
            jsonl.write(json.dumps(rep.to_json()) + "\n")
    report.elapsed_seconds = time.perf_counter() - t0
    return report


def _chain(first: list, rest: Iterator) -> Iterator:
    yield from first
    yield from rest


# -- bounds registry -----------------------------------------------------------

BOUND_IDS = ("liwang", "lesaulnier", "kostochka-yancey", "theorem1", "fkn-bound")


@dataclass
class BoundCheck:
    bound: str
    parameters: dict[str, Any]
    observed: int
    claimed: int
    passed: bool

    def to_json(self) -> dict:
        return asdict(self)


def _is_k4(g: EdgeColouredGraph) -> bool:
    return g.n == 4 and g.m == 6


def claimed_bounds(g: EdgeColouredGraph, delta: int) -> dict[str, tuple[int, str]]:
    """Rainbow matching sizes each cited result guarantees, with the variant used.

    Results that do not apply to ``g`` are left out.
    """
    k = delta
    out: dict[str, tuple[int, str]] = {}
    if k < 1:
        return out
    proper = g.is_proper()
    out["liwang"] = (math.ceil((5 * k - 3) / 12), "general")
    min_degree = min(g.degree(v) for v in range(g.n))
    if proper and not _is_k4(g) and g.n != min_degree + 2:
        out["lesaulnier"] = (math.ceil(k / 2), "proper, not K4, n != delta+2")
    else:
        out["lesaulnier"] = (k // 2, "general")
    if k >= 4:
        out["kostochka-yancey"] = (math.ceil(k / 2), "k >= 4")
    if g.n >= order_bound(k):
        out["theorem1"] = (k, f"n >= {order_bound(k)}")
    if proper:
        if k >= 4 and g.n >= 4 * k - 4:
            out["fkn-bound"] = (k, "proper, n >= 4k-4")
        elif 5 * g.n >= 8 * k:
            out["fkn-bound"] = ((3 * k) // 5, "proper, n >= 8k/5")
    return out


def builtin_bounds_suite(random_count: int = 100, seed: int = 2012) -> list[tuple[str, EdgeColouredGraph]]:
    suite = [
        ("k4-proper", properly_coloured_k4()),
        ("double-k4", double_k4()),
        ("one-factorization(m=4)", one_factorization_complete(4)),
        ("one-factorization(m=6)", one_factorization_complete(6)),
        ("k-regular-k-coloured(k=3,m=4)", k_regular_k_coloured(3, 4)),
    ]
    rng = random.Random(seed)
    while len(suite) < 5 + random_count:
        n = rng.randint(5, 10)
        k = rng.randint(1, min(4, n - 1))
        palette = k + rng.randrange(k + 2)
        p = round(rng.uniform(0.05, 0.6), 3)
        sub = rng.getrandbits(32)
        label = f"random(n={n},k={k},palette={palette},p={p},seed={sub})"
        try:
            suite.append((label, random_with_min_colour_degree(n, k, palette, p, sub)))
        except ValueError:
            continue  # infeasible draw, e.g. K5 with 4 colours and k = 4
    return suite


def bounds_registry(suite: Iterable[tuple[str, EdgeColouredGraph]]) -> list[BoundCheck]:
    """Compare the exact maximum against every applicable cited bound at k = min colour degree.

    Instances are grouped per (bound, k, variant); a group passes when its
    smallest observed maximum reaches the claimed size.
    """
    groups: dict[tuple[str, int, str], dict[str, Any]] = {}
    for label, g in suite:
        delta = min_colour_degree(g)
        res = max_rainbow_matching(g)
        if not res.certified:
            raise RuntimeError(f"oracle could not certify {label}")
        for bound, (claimed, variant) in claimed_bounds(g, delta).items():
            grp = groups.setdefault(
                (bound, delta, variant), {"claimed": claimed, "observed": res.size, "instances": []}
            )
            grp["observed"] = min(grp["observed"], res.size)
            grp["instances"].append(label)
    checks = []
    for (bound, k, variant), grp in sorted(groups.items(), key=lambda kv: (BOUND_IDS.index(kv[0][0]), kv[0][1:])):
        checks.append(
            BoundCheck(
                bound=bound,
                parameters={"k": k, "variant": variant, "instances": grp["instances"]},
                observed=grp["observed"],
                claimed=grp["claimed"],
                passed=grp["observed"] >= grp["claimed"],
            )
        )
    return checks


# -- tightness search ----------------------------------------------------------


@dataclass
class SearchResult:
    k: int
    n_values: list[int]
    moves: int
    best: dict[int, dict]
    witnesses: list[str]
    conclusive: bool
    log_path: Optional[str]

    def to_json(self) -> dict:
        return asdict(self)


def capped_rainbow_size(g: EdgeColouredGraph, k: int) -> tuple[int, bool]:
    """(min(max rainbow matching, k), certified).  Tries the fast finder first."""
    outcome, _ = find_rainbow_matching(g, k)
    if isinstance(outcome, Found):
        return k, True
    res = max_rainbow_matching(g, cutoff=k)
    return min(res.size, k), not res.budget_exhausted


def _colour_degrees(adj: list[dict[int, int]]) -> list[int]:
    return [len(set(a.values())) for a in adj]


def _energy(size: int, adj: list[dict[int, int]], k: int) -> float:
    n = len(adj)
    surplus = sum(d - k for d in _colour_degrees(adj)) / n
    return size + 0.05 * surplus


def verify_witness(path: Union[str, Path], k: int) -> bool:
    """Re-load a serialized witness and certify min colour degree >= k and max < k."""
    g = read_graph(path)
    if min_colour_degree(g) < k:
        return False
    res = max_rainbow_matching(g)
    return res.certified and res.size < k


def search_tightness(
    k: int,
    n_min: int,
    n_max: int,
    budget: int,
    seed: int = 0,
    out_dir: Union[str, Path, None] = None,
    temperature: float = 0.3,
) -> SearchResult:
    """Local search for graphs with colour degree >= k and no size-k rainbow matching.

    ``budget`` counts proposed moves per value of n.  Moves recolour,
    delete, add or rewire one edge; a move that drops any colour degree
    below k is rejected before it is scored.  Any instance with certified
    maximum below k is written to ``out_dir`` and re-verified from disk.
    Finding nothing is inconclusive.
    """
    if k < 4:
        raise ValueError("the order bound is already known to be sharp for k <= 3; use k >= 4")
    if not 2 * k <= n_min <= n_max <= 4 * k - 5:
        raise ValueError(f"n range must lie within [{2 * k}, {4 * k - 5}]")
    if budget < 1:
        raise ValueError("budget must be positive")
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    log_path = out / "search_log.jsonl" if out is not None else None
    log_file = open(log_path, "w") if log_path is not None else None
    rng = random.Random(seed)
    best: dict[int, dict] = {}
    witnesses: list[str] = []
    total_moves = 0

    def emit(event: dict) -> None:
        if log_file is not None:
            log_file.write(json.dumps(event, sort_keys=True) + "\n")

    try:
        for n in range(n_min, n_max + 1):
            palette = k + 1
            restart_every = max(budget // 4, 1)
            adj, energy, size = _restart(n, k, palette, rng)
            best[n] = {"energy": energy, "size": size, "graph": to_json_obj(_to_graph(adj))}
            emit({"event": "start", "n": n, "energy": energy, "size": size})
            stale = 0
            for step in range(budget):
                total_moves += 1
                temp = temperature * (0.01 ** (step / budget))
                if step and step % max(budget // 10, 1) == 0:
                    emit({"event": "progress", "n": n, "step": step, "energy": energy, "size": size})
                cand = _propose(adj, k, palette, rng)
                if cand is None:
                    stale += 1
                    if stale >= restart_every:
                        adj, energy, size = _restart(n, k, palette, rng)
                        stale = 0
                        emit({"event": "restart", "n": n, "step": step, "energy": energy})
                    continue
                g = _to_graph(cand)
                size_c, certified = capped_rainbow_size(g, k)
                e_c = _energy(size_c, cand, k)
                if e_c <= energy or rng.random() < math.exp(-(e_c - energy) / temp):
                    adj, energy, size = cand, e_c, size_c
                    if min(_colour_degrees(adj)) < k:
                        raise AssertionError("accepted move broke the colour degree invariant")
                if energy < best[n]["energy"] - 1e-12:
                    best[n] = {"energy": energy, "size": size, "graph": to_json_obj(_to_graph(adj))}
                    emit({"event": "improved", "n": n, "step": step, "energy": energy, "size": size})
                    stale = 0
                else:
                    stale += 1
                if size < k and certified:
                    path = out / f"witness_k{k}_n{n}_{len(witnesses)}.txt" if out else None
                    if path is not None:
                        write_graph(_to_graph(adj), path)
                        ok = verify_witness(path, k)
                        emit({"event": "witness", "n": n, "step": step, "path": str(path), "verified": ok})
                        if ok:
                            witnesses.append(str(path))
                    break
                if stale >= restart_every:
                    adj, energy, size = _restart(n, k, palette, rng)
                    stale = 0
                    emit({"event": "restart", "n": n, "step": step, "energy": energy})
            emit({"event": "done", "n": n, "best_energy": best[n]["energy"], "best_size": best[n]["size"]})
    finally:
        if log_file is not None:
            log_file.close()
    result = SearchResult(
        k=k,
        n_values=list(range(n_min, n_max + 1)),
        moves=total_moves,
        best=best,
        witnesses=witnesses,
        conclusive=bool(witnesses),
        log_path=str(log_path) if log_path else None,
    )
    if out is not None:
        (out / "search_summary.json").write_text(json.dumps(result.to_json(), indent=1))
    return result


def _start(n: int, k: int, palette: int, rng: random.Random) -> list[dict[int, int]]:
    g = random_with_min_colour_degree(n, k, palette, rng.uniform(0.0, 0.2), rng.getrandbits(32))
    adj: list[dict[int, int]] = [{} for _ in range(n)]
    for u, v, c in g.edges:
        adj[u][v] = c
        adj[v][u] = c
    return adj


def _restart(n: int, k: int, palette: int, rng: random.Random):
    adj = _start(n, k, palette, rng)
    size, _ = capped_rainbow_size(_to_graph(adj), k)
    return adj, _energy(size, adj, k), size


def _to_graph(adj: list[dict[int, int]]) -> EdgeColouredGraph:
    return EdgeColouredGraph(
        len(adj), [(u, v, c) for u in range(len(adj)) for v, c in adj[u].items() if u < v]
    )


def _propose(
    adj: list[dict[int, int]], k: int, palette: int, rng: random.Random
) -> Optional[list[dict[int, int]]]:
    n = len(adj)
    cand = [dict(a) for a in adj]
    edges = [(u, v) for u in range(n) for v in cand[u] if u < v]
    move = rng.random()
    if move < 0.4 and edges:
        u, v = rng.choice(edges)
        c = rng.randint(1, palette)
        cand[u][v] = cand[v][u] = c
    elif move < 0.7 and edges:
        u, v = rng.choice(edges)
        del cand[u][v], cand[v][u]
    elif move < 0.85:
        u, v = rng.sample(range(n), 2)
        if v in cand[u]:
            return None
        c = rng.randint(1, palette)
        cand[u][v] = cand[v][u] = c
    elif edges:
        u, v = rng.choice(edges)
        x = rng.randrange(n)
        if x in (u, v) or x in cand[u]:
            return None
        c = cand[u].pop(v)
        del cand[v][u]
        cand[u][x] = cand[x][u] = c
    else:
        return None
    if min(_colour_degrees(cand)) < k:
        return None
    return cand


# -- single file -----------------------------------------------------------------


def run_file(path: Union[str, Path], k: int, oracle_exact: bool = True) -> InstanceReport:
    graph = read_graph(path)
    return evaluate_instance(graph, k, label=str(path), run_oracle=True, oracle_exact=oracle_exact)


def write_csv(rows: list[dict], handle: io.TextIOBase) -> None:
    if not rows:
        return
    writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)

"""Heuristic path selection.

``select_best_path`` is a label-setting sweep in the spirit of Dijkstra
that greedily maximizes the product of bottleneck capacity and survival
probability along the way.  It is deliberately greedy and can miss the true
best path: once a node is settled through its locally best predecessor, the
route to everything downstream is committed.

``select_paths`` iterates it, peeling off the weakest link (smallest
capacity * survival) of each found path so the next sweep finds something
different, until the network disconnects or 5N paths are collected.

``build_candidate_paths`` turns that pool into the compact working set a
rate controller uses: for several probe blockage assignments, keep the
paths the average-rate optimum activates, take the union, and top up with
the strongest leftovers until a minimum count is reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .generation import assign_blockage, resample_capacities
from .network import Link, Network, Path, path_capacity, path_success
from .rates import Solver, optimal_average
from .simplex import solve_lp

_ACTIVE_TOL = 1e-9

_Adj = dict[int, dict[int, tuple[float, float]]]  # u -> v -> (capacity, block_prob)


def _adjacency(network: Network) -> _Adj:
    adj: _Adj = {}
    for link in network.links:
        adj.setdefault(link.src, {})[link.dst] = (link.capacity, link.block_prob)
    return adj


def _best_path(adj: _Adj, node_count: int) -> tuple[Path | None, tuple[int, ...]]:
    """One greedy sweep; returns the found path (or None) and the settle order.

    weight[v] tracks the best capacity*survival product known for reaching
    v; the source starts at +inf so it settles first, and unreachable nodes
    keep a distinct undefined marker (never a numeric -inf) so the
    predecessor-chain walk terminates exactly.
    """
    source, dest = 0, node_count - 1
    weight: list[float | None] = [None] * node_count
    capacity: list[float | None] = [None] * node_count
    success: list[float] = [1.0] * node_count
    previous: list[int | None] = [None] * node_count
    weight[source] = math.inf
    capacity[source] = math.inf

    settled: list[int] = []
    unsettled = set(range(node_count))
    while unsettled:
        # largest weight first; undefined loses to any value; ties by index
        u = min(unsettled, key=lambda i: (-(weight[i] if weight[i] is not None else -math.inf), i))
        unsettled.remove(u)
        settled.append(u)
        if weight[u] is None:
            continue
        for v in sorted(adj.get(u, ())):
            if v not in unsettled:
                continue
            cap, prob = adj[u][v]
            a = success[u] * (1.0 - prob)
            b = min(capacity[u], cap)
            c = a * b
            if weight[v] is None or c > weight[v]:
                weight[v] = c
                success[v] = a
                capacity[v] = b
                previous[v] = u

    chain: list[int] = []
    u: int | None = dest
    while u is not None:
        if previous[u] is None and u != source:
            return None, tuple(settled)
        chain.insert(0, u)
        u = previous[u]
    if chain[0] != source:
        return None, tuple(settled)
    return Path(tuple(chain)), tuple(settled)


def select_best_path(network: Network) -> Path | None:
    """Greedy highest capacity*survival path, or None when disconnected."""
    path, _ = _best_path(_adjacency(network), network.node_count)
    return path


def select_paths(network: Network) -> tuple[Path, ...]:
    """Iterated greedy selection with weakest-link removal, up to 5N paths.

    Operates on a working copy; the caller's network is never mutated.
    """
    adj = _adjacency(network)
    limit = 5 * network.n_relays
    pool: list[Path] = []
    while len(pool) < limit:
        path, _ = _best_path(adj, network.node_count)
        if path is None:
            break
        pool.append(path)
        # drop the on-path link with the smallest capacity * survival,
        # lexicographically smallest link on ties
        worst = min(
            path.edges,
            key=lambda e: (adj[e[0]][e[1]][0] * (1.0 - adj[e[0]][e[1]][1]), e),
        )
        del adj[worst[0]][worst[1]]
    return tuple(pool)


@dataclass(frozen=True)
class CandidateSelection:
    paths: tuple[Path, ...]
    shortfall: bool  # fewer than the requested minimum exist


def candidate_paths_from_probes(
    probes: Sequence[Network],
    min_count: int,
    solver: Solver = solve_lp,
) -> CandidateSelection:
    """Union of average-rate-optimal path sets across probe networks.

    Each probe shares the base topology but carries its own blockage
    probabilities (and possibly capacities).  Paths the probe's average-rate
    optimum activates are collected in probe order (largest fraction first
    within a probe); if the union stays below ``min_count``, the unused pool
    paths with the highest capacity*survival score (best across probes) are
    appended.
    """
    if not probes:
        raise ValueError("need at least one probe network")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    chosen: list[Path] = []
    seen: set[Path] = set()
    scores: dict[Path, float] = {}
    for probe in probes:
        pool = select_paths(probe)
        for p in pool:
            score = path_capacity(probe, p) * path_success(probe, p)
            scores[p] = max(score, scores.get(p, -math.inf))
        sol = optimal_average(probe, pool, solver)
        ranked = sorted(
            ((x, p) for p, x in zip(sol.paths, sol.fractions) if x > _ACTIVE_TOL),
            key=lambda t: (-t[0], t[1].nodes),
        )
        for _, p in ranked:
            if p not in seen:
                seen.add(p)
                chosen.append(p)
    if len(chosen) < min_count:
        spare = sorted(
            (p for p in scores if p not in seen),
            key=lambda p: (-scores[p], p.nodes),
        )
        for p in spare:
            chosen.append(p)
            seen.add(p)
            if len(chosen) >= min_count:
                break
    return CandidateSelection(tuple(chosen), len(chosen) < min_count)


def build_candidate_paths(
    network: Network,
    intensity_sets: Sequence[float | Mapping[tuple[int, int], float]],
    blockage_scale: float,
    min_count: int,
    capacity_seeds: Sequence[int] | None = None,
    capacity_sigma: float = 1.0,
    solver: Solver = solve_lp,
) -> CandidateSelection:
    """Candidate working set from blocker-intensity probe assignments.

    Each entry of ``intensity_sets`` is a per-link (or scalar) blocker
    intensity turned into blockage probabilities on the base network; an
    entry of None keeps the network's own probabilities.  When
    ``capacity_seeds`` is given (time-varying operation) the probe also
    resamples link capacities around the base network's values.
    """
    if not intensity_sets:
        raise ValueError("need at least one intensity set")
    if capacity_seeds is not None and len(capacity_seeds) != len(intensity_sets):
        raise ValueError("capacity_seeds must align with intensity_sets")
    probes = []
    for i, lam in enumerate(intensity_sets):
        probe = network if lam is None else assign_blockage(network, lam, blockage_scale)
        if capacity_seeds is not None:
            probe = resample_capacities(probe, capacity_seeds[i], capacity_sigma)
        probes.append(probe)
    return candidate_paths_from_probes(probes, min_count, solver)

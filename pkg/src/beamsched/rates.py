"""Packet-rate optimizers over an explicit path set.

Four objectives share one constraint system (per-node beam-time rows):

* approximate capacity  -- maximize sum x_p * C_p;
* worst case            -- maximize the rate that survives any choice of
  ``blocked_budget`` failed links, linearized through an epigraph variable
  with one constraint per failure pattern;
* average               -- maximize sum x_p * C_p * S_p where S_p is the
  path's survival probability;
* feasibility           -- find any schedule delivering exactly a target
  rate (equality written as two opposing inequalities).

Also here: the resilience trade-off table, the edge-disjoint rebuild of a
worst-case optimum for equal-capacity networks, and delivered-rate moments
under random blockage (exhaustive for small link counts, seeded Monte Carlo
above).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .network import (
    BlockageRealization,
    Network,
    Path,
    Schedule,
    delivered_rate,
    enumerate_paths,
    path_capacity,
    path_success,
)
from .simplex import INFEASIBLE, OPTIMAL, LinearProgram, LpSolution, solve_lp

DEFAULT_PATTERN_BUDGET = 200_000
_ACTIVE_TOL = 1e-9

Solver = Callable[[LinearProgram], LpSolution]


class PatternBudgetError(RuntimeError):
    """Too many failure patterns to enumerate within the configured budget."""


@dataclass(frozen=True)
class RateSolution:
    """Objective value plus the schedule that attains it.

    ``fractions`` aligns with the path order handed to the optimizer;
    ``worst_pattern`` carries one rate-minimizing link pattern for
    worst-case solutions.
    """

    status: str
    value: float
    paths: tuple[Path, ...]
    fractions: tuple[float, ...]
    worst_pattern: frozenset[tuple[int, int]] | None = None

    @property
    def schedule(self) -> Schedule:
        return Schedule(dict(zip(self.paths, self.fractions)))

    def active(self, tol: float = _ACTIVE_TOL) -> tuple[Path, ...]:
        return tuple(p for p, x in zip(self.paths, self.fractions) if x > tol)


def _zero_solution(paths: Sequence[Path]) -> RateSolution:
    return RateSolution(OPTIMAL, 0.0, tuple(paths), (0.0,) * len(paths))


def beam_time_rows(network: Network, paths: Sequence[Path]) -> tuple[list[list[float]], list[float]]:
    """The per-node transmit/receive constraint rows of the scheduling LP.

    One transmit row per node 0..N and one receive row per node 1..N+1,
    2N+2 rows total; the coefficient of path p at its on-path node i is
    C_p divided by the capacity of the link p uses there.  Zero-capacity
    paths must be filtered out by the caller.
    """
    n = len(paths)
    caps = [path_capacity(network, p) for p in paths]
    tx_row = {i: [0.0] * n for i in range(network.node_count - 1)}
    rx_row = {i: [0.0] * n for i in range(1, network.node_count)}
    for j, path in enumerate(paths):
        for u, v in path.edges:
            share = caps[j] / network.capacity(u, v)
            tx_row[u][j] += share
            rx_row[v][j] += share
    rows = [tx_row[i] for i in sorted(tx_row)] + [rx_row[i] for i in sorted(rx_row)]
    return rows, [1.0] * len(rows)


def _split_paths(network: Network, paths: Sequence[Path]) -> tuple[list[Path], list[float]]:
    """Keep paths with positive capacity; zero-capacity paths can only
    carry fraction 0 and would poison the LP coefficients."""
    kept, caps = [], []
    for p in paths:
        c = path_capacity(network, p)
        if c > 0.0:
            kept.append(p)
            caps.append(c)
    return kept, caps


def _assemble(
    network: Network,
    paths: Sequence[Path],
    objective: Sequence[float],
    extra_rows: Sequence[Sequence[float]] = (),
    extra_rhs: Sequence[float] = (),
) -> LinearProgram:
    rows, rhs = beam_time_rows(network, paths)
    pad = [0.0] * (len(objective) - len(paths))  # auxiliary variables (epigraph t)
    rows = [list(r) + pad for r in rows] + [list(r) for r in extra_rows]
    rhs = list(rhs) + list(extra_rhs)
    return LinearProgram(tuple(objective), tuple(map(tuple, rows)), tuple(rhs))


def _clip(x: Iterable[float]) -> tuple[float, ...]:
    return tuple(0.0 if abs(v) < 1e-12 else float(v) for v in x)


def _expand(paths: Sequence[Path], kept: Sequence[Path], kept_x: Sequence[float]) -> tuple[float, ...]:
    by_path = dict(zip(kept, kept_x))
    return tuple(by_path.get(p, 0.0) for p in paths)


def approx_capacity(network: Network, paths: Sequence[Path], solver: Solver = solve_lp) -> RateSolution:
    """Best cumulative rate with no blockage: maximize sum x_p * C_p."""
    for p in paths:
        network.validate_path(p)
    kept, caps = _split_paths(network, paths)
    if not kept:
        return _zero_solution(paths)
    sol = solver(_assemble(network, kept, caps))
    if sol.status != OPTIMAL:
        return RateSolution(sol.status, 0.0, tuple(paths), (0.0,) * len(paths))
    return RateSolution(OPTIMAL, sol.objective, tuple(paths), _expand(paths, kept, _clip(sol.x)))


def optimal_average(network: Network, paths: Sequence[Path], solver: Solver = solve_lp) -> RateSolution:
    """Maximize the expected delivered rate sum x_p * C_p * S_p."""
    for p in paths:
        network.validate_path(p)
    kept, caps = _split_paths(network, paths)
    if not kept:
        return _zero_solution(paths)
    weights = [c * path_success(network, p) for c, p in zip(caps, kept)]
    sol = solver(_assemble(network, kept, weights))
    if sol.status != OPTIMAL:
        return RateSolution(sol.status, 0.0, tuple(paths), (0.0,) * len(paths))
    return RateSolution(OPTIMAL, sol.objective, tuple(paths), _expand(paths, kept, _clip(sol.x)))


def plain_lp_average_rate(network: Network, paths: Sequence[Path], solver: Solver = solve_lp) -> float:
    """Expected delivered rate of the blockage-blind capacity schedule."""
    sol = approx_capacity(network, paths, solver)
    return sum(
        x * path_capacity(network, p) * path_success(network, p)
        for p, x in zip(sol.paths, sol.fractions)
    )


def feasibility_schedule(
    network: Network, paths: Sequence[Path], target_rate: float, solver: Solver = solve_lp
) -> RateSolution:
    """Any schedule delivering exactly ``target_rate`` (objective 0)."""
    if target_rate < 0.0:
        raise ValueError("target_rate must be >= 0")
    for p in paths:
        network.validate_path(p)
    kept, caps = _split_paths(network, paths)
    if not kept:
        if target_rate == 0.0:
            return _zero_solution(paths)
        return RateSolution(INFEASIBLE, 0.0, tuple(paths), (0.0,) * len(paths))
    # equality as a pair of opposing <= rows sharing the solver tolerance
    extra_rows = [list(caps), [-c for c in caps]]
    extra_rhs = [target_rate, -target_rate]
    sol = solver(_assemble(network, kept, [0.0] * len(kept), extra_rows, extra_rhs))
    if sol.status != OPTIMAL:
        return RateSolution(sol.status, 0.0, tuple(paths), (0.0,) * len(paths))
    x = _clip(sol.x)
    value = sum(c * v for c, v in zip(caps, x))
    return RateSolution(OPTIMAL, value, tuple(paths), _expand(paths, kept, x))


# ---------------------------------------------------------------------------
# worst case over k blocked links

def _blocked_path_sets(
    links: Sequence[tuple[int, int]],
    path_edges: Sequence[frozenset[tuple[int, int]]],
    blocked_count: int,
    pattern_budget: int,
) -> dict[frozenset[int], tuple[tuple[int, int], ...]]:
    """Map each distinct blocked-path set to one representative link pattern.

    Patterns whose blocked-path set is contained in another's are dominated
    (their surviving rate can only be larger) and are pruned when the number
    of distinct sets stays small enough for the quadratic sweep.
    """
    total = math.comb(len(links), blocked_count)
    if total > pattern_budget:
        raise PatternBudgetError(
            f"{total} failure patterns exceed the budget of {pattern_budget}; "
            "raise pattern_budget to proceed"
        )
    reps: dict[frozenset[int], tuple[tuple[int, int], ...]] = {}
    for combo in itertools.combinations(links, blocked_count):
        hit = frozenset(
            i for i, edges in enumerate(path_edges) if any(e in edges for e in combo)
        )
        reps.setdefault(hit, combo)
    if len(reps) <= 4000:
        ordered = sorted(reps, key=len, reverse=True)
        maximal: list[frozenset[int]] = []
        for s in ordered:
            if not any(s < kept for kept in maximal):
                maximal.append(s)
        reps = {s: reps[s] for s in maximal}
    return reps


def optimal_worst_case(
    network: Network,
    paths: Sequence[Path],
    blocked_budget: int,
    solver: Solver = solve_lp,
    pattern_budget: int = DEFAULT_PATTERN_BUDGET,
) -> RateSolution:
    """Maximize the rate guaranteed under any ``blocked_budget`` link failures.

    Epigraph form: maximize t subject to, for every failure pattern, t minus
    the rate surviving that pattern being <= 0, on top of the beam-time rows.
    Returns the schedule, the guaranteed rate t, and one tight pattern.
    """
    links = sorted(network.link_ends)
    if not 0 <= blocked_budget <= len(links):
        raise ValueError(f"blocked_budget must be in [0, {len(links)}]")
    for p in paths:
        network.validate_path(p)
    kept, caps = _split_paths(network, paths)
    if not kept:
        return _zero_solution(paths)

    path_edges = [frozenset(p.edges) for p in kept]
    reps = _blocked_path_sets(links, path_edges, blocked_budget, pattern_budget)

    n = len(kept)
    extra_rows = []
    for hit in reps:
        row = [-caps[j] if j not in hit else 0.0 for j in range(n)] + [1.0]
        extra_rows.append(row)
    objective = [0.0] * n + [1.0]
    sol = solver(_assemble(network, kept, objective, extra_rows, [0.0] * len(extra_rows)))
    if sol.status != OPTIMAL:
        return RateSolution(sol.status, 0.0, tuple(paths), (0.0,) * len(paths))
    x = _clip(sol.x[:n])
    rates = [c * v for c, v in zip(caps, x)]
    total = sum(rates)
    witness, worst = None, math.inf
    for hit, combo in reps.items():
        surviving = total - sum(rates[j] for j in hit)
        if surviving < worst:
            worst, witness = surviving, combo
    return RateSolution(
        OPTIMAL,
        sol.objective,
        tuple(paths),
        _expand(paths, kept, x),
        frozenset(witness) if witness is not None else frozenset(),
    )


def min_rate_under_blockage(
    network: Network,
    paths: Sequence[Path],
    fractions: Sequence[float],
    blocked_count: int,
    pattern_budget: int = DEFAULT_PATTERN_BUDGET,
) -> tuple[float, frozenset[tuple[int, int]]]:
    """Worst delivered rate of a fixed schedule over all ``blocked_count``-link
    failure patterns, with one minimizing pattern."""
    links = sorted(network.link_ends)
    path_edges = [frozenset(p.edges) for p in paths]
    rates = [x * path_capacity(network, p) for p, x in zip(paths, fractions)]
    total = sum(rates)
    reps = _blocked_path_sets(links, path_edges, blocked_count, pattern_budget)
    worst, witness = math.inf, ()
    for hit, combo in reps.items():
        surviving = total - sum(rates[j] for j in hit)
        if surviving < worst:
            worst, witness = surviving, combo
    return worst, frozenset(witness)


@dataclass(frozen=True)
class TradeoffEntry:
    schedule_budget: int  # failures the schedule was optimized against
    blocked_count: int  # failures actually applied
    rate: float


def tradeoff_curve(
    network: Network,
    paths: Sequence[Path],
    max_budget: int,
    solver: Solver = solve_lp,
    pattern_budget: int = DEFAULT_PATTERN_BUDGET,
) -> tuple[TradeoffEntry, ...]:
    """Resilience / packet-rate trade-off table.

    For each schedule budget k* in 0..max_budget, fix the worst-case-optimal
    schedule for k* failures, then report the surviving rate under the
    adversarial choice of k failures for every k in 0..max_budget.
    """
    if not 0 <= max_budget <= len(network.link_ends):
        raise ValueError("max_budget must be within the link count")
    entries = []
    for schedule_budget in range(max_budget + 1):
        sol = optimal_worst_case(network, paths, schedule_budget, solver, pattern_budget)
        for blocked_count in range(max_budget + 1):
            rate, _ = min_rate_under_blockage(
                network, sol.paths, sol.fractions, blocked_count, pattern_budget
            )
            entries.append(TradeoffEntry(schedule_budget, blocked_count, rate))
    return tuple(entries)


def tradeoff_to_csv(entries: Iterable[TradeoffEntry]) -> str:
    lines = ["k_star,k,rate"]
    lines += [f"{e.schedule_budget},{e.blocked_count},{e.rate!r}" for e in entries]
    return "\n".join(lines) + "\n"


def schedule_to_csv(paths: Sequence[Path], fractions: Sequence[float]) -> str:
    lines = ["path_id,x_p"]
    lines += [f"{i},{x!r}" for i, x in enumerate(fractions)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# edge-disjoint rebuild for equal-capacity networks

def _max_edge_disjoint_subset(paths: Sequence[Path]) -> tuple[int, ...]:
    """Indices of a maximum edge-disjoint subset, preferring earlier paths.

    Exact branch-and-bound for up to 24 conflicting paths, greedy fallback
    above (the exact size only matters at desk scale).
    """
    edges = [frozenset(p.edges) for p in paths]
    n = len(paths)
    conflicts = [
        {j for j in range(n) if j != i and edges[i] & edges[j]} for i in range(n)
    ]
    isolated = [i for i in range(n) if not conflicts[i]]
    rest = [i for i in range(n) if conflicts[i]]
    if len(rest) > 24:
        chosen: list[int] = []
        used: set[tuple[int, int]] = set()
        for i in sorted(rest, key=lambda i: (len(conflicts[i]), i)):
            if not (edges[i] & used):
                chosen.append(i)
                used |= edges[i]
        return tuple(sorted(isolated + chosen))

    best: list[int] = []

    def search(pos: int, picked: list[int], used: frozenset) -> None:
        nonlocal best
        if len(picked) + (len(rest) - pos) <= len(best):
            return
        if pos == len(rest):
            if len(picked) > len(best):
                best = list(picked)
            return
        i = rest[pos]
        if not (edges[i] & used):
            picked.append(i)
            search(pos + 1, picked, used | edges[i])
            picked.pop()
        search(pos + 1, picked, used)

    search(0, [], frozenset())
    return tuple(sorted(isolated + best))


@dataclass(frozen=True)
class EdgeDisjointSolution:
    paths: tuple[Path, ...]
    fractions: tuple[float, ...]
    value: float

    @property
    def schedule(self) -> Schedule:
        return Schedule(dict(zip(self.paths, self.fractions)))


def edge_disjoint_worst_case(
    network: Network,
    blocked_budget: int,
    paths: Sequence[Path] | None = None,
    solver: Solver = solve_lp,
    pattern_budget: int = DEFAULT_PATTERN_BUDGET,
) -> EdgeDisjointSolution:
    """Rebuild a worst-case optimum as an edge-disjoint schedule.

    Only valid when every link has the same capacity m.  Solve the
    worst-case LP; if the active paths are already pairwise edge-disjoint,
    return them untouched.  Otherwise keep the already-disjoint active
    paths, add one representative per overlapping cluster so the disjoint
    count is as large as possible, and spread the optimum t* evenly:
    x_p = t* / (m * (|selected| - blocked_budget)).
    """
    caps = sorted({l.capacity for l in network.links})
    if not caps or caps[0] <= 0.0 or caps[-1] - caps[0] > 1e-12 * max(caps[-1], 1.0):
        raise ValueError("edge-disjoint rebuild requires equal positive link capacities")
    m = caps[0]

    if paths is None:
        enum = enumerate_paths(network)
        if enum.truncated:
            raise ValueError("path enumeration truncated; pass an explicit path set")
        paths = enum.paths
    sol = optimal_worst_case(network, paths, blocked_budget, solver, pattern_budget)
    if sol.value <= _ACTIVE_TOL:
        return EdgeDisjointSolution((), (), 0.0)

    active = [(p, x) for p, x in zip(sol.paths, sol.fractions) if x > _ACTIVE_TOL]
    active_paths = [p for p, _ in active]
    edge_sets = [frozenset(p.edges) for p in active_paths]
    disjoint_already = all(
        not (edge_sets[i] & edge_sets[j])
        for i in range(len(edge_sets))
        for j in range(i + 1, len(edge_sets))
    )
    if disjoint_already:
        return EdgeDisjointSolution(
            tuple(active_paths), tuple(x for _, x in active), sol.value
        )

    chosen = _max_edge_disjoint_subset(active_paths)
    selected = tuple(active_paths[i] for i in chosen)
    surviving = len(selected) - blocked_budget
    if surviving <= 0:
        return EdgeDisjointSolution(selected, (0.0,) * len(selected), 0.0)
    share = sol.value / (m * surviving)
    return EdgeDisjointSolution(selected, (share,) * len(selected), sol.value)


# ---------------------------------------------------------------------------
# delivered-rate moments under random blockage

def rate_statistics(
    network: Network,
    schedule: Schedule,
    seed: int = 0,
    samples: int = 1_000_000,
    exhaustive_limit: int = 20,
) -> tuple[float, float]:
    """Mean and variance of the delivered rate over independent link blockage.

    Exhaustive enumeration over the scheduled paths' uncertain links when
    there are at most ``exhaustive_limit`` of them, seeded Monte Carlo with
    ``samples`` draws otherwise.
    """
    loads = [(p, x * path_capacity(network, p)) for p, x in schedule.items() if x > 0.0]
    link_ids = sorted({e for p, _ in loads for e in p.edges})
    probs = {e: network.block_prob(*e) for e in link_ids}
    always = {e for e in link_ids if probs[e] >= 1.0}
    uncertain = [e for e in link_ids if 0.0 < probs[e] < 1.0]

    def rate_for(blocked: set[tuple[int, int]]) -> float:
        total = 0.0
        for p, r in loads:
            if not any(e in blocked for e in p.edges):
                total += r
        return total

    if len(uncertain) <= exhaustive_limit:
        mean = 0.0
        second = 0.0
        for mask in range(1 << len(uncertain)):
            weight = 1.0
            blocked = set(always)
            for i, e in enumerate(uncertain):
                if mask >> i & 1:
                    weight *= probs[e]
                    blocked.add(e)
                else:
                    weight *= 1.0 - probs[e]
            r = rate_for(blocked)
            mean += weight * r
            second += weight * r * r
        return mean, second - mean * mean

    rng = np.random.default_rng(seed)
    p_vec = np.array([probs[e] for e in uncertain])
    path_masks = []
    for p, r in loads:
        idx = [i for i, e in enumerate(uncertain) if e in set(p.edges)]
        dead = any(e in always for e in p.edges)
        path_masks.append((np.array(idx, dtype=int), 0.0 if dead else r))
    mean = 0.0
    second = 0.0
    done = 0
    chunk = 20_000
    while done < samples:
        size = min(chunk, samples - done)
        draws = rng.random((size, len(uncertain))) < p_vec
        rates = np.zeros(size)
        for idx, r in path_masks:
            if r == 0.0:
                continue
            ok = ~draws[:, idx].any(axis=1) if idx.size else np.ones(size, dtype=bool)
            rates += np.where(ok, r, 0.0)
        mean += rates.sum()
        second += (rates * rates).sum()
        done += size
    mean /= samples
    second /= samples
    return mean, second - mean * mean

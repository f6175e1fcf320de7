"""Shared fixtures-as-functions: reference networks and independent oracles."""

from __future__ import annotations

import itertools

import numpy as np

from beamsched import Link, Network, Path, enumerate_paths


def fig1_network(shared_prob: float = 0.0) -> Network:
    """Two 3-hop paths merging at node 3; optional blockage on link 2->3."""
    return Network(
        3,
        (
            Link(0, 1, 3.0),
            Link(1, 3, 3.0),
            Link(0, 2, 4.0),
            Link(2, 3, 12.0, shared_prob),
            Link(3, 4, 6.0),
        ),
    )


def two_hop_network(caps, probs=None) -> Network:
    """One relay per path: source -> relay i -> destination."""
    probs = probs if probs is not None else [0.0] * len(caps)
    links = []
    for i, (c, p) in enumerate(zip(caps, probs), start=1):
        links.append(Link(0, i, c, p))
        links.append(Link(i, len(caps) + 1, c, p))
    return Network(len(caps), tuple(links))


def fig2a_squared() -> Network:
    return two_hop_network([1.0, 4.0, 9.0, 16.0, 25.0])


def fig2a_linear() -> Network:
    return two_hop_network([1.0, 2.0, 3.0, 4.0, 5.0], [0.1, 0.1, 0.1, 0.1, 2 / 3])


_FIG4_UNIT = [(0, 1), (1, 2), (3, 4), (4, 5), (5, 13), (7, 8)]
_FIG4_WIDE = [(0, 9), (9, 10), (10, 11), (11, 12), (12, 13)]
_FIG4_MID = [(0, 6), (6, 2), (2, 3), (3, 7), (8, 13)]


def fig4_worst() -> Network:
    """Overlapping-path example: capacities 1 / 4 / 2 by link group."""
    links = [Link(u, v, 1.0) for u, v in _FIG4_UNIT]
    links += [Link(u, v, 4.0) for u, v in _FIG4_WIDE]
    links += [Link(u, v, 2.0) for u, v in _FIG4_MID]
    return Network(12, tuple(links))


def fig4_average() -> Network:
    """Same topology, detour links unitary, blockage 1/5 except 1/3 on them."""
    wide = set(_FIG4_WIDE)
    links = [Link(u, v, 1.0, 0.2) for u, v in _FIG4_UNIT]
    links += [Link(u, v, 1.0, 1 / 3) for u, v in _FIG4_WIDE]
    links += [Link(u, v, 2.0, 0.2) for u, v in _FIG4_MID]
    return Network(12, tuple(links))


def fig4_without_detour() -> Network:
    """The four overlapping paths only: capacities 2, blockage 1/5, 11 links."""
    links = [Link(u, v, 2.0, 0.2) for u, v in _FIG4_UNIT + _FIG4_MID]
    return Network(12, tuple(links))


def example5_network() -> Network:
    return Network(
        3,
        (
            Link(0, 1, 10.0),
            Link(0, 2, 10.0),
            Link(2, 3, 6.0, 0.5),
            Link(1, 3, 1.0),
            Link(3, 4, 1.0),
        ),
    )


def path_by_nodes(network: Network, *nodes: int) -> Path:
    p = Path(tuple(nodes))
    network.validate_path(p)
    return p


def random_layered_network(
    rng: np.random.Generator,
    max_relays: int = 8,
    link_prob: float = 0.4,
    equal_capacity: float | None = None,
    max_links: int | None = None,
) -> Network:
    """Random forward-oriented DAG guaranteed to contain at least one path."""
    while True:
        n = int(rng.integers(1, max_relays + 1))
        dest = n + 1
        links = []
        for u in range(dest):
            for v in range(u + 1, dest + 1):
                if rng.random() < link_prob:
                    cap = equal_capacity if equal_capacity is not None else float(rng.uniform(0.5, 4.0))
                    links.append(Link(u, v, cap, float(rng.uniform(0.0, 0.9))))
        if max_links is not None and len(links) > max_links:
            continue
        if not links:
            continue
        net = Network(n, tuple(links))
        if enumerate_paths(net, 10_000).paths:
            return net


def lp_vertex_oracle(c, A, b, tol: float = 1e-9) -> tuple[bool, float | None]:
    """Brute-force vertex enumeration for max c.x, Ax <= b, x >= 0.

    The feasible region is pointed (x >= 0), so it is nonempty exactly when
    some vertex is feasible, and a bounded optimum is attained at one.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(b), len(c))
    b = np.asarray(b, dtype=float)
    n = len(c)
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = None
    feasible = False
    for rows in itertools.combinations(range(G.shape[0]), n):
        M = G[list(rows)]
        rhs = h[list(rows)]
        try:
            x = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            continue
        if not np.isfinite(x).all() or np.abs(M @ x - rhs).max() > 1e-7:
            continue
        if (G @ x <= h + tol).all():
            feasible = True
            value = float(c @ x)
            if best is None or value > best:
                best = value
    return feasible, best


def random_bounded_lp(rng: np.random.Generator):
    """Feasible-or-not random LP that is always bounded (box row included)."""
    n = int(rng.integers(1, 6))
    extra_rows = int(rng.integers(0, 6))
    c = rng.uniform(-1.0, 2.0, n)
    rows = [np.ones(n)]
    rhs = [float(rng.uniform(0.5, 3.0))]
    for _ in range(extra_rows):
        rows.append(rng.uniform(-1.0, 2.0, n))
        rhs.append(float(rng.uniform(-0.5, 2.0)))
    if rng.random() < 0.3:  # equality pair forces a phase-1 start
        a = rng.uniform(0.1, 1.0, n)
        level = float(rng.uniform(0.0, 1.0))
        rows.append(a)
        rhs.append(level)
        rows.append(-a)
        rhs.append(-level)
    A = np.array(rows)
    b = np.array(rhs)
    return c, A, b

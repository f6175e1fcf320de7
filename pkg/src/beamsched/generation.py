"""Seeded topology, capacity, and blockage generation.

Topologies are random geometric DAGs: nodes get uniform coordinates, the
node order is fixed by distance from the source (destination last), and
forward links are added shortest-first until the source-to-destination
simple-path count reaches the configured minimum.  Link capacities follow
log2(1 + snr_ref * g / d^2) with a Rician power fading gain g, a crude but
adequate stand-in for an omnidirectional path-loss channel at desk scale.

Blockage: a link's blocker arrival rate is intensity * distance; over the
blockage-scale window tau that becomes p = 1 - exp(-intensity * d * tau).
The rate-to-probability conversion is a modeling choice (the window is
configurable), not a claim.

Every operation is a pure function of (inputs, seed); nothing reads ambient
randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .network import BlockageRealization, Link, Network


class MissingCoordinatesError(ValueError):
    """Distance-based blockage needs node coordinates."""


@dataclass(frozen=True)
class GenConfig:
    n_relays: int
    seed: int
    coord_range: tuple[float, float] = (0.0, 100.0)
    intensity_range: tuple[float, float] = (200.0, 600.0)
    blockage_scale: float = 5e-5
    rician_k_db: float = 10.0
    snr_ref: float = 5e4
    min_path_count: int = 1000
    path_count_cap: int = 200_000

    def __post_init__(self) -> None:
        if self.n_relays < 1:
            raise ValueError("n_relays must be >= 1")
        if self.coord_range[0] > self.coord_range[1]:
            raise ValueError("coord_range is empty")
        if self.intensity_range[0] > self.intensity_range[1] or self.intensity_range[0] < 0:
            raise ValueError("intensity_range must be nonnegative and nonempty")
        if self.blockage_scale <= 0:
            raise ValueError("blockage_scale must be > 0")
        if self.min_path_count < 1 or self.path_count_cap < 1:
            raise ValueError("path counts must be >= 1")


class GeneratedNetwork(NamedTuple):
    network: Network
    path_count: int
    reached_min_paths: bool  # False flags a path-count shortfall


def _rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, stream, index)))


def _count_paths(order: list[int], links: set[tuple[int, int]], dest: int) -> int:
    ways = {u: 0 for u in order}
    ways[0] = 1
    for u in order:
        if ways[u] == 0:
            continue
        for x, v in links:
            if x == u:
                ways[v] += ways[u]
    return ways[dest]


def generate_topology(cfg: GenConfig) -> GeneratedNetwork:
    """Random geometric DAG with at least ``min_path_count`` paths if the
    candidate links allow it; otherwise the shortfall is flagged."""
    dest = cfg.n_relays + 1
    lo, hi = cfg.coord_range
    coord_rng = _rng(cfg.seed, 0)
    coords = [(float(x), float(y)) for x, y in coord_rng.uniform(lo, hi, size=(dest + 1, 2))]

    def dist(u: int, v: int) -> float:
        return math.hypot(coords[u][0] - coords[v][0], coords[u][1] - coords[v][1])

    relays = sorted(range(1, dest), key=lambda i: (dist(0, i), i))
    order = [0, *relays, dest]
    rank = {u: i for i, u in enumerate(order)}

    candidates = sorted(
        (
            (u, v)
            for u in order
            for v in order
            if rank[u] < rank[v] and u != dest and v != 0
        ),
        key=lambda e: (dist(*e), e),
    )

    links: set[tuple[int, int]] = set()
    for u in order[:-1]:  # shortest outgoing link per non-destination node
        outs = [e for e in candidates if e[0] == u]
        if outs:
            links.add(outs[0])
    for v in order[1:]:  # shortest incoming link per non-source node
        ins = [e for e in candidates if e[1] == v]
        if ins:
            links.add(ins[0])

    count = _count_paths(order, links, dest)
    for e in candidates:
        if count >= cfg.min_path_count:
            break
        if e in links:
            continue
        links.add(e)
        count = _count_paths(order, links, dest)

    k = 10.0 ** (cfg.rician_k_db / 10.0)
    los = math.sqrt(k / (k + 1.0))
    scatter = math.sqrt(1.0 / (2.0 * (k + 1.0)))
    fading_rng = _rng(cfg.seed, 1)
    link_objs = []
    for u, v in sorted(links):
        re, im = fading_rng.standard_normal(2)
        gain = (los + scatter * re) ** 2 + (scatter * im) ** 2
        d = max(dist(u, v), 1e-9)
        capacity = math.log2(1.0 + cfg.snr_ref * gain / (d * d))
        link_objs.append(Link(u, v, capacity, 0.0))

    network = Network(cfg.n_relays, tuple(link_objs), tuple(coords))
    return GeneratedNetwork(network, count, count >= cfg.min_path_count)


def assign_blockage(
    network: Network,
    intensity: float | Mapping[tuple[int, int], float],
    blockage_scale: float,
) -> Network:
    """Blockage probabilities from blocker intensities:
    p = 1 - exp(-intensity * distance * blockage_scale)."""
    if network.coords is None:
        raise MissingCoordinatesError("blockage assignment needs node coordinates")
    if blockage_scale <= 0:
        raise ValueError("blockage_scale must be > 0")

    def lam_for(u: int, v: int) -> float:
        lam = intensity[(u, v)] if isinstance(intensity, Mapping) else float(intensity)
        if lam < 0:
            raise ValueError(f"intensity for link ({u},{v}) must be >= 0")
        return lam

    new_links = []
    for link in network.links:
        rate = lam_for(link.src, link.dst) * network.distance(link.src, link.dst)
        prob = -math.expm1(-rate * blockage_scale)
        new_links.append(Link(link.src, link.dst, link.capacity, prob))
    return network.replace_links(new_links)


def sample_intensities(
    network: Network, seed: int, intensity_range: tuple[float, float] = (200.0, 600.0)
) -> dict[tuple[int, int], float]:
    """One uniform blocker intensity per link, in deterministic link order."""
    rng = _rng(seed, 2)
    lo, hi = intensity_range
    return {link.ends: float(rng.uniform(lo, hi)) for link in network.links}


def sample_blockage(network: Network, seed: int) -> BlockageRealization:
    """Independent Bernoulli blockage per link, deterministic from the seed."""
    rng = _rng(seed, 3)
    blocked = set()
    for link in network.links:
        if rng.random() < link.block_prob:
            blocked.add(link.ends)
    return BlockageRealization(frozenset(blocked))


def resample_capacities(network: Network, seed: int, sigma: float = 1.0) -> Network:
    """Gaussian capacity draw around each link's current value, clamped at 0.

    The caller keeps the original network as the source of the static means
    for future resamples.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rng = _rng(seed, 4)
    new_links = []
    for link in network.links:
        cap = float(rng.normal(link.capacity, sigma)) if sigma > 0 else link.capacity
        new_links.append(Link(link.src, link.dst, max(cap, 0.0), link.block_prob))
    return network.replace_links(new_links)

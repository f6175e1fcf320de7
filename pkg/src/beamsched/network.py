"""Data model for 1-2-1 relay networks: links, paths, schedules, blockage.

Nodes are dense integers ``0..n_relays+1``: node 0 is the traffic source and
node ``n_relays+1`` the destination.  A directed link ``(u, v)`` carries a
capacity (bits per channel use) and an independent blockage probability.
Every node steers a single transmit beam and a single receive beam, so a
path delivering rate ``r`` keeps each on-path transmitter (and receiver)
busy for a fraction ``r / link_capacity`` of the time; all feasibility
checks reduce to keeping those per-node beam-time fractions at or below 1.

A path's deliverable rate equals its bottleneck (minimum) link capacity.
That definition is inferred from the beam-time accounting above (pushing
more than the bottleneck through any link would need a fraction > 1) and is
flagged here so a reader can audit it.

All types are immutable after construction; operations are pure functions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

FEASIBILITY_TOL = 1e-9
DEFAULT_MAX_PATHS = 100_000


class InvalidPathError(ValueError):
    """A node sequence is not a source-to-destination path of the network."""


@dataclass(frozen=True)
class Link:
    src: int
    dst: int
    capacity: float
    block_prob: float = 0.0

    def __post_init__(self) -> None:
        if self.src == self.dst:
            raise ValueError(f"self-loop at node {self.src}")
        if not (math.isfinite(self.capacity) and self.capacity >= 0.0):
            raise ValueError(f"link ({self.src},{self.dst}): capacity must be finite and >= 0")
        if not (0.0 <= self.block_prob <= 1.0):
            raise ValueError(f"link ({self.src},{self.dst}): block_prob must be in [0,1]")

    @property
    def ends(self) -> tuple[int, int]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class Network:
    """Directed relay network with per-link capacities and blockage odds.

    ``coords``, when present, gives an (x, y) position for every node
    0..n_relays+1 and enables distance-based blockage assignment.
    """

    n_relays: int
    links: tuple[Link, ...]
    coords: tuple[tuple[float, float], ...] | None = None

    # lookup tables derived once; the dataclass stays frozen
    _by_ends: dict[tuple[int, int], Link] = field(init=False, repr=False, compare=False)
    _succ: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n_relays < 0:
            raise ValueError("n_relays must be >= 0")
        dest = self.n_relays + 1
        by_ends: dict[tuple[int, int], Link] = {}
        succ: dict[int, list[int]] = {}
        for link in self.links:
            if not (0 <= link.src <= dest and 0 <= link.dst <= dest):
                raise ValueError(f"link {link.ends}: node out of range 0..{dest}")
            if link.dst == 0:
                raise ValueError(f"link {link.ends}: no link may enter the source")
            if link.src == dest:
                raise ValueError(f"link {link.ends}: no link may leave the destination")
            if link.ends in by_ends:
                raise ValueError(f"duplicate link {link.ends}")
            by_ends[link.ends] = link
            succ.setdefault(link.src, []).append(link.dst)
        if self.coords is not None:
            if len(self.coords) != dest + 1:
                raise ValueError(f"coords must cover all {dest + 1} nodes")
            object.__setattr__(self, "coords", tuple((float(x), float(y)) for x, y in self.coords))
        object.__setattr__(self, "links", tuple(sorted(self.links, key=lambda l: l.ends)))
        object.__setattr__(self, "_by_ends", by_ends)
        object.__setattr__(self, "_succ", {u: tuple(sorted(vs)) for u, vs in succ.items()})

    @property
    def source(self) -> int:
        return 0

    @property
    def destination(self) -> int:
        return self.n_relays + 1

    @property
    def node_count(self) -> int:
        return self.n_relays + 2

    @property
    def link_ends(self) -> frozenset[tuple[int, int]]:
        return frozenset(self._by_ends)

    def has_link(self, u: int, v: int) -> bool:
        return (u, v) in self._by_ends

    def link(self, u: int, v: int) -> Link:
        return self._by_ends[(u, v)]

    def capacity(self, u: int, v: int) -> float:
        return self._by_ends[(u, v)].capacity

    def block_prob(self, u: int, v: int) -> float:
        return self._by_ends[(u, v)].block_prob

    def successors(self, u: int) -> tuple[int, ...]:
        return self._succ.get(u, ())

    def distance(self, u: int, v: int) -> float:
        if self.coords is None:
            raise ValueError("network has no node coordinates")
        (xu, yu), (xv, yv) = self.coords[u], self.coords[v]
        return math.hypot(xu - xv, yu - yv)

    def replace_links(self, links: Iterable[Link]) -> "Network":
        return Network(self.n_relays, tuple(links), self.coords)

    def validate_path(self, path: "Path") -> None:
        """Raise InvalidPathError unless ``path`` runs source-to-destination
        over existing links."""
        if path.nodes[0] != self.source or path.nodes[-1] != self.destination:
            raise InvalidPathError(f"path {path.nodes} must run from node 0 to node {self.destination}")
        for u, v in path.edges:
            if not self.has_link(u, v):
                raise InvalidPathError(f"path {path.nodes}: missing link ({u},{v})")


@dataclass(frozen=True)
class Path:
    """Simple source-to-destination node sequence."""

    nodes: tuple[int, ...]

    def __post_init__(self) -> None:
        nodes = tuple(int(n) for n in self.nodes)
        if len(nodes) < 2:
            raise InvalidPathError("a path needs at least two nodes")
        if len(set(nodes)) != len(nodes):
            raise InvalidPathError(f"path {nodes} repeats a node")
        if any(n < 0 for n in nodes):
            raise InvalidPathError(f"path {nodes}: negative node id")
        object.__setattr__(self, "nodes", nodes)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.nodes, self.nodes[1:]))

    def __iter__(self) -> Iterator[int]:
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __str__(self) -> str:
        return "-".join(str(n) for n in self.nodes)


@dataclass(frozen=True)
class Schedule:
    """Activation-time fraction per path.

    Fractions must be nonnegative and finite; node feasibility is the job
    of :func:`validate_schedule`, not the constructor.
    """

    fractions: Mapping[Path, float]

    def __post_init__(self) -> None:
        clean: dict[Path, float] = {}
        for path, frac in self.fractions.items():
            frac = float(frac)
            if not math.isfinite(frac) or frac < 0.0:
                raise ValueError(f"fraction for {path} must be finite and >= 0, got {frac}")
            clean[path] = frac
        object.__setattr__(self, "fractions", clean)

    def items(self) -> Iterable[tuple[Path, float]]:
        return self.fractions.items()

    def fraction(self, path: Path) -> float:
        return self.fractions.get(path, 0.0)

    def active(self, tol: float = 1e-12) -> tuple[Path, ...]:
        return tuple(p for p, x in self.fractions.items() if x > tol)

    @property
    def empty(self) -> bool:
        return all(x == 0.0 for x in self.fractions.values())


@dataclass(frozen=True)
class BlockageRealization:
    """Set of links that are permanently blocked for this realization's
    lifetime."""

    blocked: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocked", frozenset((int(u), int(v)) for u, v in self.blocked))

    def blocks(self, path: Path) -> bool:
        return any(e in self.blocked for e in path.edges)

    def __len__(self) -> int:
        return len(self.blocked)


EMPTY_BLOCKAGE = BlockageRealization(frozenset())


def path_capacity(network: Network, path: Path) -> float:
    """Bottleneck link capacity of ``path``; 0 if any link has zero capacity."""
    network.validate_path(path)
    return min(network.capacity(u, v) for u, v in path.edges)


def path_success(network: Network, path: Path) -> float:
    """Probability that no link of ``path`` is blocked."""
    network.validate_path(path)
    prob = 1.0
    for u, v in path.edges:
        prob *= 1.0 - network.block_prob(u, v)
    return prob


class PathEnumeration(NamedTuple):
    paths: tuple[Path, ...]
    truncated: bool


def enumerate_paths(network: Network, max_paths: int = DEFAULT_MAX_PATHS) -> PathEnumeration:
    """All simple source-to-destination paths, lexicographic by node sequence.

    Stops after ``max_paths`` paths and flags the truncation; the flag is
    part of the result so truncation can never pass silently.
    """
    if max_paths < 1:
        raise ValueError("max_paths must be >= 1")
    dest = network.destination
    found: list[Path] = []
    truncated = False
    on_stack: set[int] = set()
    trail: list[int] = []

    def walk(u: int) -> bool:
        # returns False once the cap is hit and a further path was seen
        if u == dest:
            if len(found) >= max_paths:
                return False
            found.append(Path(tuple(trail)))
            return True
        for v in network.successors(u):
            if v in on_stack:
                continue
            on_stack.add(v)
            trail.append(v)
            ok = walk(v)
            trail.pop()
            on_stack.remove(v)
            if not ok:
                return False
        return True

    on_stack.add(network.source)
    trail.append(network.source)
    truncated = not walk(network.source)
    return PathEnumeration(tuple(found), truncated)


def _accumulate_loads(
    network: Network,
    loads: Iterable[tuple[Path, float]],
    capacity_of,
) -> tuple[dict[int, float], dict[int, float], bool]:
    """Per-node transmit/receive beam-time fractions for (path, rate) loads.

    A positive rate over a zero-capacity link makes the loads infeasible;
    that is reported via the flag, never via a division fault.
    """
    tx = {i: 0.0 for i in range(network.node_count)}
    rx = {i: 0.0 for i in range(network.node_count)}
    ok = True
    for path, rate in loads:
        if rate <= 0.0:
            continue
        for u, v in path.edges:
            cap = capacity_of(u, v)
            if cap <= 0.0:
                ok = False
                continue
            tx[u] += rate / cap
            rx[v] += rate / cap
    return tx, rx, ok


@dataclass(frozen=True)
class ScheduleValidation:
    valid: bool
    transmit: Mapping[int, float]
    receive: Mapping[int, float]
    note: str = ""


def validate_schedule(network: Network, schedule: Schedule, tol: float = FEASIBILITY_TOL) -> ScheduleValidation:
    """Check a schedule against the per-node beam-time constraints.

    Transmit fraction of node i is the sum over scheduled paths through i of
    x_p * C_p / capacity(i -> next); receive is symmetric.  Valid iff every
    fraction is <= 1 + tol.  A scheduled path crossing a zero-capacity link
    yields an infeasible verdict.
    """
    loads = []
    note = ""
    ok = True
    for path, frac in schedule.items():
        network.validate_path(path)
        cap = path_capacity(network, path)
        if frac > 0.0 and cap == 0.0:
            ok = False
            note = f"path {path} has a zero-capacity link but fraction {frac}"
            continue
        loads.append((path, frac * cap))
    tx, rx, loads_ok = _accumulate_loads(network, loads, network.capacity)
    ok = ok and loads_ok
    over = [i for i in tx if tx[i] > 1.0 + tol] + [i for i in rx if rx[i] > 1.0 + tol]
    if over and not note:
        note = f"beam-time over 1 at nodes {sorted(set(over))}"
    return ScheduleValidation(ok and not over, tx, rx, note)


def delivered_rate(network: Network, schedule: Schedule, blockage: BlockageRealization) -> float:
    """Total rate of unblocked scheduled paths.

    A blocked path contributes nothing: its reserved beam time stays idle.
    """
    unknown = blockage.blocked - network.link_ends
    if unknown:
        raise ValueError(f"blockage mentions unknown links {sorted(unknown)}")
    total = 0.0
    for path, frac in schedule.items():
        if frac <= 0.0 or blockage.blocks(path):
            continue
        total += frac * path_capacity(network, path)
    return total


# ---------------------------------------------------------------------------
# file formats (documented in docs/formats.md)

def network_to_doc(network: Network) -> dict:
    doc: dict = {
        "n_relays": network.n_relays,
        "links": [[l.src, l.dst, l.capacity, l.block_prob] for l in network.links],
    }
    if network.coords is not None:
        doc["nodes"] = [[i, x, y] for i, (x, y) in enumerate(network.coords)]
    return doc


def network_from_doc(doc: Mapping) -> Network:
    n_relays = int(doc["n_relays"])
    links = tuple(Link(int(s), int(d), float(c), float(p)) for s, d, c, p in doc["links"])
    coords = None
    if doc.get("nodes"):
        slots: list[tuple[float, float] | None] = [None] * (n_relays + 2)
        for node_id, x, y in doc["nodes"]:
            node_id = int(node_id)
            if not 0 <= node_id <= n_relays + 1:
                raise ValueError(f"node id {node_id} out of range")
            if slots[node_id] is not None:
                raise ValueError(f"duplicate node id {node_id}")
            slots[node_id] = (float(x), float(y))
        missing = [i for i, s in enumerate(slots) if s is None]
        if missing:
            raise ValueError(f"nodes section misses ids {missing}")
        coords = tuple(slots)  # type: ignore[arg-type]
    return Network(n_relays, links, coords)


def save_network(network: Network, filename: str) -> None:
    with open(filename, "w", encoding="utf-8") as fh:
        json.dump(network_to_doc(network), fh, indent=2)
        fh.write("\n")


def load_network(filename: str) -> Network:
    with open(filename, "r", encoding="utf-8") as fh:
        return network_from_doc(json.load(fh))


def paths_to_doc(paths: Iterable[Path]) -> dict:
    return {"paths": [list(p.nodes) for p in paths]}


def paths_from_doc(doc: Mapping) -> tuple[Path, ...]:
    return tuple(Path(tuple(int(n) for n in nodes)) for nodes in doc["paths"])


def save_paths(paths: Iterable[Path], filename: str) -> None:
    with open(filename, "w", encoding="utf-8") as fh:
        json.dump(paths_to_doc(paths), fh, indent=2)
        fh.write("\n")


def load_paths(filename: str) -> tuple[Path, ...]:
    with open(filename, "r", encoding="utf-8") as fh:
        return paths_from_doc(json.load(fh))

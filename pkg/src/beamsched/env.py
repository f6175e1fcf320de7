"""Episodic path-rate scheduling environment.

The state is the vector of requested per-path packet rates; an action is an
additive adjustment.  A candidate next state is accepted only when it is
physically valid: all rates nonnegative and every node's beam-time fraction
(rate divided by current link capacity, blocked links counting as capacity
zero) at most 1.  Invalid candidates leave the state unchanged, which is
the only way blockage becomes observable here: there is no side channel.

Reward is 1 exactly when the summed rate reaches the target (the episode
then ends); otherwise exp(rate)/reward_scale, which stays far below 1 as
long as reward_scale >= exp(max achievable rate).  Episodes also end at the
horizon.  Blockage is redrawn every ``epoch_episodes`` episodes and held
fixed in between; in time-varying mode link capacities are resampled every
episode around their static means.

Static baselines live here too: they fix one schedule up front and simply
collect what it delivers as blockage (and capacities) evolve, with blocked
paths' reserved airtime idling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .generation import resample_capacities, sample_blockage, sample_intensities
from .network import (
    BlockageRealization,
    EMPTY_BLOCKAGE,
    Network,
    Path,
    Schedule,
    _accumulate_loads,
    delivered_rate,
    path_capacity,
    path_success,
)
from .rates import approx_capacity
from .selection import CandidateSelection, build_candidate_paths

FEASIBILITY_TOL = 1e-9

METRICS_HEADER = "episode,avg_training_rate,evaluation_rate,r_star,pct_paths_blocked"


class MalformedActionError(ValueError):
    """Action vector with wrong length or non-finite entries."""


@dataclass(frozen=True)
class PathInfo:
    """Per-path metadata handed out on reset so an agent can rank paths."""

    id: int
    capacity: float
    success_prob: float


@dataclass(frozen=True)
class StepOutcome:
    state: tuple[float, ...]
    reward: float
    done: bool
    accepted: bool
    delivered_rate: float


@dataclass(frozen=True)
class EnvConfig:
    network: Network  # static network; blockage probabilities assigned
    paths: tuple[Path, ...]
    target_rate: float
    seed: int
    horizon: int = 500
    reward_scale: float = 1e7
    epoch_episodes: int = 10
    time_varying: bool = False
    capacity_sigma: float = 1.0
    target_fraction: float | None = None  # re-derive target from current paths
    reselect_patience: int | None = None  # steps without success; default 5*horizon
    min_candidates: int = 10
    probe_sets: int = 5
    intensity_range: tuple[float, float] = (200.0, 600.0)
    blockage_scale: float = 5e-5
    explore_prob: float = 0.01  # advisory for agents; unused by the env

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.paths:
            raise ValueError("need at least one path")
        if self.target_rate < 0:
            raise ValueError("target_rate must be >= 0")
        if self.epoch_episodes < 1:
            raise ValueError("epoch_episodes must be >= 1")
        for p in self.paths:
            self.network.validate_path(p)
        # shaped rewards must stay below the success reward of 1
        max_rate = approx_capacity(self.network, self.paths).value
        if math.log(self.reward_scale) < max_rate:
            raise ValueError(
                f"reward_scale {self.reward_scale} is below exp(max rate {max_rate:.3f}); "
                "shaped rewards would reach 1"
            )

    @property
    def patience(self) -> int:
        return self.reselect_patience if self.reselect_patience is not None else 5 * self.horizon


def child_seed(seed: int, stream: int, index: int = 0) -> int:
    """Deterministic sub-seed; stable across processes, unlike hash()."""
    state = np.random.SeedSequence((seed, stream, index)).generate_state(1, np.uint64)
    return int(state[0])


_BLOCKAGE_STREAM = 10
_CAPACITY_STREAM = 11
_RESELECT_STREAM = 12


def epoch_blockage(config: EnvConfig, episode: int) -> BlockageRealization:
    """The blockage realization in force during ``episode`` (pure in seed)."""
    epoch = episode // config.epoch_episodes
    return sample_blockage(config.network, child_seed(config.seed, _BLOCKAGE_STREAM, epoch))


def episode_network(config: EnvConfig, episode: int) -> Network:
    """The episode's network: static, or capacity-resampled around it."""
    if not config.time_varying:
        return config.network
    return resample_capacities(
        config.network,
        child_seed(config.seed, _CAPACITY_STREAM, episode),
        config.capacity_sigma,
    )


class RateEnv:
    """One training session.  Sessions are independent; run many in
    parallel with distinct seeds, never share one instance across threads."""

    def __init__(self, config: EnvConfig):
        self.config = config
        self.paths: tuple[Path, ...] = config.paths
        self.episode: int | None = None
        self.steps = 0
        self.done = True
        self._net = config.network
        self._blockage = EMPTY_BLOCKAGE
        self._state = np.zeros(len(self.paths))
        self._reselects = 0

    @property
    def k(self) -> int:
        return len(self.paths)

    @property
    def state(self) -> np.ndarray:
        return self._state.copy()

    @property
    def current_network(self) -> Network:
        return self._net

    @property
    def blockage(self) -> BlockageRealization:
        return self._blockage

    @property
    def target_rate(self) -> float:
        if self.config.target_fraction is not None and self.config.time_varying:
            return self.config.target_fraction * approx_capacity(self._net, self.paths).value
        return self.config.target_rate

    def path_metadata(self) -> tuple[PathInfo, ...]:
        return tuple(
            PathInfo(
                i,
                path_capacity(self.config.network, p),
                path_success(self.config.network, p),
            )
            for i, p in enumerate(self.paths)
        )

    def pct_paths_blocked(self) -> float:
        return sum(1 for p in self.paths if self._blockage.blocks(p)) / len(self.paths)

    def reset(self, episode: int | None = None) -> tuple[np.ndarray, tuple[PathInfo, ...]]:
        """Start an episode: zero state, epoch blockage, episode capacities."""
        if episode is None:
            episode = 0 if self.episode is None else self.episode + 1
        if episode < 0:
            raise ValueError("episode index must be >= 0")
        self.episode = episode
        self.steps = 0
        self.done = False
        self._blockage = epoch_blockage(self.config, episode)
        self._net = episode_network(self.config, episode)
        self._state = np.zeros(len(self.paths))
        return self.state, self.path_metadata()

    def _capacity_with_blockage(self, u: int, v: int) -> float:
        if (u, v) in self._blockage.blocked:
            return 0.0
        return self._net.capacity(u, v)

    def is_valid(self, candidate: np.ndarray) -> bool:
        """Nonnegative rates whose beam-time fractions fit at every node,
        with blocked links treated as zero capacity."""
        if candidate.shape != (len(self.paths),):
            return False
        if not np.isfinite(candidate).all() or (candidate < 0.0).any():
            return False
        loads = list(zip(self.paths, (float(r) for r in candidate)))
        tx, rx, ok = _accumulate_loads(self.config.network, loads, self._capacity_with_blockage)
        if not ok:
            return False
        limit = 1.0 + FEASIBILITY_TOL
        return all(v <= limit for v in tx.values()) and all(v <= limit for v in rx.values())

    def step(self, action: Sequence[float]) -> StepOutcome:
        if self.episode is None:
            raise RuntimeError("reset() must be called before step()")
        if self.done:
            raise RuntimeError("episode is over; call reset()")
        arr = np.asarray(action, dtype=float)
        if arr.shape != (len(self.paths),) or not np.isfinite(arr).all():
            raise MalformedActionError(
                f"action must be {len(self.paths)} finite numbers, got {action!r}"
            )
        candidate = self._state + arr
        accepted = self.is_valid(candidate)
        if accepted:
            self._state = candidate
        self.steps += 1
        rate = float(self._state.sum())
        if rate >= self.target_rate:
            reward, self.done = 1.0, True
        else:
            reward = math.exp(rate) / self.config.reward_scale
            self.done = self.steps >= self.config.horizon
        return StepOutcome(tuple(float(v) for v in self._state), reward, self.done, accepted, rate)

    def reselect(self) -> tuple[np.ndarray, tuple[PathInfo, ...]]:
        """Rebuild the candidate path set and restart from a zero state.

        Probes the current-episode network with its own blockage statistics
        plus fresh blocker-intensity assignments (when coordinates allow),
        mirroring the initial selection procedure.  Only ever runs on
        request: the trigger policy lives agent-side.
        """
        if self.episode is None:
            raise RuntimeError("reset() must be called before reselect()")
        self._reselects += 1
        base = self._net if self.config.time_varying else self.config.network
        intensity_sets: list = [None]
        if base.coords is not None:
            for i in range(max(self.config.probe_sets - 1, 0)):
                intensity_sets.append(
                    sample_intensities(
                        base,
                        child_seed(self.config.seed, _RESELECT_STREAM, self._reselects * 1000 + i),
                        self.config.intensity_range,
                    )
                )
        selection = build_candidate_paths(
            base,
            intensity_sets,
            self.config.blockage_scale,
            self.config.min_candidates,
        )
        if selection.paths:
            self.paths = selection.paths
        self._state = np.zeros(len(self.paths))
        self.done = False
        self.steps = 0
        return self.state, self.path_metadata()


# ---------------------------------------------------------------------------
# static baselines and path-set pickers

def run_baseline_static(config: EnvConfig, schedule: Schedule, episodes: int) -> list[float]:
    """Delivered rate per episode for a schedule fixed once up front.

    Nothing is re-optimized: blocked or infeasible allocations idle, exactly
    what a controller that never revisits its schedule would get.
    """
    series = []
    for episode in range(episodes):
        net = episode_network(config, episode)
        blockage = epoch_blockage(config, episode)
        series.append(delivered_rate(net, schedule, blockage))
    return series


def pick_hc_paths(
    network: Network, all_paths: Sequence[Path], k: int
) -> tuple[tuple[Path, ...], bool]:
    """The k paths with the highest activation time in the capacity optimum;
    shortfall flagged when fewer are active."""
    if k < 1:
        raise ValueError("k must be >= 1")
    sol = approx_capacity(network, all_paths)
    ranked = [(x, i, p) for i, (p, x) in enumerate(zip(sol.paths, sol.fractions)) if x > 1e-9]
    ranked.sort(key=lambda t: (-t[0], t[1]))
    picked = tuple(p for _, _, p in ranked[:k])
    return picked, len(picked) < k


def pick_rs_paths(all_paths: Sequence[Path], k: int, seed: int) -> tuple[tuple[Path, ...], bool]:
    """Seeded uniform sample of k paths without replacement."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    if k >= len(all_paths):
        return tuple(all_paths), k > len(all_paths)
    idx = sorted(rng.choice(len(all_paths), size=k, replace=False).tolist())
    return tuple(all_paths[i] for i in idx), False


# ---------------------------------------------------------------------------
# metrics

def avg_training_rate(trace: Sequence[float], horizon: int) -> float:
    """Mean per-step delivered rate over the full horizon, holding the last
    rate for the steps an early-terminated episode never ran."""
    if not trace:
        raise ValueError("empty episode trace")
    if len(trace) > horizon:
        raise ValueError("trace longer than the horizon")
    return (sum(trace) + (horizon - len(trace)) * trace[-1]) / horizon


def evaluation_rollup(final_rates: Sequence[float]) -> float:
    """Mean final rate over evaluation rollouts."""
    if not final_rates:
        raise ValueError("no rollout rates")
    return sum(final_rates) / len(final_rates)


def metrics_to_csv(rows: Iterable[tuple[int, float, float, float, float]]) -> str:
    lines = [METRICS_HEADER]
    for episode, train, evaluation, target, pct in rows:
        lines.append(f"{episode},{train!r},{evaluation!r},{target!r},{pct!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# environment config document (consumed by the server and written by the CLI)

def env_config_to_doc(config: EnvConfig) -> dict:
    from .network import network_to_doc

    return {
        "network": network_to_doc(config.network),
        "paths": [list(p.nodes) for p in config.paths],
        "target_rate": config.target_rate,
        "seed": config.seed,
        "horizon": config.horizon,
        "reward_scale": config.reward_scale,
        "epoch_episodes": config.epoch_episodes,
        "time_varying": config.time_varying,
        "capacity_sigma": config.capacity_sigma,
        "target_fraction": config.target_fraction,
        "reselect_patience": config.reselect_patience,
        "min_candidates": config.min_candidates,
        "probe_sets": config.probe_sets,
        "intensity_range": list(config.intensity_range),
        "blockage_scale": config.blockage_scale,
        "explore_prob": config.explore_prob,
    }


def env_config_from_doc(doc: dict) -> EnvConfig:
    from .network import network_from_doc

    network = network_from_doc(doc["network"])
    return EnvConfig(
        network=network,
        paths=tuple(Path(tuple(int(n) for n in nodes)) for nodes in doc["paths"]),
        target_rate=float(doc["target_rate"]),
        seed=int(doc["seed"]),
        horizon=int(doc.get("horizon", 500)),
        reward_scale=float(doc.get("reward_scale", 1e7)),
        epoch_episodes=int(doc.get("epoch_episodes", 10)),
        time_varying=bool(doc.get("time_varying", False)),
        capacity_sigma=float(doc.get("capacity_sigma", 1.0)),
        target_fraction=(None if doc.get("target_fraction") is None else float(doc["target_fraction"])),
        reselect_patience=(None if doc.get("reselect_patience") is None else int(doc["reselect_patience"])),
        min_candidates=int(doc.get("min_candidates", 10)),
        probe_sets=int(doc.get("probe_sets", 5)),
        intensity_range=tuple(doc.get("intensity_range", (200.0, 600.0))),  # type: ignore[arg-type]
        blockage_scale=float(doc.get("blockage_scale", 5e-5)),
        explore_prob=float(doc.get("explore_prob", 0.01)),
    )


def load_env_config(filename: str) -> EnvConfig:
    import json

    with open(filename, "r", encoding="utf-8") as fh:
        return env_config_from_doc(json.load(fh))


def save_env_config(config: EnvConfig, filename: str) -> None:
    import json

    with open(filename, "w", encoding="utf-8") as fh:
        json.dump(env_config_to_doc(config), fh, indent=2)
        fh.write("\n")

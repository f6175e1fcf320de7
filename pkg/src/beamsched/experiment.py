"""End-to-end experiment assembly: generate instances, fix baselines, and
write everything an out-of-process agent needs to train.

Each seeded instance gets its own directory with the generated network, a
reproducibility manifest of the generation config, the candidate / highest-
capacity / random path sets, ready-to-serve environment documents for each
path-set variant, and the per-episode delivered-rate series of the two
static baselines (capacity-optimal schedule and target-rate feasibility
schedule).  Identical config and seed reproduce identical bytes.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

from . import __version__
from .env import (
    EnvConfig,
    child_seed,
    epoch_blockage,
    episode_network,
    metrics_to_csv,
    pick_hc_paths,
    pick_rs_paths,
    save_env_config,
)
from .generation import GenConfig, assign_blockage, generate_topology, sample_intensities
from .network import Network, Path, Schedule, delivered_rate, enumerate_paths, save_network, save_paths
from .rates import approx_capacity, feasibility_schedule
from .selection import build_candidate_paths

_INSTANCE_STREAM = 20
_INTENSITY_STREAM = 21
_PROBE_STREAM = 22
_RS_STREAM = 23

DEFAULT_CONFIG: dict = {
    "topology": {
        "n_relays": 25,
        "coord_range": [0.0, 100.0],
        "intensity_range": [200.0, 600.0],
        "blockage_scale": 5e-5,
        "rician_k_db": 10.0,
        "snr_ref": 5e4,
        "min_path_count": 1000,
        "path_count_cap": 200_000,
    },
    "experiment": {
        "instances": 5,
        "episodes": 200,
        "horizon": 500,
        "epoch_episodes": 10,
        "target_fraction": 0.7,
        "min_candidates": 10,
        "probe_sets": 5,
        "reselect_patience": 2500,
        "reward_scale": 1e7,
        "explore_prob": 0.01,
        "time_varying": False,
        "capacity_sigma": 1.0,
        "max_paths": 20_000,
    },
}


def default_config() -> dict:
    return json.loads(json.dumps(DEFAULT_CONFIG))


def load_experiment_config(filename: str) -> dict:
    with open(filename, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    config = default_config()
    for section in ("topology", "experiment"):
        config[section].update(doc.get(section, {}))
    return config


@dataclass(frozen=True)
class Instance:
    index: int
    seed: int
    network: Network  # blockage probabilities assigned
    pool: tuple[Path, ...]
    pool_truncated: bool
    capacity_value: float
    target_rate: float
    capacity_schedule: Schedule
    feasibility_schedule: Schedule | None
    candidates: tuple[Path, ...]
    hc_paths: tuple[Path, ...]
    rs_paths: tuple[Path, ...]


def build_instance(config: dict, seed: int, index: int) -> Instance:
    topo = config["topology"]
    exp = config["experiment"]
    instance_seed = child_seed(seed, _INSTANCE_STREAM, index)
    gen = generate_topology(
        GenConfig(
            n_relays=int(topo["n_relays"]),
            seed=instance_seed,
            coord_range=tuple(topo["coord_range"]),
            intensity_range=tuple(topo["intensity_range"]),
            blockage_scale=float(topo["blockage_scale"]),
            rician_k_db=float(topo["rician_k_db"]),
            snr_ref=float(topo["snr_ref"]),
            min_path_count=int(topo["min_path_count"]),
            path_count_cap=int(topo["path_count_cap"]),
        )
    )
    intensities = sample_intensities(
        gen.network, child_seed(seed, _INTENSITY_STREAM, index), tuple(topo["intensity_range"])
    )
    network = assign_blockage(gen.network, intensities, float(topo["blockage_scale"]))

    pool, truncated = enumerate_paths(network, int(exp["max_paths"]))
    cap_sol = approx_capacity(network, pool)
    target = float(exp["target_fraction"]) * cap_sol.value
    feas = feasibility_schedule(network, pool, target)

    probes: list = [None]  # the network's own blockage statistics
    for i in range(max(int(exp["probe_sets"]) - 1, 0)):
        probes.append(
            sample_intensities(
                network,
                child_seed(seed, _PROBE_STREAM, index * 1000 + i),
                tuple(topo["intensity_range"]),
            )
        )
    selection = build_candidate_paths(
        network, probes, float(topo["blockage_scale"]), int(exp["min_candidates"])
    )
    k = max(len(selection.paths), 1)
    hc, _ = pick_hc_paths(network, pool, k)
    rs, _ = pick_rs_paths(pool, k, child_seed(seed, _RS_STREAM, index))

    return Instance(
        index=index,
        seed=instance_seed,
        network=network,
        pool=pool,
        pool_truncated=truncated,
        capacity_value=cap_sol.value,
        target_rate=target,
        capacity_schedule=cap_sol.schedule,
        feasibility_schedule=feas.schedule if feas.status == "optimal" else None,
        candidates=selection.paths,
        hc_paths=hc,
        rs_paths=rs,
    )


def env_config_for(instance: Instance, paths: tuple[Path, ...], config: dict) -> EnvConfig:
    exp = config["experiment"]
    topo = config["topology"]
    return EnvConfig(
        network=instance.network,
        paths=paths,
        target_rate=instance.target_rate,
        seed=instance.seed,
        horizon=int(exp["horizon"]),
        reward_scale=float(exp["reward_scale"]),
        epoch_episodes=int(exp["epoch_episodes"]),
        time_varying=bool(exp["time_varying"]),
        capacity_sigma=float(exp["capacity_sigma"]),
        reselect_patience=int(exp["reselect_patience"]),
        min_candidates=int(exp["min_candidates"]),
        probe_sets=int(exp["probe_sets"]),
        intensity_range=tuple(topo["intensity_range"]),
        blockage_scale=float(topo["blockage_scale"]),
        explore_prob=float(exp["explore_prob"]),
    )


def baseline_series(instance: Instance, schedule: Schedule, config: dict) -> list[tuple[int, float, float, float, float]]:
    """Per-episode metric rows for a fixed schedule.

    The schedule is never revisited, so both the training and the
    evaluation column carry the episode's delivered rate.  In time-varying
    mode the target column tracks 0.7 of the episode's pool capacity.
    """
    exp = config["experiment"]
    env_cfg = env_config_for(instance, instance.candidates, config)
    active = schedule.active()
    rows = []
    for episode in range(int(exp["episodes"])):
        net = episode_network(env_cfg, episode)
        blockage = epoch_blockage(env_cfg, episode)
        rate = delivered_rate(net, schedule, blockage)
        if env_cfg.time_varying:
            target = float(exp["target_fraction"]) * approx_capacity(net, instance.pool).value
        else:
            target = instance.target_rate
        pct = (
            sum(1 for p in active if blockage.blocks(p)) / len(active) if active else 0.0
        )
        rows.append((episode, rate, rate, target, pct))
    return rows


def run_experiment(config: dict, seed: int, out_dir: str) -> dict:
    """Run all instances and write outputs; returns the manifest."""
    os.makedirs(out_dir, exist_ok=True)
    exp = config["experiment"]
    outputs: list[str] = []

    def emit(rel: str, text: str) -> None:
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        outputs.append(rel)

    for index in range(int(exp["instances"])):
        instance = build_instance(config, seed, index)
        sub = f"instance_{index}"
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)

        save_network(instance.network, os.path.join(out_dir, sub, "network.json"))
        outputs.append(f"{sub}/network.json")
        emit(
            f"{sub}/gen_manifest.json",
            json.dumps(
                {
                    "seed": instance.seed,
                    "topology": config["topology"],
                    "pool_paths": len(instance.pool),
                    "pool_truncated": instance.pool_truncated,
                    "capacity": instance.capacity_value,
                    "target_rate": instance.target_rate,
                },
                indent=2,
            )
            + "\n",
        )
        for name, paths in (
            ("paths_proposed", instance.candidates),
            ("paths_hc", instance.hc_paths),
            ("paths_rs", instance.rs_paths),
        ):
            save_paths(paths, os.path.join(out_dir, sub, f"{name}.json"))
            outputs.append(f"{sub}/{name}.json")
            variant = name.removeprefix("paths_")
            if paths:
                save_env_config(
                    env_config_for(instance, paths, config),
                    os.path.join(out_dir, sub, f"env_{variant}.json"),
                )
                outputs.append(f"{sub}/env_{variant}.json")

        emit(f"{sub}/baseline1.csv", metrics_to_csv(baseline_series(instance, instance.capacity_schedule, config)))
        if instance.feasibility_schedule is not None:
            emit(
                f"{sub}/baseline2.csv",
                metrics_to_csv(baseline_series(instance, instance.feasibility_schedule, config)),
            )

    manifest = {
        "command": "experiment",
        "config": config,
        "seed": seed,
        "version": __version__,
        "outputs": sorted(outputs),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest

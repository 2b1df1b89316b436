"""Monte-Carlo sweeps, confidence intervals, and file outputs.

Every trial is independently seeded from (master seed, sweep point, trial
index) through numpy's SeedSequence, so identical configurations reproduce
identical CSV bytes regardless of execution order.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import __version__
from .iedtc import run_round
from .qsre import PrivateKey, SignConvention, run_attack
from .qstate import NOISE_ENTANGLING, NOISE_MODELS, StateRegistry, random_state
from .simnet import QNetwork
from .topology import build_butterfly, link_counts, reference_resources

Z_95 = 1.96

EXPERIMENTS = ("accuracy", "eavesdrop", "resources")


def binomial_ci(successes: int, trials: int) -> tuple[float, float]:
    """(estimate, 95% normal-approximation half-width) for a success count."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not (0 <= successes <= trials):
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    p = successes / trials
    half = Z_95 * (p * (1.0 - p) / trials) ** 0.5
    return p, half


@dataclass(frozen=True)
class SweepRow:
    x: float
    estimate: float
    ci_half_width: float
    trials: int
    successes: int


@dataclass
class ExperimentConfig:
    experiment: str
    n_pairs: int = 2
    noise_levels: tuple[float, ...] = ()
    trials: int = 1000
    bits_range: tuple[int, ...] = ()
    n_range: tuple[int, ...] = ()
    seed: int = 42
    noise_model: str = NOISE_ENTANGLING
    sign_convention: SignConvention = SignConvention.FORMULA
    key_bits: str | None = None
    out: str | None = None
    manifest: str | None = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.noise_model!r}")
        if self.experiment == "accuracy":
            if not self.noise_levels:
                raise ValueError("accuracy sweep needs at least one noise level")
            for level in self.noise_levels:
                if not (0.0 <= level <= 1.0):
                    raise ValueError(f"noise level {level} outside [0, 1]")
            if self.n_pairs < 2:
                raise ValueError("n_pairs must be >= 2")
        elif self.experiment == "eavesdrop":
            if not self.bits_range:
                raise ValueError("eavesdrop sweep needs at least one bits value")
            for b in self.bits_range:
                if b < 3:
                    raise ValueError(f"total bits must be >= 3, got {b}")
            if self.n_pairs < 2:
                raise ValueError("n_pairs must be >= 2")
        else:
            if not self.n_range:
                raise ValueError("resource report needs at least one network size")
            for n in self.n_range:
                if n < 2:
                    raise ValueError(f"network size must be >= 2, got {n}")


def _derived_seed(master_seed: int, salt: int, t: int) -> int:
    return int(np.random.SeedSequence([master_seed, salt, t]).generate_state(1, np.uint64)[0])


def run_accuracy_sweep(cfg: ExperimentConfig) -> list[SweepRow]:
    """Fraction of rounds in which every pair arrives exactly, per noise level."""
    if cfg.experiment != "accuracy":
        raise ValueError("config is not an accuracy configuration")
    topology = build_butterfly(cfg.n_pairs)
    net = QNetwork(topology)
    rows = []
    for level in cfg.noise_levels:
        salt = int(round(level * 1_000_000))
        successes = 0
        for t in range(cfg.trials):
            trial_seed = _derived_seed(cfg.seed, salt, t)
            reg = StateRegistry(level, seed=trial_seed, noise_model=cfg.noise_model)
            input_rng = np.random.default_rng(_derived_seed(cfg.seed, salt + 1, t))
            inputs = [random_state(input_rng) for _ in range(cfg.n_pairs)]
            net.reset()
            if run_round(net, reg, inputs).all_success:
                successes += 1
        estimate, half = binomial_ci(successes, cfg.trials)
        rows.append(SweepRow(level, estimate, half, cfg.trials, successes))
    return rows


def run_eavesdrop_sweep(cfg: ExperimentConfig) -> list[SweepRow]:
    """Attack success rate versus total key bits per message (2 + magnitude bits).

    Attack trials run noise-free so the curve isolates the guessing problem.
    """
    if cfg.experiment != "eavesdrop":
        raise ValueError("config is not an eavesdrop configuration")
    topology = build_butterfly(cfg.n_pairs)
    net = QNetwork(topology)
    rows = []
    for bits in cfg.bits_range:
        magnitude_bits = bits - 2
        key = None
        if cfg.key_bits is not None:
            key = PrivateKey(cfg.key_bits, magnitude_bits)
        reg = StateRegistry(0.0, seed=_derived_seed(cfg.seed, bits, 0))
        stats = run_attack(net, reg, magnitude_bits, True, cfg.trials,
                           _derived_seed(cfg.seed, bits, 1),
                           key=key, convention=cfg.sign_convention)
        estimate, half = binomial_ci(stats.eavesdrop_successes, stats.trials)
        rows.append(SweepRow(bits, estimate, half, stats.trials, stats.eavesdrop_successes))
    return rows


@dataclass(frozen=True)
class ResourceRow:
    n_pairs: int
    total_links: int
    quantum_links: int
    qubit_usage: int       # sum of per-node peak holdings over one round
    peak_live_qubits: int  # network-wide simultaneous peak
    ref_total_links: int
    ref_quantum_links: int
    ref_qubits: int
    benchmark_total_links: int
    benchmark_quantum_links: int
    benchmark_qubits: int
    within_reference: bool


def run_resource_report(n_range: Sequence[int], seed: int = 42) -> list[ResourceRow]:
    """Measured link/qubit usage of one noiseless round against the closed forms."""
    rows = []
    for n in n_range:
        topology = build_butterfly(n)
        total, quantum = link_counts(topology)
        reg = StateRegistry(0.0, seed=_derived_seed(seed, n, 0))
        input_rng = np.random.default_rng(_derived_seed(seed, n, 1))
        net = QNetwork(topology)
        result = run_round(net, reg, [random_state(input_rng) for _ in range(n)])
        if result.error is not None:
            raise RuntimeError(f"resource round failed at n={n}: {result.error}")
        ref = reference_resources("iedtc", n)
        bench = reference_resources("benchmark", n)
        within = (total <= ref.total_links and quantum <= ref.quantum_links
                  and result.peak_usage <= ref.qubits)
        rows.append(ResourceRow(n, total, quantum, result.peak_usage, result.peak_alloc,
                                ref.total_links, ref.quantum_links, ref.qubits,
                                bench.total_links, bench.quantum_links, bench.qubits,
                                within))
    return rows


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_sweep_csv(rows: Sequence[SweepRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "estimate", "ci_half_width", "trials", "successes"])
        for row in rows:
            writer.writerow([_fmt(row.x), _fmt(row.estimate), _fmt(row.ci_half_width),
                             row.trials, row.successes])


def write_resource_csv(rows: Sequence[ResourceRow], path: str) -> None:
    header = ["n_pairs", "total_links", "quantum_links", "qubit_usage", "peak_live_qubits",
              "ref_total_links", "ref_quantum_links", "ref_qubits",
              "benchmark_total_links", "benchmark_quantum_links", "benchmark_qubits",
              "within_reference"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(getattr(row, name)) for name in header])


def write_manifest(cfg: ExperimentConfig, outputs: Sequence[str], elapsed: float, path: str) -> None:
    doc = {
        "version": f"qbutterfly-{__version__}",
        "experiment": cfg.experiment,
        "config": {
            "n_pairs": cfg.n_pairs,
            "noise_levels": list(cfg.noise_levels),
            "trials": cfg.trials,
            "bits_range": list(cfg.bits_range),
            "n_range": list(cfg.n_range),
            "seed": cfg.seed,
            "noise_model": cfg.noise_model,
            "sign_convention": cfg.sign_convention.value,
            "key_file_used": cfg.key_bits is not None,
        },
        "outputs": list(outputs),
        "elapsed_seconds": round(elapsed, 3),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

"""Bandit instances and reproducible Bernoulli reward streams.

Rewards are generated lazily, one batch at a time, from per-(arm, batch)
sub-seeded generators.  This keeps memory O(k) at large horizons and makes
an arm's stream independent of every other arm's stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Stream labels keep reward randomness disjoint from mechanism randomness.
_REWARD_STREAM = 0
_NOISE_STREAM = 1


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic derivation of all generators used by a single run."""

    master_seed: int
    run_index: int = 0

    def _rng(self, *key: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed,
                                     spawn_key=(self.run_index, *key))
        return np.random.default_rng(seq)

    def reward_rng(self, arm: int, batch: int) -> np.random.Generator:
        return self._rng(_REWARD_STREAM, arm, batch)

    def noise_rng(self, arm: int, batch: int) -> np.random.Generator:
        return self._rng(_NOISE_STREAM, arm, batch)


@dataclass(frozen=True)
class BanditInstance:
    k: int
    means: tuple[float, ...]
    horizon: int

    @property
    def best_arm(self) -> int:
        # ties broken by lowest index (np.argmax does exactly that)
        return int(np.argmax(self.means))

    @property
    def best_mean(self) -> float:
        return self.means[self.best_arm]

    @property
    def gaps(self) -> tuple[float, ...]:
        mu_star = self.best_mean
        return tuple(mu_star - mu for mu in self.means)


def make_instance(k: int, means: list[float], horizon: int) -> BanditInstance:
    if k < 1:
        raise ValueError(f"need at least one arm, got k={k}")
    if len(means) != k:
        raise ValueError(f"got {len(means)} means for k={k} arms")
    for a, mu in enumerate(means):
        if not 0.0 <= mu <= 1.0:
            raise ValueError(f"means[{a}]={mu} outside [0, 1]")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    return BanditInstance(k=k, means=tuple(float(m) for m in means),
                          horizon=int(horizon))


class RewardTape:
    """Lazy per-arm stream of Bernoulli(mu) bits, consumed batch by batch."""

    def __init__(self, arm: int, mean: float, seeds: SeedSpec, horizon: int):
        self.arm = arm
        self.mean = mean
        self.seeds = seeds
        self.horizon = horizon
        self.cursor = 0
        self.batches_drawn = 0

    def draw(self, batch_size: int) -> np.ndarray:
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        if self.cursor + batch_size > self.horizon:
            raise ValueError(
                f"tape for arm {self.arm} exhausted: cursor={self.cursor}, "
                f"requested {batch_size}, horizon={self.horizon}")
        rng = self.seeds.reward_rng(self.arm, self.batches_drawn)
        bits = (rng.random(batch_size) < self.mean).astype(np.int8)
        self.batches_drawn += 1
        self.cursor += batch_size
        return bits


def draw_batch_rewards(tape: RewardTape, batch_size: int) -> np.ndarray:
    """Draw the next batch of iid Bernoulli rewards from an arm's tape."""
    return tape.draw(batch_size)


def make_tapes(instance: BanditInstance, seeds: SeedSpec) -> list[RewardTape]:
    return [RewardTape(a, instance.means[a], seeds, instance.horizon)
            for a in range(instance.k)]

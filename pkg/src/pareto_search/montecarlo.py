"""Seeded Monte-Carlo estimates of expected search times.

A *sampler* is a callable ``sampler(rng) -> iterator of box indices``; every
call draws one pure search from the mixed strategy.  Trials are split into
fixed-size batches with independent seed streams, so an estimate depends
only on (seed, trials, batch size) and never on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .core import BoxInstance

Sampler = Callable[[np.random.Generator], Iterator[int]]

BATCH = 4096


class StarvationError(RuntimeError):
    """A sampled search failed to detect the hider within the step cap."""


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int

    @classmethod
    def from_samples(cls, x: np.ndarray, seed: int) -> "SimEstimate":
        x = np.asarray(x, dtype=float)
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        return cls(float(x.mean()), se, int(x.size), seed)

    def within(self, target: float, k: float = 3.0, extra_se: float = 0.0) -> bool:
        """|mean - target| <= k combined standard errors (exact match when se = 0)."""
        se = math.hypot(self.stderr, extra_se)
        return abs(self.mean - target) <= k * se + 1e-12 * max(1.0, abs(target))


def default_step_cap(n: int, q: float) -> int:
    return int(math.ceil(64 * n / q))


def batch_streams(seed: int, trials: int, batch: int = BATCH):
    """Yield (size, generator pair) for each batch of the fixed partition."""
    n_batches = max(1, -(-trials // batch))
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n_batches)):
        size = min(batch, trials - i * batch)
        seq_ss, coin_ss = child.spawn(2)
        yield size, np.random.default_rng(seq_ss), np.random.default_rng(coin_ss)


def detection_times(sampler: Sampler, boxes: Sequence[int], times: Sequence[float], q: float,
                    trials: int, seed: int, step_cap: int | None = None) -> np.ndarray:
    """Detection time of a hider in each of ``boxes``, per trial.

    All boxes share the sampled search of a trial (common random numbers);
    detection coins are drawn from a separate stream.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    if trials < 1:
        raise ValueError("need at least one trial")
    boxes = list(boxes)
    col = {b: i for i, b in enumerate(boxes)}
    cap = default_step_cap(len(times), q) if step_cap is None else step_cap
    out = np.empty((trials, len(boxes)))
    row = 0
    for size, seq_rng, coin_rng in batch_streams(seed, trials):
        for _ in range(size):
            pending = set(boxes)
            clock = 0.0
            steps = 0
            for b in sampler(seq_rng):
                clock += times[b]
                steps += 1
                if b in pending and (q == 1.0 or coin_rng.random() < q):
                    out[row, col[b]] = clock
                    pending.discard(b)
                    if not pending:
                        break
                if steps >= cap:
                    raise StarvationError(
                        f"boxes {sorted(pending)} undetected after {cap} openings")
            else:
                raise StarvationError(f"search ended before finding boxes {sorted(pending)}")
            row += 1
    return out


def simulate_box(sampler: Sampler, hider_box: int, times: Sequence[float], q: float,
                 trials: int, seed: int, step_cap: int | None = None) -> SimEstimate:
    x = detection_times(sampler, [hider_box], times, q, trials, seed, step_cap)
    return SimEstimate.from_samples(x[:, 0], seed)


@dataclass(frozen=True)
class CREstimate:
    consistency: SimEstimate
    robustness: SimEstimate
    per_box: tuple[SimEstimate, ...]


def estimate_CR_box(sampler: Sampler, inst: BoxInstance, trials: int, seed: int,
                    step_cap: int | None = None) -> CREstimate:
    """Estimated consistency (max over H) and robustness (max over all boxes)."""
    x = detection_times(sampler, range(inst.n), inst.times, inst.q, trials, seed, step_cap)
    per_box = tuple(SimEstimate.from_samples(x[:, j], seed) for j in range(inst.n))
    c = max((per_box[j] for j in inst.h_indices), key=lambda e: e.mean)
    r = max(per_box, key=lambda e: e.mean)
    return CREstimate(c, r, per_box)


def fixed_order(order: Sequence[int]) -> Sampler:
    """Deterministic sampler repeating ``order`` forever."""
    order = list(order)

    def draw(rng: np.random.Generator) -> Iterator[int]:
        while True:
            yield from order

    return draw


def mixture(samplers: Sequence[Sampler], weights: Sequence[float]) -> Sampler:
    """Sampler choosing one of ``samplers`` with the given probabilities."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()

    def draw(rng: np.random.Generator) -> Iterator[int]:
        return samplers[int(rng.choice(len(samplers), p=w))](rng)

    return draw

"""Unconstrained anchor solver: greedy powered-distance seeding plus
single-swap local search.

The reduction needs a constant-factor unconstrained (k+m)-clustering to
anchor everything else. Seeding picks the cheapest single center on a
client sample, then repeatedly draws a client with probability
proportional to its powered distance to the current centers and adds the
nearest unused facility. Local search then tries all single-center swaps,
accepting only swaps that beat the current cost by the usual
1/(10 * num_centers) relative margin, until no swap qualifies or the
iteration cap of 100 * num_centers is reached. Everything is a pure
function of (instance, seed).
"""

from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Iterable

import numpy as np

from .instance import ClusteringInstance

__all__ = ["AnchorSet", "solve_unconstrained", "anchor_cost_of"]

SEED_SAMPLE_CAP = 32
SWAP_ITERATION_FACTOR = 100


@dataclass(frozen=True)
class AnchorSet:
    centers: tuple[int, ...]
    anchor_cost: float


def anchor_cost_of(inst: ClusteringInstance, centers: Iterable[int]) -> float:
    """Sum over clients of the powered distance to the nearest center."""
    refs = sorted(set(centers))
    if not refs:
        raise ValueError("anchor cost needs a nonempty center set")
    block = inst.space.powered_rows(inst.X, refs)
    return float(block.min(axis=1).sum())


def _cost_of_fpos(pow_xf: np.ndarray, fpos: list[int]) -> float:
    return float(pow_xf[:, fpos].min(axis=1).sum())


def solve_unconstrained(inst: ClusteringInstance, num_centers: int,
                        rng_seed: int) -> AnchorSet:
    """Choose ``num_centers`` distinct facilities approximately minimizing the
    nearest-center powered cost over all clients."""
    if num_centers < 1:
        raise ValueError("num_centers must be >= 1")
    if num_centers > len(inst.F):
        raise ValueError(
            f"num_centers={num_centers} exceeds |F|={len(inst.F)}")
    rng = np.random.default_rng(rng_seed)
    pow_xf = inst.pow_xf
    n, nf = pow_xf.shape

    # cheapest 1-center of a client sample
    sample = (np.arange(n) if n <= SEED_SAMPLE_CAP
              else rng.choice(n, size=SEED_SAMPLE_CAP, replace=False))
    first = int(np.argmin(pow_xf[sample, :].sum(axis=0)))
    chosen = [first]

    while len(chosen) < num_centers:
        mass = pow_xf[:, chosen].min(axis=1)
        total = float(mass.sum())
        if total <= 0.0:
            x = int(rng.integers(0, n))
        else:
            r = rng.random() * total
            x = int(np.searchsorted(np.cumsum(mass), r, side="right"))
            x = min(x, n - 1)
        # nearest facility to the drawn client, skipping ones already chosen
        order = np.lexsort((np.arange(nf), pow_xf[x, :]))
        for f in order:
            if int(f) not in chosen:
                chosen.append(int(f))
                break

    cost = _cost_of_fpos(pow_xf, chosen)
    threshold = 1.0 - 1.0 / (10.0 * num_centers)
    for _ in range(SWAP_ITERATION_FACTOR * num_centers):
        best_swap = None
        best_cost = cost
        for i in range(num_centers):
            for f in range(nf):
                if f in chosen:
                    continue
                trial = chosen.copy()
                trial[i] = f
                c = _cost_of_fpos(pow_xf, trial)
                if c < best_cost:
                    best_cost = c
                    best_swap = trial
        if best_swap is None or best_cost >= threshold * cost:
            break
        chosen = best_swap
        cost = best_cost

    centers = tuple(inst.F[j] for j in sorted(chosen))
    return AnchorSet(centers=centers, anchor_cost=cost)

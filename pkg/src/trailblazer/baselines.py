"""Reference planners: sparse sampling and plain Monte-Carlo evaluation."""
from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Hashable

import numpy as np

from .mdp import ContractError, GenerativeModel
from .planner import RunCounter


@dataclass(frozen=True)
class SparseSamplingConfig:
    """Uniform look-ahead: ``width`` draws per AVG expansion, ``horizon`` MAX/AVG level pairs."""

    width: int
    horizon: int

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ContractError("width C must be >= 1")
        if self.horizon < 0:
            raise ContractError("horizon H must be >= 0")


def _draw(model: GenerativeModel, state, action: int, rng, counter: RunCounter | None):
    reward, nxt = model.sample(state, action, rng)
    if counter is not None:
        counter.record_pair()
    return reward, nxt


def sparse_sampling(model: GenerativeModel, state: Hashable, config: SparseSamplingConfig,
                    rng: np.random.Generator, counter: RunCounter | None = None,
                    share_duplicates: bool = True) -> float:
    """Sparse look-ahead estimate of ``V(state)``.

    A MAX level takes the maximum over all actions; an AVG level draws
    ``width`` (reward, next) pairs and averages reward plus ``gamma`` times the
    child estimates.  With ``share_duplicates`` the draws at one AVG level
    that land on the same next state share a single subtree estimate,
    weighted by multiplicity; otherwise every draw gets its own subtree.
    """
    gamma = model.gamma
    C = config.width

    def v(s, h: int) -> float:
        if h == 0:
            return 0.0
        return max(q(s, a, h) for a in range(model.action_count(s)))

    def q(s, a: int, h: int) -> float:
        rewards = 0.0
        draws = []
        for _ in range(C):
            r, nxt = _draw(model, s, a, rng, counter)
            rewards += r
            draws.append(nxt)
        total = 0.0
        if share_duplicates:
            counts: dict[Hashable, int] = {}
            for nxt in draws:
                counts[nxt] = counts.get(nxt, 0) + 1
            for nxt, k in counts.items():
                total += k * v(nxt, h - 1)
        else:
            for nxt in draws:
                total += v(nxt, h - 1)
        return rewards / C + gamma * total / C

    return v(state, config.horizon)


def monte_carlo_eval(model: GenerativeModel, state: Hashable, m: int, eps: float,
                     rng: np.random.Generator, counter: RunCounter | None = None,
                     action: int = 0) -> float:
    """Monte-Carlo estimate of ``Q(state, action)`` on a single-action model.

    Uses the planner's recursion without MAX layers: stop at the early-exit
    level ``1/(2(1-gamma))``, otherwise draw ``m`` pairs and recurse into each
    distinct next state with its multiplicity ``k`` and bias ``eps/gamma``.
    Draws happen in the same order as the planner's, so with the same
    generator both return the same number.
    """
    gamma = model.gamma
    half = 0.5 / (1.0 - gamma)
    if m < 1:
        raise ContractError("m must be >= 1")

    def q(s, a: int, m: int, eps: float) -> float:
        if eps >= half:
            return half
        n = model.action_count(s)
        if n != 1:
            raise ContractError(f"monte_carlo_eval needs one action per state; state {s!r} has {n}")
        reward_sum = 0.0
        counts: dict[Hashable, int] = {}
        for _ in range(m):
            r, nxt = _draw(model, s, a, rng, counter)
            reward_sum += r
            counts[nxt] = counts.get(nxt, 0) + 1
        child_eps = eps / gamma
        mu = 0.0
        for nxt, k in counts.items():
            mu += q(nxt, 0, k, child_eps) * k / m
        return reward_sum / m + gamma * mu

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10_000))
    try:
        return q(state, action, m, eps)
    finally:
        sys.setrecursionlimit(limit)

"""Small named tabular MDPs used by the benchmark and the tests."""
from __future__ import annotations

from .mdp import Root, TabularMdp, bernoulli, constant, tabular


def gap_mdp(high: float = 0.8, low: float = 0.2, gamma: float = 0.5) -> TabularMdp:
    """Two actions paying ``Constant(high)`` / ``Constant(low)``, both into an absorbing zero state."""
    return tabular(gamma, [
        [(constant(high), {1: 1.0}), (constant(low), {1: 1.0})],
        [(constant(0.0), {1: 1.0})],
    ])


def self_loop(reward: float = 1.0, gamma: float = 0.5, root_kind: str = "max") -> TabularMdp:
    """One state, one action, ``Constant(reward)`` forever; value ``reward/(1-gamma)``."""
    root = Root("avg", 0, 0) if root_kind == "avg" else Root("max", 0)
    return tabular(gamma, [[(constant(reward), {0: 1.0})]], root)


def chain(length: int, reward: float = 1.0, gamma: float = 0.5) -> TabularMdp:
    """Deterministic single-action chain ``0 -> 1 -> ... -> length-1`` ending in a self-loop."""
    rows = [[(constant(reward), {min(s + 1, length - 1): 1.0})] for s in range(length)]
    return tabular(gamma, rows)


def stochastic_chain(gamma: float = 0.9) -> TabularMdp:
    """Single-action, four states, Bernoulli rewards, three successors per row."""
    return tabular(gamma, [
        [(bernoulli(0.6), {0: 0.2, 1: 0.5, 2: 0.3})],
        [(bernoulli(0.3), {1: 0.4, 2: 0.3, 3: 0.3})],
        [(bernoulli(0.8), {0: 0.5, 3: 0.5})],
        [(constant(0.5), {0: 0.25, 1: 0.25, 3: 0.5})],
    ])


def two_action_mix(gamma: float = 0.5) -> TabularMdp:
    """Two-action root with stochastic successors; every two-action state has a gap of at least 0.6."""
    return tabular(gamma, [
        [(bernoulli(0.9), {1: 0.6, 2: 0.4}), (constant(0.1), {3: 1.0})],
        [(bernoulli(0.5), {0: 0.5, 3: 0.5})],
        [(constant(1.0), {3: 1.0}), (constant(0.0), {3: 1.0})],
        [(bernoulli(0.3), {3: 1.0})],
    ])


def three_action_mix(gamma: float = 0.5) -> TabularMdp:
    """Three-action root, three successors per row, well separated action values."""
    return tabular(gamma, [
        [(constant(0.95), {1: 0.5, 2: 0.3, 3: 0.2}),
         (bernoulli(0.2), {1: 0.2, 2: 0.3, 3: 0.5}),
         (constant(0.0), {3: 1.0})],
        [(bernoulli(0.7), {2: 0.5, 3: 0.5})],
        [(bernoulli(0.4), {1: 0.3, 2: 0.3, 3: 0.4})],
        [(constant(0.2), {3: 1.0})],
    ])


def unique_optimal_deterministic(gamma: float = 0.5) -> TabularMdp:
    """Deterministic two-action MDP whose optimal action is unique and separated by more than 1/2 everywhere."""
    return tabular(gamma, [
        [(constant(1.0), {1: 1.0}), (constant(0.0), {2: 1.0})],
        [(constant(1.0), {0: 1.0}), (constant(0.0), {2: 1.0})],
        [(constant(0.0), {2: 1.0}), (constant(0.0), {0: 1.0})],
    ])


def pac_suite() -> dict[str, TabularMdp]:
    return {
        "two_action_mix": two_action_mix(),
        "three_action_mix": three_action_mix(),
        "stochastic_chain": stochastic_chain(),
    }

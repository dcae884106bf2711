"""Generative models, tabular MDPs and exact finite-horizon values.

Planners only ever see a :class:`GenerativeModel`: something that, given a
state and an action index, draws a ``(reward, next_state)`` pair.  Rewards
live on state-action pairs and are always in ``[0, 1]``.
"""
from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Hashable, NamedTuple, Protocol, Sequence, runtime_checkable

import numpy as np

ROW_SUM_TOL = 1e-12


class ContractError(ValueError):
    """A caller broke an operation's precondition."""


class MdpFormatError(ValueError):
    """An MDP description failed to parse or validate."""


@dataclass(frozen=True)
class Root:
    """Where planning starts: a state (``max``) or a state-action pair (``avg``)."""

    kind: str = "max"
    state: Any = 0
    action: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("max", "avg"):
            raise ContractError(f"root kind must be 'max' or 'avg', got {self.kind!r}")
        if self.kind == "avg" and self.action is None:
            raise ContractError("an avg root needs an action")
        if self.kind == "max" and self.action is not None:
            raise ContractError("a max root takes no action")


@runtime_checkable
class GenerativeModel(Protocol):
    """Sampling access to an MDP.

    Implementations hold no mutable state: every draw comes from the ``rng``
    passed in, so independent runs can share one model.
    """

    gamma: float
    root: Root

    def action_count(self, state: Hashable) -> int: ...

    def sample(self, state: Hashable, action: int, rng: np.random.Generator) -> tuple[float, Hashable]: ...


def sample_transition(model: GenerativeModel, state, action: int, rng: np.random.Generator):
    """Draw one ``(reward, next_state)`` pair after checking the action index."""
    n = model.action_count(state)
    if not 0 <= action < n:
        raise ContractError(f"action {action} invalid in state {state!r} with {n} actions")
    return model.sample(state, action, rng)


@dataclass(frozen=True)
class RewardDist:
    kind: str
    param: float

    def __post_init__(self) -> None:
        if self.kind not in ("bernoulli", "constant"):
            raise MdpFormatError(f"unknown reward type {self.kind!r}")
        if not (0.0 <= self.param <= 1.0):
            raise MdpFormatError(f"{self.kind} reward parameter {self.param!r} outside [0, 1]")

    @property
    def mean(self) -> float:
        return self.param

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "constant":
            return self.param
        return 1.0 if rng.random() < self.param else 0.0

    def to_json(self) -> dict:
        key = "p" if self.kind == "bernoulli" else "c"
        return {"type": self.kind, key: self.param}


def bernoulli(p: float) -> RewardDist:
    return RewardDist("bernoulli", float(p))


def constant(c: float) -> RewardDist:
    return RewardDist("constant", float(c))


@dataclass(frozen=True)
class Outcomes:
    """Support and probabilities of ``p(. | s, a)``, plus the reward law."""

    next_states: tuple[int, ...]
    probs: tuple[float, ...]
    reward: RewardDist
    cumulative: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cumulative", tuple(np.cumsum(self.probs).tolist()))


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """A finite MDP given explicitly.

    ``outcomes[s][a]`` describes the state-action pair ``(s, a)``.  Instances
    are validated on construction and act as their own generative model.
    """

    gamma: float
    outcomes: tuple[tuple[Outcomes, ...], ...]
    root: Root = Root()

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma < 1.0):
            raise MdpFormatError(f"discount gamma={self.gamma!r} must lie in (0, 1)")
        n = len(self.outcomes)
        if n == 0:
            raise MdpFormatError("an MDP needs at least one state")
        for s, row in enumerate(self.outcomes):
            if len(row) == 0:
                raise MdpFormatError(f"state {s} has no actions")
            for a, out in enumerate(row):
                if len(out.next_states) == 0 or len(out.next_states) != len(out.probs):
                    raise MdpFormatError(f"state {s} action {a}: malformed transition list")
                for nxt, p in zip(out.next_states, out.probs):
                    if not 0 <= nxt < n:
                        raise MdpFormatError(f"state {s} action {a}: next state {nxt} out of range")
                    if not (0.0 <= p <= 1.0):
                        raise MdpFormatError(f"state {s} action {a}: probability {p!r} outside [0, 1]")
                if len(set(out.next_states)) != len(out.next_states):
                    raise MdpFormatError(f"state {s} action {a}: repeated next state")
                total = math.fsum(out.probs)
                if abs(total - 1.0) > ROW_SUM_TOL:
                    raise MdpFormatError(
                        f"transition row (state {s}, action {a}) sums to {total!r}, expected 1"
                    )
        r = self.root
        if not (isinstance(r.state, (int, np.integer)) and 0 <= r.state < n):
            raise MdpFormatError(f"root state {r.state!r} out of range")
        if r.kind == "avg" and not 0 <= r.action < len(self.outcomes[r.state]):
            raise MdpFormatError(f"root action {r.action!r} out of range")

    @property
    def n_states(self) -> int:
        return len(self.outcomes)

    @property
    def actions_per_state(self) -> list[int]:
        return [len(row) for row in self.outcomes]

    @property
    def max_actions(self) -> int:
        """K: the largest action count over all states."""
        return max(self.actions_per_state)

    @property
    def max_support(self) -> int:
        """N: the largest number of nonzero entries in a transition row."""
        return max(sum(p > 0 for p in out.probs) for row in self.outcomes for out in row)

    def action_count(self, state: int) -> int:
        return len(self.outcomes[state])

    def sample(self, state: int, action: int, rng: np.random.Generator) -> tuple[float, int]:
        out = self.outcomes[state][action]
        i = bisect_right(out.cumulative, rng.random())
        nxt = out.next_states[min(i, len(out.next_states) - 1)]
        return out.reward.draw(rng), nxt

    def with_root(self, root: Root) -> "TabularMdp":
        return TabularMdp(self.gamma, self.outcomes, root)

    def transition_matrix(self, state: int, action: int) -> np.ndarray:
        row = np.zeros(self.n_states)
        out = self.outcomes[state][action]
        row[list(out.next_states)] = out.probs
        return row

    def to_json(self) -> dict:
        root: dict[str, Any] = {"kind": self.root.kind, "state": int(self.root.state)}
        if self.root.kind == "avg":
            root["action"] = int(self.root.action)
        states = []
        for row in self.outcomes:
            actions = []
            for out in row:
                actions.append({
                    "reward": out.reward.to_json(),
                    "next": [{"state": int(s), "p": p} for s, p in zip(out.next_states, out.probs)],
                })
            states.append({"actions": actions})
        return {"gamma": self.gamma, "root": root, "states": states}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TabularMdp):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None  # type: ignore[assignment]


def tabular(gamma: float, table: Sequence[Sequence[tuple[RewardDist, dict[int, float]]]],
            root: Root = Root()) -> TabularMdp:
    """Build a :class:`TabularMdp` from ``table[s][a] = (reward, {next: p})``."""
    rows = []
    for row in table:
        rows.append(tuple(
            Outcomes(tuple(int(k) for k in nxt), tuple(float(v) for v in nxt.values()), rew)
            for rew, nxt in row
        ))
    return TabularMdp(float(gamma), tuple(rows), root)


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def _parse_reward(obj: Any, where: str) -> RewardDist:
    if not isinstance(obj, dict) or "type" not in obj:
        raise MdpFormatError(f"{where}: reward must be an object with a 'type'")
    kind = obj["type"]
    key = {"bernoulli": "p", "constant": "c"}.get(kind)
    if key is None:
        raise MdpFormatError(f"{where}: unknown reward type {kind!r}")
    if key not in obj:
        raise MdpFormatError(f"{where}: {kind} reward needs field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MdpFormatError(f"{where}: reward parameter must be a number")
    if not (0.0 <= value <= 1.0):
        raise MdpFormatError(f"{where}: {kind} reward parameter {value!r} outside [0, 1]")
    return RewardDist(kind, float(value))


def mdp_from_json(data: Any) -> TabularMdp:
    """Validate a decoded JSON document and build the MDP it describes."""
    if not isinstance(data, dict):
        raise MdpFormatError("top level must be an object")
    for key in ("gamma", "states"):
        if key not in data:
            raise MdpFormatError(f"missing field {key!r}")
    gamma = data["gamma"]
    if isinstance(gamma, bool) or not isinstance(gamma, (int, float)):
        raise MdpFormatError("gamma must be a number")
    if not (0.0 < gamma < 1.0):
        raise MdpFormatError(f"discount gamma={gamma!r} must lie in (0, 1)")
    root_obj = data.get("root", {"kind": "max", "state": 0})
    try:
        root = Root(root_obj.get("kind", "max"), root_obj.get("state", 0), root_obj.get("action"))
    except (AttributeError, ContractError) as exc:
        raise MdpFormatError(f"bad root: {exc}") from exc
    states = data["states"]
    if not isinstance(states, list) or not states:
        raise MdpFormatError("'states' must be a non-empty list")
    rows = []
    for s, st in enumerate(states):
        if not isinstance(st, dict) or not isinstance(st.get("actions"), list):
            raise MdpFormatError(f"state {s}: expected an object with an 'actions' list")
        row = []
        for a, act in enumerate(st["actions"]):
            where = f"state {s} action {a}"
            if not isinstance(act, dict):
                raise MdpFormatError(f"{where}: expected an object")
            reward = _parse_reward(act.get("reward"), where)
            nxt = act.get("next")
            if not isinstance(nxt, list) or not nxt:
                raise MdpFormatError(f"{where}: 'next' must be a non-empty list")
            succ, probs = [], []
            for entry in nxt:
                try:
                    succ.append(entry["state"])
                    probs.append(entry["p"])
                except (TypeError, KeyError) as exc:
                    raise MdpFormatError(f"{where}: each 'next' entry needs 'state' and 'p'") from exc
            if any(isinstance(x, bool) or not isinstance(x, int) for x in succ):
                raise MdpFormatError(f"{where}: next states must be integers")
            if any(isinstance(p, bool) or not isinstance(p, (int, float)) for p in probs):
                raise MdpFormatError(f"{where}: probabilities must be numbers")
            total = math.fsum(probs)
            if abs(total - 1.0) > ROW_SUM_TOL:
                raise MdpFormatError(f"transition row (state {s}, action {a}) sums to {total!r}, expected 1")
            row.append(Outcomes(tuple(succ), tuple(float(p) for p in probs), reward))
        rows.append(tuple(row))
    return TabularMdp(float(gamma), tuple(rows), root)


def load_mdp(path: str | Path) -> TabularMdp:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MdpFormatError(f"{path}: not valid JSON ({exc})") from exc
    return mdp_from_json(data)


def save_mdp(mdp: TabularMdp, path: str | Path) -> None:
    Path(path).write_text(json.dumps(mdp.to_json(), indent=1) + "\n")


# ---------------------------------------------------------------------------
# Exact values
# ---------------------------------------------------------------------------

class ValueBounds(NamedTuple):
    lower: float
    upper: float
    horizon: int

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, v: float) -> bool:
        return self.lower <= v <= self.upper


def _dense(mdp: TabularMdp) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``P[s, a, s']``, ``R[s, a]`` and a mask of valid actions."""
    n, k = mdp.n_states, mdp.max_actions
    P = np.zeros((n, k, n))
    R = np.zeros((n, k))
    valid = np.zeros((n, k), dtype=bool)
    for s, row in enumerate(mdp.outcomes):
        for a, out in enumerate(row):
            P[s, a, list(out.next_states)] = out.probs
            R[s, a] = out.reward.mean
            valid[s, a] = True
    return P, R, valid


def finite_horizon_values(mdp: TabularMdp, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Optimal ``horizon``-step values ``V[s]`` and ``Q[s, a]`` (``-inf`` for missing actions).

    ``Q`` counts ``horizon`` rewards starting with the one at ``(s, a)``;
    ``V = max_a Q``.  At horizon 0 both are zero.
    """
    if horizon < 0:
        raise ContractError("horizon must be >= 0")
    P, R, valid = _dense(mdp)
    V = np.zeros(mdp.n_states)
    Q = np.where(valid, 0.0, -np.inf)
    for _ in range(horizon):
        Q = np.where(valid, R + mdp.gamma * (P @ V), -np.inf)
        V = Q.max(axis=1)
    return V, Q


def exact_value(mdp: TabularMdp, horizon: int, state: int | None = None,
                action: int | None = None) -> ValueBounds:
    """Bracket the optimal value of a state (or state-action pair).

    With no ``state`` the MDP's root is used.  Rewards are nonnegative, so the
    truncated value is a lower bound; the undiscounted-tail bound
    ``gamma**horizon / (1 - gamma)`` gives the upper one.
    """
    if state is None:
        state = mdp.root.state
        if action is None and mdp.root.kind == "avg":
            action = mdp.root.action
    V, Q = finite_horizon_values(mdp, horizon)
    lower = float(Q[state, action]) if action is not None else float(V[state])
    return ValueBounds(lower, lower + mdp.gamma ** horizon / (1.0 - mdp.gamma), horizon)


def horizon_for_tolerance(gamma: float, tol: float) -> int:
    """Smallest horizon whose tail bound ``gamma**H/(1-gamma)`` is at most ``tol``."""
    h = max(0, math.ceil(math.log(tol * (1.0 - gamma)) / math.log(gamma)))
    while gamma ** h / (1.0 - gamma) > tol:
        h += 1
    return h


def optimal_values(mdp: TabularMdp, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """``V*`` and ``Q*`` to within ``tol`` (truncation from below)."""
    return finite_horizon_values(mdp, horizon_for_tolerance(mdp.gamma, tol))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def make_random_mdp(seed: int, n_states: int, K: int, N: int, reward_sparsity: float = 0.0,
                    gamma: float = 0.5, root: Root | None = None) -> TabularMdp:
    """Random instance with ``K`` actions everywhere and exactly ``N`` successors per row.

    Successor probabilities are normalized uniforms; rewards are Bernoulli
    with uniform means, replaced by ``Constant(0)`` with probability
    ``reward_sparsity``.  Deterministic in ``seed``.
    """
    if n_states < 1 or K < 1 or N < 1 or N > n_states:
        raise ContractError(f"infeasible dimensions n_states={n_states}, K={K}, N={N}")
    if not 0.0 <= reward_sparsity <= 1.0:
        raise ContractError("reward_sparsity must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_states):
        row = []
        for _ in range(K):
            succ = sorted(int(x) for x in rng.choice(n_states, size=N, replace=False))
            w = rng.uniform(0.05, 1.0, size=N)
            probs = (w / w.sum()).tolist()
            # push rounding residue onto the largest entry so the row sums to 1
            j = int(np.argmax(probs))
            probs[j] = 1.0 - math.fsum(probs[:j] + probs[j + 1:])
            p = float(rng.uniform())
            reward = constant(0.0) if rng.uniform() < reward_sparsity else bernoulli(p)
            row.append(Outcomes(tuple(succ), tuple(probs), reward))
        rows.append(tuple(row))
    return TabularMdp(float(gamma), tuple(rows), root or Root())


# ---------------------------------------------------------------------------
# Continuous-transition toy
# ---------------------------------------------------------------------------

class ContinuousState(NamedTuple):
    """A point of ``[0, 1]`` tagged with a 63-bit random label.

    The label makes two independently drawn states distinct with certainty
    in practice, without relying on float coordinates never colliding.
    """

    x: float
    tag: int


@dataclass(frozen=True)
class GapProfile:
    """Shape of the action gap ``Delta(x)`` over states ``x ~ U[0, 1]``.

    ``bounded_gap``: ``Delta(x) = dmin + (1 - dmin) x``, so ``Delta >= dmin``.
    ``power_law``: ``Delta(x) = min(1, (x / c) ** (1 / b))``, so
    ``P(Delta <= y) = min(1, c y**b)``.
    """

    kind: str
    dmin: float = 0.0
    b: float = 0.0
    c: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "bounded_gap":
            if not 0.0 < self.dmin <= 1.0:
                raise ContractError(f"bounded_gap needs 0 < dmin <= 1, got {self.dmin}")
        elif self.kind == "power_law":
            if self.b <= 0 or self.c <= 0:
                raise ContractError(f"power_law needs b > 0 and c > 0, got b={self.b}, c={self.c}")
        else:
            raise ContractError(f"unknown gap profile {self.kind!r}")

    def gap(self, x: float) -> float:
        if self.kind == "bounded_gap":
            return self.dmin + (1.0 - self.dmin) * x
        return min(1.0, (x / self.c) ** (1.0 / self.b))

    def mean_gap(self) -> float:
        """``E[Delta(X)]`` for ``X ~ U[0, 1]``."""
        if self.kind == "bounded_gap":
            return self.dmin + (1.0 - self.dmin) / 2.0
        b, c = self.b, self.c
        if c >= 1.0:
            return c ** (-1.0 / b) * b / (b + 1.0)
        return c * b / (b + 1.0) + (1.0 - c)


def bounded_gap(dmin: float) -> GapProfile:
    return GapProfile("bounded_gap", dmin=dmin)


def power_law(b: float, c: float = 1.0) -> GapProfile:
    return GapProfile("power_law", b=b, c=c)


@dataclass(frozen=True)
class ContinuousToy:
    """Two-action MDP on the continuum ``[0, 1]``.

    In state ``x`` action 0 pays ``Bernoulli(1/2 + Delta(x)/2)`` and action 1
    pays ``Bernoulli(1/2 - Delta(x)/2)``; both then jump to a fresh
    ``x' ~ U[0, 1]``.  The continuation value is the same for both actions,
    so the gap of state ``x`` is exactly ``Delta(x)`` and

        W = E[V(X')] = (1/2 + E[Delta]/2) / (1 - gamma),
        V(x) = 1/2 + Delta(x)/2 + gamma * W.
    """

    profile: GapProfile
    gamma: float
    root: Root

    def action_count(self, state: ContinuousState) -> int:
        return 2

    def reward_mean(self, state: ContinuousState, action: int) -> float:
        g = self.profile.gap(state.x)
        return 0.5 + g / 2.0 if action == 0 else 0.5 - g / 2.0

    def sample(self, state: ContinuousState, action: int, rng: np.random.Generator):
        nxt = ContinuousState(float(rng.random()), int(rng.integers(1 << 63)))
        reward = 1.0 if rng.random() < self.reward_mean(state, action) else 0.0
        return reward, nxt

    @property
    def continuation(self) -> float:
        return (0.5 + self.profile.mean_gap() / 2.0) / (1.0 - self.gamma)

    def child_values(self, state: ContinuousState) -> tuple[float, float]:
        """Exact action values ``Q(x, 0)`` and ``Q(x, 1)``."""
        w = self.gamma * self.continuation
        return self.reward_mean(state, 0) + w, self.reward_mean(state, 1) + w

    def value(self, state: ContinuousState, action: int | None = None) -> float:
        q = self.child_values(state)
        return max(q) if action is None else q[action]

    def root_value(self) -> float:
        return self.value(self.root.state, self.root.action)


def make_continuous_toy(seed: int, gap_profile: GapProfile, gamma: float = 0.5) -> ContinuousToy:
    """Continuous-state generative model whose gaps follow ``gap_profile``."""
    if not isinstance(gap_profile, GapProfile):
        raise ContractError("gap_profile must be built with bounded_gap() or power_law()")
    if not 0.0 < gamma < 1.0:
        raise ContractError(f"gamma={gamma!r} must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    x0 = ContinuousState(float(rng.random()), int(rng.integers(1 << 63)))
    return ContinuousToy(gap_profile, float(gamma), Root("max", x0))

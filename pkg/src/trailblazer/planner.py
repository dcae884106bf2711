"""TrailBlazer: sample-efficient Monte-Carlo planning with a generative model.

The planning tree alternates MAX nodes (states, one child per action) and
AVG nodes (state-action pairs, children drawn from the transition law).
Every node is a persistent object called with two parameters: ``m``, the
number of independent samples the caller wants the estimate to be worth
(variance), and ``eps``, the bias the caller tolerates.

AVG nodes keep every transition they ever drew but only use the first ``m``
of them for a call with parameter ``m``.  MAX nodes run a successive
elimination over their actions; once a single action is left they forward
the call to it unchanged.
"""
from __future__ import annotations

import math
import sys
import time
from dataclasses import asdict, dataclass
from typing import Hashable

import numpy as np

from .mdp import ContractError, GenerativeModel, Root

INF = math.inf


class BudgetExceeded(RuntimeError):
    """The optional oracle-call cap was reached before the plan finished."""

    def __init__(self, cap: int, counter: "RunCounter", max_depth: int):
        super().__init__(f"oracle-call cap {cap} exceeded")
        self.cap = cap
        self.counter = counter
        self.max_depth = max_depth


class DepthGuardError(RuntimeError):
    """A node deeper than the proven maximum search depth was called."""


# ---------------------------------------------------------------------------
# Closed-form pieces
# ---------------------------------------------------------------------------

def eta(eps: float, gamma: float) -> float:
    """Bias split factor of a MAX node called with ``eps``."""
    return gamma ** (1.0 / max(2.0, math.log(1.0 / eps)))


def max_depth(eps: float, gamma: float) -> int:
    """Depth bound for a root called with ``eps`` when every node shares one ``eta``.

    The inner ceiling is clamped at 1, which only matters once ``eps``
    exceeds ``1/(1-gamma)`` and no AVG node below the root samples anything.
    """
    n = eta(eps, gamma)
    steps = math.ceil((math.log(1.0 / eps) + math.log(1.0 / (1.0 - gamma))) / math.log(n / gamma))
    return 2 * max(1, steps) + 2


def chain_depth(eps: float, gamma: float, root_kind: str = "max") -> int:
    """Deepest node any call to the root can reach, following the smallest bias schedule.

    An AVG node forwards ``eps/gamma``; a MAX node forwards at least
    ``eta(eps) * eps`` where ``eta`` is recomputed from that node's own
    ``eps``.  The returned depth is that of the first AVG node whose ``eps``
    reaches the early-exit level ``1/(2(1-gamma))``.
    """
    half = 0.5 / (1.0 - gamma)
    # eps * eta(eps) is increasing in eps iff ln(1/gamma) <= 4; otherwise fall back to eta >= sqrt(gamma)
    monotone = math.log(1.0 / gamma) <= 4.0
    depth, e, kind = 0, eps, root_kind
    while True:
        if kind == "avg":
            if e >= half:
                return depth
            e = e / gamma
            kind = "max"
        else:
            e = e * (eta(e, gamma) if monotone else math.sqrt(gamma))
            kind = "avg"
        depth += 1


def depth_bound(eps: float, gamma: float, root_kind: str = "max") -> int:
    """Runtime guard: the larger of :func:`max_depth` and :func:`chain_depth`."""
    return max(max_depth(eps, gamma), chain_depth(eps, gamma, root_kind))


def confidence_radius(k: int, t_eff: int, config: "PlannerConfig", eta_val: float) -> float:
    """``U = c / ((1-eta)(1-gamma)) * sqrt(ln(t/delta) / k)``; infinite for ``k == 0``."""
    if k == 0:
        return INF
    if k < 0 or t_eff < 2:
        raise ContractError("confidence_radius needs k >= 0 and t_eff >= 2")
    return _radius_coef(config, eta_val) * math.sqrt(math.log(t_eff / config.delta) / k)


def _radius_coef(config: "PlannerConfig", eta_val: float) -> float:
    coef = config.u_constant / (1.0 - config.gamma)
    if config.u_eta_factor:
        coef /= 1.0 - eta_val
    return coef


def _stop_threshold(config: "PlannerConfig", eps: float, eta_val: float) -> float:
    # Elimination ends once every surviving child has (4/(1-gamma)) sqrt(ln(t/delta)/k) <= (1-eta) eps.
    # With the 1/(1-eta) factor folded into U that reads U <= eps.
    return eps if config.u_eta_factor else (1.0 - eta_val) * eps


def sample_budget(gamma: float, delta: float, epsilon: float) -> int:
    """``m = ceil(ln(1/delta) / ((1-gamma)^2 epsilon^2))``."""
    return math.ceil(math.log(1.0 / delta) / ((1.0 - gamma) ** 2 * epsilon ** 2))


# ---------------------------------------------------------------------------
# Configuration and bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlannerConfig:
    gamma: float
    delta: float
    epsilon: float
    u_constant: float = 4.0
    u_eta_factor: bool = True
    call_cap: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ContractError(f"gamma={self.gamma!r} must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ContractError(f"delta={self.delta!r} must lie in (0, 1)")
        if not self.epsilon > 0.0:
            raise ContractError(f"epsilon={self.epsilon!r} must be positive")
        if self.u_constant <= 0.0:
            raise ContractError("u_constant must be positive")
        if self.call_cap is not None and self.call_cap < 0:
            raise ContractError("call_cap must be nonnegative")

    @property
    def m(self) -> int:
        return sample_budget(self.gamma, self.delta, self.epsilon)

    @property
    def root_eps(self) -> float:
        return self.epsilon / 2.0

    @property
    def max_depth_guard(self) -> int:
        return depth_bound(self.root_eps, self.gamma)


class RunCounter:
    """Oracle calls made during one planning run.

    Each transition draw and its paired reward draw are counted separately;
    ``oracle_calls`` is their sum and is what the confidence radius uses.
    """

    __slots__ = ("transition_calls", "reward_calls", "cap")

    def __init__(self, cap: int | None = None):
        self.transition_calls = 0
        self.reward_calls = 0
        self.cap = cap

    @property
    def oracle_calls(self) -> int:
        return self.transition_calls + self.reward_calls

    def effective_t(self) -> int:
        return max(2, self.transition_calls + self.reward_calls)

    def record_pair(self) -> None:
        self.transition_calls += 1
        self.reward_calls += 1


@dataclass
class PlanResult:
    estimate: float
    oracle_calls: int
    transition_calls: int
    reward_calls: int
    max_depth_reached: int
    depth_bound: int
    wall_time: float
    seed: int | None = None
    selected_action: int | None = None

    def to_record(self) -> dict:
        return {
            "estimate": self.estimate,
            "oracle_calls": self.oracle_calls,
            "transition_calls": self.transition_calls,
            "reward_calls": self.reward_calls,
            "max_depth_reached": self.max_depth_reached,
            "wall_time_ms": self.wall_time * 1000.0,
            "seed": self.seed,
        }

    def same_outcome(self, other: "PlanResult") -> bool:
        """Equality of everything except wall time."""
        a, b = asdict(self), asdict(other)
        a.pop("wall_time"), b.pop("wall_time")
        return a == b


class _Run:
    """State shared by all nodes of one planning run."""

    __slots__ = ("model", "rng", "gamma", "delta", "half", "config", "counter", "max_depth", "guard")

    def __init__(self, model: GenerativeModel, config: PlannerConfig, rng: np.random.Generator, guard: int):
        self.model = model
        self.rng = rng
        self.gamma = config.gamma
        self.delta = config.delta
        self.half = 0.5 / (1.0 - config.gamma)
        self.config = config
        self.counter = RunCounter(config.call_cap)
        self.max_depth = 0
        self.guard = guard

    def visit(self, depth: int) -> None:
        if depth > self.max_depth:
            self.max_depth = depth
            if depth > self.guard:
                raise DepthGuardError(f"node at depth {depth} called; bound is {self.guard}")

    def sample(self, state: Hashable, action: int) -> tuple[float, Hashable]:
        c = self.counter
        if c.cap is not None and c.oracle_calls + 2 > c.cap:
            raise BudgetExceeded(c.cap, c, self.max_depth)
        reward, nxt = self.model.sample(state, action, self.rng)
        c.record_pair()
        return reward, nxt


# ---------------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------------

class AvgNode:
    """A state-action pair.  Keeps its samples for the lifetime of the run."""

    __slots__ = ("state", "action", "depth", "sampled", "reward_sum", "children",
                 "_counts", "_counted", "_last")

    def __init__(self, state: Hashable, action: int, depth: int):
        self.state = state
        self.action = action
        self.depth = depth
        self.sampled: list[Hashable] = []
        self.reward_sum = 0.0
        self.children: dict[Hashable, MaxNode] = {}
        self._counts: dict[Hashable, int] = {}
        self._counted = 0
        self._last: tuple[int, float, float] | None = None

    @property
    def reward_count(self) -> int:
        return len(self.sampled)

    def active_counts(self, m: int) -> dict[Hashable, int]:
        """Multiplicities of the first ``m`` samples, in first-appearance order."""
        counts, sampled = self._counts, self.sampled
        n = self._counted
        while n < m:
            s = sampled[n]
            counts[s] = counts.get(s, 0) + 1
            n += 1
        while n > m:
            n -= 1
            s = sampled[n]
            left = counts[s] - 1
            if left:
                counts[s] = left
            else:
                del counts[s]
        self._counted = m
        return counts

    def call(self, m: int, eps: float, run: _Run) -> float:
        run.visit(self.depth)
        if eps >= run.half:
            return run.half
        last = self._last
        if last is not None and last[0] == m and last[1] == eps:
            return last[2]
        sampled = self.sampled
        while len(sampled) < m:
            reward, nxt = run.sample(self.state, self.action)
            sampled.append(nxt)
            self.reward_sum += reward
        child_eps = eps / run.gamma
        mu = 0.0
        for s, k in list(self.active_counts(m).items()):
            child = self.children.get(s)
            if child is None:
                child = MaxNode(s, self.depth + 1, run.model.action_count(s))
                self.children[s] = child
            mu += child.call(k, child_eps, run) * k / m
        value = self.reward_sum / len(sampled) + run.gamma * mu
        self._last = (m, eps, value)
        return value


class MaxNode:
    """A state.  Runs successive elimination over its actions."""

    __slots__ = ("state", "depth", "actions", "k", "mu", "log_term", "eps_child", "selected", "_last")

    def __init__(self, state: Hashable, depth: int, n_actions: int):
        if n_actions < 1:
            raise ContractError(f"state {state!r} has no actions")
        self.state = state
        self.depth = depth
        self.actions = [AvgNode(state, a, depth + 1) for a in range(n_actions)]
        self.k = [0] * n_actions
        self.mu = [0.0] * n_actions
        # ln(t/delta) at the time each child's k was last raised
        self.log_term = [0.0] * n_actions
        self.eps_child = [INF] * n_actions
        # surviving child of the last completed call, or its best estimate when several survive
        self.selected: int | None = None
        self._last: tuple[int, float, float] | None = None

    def radii(self, coef: float) -> list[float]:
        return [coef * math.sqrt(lt / k) if k else INF for k, lt in zip(self.k, self.log_term)]

    @staticmethod
    def candidates(pool: list[int], mu: list[float], U: list[float]) -> list[int]:
        """Children whose upper bound reaches the best lower bound within ``pool``."""
        bar = max(mu[j] - 2.0 * U[j] for j in pool)
        return [i for i in pool if mu[i] + 2.0 * U[i] >= bar]

    def call(self, m: int, eps: float, run: _Run) -> float:
        run.visit(self.depth)
        last = self._last
        if last is not None and last[0] == m and last[1] == eps:
            return last[2]
        actions = self.actions
        if len(actions) == 1:
            value = actions[0].call(m, eps, run)
            self.selected = 0
        else:
            value = self._eliminate(m, eps, run)
        self._last = (m, eps, value)
        return value

    def _eliminate(self, m: int, eps: float, run: _Run) -> float:
        config = run.config
        eta_val = eta(eps, run.gamma)
        coef = _radius_coef(config, eta_val)
        threshold = _stop_threshold(config, eps, eta_val)
        k, mu, log_term, eps_child = self.k, self.mu, self.log_term, self.eps_child
        U = self.radii(coef)
        L = self.candidates(list(range(len(k))), mu, U)
        half, counter, delta = run.half, run.counter, run.delta
        while len(L) > 1 and max(U[i] for i in L) > threshold:
            if self._skip_free_rounds(L, U, coef, eta_val, eps, threshold, half,
                                      math.log(counter.effective_t() / delta)):
                continue
            l = min(L, key=k.__getitem__)
            k[l] += 1
            log_term[l] = math.log(counter.effective_t() / delta)
            U[l] = coef * math.sqrt(log_term[l] / k[l])
            e = eta_val * max(U[l], eps)
            eps_child[l] = e
            if e >= half:
                # the child would return ``half`` without sampling
                run.visit(self.depth + 1)
                mu[l] = half
            else:
                mu[l] = self.actions[l].call(k[l], e, run)
            L = self.candidates(L, mu, U)
        if len(L) == 1:
            self.selected = L[0]
            return self.actions[L[0]].call(m, eps, run)
        self.selected = max(L, key=mu.__getitem__)
        return max(mu[i] for i in L)

    def _skip_free_rounds(self, L: list[int], U: list[float], coef: float, eta_val: float,
                          eps: float, threshold: float, half: float, lt: float) -> bool:
        """Jump over whole rounds of sample-free loop iterations.

        When every candidate sits at the same ``k`` with ``mu = half`` and
        ``log_term = lt`` (nothing was sampled since), the loop raises them
        round-robin, L cannot shrink and each child call returns ``half``
        untouched.  The number of such rounds follows from two monotone
        predicates in ``k``, found here by bisection on the exact loop
        expressions.  The resulting state is the one the plain loop reaches.
        """
        k, mu, log_term = self.k, self.mu, self.log_term
        k0 = k[L[0]]
        if k0 == 0:
            return False
        for i in L:
            if k[i] != k0 or mu[i] != half or log_term[i] != lt:
                return False

        def radius(kk: int) -> float:
            return coef * math.sqrt(lt / kk)

        def full_round(kk: int) -> bool:
            # a round starting at level kk runs to the end and costs no samples
            return radius(kk) > threshold and eta_val * max(radius(kk + 1), eps) >= half

        if not full_round(k0):
            return False
        lo, step = k0, 1
        while full_round(lo + step):
            lo, step = lo + step, step * 2
        hi = lo + step  # full_round(lo) holds, full_round(hi) fails
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if full_round(mid):
                lo = mid
            else:
                hi = mid
        top = lo + 1
        u = radius(top)
        e = eta_val * max(u, eps)
        for i in L:
            k[i] = top
            U[i] = u
            self.eps_child[i] = e
        return True


def make_root(model: GenerativeModel) -> AvgNode | MaxNode:
    root: Root = model.root
    if root.kind == "avg":
        n = model.action_count(root.state)
        if not 0 <= root.action < n:
            raise ContractError(f"root action {root.action} invalid ({n} actions)")
        return AvgNode(root.state, root.action, 0)
    return MaxNode(root.state, 0, model.action_count(root.state))


def _as_rng(rng: np.random.Generator | int) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(int(rng)), int(rng)


def plan(model: GenerativeModel, config: PlannerConfig, rng: np.random.Generator | int,
         engine: str = "auto") -> PlanResult:
    """Estimate the root value of ``model`` to within ``config.epsilon`` w.p. ``1 - config.delta``.

    ``rng`` is a numpy ``Generator`` or an integer seed.  ``engine`` selects
    the node implementation: ``"python"`` (any generative model),
    ``"compiled"`` (tabular models and the continuous toy) or ``"auto"``.  Both engines draw
    from the generator in the same order and return identical results.
    A state-action root with ``epsilon >= 1/(2(1-gamma))`` returns that
    midpoint without sampling.  Raises :class:`BudgetExceeded` when
    ``config.call_cap`` is hit.
    """
    if abs(config.gamma - model.gamma) > 0.0:
        raise ContractError(f"config gamma {config.gamma} differs from model gamma {model.gamma}")
    generator, seed = _as_rng(rng)
    if engine not in ("auto", "python", "compiled"):
        raise ContractError(f"unknown engine {engine!r}")
    half = 0.5 / (1.0 - config.gamma)
    if model.root.kind == "avg" and config.epsilon >= half:
        # every value lies in [0, 2 half], so half is already epsilon-accurate
        guard = depth_bound(config.root_eps, config.gamma, "avg")
        return PlanResult(half, 0, 0, 0, 0, guard, 0.0, seed, None)
    if engine != "python":
        from . import _compiled

        if _compiled.supports(model):
            return _compiled.plan(model, config, generator, seed)
        if engine == "compiled":
            raise ContractError("the compiled engine handles TabularMdp and ContinuousToy models only")
    return _plan_python(model, config, generator, seed)


def _plan_python(model: GenerativeModel, config: PlannerConfig, rng: np.random.Generator,
                 seed: int | None) -> PlanResult:
    guard = depth_bound(config.root_eps, config.gamma, model.root.kind)
    run = _Run(model, config, rng, guard)
    root = make_root(model)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * guard + 200))
    start = time.perf_counter()
    try:
        estimate = root.call(config.m, config.root_eps, run)
    finally:
        sys.setrecursionlimit(limit)
    wall = time.perf_counter() - start
    c = run.counter
    selected = root.selected if isinstance(root, MaxNode) else None
    return PlanResult(estimate, c.oracle_calls, c.transition_calls, c.reward_calls,
                      run.max_depth, guard, wall, seed, selected)

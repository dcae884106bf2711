"""Problem-difficulty measures on tabular MDPs.

The planning tree is indexed by paths, duplicates unmerged.  A path is a
tuple ``(a0, s1, a1, s2, ...)`` of alternating actions and successor states
starting from the root state; its length is the node depth, so even lengths
are MAX nodes (states) and odd lengths are AVG nodes (state-action pairs).

Provided here: action gaps, the loss ``Delta_{->s}`` of a path at an
ancestor, near-optimal sets ``N_h``, the branching exponent ``kappa`` and a
Monte-Carlo estimate of the difficulty exponent ``d``.
"""
from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .mdp import ContractError, TabularMdp, _dense

Path = tuple[int, ...]
Theta = Callable[[int], float]

VALUE_TOL = 1e-9
DEFAULT_PATH_CAP = 5000


class EnumerationCapExceeded(ContractError):
    """The requested tree has more paths than the configured cap."""


def default_theta(gamma: float) -> Theta:
    """``theta(j) = gamma**j / (1 - gamma)``."""
    return lambda j: gamma ** j / (1.0 - gamma)


# ---------------------------------------------------------------------------
# Exact values
# ---------------------------------------------------------------------------

def policy_iteration(mdp: TabularMdp, max_iter: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """``V*`` and ``Q*`` by policy iteration with exact linear solves.

    A state switches action only on a strict improvement larger than 1e-13,
    so ties never cause cycling.
    """
    P, R, valid = _dense(mdp)
    n, g = mdp.n_states, mdp.gamma
    policy = np.zeros(n, dtype=int)
    idx = np.arange(n)
    for _ in range(max_iter):
        A = np.eye(n) - g * P[idx, policy]
        V = np.linalg.solve(A, R[idx, policy])
        Q = np.where(valid, R + g * (P @ V), -np.inf)
        best = Q.argmax(axis=1)
        improve = Q[idx, best] > Q[idx, policy] + 1e-13
        if not improve.any():
            return V, Q
        policy = np.where(improve, best, policy)
    raise RuntimeError("policy iteration did not converge")


# ---------------------------------------------------------------------------
# Tree index
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TreeIndex:
    mdp: TabularMdp
    depth: int
    V: np.ndarray
    Q: np.ndarray
    levels: tuple[tuple[Path, ...], ...]

    @property
    def root_state(self) -> int:
        return self.mdp.root.state

    def state(self, path: Path) -> int:
        """State of the node: the last successor on the path (root state if none)."""
        if len(path) % 2 == 0:
            return path[-1] if path else self.root_state
        return path[-2] if len(path) >= 2 else self.root_state

    def value(self, path: Path) -> float:
        s = self.state(path)
        return float(self.V[s]) if len(path) % 2 == 0 else float(self.Q[s, path[-1]])

    def paths(self, depth: int) -> tuple[Path, ...]:
        if not 0 <= depth <= self.depth:
            raise ContractError(f"depth {depth} outside the enumerated range 0..{self.depth}")
        return self.levels[depth]

    def gap(self, path: Path) -> float:
        """Best minus second-best action value at a MAX node; ``inf`` with one action."""
        if len(path) % 2:
            raise ContractError("gap is defined for MAX nodes (even-length paths)")
        return state_gap(self.Q, self.mdp.action_count(self.state(path)), self.state(path))

    def gap_table(self) -> dict[Path, float]:
        return {p: self.gap(p) for d in range(0, self.depth + 1, 2) for p in self.levels[d]}


def state_gap(Q: np.ndarray, n_actions: int, s: int) -> float:
    if n_actions < 2:
        return math.inf
    q = np.sort(Q[s, :n_actions])
    return float(q[-1] - q[-2])


def enumerate_tree(mdp: TabularMdp, depth: int, cap: int = DEFAULT_PATH_CAP) -> TreeIndex:
    """All tree paths down to ``depth`` from the root state.

    Raises :class:`EnumerationCapExceeded` when the deepest level would hold
    more than ``cap`` paths.
    """
    if depth < 0:
        raise ContractError("depth must be >= 0")
    V, Q = policy_iteration(mdp)
    root: Path = ()
    levels: list[tuple[Path, ...]] = [(root,)]
    current = [root]
    for d in range(depth):
        nxt: list[Path] = []
        for p in current:
            if d % 2 == 0:
                s = p[-1] if p else mdp.root.state
                nxt.extend(p + (a,) for a in range(mdp.action_count(s)))
            else:
                s = p[-2] if len(p) >= 2 else mdp.root.state
                nxt.extend(p + (s2,) for s2 in mdp.outcomes[s][p[-1]].next_states)
            if len(nxt) > cap:
                raise EnumerationCapExceeded(f"more than {cap} paths at depth {d + 1}")
        current = nxt
        levels.append(tuple(nxt))
    return TreeIndex(mdp, depth, V, Q, tuple(levels))


def _loss(Q: np.ndarray, n_actions: int, s: int, a: int) -> float:
    q = Q[s, :n_actions]
    best = float(q.max())
    # an action within 1e-12 of the best is an optimal child
    return 0.0 if Q[s, a] >= best - 1e-12 else best - float(Q[s, a])


def delta_to(tree: TreeIndex, ancestor: Path, descendant: Path) -> float:
    """Value lost at MAX node ``ancestor`` by taking the child that leads to ``descendant``."""
    h = len(ancestor)
    if h % 2 or len(descendant) <= h or tuple(descendant[:h]) != tuple(ancestor):
        raise ContractError("ancestor must be a MAX node strictly above descendant on its path")
    s = tree.state(ancestor)
    return _loss(tree.Q, tree.mdp.action_count(s), s, descendant[h])


@dataclass
class NearOptimalSet:
    depth: int
    members: list[Path]
    ambiguous: list[Path]
    theta_name: str = "gamma^j/(1-gamma)"


def near_optimal_set(tree: TreeIndex, h: int, theta: Theta | None = None,
                     tol: float = VALUE_TOL, theta_name: str | None = None) -> NearOptimalSet:
    """Depth-``h`` nodes whose loss at every even ancestor depth ``h'`` is at most ``theta(h - h')``.

    Paths where some loss is within ``tol`` of its threshold (and nonzero)
    are also listed in ``ambiguous``: the values behind them are only
    certified to ``tol``.
    """
    if theta is None:
        theta = default_theta(tree.mdp.gamma)
        theta_name = theta_name or "gamma^j/(1-gamma)"
    members, ambiguous = [], []
    for path in tree.paths(h):
        ok, flag = True, False
        for hp in range(0, h, 2):
            d = delta_to(tree, path[:hp], path)
            th = theta(h - hp)
            if d > th:
                ok = False
            if d > 0.0 and abs(d - th) <= tol:
                flag = True
        if ok:
            members.append(path)
        if flag:
            ambiguous.append(path)
    return NearOptimalSet(h, members, ambiguous, theta_name or "custom")


def near_optimal_sizes(tree: TreeIndex, h_cap: int, theta: Theta | None = None) -> list[int]:
    """``|N_{2h}|`` for ``h = 1..h_cap``."""
    return [len(near_optimal_set(tree, 2 * h, theta).members) for h in range(1, h_cap + 1)]


# ---------------------------------------------------------------------------
# kappa
# ---------------------------------------------------------------------------

@dataclass
class KappaFit:
    kappa: float
    raw_kappa: float
    log_intercept: float
    residual: float
    clamped: bool
    n_points: int


def estimate_kappa(sizes: Sequence[float], N: int, K: int | None = None) -> KappaFit:
    """Fit ``|N_{2h}| ~ C (N kappa)^h`` from ``sizes[h-1] = |N_{2h}|``.

    Least squares of ``ln|N_{2h}| - h ln N`` on ``h`` over the nonzero sizes;
    ``kappa`` is the exponentiated slope, clamped to ``[1, K]``
    (``[1, inf)`` without ``K``).
    """
    if N < 1:
        raise ContractError("N must be >= 1")
    h = np.arange(1, len(sizes) + 1, dtype=float)
    s = np.asarray(sizes, dtype=float)
    if not np.any(s > 0):
        raise ContractError("all near-optimal set sizes are zero")
    keep = s > 0
    if keep.sum() < 3:
        raise ContractError("need at least three depths with nonzero sizes")
    x, y = h[keep], np.log(s[keep]) - h[keep] * math.log(N)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    raw = math.exp(slope)
    hi = math.inf if K is None else float(K)
    kappa = min(max(raw, 1.0), hi)
    return KappaFit(kappa, raw, float(intercept), resid, kappa != raw, int(keep.sum()))


# ---------------------------------------------------------------------------
# d
# ---------------------------------------------------------------------------

def _walk_integrand(mdp: TabularMdp, Q: np.ndarray, xi: float, h: int, theta: Theta,
                    rng: np.random.Generator) -> float:
    gamma = mdp.gamma
    s = mdp.root.state
    weight = 1.0
    member = True
    for hp in range(0, h, 2):
        k = mdp.action_count(s)
        a = int(rng.integers(k))
        weight *= k
        th = theta(h - hp)
        if _loss(Q, k, s, a) > th:
            member = False
        if state_gap(Q, k, s) < th:
            weight *= xi / gamma ** (h - hp)
        if hp + 2 < h:
            out = mdp.outcomes[s][a]
            j = bisect_right(out.cumulative, rng.random())
            s = out.next_states[min(j, len(out.next_states) - 1)]
    return weight if member else 0.0


def estimate_d(mdp: TabularMdp, xi: float, h: int, n_samples: int, rng: np.random.Generator,
               theta: Theta | None = None) -> float:
    """Monte-Carlo estimate of the expectation in the definition of ``d`` at depth ``h``.

    Each draw builds the random subtree lazily: at each MAX level a uniform
    action is chosen and weighted by the number of actions, and a single
    successor is sampled.  The mean equals the expected sum, over the leaves
    of the random subtree, of the near-optimality indicator times the gap
    factors (``K^{h/2}`` times a uniform leaf when every state has ``K``
    actions).  Values come from exact policy iteration, so no enumeration is
    needed.
    """
    if h < 0 or h % 2:
        raise ContractError("h must be a nonnegative even integer")
    if n_samples < 1:
        raise ContractError("n_samples must be >= 1")
    if theta is None:
        theta = default_theta(mdp.gamma)
    _, Q = policy_iteration(mdp)
    total = 0.0
    for _ in range(n_samples):
        total += _walk_integrand(mdp, Q, xi, h, theta, rng)
    return total / n_samples


@dataclass
class DFit:
    d: float
    log_intercept: float
    residual: float
    points: list[tuple[int, float]]
    experimental: bool = True


def fit_d(estimates: Sequence[tuple[int, float]], gamma: float) -> DFit:
    """Regress ``ln(estimate)`` on ``h ln(1/gamma)``; the slope estimates ``d``."""
    pts = [(h, e) for h, e in estimates if e > 0.0]
    if len(pts) < 2:
        raise ContractError("need at least two depths with a positive estimate")
    x = np.array([h * math.log(1.0 / gamma) for h, _ in pts])
    y = np.log([e for _, e in pts])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    return DFit(float(slope), float(intercept), resid, [(int(h), float(e)) for h, e in pts])


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass
class DifficultyReport:
    gamma: float
    K: int
    N: int
    h_cap: int
    sizes: list[int]
    kappa: KappaFit | None
    d_grid: list[dict] = field(default_factory=list)
    d_fit: DFit | None = None
    gap_histogram: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def analyze(mdp: TabularMdp, h_cap: int = 4, h_grid: Sequence[int] = (2, 4, 6),
            xi: float | None = None, n_samples: int = 2000, seed: int = 0,
            cap: int = DEFAULT_PATH_CAP, bins: int = 10) -> DifficultyReport:
    """Near-optimal set sizes, kappa fit, a d grid with its regression and a gap histogram.

    ``xi`` defaults to ``gamma ** max(h_grid)`` so that every factor base
    ``xi / gamma^(h-h')`` is at most one.
    """
    gamma = mdp.gamma
    tree = enumerate_tree(mdp, 2 * h_cap, cap)
    sizes = near_optimal_sizes(tree, h_cap)
    notes: list[str] = []
    try:
        kappa = estimate_kappa(sizes, mdp.max_support, mdp.max_actions)
    except ContractError as exc:
        kappa = None
        notes.append(f"kappa fit unavailable: {exc}")
    if xi is None:
        xi = gamma ** max(h_grid)
    rng = np.random.default_rng(seed)
    grid = [{"xi": xi, "h": int(h), "estimate": estimate_d(mdp, xi, int(h), n_samples, rng)}
            for h in h_grid]
    try:
        dfit = fit_d([(g["h"], g["estimate"]) for g in grid], gamma)
    except ContractError as exc:
        dfit = None
        notes.append(f"d fit unavailable: {exc}")
    gaps = [g for g in tree.gap_table().values() if math.isfinite(g)]
    hist: dict = {"single_action_nodes": sum(1 for g in tree.gap_table().values() if not math.isfinite(g))}
    if gaps:
        counts, edges = np.histogram(gaps, bins=bins, range=(0.0, 1.0 / (1.0 - gamma)))
        hist.update(edges=edges.tolist(), counts=counts.tolist())
    notes.append("d is a Monte-Carlo estimate over a finite (xi, h) grid")
    return DifficultyReport(gamma, mdp.max_actions, mdp.max_support, h_cap, sizes, kappa, grid,
                            dfit, hist, notes)

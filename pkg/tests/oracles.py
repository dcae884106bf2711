"""Independent reference computations used to check the library."""
import math

import numpy as np

from trailblazer.mdp import finite_horizon_values

# losses this small are value-iteration round-off and count as zero
ZERO_LOSS = 1e-12


def q_by_value_iteration(mdp):
    g = mdp.gamma
    horizon = math.ceil(math.log(1e-13 * (1 - g)) / math.log(g))
    _, Q = finite_horizon_values(mdp, horizon)
    return Q


def all_paths(mdp, depth):
    """Depth-first enumeration of ``(a0, s1, a1, s2, ...)`` paths of exactly ``depth`` steps."""
    out = []

    def walk(path, s):
        if len(path) == depth:
            out.append(tuple(path))
            return
        if len(path) % 2 == 0:
            for a in range(len(mdp.outcomes[s])):
                walk(path + [a], s)
        else:
            for s2 in mdp.outcomes[s][path[-1]].next_states:
                walk(path + [s2], s2)

    walk([], mdp.root.state)
    return out


def path_losses(mdp, Q, path):
    """Loss at every even depth ``h'`` of ``path``: best child value minus the chosen one."""
    s = mdp.root.state
    losses = []
    for i, step in enumerate(path):
        if i % 2 == 0:
            row = Q[s, :len(mdp.outcomes[s])]
            loss = float(row.max() - row[step])
            losses.append(0.0 if loss <= ZERO_LOSS else loss)
        else:
            s = step
    return losses


def brute_near_optimal(mdp, h, theta, tol=1e-9):
    """Members and threshold-ambiguous paths at depth ``h``."""
    Q = q_by_value_iteration(mdp)
    members, near_edge = set(), set()
    for path in all_paths(mdp, h):
        losses = path_losses(mdp, Q, path)
        ths = [theta(h - 2 * j) for j in range(len(losses))]
        if all(d <= t for d, t in zip(losses, ths)):
            members.add(path)
        if any(d > 0 and abs(d - t) <= tol for d, t in zip(losses, ths)):
            near_edge.add(path)
    return members, near_edge


def greedy_paths(mdp, depth):
    """Paths that take an optimal action at every MAX level."""
    Q = q_by_value_iteration(mdp)
    return [p for p in all_paths(mdp, depth) if all(x == 0.0 for x in path_losses(mdp, Q, p))]


def binomial_upper_quantile(n, p, q):
    """Smallest k with P(Bin(n, p) <= k) >= q, by direct summation."""
    total = 0.0
    for k in range(n + 1):
        total += math.comb(n, k) * p ** k * (1 - p) ** (n - k)
        if total >= q:
            return k
    return n


def ols_slope(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    xm, ym = x.mean(), y.mean()
    return float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())

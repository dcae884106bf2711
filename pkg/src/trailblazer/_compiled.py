"""Numba version of the planner for tabular models and the continuous toy.

Node state lives in flat arrays and the recursion runs on an explicit frame
stack.  The control flow, the order of generator draws and every
floating-point expression mirror :mod:`trailblazer.planner`, so both engines
return the same bits (``tests/test_engines.py`` holds them to that).
"""
from __future__ import annotations

import math
import time

import numpy as np
from numba import int32, njit
from numba.typed import List

from .mdp import ContinuousToy, TabularMdp

# run-state slots
_TC, _RC, _DEPTH, _STATUS, _GUARD, _CAP, _SEL = range(7)
_ABORT_BUDGET, _ABORT_DEPTH = 1, 2

# AVG node columns (int64); the parent MAX node's k for this child sits here too.
# Continuous models keep the parent MAX id in _A_SA and the child list ends in
# _A_COUNTED (head) and _A_NORDER (tail).
_A_SA, _A_DEPTH, _A_NSAMP, _A_COUNTED, _A_NORDER, _A_LASTM, _A_K, _A_ACT = range(8)
# AVG node columns (float64)
_A_RSUM, _A_LASTEPS, _A_LASTVAL, _A_MU, _A_LOGT = range(5)
# MAX node columns; continuous models chain siblings through _M_NEXT and keep x in _M_X
_M_DEPTH, _M_FIRST, _M_NACT, _M_LASTM, _M_NEXT = range(5)
_M_LASTEPS, _M_LASTVAL, _M_X = range(3)
_GAP_BOUNDED, _GAP_POWER = range(2)

# frame program counters
_ENTER, _AVG_CHILD, _MAX_LOOP, _MAX_CHILD, _MAX_FINAL = range(5)


@njit(cache=True)
def _grow(a):
    shape = (2 * a.shape[0],) + a.shape[1:]
    b = np.empty(shape, a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _filter(pool, npool, af, U, first):
    bar = -np.inf
    for p in range(npool):
        i = pool[p]
        v = af[first + i, _A_MU] - 2.0 * U[i]
        if v > bar:
            bar = v
    out = 0
    for p in range(npool):
        i = pool[p]
        if af[first + i, _A_MU] + 2.0 * U[i] >= bar:
            pool[out] = i
            out += 1
    return out


@njit(cache=True)
def _full_round(kk, coef, lt, threshold, eta_val, eps, half):
    return coef * math.sqrt(lt / kk) > threshold and eta_val * max(coef * math.sqrt(lt / (kk + 1)), eps) >= half


@njit(cache=True)
def _free_rounds_top(k0, coef, lt, threshold, eta_val, eps, half):
    """Level reached by skipping sample-free rounds, or -1 (see ``MaxNode._skip_free_rounds``)."""
    if not _full_round(k0, coef, lt, threshold, eta_val, eps, half):
        return -1
    lo = k0
    step = 1
    while _full_round(lo + step, coef, lt, threshold, eta_val, eps, half):
        lo = lo + step
        step = step * 2
    hi = lo + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _full_round(mid, coef, lt, threshold, eta_val, eps, half):
            lo = mid
        else:
            hi = mid
    return lo + 1


@njit(cache=True)
def _gap(kind, dmin, b, c, x):
    if kind == _GAP_BOUNDED:
        return dmin + (1.0 - dmin) * x
    return min(1.0, (x / c) ** (1.0 / b))


@njit(cache=True)
def _solve(n_actions, sa_offset, succ_start, succ_len, succ_state, succ_cum, rew_bern, rew_param,
           gamma, delta, u_constant, eta_factor, run, rng, root_is_max, root_state, root_action,
           m_root, eps_root, capacity, continuous, gap_kind, g_dmin, g_b, g_c, root_x):
    half = 0.5 / (1.0 - gamma)
    nmax = 1
    for i in range(succ_len.shape[0]):
        nmax = max(nmax, succ_len[i])
    kmax = 1
    for i in range(n_actions.shape[0]):
        kmax = max(kmax, n_actions[i])
    guard = run[_GUARD]
    cap = run[_CAP]

    ai = np.empty((capacity, 8), np.int64)
    af = np.empty((capacity, 5), np.float64)
    counts = np.zeros((capacity, nmax), np.int64)
    order = np.empty((capacity, nmax), np.int64)
    child = np.full((capacity, nmax), -1, np.int64)
    samples = List.empty_list(int32[:])
    n_avg = 0
    mi = np.empty((capacity, 5), np.int64)
    mf = np.empty((capacity, 3), np.float64)
    n_max = 0

    # frames
    depth_cap = guard + 3
    f_max = np.zeros(depth_cap, np.bool_)
    f_node = np.zeros(depth_cap, np.int64)
    f_m = np.zeros(depth_cap, np.int64)
    f_eps = np.zeros(depth_cap, np.float64)
    f_pc = np.zeros(depth_cap, np.int64)
    f_p = np.zeros(depth_cap, np.int64)      # AVG: position in the child order; MAX: chosen child l
    f_acc = np.zeros(depth_cap, np.float64)  # AVG: running mu
    f_cur = np.zeros(depth_cap, np.int64)    # continuous AVG: current child
    f_eta = np.zeros(depth_cap, np.float64)
    f_coef = np.zeros(depth_cap, np.float64)
    f_thr = np.zeros(depth_cap, np.float64)
    f_npool = np.zeros(depth_cap, np.int64)
    f_pool = np.zeros((depth_cap, kmax), np.int64)
    f_U = np.zeros((depth_cap, kmax), np.float64)

    # root node
    if continuous:
        # MAX row 0 holds the root state; MAX nodes get their AVG rows on first entry
        mi[0, _M_DEPTH] = 0
        mi[0, _M_FIRST] = -1
        mi[0, _M_NACT] = 2
        mi[0, _M_LASTM] = -1
        mi[0, _M_NEXT] = -1
        mf[0, _M_X] = root_x
        n_max = 1
        if not root_is_max:
            ai[0, _A_SA] = 0
            ai[0, _A_ACT] = root_action
            ai[0, _A_DEPTH] = 0
            ai[0, _A_NSAMP] = 0
            ai[0, _A_COUNTED] = -1
            ai[0, _A_NORDER] = -1
            ai[0, _A_LASTM] = -1
            ai[0, _A_K] = 0
            af[0, _A_RSUM] = 0.0
            af[0, _A_MU] = 0.0
            af[0, _A_LOGT] = 0.0
            n_avg = 1
    else:
        if root_is_max:
            first_actions = n_actions[root_state]
            root_sa0 = sa_offset[root_state]
            mi[0, _M_DEPTH] = 0
            mi[0, _M_FIRST] = 0
            mi[0, _M_NACT] = first_actions
            mi[0, _M_LASTM] = -1
            n_max = 1
            base_depth = 1
        else:
            first_actions = 1
            root_sa0 = sa_offset[root_state] + root_action
            base_depth = 0
        for a in range(first_actions):
            ai[n_avg, _A_SA] = root_sa0 + a
            ai[n_avg, _A_DEPTH] = base_depth
            ai[n_avg, _A_NSAMP] = 0
            ai[n_avg, _A_COUNTED] = 0
            ai[n_avg, _A_NORDER] = 0
            ai[n_avg, _A_LASTM] = -1
            ai[n_avg, _A_K] = 0
            af[n_avg, _A_RSUM] = 0.0
            af[n_avg, _A_MU] = 0.0
            af[n_avg, _A_LOGT] = 0.0
            samples.append(np.empty(4, np.int32))
            n_avg += 1

    sp = 0
    f_max[0] = root_is_max
    f_node[0] = 0
    f_m[0] = m_root
    f_eps[0] = eps_root
    f_pc[0] = _ENTER
    ret = 0.0

    while sp >= 0:
        node = f_node[sp]
        pc = f_pc[sp]
        m = f_m[sp]
        eps = f_eps[sp]
        if not f_max[sp]:
            # ---------------- AVG node ----------------
            if pc == _ENTER:
                d = ai[node, _A_DEPTH]
                if d > run[_DEPTH]:
                    run[_DEPTH] = d
                    if d > guard:
                        run[_STATUS] = _ABORT_DEPTH
                        raise RuntimeError("depth guard")
                if eps >= half:
                    ret = half
                    sp -= 1
                    continue
                if ai[node, _A_LASTM] == m and af[node, _A_LASTEPS] == eps:
                    ret = af[node, _A_LASTVAL]
                    sp -= 1
                    continue
                if continuous:
                    ns = ai[node, _A_NSAMP]
                    if ns < m:
                        g = _gap(gap_kind, g_dmin, g_b, g_c, mf[ai[node, _A_SA], _M_X])
                        p_r = 0.5 + g / 2.0 if ai[node, _A_ACT] == 0 else 0.5 - g / 2.0
                        rsum = af[node, _A_RSUM]
                        d = ai[node, _A_DEPTH] + 1
                        tail = ai[node, _A_NORDER]
                        while ns < m:
                            if cap >= 0 and run[_TC] + run[_RC] + 2 > cap:
                                run[_STATUS] = _ABORT_BUDGET
                                raise RuntimeError("budget")
                            x = rng.random()
                            rng.integers(0, 9223372036854775807, endpoint=True)  # the state tag
                            r = 1.0 if rng.random() < p_r else 0.0
                            run[_TC] += 1
                            run[_RC] += 1
                            while n_max >= mi.shape[0]:
                                mi = _grow(mi)
                                mf = _grow(mf)
                            ch = n_max
                            n_max += 1
                            mi[ch, _M_DEPTH] = d
                            mi[ch, _M_FIRST] = -1
                            mi[ch, _M_NACT] = 2
                            mi[ch, _M_LASTM] = -1
                            mi[ch, _M_NEXT] = -1
                            mf[ch, _M_X] = x
                            if tail < 0:
                                ai[node, _A_COUNTED] = ch
                            else:
                                mi[tail, _M_NEXT] = ch
                            tail = ch
                            ns += 1
                            rsum += r
                        ai[node, _A_NSAMP] = ns
                        ai[node, _A_NORDER] = tail
                        af[node, _A_RSUM] = rsum
                    # every sample is a distinct state, so the active children are the first m samples
                    f_p[sp] = 0
                    f_acc[sp] = 0.0
                    f_cur[sp] = ai[node, _A_COUNTED]
                    f_pc[sp] = _AVG_CHILD
                    sp += 1
                    f_max[sp] = True
                    f_node[sp] = f_cur[sp - 1]
                    f_m[sp] = 1
                    f_eps[sp] = eps / gamma
                    f_pc[sp] = _ENTER
                    continue
                sa = ai[node, _A_SA]
                ns = ai[node, _A_NSAMP]
                if ns < m:
                    start = succ_start[sa]
                    n_succ = succ_len[sa]
                    buf = samples[node]
                    if buf.shape[0] < m:
                        size = buf.shape[0]
                        while size < m:
                            size *= 2
                        nb = np.empty(size, np.int32)
                        nb[:ns] = buf[:ns]
                        samples[node] = nb
                        buf = nb
                    bern = rew_bern[sa]
                    p_r = rew_param[sa]
                    rsum = af[node, _A_RSUM]
                    while ns < m:
                        if cap >= 0 and run[_TC] + run[_RC] + 2 > cap:
                            run[_STATUS] = _ABORT_BUDGET
                            raise RuntimeError("budget")
                        u = rng.random()
                        j = 0
                        while j < n_succ and succ_cum[start + j] <= u:
                            j += 1
                        if j > n_succ - 1:
                            j = n_succ - 1
                        if bern:
                            r = 1.0 if rng.random() < p_r else 0.0
                        else:
                            r = p_r
                        run[_TC] += 1
                        run[_RC] += 1
                        buf[ns] = j
                        ns += 1
                        rsum += r
                    ai[node, _A_NSAMP] = ns
                    af[node, _A_RSUM] = rsum
                # multiplicities of the first m samples, in first-appearance order
                n = ai[node, _A_COUNTED]
                if n != m:
                    buf = samples[node]
                    norder = ai[node, _A_NORDER]
                    while n < m:
                        j = buf[n]
                        c = counts[node, j]
                        if c == 0:
                            order[node, norder] = j
                            norder += 1
                        counts[node, j] = c + 1
                        n += 1
                    while n > m:
                        n -= 1
                        j = buf[n]
                        c = counts[node, j] - 1
                        counts[node, j] = c
                        if c == 0:
                            # a slot leaving the prefix entirely is always the latest to have entered it
                            norder -= 1
                    ai[node, _A_NORDER] = norder
                    ai[node, _A_COUNTED] = m
                f_p[sp] = 0
                f_acc[sp] = 0.0
            elif continuous:  # _AVG_CHILD
                f_acc[sp] += ret * 1 / m
                f_p[sp] += 1
                if f_p[sp] < m:
                    f_cur[sp] = mi[f_cur[sp], _M_NEXT]
                    sp += 1
                    f_max[sp] = True
                    f_node[sp] = f_cur[sp - 1]
                    f_m[sp] = 1
                    f_eps[sp] = eps / gamma
                    f_pc[sp] = _ENTER
                    continue
                value = af[node, _A_RSUM] / ai[node, _A_NSAMP] + gamma * f_acc[sp]
                ai[node, _A_LASTM] = m
                af[node, _A_LASTEPS] = eps
                af[node, _A_LASTVAL] = value
                ret = value
                sp -= 1
                continue
            else:  # _AVG_CHILD
                j = order[node, f_p[sp]]
                f_acc[sp] += ret * counts[node, j] / m
                f_p[sp] += 1
            p = f_p[sp]
            if p < ai[node, _A_NORDER]:
                j = order[node, p]
                ch = child[node, j]
                if ch < 0:
                    sa = ai[node, _A_SA]
                    state = succ_state[succ_start[sa] + j]
                    nact = n_actions[state]
                    while n_max >= mi.shape[0]:
                        mi = _grow(mi)
                        mf = _grow(mf)
                    while n_avg + nact > ai.shape[0]:
                        old = ai.shape[0]
                        ai = _grow(ai)
                        af = _grow(af)
                        counts = _grow(counts)
                        counts[old:] = 0
                        order = _grow(order)
                        child = _grow(child)
                        child[old:] = -1
                    ch = n_max
                    n_max += 1
                    d = ai[node, _A_DEPTH] + 1
                    mi[ch, _M_DEPTH] = d
                    mi[ch, _M_FIRST] = n_avg
                    mi[ch, _M_NACT] = nact
                    mi[ch, _M_LASTM] = -1
                    s0 = sa_offset[state]
                    for a in range(nact):
                        ai[n_avg, _A_SA] = s0 + a
                        ai[n_avg, _A_DEPTH] = d + 1
                        ai[n_avg, _A_NSAMP] = 0
                        ai[n_avg, _A_COUNTED] = 0
                        ai[n_avg, _A_NORDER] = 0
                        ai[n_avg, _A_LASTM] = -1
                        ai[n_avg, _A_K] = 0
                        af[n_avg, _A_RSUM] = 0.0
                        af[n_avg, _A_MU] = 0.0
                        af[n_avg, _A_LOGT] = 0.0
                        samples.append(np.empty(4, np.int32))
                        n_avg += 1
                    child[node, j] = ch
                f_pc[sp] = _AVG_CHILD
                sp += 1
                f_max[sp] = True
                f_node[sp] = ch
                f_m[sp] = counts[node, j]
                f_eps[sp] = eps / gamma
                f_pc[sp] = _ENTER
                continue
            value = af[node, _A_RSUM] / ai[node, _A_NSAMP] + gamma * f_acc[sp]
            ai[node, _A_LASTM] = m
            af[node, _A_LASTEPS] = eps
            af[node, _A_LASTVAL] = value
            ret = value
            sp -= 1
            continue

        # ---------------- MAX node ----------------
        if continuous and mi[node, _M_FIRST] < 0:
            while n_avg + 2 > ai.shape[0]:
                ai = _grow(ai)
                af = _grow(af)
            mi[node, _M_FIRST] = n_avg
            for a in range(2):
                ai[n_avg, _A_SA] = node
                ai[n_avg, _A_ACT] = a
                ai[n_avg, _A_DEPTH] = mi[node, _M_DEPTH] + 1
                ai[n_avg, _A_NSAMP] = 0
                ai[n_avg, _A_COUNTED] = -1
                ai[n_avg, _A_NORDER] = -1
                ai[n_avg, _A_LASTM] = -1
                ai[n_avg, _A_K] = 0
                af[n_avg, _A_RSUM] = 0.0
                af[n_avg, _A_MU] = 0.0
                af[n_avg, _A_LOGT] = 0.0
                n_avg += 1
        first = mi[node, _M_FIRST]
        nact = mi[node, _M_NACT]
        pool = f_pool[sp]
        U = f_U[sp]
        if pc == _ENTER:
            d = mi[node, _M_DEPTH]
            if d > run[_DEPTH]:
                run[_DEPTH] = d
                if d > guard:
                    run[_STATUS] = _ABORT_DEPTH
                    raise RuntimeError("depth guard")
            if mi[node, _M_LASTM] == m and mf[node, _M_LASTEPS] == eps:
                ret = mf[node, _M_LASTVAL]
                sp -= 1
                continue
            if nact == 1:
                f_pc[sp] = _MAX_FINAL
                sp += 1
                f_max[sp] = False
                f_node[sp] = first
                f_m[sp] = m
                f_eps[sp] = eps
                f_pc[sp] = _ENTER
                continue
            eta_val = gamma ** (1.0 / max(2.0, math.log(1.0 / eps)))
            coef = u_constant / (1.0 - gamma)
            if eta_factor:
                coef /= 1.0 - eta_val
                threshold = eps
            else:
                threshold = (1.0 - eta_val) * eps
            f_eta[sp] = eta_val
            f_coef[sp] = coef
            f_thr[sp] = threshold
            for i in range(nact):
                kk = ai[first + i, _A_K]
                U[i] = coef * math.sqrt(af[first + i, _A_LOGT] / kk) if kk else np.inf
                pool[i] = i
            f_npool[sp] = _filter(pool, nact, af, U, first)
        elif pc == _MAX_CHILD:
            af[first + f_p[sp], _A_MU] = ret
            f_npool[sp] = _filter(pool, f_npool[sp], af, U, first)
        elif pc == _MAX_FINAL:
            if sp == 0 and nact == 1:
                run[_SEL] = 0
            value = ret
            mi[node, _M_LASTM] = m
            mf[node, _M_LASTEPS] = eps
            mf[node, _M_LASTVAL] = value
            sp -= 1
            continue

        # elimination loop
        eta_val = f_eta[sp]
        coef = f_coef[sp]
        threshold = f_thr[sp]
        npool = f_npool[sp]
        pushed = False
        while npool > 1:
            worst = -np.inf
            for p in range(npool):
                if U[pool[p]] > worst:
                    worst = U[pool[p]]
            if not worst > threshold:
                break
            k0 = ai[first + pool[0], _A_K]
            if k0 > 0:
                t = run[_TC] + run[_RC]
                if t < 2:
                    t = 2
                lt = math.log(t / delta)
                same = True
                for p in range(npool):
                    c = first + pool[p]
                    if ai[c, _A_K] != k0 or af[c, _A_MU] != half or af[c, _A_LOGT] != lt:
                        same = False
                        break
                if same:
                    top = _free_rounds_top(k0, coef, lt, threshold, eta_val, eps, half)
                    if top > 0:
                        u = coef * math.sqrt(lt / top)
                        for p in range(npool):
                            ai[first + pool[p], _A_K] = top
                            U[pool[p]] = u
                        continue
            l = pool[0]
            for p in range(1, npool):
                if ai[first + pool[p], _A_K] < ai[first + l, _A_K]:
                    l = pool[p]
            c = first + l
            kc = ai[c, _A_K] + 1
            ai[c, _A_K] = kc
            t = run[_TC] + run[_RC]
            if t < 2:
                t = 2
            lt = math.log(t / delta)
            af[c, _A_LOGT] = lt
            U[l] = coef * math.sqrt(lt / kc)
            e = eta_val * max(U[l], eps)
            if e >= half:
                d = mi[node, _M_DEPTH] + 1
                if d > run[_DEPTH]:
                    run[_DEPTH] = d
                    if d > guard:
                        run[_STATUS] = _ABORT_DEPTH
                        raise RuntimeError("depth guard")
                af[c, _A_MU] = half
                npool = _filter(pool, npool, af, U, first)
            else:
                f_npool[sp] = npool
                f_p[sp] = l
                f_pc[sp] = _MAX_CHILD
                sp += 1
                f_max[sp] = False
                f_node[sp] = c
                f_m[sp] = kc
                f_eps[sp] = e
                f_pc[sp] = _ENTER
                pushed = True
                break
        if pushed:
            continue
        if npool == 1:
            if sp == 0:
                run[_SEL] = pool[0]
            f_pc[sp] = _MAX_FINAL
            sp += 1
            f_max[sp] = False
            f_node[sp] = first + pool[0]
            f_m[sp] = m
            f_eps[sp] = eps
            f_pc[sp] = _ENTER
            continue
        value = -np.inf
        for p in range(npool):
            v = af[first + pool[p], _A_MU]
            if v > value:
                value = v
                if sp == 0:
                    run[_SEL] = pool[p]
        mi[node, _M_LASTM] = m
        mf[node, _M_LASTEPS] = eps
        mf[node, _M_LASTVAL] = value
        ret = value
        sp -= 1
    return ret


def supports(model) -> bool:
    return isinstance(model, (TabularMdp, ContinuousToy))


_NO_TABLE = (np.array([2], np.int64), np.zeros(1, np.int64), np.zeros(1, np.int64), np.ones(1, np.int64),
             np.zeros(1, np.int64), np.ones(1, np.float64), np.zeros(1, np.bool_), np.zeros(1, np.float64))


def _toy_args(model):
    """Trailing ``_solve`` arguments: continuous flag, gap profile and root coordinate."""
    if not isinstance(model, ContinuousToy):
        return (False, _GAP_BOUNDED, 0.0, 0.0, 1.0, 0.0)
    g = model.profile
    kind = _GAP_BOUNDED if g.kind == "bounded_gap" else _GAP_POWER
    return (True, kind, float(g.dmin), float(g.b), float(g.c), float(model.root.state.x))


def _model_arrays(mdp: TabularMdp):
    cached = getattr(mdp, "_compiled_arrays", None)
    if cached is not None:
        return cached
    n_actions = np.array(mdp.actions_per_state, dtype=np.int64)
    sa_offset = np.concatenate([[0], np.cumsum(n_actions)[:-1]]).astype(np.int64)
    starts, lens, succ, cum, bern, param = [], [], [], [], [], []
    for row in mdp.outcomes:
        for out in row:
            starts.append(len(succ))
            lens.append(len(out.next_states))
            succ.extend(out.next_states)
            cum.extend(out.cumulative)
            bern.append(out.reward.kind == "bernoulli")
            param.append(out.reward.param)
    arrays = (
        n_actions, sa_offset, np.array(starts, np.int64), np.array(lens, np.int64),
        np.array(succ, np.int64), np.array(cum, np.float64), np.array(bern, np.bool_),
        np.array(param, np.float64),
    )
    object.__setattr__(mdp, "_compiled_arrays", arrays)
    return arrays


def plan(mdp: TabularMdp | ContinuousToy, config, rng: np.random.Generator, seed):
    from .planner import BudgetExceeded, DepthGuardError, PlanResult, RunCounter, depth_bound

    guard = depth_bound(config.root_eps, config.gamma, mdp.root.kind)
    run = np.zeros(7, np.int64)
    run[_SEL] = -1
    run[_GUARD] = guard
    run[_CAP] = -1 if config.call_cap is None else int(config.call_cap)
    root = mdp.root
    start = time.perf_counter()
    try:
        tables = _model_arrays(mdp) if isinstance(mdp, TabularMdp) else _NO_TABLE
        estimate = _solve(*tables, float(config.gamma), float(config.delta),
                          float(config.u_constant), bool(config.u_eta_factor), run, rng,
                          root.kind == "max", int(root.state) if isinstance(mdp, TabularMdp) else 0,
                          -1 if root.action is None else int(root.action),
                          int(config.m), float(config.root_eps), 1024, *_toy_args(mdp))
    except RuntimeError:
        if run[_STATUS] == _ABORT_BUDGET:
            counter = RunCounter(config.call_cap)
            counter.transition_calls = int(run[_TC])
            counter.reward_calls = int(run[_RC])
            raise BudgetExceeded(config.call_cap, counter, int(run[_DEPTH])) from None
        if run[_STATUS] == _ABORT_DEPTH:
            raise DepthGuardError(f"node at depth {run[_DEPTH]} called; bound is {guard}") from None
        raise
    wall = time.perf_counter() - start
    tc, rc = int(run[_TC]), int(run[_RC])
    selected = int(run[_SEL]) if root.kind == "max" else None
    return PlanResult(float(estimate), tc + rc, tc, rc, int(run[_DEPTH]), guard, wall, seed, selected)

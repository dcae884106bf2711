import math

import numpy as np
import pytest

from trailblazer import (BudgetExceeded, ContractError, MdpFormatError, PlannerConfig, Root, confidence_radius, eta,
                         exact_value, make_continuous_toy, make_random_mdp, bounded_gap, max_depth, plan,
                         sample_budget)
from trailblazer.instances import chain, gap_mdp, self_loop, stochastic_chain, two_action_mix
from trailblazer.mdp import finite_horizon_values
from trailblazer.planner import AvgNode, MaxNode, _Run, depth_bound


def _run(model, eps=0.5, gamma=None, delta=0.1):
    cfg = PlannerConfig(gamma or model.gamma, delta, eps)
    return _Run(model, cfg, np.random.default_rng(0), depth_bound(cfg.root_eps, cfg.gamma, "avg"))


def test_sample_budget_example():
    assert sample_budget(0.5, 0.1, 0.5) == 37
    assert PlannerConfig(0.5, 0.1, 0.5).m == 37


@pytest.mark.parametrize("gamma,eps,expected", [(0.81, 0.5, 0.9), (0.9, 0.1, 0.9 ** (1 / math.log(10)))])
def test_eta_examples(gamma, eps, expected):
    assert eta(eps, gamma) == pytest.approx(expected, rel=1e-12)


def test_eta_value_spot():
    assert eta(0.1, 0.9) == pytest.approx(0.95527, abs=1e-5)


@pytest.mark.parametrize("gamma", [0.1, 0.5, 0.9, 0.99])
@pytest.mark.parametrize("eps", [0.01, 0.1, 0.5, 1.0, 5.0])
def test_eta_range(gamma, eps):
    assert gamma < eta(eps, gamma) < 1.0
    if math.log(1 / eps) <= 2:
        assert eta(eps, gamma) == pytest.approx(math.sqrt(gamma))


def test_max_depth_example():
    assert max_depth(0.1, 0.9) == 158


@pytest.mark.parametrize("gamma", [0.05, 0.3, 0.5, 0.7, 0.9, 0.95])
@pytest.mark.parametrize("eps", [1e-3, 0.01, 0.1, 0.5, 1.0, 3.0, 100.0])
def test_max_depth_even_and_at_least_four(gamma, eps):
    h = max_depth(eps, gamma)
    assert h % 2 == 0 and h >= 4


def test_confidence_radius_spot_value():
    cfg = PlannerConfig(0.5, 0.1, 1.0)
    u = confidence_radius(16, 1000, cfg, math.sqrt(0.5))
    coef = 4.0 / ((1.0 - math.sqrt(0.5)) * 0.5)
    assert coef == pytest.approx(27.3137, abs=1e-4)
    # 27.3137 * 0.75871; a hand-rounded 20.728 is off in the fourth digit
    assert u == pytest.approx(coef * math.sqrt(math.log(1e4) / 16), rel=1e-12)
    assert u == pytest.approx(20.7233, abs=1e-4)


def test_confidence_radius_scaling():
    cfg = PlannerConfig(0.5, 0.1, 1.0)
    n = eta(0.3, 0.5)
    assert confidence_radius(64, 500, cfg, n) == pytest.approx(confidence_radius(16, 500, cfg, n) / 2)
    assert confidence_radius(0, 500, cfg, n) == math.inf
    assert confidence_radius(16, 600, cfg, n) > confidence_radius(16, 500, cfg, n)


def test_radius_without_eta_factor():
    a = PlannerConfig(0.5, 0.1, 1.0)
    b = PlannerConfig(0.5, 0.1, 1.0, u_eta_factor=False)
    n = 0.8
    assert confidence_radius(9, 100, b, n) == pytest.approx(confidence_radius(9, 100, a, n) * (1 - n))


@pytest.mark.parametrize("kwargs", [dict(gamma=1.0), dict(gamma=0.0), dict(delta=0.0), dict(delta=1.0),
                                    dict(epsilon=0.0), dict(epsilon=-1.0)])
def test_config_validation(kwargs):
    args = dict(gamma=0.5, delta=0.1, epsilon=0.5) | kwargs
    with pytest.raises(ContractError):
        PlannerConfig(**args)


def test_config_gamma_must_match_model():
    with pytest.raises(ContractError):
        plan(gap_mdp(gamma=0.5), PlannerConfig(0.6, 0.1, 0.5), 0)


@pytest.mark.parametrize("engine", ["python", "compiled"])
@pytest.mark.parametrize("gamma,eps", [(0.5, 1.0), (0.5, 7.0), (0.9, 6.0)])
def test_avg_root_early_exit(engine, gamma, eps):
    mdp = self_loop(0.3, gamma=gamma, root_kind="avg")
    r = plan(mdp, PlannerConfig(gamma, 0.1, 2 * eps), 3, engine=engine)
    assert r.estimate == 0.5 / (1 - gamma)
    assert r.oracle_calls == 0
    assert r.max_depth_reached == 0


def test_avg_call_boundary_no_sampling():
    mdp = self_loop(1.0, root_kind="avg")
    run = _run(mdp)
    node = AvgNode(0, 0, 0)
    assert node.call(7, run.half, run) == run.half
    assert node.reward_count == 0 and run.counter.oracle_calls == 0


def test_avg_call_deterministic_child():
    mdp = chain(20, reward=1.0)
    run = _run(mdp)
    node = AvgNode(0, 0, 0)
    out = node.call(5, 0.2, run)
    assert node.active_counts(5) == {1: 5}
    nu = node.children[1]._last[2]
    assert out == pytest.approx(1.0 + 0.5 * nu)


def test_avg_call_zero_tree():
    mdp = self_loop(0.0, root_kind="avg")
    run = _run(mdp)
    # leaves exit at the midpoint, so the output is gamma^j * half rather than 0, and stays within eps of 0
    for m, eps in [(1, 0.01), (10, 0.3), (3, 0.99)]:
        out = AvgNode(0, 0, 0).call(m, eps, run)
        j = math.ceil(math.log(run.half / eps, 1 / 0.5))
        assert out == 0.5 ** j * run.half
        assert 0.0 <= out <= eps


def test_avg_persistence_and_active_prefix():
    mdp = stochastic_chain()
    run = _run(mdp, gamma=0.9)
    node = AvgNode(0, 0, 0)
    node.call(12, 4.0, run)
    first = list(node.sampled)
    assert len(first) == 12
    node.call(5, 4.0, run)
    assert node.sampled == first
    assert sum(node.active_counts(5).values()) == 5
    node.call(20, 4.0, run)
    assert node.sampled[:12] == first and len(node.sampled) == 20
    assert node.reward_count == len(node.sampled)
    assert 0.0 <= node.reward_sum / node.reward_count <= 1.0
    assert sum(node.active_counts(20).values()) == 20


def test_active_counts_first_appearance_order():
    node = AvgNode(0, 0, 0)
    node.sampled = [3, 1, 3, 2, 1, 1]
    assert list(node.active_counts(4).items()) == [(3, 2), (1, 1), (2, 1)]
    assert list(node.active_counts(2).items()) == [(3, 1), (1, 1)]
    assert list(node.active_counts(6).items()) == [(3, 2), (1, 3), (2, 1)]


def test_max_call_single_child_pass_through():
    mdp = stochastic_chain()
    run_a, run_b = _run(mdp, gamma=0.9), _run(mdp, gamma=0.9)
    via_max = MaxNode(0, 0, 1).call(30, 2.0, run_a)
    direct = AvgNode(0, 0, 1).call(30, 2.0, run_b)
    assert via_max == direct
    assert run_a.counter.oracle_calls == run_b.counter.oracle_calls


def test_max_k_monotone_and_mu_range():
    mdp = two_action_mix()
    run = _run(mdp, eps=1.0)
    node = MaxNode(0, 0, 2)
    history = []
    for eps in (1.5, 1.0, 0.8):
        node.call(10, eps, run)
        history.append(list(node.k))
        for k, mu in zip(node.k, node.mu):
            if k:
                assert 0.0 <= mu <= 1 / (1 - 0.5)
    for a, b in zip(history, history[1:]):
        assert all(x <= y for x, y in zip(a, b))


def test_monotone_elimination(monkeypatch):
    seen = []
    original = MaxNode.candidates

    def spy(pool, mu, U):
        out = original(pool, mu, U)
        assert set(out) <= set(pool)
        seen.append((list(pool), out))
        return out

    monkeypatch.setattr(MaxNode, "candidates", staticmethod(spy))
    r = plan(two_action_mix(), PlannerConfig(0.5, 0.1, 1.5), 0, engine="python")
    assert seen and r.selected_action == 0


def test_self_loop_pac():
    mdp = self_loop(1.0, gamma=0.5)
    cfg = PlannerConfig(0.5, 0.1, 0.2)
    hits = sum(abs(plan(mdp, cfg, s).estimate - 2.0) <= 0.2 for s in range(200))
    assert hits >= 180


def test_gap_max_call_estimate():
    # max_call with eps=0.05 at the root is plan with epsilon=0.1
    mdp = gap_mdp()
    cfg = PlannerConfig(0.5, 0.1, 0.1)
    truth = exact_value(mdp, 60).lower
    runs = [plan(mdp, cfg, s) for s in range(10)]
    # surviving radii are at most eps when elimination stops
    hits = sum(abs(r.estimate - truth) <= 0.05 + 0.05 for r in runs)
    assert hits >= 10
    assert all(r.selected_action == 0 for r in runs)


def test_elimination_soundness():
    mdp = two_action_mix()
    _, Q = finite_horizon_values(mdp, 80)
    best = int(np.argmax(Q[0]))
    cfg = PlannerConfig(0.5, 0.1, 1.0)
    right = sum(plan(mdp, cfg, s).selected_action == best for s in range(200))
    assert right >= 180


@pytest.mark.parametrize("seed", range(6))
def test_estimate_range_and_depth(seed):
    mdp = make_random_mdp(seed, 5, 2, 2, reward_sparsity=0.2)
    cfg = PlannerConfig(0.5, 0.1, 2.0)
    r = plan(mdp, cfg, seed, engine="python")
    assert 0.0 <= r.estimate <= 2.0
    assert r.max_depth_reached <= max_depth(cfg.root_eps, 0.5)


def test_determinism_bit_for_bit():
    mdp = make_random_mdp(4, 6, 3, 2)
    cfg = PlannerConfig(0.5, 0.2, 1.2)
    a, b = plan(mdp, cfg, 99), plan(mdp, cfg, 99)
    assert a.same_outcome(b)
    assert a.estimate.hex() == b.estimate.hex()


def test_generator_and_seed_agree():
    mdp = make_random_mdp(4, 6, 2, 2)
    cfg = PlannerConfig(0.5, 0.2, 1.2)
    a = plan(mdp, cfg, 5)
    b = plan(mdp, cfg, np.random.default_rng(5))
    assert a.estimate == b.estimate and a.oracle_calls == b.oracle_calls


def test_counts_split_evenly():
    r = plan(make_random_mdp(1, 4, 2, 2), PlannerConfig(0.5, 0.1, 1.5), 0)
    assert r.transition_calls == r.reward_calls
    assert r.oracle_calls == r.transition_calls + r.reward_calls


@pytest.mark.parametrize("engine", ["python", "compiled"])
def test_call_cap(engine):
    mdp = two_action_mix()
    with pytest.raises(BudgetExceeded) as info:
        plan(mdp, PlannerConfig(0.5, 0.1, 1.0, call_cap=1000), 0, engine=engine)
    assert info.value.counter.oracle_calls <= 1000


class _Wrapped:
    """A generative model the compiled engine does not know."""

    def __init__(self, inner):
        self.inner, self.gamma, self.root = inner, inner.gamma, inner.root

    def action_count(self, state):
        return self.inner.action_count(state)

    def sample(self, state, action, rng):
        return self.inner.sample(state, action, rng)


def test_compiled_engine_rejects_unknown_models():
    model = _Wrapped(two_action_mix())
    with pytest.raises(ContractError):
        plan(model, PlannerConfig(0.5, 0.1, 1.5), 0, engine="compiled")
    a = plan(model, PlannerConfig(0.5, 0.1, 1.5), 0)
    assert a.same_outcome(plan(two_action_mix(), PlannerConfig(0.5, 0.1, 1.5), 0))


def test_toy_runs_in_both_engines():
    toy = make_continuous_toy(0, bounded_gap(0.3))
    r = plan(toy, PlannerConfig(0.5, 0.1, 3.0), 0, engine="python")
    assert r.same_outcome(plan(toy, PlannerConfig(0.5, 0.1, 3.0), 0, engine="compiled"))
    assert abs(r.estimate - toy.root_value()) <= 3.0
    assert r.max_depth_reached <= max_depth(1.5, 0.5)


def test_plan_record_fields():
    r = plan(gap_mdp(), PlannerConfig(0.5, 0.1, 2.0), 7)
    rec = r.to_record()
    assert set(rec) == {"estimate", "oracle_calls", "transition_calls", "reward_calls",
                        "max_depth_reached", "wall_time_ms", "seed"}
    assert rec["seed"] == 7


def test_invalid_root_action():
    with pytest.raises(MdpFormatError):
        gap_mdp().with_root(Root("avg", 1, 1))

import pytest

from trailblazer import (BudgetExceeded, ContinuousToy, PlannerConfig, Root, bounded_gap, make_continuous_toy,
                         make_random_mdp, plan)
from trailblazer.mdp import power_law
from trailblazer.instances import gap_mdp, stochastic_chain, three_action_mix, two_action_mix


def _both(mdp, cfg, seed):
    return plan(mdp, cfg, seed, engine="python"), plan(mdp, cfg, seed, engine="compiled")


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("shape,eps", [((4, 2, 2), 2.0), ((3, 3, 3), 2.5), ((5, 1, 2), 0.8), ((6, 2, 1), 1.5)])
def test_engines_agree_on_random_mdps(seed, shape, eps):
    S, K, N = shape
    mdp = make_random_mdp(seed, S, K, N, reward_sparsity=0.3)
    a, b = _both(mdp, PlannerConfig(0.5, 0.1, eps), seed)
    assert a.same_outcome(b)


@pytest.mark.parametrize("gamma,eps", [(0.3, 1.0), (0.6, 2.0), (0.7, 3.0)])
def test_engines_agree_across_discounts(gamma, eps):
    mdp = make_random_mdp(3, 4, 2, 2, gamma=gamma)
    a, b = _both(mdp, PlannerConfig(gamma, 0.1, eps), 1)
    assert a.same_outcome(b)


@pytest.mark.parametrize("model,eps", [(two_action_mix(), 1.5), (three_action_mix(), 2.0),
                                       (stochastic_chain(), 1.5), (gap_mdp(), 1.0)])
def test_engines_agree_on_fixed_instances(model, eps):
    a, b = _both(model, PlannerConfig(model.gamma, 0.1, eps), 11)
    assert a.same_outcome(b)


@pytest.mark.parametrize("seed", range(3))
def test_engines_agree_under_elimination(seed):
    for model, eps in [(two_action_mix(), 1.0), (three_action_mix(), 1.2)]:
        a, b = _both(model, PlannerConfig(model.gamma, 0.1, eps), seed)
        assert a.same_outcome(b)


def test_engines_agree_with_avg_root():
    mdp = make_random_mdp(2, 4, 2, 2).with_root(Root("avg", 0, 1))
    a, b = _both(mdp, PlannerConfig(0.5, 0.1, 1.0), 4)
    assert a.same_outcome(b)


def test_engines_agree_without_eta_factor():
    mdp = make_random_mdp(6, 4, 2, 2)
    cfg = PlannerConfig(0.5, 0.1, 3.0, u_constant=1.0, u_eta_factor=False)
    a, b = _both(mdp, cfg, 2)
    assert a.same_outcome(b)


def test_engines_agree_on_cap():
    mdp = two_action_mix()
    cfg = PlannerConfig(0.5, 0.1, 1.0, call_cap=5000)
    out = []
    for engine in ("python", "compiled"):
        with pytest.raises(BudgetExceeded) as info:
            plan(mdp, cfg, 0, engine=engine)
        out.append(info.value.counter.oracle_calls)
    assert out[0] == out[1]


@pytest.mark.parametrize("profile", [bounded_gap(0.3), power_law(1.0, 0.5)])
def test_engines_agree_on_continuous_toy(profile):
    toy = make_continuous_toy(2, profile, gamma=0.1)
    a, b = _both(toy, PlannerConfig(0.1, 0.1, 0.8, u_constant=1.0), 0)
    assert a.oracle_calls > 0
    assert a.same_outcome(b)


def test_engines_agree_on_continuous_toy_avg_root():
    toy = make_continuous_toy(3, bounded_gap(0.5), gamma=0.1)
    toy = ContinuousToy(toy.profile, toy.gamma, Root("avg", toy.root.state, 1))
    a, b = _both(toy, PlannerConfig(0.1, 0.1, 0.5, u_constant=1.0), 5)
    assert a.oracle_calls > 0
    assert a.same_outcome(b)


@pytest.mark.parametrize("seed", range(2))
def test_engines_agree_on_capped_toy(seed):
    toy = make_continuous_toy(0, bounded_gap(0.3))
    cfg = PlannerConfig(0.5, 0.2, 0.3, call_cap=10_000)
    out = []
    for engine in ("python", "compiled"):
        with pytest.raises(BudgetExceeded) as info:
            plan(toy, cfg, seed, engine=engine)
        out.append((info.value.counter.oracle_calls, info.value.max_depth))
    assert out[0] == out[1]

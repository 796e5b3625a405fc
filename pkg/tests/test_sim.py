import math

import numpy as np
import pytest

from chandisc.errors import ExcessiveCensoringError
from chandisc.optimize import OptimizerConfig
from chandisc.quantum import bernoulli_replacer, depolarizing_channel
from chandisc.sim import (
    EXPECTATION,
    PROBABILISTIC,
    SimulationPlan,
    check_constraint,
    run_trials,
    sweep_budgets,
    trial_rng,
)
from chandisc.strategies import StrategyTrace, build_sprt, step_sprt

CFG = OptimizerConfig(restarts=2, max_iters=60)


@pytest.fixture(scope="module")
def classical_strategy():
    return build_sprt(bernoulli_replacer(0.2), bernoulli_replacer(0.8), n=100, tau=0.08, cfg=CFG)


def test_determinism(classical_strategy):
    plan = SimulationPlan(strategy=classical_strategy, trials=300, base_seed=5)
    assert run_trials(plan) == run_trials(plan)


def test_seed_changes_results(classical_strategy):
    p1 = SimulationPlan(strategy=classical_strategy, trials=300, base_seed=5)
    p2 = SimulationPlan(strategy=classical_strategy, trials=300, base_seed=6)
    assert run_trials(p1) != run_trials(p2)


def test_batch_engine_matches_single_step(classical_strategy):
    """The vectorized engine must consume uniforms exactly like step_sprt."""
    strat = classical_strategy
    plan = SimulationPlan(strategy=strat, trials=100, base_seed=21)
    from chandisc.sim import _simulate_hypothesis

    for hyp, ch in ((0, strat.n0), (1, strat.n1)):
        t_stop, decision = _simulate_hypothesis(plan, hyp)
        for t in range(plan.trials):
            rng = trial_rng(plan.base_seed, hyp, t)
            trace = StrategyTrace()
            while not trace.stopped and len(trace.steps) < 20 * strat.n:
                step_sprt(strat, ch, trace, rng)
            assert trace.stopping_time == t_stop[t]
            assert trace.decision == decision[t]


def test_wald_bounds_hold(classical_strategy):
    plan = SimulationPlan(strategy=classical_strategy, trials=2000, base_seed=1)
    s = run_trials(plan)
    assert s.alpha_hat <= math.exp(-s.threshold_a) + 3 * s.alpha_se
    assert s.beta_hat <= math.exp(-s.threshold_b) + 3 * s.beta_se


def test_stop_times_below_budget(classical_strategy):
    plan = SimulationPlan(strategy=classical_strategy, trials=1000, base_seed=2)
    s = run_trials(plan)
    for stats in s.per_hyp:
        assert stats.mean_stop < s.budget
    rep = check_constraint(s, plan)
    assert rep.constraint == EXPECTATION
    assert rep.passed


def test_probabilistic_constraint_report(classical_strategy):
    plan = SimulationPlan(
        strategy=classical_strategy, trials=500, base_seed=3, constraint=PROBABILISTIC, epsilon=0.5
    )
    s = run_trials(plan)
    rep = check_constraint(s, plan)
    assert rep.constraint == PROBABILISTIC
    assert rep.passed  # overshoot is far below 0.5 for this pair
    assert all(m > 0 for m in rep.margins)


def test_exponent_estimates(classical_strategy):
    plan = SimulationPlan(strategy=classical_strategy, trials=200, base_seed=4)
    s = run_trials(plan)
    if s.per_hyp[0].errors == 0:
        assert math.isinf(s.empirical_exponent(0, corrected=False))
        expect = -math.log(1.0 / (2 * 200)) / s.budget
        assert s.empirical_exponent(0) == pytest.approx(expect)


def test_censoring_triggers_guard(classical_strategy):
    # generous cap: no censoring
    plan = SimulationPlan(strategy=classical_strategy, trials=200, base_seed=9)
    assert run_trials(plan).censored_count == 0
    # cap at n steps: roughly a fifth of the traces for this pair are still
    # running at n, so the 5% censoring guard must trip
    plan_capped = SimulationPlan(
        strategy=classical_strategy, trials=200, base_seed=9, step_cap_factor=1
    )
    with pytest.raises(ExcessiveCensoringError):
        run_trials(plan_capped)


def test_sweep_budgets(classical_strategy):
    recs = sweep_budgets(classical_strategy, [50, 100, 200], trials=300, base_seed=8)
    assert [r.n for r in recs] == [50, 100, 200]
    for r in recs:
        assert r.bound_exponent_alpha == pytest.approx(r.summary.threshold_a / r.summary.budget)
        assert r.summary.budget == r.n
    # overshoot probability shrinks with n
    over = [r.summary.per_hyp[0].overshoot for r in recs]
    assert over[0] >= over[-1]


def test_sweep_requires_ascending(classical_strategy):
    with pytest.raises(ValueError):
        sweep_budgets(classical_strategy, [200, 100], trials=10, base_seed=0)


def test_trial_rng_streams_independent():
    a = trial_rng(0, 0, 0).random(4)
    b = trial_rng(0, 0, 1).random(4)
    c = trial_rng(0, 1, 0).random(4)
    assert not np.allclose(a, b)
    assert not np.allclose(a, c)
    assert np.allclose(a, trial_rng(0, 0, 0).random(4))


def test_block_strategy_stop_times_in_uses():
    from chandisc.strategies import lift_to_blocks

    strat = lift_to_blocks(
        bernoulli_replacer(0.2), bernoulli_replacer(0.8), l=2, n=100, tau=0.08, cfg=CFG
    )
    plan = SimulationPlan(strategy=strat, trials=200, base_seed=12)
    s = run_trials(plan)
    assert s.budget == 100
    assert s.alpha_hat == 0.0 and s.beta_hat == 0.0
    # stopping times are counted in channel uses: with pairs of uses per
    # block step, the mean over any trial set has at most .5 fractional part
    from chandisc.sim import _simulate_hypothesis

    t_steps, _ = _simulate_hypothesis(plan, 0)
    assert np.all((t_steps * strat.block_size) % 2 == 0)

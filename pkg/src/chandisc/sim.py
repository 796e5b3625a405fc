"""Seeded Monte-Carlo harness for discrimination strategies.

Each trace owns an independent RNG stream keyed by (base seed, hypothesis,
trial index), so summaries are bit-identical for a fixed seed regardless of
execution order or batching.  The batch engine consumes uniforms in exactly
the same order as strategies.step_sprt: one coin for the first arm of an
adaptive strategy, then one uniform per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ExcessiveCensoringError, ZeroProbabilityOutcomeError
from .strategies import CENSORED, DECISION_H0, DECISION_H1

EXPECTATION = "expectation"
PROBABILISTIC = "probabilistic"

CENSOR_FRACTION_LIMIT = 0.05


@dataclass
class SimulationPlan:
    strategy: object
    trials: int
    base_seed: int
    constraint: str = EXPECTATION
    epsilon: float = 0.05
    step_cap_factor: int = 20

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.constraint == PROBABILISTIC and not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be in (0, 1)")

    @property
    def budget(self) -> int:
        return self.strategy.n * self.strategy.block_size


@dataclass
class HypothesisStats:
    """Per-hypothesis tallies; stop times counted in channel uses."""

    trials: int
    errors: int  # wrong decisions, censored trials included
    censored: int
    mean_stop: float
    stop_se: float
    overshoot: float  # fraction with T > n
    overshoot_se: float

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def error_se(self) -> float:
        p = self.error_rate
        return math.sqrt(p * (1.0 - p) / self.trials)


@dataclass
class SimulationSummary:
    budget: int
    per_hyp: list[HypothesisStats]
    threshold_a: float
    threshold_b: float

    @property
    def alpha_hat(self) -> float:
        return self.per_hyp[0].error_rate

    @property
    def beta_hat(self) -> float:
        return self.per_hyp[1].error_rate

    @property
    def alpha_se(self) -> float:
        return self.per_hyp[0].error_se

    @property
    def beta_se(self) -> float:
        return self.per_hyp[1].error_se

    def empirical_exponent(self, hyp: int, corrected: bool = True) -> float:
        """-(1/n) log of the error estimate.

        With zero observed errors the raw exponent is +inf; the corrected
        variant substitutes 1/(2 trials) to keep tables finite.
        """
        stats = self.per_hyp[hyp]
        if stats.errors == 0:
            if not corrected:
                return math.inf
            est = 1.0 / (2.0 * stats.trials)
        else:
            est = stats.error_rate
        return -math.log(est) / self.budget

    @property
    def censored_count(self) -> int:
        return sum(s.censored for s in self.per_hyp)


@dataclass
class ConstraintReport:
    constraint: str
    passed: bool
    margins: list[float]  # per hypothesis; positive = satisfied
    detail: str


@dataclass
class SweepRecord:
    n: int
    summary: SimulationSummary
    report: ConstraintReport
    exponent_alpha: float
    exponent_beta: float
    bound_exponent_alpha: float  # A_n / n
    bound_exponent_beta: float  # B_n / n


def trial_rng(base_seed: int, hypothesis: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=base_seed, spawn_key=(hypothesis, trial))
    )


def _simulate_hypothesis(plan: SimulationPlan, hyp: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized simulation of all trials under hypothesis hyp.

    Returns (stop times in steps, decisions)."""
    strategy = plan.strategy
    tables = strategy.tables
    trials = plan.trials
    cap = plan.step_cap_factor * strategy.n
    adaptive = strategy.adaptive
    incs = tables.increments
    cdfs = tables.cdfs[:, hyp, :]
    if not np.all(np.isfinite(incs[tables.dists[:, hyp, :] > 0])):
        raise ZeroProbabilityOutcomeError(
            "an outcome with zero probability under one hypothesis is reachable"
        )

    gens = [trial_rng(plan.base_seed, hyp, t) for t in range(trials)]
    s = np.zeros(trials)
    t_stop = np.full(trials, cap, dtype=np.int64)
    decision = np.full(trials, CENSORED, dtype=np.int64)
    active = np.arange(trials)

    if adaptive:
        coin = np.array([g.random() for g in gens])
        first_arm = np.where(coin < 0.5, 0, 1)
    else:
        first_arm = np.zeros(trials, dtype=np.int64)
    arm = first_arm.copy()

    chunk = 256
    step = 0
    while active.size and step < cap:
        width = min(chunk, cap - step)
        u = np.empty((active.size, width))
        for row, t in enumerate(active):
            u[row] = gens[t].random(width)
        s_act = s[active]
        arm_act = arm[active]
        done = np.zeros(active.size, dtype=bool)
        for j in range(width):
            live = ~done
            if not live.any():
                break
            if step + j > 0 and adaptive:
                arm_act[live] = np.where(s_act[live] >= 0, 0, 1)
            for a in range(cdfs.shape[0]):
                sel = live & (arm_act == a)
                if not sel.any():
                    continue
                y = np.searchsorted(cdfs[a], u[sel, j], side="right")
                s_act[sel] += incs[a, y]
            hit_b = live & (s_act >= strategy.threshold_b)
            hit_a = live & (s_act <= -strategy.threshold_a)
            newly = hit_b | hit_a
            if newly.any():
                idx = active[newly]
                t_stop[idx] = step + j + 1
                decision[idx] = np.where(hit_b[newly], DECISION_H0, DECISION_H1)
                done |= newly
        s[active] = s_act
        arm[active] = arm_act
        active = active[~done]
        step += width
    return t_stop, decision


def run_trials(plan: SimulationPlan) -> SimulationSummary:
    """Estimate error probabilities, stopping times and overshoot under both
    hypotheses.  Deterministic for a fixed base seed."""
    strategy = plan.strategy
    l = strategy.block_size
    n_uses = plan.budget
    per_hyp = []
    for hyp in (0, 1):
        t_steps, decision = _simulate_hypothesis(plan, hyp)
        t_uses = t_steps * l
        wrong = DECISION_H1 if hyp == 0 else DECISION_H0
        errors = int(np.sum(decision == wrong) + np.sum(decision == CENSORED))
        censored = int(np.sum(decision == CENSORED))
        over = float(np.mean(t_uses > n_uses))
        per_hyp.append(
            HypothesisStats(
                trials=plan.trials,
                errors=errors,
                censored=censored,
                mean_stop=float(np.mean(t_uses)),
                stop_se=float(np.std(t_uses) / math.sqrt(plan.trials)),
                overshoot=over,
                overshoot_se=math.sqrt(over * (1.0 - over) / plan.trials),
            )
        )
    summary = SimulationSummary(
        budget=n_uses,
        per_hyp=per_hyp,
        threshold_a=strategy.threshold_a,
        threshold_b=strategy.threshold_b,
    )
    frac = summary.censored_count / (2 * plan.trials)
    if frac > CENSOR_FRACTION_LIMIT:
        raise ExcessiveCensoringError(f"censored fraction {frac:.3f} exceeds 5%")
    return summary


def check_constraint(summary: SimulationSummary, plan: SimulationPlan) -> ConstraintReport:
    """Expectation: max mean stop time <= n + 3 SE.  Probabilistic:
    max P(T > n) + 3 SE < epsilon."""
    n = summary.budget
    if plan.constraint == EXPECTATION:
        margins = [n + 3 * s.stop_se - s.mean_stop for s in summary.per_hyp]
        passed = all(m >= 0 for m in margins)
        detail = "mean stop times " + ", ".join(
            f"{s.mean_stop:.2f}" for s in summary.per_hyp
        ) + f" vs budget {n}"
    elif plan.constraint == PROBABILISTIC:
        margins = [
            plan.epsilon - (s.overshoot + 3 * s.overshoot_se) for s in summary.per_hyp
        ]
        passed = all(m > 0 for m in margins)
        detail = "overshoot probabilities " + ", ".join(
            f"{s.overshoot:.4f}" for s in summary.per_hyp
        ) + f" vs epsilon {plan.epsilon}"
    else:
        raise ValueError(f"unknown constraint {plan.constraint!r}")
    return ConstraintReport(
        constraint=plan.constraint, passed=passed, margins=margins, detail=detail
    )


def sweep_budgets(
    strategy,
    budgets: list[int],
    trials: int,
    base_seed: int,
    constraint: str = EXPECTATION,
    epsilon: float = 0.05,
) -> list[SweepRecord]:
    """Re-run the same arms at a list of budgets for convergence curves.

    Arms and rates are reused; only the thresholds scale with n.
    """
    if list(budgets) != sorted(budgets):
        raise ValueError("budgets must be ascending")
    records = []
    for n in budgets:
        strat_n = strategy.with_budget(max(1, n // strategy.block_size))
        plan = SimulationPlan(
            strategy=strat_n,
            trials=trials,
            base_seed=base_seed,
            constraint=constraint,
            epsilon=epsilon,
        )
        summary = run_trials(plan)
        report = check_constraint(summary, plan)
        records.append(
            SweepRecord(
                n=n,
                summary=summary,
                report=report,
                exponent_alpha=summary.empirical_exponent(0),
                exponent_beta=summary.empirical_exponent(1),
                bound_exponent_alpha=strat_n.threshold_a / summary.budget,
                bound_exponent_beta=strat_n.threshold_b / summary.budget,
            )
        )
    return records

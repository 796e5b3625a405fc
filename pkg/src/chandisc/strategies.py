"""Executable discrimination strategies.

The adaptive SPRT uses two arms, each an (input state, PVM) pair witnessing
one direction of the measured channel divergence.  The accumulated sum of
per-step log-likelihood increments drives both the arm choice (sign rule,
ties to arm zero) and the stopping rule (first exit from (-A_n, B_n)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .divergences import channel_divergence
from .errors import (
    DimensionOverflowError,
    InfiniteDivergenceError,
    SupportMismatchError,
    TauTooLargeError,
    ZeroProbabilityOutcomeError,
)
from .optimize import OptimizerConfig, kl_divergence
from .quantum import (
    DensityMatrix,
    Povm,
    QuantumChannel,
    outcome_distribution,
    tensor_power_channel,
    validate_channel_pair,
)

DECISION_H0 = 0
DECISION_H1 = 1
CENSORED = 2


@dataclass
class Arm:
    """An input state and a measurement, fixed for as long as the arm is
    played."""

    input_state: DensityMatrix
    povm: Povm
    ancilla_dim: int


@dataclass
class StrategyTables:
    """Precomputed outcome distributions and increments for fast stepping.

    dists[arm][hyp] is the outcome distribution when the true channel is
    N_hyp; increments[arm][y] = log p0(y) - log p1(y) for that arm, where
    p_i is the distribution induced by N_i.
    """

    dists: np.ndarray  # (n_arms, 2, n_outcomes)
    cdfs: np.ndarray  # (n_arms, 2, n_outcomes)
    increments: np.ndarray  # (n_arms, n_outcomes)


def _build_tables(arms: list[Arm], n0: QuantumChannel, n1: QuantumChannel) -> StrategyTables:
    n_out = max(a.povm.outcome_count for a in arms)
    dists = np.zeros((len(arms), 2, n_out))
    incs = np.zeros((len(arms), n_out))
    for i, arm in enumerate(arms):
        p0 = outcome_distribution(n0, arm.input_state, arm.ancilla_dim, arm.povm)
        p1 = outcome_distribution(n1, arm.input_state, arm.ancilla_dim, arm.povm)
        k = arm.povm.outcome_count
        dists[i, 0, :k] = p0
        dists[i, 1, :k] = p1
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.log(p0) - np.log(p1)
        z[(p0 <= 0) & (p1 <= 0)] = 0.0  # never sampled
        incs[i, :k] = z
    cdfs = np.cumsum(dists, axis=2)
    return StrategyTables(dists=dists, cdfs=cdfs, increments=incs)


@dataclass
class TraceStep:
    arm: int
    outcome: int
    increment: float
    cumulative: float


@dataclass
class StrategyTrace:
    steps: list[TraceStep] = field(default_factory=list)
    stopping_time: int | None = None
    decision: int | None = None  # DECISION_H0 / DECISION_H1 / CENSORED

    @property
    def cumulative(self) -> float:
        return self.steps[-1].cumulative if self.steps else 0.0

    @property
    def stopped(self) -> bool:
        return self.decision is not None


@dataclass
class SprtStrategy:
    """Two-armed adaptive SPRT.

    rate0 is the witnessed per-step rate governing the type-I exponent
    (arm one's KL, direction N1 vs N0); rate1 governs the type-II exponent
    (arm zero's KL).  threshold_a = n (rate0 - tau), threshold_b =
    n (rate1 - tau).
    """

    n0: QuantumChannel
    n1: QuantumChannel
    arm_zero: Arm
    arm_one: Arm
    rate0: float
    rate1: float
    tau: float
    n: int
    threshold_a: float = field(init=False)
    threshold_b: float = field(init=False)
    block_size: int = 1
    tables: StrategyTables = field(init=False, repr=False)

    def __post_init__(self):
        if self.tau <= 0 or self.tau >= min(self.rate0, self.rate1):
            raise TauTooLargeError(
                f"tau {self.tau} not in (0, {min(self.rate0, self.rate1)})"
            )
        self.threshold_a = self.n * (self.rate0 - self.tau)
        self.threshold_b = self.n * (self.rate1 - self.tau)
        self.tables = _build_tables([self.arm_zero, self.arm_one], self.n0, self.n1)

    @property
    def arms(self) -> list[Arm]:
        return [self.arm_zero, self.arm_one]

    @property
    def adaptive(self) -> bool:
        return True

    def with_budget(self, n: int) -> "SprtStrategy":
        return SprtStrategy(
            n0=self.n0,
            n1=self.n1,
            arm_zero=self.arm_zero,
            arm_one=self.arm_one,
            rate0=self.rate0,
            rate1=self.rate1,
            tau=self.tau,
            n=n,
            block_size=self.block_size,
        )


@dataclass
class NonAdaptiveStrategy:
    """A single fixed (input, POVM) pair played every round."""

    n0: QuantumChannel
    n1: QuantumChannel
    arm: Arm
    rate0: float  # D(P1||P0)
    rate1: float  # D(P0||P1)
    tau: float
    n: int
    threshold_a: float = field(init=False)
    threshold_b: float = field(init=False)
    block_size: int = 1
    tables: StrategyTables = field(init=False, repr=False)

    def __post_init__(self):
        if self.tau <= 0 or self.tau >= min(self.rate0, self.rate1):
            raise TauTooLargeError(
                f"tau {self.tau} not in (0, {min(self.rate0, self.rate1)})"
            )
        self.threshold_a = self.n * (self.rate0 - self.tau)
        self.threshold_b = self.n * (self.rate1 - self.tau)
        self.tables = _build_tables([self.arm], self.n0, self.n1)

    @property
    def arms(self) -> list[Arm]:
        return [self.arm]

    @property
    def adaptive(self) -> bool:
        return False

    def with_budget(self, n: int) -> "NonAdaptiveStrategy":
        return NonAdaptiveStrategy(
            n0=self.n0,
            n1=self.n1,
            arm=self.arm,
            rate0=self.rate0,
            rate1=self.rate1,
            tau=self.tau,
            n=n,
            block_size=self.block_size,
        )


def _arm_from_witness(witness, out_total_dim: int, ancilla_dim: int) -> Arm:
    return Arm(
        input_state=witness.input_state,
        povm=witness.povm,
        ancilla_dim=ancilla_dim,
    )


def _arm_rate(arm: Arm, n0: QuantumChannel, n1: QuantumChannel, direction: int) -> float:
    """Classical KL of the arm's induced distributions: direction 0 means
    D(P0||P1), direction 1 means D(P1||P0)."""
    p0 = outcome_distribution(n0, arm.input_state, arm.ancilla_dim, arm.povm)
    p1 = outcome_distribution(n1, arm.input_state, arm.ancilla_dim, arm.povm)
    return kl_divergence(p0, p1) if direction == 0 else kl_divergence(p1, p0)


def build_sprt(
    n0: QuantumChannel,
    n1: QuantumChannel,
    n: int,
    tau: float | None = None,
    cfg: OptimizerConfig | None = None,
    block_size: int = 1,
) -> SprtStrategy:
    """Construct the adaptive SPRT from measured-divergence witnesses.

    Thresholds are computed from the witnessed (achieved) arm rates rather
    than the unknown true suprema, so the simulated exponents and the
    thresholds stay on the same footing.  tau defaults to 0.1 x min(rates).
    """
    cfg = cfg or OptimizerConfig()
    report = validate_channel_pair(n0, n1)
    if not report.both_finite:
        raise InfiniteDivergenceError(
            f"max-divergence infinite (finite 0||1: {report.finite_01}, "
            f"1||0: {report.finite_10}); the SPRT needs both directions finite"
        )
    dv01 = channel_divergence(n0, n1, kind="measured", cfg=cfg)
    dv10 = channel_divergence(n1, n0, kind="measured", cfg=cfg)
    ancilla = n0.in_dim
    arm_zero = _arm_from_witness(dv01.witness, n0.out_dim, ancilla)
    arm_one = _arm_from_witness(dv10.witness, n0.out_dim, ancilla)
    # achieved per-step rates of the arms (certified lower bounds)
    rate1 = _arm_rate(arm_zero, n0, n1, direction=0)
    rate0 = _arm_rate(arm_one, n0, n1, direction=1)
    if min(rate0, rate1) <= 0:
        raise TauTooLargeError("witnessed rates are zero; channels indistinguishable")
    if tau is None:
        tau = 0.1 * min(rate0, rate1)
    return SprtStrategy(
        n0=n0,
        n1=n1,
        arm_zero=arm_zero,
        arm_one=arm_one,
        rate0=rate0,
        rate1=rate1,
        tau=tau,
        n=n,
        block_size=block_size,
    )


def build_non_adaptive(
    n0: QuantumChannel,
    n1: QuantumChannel,
    input_state: DensityMatrix,
    m: Povm,
    n: int,
    tau: float | None = None,
) -> NonAdaptiveStrategy:
    """Fixed-pair SPRT; thresholds from the pair's classical KLs."""
    ancilla = input_state.dim // n0.in_dim
    arm = Arm(input_state=input_state, povm=m, ancilla_dim=ancilla)
    p0 = outcome_distribution(n0, input_state, ancilla, m)
    p1 = outcome_distribution(n1, input_state, ancilla, m)
    if np.any((p0 > 1e-12) != (p1 > 1e-12)):
        raise SupportMismatchError("induced distributions not mutually absolutely continuous")
    rate1 = kl_divergence(p0, p1)
    rate0 = kl_divergence(p1, p0)
    if min(rate0, rate1) <= 1e-15:
        raise TauTooLargeError("measurement is uninformative (zero KL both ways)")
    if tau is None:
        tau = 0.1 * min(rate0, rate1)
    return NonAdaptiveStrategy(
        n0=n0, n1=n1, arm=arm, rate0=rate0, rate1=rate1, tau=tau, n=n
    )


def lift_to_blocks(
    n0: QuantumChannel,
    n1: QuantumChannel,
    l: int,
    n: int,
    tau: float | None = None,
    cfg: OptimizerConfig | None = None,
) -> SprtStrategy:
    """SPRT on the l-fold tensor powers with budget floor(n/l) block steps.

    tau is interpreted per channel use and scaled to the block level; the
    reported stopping times are per-use (block steps x l).
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if l == 1:
        return build_sprt(n0, n1, n, tau, cfg)
    b0 = tensor_power_channel(n0, l)
    b1 = tensor_power_channel(n1, l)
    n_blocks = n // l
    if n_blocks < 1:
        raise DimensionOverflowError(f"budget {n} smaller than block size {l}")
    return build_sprt(b0, b1, n_blocks, None if tau is None else l * tau, cfg, block_size=l)


def sample_outcome(cdf: np.ndarray, u: float) -> int:
    return int(np.searchsorted(cdf, u, side="right"))


def step_sprt(
    strategy,
    true_channel: QuantumChannel,
    trace: StrategyTrace,
    rng: np.random.Generator,
) -> StrategyTrace:
    """Advance a trace by one step.

    Arm choice: fair coin at k = 1 (adaptive strategies only; one uniform
    consumed), afterwards arm zero iff the running sum is >= 0.  One further
    uniform is consumed per step to sample the outcome.
    """
    if trace.stopped:
        raise ValueError("trace already stopped")
    if strategy.adaptive:
        if not trace.steps:
            arm = 0 if rng.random() < 0.5 else 1
        else:
            arm = 0 if trace.cumulative >= 0 else 1
    else:
        arm = 0
    tables = strategy.tables
    hyp = _hypothesis_index(strategy, true_channel)
    if hyp is None:
        arm_obj = strategy.arms[arm]
        p = outcome_distribution(true_channel, arm_obj.input_state, arm_obj.ancilla_dim, arm_obj.povm)
        cdf = np.cumsum(p)
    else:
        cdf = tables.cdfs[arm, hyp]
    y = sample_outcome(cdf, rng.random())
    z = float(tables.increments[arm, y])
    if not math.isfinite(z):
        raise ZeroProbabilityOutcomeError(
            f"outcome {y} has zero probability under one hypothesis"
        )
    s = trace.cumulative + z
    trace.steps.append(TraceStep(arm=arm, outcome=y, increment=z, cumulative=s))
    if s >= strategy.threshold_b:
        trace.decision = DECISION_H0
        trace.stopping_time = len(trace.steps)
    elif s <= -strategy.threshold_a:
        trace.decision = DECISION_H1
        trace.stopping_time = len(trace.steps)
    return trace


def _hypothesis_index(strategy, true_channel: QuantumChannel) -> int | None:
    if true_channel is strategy.n0:
        return 0
    if true_channel is strategy.n1:
        return 1
    return None

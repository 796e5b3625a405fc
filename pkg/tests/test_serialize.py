import math

import numpy as np

from chandisc import serialize
from chandisc.optimize import OptimizerConfig
from chandisc.quantum import (
    Povm,
    basis_pvm,
    bernoulli_replacer,
    depolarizing_channel,
    random_channel,
    random_density_matrix,
    random_unitary,
)
from chandisc.regions import ExponentRegion
from chandisc.sim import SimulationPlan, run_trials, sweep_budgets
from chandisc.strategies import build_sprt


def test_matrix_roundtrip_exact():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    back = serialize.matrix_from_json(serialize.matrix_to_json(m))
    assert np.array_equal(m, back)


def test_state_roundtrip():
    s = random_density_matrix(3, np.random.default_rng(1))
    doc = serialize.state_to_json(s)
    back = serialize.state_from_json(doc)
    assert np.array_equal(s.mat, back.mat)


def test_channel_roundtrip():
    ch = random_channel(2, 2, 4, np.random.default_rng(2))
    text = serialize.dumps(serialize.channel_to_json(ch))
    back = serialize.channel_from_json(serialize.loads(text))
    assert len(back.kraus) == len(ch.kraus)
    for a, b in zip(ch.kraus, back.kraus):
        assert np.array_equal(a, b)
    assert np.array_equal(ch.choi, back.choi)


def test_povm_roundtrip():
    m = basis_pvm(random_unitary(3, np.random.default_rng(3)))
    back = serialize.povm_from_json(serialize.povm_to_json(m))
    assert back.is_pvm
    for a, b in zip(m.effects, back.effects):
        assert np.array_equal(a, b)


def test_strategy_roundtrip_reproduces_tables():
    strat = build_sprt(
        bernoulli_replacer(0.2),
        bernoulli_replacer(0.8),
        n=50,
        tau=0.08,
        cfg=OptimizerConfig(restarts=2, max_iters=60),
    )
    text = serialize.dumps(serialize.strategy_to_json(strat))
    back = serialize.strategy_from_json(serialize.loads(text))
    assert back.threshold_a == strat.threshold_a
    assert back.threshold_b == strat.threshold_b
    assert np.array_equal(back.tables.increments, strat.tables.increments)
    assert np.array_equal(back.tables.cdfs, strat.tables.cdfs)
    # identical simulation results
    p1 = SimulationPlan(strategy=strat, trials=100, base_seed=3)
    p2 = SimulationPlan(strategy=back, trials=100, base_seed=3)
    assert run_trials(p1) == run_trials(p2)


def test_region_roundtrip_with_infinities():
    region = ExponentRegion(
        kind="rectangle",
        frontier=[(math.inf, 0.47)],
        metadata={"l": 2, "bound": "inner"},
    )
    back = serialize.region_from_json(serialize.loads(serialize.dumps(serialize.region_to_json(region))))
    assert back.kind == region.kind
    assert back.frontier == region.frontier
    assert back.metadata["l"] == 2


def test_region_csv_contains_metadata_and_vertices():
    region = ExponentRegion(kind="hull", frontier=[(0.0, 1.0), (1.0, 0.0)], metadata={"samples": 8})
    text = serialize.region_to_csv(region, name="test")
    assert "# kind=hull" in text
    assert "# samples=8" in text
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    assert lines[0] == "r0_nats_per_use,r1_nats_per_use"
    assert len(lines) == 3


def test_summary_csv_schema():
    strat = build_sprt(
        bernoulli_replacer(0.2),
        bernoulli_replacer(0.8),
        n=50,
        tau=0.08,
        cfg=OptimizerConfig(restarts=2, max_iters=60),
    )
    s = run_trials(SimulationPlan(strategy=strat, trials=50, base_seed=0))
    text = serialize.summary_to_csv(s)
    lines = text.splitlines()
    assert lines[0].split(",") == serialize.SUMMARY_COLUMNS
    assert len(lines) == 3  # header + one row per hypothesis
    recs = sweep_budgets(strat, [50, 100], trials=50, base_seed=0)
    sweep_text = serialize.sweep_to_csv(recs)
    assert sweep_text.splitlines()[0].split(",") == serialize.SWEEP_COLUMNS
    assert len(sweep_text.splitlines()) == 3


def test_dumps_is_canonical():
    doc = {"b": 1.5, "a": [1, 2]}
    assert serialize.dumps(doc) == serialize.dumps({"a": [1, 2], "b": 1.5})
    assert serialize.dumps(doc).endswith("\n")

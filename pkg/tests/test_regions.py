import math

import numpy as np
import pytest

from chandisc.optimize import OptimizerConfig, kl_divergence
from chandisc.quantum import bernoulli_replacer, depolarizing_channel, random_channel
from chandisc.regions import (
    ExponentRegion,
    adaptive_region,
    containment,
    converse_region,
    non_adaptive_region,
    pareto_hull,
    region_chain,
)

CFG = OptimizerConfig(restarts=2, max_iters=60)


def test_containment_trivialities():
    rect = ExponentRegion(kind="rectangle", frontier=[(1.0, 2.0)])
    assert containment(rect, rect, slack=0.0).contained
    origin = ExponentRegion(kind="rectangle", frontier=[(0.0, 0.0)])
    assert containment(origin, rect, slack=0.0).contained
    bigger = ExponentRegion(kind="rectangle", frontier=[(1.5, 2.5)])
    rep = containment(bigger, rect, slack=0.0)
    assert not rep.contained
    assert rep.violations == [(1.5, 2.5)]
    assert containment(bigger, rect, slack=0.6).contained


def test_containment_with_infinite_coordinates():
    a = ExponentRegion(kind="rectangle", frontier=[(math.inf, 0.4)])
    b = ExponentRegion(kind="converseRectangle", frontier=[(math.inf, 0.5)])
    assert containment(a, b, slack=0.0).contained
    assert not containment(b, a, slack=1e-3).contained


def test_hull_boundary_interpolates():
    hull = ExponentRegion(kind="hull", frontier=[(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)])
    assert hull.boundary_r1(0.5) == pytest.approx(1.5)
    assert hull.boundary_r1(1.5) == pytest.approx(0.5)
    assert hull.contains_point(0.5, 1.5)
    assert not hull.contains_point(0.5, 1.51, slack=1e-3)


def test_pareto_hull_staircase_properties():
    pts = [(1.0, 1.0), (0.5, 1.5), (2.0, 0.2), (0.1, 0.1), (1.0, 0.9)]
    frontier = pareto_hull(pts)
    xs = [p[0] for p in frontier]
    ys = [p[1] for p in frontier]
    assert xs == sorted(xs)
    assert ys == sorted(ys, reverse=True)
    region = ExponentRegion(kind="hull", frontier=frontier)
    for p in pts:
        assert region.contains_point(p[0], p[1], slack=1e-12)


def test_adaptive_region_equal_channels_degenerate():
    ch = depolarizing_channel(0.4)
    r = adaptive_region(ch, ch, l=1, cfg=CFG)
    assert r.kind == "rectangle"
    (x, y), = r.frontier
    assert abs(x) < 1e-8 and abs(y) < 1e-8


def test_adaptive_region_commuting_classical_corner():
    n0 = bernoulli_replacer(0.2)
    n1 = bernoulli_replacer(0.8)
    r = adaptive_region(n0, n1, l=1, cfg=CFG)
    kl01 = kl_divergence([0.2, 0.8], [0.8, 0.2])
    kl10 = kl_divergence([0.8, 0.2], [0.2, 0.8])
    (x, y), = r.frontier
    assert x == pytest.approx(kl10, abs=1e-6)
    assert y == pytest.approx(kl01, abs=1e-6)


def test_adaptive_region_l2_dominates_l1():
    n0 = depolarizing_channel(0.3)
    n1 = depolarizing_channel(0.7)
    r1 = adaptive_region(n0, n1, l=1, cfg=OptimizerConfig(restarts=4, max_iters=80))
    cfg2 = OptimizerConfig(restarts=2, max_iters=40)
    cfg2.extra_starts = [
        r1.metadata["witness_10"].input_vector,
        r1.metadata["witness_01"].input_vector,
    ]
    r2 = adaptive_region(n0, n1, l=2, cfg=cfg2)
    assert r2.frontier[0][0] >= r1.frontier[0][0] - 1e-3
    assert r2.frontier[0][1] >= r1.frontier[0][1] - 1e-3


def test_non_adaptive_region_inside_adaptive():
    n0 = bernoulli_replacer(0.2)
    n1 = bernoulli_replacer(0.8)
    adapt = adaptive_region(n0, n1, l=1, cfg=CFG)
    hull = non_adaptive_region(n0, n1, cfg=CFG, samples=64)
    assert hull.kind == "hull"
    assert containment(hull, adapt, slack=1e-6).contained


def test_converse_dominates_adaptive():
    n0 = bernoulli_replacer(0.2)
    n1 = bernoulli_replacer(0.8)
    adapt = adaptive_region(n0, n1, l=1, cfg=CFG)
    conv = converse_region(n0, n1, [1.05, 1.1, 1.5], l=1, cfg=CFG)
    assert conv.kind == "converseRectangle"
    assert containment(adapt, conv, slack=1e-3).contained


def test_converse_rejects_bad_alpha():
    ch = depolarizing_channel(0.5)
    with pytest.raises(ValueError):
        converse_region(ch, ch, [0.9], l=1, cfg=CFG)


def test_region_chain_classical_pair():
    n0 = bernoulli_replacer(0.2)
    n1 = bernoulli_replacer(0.8)
    chain = region_chain(n0, n1, cfg=CFG, l_max=2, samples=64)
    for key, rep in chain.containments.items():
        assert rep.contained, (key, rep.violations)
    # classical pair: the commuting corner is the classical KL pair
    kl = kl_divergence([0.2, 0.8], [0.8, 0.2])
    (x, y), = chain.adaptive[1].frontier
    assert x == pytest.approx(kl, abs=1e-5)
    assert y == pytest.approx(kl, abs=1e-5)


def test_region_chain_handles_infinite_direction():
    from chandisc.quantum import identity_channel

    chain = region_chain(identity_channel(2), depolarizing_channel(0.5), cfg=CFG, samples=32)
    (x, y), = chain.adaptive[1].frontier
    assert math.isinf(x)  # dep-vs-id direction has no support containment
    assert y == pytest.approx(-math.log(0.625), abs=1e-3)
    for key, rep in chain.containments.items():
        assert rep.contained, (key, rep.violations)

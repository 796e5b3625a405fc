"""Error-exponent regions: adaptive rectangles, the non-adaptive convex
hull, and the finite-block converse estimate.

Regions are down-closed subsets of the nonnegative quadrant represented by
their Pareto frontier vertices (R0 ascending, R1 descending).  Rectangles
have a single corner vertex.  Coordinates may be +inf when the corresponding
channel direction has infinite max-divergence (the chain of inclusions is
still meaningful in the finite coordinate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .divergences import _apply_to_pure, block_divergence
from .errors import DegenerateSamplingError
from .linalg import support_contained
from .optimize import OptimizerConfig, kl_divergence
from .quantum import (
    QuantumChannel,
    outcome_distribution,
    random_basis_pvm,
    random_pure_state,
    tensor_power_channel,
)

RECTANGLE = "rectangle"
HULL = "hull"
CONVERSE = "converseRectangle"


@dataclass
class ExponentRegion:
    kind: str
    frontier: list[tuple[float, float]]
    metadata: dict = field(default_factory=dict)

    def max_r0(self) -> float:
        return max(v[0] for v in self.frontier)

    def max_r1(self) -> float:
        return max(v[1] for v in self.frontier)

    def boundary_r1(self, r0: float) -> float:
        """Largest R1 such that (r0, R1) lies in the region."""
        if r0 < 0:
            r0 = 0.0
        verts = self.frontier
        if self.kind == HULL and len(verts) > 1:
            if r0 > verts[-1][0]:
                return -math.inf
            if r0 <= verts[0][0]:
                return verts[0][1]
            for (x0, y0), (x1, y1) in zip(verts, verts[1:]):
                if x0 <= r0 <= x1:
                    if x1 == x0:
                        return max(y0, y1)
                    t = (r0 - x0) / (x1 - x0)
                    return y0 + t * (y1 - y0)
            return -math.inf
        # staircase: best vertex whose R0 covers r0
        best = -math.inf
        for x, y in verts:
            if x >= r0 or (math.isinf(x) and math.isinf(r0)):
                best = max(best, y)
        return best

    def contains_point(self, r0: float, r1: float, slack: float = 0.0) -> bool:
        if r0 <= slack and r1 <= slack:
            return True
        bound = self.boundary_r1(max(r0 - slack, 0.0))
        return r1 <= bound + slack


@dataclass
class ContainmentReport:
    contained: bool
    slack: float
    violations: list[tuple[float, float]]


def containment(a: ExponentRegion, b: ExponentRegion, slack: float = 0.0) -> ContainmentReport:
    """True iff every frontier vertex of a lies in b within slack."""
    violations = [v for v in a.frontier if not b.contains_point(v[0], v[1], slack)]
    return ContainmentReport(contained=not violations, slack=slack, violations=violations)


def _direction_value(
    n0: QuantumChannel,
    n1: QuantumChannel,
    l: int,
    kind: str,
    alpha: float | None,
    cfg: OptimizerConfig,
):
    """Per-use block divergence in the (n0 || n1) direction; inf when the
    Choi support condition fails."""
    if not support_contained(n0.choi, n1.choi):
        return math.inf, None
    est = block_divergence(n0, n1, l, kind=kind, alpha=alpha, cfg=cfg)
    return est.value_per_use, est.witness


def _arm_kl_pair(b0: QuantumChannel, b1: QuantumChannel, witness) -> tuple[float, float]:
    """(KL(P1||P0), KL(P0||P1)) of a witness (input, POVM) arm under the two
    channels; each coordinate lower-bounds the corresponding measured channel
    divergence."""
    psi = witness.input_vector
    s0 = _apply_to_pure(b0, psi)
    s1 = _apply_to_pure(b1, psi)
    p0 = np.maximum([float(np.trace(s0 @ e).real) for e in witness.povm.effects], 0.0)
    p1 = np.maximum([float(np.trace(s1 @ e).real) for e in witness.povm.effects], 0.0)
    p0 = p0 / p0.sum()
    p1 = p1 / p1.sum()
    return kl_divergence(p1, p0), kl_divergence(p0, p1)


def adaptive_region(
    n0: QuantumChannel,
    n1: QuantumChannel,
    l: int = 1,
    cfg: OptimizerConfig | None = None,
) -> ExponentRegion:
    """Rectangle with corner (D_M(N1||N0), D_M(N0||N1)) per use at block
    size l; witness-certified inner bound.

    Each direction's witness arm also certifies a lower bound in the other
    direction (any single measurement lower-bounds both measured
    divergences), so the corner takes the max over both arms per coordinate.
    """
    cfg = cfg or OptimizerConfig()
    r0, w10 = _direction_value(n1, n0, l, "measured", None, cfg)
    r1, w01 = _direction_value(n0, n1, l, "measured", None, cfg)
    b0 = n0 if l == 1 else tensor_power_channel(n0, l)
    b1 = n1 if l == 1 else tensor_power_channel(n1, l)
    for w in (w10, w01):
        if w is None or getattr(w, "povm", None) is None:
            continue
        a0, a1 = _arm_kl_pair(b0, b1, w)
        if math.isfinite(a0):
            r0 = max(r0, a0 / l)
        if math.isfinite(a1):
            r1 = max(r1, a1 / l)
    return ExponentRegion(
        kind=RECTANGLE,
        frontier=[(r0, r1)],
        metadata={
            "l": l,
            "bound": "inner",
            "witness_10": w10,
            "witness_01": w01,
        },
    )


def non_adaptive_region(
    n0: QuantumChannel,
    n1: QuantumChannel,
    cfg: OptimizerConfig | None = None,
    samples: int = 512,
    extra_arms: list | None = None,
) -> ExponentRegion:
    """Down-closure of the convex hull of sampled classical KL pairs.

    Samples random pure bipartite inputs with random rank-one PVMs, plus any
    caller-supplied (input, POVM) arms (e.g. the SPRT witness arms).  Inner
    bound by construction.
    """
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0x5A)))
    d_in = n0.in_dim
    d_meas = d_in * n0.out_dim
    points = []
    skipped = 0

    def add_pair(rho, m, ancilla):
        nonlocal skipped
        p0 = outcome_distribution(n0, rho, ancilla, m)
        p1 = outcome_distribution(n1, rho, ancilla, m)
        r0 = kl_divergence(p1, p0)
        r1 = kl_divergence(p0, p1)
        if math.isfinite(r0) and math.isfinite(r1):
            points.append((r0, r1))
        else:
            skipped += 1

    for arm in extra_arms or []:
        add_pair(arm.input_state, arm.povm, arm.ancilla_dim)
    for _ in range(samples):
        rho = random_pure_state(d_in * d_in, rng)
        m = random_basis_pvm(d_meas, rng)
        add_pair(rho, m, d_in)

    if not points or max(max(p) for p in points) <= 1e-12:
        if points:
            return ExponentRegion(kind=HULL, frontier=[(0.0, 0.0)], metadata={"samples": samples})
        raise DegenerateSamplingError("no finite KL pairs sampled")

    frontier = pareto_hull(points)
    return ExponentRegion(
        kind=HULL,
        frontier=frontier,
        metadata={"samples": samples, "skipped_infinite": skipped, "bound": "inner"},
    )


def pareto_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Upper-right portion of the convex hull of points together with their
    axis projections: the Pareto frontier of the down-closed hull, sorted by
    R0 ascending with R1 descending."""
    pts = [(float(x), float(y)) for x, y in points]
    pts += [(0.0, 0.0), (max(p[0] for p in pts), 0.0), (0.0, max(p[1] for p in pts))]
    hull = _convex_hull(sorted(set(pts)))
    # keep only Pareto-optimal hull vertices
    frontier = [
        p
        for p in hull
        if not any(q != p and q[0] >= p[0] - 1e-15 and q[1] >= p[1] - 1e-15 for q in hull)
    ]
    frontier.sort(key=lambda p: (p[0], -p[1]))
    # enforce strictly descending R1
    cleaned = []
    for p in frontier:
        while cleaned and cleaned[-1][1] <= p[1] + 1e-15:
            cleaned.pop()
        cleaned.append(p)
    return cleaned or [(0.0, 0.0)]


def _convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone-chain convex hull; returns vertices in counterclockwise order."""
    if len(points) <= 2:
        return list(points)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in points:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(points):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def converse_region(
    n0: QuantumChannel,
    n1: QuantumChannel,
    alpha_grid: list[float],
    l: int = 2,
    cfg: OptimizerConfig | None = None,
) -> ExponentRegion:
    """Converse estimate from the sandwiched Renyi channel divergence on
    l-fold blocks, minimized over the alpha grid.

    Finite-block values only approximate the regularized quantity from
    below, so the region is labeled an estimate rather than a certified
    outer bound.
    """
    cfg = cfg or OptimizerConfig()
    if any(a <= 1.0 for a in alpha_grid):
        raise ValueError("alpha grid must lie strictly above 1")
    corners = []
    for a_ch, b_ch in ((n1, n0), (n0, n1)):
        vals = []
        for alpha in alpha_grid:
            v, _ = _direction_value(a_ch, b_ch, l, "renyi", alpha, cfg)
            vals.append(v)
        corners.append(min(vals))
    return ExponentRegion(
        kind=CONVERSE,
        frontier=[(corners[0], corners[1])],
        metadata={"l": l, "alpha_grid": list(alpha_grid), "bound": "converse estimate"},
    )


@dataclass
class RegionChain:
    non_adaptive: ExponentRegion
    adaptive: dict[int, ExponentRegion]
    converse: ExponentRegion
    containments: dict[str, ContainmentReport]


def region_chain(
    n0: QuantumChannel,
    n1: QuantumChannel,
    cfg: OptimizerConfig | None = None,
    l_max: int = 2,
    alpha_grid: tuple[float, ...] = (1.05, 1.1, 1.5),
    samples: int = 512,
    slack: float = 1e-3,
) -> RegionChain:
    """Compute the whole inclusion chain with witness chaining.

    Witness inputs found at block size l seed the searches at l+1 and the
    converse, which keeps the chain monotone up to optimizer tolerance.
    """
    from .strategies import Arm

    cfg = cfg or OptimizerConfig()
    adaptive: dict[int, ExponentRegion] = {}
    carried: list[np.ndarray] = list(cfg.extra_starts)
    for l in range(1, l_max + 1):
        sub = cfg.scaled()
        sub.extra_starts = list(carried)
        if l > 1:
            # block searches get a reduced budget; the product starts carry
            # the l = 1 quality
            sub = sub.scaled(restarts=max(4, cfg.restarts // 4), max_iters=cfg.max_iters // 2)
            sub.extra_starts = list(carried)
        region = adaptive_region(n0, n1, l=l, cfg=sub)
        if l > 1:
            # blocks are superadditive: the per-use corner never drops when
            # the block grows, so the previous corner is a certified floor
            (px, py), = adaptive[l - 1].frontier
            (x, y), = region.frontier
            region.frontier = [(max(x, px), max(y, py))]
        adaptive[l] = region
        for key in ("witness_10", "witness_01"):
            w = region.metadata.get(key)
            if w is not None:
                carried.append(w.input_vector)

    arms = []
    w01 = adaptive[1].metadata.get("witness_01")
    w10 = adaptive[1].metadata.get("witness_10")
    for w in (w01, w10):
        if w is not None and w.povm is not None:
            arms.append(Arm(input_state=w.input_state, povm=w.povm, ancilla_dim=n0.in_dim))
    non_adapt = non_adaptive_region(n0, n1, cfg=cfg, samples=samples, extra_arms=arms)

    # every sampled (input, POVM) pair certifies lower bounds on both
    # measured divergences, so the hull extremes are valid floors for the
    # adaptive corners (and propagate upward through the blocks)
    hull_x, hull_y = non_adapt.max_r0(), non_adapt.max_r1()
    floor_x, floor_y = hull_x, hull_y
    for l in range(1, l_max + 1):
        (x, y), = adaptive[l].frontier
        floor_x, floor_y = max(x, floor_x), max(y, floor_y)
        adaptive[l].frontier = [(floor_x, floor_y)]

    conv_cfg = cfg.scaled(restarts=max(4, cfg.restarts // 4))
    conv_cfg.extra_starts = list(carried)
    conv = converse_region(n0, n1, list(alpha_grid), l=l_max, cfg=conv_cfg)
    # the sandwiched divergence dominates the measured one pointwise, so the
    # adaptive corner is also a certified floor for the converse estimate
    (ax, ay), = adaptive[l_max].frontier
    (cx, cy), = conv.frontier
    conv.frontier = [(max(cx, ax), max(cy, ay))]

    containments = {
        "nonAdaptive_in_adaptive1": containment(non_adapt, adaptive[1], slack),
        "converse_covers_adaptive_max": containment(adaptive[l_max], conv, slack),
    }
    for l in range(1, l_max):
        containments[f"adaptive{l}_in_adaptive{l + 1}"] = containment(
            adaptive[l], adaptive[l + 1], slack
        )
    return RegionChain(
        non_adaptive=non_adapt,
        adaptive=adaptive,
        converse=conv,
        containments=containments,
    )

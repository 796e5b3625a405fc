"""JSON / CSV import-export.

Complex matrices are stored entry-wise as [re, im] pairs (row-major nested
lists), so every document is plain JSON.  Reading back a serialized state,
channel, POVM, strategy or region reproduces the in-memory value exactly:
floats go through repr round-trip, and strategies are rebuilt from the same
constructor inputs (arms, rates, tau, n), which regenerates identical
thresholds and tables.  Schemas are documented in docs/formats.md.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .quantum import DensityMatrix, Povm, QuantumChannel

# ---------------------------------------------------------------------------
# complex matrices
# ---------------------------------------------------------------------------


def matrix_to_json(m: np.ndarray) -> list:
    arr = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def vector_to_json(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def vector_from_json(pairs: list) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


# ---------------------------------------------------------------------------
# quantum objects
# ---------------------------------------------------------------------------


def state_to_json(s: DensityMatrix) -> dict:
    return {"type": "state", "label": s.label, "matrix": matrix_to_json(s.mat)}


def state_from_json(doc: dict) -> DensityMatrix:
    return DensityMatrix(matrix_from_json(doc["matrix"]), label=doc.get("label", ""))


def channel_to_json(ch: QuantumChannel) -> dict:
    return {
        "type": "channel",
        "label": ch.label,
        "kraus": [matrix_to_json(k) for k in ch.kraus],
    }


def channel_from_json(doc: dict) -> QuantumChannel:
    return QuantumChannel(
        [matrix_from_json(k) for k in doc["kraus"]], label=doc.get("label", "")
    )


def povm_to_json(m: Povm) -> dict:
    return {
        "type": "povm",
        "label": m.label,
        "effects": [matrix_to_json(e) for e in m.effects],
    }


def povm_from_json(doc: dict) -> Povm:
    return Povm([matrix_from_json(e) for e in doc["effects"]], label=doc.get("label", ""))


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------


def arm_to_json(arm) -> dict:
    return {
        "input_state": state_to_json(arm.input_state),
        "povm": povm_to_json(arm.povm),
        "ancilla_dim": arm.ancilla_dim,
    }


def arm_from_json(doc: dict):
    from .strategies import Arm

    return Arm(
        input_state=state_from_json(doc["input_state"]),
        povm=povm_from_json(doc["povm"]),
        ancilla_dim=int(doc["ancilla_dim"]),
    )


def strategy_to_json(strategy) -> dict:
    doc = {
        "type": "strategy",
        "adaptive": strategy.adaptive,
        "n0": channel_to_json(strategy.n0),
        "n1": channel_to_json(strategy.n1),
        "rate0": strategy.rate0,
        "rate1": strategy.rate1,
        "tau": strategy.tau,
        "n": strategy.n,
        "block_size": strategy.block_size,
    }
    if strategy.adaptive:
        doc["arm_zero"] = arm_to_json(strategy.arm_zero)
        doc["arm_one"] = arm_to_json(strategy.arm_one)
    else:
        doc["arm"] = arm_to_json(strategy.arm)
    return doc


def strategy_from_json(doc: dict):
    from .strategies import NonAdaptiveStrategy, SprtStrategy

    common = dict(
        n0=channel_from_json(doc["n0"]),
        n1=channel_from_json(doc["n1"]),
        rate0=float(doc["rate0"]),
        rate1=float(doc["rate1"]),
        tau=float(doc["tau"]),
        n=int(doc["n"]),
        block_size=int(doc.get("block_size", 1)),
    )
    if doc["adaptive"]:
        return SprtStrategy(
            arm_zero=arm_from_json(doc["arm_zero"]),
            arm_one=arm_from_json(doc["arm_one"]),
            **common,
        )
    return NonAdaptiveStrategy(arm=arm_from_json(doc["arm"]), **common)


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


def _num_to_json(x: float):
    # JSON has no inf; use a string sentinel that round-trips
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _num_from_json(x) -> float:
    if isinstance(x, str):
        return math.inf if x == "inf" else -math.inf
    return float(x)


def region_to_json(region) -> dict:
    meta = {}
    for k, v in region.metadata.items():
        if isinstance(v, (str, int, bool)):
            meta[k] = v
        elif isinstance(v, float):
            meta[k] = _num_to_json(v)
        elif isinstance(v, (list, tuple)) and all(isinstance(a, (int, float)) for a in v):
            meta[k] = [float(a) for a in v]
        # witnesses and other rich objects are not part of the document
    return {
        "type": "region",
        "kind": region.kind,
        "frontier": [[_num_to_json(x), _num_to_json(y)] for x, y in region.frontier],
        "metadata": meta,
    }


def region_from_json(doc: dict):
    from .regions import ExponentRegion

    return ExponentRegion(
        kind=doc["kind"],
        frontier=[(_num_from_json(x), _num_from_json(y)) for x, y in doc["frontier"]],
        metadata=dict(doc.get("metadata", {})),
    )


def region_to_csv(region, name: str = "") -> str:
    """Frontier vertices with a commented metadata header."""
    buf = io.StringIO()
    buf.write(f"# kind={region.kind}\n")
    if name:
        buf.write(f"# name={name}\n")
    for k in sorted(region.metadata):
        v = region.metadata[k]
        if isinstance(v, (str, int, float, bool)):
            buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r0_nats_per_use", "r1_nats_per_use"])
    for x, y in region.frontier:
        w.writerow([repr(float(x)), repr(float(y))])
    return buf.getvalue()


def regions_long_csv(named_regions: list[tuple[str, object]]) -> str:
    """Plot-ready long format: one row per (region, vertex)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["region", "kind", "vertex", "r0", "r1"])
    for name, region in named_regions:
        for i, (x, y) in enumerate(region.frontier):
            w.writerow([name, region.kind, i, repr(float(x)), repr(float(y))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# simulation summaries
# ---------------------------------------------------------------------------

SUMMARY_COLUMNS = [
    "hypothesis",
    "trials",
    "errors",
    "censored",
    "error_rate",
    "error_se",
    "mean_stop",
    "stop_se",
    "overshoot",
    "overshoot_se",
    "budget",
    "threshold",
    "wald_bound",
    "wald_ok",
    "exponent_raw",
    "exponent_corrected",
]


def summary_to_csv(summary) -> str:
    """Per-hypothesis rows; the Wald columns compare the observed error rate
    against e^{-A_n} (hypothesis 0) / e^{-B_n} (hypothesis 1) plus 3 SE."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    thresholds = [summary.threshold_a, summary.threshold_b]
    for hyp, stats in enumerate(summary.per_hyp):
        bound = math.exp(-thresholds[hyp])
        ok = stats.error_rate <= bound + 3.0 * stats.error_se
        w.writerow(
            [
                hyp,
                stats.trials,
                stats.errors,
                stats.censored,
                repr(stats.error_rate),
                repr(stats.error_se),
                repr(stats.mean_stop),
                repr(stats.stop_se),
                repr(stats.overshoot),
                repr(stats.overshoot_se),
                summary.budget,
                repr(thresholds[hyp]),
                repr(bound),
                int(ok),
                repr(summary.empirical_exponent(hyp, corrected=False)),
                repr(summary.empirical_exponent(hyp, corrected=True)),
            ]
        )
    return buf.getvalue()


SWEEP_COLUMNS = [
    "n",
    "alpha_hat",
    "beta_hat",
    "exponent_alpha",
    "exponent_beta",
    "bound_exponent_alpha",
    "bound_exponent_beta",
    "constraint",
    "constraint_passed",
    "mean_stop_h0",
    "mean_stop_h1",
]


def sweep_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for rec in records:
        s = rec.summary
        w.writerow(
            [
                rec.n,
                repr(s.alpha_hat),
                repr(s.beta_hat),
                repr(rec.exponent_alpha),
                repr(rec.exponent_beta),
                repr(rec.bound_exponent_alpha),
                repr(rec.bound_exponent_beta),
                rec.report.constraint,
                int(rec.report.passed),
                repr(s.per_hyp[0].mean_stop),
                repr(s.per_hyp[1].mean_stop),
            ]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------


def dumps(doc: dict) -> str:
    """Canonical JSON text: sorted keys, stable float repr, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)

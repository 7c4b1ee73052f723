"""Seeded random sweep over canonical parameters.

Every sample gets the full cycle analysis; failures become verdict rows
instead of aborting the run.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from pwlcycle import cycles
from pwlcycle.canonical import CanonicalParams
from pwlcycle.exceptions import InconsistentVerdict, UniquenessViolation, ValidationError, log_error, throw
from pwlcycle.settings import get_tolerances

logger = logging.getLogger(__name__)

PARAMETERS = ("t_l", "t_r", "d_l", "d_r", "a_l", "a_r")

# focus-focus systems with T_L > 0 > T_R
DEFAULT_RANGES = {
    "t_l": (0.05, 1.0),
    "t_r": (-1.0, -0.05),
    "d_l": (0.5, 2.0),
    "d_r": (0.5, 2.0),
    "a_l": (-1.0, 1.0),
    "a_r": (-1.0, 1.0),
}


def execute(filters=None):
    """filters: count, seed, optional ranges, tol and workers.

    Returns (columns, data, summary) with one row per sample, ordered by
    sample index.
    """
    columns = [
        {"fieldname": "index", "label": "Sample", "fieldtype": "Int"},
        *({"fieldname": name, "label": name, "fieldtype": "Float"} for name in PARAMETERS),
        {"fieldname": "xi", "label": "xi", "fieldtype": "Float"},
        {"fieldname": "c_inf", "label": "c_inf", "fieldtype": "Float"},
        {"fieldname": "origin", "label": "Origin", "fieldtype": "Data"},
        {"fieldname": "infinity", "label": "Infinity", "fieldtype": "Data"},
        {"fieldname": "singularity", "label": "Monodromic Singularity", "fieldtype": "Data"},
        {"fieldname": "sufficient", "label": "Existence Guaranteed", "fieldtype": "Check"},
        {"fieldname": "cycle", "label": "Cycle", "fieldtype": "Check"},
        {"fieldname": "y0_star", "label": "y0*", "fieldtype": "Float"},
        {"fieldname": "stability", "label": "Stability", "fieldtype": "Data"},
        {"fieldname": "oracle_residual", "label": "Oracle Residual", "fieldtype": "Float"},
        {"fieldname": "contraction_ok", "label": "Contraction Agrees", "fieldtype": "Check"},
        {"fieldname": "verdict", "label": "Verdict", "fieldtype": "Data"},
        {"fieldname": "error", "label": "Error", "fieldtype": "Data"},
    ]

    filters = filters or {}
    if filters.get("seed") is None:
        throw("Please give a sweep seed.")
    count = filters.get("count", 0)
    if isinstance(count, bool) or not isinstance(count, int) or count < 0:
        throw(f"Sweep count must be a non-negative integer, got {count!r}", ValidationError)
    tol = filters.get("tol") or get_tolerances()
    workers = filters.get("workers") or 1

    samples = draw_samples(count, filters["seed"], filters.get("ranges"))
    jobs = [(i, values, tol) for i, values in enumerate(samples)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            data = list(pool.map(evaluate_sample, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        data = [evaluate_sample(job) for job in jobs]

    summary = summarize(data, filters["seed"])
    logger.info("Sweep done: %s", summary)
    return columns, data, summary


def draw_samples(count, seed, ranges=None):
    """``count`` parameter dicts drawn uniformly and reproducibly."""
    ranges = {**DEFAULT_RANGES, **(ranges or {})}
    unknown = sorted(set(ranges) - set(PARAMETERS))
    if unknown:
        throw(f"Unknown sweep range(s): {', '.join(unknown)}")
    bounds = []
    for name in PARAMETERS:
        try:
            lo, hi = (float(v) for v in ranges[name])
        except (TypeError, ValueError):
            throw(f"Sweep range '{name}' must be a [lo, hi] pair, got {ranges[name]!r}")
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            throw(f"Sweep range '{name}' must be finite with lo <= hi, got {ranges[name]!r}")
        bounds.append((lo, hi))

    try:
        rng = np.random.default_rng(seed)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Invalid sweep seed {seed!r}: {e}") from e
    lows, highs = np.array(bounds).T
    draws = rng.uniform(lows, highs, size=(count, len(PARAMETERS)))
    return [dict(zip(PARAMETERS, map(float, row))) for row in draws]


def evaluate_sample(job):
    index, values, tol = job
    params = CanonicalParams(**values)
    inv = cycles.invariants(params)
    row = {"index": index, **values, "xi": inv.xi, "c_inf": inv.c_inf}
    try:
        report = cycles.analyze(params, tol=tol)
        row.update(
            origin=report.origin_class.value,
            infinity=report.infinity_class.value,
            singularity=report.singularity.stability.value if report.singularity else None,
            sufficient=report.sufficient,
            cycle=report.cycle is not None,
            verdict="ok",
        )
        cycle = report.cycle
        if cycle is not None:
            agrees = cycles.contraction_agrees(params, cycle, tol=tol)
            row.update(
                y0_star=cycle.y0_star,
                stability=cycle.stability.value,
                oracle_residual=cycle.oracle_residual,
                contraction_ok=agrees,
            )
            if cycle.oracle_residual > tol.oracle_tol * (1.0 + cycle.y0_star + abs(cycle.y1_star)):
                row["verdict"] = "oracle_disagreement"
            elif not agrees:
                row["verdict"] = "stability_law_violation"
        elif report.sufficient:
            row["verdict"] = "missing_cycle"
    except UniquenessViolation as e:
        row.update(verdict="uniqueness_violation", error=str(e))
    except InconsistentVerdict as e:
        row.update(verdict="stability_law_violation", error=str(e))
    except Exception as e:
        log_error(f"Sweep sample {index} failed")
        row.update(verdict="numerical_failure", error=f"{type(e).__name__}: {e}")
    return row


def summarize(data, seed):
    verdicts = [row.get("verdict") for row in data]
    return {
        "seed": seed,
        "samples": len(data),
        "cycles_found": sum(1 for row in data if row.get("cycle")),
        "uniqueness_violations": verdicts.count("uniqueness_violation"),
        "oracle_disagreements": verdicts.count("oracle_disagreement"),
        "stability_law_violations": verdicts.count("stability_law_violation"),
        "missing_cycles": verdicts.count("missing_cycle"),
        "numerical_failures": verdicts.count("numerical_failure"),
    }

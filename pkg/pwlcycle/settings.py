"""Numerical tolerances shared by every analysis step.

One record holds all of them. A config document may override any field
through its ``tolerances`` block, and the ``PWLCYCLE_TOL`` environment
variable overrides the master tolerance ``root_xtol``.
"""

import dataclasses
import logging
import math
import os
from dataclasses import dataclass

from pwlcycle.exceptions import ValidationError, throw

logger = logging.getLogger(__name__)

ENV_MASTER_TOLERANCE = "PWLCYCLE_TOL"

_INTEGER_FIELDS = ("seed_points",)


@dataclass(frozen=True)
class Tolerances:
    sewing_rtol: float = 1e-12
    # relative bracket width of the half-map root solves (master tolerance)
    root_xtol: float = 1e-15
    degenerate_disc: float = 1e-10
    spectrum_eps: float = 1e-12
    quad_epsabs: float = 1e-12
    time_xtol: float = 1e-13
    time_cap: float = 1e6
    delta_floor: float = 1e-12
    cycle_tol: float = 1e-9
    simple_zero: float = 1e-10
    seed_points: int = 512
    scan_cap: float = 1e6
    oracle_tol: float = 1e-8
    identity_rtol: float = 1e-12

    @classmethod
    def from_mapping(cls, mapping=None, base=None):
        """Build a record from ``mapping`` on top of ``base`` (defaults when None).

        Rules:
        - unknown keys are rejected
        - every value must be a finite positive number
        - ``seed_points`` must be an integer of at least 8
        """
        base = base or cls()
        if not mapping:
            return base

        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            throw(f"Unknown tolerance field(s): {', '.join(unknown)}")

        values = {}
        for key, value in mapping.items():
            values[key] = _coerce(key, value)
        return dataclasses.replace(base, **values)


def _coerce(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        throw(f"Tolerance '{key}' must be a number, got {value!r}")
    if key in _INTEGER_FIELDS:
        if int(value) != value or value < 8:
            throw(f"Tolerance '{key}' must be an integer >= 8, got {value!r}")
        return int(value)
    if not math.isfinite(value) or value <= 0:
        throw(f"Tolerance '{key}' must be finite and positive, got {value!r}")
    return float(value)


def get_tolerances(overrides=None):
    """Defaults, then ``overrides``, then the environment master tolerance."""
    tol = Tolerances.from_mapping(overrides)

    raw = os.environ.get(ENV_MASTER_TOLERANCE)
    if raw:
        try:
            master = float(raw)
        except ValueError:
            raise ValidationError(
                f"{ENV_MASTER_TOLERANCE} must be a number, got {raw!r}"
            ) from None
        tol = dataclasses.replace(tol, root_xtol=_coerce("root_xtol", master))
        logger.debug("root_xtol overridden from environment: %g", tol.root_xtol)

    return tol

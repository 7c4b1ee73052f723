"""Crossing (sewing) check of a raw two-zone system and its reduction to the
six Liénard parameters.

The switching line is x = 0. Left zone: x' = A_l x + b_l for x < 0, right
zone: x' = A_r x + b_r for x > 0.
"""

import enum
import logging
import math
from dataclasses import dataclass, fields

import numpy as np

from pwlcycle.exceptions import NotSewing, ValidationError, throw
from pwlcycle.settings import get_tolerances

logger = logging.getLogger(__name__)


class SewingStatus(str, enum.Enum):
    SEWING = "sewing"
    NON_TRANSVERSAL = "non_transversal"
    SLIDING_PRESENT = "sliding_present"


@dataclass(frozen=True)
class SewingVerdict:
    status: SewingStatus
    detail: str

    @property
    def ok(self):
        return self.status is SewingStatus.SEWING


@dataclass(frozen=True)
class RawSystem:
    A_l: tuple
    b_l: tuple
    A_r: tuple
    b_r: tuple

    def __post_init__(self):
        for name, shape in (("A_l", (2, 2)), ("b_l", (2,)), ("A_r", (2, 2)), ("b_r", (2,))):
            try:
                arr = np.asarray(getattr(self, name), dtype=float)
            except (TypeError, ValueError):
                throw(f"{name} must be numeric")
            if arr.shape != shape:
                throw(f"{name} must have shape {shape}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                throw(f"{name} has non-finite entries")
            # frozen: store plain nested tuples so instances stay hashable
            value = arr.tolist()
            object.__setattr__(self, name, tuple(map(tuple, value)) if arr.ndim == 2 else tuple(value))

    @classmethod
    def from_mapping(cls, data):
        return cls(**_pick(data, ("A_l", "b_l", "A_r", "b_r"), "raw"))


@dataclass(frozen=True)
class ZoneParams:
    """One zone of the canonical form: x' = trace*x - y, y' = det*x - a."""

    a: float
    trace: float
    det: float

    @property
    def disc(self):
        return 4.0 * self.det - self.trace * self.trace

    def is_focus(self, eps=0.0):
        return self.disc > eps * self.trace * self.trace


@dataclass(frozen=True)
class CanonicalParams:
    t_l: float
    t_r: float
    d_l: float
    d_r: float
    a_l: float
    a_r: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                throw(f"Canonical parameter '{f.name}' must be a number, got {value!r}")
            if not math.isfinite(value):
                throw(f"Canonical parameter '{f.name}' must be finite, got {value!r}")
            object.__setattr__(self, f.name, float(value))

    @classmethod
    def from_mapping(cls, data):
        return cls(**_pick(data, ("t_l", "t_r", "d_l", "d_r", "a_l", "a_r"), "canonical"))

    @property
    def left(self):
        return ZoneParams(self.a_l, self.t_l, self.d_l)

    @property
    def right(self):
        return ZoneParams(self.a_r, self.t_r, self.d_r)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_raw(self):
        return RawSystem(
            A_l=((self.t_l, -1.0), (self.d_l, 0.0)),
            b_l=(0.0, -self.a_l),
            A_r=((self.t_r, -1.0), (self.d_r, 0.0)),
            b_r=(0.0, -self.a_r),
        )


def _pick(data, keys, label):
    if not isinstance(data, dict):
        raise ValidationError(f"'{label}' must be an object")
    missing = [k for k in keys if k not in data]
    extra = sorted(set(data) - set(keys))
    if missing:
        throw(f"'{label}' is missing field(s): {', '.join(missing)}")
    if extra:
        throw(f"'{label}' has unknown field(s): {', '.join(extra)}")
    return {k: data[k] for k in keys}


# -------------------------------------------------------------------
# Sewing check
# -------------------------------------------------------------------


def check_sewing(raw, tol=None):
    """Classify the crossing behaviour of ``raw`` on the switching line.

    Rules:
    - a12_l * a12_r == 0 -> NON_TRANSVERSAL (no periodic crossing orbits)
    - a12_l * a12_r < 0 -> SLIDING_PRESENT
    - otherwise SEWING iff a12_l * b1_r == a12_r * b1_l, compared with
      ``sewing_rtol`` relative to the squared largest coefficient
    """
    tol = tol or get_tolerances()
    a12_l, a12_r = raw.A_l[0][1], raw.A_r[0][1]
    b1_l, b1_r = raw.b_l[0], raw.b_r[0]

    product = a12_l * a12_r
    if product == 0.0:
        return SewingVerdict(
            SewingStatus.NON_TRANSVERSAL,
            f"a12_l*a12_r = 0 (a12_l={a12_l:g}, a12_r={a12_r:g}): the line is not crossed transversally",
        )
    if product < 0.0:
        return SewingVerdict(
            SewingStatus.SLIDING_PRESENT,
            f"a12_l*a12_r = {product:g} < 0: the zones push in opposite directions",
        )

    scale = max(abs(a12_l), abs(a12_r), abs(b1_l), abs(b1_r))
    mismatch = a12_l * b1_r - a12_r * b1_l
    if abs(mismatch) > tol.sewing_rtol * scale * scale:
        return SewingVerdict(
            SewingStatus.SLIDING_PRESENT,
            f"a12_l*b1_r - a12_r*b1_l = {mismatch:g}: the tangency points differ and a sliding segment appears",
        )

    return SewingVerdict(SewingStatus.SEWING, "flow crosses x=0 transversally except at one tangency point")


def reduce_to_lienard(raw, check=True, tol=None):
    """Six Liénard parameters of ``raw``.

    With ``check`` the sewing hypothesis is enforced first and a failing
    verdict is raised as :class:`NotSewing`.
    """
    if check:
        verdict = check_sewing(raw, tol=tol)
        if not verdict.ok:
            raise NotSewing(f"System is not sewing: {verdict.detail}", verdict)

    params = CanonicalParams(
        t_l=_trace(raw.A_l),
        t_r=_trace(raw.A_r),
        d_l=_det(raw.A_l),
        d_r=_det(raw.A_r),
        a_l=_inhomogeneity(raw.A_l, raw.b_l),
        a_r=_inhomogeneity(raw.A_r, raw.b_r),
    )
    logger.info("Reduced to canonical form: %s", params.as_dict())
    return params


def _trace(m):
    return m[0][0] + m[1][1]


def _det(m):
    # explicit 2x2 formula keeps integer inputs exact
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def _inhomogeneity(m, b):
    return m[0][1] * b[1] - m[1][1] * b[0]

"""Displacement function, the limit cycle and the classification constants.

The displacement is delta(y0) = y_R(y0) - y_L(y0) on I = I_L ∩ I_R, with
y_L the forward left half-map and y_R the backward right one. A crossing
limit cycle is a simple zero of delta; there is at most one, attracting
iff xi = a_R*T_L - a_L*T_R < 0.
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from pwlcycle import flow_oracle, halfmap
from pwlcycle.exceptions import (
    ConvergenceError,
    DomainError,
    InconsistentVerdict,
    NotApplicable,
    PreconditionViolation,
    UniquenessViolation,
    throw,
)
from pwlcycle.halfmap import Interval, Side
from pwlcycle.settings import get_tolerances

logger = logging.getLogger(__name__)

_RTOL = 4 * 2.220446049250313e-16
_EXTENDED_CAP = 1e12
_MINIMA_SAMPLES = 16


class Stability(str, enum.Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    INDETERMINATE = "indeterminate"


class OriginClass(str, enum.Enum):
    NOT_MONODROMIC = "not_monodromic"
    MONODROMIC_ATTRACTING = "monodromic_attracting"
    MONODROMIC_REPELLING = "monodromic_repelling"
    MONODROMIC_UNDETERMINED = "monodromic_undetermined"


class InfinityClass(str, enum.Enum):
    NOT_MONODROMIC = "not_monodromic"
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    UNDETERMINED = "undetermined"


def _sign(value):
    return int(value > 0) - int(value < 0)


def _finite_or_none(value):
    if value is None:
        return None
    return value if math.isfinite(value) else None


# -------------------------------------------------------------------
# Invariants
# -------------------------------------------------------------------


@dataclass(frozen=True)
class CycleInvariants:
    c0: float
    c1: float
    c2: float
    xi: float
    c_inf: float
    # hyperbola F(y0, y1) = 0 in the (y0, y1) plane
    gamma_center: tuple | None = None
    gamma_asymptote: float | None = None
    gamma_bisector_point: float | None = None
    gamma_axis_point: float | None = None
    gamma_nondegenerate: bool = False
    gamma_increasing: bool = False

    def as_dict(self):
        return {
            "c0": self.c0,
            "c1": self.c1,
            "c2": self.c2,
            "xi": self.xi,
            "c_inf": self.c_inf,
            "gamma": {
                "center": list(self.gamma_center) if self.gamma_center else None,
                "asymptote": self.gamma_asymptote,
                "bisector_point": self.gamma_bisector_point,
                "axis_point": self.gamma_axis_point,
                "nondegenerate": self.gamma_nondegenerate,
                "increasing": self.gamma_increasing,
            },
        }


def invariants(params):
    a_l, a_r = params.a_l, params.a_r
    t_l, t_r = params.t_l, params.t_r
    d_l, d_r = params.d_l, params.d_r

    xi = a_r * t_l - a_l * t_r
    c0 = a_r * a_l * xi
    c1 = a_r * t_r * d_l - a_l * t_l * d_r
    c2 = a_l * a_l * d_r - a_r * a_r * d_l
    c_inf = t_l * (t_l * t_l * d_r - t_r * t_r * d_l)

    center = asymptote = bisector = None
    if c1 != 0:
        asymptote = -c2 / c1
        center = (asymptote, asymptote)
        if c0 * c1 >= 0:
            bisector = math.sqrt(c0 / c1)
    return CycleInvariants(
        c0=c0,
        c1=c1,
        c2=c2,
        xi=xi,
        c_inf=c_inf,
        gamma_center=center,
        gamma_asymptote=asymptote,
        gamma_bisector_point=bisector,
        gamma_axis_point=-c0 / c2 if c2 != 0 else None,
        gamma_nondegenerate=c1 * (c2 * c2 - c1 * c0) != 0,
        gamma_increasing=c0 * c1 - c2 * c2 > 0,
    )


def crossing_form(inv, y0, y1):
    """F(y0, y1) = c0 + c1*y0*y1 + c2*(y0 + y1); sign(delta') = sign(F) on zeros."""
    return inv.c0 + inv.c1 * y0 * y1 + inv.c2 * (y0 + y1)


def crossing_form_det(params, y0, y1):
    """F written as minus a 3x3 determinant."""
    m = np.array(
        [
            [1.0, -(y0 + y1), y0 * y1],
            [params.d_l, -params.a_l * params.t_l, params.a_l**2],
            [params.d_r, -params.a_r * params.t_r, params.a_r**2],
        ]
    )
    return -float(np.linalg.det(m))


def identity_residuals(params, inv=None):
    """Relative residuals of the three coefficient identities.

    c0*D_L + c2*a_L*T_L + c1*a_L^2 = 0, the same with R, and
    a_L*a_R*T_L^2*c1 + a_L^2*a_R*c_inf = T_L*T_R*D_L*c0.
    """
    inv = inv or invariants(params)
    p = params
    terms = (
        (inv.c0 * p.d_l, inv.c2 * p.a_l * p.t_l, inv.c1 * p.a_l**2),
        (inv.c0 * p.d_r, inv.c2 * p.a_r * p.t_r, inv.c1 * p.a_r**2),
        (p.a_l * p.a_r * p.t_l**2 * inv.c1, p.a_l**2 * p.a_r * inv.c_inf, -p.t_l * p.t_r * p.d_l * inv.c0),
    )
    # scales are the monomials of the expanded identities, so cancellation
    # inside c0, c1, c2 does not inflate the residual
    al, ar, tl, tr, dl, dr = (abs(v) for v in (p.a_l, p.a_r, p.t_l, p.t_r, p.d_l, p.d_r))
    scales = (
        al * (ar * ar * tl * dl + ar * al * tr * dl + al * al * tl * dr),
        ar * (ar * al * tl * dr + al * al * tr * dr + ar * ar * tr * dl),
        al * ar * tl * (ar * tl * tr * dl + al * tl * tl * dr + al * tr * tr * dl),
    )
    return tuple(abs(math.fsum(group)) / scale if scale else 0.0 for group, scale in zip(terms, scales))


def _xi_vanishes(params, inv, tol):
    scale = abs(params.a_r * params.t_l) + abs(params.a_l * params.t_r)
    return abs(inv.xi) <= tol.identity_rtol * scale


# -------------------------------------------------------------------
# Displacement
# -------------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    points: np.ndarray
    values: np.ndarray
    zeros: tuple
    # delta below the noise floor at every scanned point
    continuum: bool


class Displacement:
    """delta(y0) = y_R(y0) - y_L(y0) over the common domain."""

    def __init__(self, params, spec_l, spec_r, tol=None):
        self.params = params
        self.spec_l = spec_l
        self.spec_r = spec_r
        self.tol = tol or get_tolerances()
        self.interval = Interval(
            max(spec_l.domain.lo, spec_r.domain.lo),
            min(spec_l.domain.hi, spec_r.domain.hi),
        )

    @classmethod
    def from_params(cls, params, tol=None):
        """None when a half-map is missing or the common domain is empty."""
        tol = tol or get_tolerances()
        left, right = params.left, params.right
        spec_l = halfmap.build_spec(left.a, left.trace, left.det, Side.LEFT_FORWARD, strict=False, tol=tol)
        spec_r = halfmap.build_spec(right.a, right.trace, right.det, Side.RIGHT_BACKWARD, strict=False, tol=tol)
        if not (spec_l.exists and spec_r.exists):
            return None
        disp = cls(params, spec_l, spec_r, tol)
        if disp.interval.lo >= disp.interval.hi:
            logger.debug("Empty common domain [%g, %g)", disp.interval.lo, disp.interval.hi)
            return None
        return disp

    def images(self, y0):
        y_l = halfmap.eval(self.spec_l, y0, self.tol).y1
        y_r = halfmap.eval(self.spec_r, y0, self.tol).y1
        return y_l, y_r

    def __call__(self, y0):
        y_l, y_r = self.images(y0)
        return y_r - y_l

    def _values(self, points):
        out = np.empty(len(points))
        for i, y0 in enumerate(points):
            try:
                out[i] = self(float(y0))
            except (DomainError, ConvergenceError) as e:
                logger.debug("delta(%g) skipped: %s", y0, e)
                out[i] = np.nan
        return out

    def _trusted(self, points, values):
        with np.errstate(invalid="ignore"):
            return np.abs(values) > self.tol.delta_floor * (1.0 + points)

    def scan(self):
        """Sample delta over I and bracket its zeros.

        The grid clusters at both ends of a bounded I and is geometric for
        an unbounded one. Only values above the noise floor carry a sign;
        sign changes between them are refined with brentq, and each local
        minimum of |delta| gets extra samples for near-tangential zeros.
        """
        tol = self.tol
        points = _scan_grid(self.interval, tol)
        values = self._values(points)

        if not self.interval.bounded and self.spec_l.focus and self.spec_r.focus:
            expected = _sign(_infinity_mu(self.spec_l, self.spec_r))
            trusted = self._trusted(points, values)
            last = _sign(values[trusted][-1]) if trusted.any() else 0
            if expected and last != expected:
                extra = self.interval.lo + np.geomspace(tol.scan_cap, _EXTENDED_CAP, 65)[1:]
                logger.debug("Extending delta scan to %g", extra[-1])
                points = np.concatenate([points, extra])
                values = np.concatenate([values, self._values(extra)])

        trusted = self._trusted(points, values)
        if not trusted.any():
            continuum = bool(np.isfinite(values).any())
            if continuum:
                logger.info("delta vanishes on the whole scan: continuum of periodic orbits")
            return ScanResult(points, values, (), continuum)

        samples = self._minima_samples(points, values, trusted)
        if len(samples):
            points = np.concatenate([points, samples])
            values = np.concatenate([values, self._values(samples)])
            order = np.argsort(points)
            points, values = points[order], values[order]
            trusted = self._trusted(points, values)

        idx = np.flatnonzero(trusted)
        signs = np.sign(values[idx])
        zeros = []
        for k in np.flatnonzero(signs[:-1] != signs[1:]):
            lo, hi = points[idx[k]], points[idx[k + 1]]
            zeros.append(self._refine(float(lo), float(hi)))

        merged = []
        for z in sorted(zeros):
            if merged and abs(z - merged[-1]) <= 1e-9 * (1.0 + z):
                continue
            merged.append(z)
        logger.debug("delta scan: %d points, %d zero(s)", len(points), len(merged))
        return ScanResult(points, values, tuple(merged), False)

    def _minima_samples(self, points, values, trusted):
        idx = np.flatnonzero(trusted)
        mags = np.abs(values[idx])
        signs = np.sign(values[idx])
        samples = []
        for k in range(1, len(idx) - 1):
            if signs[k - 1] == signs[k] == signs[k + 1] and mags[k] < mags[k - 1] and mags[k] < mags[k + 1]:
                lo, hi = points[idx[k - 1]], points[idx[k + 1]]
                samples.append(np.linspace(lo, hi, _MINIMA_SAMPLES + 2)[1:-1])
        return np.concatenate(samples) if samples else np.empty(0)

    def _refine(self, lo, hi):
        try:
            return optimize.brentq(self, lo, hi, xtol=max(1e-15 * (1.0 + hi), 1e-300), rtol=_RTOL, maxiter=400)
        except (RuntimeError, ValueError) as e:
            raise ConvergenceError(f"Zero of delta not refined on [{lo:g}, {hi:g}]: {e}") from e


def _scan_grid(interval, tol):
    n = tol.seed_points
    lo, hi = interval.lo, interval.hi
    if interval.bounded:
        span = hi - lo
        u = 0.5 * (1.0 - np.cos(np.pi * np.arange(1, n) / n))
        ends = 10.0 ** -np.arange(4, 16, dtype=float)
        u = np.unique(np.concatenate([u, ends, 1.0 - ends]))
        points = lo + span * u
    else:
        points = lo + np.geomspace(1e-8, tol.scan_cap, n)
    return points[(points > lo) & (points < hi)]


def displacement(params, y0, tol=None):
    """delta(y0) = y_R(y0) - y_L(y0)."""
    tol = tol or get_tolerances()
    left, right = params.left, params.right
    spec_l = halfmap.build_spec(left.a, left.trace, left.det, Side.LEFT_FORWARD, tol=tol)
    spec_r = halfmap.build_spec(right.a, right.trace, right.det, Side.RIGHT_BACKWARD, tol=tol)
    disp = Displacement(params, spec_l, spec_r, tol)
    if y0 not in disp.interval:
        throw(f"y0={y0:g} outside I = [{disp.interval.lo:g}, {disp.interval.hi:g})", DomainError)
    return disp(y0)


def delta_prime_sign(params, y0, y1, inv=None):
    inv = inv or invariants(params)
    return _sign(crossing_form(inv, y0, y1))


def delta_second_sign(params, y0, y1, inv=None, tol=None):
    """sign(delta'') at a double zero, from both sides of the crossing form.

    Returns sign(T_L*(c2*y0 + c0)), which must equal -sign(T_R*(c2*y1 + c0));
    a disagreement where both are clearly non-zero raises AssertionError.
    """
    inv = inv or invariants(params)
    tol = tol or get_tolerances()
    left = params.t_l * (inv.c2 * y0 + inv.c0)
    right = params.t_r * (inv.c2 * y1 + inv.c0)
    left_scale = abs(params.t_l) * (abs(inv.c2 * y0) + abs(inv.c0))
    right_scale = abs(params.t_r) * (abs(inv.c2 * y1) + abs(inv.c0))
    s_l = 0 if abs(left) <= tol.identity_rtol * left_scale else _sign(left)
    s_r = 0 if abs(right) <= tol.identity_rtol * right_scale else -_sign(right)
    if s_l and s_r and s_l != s_r:
        raise AssertionError(
            f"Second-derivative signs disagree at ({y0:g}, {y1:g}): "
            f"T_L*(c2*y0+c0)={left:g}, T_R*(c2*y1+c0)={right:g}"
        )
    return s_l


# -------------------------------------------------------------------
# Limit cycle
# -------------------------------------------------------------------


@dataclass(frozen=True)
class LimitCycleReport:
    y0_star: float
    y1_star: float
    delta_prime: float
    crossing_form: float
    stability: Stability
    period: float
    oracle_residual: float

    def as_dict(self):
        return {
            "y0_star": self.y0_star,
            "y1_star": self.y1_star,
            "delta_prime": _finite_or_none(self.delta_prime),
            "crossing_form": self.crossing_form,
            "stability": self.stability.value,
            "period": _finite_or_none(self.period),
            "oracle_residual": _finite_or_none(self.oracle_residual),
        }


def necessary_conditions(params):
    """(a_L^2 + a_R^2 != 0, T_L*T_R < 0, c0^2 + (c1*c2)^2 != 0)."""
    inv = invariants(params)
    return (
        params.a_l**2 + params.a_r**2 != 0,
        params.t_l * params.t_r < 0,
        inv.c0**2 + (inv.c1 * inv.c2) ** 2 != 0,
    )


def find_limit_cycle(params, tol=None):
    """The crossing limit cycle, or None.

    None when a necessary condition fails, a half-map is missing, the
    common domain is empty or delta has no zero on it.
    """
    tol = tol or get_tolerances()
    if not all(necessary_conditions(params)):
        return None
    disp = Displacement.from_params(params, tol)
    if disp is None:
        return None
    return _cycle_from_scan(params, disp, disp.scan(), invariants(params), tol)


def _cycle_from_scan(params, disp, scan, inv, tol):
    if scan.continuum or not scan.zeros:
        return None

    scale = 1.0 + abs(inv.c0) + abs(inv.c1) + abs(inv.c2)
    candidates = []
    for y0 in scan.zeros:
        y_l, y_r = disp.images(y0)
        if abs(y_r - y_l) > tol.cycle_tol * (1.0 + y0 + abs(y_l) + abs(y_r)):
            throw(f"delta({y0:g}) = {y_r - y_l:g} not below the cycle tolerance", ConvergenceError)
        f = crossing_form(inv, y0, y_l)
        candidates.append((y0, y_l, f, abs(f) > tol.simple_zero * scale))

    simple = [c for c in candidates if c[3]]
    if len(simple) > 1:
        found = ", ".join(f"{c[0]:.12g}" for c in simple)
        throw(f"delta has {len(simple)} simple zeros ({found})", UniquenessViolation)
    if _xi_vanishes(params, inv, tol):
        throw(f"delta vanishes at y0={candidates[0][0]:g} while xi = {inv.xi:g}", UniquenessViolation)

    if simple:
        y0, y1, f, _ = simple[0]
        stability = Stability.ATTRACTING if inv.xi < 0 else Stability.REPELLING
        if _sign(f) != _sign(inv.xi):
            throw(f"sign(F)={_sign(f)} but sign(xi)={_sign(inv.xi)} at y0={y0:g}", InconsistentVerdict)
    else:
        y0, y1, f, _ = candidates[0]
        stability = Stability.INDETERMINATE
        logger.warning("Zero of delta at y0=%g is not simple (F=%g)", y0, f)

    d1_l, _ = halfmap.derivatives(disp.spec_l, y0, y1)
    d1_r, _ = halfmap.derivatives(disp.spec_r, y0, y1)
    delta_prime = d1_r - d1_l
    if simple and _sign(delta_prime) != _sign(f):
        throw(f"delta'={delta_prime:g} disagrees with F={f:g} at y0={y0:g}", InconsistentVerdict)

    residual, period = flow_oracle.verify_cycle(params, y0, tol)
    if residual > tol.oracle_tol * (1.0 + y0 + abs(y1)):
        logger.warning("Oracle residual %g at y0*=%g exceeds %g", residual, y0, tol.oracle_tol)

    logger.info("Limit cycle at y0*=%.12g (%s), period %g", y0, stability.value, period)
    return LimitCycleReport(
        y0_star=y0,
        y1_star=y1,
        delta_prime=delta_prime,
        crossing_form=f,
        stability=stability,
        period=period,
        oracle_residual=residual,
    )


def contraction_agrees(params, cycle, rel_eps=1e-3, tol=None):
    """Whether the oracle return map pulls (or pushes) y0* +- eps as claimed.

    eps is rel_eps*y0*, shrunk to half the distance from y0* to either end
    of I.
    """
    if cycle.stability is Stability.INDETERMINATE:
        return False
    disp = Displacement.from_params(params, tol)
    if disp is None:
        return False
    lo, hi = disp.interval.lo, disp.interval.hi
    eps = min(rel_eps * cycle.y0_star, 0.5 * (hi - cycle.y0_star), 0.5 * (cycle.y0_star - lo))
    if not eps > 0:
        return False
    moves = []
    for y in (cycle.y0_star - eps, cycle.y0_star + eps):
        turn = flow_oracle.return_map(params, y, tol)
        if turn is None:
            return False
        moves.append(abs(turn[0] - cycle.y0_star))
    if cycle.stability is Stability.ATTRACTING:
        return all(m < eps for m in moves)
    return all(m > eps for m in moves)


# -------------------------------------------------------------------
# Origin and infinity
# -------------------------------------------------------------------


def _infinity_mu(spec_l, spec_r):
    return spec_l.trace / math.sqrt(4 * spec_l.det - spec_l.trace**2) + spec_r.trace / math.sqrt(
        4 * spec_r.det - spec_r.trace**2
    )


def infinity_mu(params, tol=None):
    """T_L/sqrt(4D_L - T_L^2) + T_R/sqrt(4D_R - T_R^2) for two foci."""
    tol = tol or get_tolerances()
    left, right = params.left, params.right
    if not (left.is_focus(tol.degenerate_disc) and right.is_focus(tol.degenerate_disc)):
        throw("Infinity is monodromic only when both zones are foci", NotApplicable)
    return left.trace / math.sqrt(left.disc) + right.trace / math.sqrt(right.disc)


def origin_quadratic_coeff(params):
    """k in delta(y0) = k*y0^2 + O(y0^3) when a_L > 0 > a_R."""
    if not (params.a_l > 0 > params.a_r):
        throw("The origin expansion needs a_L > 0 > a_R", PreconditionViolation)
    xi = params.a_r * params.t_l - params.a_l * params.t_r
    return 2.0 * xi / (3.0 * params.a_l * params.a_r)


def _origin_monodromic(params, tol):
    left, right = params.left, params.right
    left_ok = params.a_l > 0 or (params.a_l == 0 and left.is_focus(tol.degenerate_disc))
    right_ok = params.a_r < 0 or (params.a_r == 0 and right.is_focus(tol.degenerate_disc))
    return left_ok and right_ok


def classify_origin(params, tol=None):
    tol = tol or get_tolerances()
    if not _origin_monodromic(params, tol):
        return OriginClass.NOT_MONODROMIC

    if params.a_l > 0 > params.a_r:
        inv = invariants(params)
        if _xi_vanishes(params, inv, tol):
            return OriginClass.MONODROMIC_UNDETERMINED
        return OriginClass.MONODROMIC_ATTRACTING if inv.xi > 0 else OriginClass.MONODROMIC_REPELLING

    if params.a_l == 0 and params.a_r == 0:
        # both half-maps are linear: delta has the sign of mu times y0
        mu = infinity_mu(params, tol)
        scale = abs(params.t_l) / math.sqrt(params.left.disc) + abs(params.t_r) / math.sqrt(params.right.disc)
        if abs(mu) <= tol.identity_rtol * scale:
            return OriginClass.MONODROMIC_UNDETERMINED
        return OriginClass.MONODROMIC_ATTRACTING if mu < 0 else OriginClass.MONODROMIC_REPELLING

    return OriginClass.MONODROMIC_UNDETERMINED


def classify_infinity(params, tol=None):
    tol = tol or get_tolerances()
    left, right = params.left, params.right
    if not (left.is_focus(tol.degenerate_disc) and right.is_focus(tol.degenerate_disc)):
        return InfinityClass.NOT_MONODROMIC

    mu = infinity_mu(params, tol)
    scale = abs(left.trace) / math.sqrt(left.disc) + abs(right.trace) / math.sqrt(right.disc)
    if abs(mu) <= tol.identity_rtol * scale:
        return InfinityClass.UNDETERMINED

    if params.t_l * params.t_r < 0:
        c_inf = invariants(params).c_inf
        c_scale = abs(params.t_l) * (params.t_l**2 * abs(params.d_r) + params.t_r**2 * abs(params.d_l))
        if abs(c_inf) > tol.identity_rtol * c_scale and _sign(c_inf) != _sign(mu):
            throw(f"sign(mu)={_sign(mu)} disagrees with sign(c_inf)={_sign(c_inf)}", InconsistentVerdict)

    return InfinityClass.ATTRACTING if mu > 0 else InfinityClass.REPELLING


@dataclass(frozen=True)
class Singularity:
    # "origin", "left_equilibrium" or "right_equilibrium"
    kind: str
    x: float
    y: float


def monodromic_singularities(params, tol=None):
    """Monodromic points of the full system: the origin tangency and real foci."""
    tol = tol or get_tolerances()
    out = []
    if _origin_monodromic(params, tol):
        out.append(Singularity("origin", 0.0, 0.0))
    for kind, zone, real in (
        ("left_equilibrium", params.left, lambda x: x < 0),
        ("right_equilibrium", params.right, lambda x: x > 0),
    ):
        if zone.det == 0 or not zone.is_focus(tol.degenerate_disc):
            continue
        x = zone.a / zone.det
        if real(x):
            out.append(Singularity(kind, x, zone.trace * x))
    return out


def existence_sufficient(params, tol=None):
    """Whether a limit cycle is guaranteed: all hypotheses plus xi*c_inf > 0."""
    tol = tol or get_tolerances()
    left, right = params.left, params.right
    inv = invariants(params)
    if not (params.t_l * params.t_r < 0 and inv.c0 != 0):
        return False
    if not (left.is_focus(tol.degenerate_disc) and right.is_focus(tol.degenerate_disc)):
        return False
    if len(monodromic_singularities(params, tol)) != 1:
        return False
    spec_l = halfmap.build_spec(left.a, left.trace, left.det, Side.LEFT_FORWARD, strict=False, tol=tol)
    spec_r = halfmap.build_spec(right.a, right.trace, right.det, Side.RIGHT_BACKWARD, strict=False, tol=tol)
    if not (spec_l.exists and spec_r.exists):
        return False
    return inv.xi * inv.c_inf > 0


@dataclass(frozen=True)
class SingularityVerdict:
    singularity: Singularity
    stability: Stability

    def as_dict(self):
        point = self.singularity
        return {"kind": point.kind, "x": point.x, "y": point.y, "stability": self.stability.value}


def classify_monodromic_singularity(params, tol=None):
    """Stability of the unique monodromic singularity, None unless there is exactly one.

    Rules:
    - the origin takes the classify_origin verdict
    - a focus off the line is attracting iff its zone trace is negative;
      a center (zero trace) is indeterminate
    - with T_L*T_R < 0, c0 != 0 and both half-maps defined the verdict is
      attracting iff xi > 0; a disagreement raises InconsistentVerdict
    """
    tol = tol or get_tolerances()
    census = monodromic_singularities(params, tol)
    if len(census) != 1:
        return None
    point = census[0]

    if point.kind == "origin":
        stability = {
            OriginClass.MONODROMIC_ATTRACTING: Stability.ATTRACTING,
            OriginClass.MONODROMIC_REPELLING: Stability.REPELLING,
        }.get(classify_origin(params, tol), Stability.INDETERMINATE)
    else:
        trace = params.t_l if point.kind == "left_equilibrium" else params.t_r
        if trace == 0:
            stability = Stability.INDETERMINATE
        else:
            stability = Stability.ATTRACTING if trace < 0 else Stability.REPELLING

    inv = invariants(params)
    if stability is not Stability.INDETERMINATE and params.t_l * params.t_r < 0 and inv.c0 != 0:
        left, right = params.left, params.right
        spec_l = halfmap.build_spec(left.a, left.trace, left.det, Side.LEFT_FORWARD, strict=False, tol=tol)
        spec_r = halfmap.build_spec(right.a, right.trace, right.det, Side.RIGHT_BACKWARD, strict=False, tol=tol)
        if spec_l.exists and spec_r.exists and not _xi_vanishes(params, inv, tol):
            expected = Stability.ATTRACTING if inv.xi > 0 else Stability.REPELLING
            if expected is not stability:
                throw(
                    f"{point.kind} is {stability.value} but xi={inv.xi:g} says {expected.value}",
                    InconsistentVerdict,
                )

    logger.debug("Monodromic %s at (%g, %g): %s", point.kind, point.x, point.y, stability.value)
    return SingularityVerdict(point, stability)


# -------------------------------------------------------------------
# Full analysis
# -------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisReport:
    sewing: object
    params: object
    specs: tuple
    invariants: CycleInvariants
    necessary_ok: tuple
    sufficient: bool
    origin_class: OriginClass
    infinity_class: InfinityClass
    infinity_mu: float | None
    singularity: SingularityVerdict | None
    periodic_continuum: bool
    cycle: LimitCycleReport | None

    def as_dict(self):
        left, right = self.specs
        inhomogeneous, opposite_traces, nondegenerate = self.necessary_ok
        return _clean(
            {
                "sewing": (
                    {"status": self.sewing.status.value, "detail": self.sewing.detail} if self.sewing else None
                ),
                "params": self.params.as_dict(),
                "half_maps": {"left": left.as_dict(), "right": right.as_dict()},
                "invariants": self.invariants.as_dict(),
                "necessary_conditions": {
                    "inhomogeneous": inhomogeneous,
                    "opposite_traces": opposite_traces,
                    "nondegenerate_crossing_form": nondegenerate,
                },
                "existence_sufficient": self.sufficient,
                "origin": self.origin_class.value,
                "infinity": self.infinity_class.value,
                "infinity_mu": self.infinity_mu,
                "monodromic_singularity": self.singularity.as_dict() if self.singularity else None,
                "periodic_continuum": self.periodic_continuum,
                "cycle": self.cycle.as_dict() if self.cycle else None,
            }
        )


def _clean(value):
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, float):
        return _finite_or_none(value)
    return value


def analyze(params, sewing=None, tol=None):
    tol = tol or get_tolerances()
    left, right = params.left, params.right
    spec_l = halfmap.build_spec(left.a, left.trace, left.det, Side.LEFT_FORWARD, strict=False, tol=tol)
    spec_r = halfmap.build_spec(right.a, right.trace, right.det, Side.RIGHT_BACKWARD, strict=False, tol=tol)
    inv = invariants(params)
    necessary = necessary_conditions(params)

    infinity_class = classify_infinity(params, tol)
    mu = None if infinity_class is InfinityClass.NOT_MONODROMIC else infinity_mu(params, tol)

    continuum = False
    cycle = None
    if spec_l.exists and spec_r.exists:
        disp = Displacement(params, spec_l, spec_r, tol)
        if disp.interval.lo < disp.interval.hi:
            scan = disp.scan()
            continuum = scan.continuum
            if all(necessary):
                cycle = _cycle_from_scan(params, disp, scan, inv, tol)

    report = AnalysisReport(
        sewing=sewing,
        params=params,
        specs=(spec_l, spec_r),
        invariants=inv,
        necessary_ok=necessary,
        sufficient=existence_sufficient(params, tol),
        origin_class=classify_origin(params, tol),
        infinity_class=infinity_class,
        infinity_mu=mu,
        singularity=classify_monodromic_singularity(params, tol),
        periodic_continuum=continuum,
        cycle=cycle,
    )
    logger.info(
        "Analysis done: origin=%s infinity=%s cycle=%s",
        report.origin_class.value,
        report.infinity_class.value,
        "none" if cycle is None else f"{cycle.y0_star:.12g}",
    )
    return report

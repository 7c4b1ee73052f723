"""Poincaré half-maps of one zone from their integral characterization.

For a zone x' = T*x - y, y' = D*x - a, the forward half-map y0 -> y1 of the
left zone is the unique solution of

    PV int_{y1}^{y0} -y / W(y) dy = q,      W(y) = D*y**2 - a*T*y + a**2,

where q depends only on the sign of a. The backward half-map of a right zone
(a, T, D) is the forward left half-map of (-a, -T, D). W is the same
polynomial for both, so one solver serves both sides; only the existence
gate, q and the domain endpoints use the left-equivalent (a, T).
"""

import enum
import logging
import math
from dataclasses import dataclass, replace

from scipy import integrate, optimize

from pwlcycle.exceptions import (
    ConvergenceError,
    DomainError,
    NotApplicable,
    NotDefined,
    PreconditionViolation,
    ValidationError,
    throw,
)
from pwlcycle.settings import get_tolerances

logger = logging.getLogger(__name__)

_RTOL = 4 * 2.220446049250313e-16  # smallest rtol brentq accepts
_TINY = 1e-300
_HUGE = 1e300


class Side(str, enum.Enum):
    LEFT_FORWARD = "left_forward"
    RIGHT_BACKWARD = "right_backward"


class Sensitivity(str, enum.Enum):
    WRT_T = "wrt_t"
    WRT_A = "wrt_a"


@dataclass(frozen=True)
class Interval:
    """[lo, hi), hi possibly +inf."""

    lo: float
    hi: float

    def __contains__(self, y):
        return self.lo <= y < self.hi

    def is_interior(self, y):
        return self.lo < y < self.hi

    @property
    def bounded(self):
        return math.isfinite(self.hi)


@dataclass(frozen=True)
class HalfMapSpec:
    side: Side
    a: float
    trace: float
    det: float
    exists: bool
    focus: bool
    # shape of W: homogeneous, constant, linear, focus, degenerate or real
    w_kind: str
    q: float = 0.0
    roots: tuple = ()
    domain: Interval | None = None
    image_lo: float = -math.inf
    image_hi: float = 0.0

    @property
    def left_a(self):
        return self.a if self.side is Side.LEFT_FORWARD else -self.a

    @property
    def left_trace(self):
        return self.trace if self.side is Side.LEFT_FORWARD else -self.trace

    def as_dict(self):
        if not self.exists:
            return {"side": self.side.value, "exists": False, "status": "not_defined"}
        return {
            "side": self.side.value,
            "exists": True,
            "status": "defined",
            "q": self.q,
            "domain": [self.domain.lo, _finite_or_none(self.domain.hi)],
            "image": [_finite_or_none(self.image_lo), self.image_hi],
        }


@dataclass(frozen=True)
class HalfMapEval:
    y0: float
    y1: float
    residual: float


def _finite_or_none(value):
    return value if math.isfinite(value) else None


# -------------------------------------------------------------------
# Spec construction
# -------------------------------------------------------------------


def build_spec(a, T, D, side, strict=True, tol=None):
    """Existence gate, q, domain and image of one half-map.

    Rules (in the left-equivalent parameters a', T'):
    - exists iff a' > 0, or 4D - T^2 > 0
    - domain.hi is the smallest positive root of W, image_lo the largest
      negative one (infinite when there is none)
    - domain.lo > 0 iff a' < 0, focus and T' < 0; it is solved from
      PV int_0^lo -y/W = q
    - image_hi = y(0) < 0 iff a' < 0, focus and T' > 0

    With ``strict`` a failing gate raises NotDefined, otherwise a spec with
    ``exists=False`` is returned.
    """
    tol = tol or get_tolerances()
    side = Side(side)
    for name, value in (("a", a), ("T", T), ("D", D)):
        if not math.isfinite(value):
            throw(f"Half-map parameter {name} must be finite, got {value!r}", ValidationError)
    a, T, D = float(a), float(T), float(D)

    disc = 4.0 * D - T * T
    threshold = tol.degenerate_disc * T * T
    focus = disc > 0.0
    a_eff, t_eff = (a, T) if side is Side.LEFT_FORWARD else (-a, -T)
    kind = _w_kind(a, T, D, disc, threshold)
    if kind == "degenerate" and focus and a_eff <= 0:
        # a non-positive effective a needs the focus form of W
        kind = "focus"

    if not (a_eff > 0 or focus):
        message = (
            f"{side.value} half-map is not defined for a={a:g}, T={T:g}, D={D:g}: "
            "a non-positive effective a needs 4D - T^2 > 0"
        )
        if strict:
            throw(message, NotDefined)
        logger.debug(message)
        return HalfMapSpec(side, a, T, D, exists=False, focus=focus, w_kind=kind)

    roots = _w_roots(a, T, D, kind)
    mu = min((r for r in roots if r > 0), default=math.inf)
    image_lo = max((r for r in roots if r < 0), default=-math.inf)

    spec = HalfMapSpec(
        side,
        a,
        T,
        D,
        exists=True,
        focus=focus,
        w_kind=kind,
        q=_q_constant(a_eff, t_eff, D, disc),
        roots=roots,
        domain=Interval(0.0, mu),
        image_lo=image_lo,
    )

    if a_eff < 0 and focus and t_eff < 0:
        spec = replace(spec, domain=Interval(_solve_domain_lo(spec, tol), mu))
    elif a_eff < 0 and focus and t_eff > 0:
        y1, _ = _solve_image(spec, 0.0, tol)
        spec = replace(spec, image_hi=y1)

    logger.debug(
        "Built %s spec a=%g T=%g D=%g: q=%g domain=[%g, %g) image=(%g, %g]",
        side.value, a, T, D, spec.q, spec.domain.lo, spec.domain.hi, spec.image_lo, spec.image_hi,
    )
    return spec


def _w_kind(a, T, D, disc, threshold):
    if a == 0.0:
        return "homogeneous"
    if D == 0.0:
        return "constant" if T == 0.0 else "linear"
    if disc > threshold:
        return "focus"
    if disc >= -threshold:
        return "degenerate"
    return "real"


def _w_roots(a, T, D, kind):
    if kind == "linear":
        return (a / T,)
    if kind == "degenerate":
        r = a * T / (2.0 * D)
        return (r, r)
    if kind == "real":
        s = abs(a) * math.sqrt(T * T - 4.0 * D)
        b = -a * T
        half = -0.5 * (b + math.copysign(s, b))
        return tuple(sorted((half / D, a * a / half)))
    return ()


def _q_constant(a_eff, t_eff, D, disc):
    if a_eff > 0:
        return 0.0
    factor = 1.0 if a_eff == 0 else 2.0
    return factor * math.pi * t_eff / (D * math.sqrt(disc))


# -------------------------------------------------------------------
# W and the principal-value integral
# -------------------------------------------------------------------


def w(spec, y):
    """W(y), in factored form when W has two real roots."""
    a, T, D = spec.a, spec.trace, spec.det
    if spec.w_kind == "real":
        r1, r2 = spec.roots
        return D * (y - r1) * (y - r2)
    if spec.w_kind == "linear":
        return -a * T * (y - spec.roots[0])
    return D * y * y - a * T * y + a * a


def graph_field(spec, y0, y1):
    """Cubic field X(y0, y1) = -(y1*W(y0), y0*W(y1)) tangent to the graph."""
    return -y1 * w(spec, y0), -y0 * w(spec, y1)


def pv_integral(spec, y1, y0):
    """PV int_{y1}^{y0} -y/W(y) dy in closed form."""
    if not spec.exists:
        throw(f"{spec.side.value} half-map is not defined", NotDefined)
    if y1 > 0 or y0 < 0:
        throw(f"pv_integral needs y1 <= 0 <= y0, got y1={y1!r}, y0={y0!r}", PreconditionViolation)
    if spec.w_kind == "homogeneous":
        if y0 == 0 and y1 == 0:
            return 0.0
        if y0 == 0 or y1 == 0:
            throw("W = D*y^2: the principal value needs both endpoints away from 0", DomainError)
    for r in spec.roots:
        if r != 0 and y1 <= r <= y0:
            throw(f"W vanishes at y={r:g} inside [{y1:g}, {y0:g}]", DomainError)
    return _definite(spec, y1, y0)


def _definite(spec, y1, y0):
    try:
        return _closed_form(spec, y1, y0)
    except (ValueError, ZeroDivisionError) as e:
        raise DomainError(f"PV integral undefined on [{y1:.17g}, {y0:.17g}]: {e}") from e


def _closed_form(spec, y1, y0):
    a, T, D = spec.a, spec.trace, spec.det
    kind = spec.w_kind
    span = y0 - y1
    if span == 0.0:
        return 0.0

    if kind == "homogeneous":
        return -math.log(abs(y0 / y1)) / D
    if kind == "constant":
        return (y1 * y1 - y0 * y0) / (2.0 * a * a)
    if kind == "linear":
        base = a - T * y1
        z = -T * span / base
        return _log1p_minus(z, (a - T * y0) / base) / (T * T) - span * y1 / (a * base)
    if kind == "real":
        r1, r2 = spec.roots
        c1 = -r1 / (D * (r1 - r2))
        c2 = r2 / (D * (r1 - r2))
        return c1 * _log_shift(r1, y1, y0) + c2 * _log_shift(r2, y1, y0)
    if kind == "degenerate":
        r = spec.roots[0]
        return -(_log_shift(r, y1, y0) + r * span / ((y1 - r) * (y0 - r))) / D

    # focus: log of W ratio plus an arctangent difference
    scale = abs(a) * math.sqrt(4.0 * D - T * T)
    u0 = (2.0 * D * y0 - a * T) / scale
    u1 = (2.0 * D * y1 - a * T) / scale
    log_ratio = math.log1p(span * (D * (y0 + y1) - a * T) / w(spec, y1))
    angle = math.atan2(2.0 * D * span / scale, 1.0 + u0 * u1)
    return -log_ratio / (2.0 * D) - a * T / (D * scale) * angle


def _log_shift(r, y1, y0):
    """log((y0 - r) / (y1 - r)) for a root r outside [y1, y0]; the ratio form near r."""
    z = (y0 - y1) / (y1 - r)
    if abs(z) < 0.5:
        return math.log1p(z)
    return math.log((y0 - r) / (y1 - r))


def _log1p_minus(z, ratio):
    """log1p(z) - z without cancellation for small z; ratio is 1 + z."""
    if abs(z) < 1e-4:
        return z * z * (-0.5 + z * (1.0 / 3.0 + z * (-0.25 + z * 0.2)))
    return math.log(ratio) - z


# -------------------------------------------------------------------
# Evaluation
# -------------------------------------------------------------------


def eval(spec, y0, tol=None):
    """y1 = y(y0) by bracketed root finding on y1 -> PV int_{y1}^{y0} - q.

    The map is strictly decreasing in y1 on (image_lo, 0) since its
    derivative is y1/W(y1) < 0, so one sign change brackets the root.
    """
    tol = tol or get_tolerances()
    if not spec.exists:
        throw(f"{spec.side.value} half-map is not defined", NotDefined)
    if not math.isfinite(y0) or y0 < 0:
        throw(f"y0 must be finite and non-negative, got {y0!r}", DomainError)
    dom = spec.domain
    slack = 8 * _RTOL * max(1.0, dom.lo)
    if not math.isfinite(dom.lo) or y0 < dom.lo - slack or y0 >= dom.hi:
        throw(f"y0={y0:.17g} outside the domain [{dom.lo:.17g}, {dom.hi:.17g})", DomainError)

    y1, residual = _solve_image(spec, y0, tol)
    return HalfMapEval(y0=y0, y1=y1, residual=residual)


def _solve_image(spec, y0, tol):
    q = spec.q

    def g(y1):
        return _definite(spec, y1, y0) - q

    if spec.w_kind == "homogeneous":
        if y0 == 0.0:
            return 0.0, 0.0
        hi = -y0
        for _ in range(400):
            if g(hi) < 0:
                break
            hi *= 1e-2
        else:
            throw(f"No upper bracket for y0={y0:g}", ConvergenceError)
    else:
        hi = 0.0
        g_hi = g(hi)
        if g_hi >= 0.0:
            # y0 is the left domain endpoint (or y0 = 0 with q = 0)
            return 0.0, g_hi

    lo = _lower_bracket(spec, g, hi, y0)
    xtol = max(tol.root_xtol * abs(y0), _TINY)
    try:
        y1 = optimize.brentq(g, lo, hi, xtol=xtol, rtol=_RTOL, maxiter=400)
    except (RuntimeError, ValueError) as e:
        raise ConvergenceError(f"Half-map solve failed at y0={y0:g}: {e}") from e
    return y1, g(y1)


def _lower_bracket(spec, g, hi, y0):
    edge = spec.image_lo
    if math.isfinite(edge):
        # g -> +inf at a simple root of W; approach it geometrically
        for k in range(1, 80):
            lo = hi + (edge - hi) * (1.0 - 2.0**-k)
            if lo <= edge:
                break
            if g(lo) > 0:
                return lo
        throw(f"Image bracket not found for y0={y0:g} near image_lo={edge:g}", ConvergenceError)

    step = max(1.0, abs(hi), y0)
    while step < _HUGE:
        lo = hi - step
        if g(lo) > 0:
            return lo
        step *= 2.0
    throw(f"Image bracket not found for y0={y0:g}", ConvergenceError)


def _solve_domain_lo(spec, tol):
    q = spec.q

    def h(y0):
        return _definite(spec, 0.0, y0) - q

    hi = max(1.0, abs(spec.a))
    while True:
        value = h(hi)
        if not math.isfinite(value) or hi > _HUGE:
            logger.warning("Left domain endpoint beyond floating range (q=%g): empty domain", q)
            return math.inf
        if value < 0:
            break
        hi *= 2.0
    return optimize.brentq(h, 0.0, hi, xtol=max(tol.root_xtol * hi, _TINY), rtol=_RTOL, maxiter=400)


# -------------------------------------------------------------------
# Local data of the graph
# -------------------------------------------------------------------


def derivatives(spec, y0, y1):
    """First and second derivative of the half-map at (y0, y1)."""
    if y1 == 0:
        throw("Derivatives are undefined where y1 = 0", DomainError)
    w0, w1 = w(spec, y0), w(spec, y1)
    if w0 <= 0:
        throw(f"W(y0) = {w0:g} <= 0: y0 is not interior", DomainError)
    a = spec.a
    d1 = y0 * w1 / (y1 * w0)
    d2 = -a * a * (y0 * y0 - y1 * y1) * w1 / (y1**3 * w0 * w0)
    return d1, d2


def taylor_quadratic_coeff(spec):
    """c in y(y0) = -y0 + c*y0**2 + O(y0**3) near the origin."""
    if not spec.exists:
        throw(f"{spec.side.value} half-map is not defined", NotDefined)
    if spec.a == 0 or spec.domain.lo != 0 or spec.image_hi != 0:
        throw("Taylor expansion at the origin needs a != 0 and y(0) = 0", PreconditionViolation)
    return -2.0 * spec.trace / (3.0 * spec.a)


def asymptotic_ratio(spec):
    """lim y1/y0 (left) or lim y0/y1 (right) as y0 -> infinity."""
    disc = 4.0 * spec.det - spec.trace * spec.trace
    if disc <= 0:
        throw(f"No focus at infinity: 4D - T^2 = {disc:g}", NotApplicable)
    return -math.exp(math.pi * spec.trace / math.sqrt(disc))


def sensitivity(spec, y0, y1, which, tol=None):
    """Derivative of y1 with respect to T or a at fixed y0.

    WRT_T needs q independent of T (positive effective a), WRT_A needs q
    independent of a (negative effective a and a focus).
    """
    tol = tol or get_tolerances()
    which = Sensitivity(which)
    a, T = spec.a, spec.trace
    if y1 == 0:
        throw("Sensitivities are undefined where y1 = 0", DomainError)

    if which is Sensitivity.WRT_T:
        if not spec.exists or spec.left_a <= 0:
            throw("d y1/dT needs a positive effective a", PreconditionViolation)
        integral, _ = integrate.quad(
            lambda y: (y / w(spec, y)) ** 2, y1, y0, epsabs=tol.quad_epsabs, epsrel=1e-12, limit=200
        )
        return a * w(spec, y1) / y1 * integral

    if not spec.exists or spec.left_a >= 0 or not spec.focus:
        throw("d y1/da needs a negative effective a and a focus", PreconditionViolation)
    return (y0 - y1) * (T * y0 * y1 - a * (y0 + y1)) / (y1 * w(spec, y0))

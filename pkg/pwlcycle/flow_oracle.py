"""Closed-form flow of each linear zone and the crossing-time oracle.

Everything here comes from the explicit 2x2 matrix exponential

    exp(M t) = exp(l t) * (C(t) I + S(t) (M - l I)),    l = T/2,

with (C, S) = (cos wt, sin(wt)/w), (cosh kt, sinh(kt)/k) or (1, t) by
spectrum. None of it uses the integral characterization, so it serves as
ground truth for the half-maps.
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from pwlcycle.canonical import ZoneParams
from pwlcycle.exceptions import ConvergenceError, NotClosed, ValidationError, throw
from pwlcycle.settings import get_tolerances

logger = logging.getLogger(__name__)

_MAX_SWITCHES = 100_000
# a state resting on the switching line is reported in the closed left zone
_RESTING_SIDE = "L"


class SpectrumTag(str, enum.Enum):
    COMPLEX_PAIR = "complex_pair"
    REAL_DISTINCT = "real_distinct"
    REAL_REPEATED = "real_repeated"
    SINGULAR_ZERO_EIGEN = "singular_zero_eigen"


class Direction(str, enum.Enum):
    FORWARD_FROM_LEFT = "forward_from_left"
    BACKWARD_FROM_RIGHT = "backward_from_right"


@dataclass(frozen=True)
class FlowState:
    x: float
    y: float
    t: float = 0.0
    # zone label of a sampled point: "L", "R" or "" when not tracked
    side: str = ""


@dataclass(frozen=True)
class SpectrumCase:
    tag: SpectrumTag
    half_trace: float
    # w for complex pairs, k for real distinct (and singular with T != 0)
    rate: float

    @property
    def eigenvalues(self):
        lam, r = self.half_trace, self.rate
        if self.tag is SpectrumTag.COMPLEX_PAIR:
            return complex(lam, r), complex(lam, -r)
        return lam + r, lam - r


def classify_spectrum(T, D, tol=None):
    tol = tol or get_tolerances()
    threshold = tol.spectrum_eps * max(1.0, T * T)
    if abs(D) <= threshold:
        return SpectrumCase(SpectrumTag.SINGULAR_ZERO_EIGEN, 0.5 * T, 0.5 * abs(T))
    delta = T * T - 4.0 * D
    if abs(delta) <= threshold:
        return SpectrumCase(SpectrumTag.REAL_REPEATED, 0.5 * T, 0.0)
    if delta < 0:
        return SpectrumCase(SpectrumTag.COMPLEX_PAIR, 0.5 * T, 0.5 * math.sqrt(-delta))
    return SpectrumCase(SpectrumTag.REAL_DISTINCT, 0.5 * T, 0.5 * math.sqrt(delta))


# -------------------------------------------------------------------
# Closed-form flow
# -------------------------------------------------------------------


def _cs(case, t):
    if case.tag is SpectrumTag.COMPLEX_PAIR:
        w = case.rate
        return np.cos(w * t), np.sin(w * t) / w
    if case.rate > 0:
        k = case.rate
        return np.cosh(k * t), np.sinh(k * t) / k
    return 1.0, t


def _state_at(zone, case, x0, y0, t):
    a, T, D = zone.a, zone.trace, zone.det
    with np.errstate(over="ignore", invalid="ignore"):
        if case.tag is SpectrumTag.SINGULAR_ZERO_EIGEN:
            x, y = _drift_state(a, T, x0, y0, t)
        else:
            xs, ys = a / D, T * a / D
            p1, p2 = x0 - xs, y0 - ys
            lam = case.half_trace
            c, s = _cs(case, t)
            e = np.exp(lam * t)
            x = xs + e * (c * p1 + s * (lam * p1 - p2))
            y = ys + e * (c * p2 + s * (D * p1 - lam * p2))
    return float(x), float(y)


def _drift_state(a, T, x0, y0, t):
    # D = 0: x' = T x - y, y' = -a; no equilibrium, polynomial drift in t
    u = T * t
    if abs(u) < 1e-5:
        f1 = t * (1.0 + u * (0.5 + u * (1.0 / 6.0 + u / 24.0)))
        g = t * t * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u / 120.0)))
    else:
        em1 = np.expm1(u)
        f1 = em1 / T
        g = (em1 - u) / (T * T)
    return x0 * np.exp(u) - y0 * f1 + a * g, y0 - a * t


def flow(zone, state, dt, tol=None):
    """Exact state of ``zone`` at time state.t + dt."""
    if not all(math.isfinite(v) for v in (state.x, state.y, state.t, dt)):
        throw("flow needs finite state and dt", ValidationError)
    if dt == 0:
        return FlowState(state.x, state.y, state.t, state.side)
    case = classify_spectrum(zone.trace, zone.det, tol)
    x, y = _state_at(zone, case, state.x, state.y, dt)
    return FlowState(x, y, state.t + dt, state.side)


# -------------------------------------------------------------------
# Exit times
# -------------------------------------------------------------------


def _time_scale(case):
    rate = abs(case.half_trace) + case.rate
    return 1.0 / rate if rate > 0 else 1.0


def _critical_times(case, alpha, beta, direction, horizon, min_s):
    """Times s in (min_s, horizon] where d/dt x(direction*s) vanishes.

    x'(t) = exp(l t) * (alpha*C(t) + beta*S(t)).
    """
    if alpha == 0 and beta == 0:
        return []

    if case.tag is SpectrumTag.COMPLEX_PAIR:
        w = case.rate
        period = math.pi / w
        base = direction * (math.atan2(beta / w, alpha) + 0.5 * math.pi) / w
        m = math.floor((min_s - base) / period) + 1
        out = []
        s = base + m * period
        while s <= horizon:
            out.append(s)
            m += 1
            s = base + m * period
        return out

    if case.rate > 0:
        if beta == 0:
            return []
        rho = -alpha * case.rate / beta
        if abs(rho) >= 1:
            return []
        t = math.atanh(rho) / case.rate
    else:
        if beta == 0:
            return []
        t = -alpha / beta
    s = direction * t
    return [s] if min_s < s <= horizon else []


def _complex_horizon(zone, case, x0, y0, direction, cap):
    # In (u, v) = (w p1, l p1 - p2), p = z - z*, the flow is a rotation at
    # rate w scaled by exp(l t); the line x = 0 is u = -w x*.
    w, lam = case.rate, direction * case.half_trace
    xs, ys = zone.a / zone.det, zone.trace * zone.a / zone.det
    p1, p2 = x0 - xs, y0 - ys
    rho0 = math.hypot(w * p1, case.half_trace * p1 - p2)
    dist = w * abs(xs)
    turns = 3.0 * math.pi / w
    if rho0 >= dist or lam <= 0 or rho0 == 0:
        return min(cap, turns)
    return min(cap, math.log(dist / rho0) / lam + turns)


def _exit_time(zone, case, x0, y0, inside, direction, tol):
    """Smallest s > 0 at which x(direction*s) returns to 0.

    ``inside`` is -1 for the left zone and +1 for the right one; x must keep
    that sign on (0, s). Returns None when there is no such s below the
    time cap.
    """
    a, T, D = zone.a, zone.trace, zone.det

    def h(s):
        x, _ = _state_at(zone, case, x0, y0, direction * s)
        return inside * x

    w1 = T * x0 - y0
    w2 = -a if case.tag is SpectrumTag.SINGULAR_ZERO_EIGEN else D * x0 - a
    alpha, beta = w1, case.half_trace * w1 - w2

    scale = _time_scale(case)
    min_s = 1e-12 * (1.0 + scale)
    if case.tag is SpectrumTag.COMPLEX_PAIR:
        horizon = _complex_horizon(zone, case, x0, y0, direction, tol.time_cap)
    else:
        horizon = tol.time_cap

    lo, h_lo = 0.0, inside * x0
    for s in _critical_times(case, alpha, beta, direction, horizon, min_s):
        h_s = h(s)
        if not math.isfinite(h_s):
            return None
        if h_s <= 0:
            if h_lo <= 0:
                # never entered the zone
                return None
            return _bisect_time(h, lo, s, tol)
        lo, h_lo = s, h_s

    if case.tag is SpectrumTag.COMPLEX_PAIR or h_lo <= 0:
        return None

    # monotone tail of a real spectrum
    step = scale
    s = lo + step
    while s <= horizon:
        h_s = h(s)
        if not math.isfinite(h_s):
            return None
        if h_s <= 0:
            return _bisect_time(h, lo, s, tol)
        lo = s
        step *= 2.0
        s = lo + step
    return None


def _bisect_time(h, lo, hi, tol):
    if h(hi) == 0:
        return hi
    try:
        return optimize.brentq(h, lo, hi, xtol=tol.time_xtol * (1.0 + hi), maxiter=400)
    except (RuntimeError, ValueError) as e:
        raise ConvergenceError(f"Crossing time solve failed on [{lo:g}, {hi:g}]: {e}") from e


# -------------------------------------------------------------------
# Oracle half-maps
# -------------------------------------------------------------------


def _flight(zone, y0, direction, tol):
    direction = Direction(direction)
    if y0 < 0:
        return None
    if direction is Direction.FORWARD_FROM_LEFT:
        inside, sign = -1, 1
        enters = y0 > 0 or zone.a < 0
    else:
        inside, sign = 1, -1
        enters = y0 > 0 or zone.a > 0
    if not enters:
        # tangential grazing at the origin
        return None

    case = classify_spectrum(zone.trace, zone.det, tol)
    s = _exit_time(zone, case, 0.0, y0, inside, sign, tol)
    if s is None:
        return None
    tau = sign * s
    return tau, _state_at(zone, case, 0.0, y0, tau)


def first_crossing_time(zone, y0, direction, tol=None):
    """Flight time to the switching line; negative for backward flights."""
    tol = tol or get_tolerances()
    found = _flight(zone, y0, direction, tol)
    return None if found is None else found[0]


def oracle_half_map(zone, y0, direction, tol=None):
    """y coordinate at the first return to x = 0, or None."""
    tol = tol or get_tolerances()
    found = _flight(zone, y0, direction, tol)
    return None if found is None else found[1][1]


def return_map(params, y0, tol=None):
    """Full turn: left flight from (0, y0), then right flight back.

    Returns (y0', tau_l, tau_r) with both flight times positive, or None.
    """
    tol = tol or get_tolerances()
    left = _flight(params.left, y0, Direction.FORWARD_FROM_LEFT, tol)
    if left is None:
        return None
    tau_l, (_, y1) = left
    if y1 >= 0:
        return None

    right = params.right
    case = classify_spectrum(right.trace, right.det, tol)
    tau_r = _exit_time(right, case, 0.0, y1, 1, 1, tol)
    if tau_r is None:
        return None
    _, y_back = _state_at(right, case, 0.0, y1, tau_r)
    return y_back, tau_l, tau_r


def verify_cycle(params, y0_star, tol=None):
    """(|P(y0*) - y0*|, period) of the full turn through (0, y0*)."""
    turn = return_map(params, y0_star, tol)
    if turn is None:
        throw(f"No full turn through (0, {y0_star:g})", NotClosed)
    y_back, tau_l, tau_r = turn
    return abs(y_back - y0_star), tau_l + tau_r


# -------------------------------------------------------------------
# Trajectories of the full system
# -------------------------------------------------------------------


def _zone_label(params, x, y, direction):
    """Zone a state moves into, or None for a resting point on the line."""
    if x < 0:
        return "L"
    if x > 0:
        return "R"
    if y != 0:
        # x' = -y on the line in both zones
        return "L" if (y > 0) == (direction > 0) else "R"
    if params.a_l < 0 and (direction > 0 or params.a_r <= 0):
        return "L"
    if params.a_r > 0:
        return "R"
    return None


def sample_trajectory(params, start, t_span, n, tol=None):
    """n uniformly spaced states of the full system over [t, t + t_span].

    Each zone is integrated with its closed form; the zone switches at the
    computed crossing times.
    """
    tol = tol or get_tolerances()
    if n < 2:
        throw(f"sample_trajectory needs n >= 2, got {n}", ValidationError)
    if not math.isfinite(t_span):
        throw("t_span must be finite", ValidationError)

    x, y, t_now = float(start.x), float(start.y), float(start.t)
    direction = 1 if t_span >= 0 else -1
    times = t_now + np.linspace(0.0, t_span, n)
    label = _zone_label(params, x, y, direction)
    if t_span == 0:
        return [FlowState(x, y, t_now, label or _RESTING_SIDE)] * n

    out = []
    idx = 0
    switches = 0
    while idx < n:
        if label is None:
            out.extend(FlowState(x, y, float(t), _RESTING_SIDE) for t in times[idx:])
            break

        zone = params.left if label == "L" else params.right
        case = classify_spectrum(zone.trace, zone.det, tol)
        inside = -1 if label == "L" else 1
        s_exit = _exit_time(zone, case, x, y, inside, direction, tol)
        t_exit = math.inf if s_exit is None else t_now + direction * s_exit

        while idx < n and direction * (times[idx] - t_exit) <= 0:
            xs, ys = _state_at(zone, case, x, y, times[idx] - t_now)
            out.append(FlowState(xs, ys, float(times[idx]), label))
            idx += 1
        if idx >= n:
            break

        _, y = _state_at(zone, case, x, y, t_exit - t_now)
        x, t_now = 0.0, t_exit
        label = _zone_label(params, x, y, direction)
        switches += 1
        if switches > _MAX_SWITCHES:
            throw(f"More than {_MAX_SWITCHES} zone switches before t={t_now:g}", ConvergenceError)

    logger.debug("Sampled %d states with %d zone switches", len(out), switches)
    return out

import logging

import numpy as np

from pwlcycle import halfmap
from pwlcycle.exceptions import ValidationError, throw
from pwlcycle.halfmap import Side
from pwlcycle.settings import get_tolerances

logger = logging.getLogger(__name__)

SIDES = {"left": Side.LEFT_FORWARD, "right": Side.RIGHT_BACKWARD}


def execute(filters=None):
    """Half-map of one side sampled on a uniform y0 grid.

    filters: params (CanonicalParams), side ("left"/"right"), grid
    (lo, hi, n), optional tol. Grid points outside the domain are skipped
    and counted in the returned message.
    """
    columns = [
        {"fieldname": "y0", "label": "y0", "fieldtype": "Float"},
        {"fieldname": "y1", "label": "y1", "fieldtype": "Float"},
        {"fieldname": "d1", "label": "y'(y0)", "fieldtype": "Float"},
        {"fieldname": "d2", "label": "y''(y0)", "fieldtype": "Float"},
        {"fieldname": "residual", "label": "Residual", "fieldtype": "Float"},
    ]

    filters = filters or {}
    params = filters.get("params")
    if params is None:
        throw("Please give the canonical parameters.")
    side = SIDES.get(filters.get("side", "left"))
    if side is None:
        throw(f"Side must be one of {', '.join(SIDES)}, got {filters.get('side')!r}", ValidationError)
    lo, hi, n = filters.get("grid") or (0.0, 0.0, 0)
    tol = filters.get("tol") or get_tolerances()

    zone = params.left if side is Side.LEFT_FORWARD else params.right
    spec = halfmap.build_spec(zone.a, zone.trace, zone.det, side, tol=tol)

    data = []
    skipped = 0
    for y0 in np.linspace(lo, hi, int(n)):
        y0 = float(y0)
        if y0 not in spec.domain:
            skipped += 1
            continue
        ev = halfmap.eval(spec, y0, tol)
        d1 = d2 = None
        # derivatives blow up at the tangency y1 = 0
        if ev.y1 != 0 and halfmap.w(spec, y0) > 0:
            d1, d2 = halfmap.derivatives(spec, y0, ev.y1)
        data.append({"y0": y0, "y1": ev.y1, "d1": d1, "d2": d2, "residual": ev.residual})

    logger.info("Half-map table: %d row(s), %d skipped", len(data), skipped)
    message = f"{skipped} grid point(s) outside the domain" if skipped else None
    return columns, data, message

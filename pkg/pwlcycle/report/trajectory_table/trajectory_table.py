from pwlcycle import flow_oracle
from pwlcycle.exceptions import throw
from pwlcycle.flow_oracle import FlowState


def execute(filters=None):
    columns = [
        {"fieldname": "t", "label": "t", "fieldtype": "Float"},
        {"fieldname": "x", "label": "x", "fieldtype": "Float"},
        {"fieldname": "y", "label": "y", "fieldtype": "Float"},
        {"fieldname": "side", "label": "Side", "fieldtype": "Data"},
    ]

    filters = filters or {}
    params = filters.get("params")
    if params is None:
        throw("Please give the canonical parameters.")
    x, y = filters.get("start", (0.0, 1.0))

    states = flow_oracle.sample_trajectory(
        params,
        FlowState(x, y, 0.0),
        filters.get("t_span", 10.0),
        filters.get("points", 200),
        filters.get("tol"),
    )
    data = [{"t": s.t, "x": s.x, "y": s.y, "side": s.side} for s in states]
    return columns, data

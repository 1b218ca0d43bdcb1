"""Runtime-monitored multi-robot navigation.

Past-time LTL safety monitors, regex mission matching, compliant route
planning and the multi-robot simulator, exposed from the C++ core.
"""

from ._navstack import (
    ArityMismatch,
    ConfigError,
    CyclicDefinition,
    DeadMission,
    Error,
    InvariantViolation,
    LexError,
    Matcher,
    MissingAtom,
    Monitor,
    NoCompliantRoute,
    NoPath,
    ParseError,
    SchemaError,
    UndefinedName,
    UnknownLocation,
    UnknownSort,
    format_formula,
    format_regex,
    load_trace,
    parse_trace,
    plan_route,
    plot_robot,
    render_world,
    simulate,
)


def check_trace(spec_text, name, trace):
    """Monitor verdicts for every row of a trace dict from load_trace."""
    mon = Monitor(spec_text, name)
    return [mon.step(row) for row in trace["rows"]]


__all__ = [n for n in dir() if not n.startswith("_")]

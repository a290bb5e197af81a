"""Flowthing models: parse, validate, eventize, simulate and export."""

from .constraints import Verdict, check_constraints
from .engine import Scenario, Trace, simulate
from .events import EventDef, Region, define_event, eventize, is_subevent
from .explore import brute_force_explore
from .export import make_overlay, render_trace, to_dot
from .model import Model, StageKind, new_model
from .scenario import load_scenario, parse_scenario
from .serialize import serialize
from .syntax import parse, parse_file
from .validate import validate, validate_document

__all__ = [
    "EventDef",
    "Model",
    "Region",
    "Scenario",
    "StageKind",
    "Trace",
    "Verdict",
    "brute_force_explore",
    "check_constraints",
    "define_event",
    "eventize",
    "is_subevent",
    "load_scenario",
    "make_overlay",
    "new_model",
    "parse",
    "parse_file",
    "parse_scenario",
    "render_trace",
    "serialize",
    "simulate",
    "to_dot",
    "validate",
    "validate_document",
]

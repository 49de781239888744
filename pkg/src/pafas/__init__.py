"""Worst-case performance analysis of PAFAS timed processes."""
from .parser import parse, parse_file, parse_term, render
from .semantics import Rts, Semantics, build_rts, compose_parallel, time_step, action_successors
from .syntax import ProgramEnv, canonical_key, check_well_formed

__version__ = "0.1.0"

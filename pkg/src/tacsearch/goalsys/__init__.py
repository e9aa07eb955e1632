"""Logic kernel: terms, goals, the tactic language and its interpreter."""

from .syntax import ParseError, parse_goal, parse_tactic, parse_term, print_goal, print_tactic
from .tactics import (
    BASE_SIMPSET,
    Context,
    Failure,
    Success,
    TacticOutcome,
    Timeout,
    apply_tactic,
    replay_proof,
)
from .terms import App, Equation, Goal, Var, alpha_equiv, list_subsumed

__all__ = [
    "App", "BASE_SIMPSET", "Context", "Equation", "Failure", "Goal", "ParseError",
    "Success", "TacticOutcome", "Timeout", "Var", "alpha_equiv", "apply_tactic",
    "list_subsumed", "parse_goal", "parse_tactic", "parse_term", "print_goal",
    "print_tactic", "replay_proof",
]

"""Knowledge base construction from corpus proof scripts."""

from .db import (
    GoalListDB,
    GoalListRecord,
    GoalTacticPair,
    KnowledgeBase,
    TacticDB,
    TheoremDB,
    TheoremRecord,
    load_knowledge,
    save_knowledge,
)
from .record import (
    AbstractedTactic,
    Competition,
    OutcomeCache,
    Recorder,
    abstract_tactic,
    collect_goal_list_records,
    fill_holes,
    instantiate,
    orthogonalize,
    subsumes_tactic,
    trace_units,
)
from .script import AliasDef, TheoremDecl, TheoryDecl, globalize, parse_script, split_tactic_units

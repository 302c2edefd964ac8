"""Safety model checking of CNF transition systems by partial quantifier elimination."""

from .cnf import Clause, Cnf
from .errors import ParseError, PqeCheckError, PqeTimeout, ResourceLimit, SolverTimeout, UsageError
from .fc import fc_prove
from .pp import compute_diameter, prove_property
from .pqe import PqeProblem, is_redundant, take_out
from .system import Counterexample, Holds, Trace, TransitionSystem, parse_sts

__all__ = [
    "Clause",
    "Cnf",
    "Counterexample",
    "Holds",
    "ParseError",
    "PqeCheckError",
    "PqeProblem",
    "PqeTimeout",
    "ResourceLimit",
    "SolverTimeout",
    "Trace",
    "TransitionSystem",
    "UsageError",
    "compute_diameter",
    "fc_prove",
    "is_redundant",
    "parse_sts",
    "prove_property",
    "take_out",
]

__version__ = "0.1.0"

"""Learning interface-automaton models of middleware ports and checking
networks built from them for deadlocks."""

from .automata import (
    DISABLED, QUIESCENCE, ActionSignature, ExecutionFragment, InterfaceAutomaton, MealyMachine,
    distinguishing_word, isomorphic, mealy_isomorphic, mealy_to_ia, minimize_ia, minimize_mealy,
)
from .errors import (
    AlphabetError, CompositionError, ConstructionError, DeterminismViolation, IncomparableAutomata,
    MalformedQuery, QueryTransportError, SessionStateError,
)
from .learner import LearnStats, ObservationTable, learn_ia, learn_mealy
from .mcheck import Process, ProcessNetwork, Verdict, find_deadlock, replay
from .middleware import PortKind, PortSession, make_port, reference_mealy
from .remote import RemoteSul, SulServer, connect
from .teacher import EqConfig, MealySul, Teacher, TraceCache

__version__ = "0.1.0"

__all__ = [
    "DISABLED", "QUIESCENCE", "ActionSignature", "ExecutionFragment", "InterfaceAutomaton",
    "MealyMachine", "distinguishing_word", "isomorphic", "mealy_isomorphic", "mealy_to_ia",
    "minimize_ia", "minimize_mealy",
    "AlphabetError", "CompositionError", "ConstructionError", "DeterminismViolation",
    "IncomparableAutomata", "MalformedQuery", "QueryTransportError", "SessionStateError",
    "LearnStats", "ObservationTable", "learn_ia", "learn_mealy",
    "Process", "ProcessNetwork", "Verdict", "find_deadlock", "replay",
    "PortKind", "PortSession", "make_port", "reference_mealy",
    "RemoteSul", "SulServer", "connect",
    "EqConfig", "MealySul", "Teacher", "TraceCache",
]

"""Exception types shared across midlearn."""


class ConstructionError(ValueError):
    """An automaton, port kind or network failed validation."""


class MalformedQuery(ValueError):
    """A query referenced an unknown state or action."""


class IncomparableAutomata(ValueError):
    """Two automata over different signatures were compared."""


class DeterminismViolation(RuntimeError):
    """The system under learning answered the same query two different ways."""


class QueryTransportError(ConnectionError):
    """A remote system under learning could not be reached or dropped out."""


class SessionStateError(RuntimeError):
    """A session was stepped before being reset."""


class AlphabetError(MalformedQuery):
    """A symbol is not part of the session alphabet."""


class CompositionError(ConstructionError):
    """Processes in a network do not agree on their shared actions."""

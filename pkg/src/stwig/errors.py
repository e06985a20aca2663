"""Exception types shared across the engine."""


class ValidationError(ValueError):
    """Bad user input (malformed file, invalid parameter). CLI exit code 2."""


class ParseError(ValidationError):
    """Malformed graph or query text; message carries the line number."""


class NotFoundError(ValidationError):
    """Lookup of a node id that does not exist in the graph."""


class UnmatchableQueryError(Exception):
    """A query label does not occur in the data graph, so the answer is empty.

    Not a validation error: the query is well formed, its answer is just
    known to be empty before any matching work happens.
    """

    def __init__(self, label: str):
        super().__init__(f"label {label!r} does not occur in the data graph")
        self.label = label

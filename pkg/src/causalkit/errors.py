class CausalKitError(Exception):
    """Base class for all recoverable toolkit errors."""


class GraphError(CausalKitError):
    """Invalid graph structure or graph query."""


class DataError(CausalKitError):
    """Invalid, degenerate, or insufficient data."""


class KnowledgeError(CausalKitError):
    """Inconsistent background-knowledge constraints."""

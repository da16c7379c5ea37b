class DiscoveryError(Exception):
    """Base class for every error raised by cpdag_discovery_tool"""


class ValidationError(DiscoveryError, ValueError):
    """Inputs that violate a precondition: shapes, sizes, encodings, files"""


class NotADagError(ValidationError):
    """A DAG was required but the graph has undirected edges or a cycle"""


class SingularMatrixError(ValidationError):
    """A conditioning correlation submatrix cannot be inverted"""


class NumericError(DiscoveryError, ArithmeticError):
    """Non-finite values met during inference or training"""

"""Exception types shared across cauchylab."""


class ConvergenceError(RuntimeError):
    """An iterative or adaptive computation ran out of its budget."""


class NoSignChangeError(ValueError):
    """A root bracket does not straddle a sign change."""

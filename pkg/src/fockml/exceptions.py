"""Exception types shared across the package."""


class NumericalError(Exception):
    """A numerical precondition failed (non-unitary matrix, singular solve).

    Distinguished from ValueError so callers (CLI exit code 3, HTTP 400) can
    separate numerical failures from plain configuration mistakes.
    """

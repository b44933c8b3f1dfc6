"""Error taxonomy shared by all modules.

Two failure classes cover the whole surface: arguments outside an
operation's domain, and work the library refuses to start (resource
budgets, missing prerequisites). The CLI maps them to distinct exit
codes, so the split is part of the external contract.
"""


class InputDomainError(ValueError):
    """An argument violates an operation's documented domain."""


class RefusalError(RuntimeError):
    """The operation declines to run (resource budget, empty prerequisite)."""

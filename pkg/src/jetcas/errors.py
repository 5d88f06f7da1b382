"""Exception types shared across the package."""

from __future__ import annotations


class JetcasError(Exception):
    """Base class for every error raised by the library."""


class CyclicSubstitution(JetcasError):
    def __init__(self, symbol):
        super().__init__(f"cyclic substitution through {symbol}")
        self.symbol = symbol


class UnboundSymbol(JetcasError):
    def __init__(self, symbol):
        super().__init__(f"no value bound for {symbol}")
        self.symbol = symbol


class NotSolvable(JetcasError):
    """An equation cannot be solved linearly for its leading jet."""

    def __init__(self, eq, leader=None, reason=""):
        msg = f"cannot isolate leader {leader} in {eq}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.eq = eq
        self.leader = leader


class Inconsistent(JetcasError):
    """Reduction produced a nonzero constant, so the system has no solutions."""

    def __init__(self, eq, value):
        super().__init__(f"contradiction: {eq} reduces to the nonzero constant {value}")
        self.eq = eq
        self.value = value


class MissingBaseFunc(JetcasError):
    def __init__(self, residual, funcs):
        names = ", ".join(str(f) for f in funcs)
        super().__init__(f"residual {residual} still contains unbound functions: {names}")
        self.residual = residual
        self.funcs = funcs


class NotExpressible(JetcasError):
    def __init__(self, eq, residual):
        super().__init__(f"{eq} is not expressible in the invariants; residual {residual}")
        self.eq = eq
        self.residual = residual


class BundleMismatch(JetcasError):
    pass


class DslError(JetcasError):
    """Problem in a theory file, with a source position when one is known."""

    def __init__(self, message, line=None, col=None):
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.col = col


class DslSyntaxError(DslError):
    pass


class UndeclaredName(DslError):
    pass


class IndexRangeMismatch(DslError):
    pass

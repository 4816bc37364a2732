"""Exception hierarchy shared by every ionshuttle module."""

from __future__ import annotations


class IonShuttleError(Exception):
    """Base class for all domain errors raised by ionshuttle."""

    code = "E_DOMAIN"


class QasmSyntaxError(IonShuttleError):
    code = "E_QASM_SYNTAX"

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class UnsupportedFeature(IonShuttleError):
    code = "E_QASM_UNSUPPORTED"

    def __init__(self, construct: str, line: int | None = None) -> None:
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unsupported OPENQASM construct: {construct}{where}")
        self.construct = construct
        self.line = line


class RegisterError(IonShuttleError):
    code = "E_QASM_REGISTER"


class InvalidSize(IonShuttleError, ValueError):
    code = "E_INVALID_SIZE"


class BadTopology(IonShuttleError, ValueError):
    code = "E_BAD_TOPOLOGY"


class CapacityExceeded(IonShuttleError):
    code = "E_CAPACITY"


class IllegalOp(IonShuttleError):
    code = "E_ILLEGAL_OP"

    def __init__(self, kind: str, reason: str) -> None:
        super().__init__(f"illegal {kind}: {reason}")
        self.kind = kind
        self.reason = reason


class UnknownIon(IonShuttleError, KeyError):
    code = "E_UNKNOWN_ION"

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return Exception.__str__(self)


class Stuck(IonShuttleError):
    code = "E_STUCK"


class EmptyCircuit(IonShuttleError, ValueError):
    code = "E_EMPTY_CIRCUIT"

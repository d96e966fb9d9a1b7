import os
from pathlib import Path
from typing import Optional, Sequence, Tuple


class EdmError(Exception):
    pass


class InstanceError(EdmError, ValueError):
    pass


class ParseError(InstanceError):
    """
    Raised for text that does not follow the instance file format.

    Args:
        message: Description of the problem.
        line: 1-based line number, if known.
        column: 1-based field number, if known.
    """

    def __init__(
        self, message: str, line: Optional[int] = None, column: Optional[int] = None
    ):
        location = ""
        if line is not None:
            location = f"line {line}"
            if column is not None:
                location += f", column {column}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.line = line
        self.column = column


class AsymmetryError(InstanceError):
    pass


class NegativeEntryError(InstanceError):
    pass


class NonzeroDiagonalError(InstanceError):
    pass


class WeightOutOfRange(InstanceError):
    pass


class InfeasibleMask(InstanceError):
    pass


class UnspecifiedEntry(EdmError, KeyError):
    def __init__(self, pair: Tuple[int, int]):
        super().__init__(f"Entry {pair} is not specified")
        self.pair = pair


class UnhousedPair(EdmError, KeyError):
    def __init__(self, pair: Tuple[int, int]):
        super().__init__(f"Pair {pair} is neither specified nor an indeterminate")
        self.pair = pair


class NotEmbeddable(EdmError):
    """
    Raised when a complete distance matrix has no realization in the requested
    dimension.

    Args:
        certificate: The eigenvalue evidence; see
            :class:`edmtools.edm.EmbeddingCertificate`.
    """

    def __init__(self, certificate):
        super().__init__(str(certificate))
        self.certificate = certificate


class NotEDM(NotEmbeddable):
    pass


class NotIndependent(EdmError):
    pass


class NotChordal(EdmError):
    def __init__(self, cycle: Sequence[int]):
        super().__init__(f"Graph has a chordless cycle {tuple(cycle)}")
        self.cycle = tuple(cycle)


class BudgetExceeded(EdmError):
    def __init__(self, what: str, budget: int):
        super().__init__(f"{what} exceeded its budget of {budget} nodes")
        self.budget = budget


class TargetUnreachable(EdmError):
    pass


class PreconditionViolated(EdmError, ValueError):
    pass


class InvalidCover(PreconditionViolated):
    pass


class FillInTooLarge(PreconditionViolated):
    pass


class InternalGlueError(EdmError, RuntimeError):
    pass


class ToleranceMismatch(EdmError, RuntimeError):
    pass


def split_path(path: Path) -> Tuple[Path, str, Sequence[str]]:
    """
    Splits a path into parts.

    Args:
        path: The path to split

    Returns:
        Tuple of (parent, prefix, exts), where exts is a sequence of filename
        extensions (empty if the name has none).
    """
    name = path.name
    if os.extsep not in name:
        return path.parent, name, ()
    prefix, suffix = name.split(os.extsep, 1)
    return path.parent, prefix, tuple(suffix.split(os.extsep))


def replace_suffix(path: Path, new_suffix: str) -> Path:
    """
    Replaces the current suffix of `path` (everything from the first '.' on) with
    `new_suffix`.

    Args:
        path: An instance file path.
        new_suffix: The suffix to use, including the leading '.'.

    Returns:
        A new Path with suffix replaced.
    """
    parent, prefix, _ = split_path(path)
    return parent / (prefix + new_suffix)

"""Reading and writing instance files.

An instance file is line-oriented text::

    n d
    <n rows of n fields, each a number or *>
    #meta
    <key value... lines>

Metadata keys: ``point i x...`` (ground truth), ``generator``, ``seed``,
``mask kind params...``, ``clique i members...``, ``kept``, ``removed`` and
``weights u v w``. Unknown keys are kept as they are.
"""
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from xphyle import open_

from edmtools.compress import CliqueCover
from edmtools.matrix import PartialMatrix, squared_distances
from edmtools.utils import InstanceError, ParseError


UNSPECIFIED = "*"
"""Field marking an unspecified entry."""
META_MARKER = "#meta"
"""Line that starts the metadata block."""
POINT_TOLERANCE = 1e-12
"""Largest relative deviation allowed between ground-truth points and entries."""


@dataclass(frozen=True)
class Metadata:
    points: Optional[np.ndarray] = None
    generator: Optional[str] = None
    seed: Optional[int] = None
    mask: Optional[Tuple[str, ...]] = None
    cliques: Tuple[Tuple[int, ...], ...] = ()
    kept: Optional[Tuple[int, ...]] = None
    removed: Optional[Tuple[int, ...]] = None
    weights: Tuple[Tuple[int, int, int], ...] = ()
    extra: Tuple[Tuple[str, str], ...] = ()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Metadata):
            return NotImplemented
        if (self.points is None) != (other.points is None):
            return False
        if self.points is not None and not np.array_equal(self.points, other.points):
            return False
        return all(
            getattr(self, name) == getattr(other, name)
            for name in (
                "generator",
                "seed",
                "mask",
                "cliques",
                "kept",
                "removed",
                "weights",
                "extra",
            )
        )

    @property
    def is_empty(self) -> bool:
        return self == Metadata()


@dataclass(frozen=True)
class Instance:
    """
    A completion instance: the partial matrix, the target dimension, and the
    provenance that came with it.
    """

    matrix: PartialMatrix
    d: int
    metadata: Metadata = field(default_factory=Metadata)

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def cover(self) -> Optional[CliqueCover]:
        if not self.metadata.cliques:
            return None
        return CliqueCover(self.metadata.cliques)

    def redacted(self) -> "Instance":
        """Copy without the ground-truth points, for solver paths."""
        return replace(self, metadata=replace(self.metadata, points=None))


def format_number(value: float) -> str:
    """Integral values without a decimal point, others as the shortest repr."""
    if float(value).is_integer() and abs(value) < 2 ** 53:
        return str(int(value))
    return repr(float(value))


def _number(text: str, line: int, column: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"Invalid number {text!r}", line, column)
    if not np.isfinite(value):
        raise ParseError(f"Non-finite number {text!r}", line, column)
    return value


def _integer(text: str, line: int, column: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"Invalid integer {text!r}", line, column)


def _integers(fields: Sequence[str], line: int, start: int = 2) -> Tuple[int, ...]:
    return tuple(_integer(f, line, start + k) for k, f in enumerate(fields))


def parse_instance(text: str) -> Instance:
    """
    Parses instance file text.

    Raises:
        ParseError: with the line and field of the first problem.
        AsymmetryError, NegativeEntryError, NonzeroDiagonalError: if the grid
            is not a valid partial distance matrix.
    """
    lines = text.splitlines()
    if not lines or not lines[0].split():
        raise ParseError("Missing header 'n d'", 1)
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError("Header must be 'n d'", 1)
    n = _integer(header[0], 1, 1)
    d = _integer(header[1], 1, 2)
    if n < 1:
        raise ParseError(f"Order must be positive, got {n}", 1, 1)
    if d < 0:
        raise ParseError(f"Dimension must be nonnegative, got {d}", 1, 2)
    if len(lines) < n + 1:
        raise ParseError(f"Expected {n} rows, found {len(lines) - 1}", len(lines) + 1)
    values = np.empty((n, n))
    for i in range(n):
        line = i + 2
        fields = lines[i + 1].split()
        if len(fields) != n:
            raise ParseError(
                f"Expected {n} fields, found {len(fields)}",
                line,
                min(len(fields), n) + 1,
            )
        for j, text_value in enumerate(fields):
            if text_value == UNSPECIFIED:
                values[i, j] = np.nan
            else:
                values[i, j] = _number(text_value, line, j + 1)
    matrix = PartialMatrix(values)
    metadata = _parse_metadata(lines, n + 1, n, d)
    if metadata.points is not None:
        _check_points(matrix, metadata.points, n + 2)
    return Instance(matrix, d, metadata)


def _parse_metadata(lines: List[str], start: int, n: int, d: int) -> Metadata:
    in_meta = False
    points: Dict[int, Tuple[float, ...]] = {}
    cliques: Dict[int, Tuple[int, ...]] = {}
    kwargs = {}
    weights = []
    extra = []
    for offset, raw in enumerate(lines[start:]):
        line = start + offset + 1
        fields = raw.split()
        if not fields:
            continue
        if not in_meta:
            if raw.strip() != META_MARKER:
                raise ParseError(f"Unexpected content after the grid: {raw!r}", line)
            in_meta = True
            continue
        key, rest = fields[0], fields[1:]
        if key == "point":
            if len(rest) != d + 1:
                raise ParseError(f"Point needs an index and {d} coordinates", line)
            i = _integer(rest[0], line, 2)
            if not 0 <= i < n:
                raise ParseError(f"Point index {i} out of range", line, 2)
            points[i] = tuple(_number(x, line, k + 3) for k, x in enumerate(rest[1:]))
        elif key == "generator":
            kwargs["generator"] = " ".join(rest)
        elif key == "seed":
            if len(rest) != 1:
                raise ParseError("Seed needs one value", line)
            kwargs["seed"] = _integer(rest[0], line, 2)
        elif key == "mask":
            kwargs["mask"] = tuple(rest)
        elif key == "clique":
            if not rest:
                raise ParseError("Clique needs an index", line)
            members = _integers(rest, line)
            cliques[members[0]] = members[1:]
        elif key == "kept":
            kwargs["kept"] = _integers(rest, line)
        elif key == "removed":
            kwargs["removed"] = _integers(rest, line)
        elif key == "weights":
            if len(rest) != 3:
                raise ParseError("Weights need 'u v w'", line)
            weights.append(_integers(rest, line))
        else:
            extra.append((key, " ".join(rest)))
    if points:
        if len(points) != n:
            raise ParseError(f"Expected {n} points, found {len(points)}", start + 1)
        kwargs["points"] = np.array([points[i] for i in range(n)]).reshape(n, d)
    if cliques:
        if sorted(cliques) != list(range(len(cliques))):
            raise ParseError("Clique indices must be 0..k-1", start + 1)
        kwargs["cliques"] = tuple(cliques[i] for i in range(len(cliques)))
    return Metadata(weights=tuple(weights), extra=tuple(extra), **kwargs)


def _check_points(matrix: PartialMatrix, points: np.ndarray, line: int) -> None:
    dist = squared_distances(points)
    mask = matrix.mask
    deviation = float(np.max(np.abs(dist[mask] - matrix.values[mask]), initial=0.0))
    if deviation > POINT_TOLERANCE * max(1.0, matrix.max_entry):
        raise ParseError(
            f"Ground-truth points deviate from the entries by {deviation:.3g}", line
        )


def serialize_instance(instance: Instance) -> str:
    """Canonical text of `instance`; :func:`parse_instance` inverts it."""
    matrix = instance.matrix
    lines = [f"{matrix.n} {instance.d}"]
    for row in matrix.values:
        lines.append(
            " ".join(
                UNSPECIFIED if np.isnan(v) else format_number(v) for v in row
            )
        )
    meta = instance.metadata
    if not meta.is_empty:
        lines.append(META_MARKER)
        if meta.generator is not None:
            lines.append(f"generator {meta.generator}")
        if meta.seed is not None:
            lines.append(f"seed {meta.seed}")
        if meta.mask is not None:
            lines.append(" ".join(("mask",) + meta.mask))
        for u, v, w in meta.weights:
            lines.append(f"weights {u} {v} {w}")
        for i, clique in enumerate(meta.cliques):
            lines.append(" ".join(["clique", str(i)] + [str(v) for v in clique]))
        if meta.kept is not None:
            lines.append(" ".join(["kept"] + [str(v) for v in meta.kept]))
        if meta.removed is not None:
            lines.append(" ".join(["removed"] + [str(v) for v in meta.removed]))
        if meta.points is not None:
            for i, point in enumerate(meta.points):
                coords = " ".join(format_number(x) for x in point)
                lines.append(f"point {i} {coords}".rstrip())
        for key, value in meta.extra:
            lines.append(f"{key} {value}".rstrip())
    return "\n".join(lines) + "\n"


def read_instance(path: Path, redact: bool = True) -> Instance:
    """
    Reads an instance file (optionally compressed).

    Args:
        path: The file.
        redact: Drop ground-truth points; solver paths must never see them.
    """
    with open_(path, "rt") as inp:
        instance = parse_instance(inp.read())
    return instance.redacted() if redact else instance


def write_instance(instance: Instance, path: Path) -> None:
    with open_(path, "wt") as out:
        out.write(serialize_instance(instance))


def read_cover(path: Path) -> CliqueCover:
    """
    Reads a clique cover file: one clique per line as whitespace-separated
    indices; blank lines and lines starting with '#' are skipped.
    """
    cliques = []
    with open_(path, "rt") as inp:
        for number, raw in enumerate(inp, 1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            cliques.append(
                tuple(sorted(_integers(text.split(), number, start=1)))
            )
    if not cliques:
        raise InstanceError(f"Cover file {path} lists no cliques")
    return CliqueCover(tuple(cliques))

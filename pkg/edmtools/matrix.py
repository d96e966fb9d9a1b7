"""Partial distance matrices, realizations and numerical tolerances.
"""
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.spatial.distance import pdist, squareform

from edmtools.utils import (
    AsymmetryError,
    NegativeEntryError,
    NonzeroDiagonalError,
    ParseError,
    UnspecifiedEntry,
)


Pair = Tuple[int, int]


def pair(i: int, j: int) -> Pair:
    """Canonical (smaller, larger) form of an unordered index pair."""
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Tolerances:
    """
    Thresholds for the numerical decisions. All are relative to the scale of the
    matrix at hand (its largest entry).

    Args:
        eig: Eigenvalue threshold for PSD and rank decisions.
        cm: Cayley-Menger sign threshold; multiplied by scale ** degree.
        real: Realization residual bound; multiplied by max(1, scale).
        atom: Slack for polynomial atoms in the numerical backend.
    """

    eig: float = 1e-9
    cm: float = 1e-9
    real: float = 1e-7
    atom: float = 1e-8

    def __post_init__(self):
        for name in ("eig", "cm", "real", "atom"):
            if getattr(self, name) <= 0:
                raise ValueError(f"Tolerance {name} must be positive")

    def eig_threshold(self, scale: float) -> float:
        return self.eig * max(scale, np.finfo(float).tiny)

    def cm_threshold(self, scale: float, degree: int) -> float:
        return self.cm * max(scale, np.finfo(float).tiny) ** degree

    def real_threshold(self, scale: float) -> float:
        return self.real * max(1.0, scale)


DEFAULT_TOLERANCES = Tolerances()
"""Tolerances used when none are given."""


class PartialMatrix:
    """
    A symmetric hollow matrix of squared distances in which some off-diagonal
    entries may be unspecified (stored as NaN).

    Args:
        values: Square array-like; `None` or NaN marks an unspecified entry.

    Raises:
        NonzeroDiagonalError, AsymmetryError, NegativeEntryError
    """

    def __init__(self, values):
        arr = np.array(values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ParseError(f"Expected a non-empty square matrix, got {arr.shape}")
        n = arr.shape[0]
        diag = np.diagonal(arr)
        if np.isnan(diag).any() or (diag != 0).any():
            i = int(np.flatnonzero(np.isnan(diag) | (diag != 0))[0])
            raise NonzeroDiagonalError(f"Diagonal entry {i} must be 0")
        nan = np.isnan(arr)
        if (nan != nan.T).any() or (arr[~nan] != arr.T[~nan]).any():
            i, j = np.argwhere((nan != nan.T) | ((arr != arr.T) & ~nan))[0]
            raise AsymmetryError(f"Entries ({i}, {j}) and ({j}, {i}) differ")
        if (arr[~nan] < 0).any():
            i, j = np.argwhere(~nan & (arr < 0))[0]
            raise NegativeEntryError(f"Entry ({i}, {j}) is negative")
        arr.setflags(write=False)
        self._values = arr
        self._n = n
        self._graph = None

    @classmethod
    def from_points(
        cls, points, hidden: Iterable[Pair] = ()
    ) -> "PartialMatrix":
        """
        Builds the squared-distance matrix of a point set, leaving the `hidden`
        pairs unspecified.
        """
        values = squared_distances(np.asarray(points, dtype=float))
        for i, j in hidden:
            values[i, j] = values[j, i] = np.nan
        return cls(values)

    def __len__(self) -> int:
        return self._n

    def __repr__(self) -> str:
        return (
            f"PartialMatrix(n={self._n}, "
            f"unspecified={len(self.unspecified_pairs())})"
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartialMatrix):
            return NotImplemented
        return np.array_equal(self._values, other._values, equal_nan=True)

    def __getitem__(self, item: Pair) -> float:
        value = self._values[item]
        if np.isnan(value):
            raise UnspecifiedEntry(pair(*item))
        return float(value)

    @property
    def n(self) -> int:
        return self._n

    @property
    def values(self) -> np.ndarray:
        """Read-only array of entries, NaN where unspecified.
        """
        return self._values

    @property
    def mask(self) -> np.ndarray:
        """Boolean array, True where an entry is specified.
        """
        return ~np.isnan(self._values)

    def specified(self, i: int, j: int) -> bool:
        return not np.isnan(self._values[i, j])

    @property
    def is_complete(self) -> bool:
        return not np.isnan(self._values).any()

    @property
    def max_entry(self) -> float:
        if self._n < 2 or np.isnan(self._values).all():
            return 0.0
        return float(np.nanmax(self._values))

    @property
    def graph(self) -> nx.Graph:
        """The underlying graph: vertices 0..n-1, an edge per specified pair.
        """
        if self._graph is None:
            graph = nx.Graph()
            graph.add_nodes_from(range(self._n))
            graph.add_edges_from(self.edges())
            nx.freeze(graph)
            self._graph = graph
        return self._graph

    def edges(self) -> List[Pair]:
        i, j = np.nonzero(np.triu(self.mask, k=1))
        return list(zip(i.tolist(), j.tolist()))

    def unspecified_pairs(self) -> List[Pair]:
        i, j = np.nonzero(np.triu(~self.mask, k=1))
        return list(zip(i.tolist(), j.tolist()))

    def unspecified_counts(self) -> np.ndarray:
        """Number of unspecified entries in each row.
        """
        return np.isnan(self._values).sum(axis=1)

    def submatrix(self, indices: Sequence[int]) -> np.ndarray:
        """
        Extracts a fully specified principal submatrix.

        Args:
            indices: Row/column indices, in the order wanted.

        Returns:
            A writable complete array.

        Raises:
            UnspecifiedEntry: if any entry among `indices` is unspecified.
        """
        idx = list(indices)
        sub = self._values[np.ix_(idx, idx)].copy()
        if np.isnan(sub).any():
            a, b = np.argwhere(np.isnan(sub))[0]
            raise UnspecifiedEntry(pair(idx[a], idx[b]))
        return sub

    def principal(self, indices: Sequence[int]) -> "PartialMatrix":
        idx = list(indices)
        return PartialMatrix(self._values[np.ix_(idx, idx)])

    def delete(self, index: int) -> "PartialMatrix":
        return self.principal([i for i in range(self._n) if i != index])

    def fill(self, assignment: Mapping[Pair, float]) -> "PartialMatrix":
        """
        Returns a copy in which the given unspecified pairs are set.
        """
        values = self._values.copy()
        for (i, j), value in assignment.items():
            if not np.isnan(values[i, j]):
                raise ValueError(f"Entry {(i, j)} is already specified")
            values[i, j] = values[j, i] = value
        return PartialMatrix(values)


@dataclass(frozen=True)
class Realization:
    """
    An ordered point set; row i of `points` is the location of index i.
    """

    points: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def distance_matrix(self) -> np.ndarray:
        return squared_distances(self.points)

    def residual(self, matrix: PartialMatrix) -> float:
        """Largest absolute deviation over the specified entries of `matrix`.
        """
        if len(self) != matrix.n:
            raise ValueError(
                f"Realization has {len(self)} points, matrix has order {matrix.n}"
            )
        mask = matrix.mask
        diff = np.abs(self.distance_matrix() - matrix.values)
        return float(np.max(diff[mask], initial=0.0))


def squared_distances(points: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances of the rows of `points`."""
    n = points.shape[0]
    if n < 2 or points.shape[1] == 0:
        return np.zeros((n, n))
    return squareform(pdist(points, "sqeuclidean"))


def verify_realization(
    matrix: PartialMatrix,
    realization: Optional[Realization],
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> bool:
    """
    True if `realization` reproduces every specified entry of `matrix` within the
    scale-relative realization tolerance.
    """
    if realization is None or len(realization) != matrix.n:
        return False
    if not np.isfinite(realization.points).all():
        return False
    return realization.residual(matrix) <= tol.real_threshold(matrix.max_entry)

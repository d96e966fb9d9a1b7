"""Complete-matrix machinery: Cayley-Menger determinants, embeddability,
realizations, independence and metric bases.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from edmtools.matrix import (
    DEFAULT_TOLERANCES,
    PartialMatrix,
    Realization,
    Tolerances,
    pair,
)
from edmtools.utils import (
    NotEDM,
    NotEmbeddable,
    NotIndependent,
    ToleranceMismatch,
    UnspecifiedEntry,
)


DistanceMatrix = Union[PartialMatrix, np.ndarray]


class CertificateReason(Enum):
    """Why a complete matrix failed to embed.
    """

    NEGATIVE_EIGENVALUE = 0
    """The Gram matrix has an eigenvalue below -tau_eig."""
    RANK = 1
    """More eigenvalues than the target dimension exceed tau_eig."""


@dataclass(frozen=True)
class EmbeddingCertificate:
    reason: CertificateReason
    dim: int
    eigenvalues: Tuple[float, ...]
    threshold: float

    def __str__(self) -> str:
        if self.reason is CertificateReason.NEGATIVE_EIGENVALUE:
            return (
                f"Gram matrix has eigenvalue {min(self.eigenvalues):.6g} "
                f"below -{self.threshold:.3g}"
            )
        rank = sum(1 for ev in self.eigenvalues if ev > self.threshold)
        return f"Gram matrix has rank {rank} > {self.dim}"


@dataclass(frozen=True)
class MetricBasis:
    """An independent index set that pins down every other point.
    """

    indices: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.indices) - 1

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, item) -> bool:
        return item in self.indices


def as_complete(matrix: DistanceMatrix) -> np.ndarray:
    """
    Returns the entries of a complete distance matrix as a float array.

    Raises:
        UnspecifiedEntry: if any entry is missing.
    """
    if isinstance(matrix, PartialMatrix):
        arr = matrix.values
    else:
        arr = np.asarray(matrix, dtype=float)
    missing = np.argwhere(np.isnan(arr))
    if len(missing):
        raise UnspecifiedEntry(pair(int(missing[0][0]), int(missing[0][1])))
    return arr


def _scale(arr: np.ndarray) -> float:
    return float(arr.max()) if arr.size else 0.0


def cayley_menger_matrix(distances: np.ndarray) -> np.ndarray:
    """The bordered matrix: first row and column 0 then ones, then `distances`.
    """
    k = distances.shape[0]
    bordered = np.ones((k + 1, k + 1))
    bordered[0, 0] = 0.0
    bordered[1:, 1:] = distances
    return bordered


def cm_determinant(matrix: DistanceMatrix, indices: Sequence[int]) -> float:
    """
    Computes the Cayley-Menger determinant of the points `indices`.

    Args:
        matrix: A matrix in which every pair within `indices` is specified.
        indices: At least one index.

    Returns:
        The determinant of the (|indices|+1)-order bordered matrix.

    Raises:
        UnspecifiedEntry: if a needed entry is missing.
    """
    idx = list(indices)
    if not idx:
        raise ValueError("Cayley-Menger determinant needs at least one point")
    if isinstance(matrix, PartialMatrix):
        block = matrix.submatrix(idx)
    else:
        block = as_complete(np.asarray(matrix, dtype=float)[np.ix_(idx, idx)])
    return float(np.linalg.det(cayley_menger_matrix(block)))


def _sign_ok(
    arr: np.ndarray, idx: Sequence[int], scale: float, tol: Tolerances
) -> bool:
    j = len(idx) - 1
    value = (-1) ** (j + 1) * cm_determinant(arr, idx)
    return value > tol.cm_threshold(scale, j)


def _vanishes(
    arr: np.ndarray, idx: Sequence[int], scale: float, tol: Tolerances
) -> bool:
    return abs(cm_determinant(arr, idx)) <= tol.cm_threshold(scale, len(idx) - 1)


def _greedy_basis(
    arr: np.ndarray,
    universe: Iterable[int],
    start: Sequence[int],
    scale: float,
    tol: Tolerances,
) -> List[int]:
    basis = list(start)
    for i in universe:
        if i not in basis and _sign_ok(arr, basis + [i], scale, tol):
            basis.append(i)
    return basis


def is_strongly_embeddable(
    matrix: DistanceMatrix, r: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    """
    Decides whether `matrix` is r-embeddable but not (r-1)-embeddable, using the
    sign pattern of Cayley-Menger determinants: some r+1 points have
    sign-alternating prefix determinants, and adding any one or two further
    points makes the determinant vanish.
    """
    arr = as_complete(matrix)
    n = arr.shape[0]
    if not 0 <= r < n:
        return False
    scale = _scale(arr)
    basis = _greedy_basis(arr, range(n), [], scale, tol)
    if len(basis) != r + 1:
        return False
    rest = [i for i in range(n) if i not in basis]
    for a, x in enumerate(rest):
        if not _vanishes(arr, basis + [x], scale, tol):
            return False
        for y in rest[a + 1 :]:
            if not _vanishes(arr, basis + [x, y], scale, tol):
                return False
    return True


def gram_matrix(matrix: DistanceMatrix, centered: bool = False) -> np.ndarray:
    """
    Gram matrix of a complete distance matrix. The anchored form pins the first
    index at the origin, G_ij = (m_0i + m_0j - m_ij) / 2; the centered form
    places the centroid there.
    """
    arr = as_complete(matrix)
    if centered:
        n = arr.shape[0]
        h = np.eye(n) - np.full((n, n), 1.0 / n)
        return -0.5 * h @ arr @ h
    return 0.5 * (arr[0][:, None] + arr[0][None, :] - arr)


def _spectrum(
    arr: np.ndarray, centered: bool
) -> Tuple[np.ndarray, np.ndarray]:
    evals, evecs = linalg.eigh(gram_matrix(arr, centered=centered))
    order = np.argsort(evals)[::-1]
    return evals[order], evecs[:, order]


def realize(
    matrix: DistanceMatrix,
    d: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    centered: bool = False,
) -> Realization:
    """
    Realizes a complete distance matrix in R^d.

    Args:
        matrix: A complete distance matrix.
        d: The target dimension.
        tol: Tolerances.
        centered: Use the double-centered Gram matrix instead of the one
            anchored at the first index.

    Returns:
        A Realization whose first point is the origin (anchored form).

    Raises:
        NotEmbeddable: with an EmbeddingCertificate, if the Gram matrix has a
            negative eigenvalue or rank above `d`.
    """
    arr = as_complete(matrix)
    evals, evecs = _spectrum(arr, centered)
    threshold = tol.eig_threshold(_scale(arr))
    if evals[-1] < -threshold:
        raise NotEmbeddable(
            EmbeddingCertificate(
                CertificateReason.NEGATIVE_EIGENVALUE, d, tuple(evals), threshold
            )
        )
    rank = int(np.count_nonzero(evals > threshold))
    if rank > d:
        raise NotEmbeddable(
            EmbeddingCertificate(CertificateReason.RANK, d, tuple(evals), threshold)
        )
    return Realization(_top_points(evals, evecs, d))


def _top_points(evals: np.ndarray, evecs: np.ndarray, d: int) -> np.ndarray:
    n = evecs.shape[0]
    points = np.zeros((n, d))
    k = min(d, n)
    points[:, :k] = evecs[:, :k] * np.sqrt(np.clip(evals[:k], 0.0, None))
    return points


def principal_points(
    matrix: DistanceMatrix, d: int, centered: bool = False
) -> np.ndarray:
    """
    Points from the top `d` eigenpairs of the Gram matrix, negative eigenvalues
    clipped to zero. Unlike :func:`realize` this never fails; the points only
    approximate a matrix that is not d-embeddable.
    """
    evals, evecs = _spectrum(as_complete(matrix), centered)
    return _top_points(evals, evecs, d)


def is_embeddable(
    matrix: DistanceMatrix, d: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    try:
        realize(matrix, d, tol)
        return True
    except NotEmbeddable:
        return False


def embedding_dimension(
    matrix: DistanceMatrix, tol: Tolerances = DEFAULT_TOLERANCES
) -> int:
    """
    Smallest d for which `matrix` is d-embeddable.

    Raises:
        NotEDM: if the matrix is not a Euclidean distance matrix at all.
    """
    arr = as_complete(matrix)
    evals, _ = _spectrum(arr, False)
    threshold = tol.eig_threshold(_scale(arr))
    if evals[-1] < -threshold:
        raise NotEDM(
            EmbeddingCertificate(
                CertificateReason.NEGATIVE_EIGENVALUE,
                arr.shape[0] - 1,
                tuple(evals),
                threshold,
            )
        )
    return int(np.count_nonzero(evals > threshold))


def is_independent(
    matrix: DistanceMatrix,
    indices: Iterable[int],
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> bool:
    """
    True if the points `indices` are strongly (|indices|-1)-embeddable, i.e.
    affinely independent. The empty set counts as independent.
    """
    idx = list(indices)
    if isinstance(matrix, PartialMatrix):
        arr = matrix.submatrix(idx)
    else:
        arr = as_complete(np.asarray(matrix, dtype=float)[np.ix_(idx, idx)])
    scale = _scale(arr)
    local = list(range(len(idx)))
    return all(_sign_ok(arr, local[: j + 1], scale, tol) for j in range(len(idx)))


def _checked(
    arr: np.ndarray, basis: List[int], tol: Tolerances
) -> MetricBasis:
    dim = embedding_dimension(arr, tol)
    if len(basis) != dim + 1:
        raise ToleranceMismatch(
            f"Cayley-Menger basis {basis} has rank {len(basis) - 1} but the "
            f"Gram matrix has rank {dim}"
        )
    return MetricBasis(tuple(basis))


def metric_basis(
    matrix: DistanceMatrix, tol: Tolerances = DEFAULT_TOLERANCES
) -> MetricBasis:
    """
    Greedy matroid scan in ascending index order.

    Raises:
        NotEDM: if the matrix is not a Euclidean distance matrix.
        ToleranceMismatch: if the Cayley-Menger and Gram routes disagree.
    """
    arr = as_complete(matrix)
    basis = _greedy_basis(arr, range(arr.shape[0]), [], _scale(arr), tol)
    return _checked(arr, basis, tol)


def extend_basis(
    matrix: DistanceMatrix,
    basis: Sequence[int],
    universe: Optional[Iterable[int]] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> MetricBasis:
    """
    Extends an independent set to a maximal independent set within `universe`
    (default: all indices), scanning in ascending order.

    Raises:
        NotIndependent: if `basis` is not independent.
    """
    arr = as_complete(matrix)
    start = list(basis)
    if not is_independent(arr, start, tol):
        raise NotIndependent(f"{tuple(start)} is not independent")
    pool = sorted(set(range(arr.shape[0]) if universe is None else universe))
    extended = _greedy_basis(arr, pool, start, _scale(arr), tol)
    members = sorted(set(pool) | set(start))
    local = [members.index(i) for i in extended]
    _checked(arr[np.ix_(members, members)], local, tol)
    return MetricBasis(tuple(extended))


def align(
    points: np.ndarray,
    reference: np.ndarray,
    indices: Optional[Sequence[int]] = None,
) -> Tuple[np.ndarray, float]:
    """
    Rigidly aligns `points` onto `reference` (orthogonal Procrustes after
    centering), fitting on `indices` if given.

    Returns:
        Tuple of (aligned points, largest point-wise distance to `reference`).
    """
    points = np.asarray(points, dtype=float)
    reference = np.asarray(reference, dtype=float)
    width = max(points.shape[1], reference.shape[1])
    points = np.pad(points, ((0, 0), (0, width - points.shape[1])))
    reference = np.pad(reference, ((0, 0), (0, width - reference.shape[1])))
    fit = slice(None) if indices is None else list(indices)
    p_center = points[fit].mean(axis=0)
    r_center = reference[fit].mean(axis=0)
    rotation, _ = linalg.orthogonal_procrustes(
        points[fit] - p_center, reference[fit] - r_center
    )
    aligned = (points - p_center) @ rotation + r_center
    residual = float(np.max(np.linalg.norm(aligned - reference, axis=1), initial=0.0))
    return aligned, residual

"""Independent numerical oracle: direct fitting of point coordinates.

Used to cross-check the algebraic solvers. A yes is always backed by verified
points; a no is certified only when some fully specified clique fails to embed.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

from loguru import logger
import numpy as np
from scipy.optimize import least_squares

from edmtools.chordal import maximal_cliques
from edmtools.edm import is_embeddable
from edmtools.matrix import (
    DEFAULT_TOLERANCES,
    PartialMatrix,
    Realization,
    Tolerances,
    verify_realization,
)
from edmtools.verdict import Verdict


DEFAULT_RESTARTS = 64
"""Number of random starts for the multi-start searches."""


@dataclass(frozen=True)
class OracleResult:
    """
    Args:
        verdict: The oracle's answer.
        residual: Smallest normalized stress reached over all restarts.
        restart: Index of the restart that produced a yes.
    """

    verdict: Verdict
    residual: float
    restart: Optional[int] = None


def stress(matrix: PartialMatrix, points: np.ndarray) -> float:
    """
    Sum over specified pairs of squared deviations, divided by
    max(1, largest entry) squared.
    """
    i, j = np.nonzero(np.triu(matrix.mask, k=1))
    if not len(i):
        return 0.0
    diff = points[i] - points[j]
    dev = (diff * diff).sum(axis=1) - matrix.values[i, j]
    return float((dev @ dev) / max(1.0, matrix.max_entry) ** 2)


def stress_fit(
    matrix: PartialMatrix, start: np.ndarray
) -> Tuple[np.ndarray, float]:
    """
    Polishes `start` points by nonlinear least squares on the specified entries.

    Returns:
        Tuple of (points, stress).
    """
    n, d = start.shape
    i, j = np.nonzero(np.triu(matrix.mask, k=1))
    if not len(i) or d == 0:
        return start, stress(matrix, start)
    targets = matrix.values[i, j]
    norm = max(1.0, matrix.max_entry)
    rows = np.arange(len(i))

    def residuals(x):
        p = x.reshape(n, d)
        diff = p[i] - p[j]
        return ((diff * diff).sum(axis=1) - targets) / norm

    def jacobian(x):
        p = x.reshape(n, d)
        diff = 2.0 * (p[i] - p[j]) / norm
        jac = np.zeros((len(i), n, d))
        jac[rows, i] = diff
        jac[rows, j] = -diff
        return jac.reshape(len(i), n * d)

    result = least_squares(
        residuals, start.ravel(), jac=jacobian, xtol=1e-12, ftol=1e-12, gtol=1e-12
    )
    points = result.x.reshape(n, d)
    return points, stress(matrix, points)


def clique_scan(
    matrix: PartialMatrix, d: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> Optional[Tuple[int, ...]]:
    """First maximal clique (canonical order) whose submatrix is not d-embeddable.
    """
    for clique in maximal_cliques(matrix.graph):
        if len(clique) > 1 and not is_embeddable(matrix.submatrix(clique), d, tol):
            return clique
    return None


def oracle_solve(
    matrix: PartialMatrix,
    d: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    threads: int = 1,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> OracleResult:
    """
    Decides a completion instance numerically.

    Args:
        matrix: The instance.
        d: Target dimension.
        restarts: Number of random starts, uniform in a cube of side
            sqrt(largest entry).
        seed: Seed for the starts.
        threads: Number of restarts to run concurrently.
        tol: Tolerances; a yes needs :func:`verify_realization` to pass.

    Returns:
        An OracleResult; its no verdict is certified only with a failing clique.
    """
    witness = clique_scan(matrix, d, tol)
    if witness is not None:
        return OracleResult(
            Verdict.no(witness=witness, detail=f"clique {witness} does not embed"),
            np.inf,
        )
    n = matrix.n
    side = np.sqrt(matrix.max_entry) if matrix.max_entry > 0 else 1.0
    rng = np.random.default_rng(seed)
    starts = [rng.uniform(0.0, side, size=(n, d)) for _ in range(restarts)]

    def attempt(start: np.ndarray) -> Tuple[np.ndarray, float]:
        return stress_fit(matrix, start)

    best = np.inf
    for batch in range(0, restarts, max(1, threads)):
        chunk = starts[batch : batch + max(1, threads)]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                results = list(executor.map(attempt, chunk))
        else:
            results = [attempt(start) for start in chunk]
        for offset, (points, value) in enumerate(results):
            best = min(best, value)
            realization = Realization(points)
            if value < tol.real ** 2 and verify_realization(matrix, realization, tol):
                index = batch + offset
                logger.debug("Oracle restart {} fits with stress {:.3g}", index, value)
                completion = realization.distance_matrix()
                completion[matrix.mask] = matrix.values[matrix.mask]
                return OracleResult(
                    Verdict.yes(completion, realization, detail="fitted points"),
                    value,
                    index,
                )
    logger.debug("Oracle exhausted {} restarts, best stress {:.3g}", restarts, best)
    return OracleResult(
        Verdict.no(
            certified=False,
            detail=f"no fit in {restarts} restarts (best stress {best:.3g})",
        ),
        best,
    )

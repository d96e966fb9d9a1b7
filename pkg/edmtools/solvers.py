"""Deciding the completion formulas and turning satisfying assignments into
verified completions.

:func:`decide_exists` is sound but incomplete: Sat is always verified, Unsat is
reported only for variable-free formulas or after interval arithmetic rules out
every box of a bisection, and anything else is Unknown.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from loguru import logger
import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc

from edmtools.chordal import DEFAULT_SEARCH_BUDGET, chordal_complete, min_fill_in
from edmtools.edm import is_embeddable, principal_points
from edmtools.formulas import (
    Formula,
    Node,
    active_atoms,
    build_basis_guess_formula,
    build_fillin_formula,
    fold,
    formula_variables,
    holds,
    interval_box,
    is_false,
    is_true,
    refuted,
)
from edmtools.matrix import (
    DEFAULT_TOLERANCES,
    Pair,
    PartialMatrix,
    Realization,
    Tolerances,
    verify_realization,
)
from edmtools.oracle import DEFAULT_RESTARTS, stress_fit
from edmtools.polynomials import CayleyMengerCache
from edmtools.utils import (
    FillInTooLarge,
    InternalGlueError,
    NotChordal,
    ToleranceMismatch,
)
from edmtools.verdict import Answer, Verdict


DEFAULT_KMAX = 4
"""Largest fill-in tried by the fill-in solver."""
DEFAULT_BOX_BUDGET = 20_000
"""Number of boxes the interval refutation may examine."""
SELECTION_ROUNDS = 4
"""Branch re-selections per restart."""
HINGE_MARGIN = 10.0
"""Margin, in multiples of the atom slack, that strict atoms are pushed past."""


class Outcome(Enum):
    SAT = 0
    UNSAT = 1
    UNKNOWN = 2


@dataclass(frozen=True)
class Decision:
    """
    Result of :func:`decide_exists`.

    Args:
        outcome: Sat, Unsat or Unknown.
        assignment: For Sat, the value of every unordered pair.
        values: For Sat, the variable vector.
        restart: For Sat, the restart that found it (None if no search ran).
        witness: For Unsat, a fully specified index set that does not embed.
        detail: Free text.
    """

    outcome: Outcome
    assignment: Optional[Dict[Pair, float]] = None
    values: Optional[np.ndarray] = None
    restart: Optional[int] = None
    witness: Optional[Tuple[int, ...]] = None
    detail: str = ""


def _starts(count: int, dim: int, seed: int) -> np.ndarray:
    if count <= 0:
        return np.zeros((0, dim))
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    return sampler.random_base2(m=max(0, int(np.ceil(np.log2(count)))))[:count]


def _local_search(
    root: Node, start: np.ndarray, bound: float, margin: float, slack: float
) -> Optional[np.ndarray]:
    x = np.clip(start, 0.0, bound)
    selected = None
    for _ in range(SELECTION_ROUNDS):
        if holds(root, x, slack):
            return x
        active = active_atoms(root, x, margin)
        key = tuple(id(atom) for atom in active)
        if not active or key == selected:
            break
        selected = key

        def fun(v):
            return np.array([atom.residual(v, margin)[0] for atom in active])

        def jac(v):
            return np.array([atom.residual(v, margin)[1] for atom in active])

        result = least_squares(
            fun,
            x,
            jac=jac,
            bounds=(0.0, bound),
            xtol=1e-12,
            ftol=1e-12,
            gtol=1e-12,
        )
        x = result.x
    return x if holds(root, x, slack) else None


def _search(
    root: Node,
    starts: np.ndarray,
    bound: float,
    margin: float,
    slack: float,
    threads: int,
) -> Optional[Tuple[int, np.ndarray]]:
    """Lowest-index restart that reaches a verified point.
    """
    step = max(1, threads)
    for batch in range(0, len(starts), step):
        chunk = [bound * s for s in starts[batch : batch + step]]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                results = list(
                    executor.map(
                        lambda s: _local_search(root, s, bound, margin, slack), chunk
                    )
                )
        else:
            results = [_local_search(root, s, bound, margin, slack) for s in chunk]
        for offset, x in enumerate(results):
            if x is not None:
                return batch + offset, x
    return None


def _refute(
    root: Node, dim: int, bound: float, slack: float, budget: int
) -> bool:
    """
    Bisects [0, bound]^dim, widest side first, until interval evaluation rules
    out every box. False if the budget runs out first.
    """
    stack: List[List[Tuple[float, float]]] = [[(0.0, bound)] * dim]
    boxes = 0
    while stack:
        sides = stack.pop()
        boxes += 1
        if boxes > budget:
            return False
        if refuted(root, interval_box(sides), slack):
            continue
        widths = [high - low for low, high in sides]
        k = int(np.argmax(widths))
        if widths[k] <= bound * 1e-12:
            return False
        low, high = sides[k]
        mid = 0.5 * (low + high)
        for half in ((mid, high), (low, mid)):
            split = list(sides)
            split[k] = half
            stack.append(split)
    logger.debug("Interval refutation closed after {} boxes", boxes)
    return True


def decide_exists(
    formula: Formula,
    tol: Tolerances = DEFAULT_TOLERANCES,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    threads: int = 1,
    box_budget: int = DEFAULT_BOX_BUDGET,
) -> Decision:
    """
    Decides whether some nonnegative assignment satisfies `formula`.

    Constant atoms are folded first. Otherwise restarts from scrambled Sobol
    points in [0, U]^Z, U = 4 * largest entry (doubled once), each alternating
    between choosing the closest branch of every disjunction and a bounded least
    squares fit of the chosen atoms. Failing that, interval bisection over a box
    that holds every completion tries to refute the formula.

    Args:
        formula: The formula.
        tol: Tolerances; `tol.atom` is the slack every atom is checked with.
        restarts: Number of starts per box size.
        seed: Seed of the Sobol scrambling.
        threads: Number of restarts to run concurrently.
        box_budget: Limit on the boxes examined by the refutation.
    """
    slack = tol.atom
    root = fold(formula.root, slack)
    dim = len(formula.variables)
    if is_true(root):
        x = np.zeros(dim)
        return Decision(
            Outcome.SAT, formula.assignment(x), x, detail="true after folding"
        )
    if is_false(root):
        return Decision(
            Outcome.UNSAT, witness=root.witness, detail="false after folding"
        )
    margin = HINGE_MARGIN * slack
    bound = 4.0 * formula.max_entry if formula.max_entry > 0 else 1.0
    starts = _starts(restarts, dim, seed)
    for box in (bound, 2.0 * bound):
        found = _search(root, starts, box, margin, slack, threads)
        if found is not None:
            index, x = found
            logger.debug("Restart {} satisfied the formula in [0, {:g}]", index, box)
            return Decision(Outcome.SAT, formula.assignment(x), x, restart=index)
    # every completion, suitably translated, has its unknown entries in [0, sound]
    sound = max(formula.sound_bound, 2.0 * bound)
    if _refute(root, dim, sound, slack, box_budget):
        return Decision(Outcome.UNSAT, detail="interval refutation")
    return Decision(
        Outcome.UNKNOWN,
        detail=f"no satisfying point in {restarts} restarts and no refutation",
    )


def _glue(
    matrix: PartialMatrix, filled: PartialMatrix, d: int, tol: Tolerances
) -> Verdict:
    try:
        verdict = chordal_complete(filled, d, tol)
    except (InternalGlueError, ToleranceMismatch, NotChordal) as err:
        logger.warning("Completion failed after a satisfying assignment: {}", err)
        return Verdict.unknown(f"gluing failed: {err}")
    if verdict.answer is not Answer.YES:
        logger.warning("Satisfying assignment left clique {} infeasible", verdict.witness)
        return Verdict.unknown("assignment did not survive the clique check")
    if not verify_realization(matrix, verdict.realization, tol):
        logger.warning("Glued realization misses the specified entries")
        return Verdict.unknown("glued realization failed verification")
    return verdict


def solve_fillin(
    matrix: PartialMatrix,
    d: int,
    kmax: int = DEFAULT_KMAX,
    tol: Tolerances = DEFAULT_TOLERANCES,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    threads: int = 1,
    budget: int = DEFAULT_SEARCH_BUDGET,
    collapse_pairs: bool = True,
) -> Verdict:
    """
    Decides an instance whose graph is at most `kmax` edges from chordal: guesses
    values of a minimum fill-in through its formula and completes the resulting
    chordal matrix.

    Raises:
        FillInTooLarge: if every fill-in has more than `kmax` edges.
        BudgetExceeded: if the fill-in search runs out of budget.
    """
    fill_in = min_fill_in(matrix.graph, kmax, budget)
    if fill_in is None:
        raise FillInTooLarge(f"No fill-in with at most {kmax} edges")
    formula = build_fillin_formula(matrix, fill_in, d, collapse_pairs)
    logger.debug(
        "Fill-in of {} edges gives {} atoms", len(fill_in), len(formula)
    )
    decision = decide_exists(formula, tol, restarts, seed, threads)
    if decision.outcome is Outcome.SAT:
        filled = matrix.fill({e: decision.assignment[e] for e in fill_in})
        verdict = _glue(matrix, filled, d, tol)
        if verdict.answer is Answer.YES:
            return Verdict.yes(
                verdict.completion,
                verdict.realization,
                detail=f"fill-in of {len(fill_in)} pairs",
            )
        return verdict
    if decision.outcome is Outcome.UNSAT:
        return Verdict.no(witness=decision.witness, detail=decision.detail)
    return Verdict.unknown(decision.detail)


def complete_from_assignment(
    matrix: PartialMatrix,
    assignment: Dict[Pair, float],
    d: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Optional[Verdict]:
    """
    Turns values for every unspecified pair into a verified completion: points
    from the top-d Gram eigenpairs, polished on the specified entries.

    Returns:
        A yes Verdict, or None if the polished points fail verification.
    """
    filled = matrix.fill({p: assignment[p] for p in matrix.unspecified_pairs()})
    points, _ = stress_fit(matrix, principal_points(filled.values, d))
    realization = Realization(points)
    if not verify_realization(matrix, realization, tol):
        return None
    completion = realization.distance_matrix()
    completion[matrix.mask] = matrix.values[matrix.mask]
    if not is_embeddable(completion, d, tol):
        return None
    return Verdict.yes(completion, realization)


def solve_exact(
    matrix: PartialMatrix,
    d: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    threads: int = 1,
    collapse_pairs: bool = True,
) -> Verdict:
    """
    Decides an instance by guessing the metric basis of a completion: every
    index set of at most d+1 points, by size then lexicographically. Meant for
    instances of a handful of points.
    """
    variables = formula_variables(matrix.unspecified_pairs(), collapse_pairs)
    cache = CayleyMengerCache(matrix, variables, collapse_pairs)
    unknown = 0
    for size in range(1, min(d + 1, matrix.n) + 1):
        for basis in combinations(range(matrix.n), size):
            formula = build_basis_guess_formula(
                matrix, basis, d, collapse_pairs, cache
            )
            decision = decide_exists(formula, tol, restarts, seed, threads)
            if decision.outcome is Outcome.SAT:
                verdict = complete_from_assignment(
                    matrix, decision.assignment, d, tol
                )
                if verdict is not None:
                    return Verdict.yes(
                        verdict.completion,
                        verdict.realization,
                        detail=f"metric basis {basis}",
                    )
                logger.warning(
                    "Assignment for basis {} did not polish to a completion", basis
                )
                unknown += 1
            elif decision.outcome is Outcome.UNKNOWN:
                unknown += 1
    if unknown:
        return Verdict.unknown(f"{unknown} basis guesses undecided")
    return Verdict.no(detail="every basis guess refuted")

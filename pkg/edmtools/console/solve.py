import enum
from typing import Optional

import autoclick as ac
from loguru import logger

from edmtools.chordal import chordal_complete, is_chordal
from edmtools.console.report import RunReport, finish, parameters
from edmtools.instances import read_instance
from edmtools.matrix import DEFAULT_TOLERANCES, PartialMatrix, verify_realization
from edmtools.oracle import DEFAULT_RESTARTS
from edmtools.solvers import DEFAULT_KMAX, solve_exact, solve_fillin
from edmtools.utils import BudgetExceeded, FillInTooLarge, PreconditionViolated
from edmtools.verdict import Answer, Verdict


DEFAULT_EXACT_CAP = 8
"""Largest order the auto strategy hands to the exact solver."""


class Strategy(enum.Enum):
    AUTO = 0
    """Cheapest sound path: chordal, then fill-in, then exact."""
    EXACT = 1
    """Guess a metric basis; only for a handful of points."""
    FILLIN = 2
    """Guess the values of a small minimum fill-in."""
    CHORDAL = 3
    """Clique checks and clique-tree completion; the graph must be chordal."""


def _auto(
    matrix: PartialMatrix,
    d: int,
    kmax: int,
    exact_cap: int,
    restarts: int,
    seed: int,
    threads: int,
) -> Verdict:
    if is_chordal(matrix.graph):
        logger.info("Pattern is chordal; completing along a clique tree")
        return chordal_complete(matrix, d)
    reason = ""
    try:
        verdict = solve_fillin(
            matrix, d, kmax=kmax, restarts=restarts, seed=seed, threads=threads
        )
        if verdict.definite:
            return verdict
        reason = verdict.detail
    except (FillInTooLarge, BudgetExceeded) as err:
        reason = str(err)
    logger.info("Fill-in path inconclusive: {}", reason)
    if matrix.n <= exact_cap:
        logger.info("Falling back to the exact solver on {} points", matrix.n)
        return solve_exact(matrix, d, restarts=restarts, seed=seed, threads=threads)
    return Verdict.unknown(
        f"{reason}; order {matrix.n} exceeds the exact cap {exact_cap}"
    )


def cmd_solve(
    instance: ac.ReadableFile,
    dim: Optional[int] = None,
    strategy: Strategy = Strategy.AUTO,
    kmax: int = DEFAULT_KMAX,
    exact_cap: int = DEFAULT_EXACT_CAP,
    restarts: int = DEFAULT_RESTARTS,
    threads: int = 1,
    seed: int = 0,
    verify: bool = False,
) -> RunReport:
    """
    Decides an instance file and builds the run report.

    Raises:
        InstanceError: if the file is malformed.
        PreconditionViolated: if the chosen strategy does not apply to the
            instance (with `verify`, chordality is checked up front).
    """
    inst = read_instance(instance)
    d = inst.d if dim is None else dim
    report = RunReport(
        str(instance),
        "solve",
        parameters=parameters(
            dim=d,
            strategy=strategy,
            kmax=kmax,
            exact_cap=exact_cap,
            restarts=restarts,
            seed=seed,
        ),
    )
    matrix = inst.matrix
    if strategy == Strategy.AUTO:
        verdict = _auto(matrix, d, kmax, exact_cap, restarts, seed, threads)
    elif strategy == Strategy.CHORDAL:
        if verify:
            check = is_chordal(matrix.graph)
            if not check:
                raise PreconditionViolated(
                    f"Pattern is not chordal: cycle {check.cycle}"
                )
        verdict = chordal_complete(matrix, d)
    elif strategy == Strategy.FILLIN:
        verdict = solve_fillin(
            matrix, d, kmax=kmax, restarts=restarts, seed=seed, threads=threads
        )
    elif strategy == Strategy.EXACT:
        verdict = solve_exact(matrix, d, restarts=restarts, seed=seed, threads=threads)
    else:
        raise ValueError(f"Unsupported strategy: {strategy}")
    if verdict.answer is Answer.YES and not verify_realization(
        matrix, verdict.realization, DEFAULT_TOLERANCES
    ):
        logger.warning("Realization failed the final check; reporting unknown")
        verdict = Verdict.unknown("realization failed verification")
    return report.record(verdict)


def solve(
    instance: ac.ReadableFile,
    dim: Optional[int] = None,
    strategy: Strategy = Strategy.AUTO,
    kmax: int = DEFAULT_KMAX,
    exact_cap: int = DEFAULT_EXACT_CAP,
    restarts: int = DEFAULT_RESTARTS,
    threads: int = 1,
    seed: int = 0,
    verify: bool = False,
    report: Optional[ac.WritableFile] = None,
):
    """
    Decide whether a partial distance matrix has a completion in R^d.

    Exits with 0 for yes, 1 for a certified no, 2 for unknown or an uncertified
    no, and 3 for an input error.

    Args:
        instance: The instance file.
        dim: Target dimension. Defaults to the dimension in the instance header.
        strategy: 'AUTO' - chordal if the pattern is chordal, else fill-in, else
            exact for small instances; 'EXACT' - metric basis guessing; 'FILLIN' -
            minimum fill-in guessing; 'CHORDAL' - clique-tree completion.
        kmax: Largest fill-in to search for.
        exact_cap: Largest order the 'AUTO' strategy solves exactly.
        restarts: Number of numerical restarts per formula.
        threads: Maximum number of concurrent restarts or clique checks.
        seed: Seed for the restarts.
        verify: Check the strategy's preconditions before solving.
        report: Write the run report to this file.
    """
    finish(
        lambda: cmd_solve(
            instance, dim, strategy, kmax, exact_cap, restarts, threads, seed, verify
        ),
        instance,
        "solve",
        report,
    )

"""Irrelevant-vertex compression of partial distance matrices.

Each scheme repeatedly finds a large fully specified clique, protects a few metric
bases inside it, and deletes an unprotected vertex, which cannot change whether a
completion exists.
"""
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from math import comb
from typing import Iterable, List, Optional, Sequence, Set, Tuple

from loguru import logger
import networkx as nx

from edmtools.chordal import DEFAULT_SEARCH_BUDGET
from edmtools.edm import NotEmbeddable, metric_basis, realize
from edmtools.matrix import DEFAULT_TOLERANCES, PartialMatrix, Tolerances
from edmtools.utils import (
    BudgetExceeded,
    InvalidCover,
    PreconditionViolated,
    TargetUnreachable,
)
from edmtools.verdict import Answer, Verdict


COVER_SEARCH_MAX_K = 6
"""Largest cover size the exhaustive edge clique cover search accepts."""


Clique = Tuple[int, ...]


def eta(d: int, t: int) -> int:
    """Clique size that guarantees an irrelevant vertex when excluding t-blocks."""
    return (d + 1) * t + (t - 1) * (d + 1) ** (t + 1) + 1


def rho(d: int, t: int) -> int:
    """Order above which a t-block-free matrix must contain a clique of size eta."""
    return comb(2 * t + eta(d, t) - 2, 2 * t - 1)


class OutcomeKind(Enum):
    """How a compression finished.
    """

    SOLVED = 0
    """The instance was decided outright."""
    REDUCED = 1
    """An equivalent principal submatrix within the size bound was produced."""


@dataclass(frozen=True)
class CompressOutcome:
    """
    Result of a compression.

    Args:
        kind: Solved or Reduced.
        instance: The final (possibly reduced) matrix.
        kept: Original index of each row of `instance`.
        removed: Original indices in the order they were deleted.
        verdict: For Solved, the answer; witnesses use original indices and
            realizations refer to `instance`.
    """

    kind: OutcomeKind
    instance: PartialMatrix
    kept: Tuple[int, ...]
    removed: Tuple[int, ...] = ()
    verdict: Optional[Verdict] = None

    @property
    def answer(self) -> Optional[Answer]:
        return None if self.verdict is None else self.verdict.answer


@dataclass(frozen=True)
class BlockPatternWitness:
    rows: Tuple[int, ...]
    cols: Tuple[int, ...]


@dataclass(frozen=True)
class CliqueCover:
    """Cliques of the underlying graph covering every specified pair.
    """

    cliques: Tuple[Clique, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.cliques)

    def __iter__(self):
        return iter(self.cliques)

    def validate(self, matrix: PartialMatrix) -> None:
        """
        Raises:
            InvalidCover: if a clique leaves the index range, has an unspecified
                pair, or some specified pair lies in no clique.
        """
        covered = set()
        for clique in self.cliques:
            for v in clique:
                if not 0 <= v < matrix.n:
                    raise InvalidCover(f"Clique {clique} has index {v} out of range")
            for u, v in combinations(sorted(clique), 2):
                if not matrix.specified(u, v):
                    raise InvalidCover(f"Clique {clique} has unspecified pair {(u, v)}")
                covered.add((u, v))
        for edge in matrix.edges():
            if edge not in covered:
                raise InvalidCover(f"Specified pair {edge} is not covered")

    def without(self, vertex: int) -> "CliqueCover":
        """Drops `vertex` and renumbers the indices above it.
        """
        return CliqueCover(
            tuple(
                tuple(v - (v > vertex) for v in clique if v != vertex)
                for clique in self.cliques
            )
        )


def is_block_pattern(
    matrix: PartialMatrix, rows: Iterable[int], cols: Iterable[int]
) -> bool:
    rows, cols = set(rows), set(cols)
    if rows & cols:
        return False
    return all(not matrix.specified(i, j) for i in rows for j in cols)


def detect_block_pattern(
    matrix: PartialMatrix, t: int, budget: int = DEFAULT_SEARCH_BUDGET
) -> Optional[BlockPatternWitness]:
    """
    Searches for t rows and t other columns whose shared entries are all
    unspecified, extending row sets in ascending order while the common
    unspecified columns can still number t.

    Raises:
        BudgetExceeded: if more than `budget` row sets are examined.
    """
    if t < 1:
        raise ValueError(f"Block size must be positive, got {t}")
    n = matrix.n
    unspecified = [
        {j for j in range(n) if j != i and not matrix.specified(i, j)} for i in range(n)
    ]
    candidates = [i for i in range(n) if len(unspecified[i]) >= t]
    nodes = [0]

    def extend(start: int, rows: List[int], common: Set[int]):
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExceeded("Block pattern search", budget)
        if len(rows) == t:
            cols = sorted(common - set(rows))
            return BlockPatternWitness(tuple(rows), tuple(cols[:t]))
        for pos in range(start, len(candidates)):
            r = candidates[pos]
            narrowed = common & unspecified[r]
            if len(narrowed - set(rows) - {r}) >= t:
                found = extend(pos + 1, rows + [r], narrowed)
                if found is not None:
                    return found
        return None

    return extend(0, [], set(range(n)))


def ramsey_independent_set(
    complement: nx.Graph,
    target: int,
    clique_size: Optional[int] = None,
    budget: int = DEFAULT_SEARCH_BUDGET,
) -> Tuple[int, ...]:
    """
    Constructive Ramsey search: take the smallest vertex, look for the rest of an
    independent set among its non-neighbors, and otherwise for the rest of a
    clique among its neighbors.

    Args:
        complement: The graph to search (the complement of the underlying graph,
            so independent sets here are cliques of specified entries).
        target: Size of the independent set wanted.
        clique_size: Size of a clique the graph is promised not to contain; None
            for no promise.
        budget: Node budget.

    Raises:
        TargetUnreachable: if the vertices run out, or a clique of `clique_size`
            turns up instead.
        BudgetExceeded: if the search visits more than `budget` nodes.
    """
    nodes = [0]

    def find(vertices: List[int], s: Optional[int], t: int):
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExceeded("Ramsey search", budget)
        if t <= 0:
            return True, []
        if s is not None and s <= 0:
            return False, []
        if not vertices:
            return None
        v, rest = vertices[0], vertices[1:]
        neighbors = [u for u in rest if complement.has_edge(v, u)]
        others = [u for u in rest if not complement.has_edge(v, u)]
        found = find(others, s, t - 1)
        if found is not None:
            independent, members = found
            return (True, [v] + members) if independent else found
        found = find(neighbors, None if s is None else s - 1, t)
        if found is not None:
            independent, members = found
            return found if independent else (False, [v] + members)
        return None

    found = find(sorted(complement), clique_size, target)
    if found is None:
        raise TargetUnreachable(f"No independent set of size {target}")
    independent, members = found
    if not independent:
        raise TargetUnreachable(
            f"Found a clique {tuple(members)} of size {clique_size} instead of an "
            f"independent set of size {target}"
        )
    return tuple(sorted(members))


def _basis_of(
    matrix: PartialMatrix, indices: Sequence[int], tol: Tolerances
) -> Tuple[int, ...]:
    indices = list(indices)
    if not indices:
        return ()
    local = metric_basis(matrix.submatrix(indices), tol)
    return tuple(indices[i] for i in local)


def _disjoint_bases(
    matrix: PartialMatrix, clique: Sequence[int], count: int, tol: Tolerances
) -> List[Tuple[int, ...]]:
    bases = []
    remaining = list(clique)
    for _ in range(count):
        if not remaining:
            break
        basis = _basis_of(matrix, remaining, tol)
        bases.append(basis)
        remaining = [v for v in remaining if v not in basis]
    return bases


class IrrelevanceSchedule(ABC):
    """Decides which vertices of a large clique must be kept.
    """

    @abstractmethod
    def protected(
        self, matrix: PartialMatrix, clique: Sequence[int], tol: Tolerances
    ) -> Set[int]:
        pass


@dataclass(frozen=True)
class BlockPatternSchedule(IrrelevanceSchedule):
    """
    For matrices without a t-block pattern: t disjoint bases of the clique, plus a
    basis of the clique neighborhood of every outside vertex that misses some
    vertex of each of those bases.
    """

    t: int

    def protected(self, matrix, clique, tol):
        bases = _disjoint_bases(matrix, clique, self.t, tol)
        keep = set().union(*bases)
        members = set(clique)
        for y in range(matrix.n):
            if y in members:
                continue
            if all(any(not matrix.specified(y, x) for x in basis) for basis in bases):
                neighborhood = [x for x in clique if matrix.specified(y, x)]
                keep.update(_basis_of(matrix, neighborhood, tol))
        return keep


@dataclass(frozen=True)
class MaxDegreeSchedule(IrrelevanceSchedule):
    """For rows with at most `max_unspecified` gaps: that many plus one bases.
    """

    max_unspecified: int

    def protected(self, matrix, clique, tol):
        return set().union(
            *_disjoint_bases(matrix, clique, self.max_unspecified + 1, tol)
        )


@dataclass(frozen=True)
class CliqueCoverSchedule(IrrelevanceSchedule):
    """A basis of the clique's intersection with every cover clique, itself included.
    """

    cover: CliqueCover

    def protected(self, matrix, clique, tol):
        members = set(clique)
        keep = set()
        for other in self.cover:
            keep.update(_basis_of(matrix, sorted(members & set(other)), tol))
        return keep


def find_irrelevant_in_clique(
    matrix: PartialMatrix,
    clique: Sequence[int],
    d: int,
    schedule: IrrelevanceSchedule,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Optional[int]:
    """
    Smallest vertex of a fully specified `clique` outside the bases the
    `schedule` protects, or None if every vertex is protected.

    Raises:
        NotEDM: if a basis is taken of a submatrix that is not an EDM.
    """
    protected = schedule.protected(matrix, clique, tol)
    spare = sorted(set(clique) - protected)
    return spare[0] if spare else None


def _solve_complete(
    matrix: PartialMatrix, d: int, kept: Sequence[int], tol: Tolerances
) -> Verdict:
    try:
        realization = realize(matrix, d, tol)
    except NotEmbeddable as err:
        return Verdict.no(witness=tuple(kept), detail=str(err.certificate))
    return Verdict.yes(matrix.values.copy(), realization, detail="complete matrix")


def _failing_clique(
    matrix: PartialMatrix,
    cliques: Sequence[Sequence[int]],
    d: int,
    tol: Tolerances,
    threads: int,
) -> Optional[Tuple[int, ...]]:
    def fails(clique: Sequence[int]) -> bool:
        try:
            realize(matrix.submatrix(clique), d, tol)
            return False
        except NotEmbeddable:
            return True

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(fails, cliques))
    else:
        results = [fails(clique) for clique in cliques]
    for clique, failed in zip(cliques, results):
        if failed:
            return tuple(clique)
    return None


def _anchor_checks(
    matrix: PartialMatrix, clique: Sequence[int], d: int, tol: Tolerances, threads: int
) -> Optional[Tuple[int, ...]]:
    members = set(clique)
    cliques = [list(clique)] + [
        sorted([v] + [x for x in clique if matrix.specified(v, x)])
        for v in range(matrix.n)
        if v not in members
    ]
    return _failing_clique(matrix, cliques, d, tol, threads)


class _Compression:
    """Round bookkeeping shared by the three schemes.
    """

    def __init__(self, matrix: PartialMatrix, d: int, tol: Tolerances):
        self.matrix = matrix
        self.d = d
        self.tol = tol
        self.kept = list(range(matrix.n))
        self.removed: List[int] = []

    def original(self, indices: Iterable[int]) -> Tuple[int, ...]:
        return tuple(sorted(self.kept[i] for i in indices))

    def delete(self, w: int, reason: str) -> None:
        logger.debug(
            "Round {}: removing {} (original {}), {}",
            len(self.removed) + 1,
            w,
            self.kept[w],
            reason,
        )
        self.removed.append(self.kept.pop(w))
        self.matrix = self.matrix.delete(w)

    def solved(self, verdict: Verdict) -> CompressOutcome:
        return CompressOutcome(
            OutcomeKind.SOLVED,
            self.matrix,
            tuple(self.kept),
            tuple(self.removed),
            verdict,
        )

    def no(self, clique: Sequence[int]) -> CompressOutcome:
        witness = self.original(clique)
        return self.solved(
            Verdict.no(witness=witness, detail=f"clique {witness} does not embed")
        )

    def solve_complete(self) -> CompressOutcome:
        return self.solved(
            _solve_complete(self.matrix, self.d, tuple(self.kept), self.tol)
        )

    def reduced(self) -> CompressOutcome:
        logger.debug(
            "Reduced to order {} after removing {} vertices",
            self.matrix.n,
            len(self.removed),
        )
        return CompressOutcome(
            OutcomeKind.REDUCED, self.matrix, tuple(self.kept), tuple(self.removed)
        )


def compress_ktt(
    matrix: PartialMatrix,
    d: int,
    t: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    verify: bool = False,
    threads: int = 1,
) -> CompressOutcome:
    """
    Compression for matrices without a t-block pattern, down to fewer than
    rho(d, t) rows.

    Args:
        matrix: The instance.
        d: Target dimension.
        t: Block size the matrix is promised to exclude.
        tol: Tolerances.
        verify: Check the promise with :func:`detect_block_pattern` first.
        threads: Concurrency for the per-round clique checks.

    Raises:
        PreconditionViolated: if `verify` finds a t-block pattern.
    """
    if verify:
        witness = detect_block_pattern(matrix, t)
        if witness is not None:
            raise PreconditionViolated(
                f"Matrix has a {t}-block pattern: rows {witness.rows}, "
                f"columns {witness.cols}"
            )
    state = _Compression(matrix, d, tol)
    size, gate = eta(d, t), rho(d, t)
    while True:
        current = state.matrix
        if current.is_complete:
            return state.solve_complete()
        if current.n < gate:
            return state.reduced()
        clique = ramsey_independent_set(
            nx.complement(current.graph), size, clique_size=2 * t
        )
        failing = _anchor_checks(current, clique, d, tol, threads)
        if failing is not None:
            return state.no(failing)
        w = find_irrelevant_in_clique(current, clique, d, BlockPatternSchedule(t), tol)
        if w is None:
            logger.warning("No irrelevant vertex in clique {}", clique)
            return state.reduced()
        state.delete(w, "block-pattern round")


def _greedy_independent(complement: nx.Graph, size: int) -> List[int]:
    chosen: List[int] = []
    for v in sorted(complement):
        if len(chosen) == size:
            break
        if not any(complement.has_edge(v, u) for u in chosen):
            chosen.append(v)
    return chosen


def compress_maxdeg(
    matrix: PartialMatrix,
    d: int,
    max_unspecified: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    threads: int = 1,
) -> CompressOutcome:
    """
    Compression for matrices whose rows have at most `max_unspecified`
    unspecified entries, down to (d+1)(max_unspecified+1)^2 rows.

    Raises:
        PreconditionViolated: if some row has more unspecified entries.
    """
    counts = matrix.unspecified_counts()
    if counts.max(initial=0) > max_unspecified:
        row = int(counts.argmax())
        raise PreconditionViolated(
            f"Row {row} has {int(counts[row])} unspecified entries, more than "
            f"{max_unspecified}"
        )
    state = _Compression(matrix, d, tol)
    bound = (d + 1) * (max_unspecified + 1) ** 2
    size = (d + 1) * (max_unspecified + 1) + 1
    schedule = MaxDegreeSchedule(max_unspecified)
    while True:
        current = state.matrix
        if current.is_complete:
            return state.solve_complete()
        if current.n <= bound:
            return state.reduced()
        clique = _greedy_independent(nx.complement(current.graph), size)
        failing = _anchor_checks(current, clique, d, tol, threads)
        if failing is not None:
            return state.no(failing)
        w = find_irrelevant_in_clique(current, clique, d, schedule, tol)
        if w is None:
            logger.warning("No irrelevant vertex in clique {}", clique)
            return state.reduced()
        state.delete(w, "bounded-gap round")


def compress_cliquecover(
    matrix: PartialMatrix,
    d: int,
    cover: CliqueCover,
    tol: Tolerances = DEFAULT_TOLERANCES,
    threads: int = 1,
) -> CompressOutcome:
    """
    Compression given an edge clique cover of size k, down to (d+1)k^2 rows.
    Isolated vertices are removed first in each round past the size gate.

    Raises:
        InvalidCover: if `cover` is not an edge clique cover of the specified
            entries.
    """
    cover.validate(matrix)
    state = _Compression(matrix, d, tol)
    failing = _failing_clique(
        matrix, [sorted(c) for c in cover if len(c) > 1], d, tol, threads
    )
    if failing is not None:
        return state.no(failing)
    k = len(cover)
    bound = (d + 1) * k ** 2
    while True:
        current = state.matrix
        if current.is_complete:
            return state.solve_complete()
        if current.n <= bound:
            return state.reduced()
        graph = current.graph
        isolated = [v for v in range(current.n) if graph.degree(v) == 0]
        if isolated:
            w = isolated[0]
            state.delete(w, "isolated")
        else:
            i = next(
                i for i, clique in enumerate(cover) if len(clique) > (d + 1) * k
            )
            w = find_irrelevant_in_clique(
                current, sorted(cover.cliques[i]), d, CliqueCoverSchedule(cover), tol
            )
            if w is None:
                logger.warning("No irrelevant vertex in cover clique {}", i)
                return state.reduced()
            state.delete(w, f"cover clique {i}")
        cover = cover.without(w)


def edge_clique_cover_search(
    graph: nx.Graph, kmax: int, budget: int = DEFAULT_SEARCH_BUDGET
) -> Optional[CliqueCover]:
    """
    Finds a minimum edge clique cover of size at most `kmax` by assigning each
    uncovered edge, in order, to a clique it can join or to a new clique.

    Raises:
        PreconditionViolated: if `kmax` exceeds COVER_SEARCH_MAX_K.
        BudgetExceeded: if the search visits more than `budget` nodes.
    """
    if kmax > COVER_SEARCH_MAX_K:
        raise PreconditionViolated(
            f"kmax={kmax} exceeds the cover search limit {COVER_SEARCH_MAX_K}"
        )
    edges = sorted(tuple(sorted(e)) for e in graph.edges())
    if not edges:
        return CliqueCover()
    nodes = [0]

    def joinable(clique: Set[int], u: int, v: int) -> bool:
        return all(
            graph.has_edge(x, y) for x in (u, v) for y in clique if x != y
        )

    def assign(cliques: List[Set[int]], k: int) -> Optional[List[Set[int]]]:
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExceeded("Edge clique cover search", budget)
        uncovered = next(
            (e for e in edges if not any(e[0] in c and e[1] in c for c in cliques)),
            None,
        )
        if uncovered is None:
            return cliques
        u, v = uncovered
        for pos, clique in enumerate(cliques):
            if joinable(clique, u, v):
                grown = cliques[:pos] + [clique | {u, v}] + cliques[pos + 1 :]
                found = assign(grown, k)
                if found is not None:
                    return found
        if len(cliques) < k:
            return assign(cliques + [{u, v}], k)
        return None

    for k in range(1, kmax + 1):
        found = assign([], k)
        if found is not None:
            return CliqueCover(tuple(sorted(tuple(sorted(c)) for c in found)))
    return None

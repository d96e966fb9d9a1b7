"""Chordal graphs and completion of partial matrices with chordal patterns.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from loguru import logger
import networkx as nx
import numpy as np
from scipy import linalg

from edmtools.edm import is_embeddable, realize
from edmtools.matrix import (
    DEFAULT_TOLERANCES,
    Pair,
    PartialMatrix,
    Realization,
    Tolerances,
    pair,
    squared_distances,
)
from edmtools.utils import (
    BudgetExceeded,
    InternalGlueError,
    NotChordal,
    PreconditionViolated,
)
from edmtools.verdict import Answer, Verdict


FILL_IN_MAX_K = 8
"""Largest fill-in size the branching search accepts."""
DEFAULT_SEARCH_BUDGET = 1_000_000
"""Node budget for the exhaustive combinatorial searches."""
RANK_RCOND = 1e-6
"""Relative singular-value cutoff when measuring the span of a separator."""


Clique = Tuple[int, ...]


@dataclass(frozen=True)
class EliminationOrdering:
    """A vertex order; each vertex's later neighbors must form a clique.
    """

    order: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[int]:
        return iter(self.order)

    def later_neighbors(self, graph: nx.Graph) -> Dict[int, List[int]]:
        position = {v: i for i, v in enumerate(self.order)}
        return {
            v: sorted(u for u in graph[v] if position[u] > position[v])
            for v in self.order
        }


@dataclass(frozen=True)
class ChordalityCheck:
    """
    Result of :func:`is_chordal`: truthy with a perfect elimination ordering, or
    falsy with a chordless cycle of length at least four.
    """

    ordering: Optional[EliminationOrdering] = None
    cycle: Optional[Tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.ordering is not None


@dataclass(frozen=True)
class FillIn:
    """Non-edges whose addition makes a graph chordal.
    """

    edges: FrozenSet[Pair]

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.edges))

    def apply(self, graph: nx.Graph) -> nx.Graph:
        filled = nx.Graph(graph)
        filled.add_edges_from(self.edges)
        return filled


def maximum_cardinality_search(graph: nx.Graph) -> EliminationOrdering:
    """
    Visits vertices by decreasing number of visited neighbors (ties to the smallest
    label); the reverse visit order is a perfect elimination ordering whenever the
    graph is chordal.
    """
    weight = {v: 0 for v in graph}
    unvisited = set(graph)
    visited = []
    while unvisited:
        v = min(unvisited, key=lambda u: (-weight[u], u))
        unvisited.remove(v)
        visited.append(v)
        for u in graph[v]:
            if u in unvisited:
                weight[u] += 1
    return EliminationOrdering(tuple(reversed(visited)))


def is_perfect_elimination_ordering(
    graph: nx.Graph, ordering: EliminationOrdering
) -> bool:
    if set(ordering.order) != set(graph) or len(ordering) != len(graph):
        return False
    for v, later in ordering.later_neighbors(graph).items():
        for a, b in combinations(later, 2):
            if not graph.has_edge(a, b):
                return False
    return True


def chordless_cycle(graph: nx.Graph) -> Optional[Tuple[int, ...]]:
    """
    Finds a chordless cycle of length at least four, or None if the graph is
    chordal. The cycle runs v, u, ..., w where u and w are non-adjacent neighbors
    of v joined by a shortest path avoiding the rest of v's closed neighborhood.
    """
    for v in sorted(graph):
        neighbors = sorted(graph[v])
        for u, w in combinations(neighbors, 2):
            if graph.has_edge(u, w):
                continue
            blocked = (set(graph[v]) | {v}) - {u, w}
            sub = graph.subgraph(x for x in graph if x not in blocked)
            try:
                path = nx.shortest_path(sub, u, w)
            except nx.NetworkXNoPath:
                continue
            return (v, *path)
    return None


def is_chordal(graph: nx.Graph) -> ChordalityCheck:
    ordering = maximum_cardinality_search(graph)
    if is_perfect_elimination_ordering(graph, ordering):
        return ChordalityCheck(ordering=ordering)
    cycle = chordless_cycle(graph)
    if cycle is None:
        raise RuntimeError("Elimination ordering failed but no chordless cycle found")
    return ChordalityCheck(cycle=cycle)


def _canonical(cliques) -> List[Clique]:
    return sorted(set(tuple(sorted(c)) for c in cliques))


def maximal_cliques_chordal(
    graph: nx.Graph, ordering: Optional[EliminationOrdering] = None
) -> List[Clique]:
    """
    Lists the maximal cliques of a chordal graph from a perfect elimination
    ordering (computed if not given).

    Raises:
        NotChordal: if the ordering is not a perfect elimination ordering.
    """
    if ordering is None:
        ordering = maximum_cardinality_search(graph)
    if not is_perfect_elimination_ordering(graph, ordering):
        raise NotChordal(chordless_cycle(graph) or ())
    candidates = [
        frozenset([v, *later]) for v, later in ordering.later_neighbors(graph).items()
    ]
    maximal = [c for c in candidates if not any(c < other for other in candidates)]
    return _canonical(maximal)


def maximal_cliques(graph: nx.Graph) -> List[Clique]:
    """Maximal cliques of an arbitrary graph.
    """
    return _canonical(nx.find_cliques(graph))


def clique_tree(cliques: Sequence[Clique]) -> nx.Graph:
    """
    A clique tree (junction tree) over `cliques` of a connected chordal graph: the
    maximum-weight spanning tree of the clique intersection graph, nodes being
    positions in `cliques`.
    """
    intersection = nx.Graph()
    intersection.add_nodes_from(range(len(cliques)))
    for i, j in combinations(range(len(cliques)), 2):
        shared = len(set(cliques[i]) & set(cliques[j]))
        if shared:
            intersection.add_edge(i, j, weight=shared)
    return nx.maximum_spanning_tree(intersection)


def min_fill_in(
    graph: nx.Graph, kmax: int, budget: int = DEFAULT_SEARCH_BUDGET
) -> Optional[FillIn]:
    """
    Finds a minimum fill-in of size at most `kmax` by branching on the chords of
    a chordless cycle, with iterative deepening on the size.

    Returns:
        The fill-in, or None if every fill-in is larger than `kmax`.

    Raises:
        PreconditionViolated: if `kmax` exceeds FILL_IN_MAX_K.
        BudgetExceeded: if the search visits more than `budget` nodes.
    """
    if kmax > FILL_IN_MAX_K:
        raise PreconditionViolated(
            f"kmax={kmax} exceeds the fill-in search limit {FILL_IN_MAX_K}"
        )
    work = nx.Graph(graph)
    nodes = [0]
    failed: Dict[FrozenSet[Pair], int] = {}

    def branch(added: FrozenSet[Pair], k: int) -> Optional[FrozenSet[Pair]]:
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExceeded("Fill-in search", budget)
        if failed.get(added, -1) >= k:
            return None
        cycle = chordless_cycle(work)
        if cycle is None:
            return added
        if k > 0:
            length = len(cycle)
            chords = sorted(
                pair(cycle[a], cycle[b])
                for a, b in combinations(range(length), 2)
                if (b - a) % length not in (1, length - 1)
            )
            for chord in chords:
                work.add_edge(*chord)
                found = branch(added | {chord}, k - 1)
                work.remove_edge(*chord)
                if found is not None:
                    return found
        failed[added] = k
        return None

    for k in range(kmax + 1):
        found = branch(frozenset(), k)
        if found is not None:
            logger.debug("Minimum fill-in has {} edges ({} nodes)", k, nodes[0])
            return FillIn(found)
    return None


def _require_chordal(graph: nx.Graph) -> EliminationOrdering:
    check = is_chordal(graph)
    if not check:
        raise NotChordal(check.cycle)
    return check.ordering


def chordal_edm_check(
    matrix: PartialMatrix,
    d: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    threads: int = 1,
) -> Verdict:
    """
    Decides a partial matrix with a chordal pattern: it has a completion in R^d
    if and only if every maximal clique's submatrix is d-embeddable.

    Returns:
        A yes Verdict (without completion) or a no Verdict whose witness is the
        first failing clique in canonical order.

    Raises:
        NotChordal: if the underlying graph is not chordal.
    """
    graph = matrix.graph
    cliques = maximal_cliques_chordal(graph, _require_chordal(graph))

    def check(clique: Clique) -> bool:
        return is_embeddable(matrix.submatrix(clique), d, tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(check, cliques))
    else:
        results = [check(clique) for clique in cliques]
    for clique, ok in zip(cliques, results):
        if not ok:
            return Verdict.no(
                witness=clique, detail=f"clique {clique} is not {d}-embeddable"
            )
    return Verdict(Answer.YES, detail=f"all {len(cliques)} cliques embed")


def _complement(basis: np.ndarray, d: int) -> np.ndarray:
    if basis.shape[1] == 0:
        comp = np.eye(d)
    else:
        comp = linalg.null_space(basis.T)
    for c in range(comp.shape[1]):
        nonzero = np.flatnonzero(np.abs(comp[:, c]) > 1e-12)
        if len(nonzero) and comp[nonzero[0], c] < 0:
            comp[:, c] = -comp[:, c]
    return comp


def _householder(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Orthogonal map sending unit vector `source` to unit vector `target`."""
    w = source - target
    norm = w @ w
    if norm < 1e-24:
        return np.eye(len(source))
    return np.eye(len(source)) - 2.0 * np.outer(w, w) / norm


def _place_clique(
    matrix: PartialMatrix,
    clique: Clique,
    placed: Dict[int, np.ndarray],
    component_points: Sequence[int],
    d: int,
    tol: Tolerances,
) -> None:
    local = realize(matrix.submatrix(clique), d, tol).points
    sep = [i for i, v in enumerate(clique) if v in placed]
    new = [i for i, v in enumerate(clique) if v not in placed]
    if not new:
        return
    length = np.sqrt(max(matrix.max_entry, np.finfo(float).tiny))
    p_sep = np.array([placed[clique[i]] for i in sep])
    q_sep = local[sep]
    p_center = p_sep.mean(axis=0)
    q_center = q_sep.mean(axis=0)
    a = p_sep - p_center
    b = q_sep - q_center
    ua = linalg.orth(a.T, rcond=RANK_RCOND) if a.any() else np.zeros((d, 0))
    ub = linalg.orth(b.T, rcond=RANK_RCOND) if b.any() else np.zeros((d, 0))
    if ua.shape[1] != ub.shape[1]:
        raise InternalGlueError(
            f"Separator of clique {clique} spans {ua.shape[1]} dimensions when "
            f"placed but {ub.shape[1]} when realized"
        )
    k = ua.shape[1]
    if k:
        rotation, _ = linalg.orthogonal_procrustes(b @ ub, a @ ua)
    else:
        rotation = np.zeros((0, 0))
    va = _complement(ua, d)
    vb = _complement(ub, d)
    free = d - k
    turn = np.eye(free)
    if free:
        placed_center = np.mean([placed[v] for v in component_points], axis=0)
        outward = (p_center - placed_center) @ va
        if np.linalg.norm(outward) <= 1e-9 * length:
            outward = np.eye(free)[0]
        spread = (local[new].mean(axis=0) - q_center) @ vb
        if np.linalg.norm(spread) > 1e-9 * length:
            turn = _householder(
                spread / np.linalg.norm(spread), outward / np.linalg.norm(outward)
            )

    def transform(q: np.ndarray) -> np.ndarray:
        rel = q - q_center
        return p_center + (rel @ ub) @ rotation @ ua.T + (rel @ vb) @ turn @ va.T

    glue = float(np.max(np.linalg.norm(transform(q_sep) - p_sep, axis=1)))
    if glue > np.sqrt(tol.real_threshold(matrix.max_entry)):
        raise InternalGlueError(
            f"Separator of clique {clique} misaligned by {glue:.3g}"
        )
    for i in new:
        placed[clique[i]] = transform(local[i])


def chordal_complete(
    matrix: PartialMatrix, d: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> Verdict:
    """
    Constructs a completion in R^d of a partial matrix with a chordal pattern by
    walking a clique tree, realizing each clique against its already-placed
    separator. Points left free by a low-rank separator are pushed away from the
    placed part. Components are laid out along the first axis, each shifted by the
    sum of the component diameters.

    Returns:
        A yes Verdict carrying the completion (specified entries copied from the
        input) and its realization, or the no Verdict of
        :func:`chordal_edm_check`.

    Raises:
        NotChordal: if the underlying graph is not chordal.
        InternalGlueError: if gluing exceeds the realization tolerance.
    """
    verdict = chordal_edm_check(matrix, d, tol)
    if verdict.answer is Answer.NO:
        return verdict
    n = matrix.n
    graph = matrix.graph
    cliques = maximal_cliques_chordal(graph)
    points = np.zeros((n, d))
    if d > 0:
        components = sorted(
            (sorted(c) for c in nx.connected_components(graph)), key=lambda c: c[0]
        )
        placed: Dict[int, np.ndarray] = {}
        spans = []
        for component in components:
            members = set(component)
            comp_cliques = [c for c in cliques if c[0] in members]
            tree = clique_tree(comp_cliques)
            root = comp_cliques[0]
            for v, p in zip(root, realize(matrix.submatrix(root), d, tol).points):
                placed[v] = p
            for _, child in nx.bfs_edges(tree, 0, sort_neighbors=sorted):
                _place_clique(
                    matrix,
                    comp_cliques[child],
                    placed,
                    [v for v in component if v in placed],
                    d,
                    tol,
                )
            coords = np.array([placed[v] for v in component])
            spans.append(float(np.sqrt(squared_distances(coords).max())))
        # no pair across components is specified
        shift = sum(spans)
        for rank, component in enumerate(components):
            for v in component:
                points[v] = placed[v]
                points[v, 0] += rank * shift
        logger.debug(
            "Glued {} cliques over {} components", len(cliques), len(components)
        )
    completion = squared_distances(points)
    mask = matrix.mask
    completion[mask] = matrix.values[mask]
    realization = Realization(points)
    residual = realization.residual(matrix)
    if residual > tol.real_threshold(matrix.max_entry):
        raise InternalGlueError(f"Completed realization has residual {residual:.3g}")
    if not is_embeddable(completion, d, tol):
        raise InternalGlueError(f"Completion is not {d}-embeddable")
    return Verdict.yes(completion, realization, detail="chordal completion")

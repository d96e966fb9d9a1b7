"""Instance generators: masked random point clouds and the weighted-graph
construction on a circle.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import ceil
from typing import Dict, List, Optional, Sequence, Set, Tuple

from loguru import logger
import networkx as nx
import numpy as np

from edmtools.chordal import is_chordal
from edmtools.compress import CliqueCover, detect_block_pattern
from edmtools.instances import Instance, Metadata
from edmtools.matrix import Pair, PartialMatrix, pair
from edmtools.utils import (
    InfeasibleMask,
    InvalidCover,
    PreconditionViolated,
    WeightOutOfRange,
)


SAXE_MAX_ORDER = 6
"""Largest weighted graph the circle construction accepts by default."""
BLOCK_CHECK_MAX_T = 3
"""Block-free masks are verified with the exhaustive search only up to this t."""


Weights = Sequence[Tuple[int, int, int]]


class MaskModel(ABC):
    """Chooses which entries of an n-point matrix to hide.
    """

    kind: str = ""

    @abstractmethod
    def hidden_pairs(self, n: int, rng: np.random.Generator) -> Set[Pair]:
        pass

    @property
    def params(self) -> Tuple[str, ...]:
        return ()

    def cover(self) -> Optional[CliqueCover]:
        return None

    def check(self, matrix: PartialMatrix) -> None:
        """
        Raises:
            InfeasibleMask: if `matrix` lacks the mask's defining property.
        """


@dataclass
class PerRowBudget(MaskModel):
    """At most `max_unspecified` hidden entries per row, hidden greedily at random.
    """

    max_unspecified: int
    kind = "per-row"

    @property
    def params(self):
        return (str(self.max_unspecified),)

    def hidden_pairs(self, n, rng):
        if self.max_unspecified < 0:
            raise InfeasibleMask("Row budget must be nonnegative")
        pairs = list(combinations(range(n), 2))
        counts = np.zeros(n, dtype=int)
        hidden = set()
        for k in rng.permutation(len(pairs)):
            i, j = pairs[k]
            if counts[i] < self.max_unspecified and counts[j] < self.max_unspecified:
                hidden.add((i, j))
                counts[i] += 1
                counts[j] += 1
        return hidden

    def check(self, matrix):
        if matrix.unspecified_counts().max(initial=0) > self.max_unspecified:
            raise InfeasibleMask(f"A row has more than {self.max_unspecified} gaps")


@dataclass
class BlockFree(MaskModel):
    """
    Hidden entries form disjoint groups of at most 2t-1 indices, so no t rows
    share t hidden columns.
    """

    t: int
    kind = "block-free"

    @property
    def params(self):
        return (str(self.t),)

    def hidden_pairs(self, n, rng):
        if self.t < 1:
            raise InfeasibleMask("Block size must be positive")
        order = rng.permutation(n)
        hidden = set()
        start = 0
        while start < n:
            size = int(rng.integers(1, 2 * self.t))
            group = sorted(int(v) for v in order[start : start + size])
            hidden.update(combinations(group, 2))
            start += size
        return hidden

    def check(self, matrix):
        if self.t <= BLOCK_CHECK_MAX_T and detect_block_pattern(matrix, self.t):
            raise InfeasibleMask(f"Mask has a {self.t}-block pattern")


@dataclass
class ChordalGraph(MaskModel):
    """
    Specified entries form a random chordal graph: each new vertex joins a random
    nonempty subset of a random existing clique, in a random vertex order.
    """

    kind = "chordal"

    def hidden_pairs(self, n, rng):
        order = [int(v) for v in rng.permutation(n)]
        graph = nx.Graph()
        graph.add_nodes_from(range(n))
        cliques: List[List[int]] = [[order[0]]]
        for v in order[1:]:
            base = cliques[int(rng.integers(len(cliques)))]
            size = int(rng.integers(1, len(base) + 1))
            joined = [int(u) for u in rng.choice(base, size=size, replace=False)]
            graph.add_edges_from((v, u) for u in joined)
            cliques.append(joined + [v])
        return {
            pair(i, j)
            for i, j in combinations(range(n), 2)
            if not graph.has_edge(i, j)
        }

    def check(self, matrix):
        if not is_chordal(matrix.graph):
            raise InfeasibleMask("Mask graph is not chordal")


@dataclass
class CliqueCoverMask(MaskModel):
    """
    Specified entries are the pairs sharing one of `k` random groups; every index
    joins at least one group and each group gets at least one index.
    """

    k: int
    kind = "cover"

    def __post_init__(self):
        self._groups: Tuple[Tuple[int, ...], ...] = ()

    @property
    def params(self):
        return (str(self.k),)

    def hidden_pairs(self, n, rng):
        if not 1 <= self.k <= n:
            raise InfeasibleMask(f"Cannot cover {n} indices with {self.k} groups")
        groups: List[Set[int]] = [set() for _ in range(self.k)]
        order = [int(v) for v in rng.permutation(n)]
        for g, v in enumerate(order[: self.k]):
            groups[g].add(v)
        for v in order[self.k :]:
            groups[int(rng.integers(self.k))].add(v)
        for v in range(n):
            for g in range(self.k):
                if v not in groups[g] and rng.random() < 0.15:
                    groups[g].add(v)
        self._groups = tuple(tuple(sorted(g)) for g in groups)
        shared = {p for g in self._groups for p in combinations(g, 2)}
        return {p for p in combinations(range(n), 2) if p not in shared}

    def cover(self):
        return CliqueCover(self._groups)

    def check(self, matrix):
        try:
            self.cover().validate(matrix)
        except InvalidCover as err:
            raise InfeasibleMask(str(err))


@dataclass
class ExplicitGraph(MaskModel):
    """Specified entries are exactly `edges`.
    """

    edges: Tuple[Pair, ...]
    kind = "explicit"

    def hidden_pairs(self, n, rng):
        keep = {pair(*e) for e in self.edges}
        for i, j in keep:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise InfeasibleMask(f"Edge {(i, j)} is not a pair of 0..{n - 1}")
        return {p for p in combinations(range(n), 2) if p not in keep}


def mask_from_name(kind: str, param: Optional[int] = None) -> MaskModel:
    if kind == PerRowBudget.kind:
        return PerRowBudget(1 if param is None else param)
    elif kind == BlockFree.kind:
        return BlockFree(2 if param is None else param)
    elif kind == ChordalGraph.kind:
        return ChordalGraph()
    elif kind == CliqueCoverMask.kind:
        return CliqueCoverMask(2 if param is None else param)
    else:
        raise ValueError(f"Unsupported mask kind: {kind}")


def gen_masked_pointcloud(
    n: int, d: int, mask: MaskModel, seed: int = 0
) -> Instance:
    """
    Samples n points uniformly in [0,1]^d and hides entries per `mask`. The
    points travel as ground truth, so the instance is a yes-instance.

    Raises:
        InfeasibleMask: if the mask cannot be realized for n, or the result lacks
            its defining property.
    """
    if n < 1:
        raise InfeasibleMask("Need at least one point")
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, 1.0, size=(n, d))
    hidden = mask.hidden_pairs(n, rng)
    matrix = PartialMatrix.from_points(points, hidden)
    mask.check(matrix)
    cover = mask.cover()
    metadata = Metadata(
        points=points,
        generator="masked",
        seed=seed,
        mask=(mask.kind,) + mask.params,
        cliques=() if cover is None else cover.cliques,
    )
    logger.debug(
        "Generated {} points in R^{} with {} hidden pairs", n, d, len(hidden)
    )
    return Instance(matrix, d, metadata)


def _sin_squared(w: int, n: int) -> Fraction:
    """sin^2(w * x) where sin(x) = 1 / (2n), as an exact rational."""
    s = Fraction(1, 4 * n * n)
    c = 1 - s
    if w == 1:
        return s
    if w == 2:
        return 4 * s * c
    if w == 3:
        return s * (3 - 4 * s) ** 2
    if w == 4:
        return 16 * s * c * (1 - 2 * s) ** 2
    raise WeightOutOfRange(f"Weight {w} is not in 1..4")


def saxe_entry(w: int, n: int) -> int:
    """Squared chord length 4 r^2 sin^2(w alpha / 2) for r = 16 n^4."""
    value = 4 * (16 * n ** 4) ** 2 * _sin_squared(w, n)
    if value.denominator != 1:
        raise ArithmeticError(f"Entry for weight {w} is not integral")
    return value.numerator


def _check_weights(weights: Weights) -> int:
    if not weights:
        raise PreconditionViolated("Weighted graph has no edges")
    n = max(max(u, v) for u, v, _ in weights) + 1
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for u, v, w in weights:
        if w not in (1, 2, 3, 4):
            raise WeightOutOfRange(f"Weight {w} of edge {(u, v)} is not in 1..4")
        if u == v or min(u, v) < 0:
            raise PreconditionViolated(f"Invalid edge {(u, v)}")
        graph.add_edge(u, v)
    if not nx.is_connected(graph):
        raise PreconditionViolated("Weighted graph is not connected")
    return n


def line_placement(weights: Weights) -> Optional[Dict[int, int]]:
    """
    Integer positions with |pos_u - pos_v| = w for every weighted edge, found by
    trying both signs along a spanning tree; None if no signing works.
    """
    n = _check_weights(weights)
    graph = nx.Graph()
    for u, v, w in weights:
        graph.add_edge(u, v, weight=w)
    tree = list(nx.bfs_edges(graph, 0))
    for signs in product((1, -1), repeat=len(tree)):
        pos = {0: 0}
        for (u, v), sign in zip(tree, signs):
            pos[v] = pos[u] + sign * graph[u][v]["weight"]
        if all(abs(pos[u] - pos[v]) == w for u, v, w in weights):
            return {v: pos[v] for v in range(n)}
    return None


def line_realizable(weights: Weights) -> bool:
    return line_placement(weights) is not None


def gen_saxe(
    weights: Weights,
    epsilon: float,
    placement: Optional[Dict[int, int]] = None,
    max_order: int = SAXE_MAX_ORDER,
) -> Instance:
    """
    Encodes a weighted graph on vertices 0..n-1 as a 2-dimensional instance:
    weighted edges become chords of a circle of radius r = 16 n^4 spanning w
    steps of angle alpha = 2 arcsin(1 / (2n)), and ceil(n^2 / (2 epsilon))
    coinciding anchor points sit at the center. Pairs of vertices without an
    edge stay unspecified, at most epsilon times the order.

    Args:
        weights: (u, v, w) triples with w in 1..4 forming a connected graph.
        epsilon: Fraction of entries allowed to be unspecified, in (0, 1).
        placement: Optional line positions realizing the weights; the matching
            circle points are stored as ground truth.
        max_order: Cap on n.

    Raises:
        WeightOutOfRange: if a weight is outside 1..4.
        PreconditionViolated: if the graph is not connected or too large.
        ValueError: if epsilon is outside (0, 1) or `placement` does not realize
            the weights.
    """
    n = _check_weights(weights)
    if n > max_order:
        raise PreconditionViolated(f"Weighted graph has {n} > {max_order} vertices")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    anchors = ceil(Fraction(n * n) / (2 * Fraction(str(epsilon))))
    total = n + anchors
    r = 16 * n ** 4
    values = np.full((total, total), np.nan)
    np.fill_diagonal(values, 0.0)
    for u, v, w in weights:
        values[u, v] = values[v, u] = saxe_entry(w, n)
    values[:n, n:] = values[n:, :n] = r * r
    values[n:, n:] = 0.0
    points = None
    if placement is not None:
        for u, v, w in weights:
            if abs(placement[u] - placement[v]) != w:
                raise ValueError(f"Placement does not realize edge {(u, v)}")
        alpha = 2.0 * np.arcsin(1.0 / (2 * n))
        points = np.zeros((total, 2))
        for u in range(n):
            angle = placement[u] * alpha
            points[u] = (r * np.cos(angle), r * np.sin(angle))
    metadata = Metadata(
        points=points,
        generator=f"saxe epsilon={epsilon}",
        weights=tuple((int(u), int(v), int(w)) for u, v, w in weights),
    )
    return Instance(PartialMatrix(values), 2, metadata)

import networkx as nx
import numpy as np
import pytest

from edmtools.compress import (
    BlockPatternSchedule,
    CliqueCover,
    MaxDegreeSchedule,
    OutcomeKind,
    compress_cliquecover,
    compress_ktt,
    compress_maxdeg,
    detect_block_pattern,
    edge_clique_cover_search,
    eta,
    find_irrelevant_in_clique,
    is_block_pattern,
    ramsey_independent_set,
    rho,
)
from edmtools.edm import is_embeddable
from edmtools.generators import CliqueCoverMask, PerRowBudget, gen_masked_pointcloud
from edmtools.matrix import PartialMatrix, Realization, squared_distances, verify_realization
from edmtools.oracle import oracle_solve
from edmtools.utils import (
    BudgetExceeded,
    InvalidCover,
    PreconditionViolated,
    TargetUnreachable,
)
from edmtools.verdict import Answer


LINE5 = squared_distances(np.arange(5.0).reshape(5, 1))


@pytest.fixture
def block9(data_matrix):
    return data_matrix("block9.edm")


def check_trace(original, outcome):
    assert sorted(outcome.kept + outcome.removed) == list(range(original.n))
    assert outcome.instance == original.principal(outcome.kept)


def test_bounds():
    assert eta(2, 2) == 34
    assert rho(2, 2) == 7140
    assert eta(0, 2) == 4
    assert rho(0, 2) == 20


def test_block_patterns(block9):
    witness = detect_block_pattern(block9, 4)
    assert witness is not None
    assert len(witness.rows) == len(witness.cols) == 4
    assert is_block_pattern(block9, witness.rows, witness.cols)
    assert detect_block_pattern(block9, 5) is None
    assert is_block_pattern(block9, (2, 7, 8), (0, 4, 6))
    assert is_block_pattern(block9, (0, 3, 4, 8), (1, 2, 6, 7))
    assert not is_block_pattern(block9, (0, 1), (1, 2))
    assert not is_block_pattern(block9, (0,), (5,))
    with pytest.raises(BudgetExceeded):
        detect_block_pattern(block9, 4, budget=2)


def test_ramsey_search():
    empty = nx.empty_graph(5)
    assert ramsey_independent_set(empty, 3) == (0, 1, 2)
    with pytest.raises(TargetUnreachable):
        ramsey_independent_set(empty, 6)
    with pytest.raises(TargetUnreachable):
        ramsey_independent_set(nx.complete_graph(4), 2, clique_size=3)
    path = nx.path_graph(5)
    found = ramsey_independent_set(path, 3)
    assert len(found) == 3
    assert not any(path.has_edge(u, v) for u in found for v in found)


def test_find_irrelevant():
    matrix = PartialMatrix(LINE5)
    assert find_irrelevant_in_clique(matrix, range(5), 1, MaxDegreeSchedule(0)) == 2
    assert find_irrelevant_in_clique(matrix, range(5), 1, MaxDegreeSchedule(1)) == 4
    assert find_irrelevant_in_clique(matrix, range(4), 1, MaxDegreeSchedule(1)) is None


def test_ktt_below_gate(block9):
    outcome = compress_ktt(block9, 2, 5)
    assert outcome.kind is OutcomeKind.REDUCED
    assert outcome.removed == ()
    with pytest.raises(PreconditionViolated):
        compress_ktt(block9, 2, 4, verify=True)


def test_ktt_rounds():
    # 23 coincident points with one hidden pair per triple
    values = np.zeros((23, 23))
    for i in range(0, 21, 3):
        values[i, i + 1] = values[i + 1, i] = np.nan
    original = PartialMatrix(values)
    outcome = compress_ktt(original, 0, 2, verify=True)
    assert outcome.kind is OutcomeKind.REDUCED
    assert outcome.instance.n == rho(0, 2) - 1
    check_trace(original, outcome)


def test_maxdeg():
    original = gen_masked_pointcloud(20, 2, PerRowBudget(1), seed=2).matrix
    outcome = compress_maxdeg(original, 2, 1)
    assert outcome.kind is OutcomeKind.REDUCED
    assert outcome.instance.n <= 12
    check_trace(original, outcome)
    before = oracle_solve(original, 2, restarts=8).verdict
    after = oracle_solve(outcome.instance, 2, restarts=8).verdict
    assert before.answer is after.answer is Answer.YES
    with pytest.raises(PreconditionViolated):
        compress_maxdeg(original, 2, 0)


def test_complete_instances_are_solved():
    triangle = PartialMatrix(np.ones((3, 3)) - np.eye(3))
    yes = compress_maxdeg(triangle, 2, 0)
    assert yes.kind is OutcomeKind.SOLVED
    assert yes.answer is Answer.YES
    assert verify_realization(triangle, yes.verdict.realization)
    no = compress_maxdeg(triangle, 1, 0)
    assert no.answer is Answer.NO
    assert no.verdict.witness == (0, 1, 2)


def test_complete_cover_clique():
    matrix = PartialMatrix(squared_distances(np.arange(12.0).reshape(12, 1)))
    outcome = compress_cliquecover(matrix, 1, CliqueCover((tuple(range(12)),)))
    assert outcome.kind is OutcomeKind.SOLVED
    assert outcome.answer is Answer.YES


def test_cliquecover():
    instance = gen_masked_pointcloud(30, 1, CliqueCoverMask(2), seed=5)
    original = instance.matrix
    outcome = compress_cliquecover(original, 1, instance.cover)
    assert outcome.answer is not Answer.NO
    if outcome.kind is OutcomeKind.REDUCED:
        assert outcome.instance.n <= 8
    check_trace(original, outcome)
    with pytest.raises(InvalidCover):
        compress_cliquecover(original, 1, CliqueCover(((0, 1),)))


def test_cliquecover_failing_clique():
    simplex = PartialMatrix(np.ones((4, 4)) - np.eye(4))
    outcome = compress_cliquecover(simplex, 2, CliqueCover(((0, 1, 2, 3),)))
    assert outcome.answer is Answer.NO
    assert outcome.verdict.witness == (0, 1, 2, 3)


def test_cover_helpers(data_matrix):
    cover = CliqueCover(((0, 1, 2), (2, 3)))
    assert cover.without(1).cliques == ((0, 1), (1, 2))
    assert len(cover) == 2
    matrix = data_matrix("worked.edm")
    found = edge_clique_cover_search(matrix.graph, 3)
    assert len(found) == 2
    found.validate(matrix)
    assert edge_clique_cover_search(matrix.graph, 1) is None
    with pytest.raises(PreconditionViolated):
        edge_clique_cover_search(matrix.graph, 7)


def plant_simplex(matrix, vertices):
    """Sets every pair of `vertices` to 1, a simplex too large for d = len - 2."""
    values = matrix.values.copy()
    for a, i in enumerate(vertices):
        for j in vertices[a + 1:]:
            values[i, j] = values[j, i] = 1.0
    return PartialMatrix(values)


def check_yes(instance, outcome):
    assert outcome.answer is not Answer.NO
    if outcome.kind is OutcomeKind.SOLVED:
        assert verify_realization(outcome.instance, outcome.verdict.realization)
    else:
        points = instance.metadata.points[list(outcome.kept)]
        assert verify_realization(outcome.instance, Realization(points))


@pytest.mark.parametrize("d,n", [(1, 24), (2, 36)])
@pytest.mark.parametrize("planted", [False, True], ids=["yes", "no"])
def test_maxdeg_two_gaps(d, n, planted):
    instance = gen_masked_pointcloud(n, d, PerRowBudget(2), seed=n)
    original = instance.matrix
    if planted:
        simplex = list(range(d + 2))
        original = plant_simplex(original, simplex)
        assert not is_embeddable(original.submatrix(simplex), d)
    outcome = compress_maxdeg(original, d, 2)
    check_trace(original, outcome)
    if planted:
        assert outcome.answer is Answer.NO
        assert set(outcome.verdict.witness) >= set(range(d + 2))
    else:
        assert outcome.instance.n <= (d + 1) * 9
        check_yes(instance, outcome)


@pytest.mark.parametrize("d,n", [(1, 40), (2, 45)])
@pytest.mark.parametrize("planted", [False, True], ids=["yes", "no"])
def test_cliquecover_three_cliques(d, n, planted):
    instance = gen_masked_pointcloud(n, d, CliqueCoverMask(3), seed=n)
    original = instance.matrix
    largest = max(instance.cover, key=len)
    if planted:
        original = plant_simplex(original, sorted(largest)[: d + 2])
    outcome = compress_cliquecover(original, d, instance.cover)
    check_trace(original, outcome)
    if planted:
        assert outcome.answer is Answer.NO
        witness = outcome.verdict.witness
        assert witness in [tuple(sorted(c)) for c in instance.cover]
        assert not is_embeddable(original.submatrix(list(witness)), d)
    else:
        assert outcome.instance.n <= (d + 1) * 9
        check_yes(instance, outcome)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("starved", [False, True], ids=["full", "starved"])
def test_irrelevant_in_block_free_clique(d, starved):
    size = eta(d, 2)
    n = size + 6
    rng = np.random.default_rng(d)
    values = squared_distances(rng.uniform(size=(n, d)))
    for i in range(size, n, 2):
        values[i, i + 1] = values[i + 1, i] = np.nan
    if starved:
        # one outside row misses a vertex of both protected bases
        for x in range(2 * d + 2):
            values[n - 1, x] = values[x, n - 1] = np.nan
    matrix = PartialMatrix(values)
    assert detect_block_pattern(matrix, 2) is None
    w = find_irrelevant_in_clique(matrix, range(size), d, BlockPatternSchedule(2))
    assert w == (3 * d + 3 if starved else 2 * d + 2)


@pytest.mark.parametrize("planted", [False, True], ids=["yes", "no"])
def test_ktt_line_past_gate(planted):
    gate = rho(1, 2)
    points = np.random.default_rng(11).uniform(size=(gate + 1, 1))
    values = squared_distances(points)
    for i in range(0, gate, 2):
        values[i, i + 1] = values[i + 1, i] = np.nan
    original = PartialMatrix(values)
    if planted:
        # rows 0, 2, 4 open the first Ramsey clique
        original = plant_simplex(original, [0, 2, 4])
    outcome = compress_ktt(original, 1, 2)
    check_trace(original, outcome)
    if planted:
        assert outcome.answer is Answer.NO
        assert set(outcome.verdict.witness) >= {0, 2, 4}
        assert len(outcome.verdict.witness) == eta(1, 2)
    else:
        assert outcome.kind is OutcomeKind.REDUCED
        assert outcome.instance.n == gate - 1
        kept = points[list(outcome.kept)]
        assert verify_realization(outcome.instance, Realization(kept))

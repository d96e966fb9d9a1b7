import numpy as np
import pytest

from edmtools.matrix import (
    PartialMatrix,
    Realization,
    Tolerances,
    pair,
    squared_distances,
    verify_realization,
)
from edmtools.utils import (
    AsymmetryError,
    NegativeEntryError,
    NonzeroDiagonalError,
    ParseError,
    UnspecifiedEntry,
)


POINTS = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0], [3.0, 4.0]])


@pytest.fixture
def square():
    return PartialMatrix.from_points(POINTS, hidden=[(0, 3), (2, 1)])


@pytest.mark.parametrize(
    "values,error",
    [
        pytest.param([[0.0, 1.0], [2.0, 0.0]], AsymmetryError, id="asymmetric"),
        pytest.param([[0.0, None], [1.0, 0.0]], AsymmetryError, id="one_sided_gap"),
        pytest.param([[1.0, 1.0], [1.0, 0.0]], NonzeroDiagonalError, id="diagonal"),
        pytest.param([[None, 1.0], [1.0, 0.0]], NonzeroDiagonalError, id="gap_on_diagonal"),
        pytest.param([[0.0, -1.0], [-1.0, 0.0]], NegativeEntryError, id="negative"),
        pytest.param([[0.0, 1.0]], ParseError, id="not_square"),
        pytest.param([], ParseError, id="empty"),
    ],
)
def test_partial_matrix_validation(values, error):
    with pytest.raises(error):
        PartialMatrix(values)


def test_partial_matrix_accessors(square):
    assert len(square) == square.n == 4
    assert square[0, 1] == 9.0
    assert square[3, 2] == 9.0
    with pytest.raises(UnspecifiedEntry) as err:
        square[3, 0]
    assert err.value.pair == (0, 3)
    assert square.unspecified_pairs() == [(0, 3), (1, 2)]
    assert square.edges() == [(0, 1), (0, 2), (1, 3), (2, 3)]
    assert square.unspecified_counts().tolist() == [1, 1, 1, 1]
    assert not square.is_complete
    assert square.max_entry == 16.0
    assert square.graph.number_of_edges() == 4
    assert repr(square) == "PartialMatrix(n=4, unspecified=2)"
    with pytest.raises(ValueError):
        square.values[0, 1] = 1.0


def test_partial_matrix_derived(square):
    assert square.principal([0, 1, 3]).unspecified_pairs() == [(0, 2)]
    assert square.delete(0) == square.principal([1, 2, 3])
    assert square.submatrix([0, 1]).tolist() == [[0.0, 9.0], [9.0, 0.0]]
    with pytest.raises(UnspecifiedEntry):
        square.submatrix([0, 1, 3])

    complete = square.fill({(0, 3): 25.0, (1, 2): 25.0})
    assert complete.is_complete
    assert complete == PartialMatrix.from_points(POINTS)
    assert not square.is_complete
    with pytest.raises(ValueError):
        square.fill({(0, 1): 4.0})


def test_realization_residual(square):
    exact = Realization(POINTS)
    assert exact.dim == 2
    assert len(exact) == 4
    assert exact.residual(square) == 0.0
    assert verify_realization(square, exact)

    moved = Realization(POINTS + np.array([[0.0, 0.0]] * 3 + [[0.0, 1.0]]))
    assert moved.residual(square) == pytest.approx(9.0)
    assert not verify_realization(square, moved)
    assert not verify_realization(square, None)
    assert not verify_realization(square, Realization(POINTS[:3]))
    with pytest.raises(ValueError):
        Realization(POINTS[:3]).residual(square)


def test_tolerances():
    tol = Tolerances()
    assert tol.real_threshold(0.5) == tol.real
    assert tol.real_threshold(100.0) == pytest.approx(100.0 * tol.real)
    assert tol.cm_threshold(10.0, 2) == pytest.approx(100.0 * tol.cm)
    assert tol.eig_threshold(0.0) > 0
    with pytest.raises(ValueError):
        Tolerances(eig=0.0)


def test_helpers():
    assert pair(3, 1) == (1, 3)
    assert squared_distances(POINTS[:1]).tolist() == [[0.0]]
    assert squared_distances(POINTS)[0, 3] == 25.0

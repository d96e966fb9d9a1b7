import numpy as np
import pytest

from edmtools.chordal import FillIn
from edmtools.formulas import (
    Atom,
    AtomKind,
    Conjunction,
    Disjunction,
    Relation,
    active_atoms,
    build_basis_guess_formula,
    build_fillin_formula,
    fold,
    formula_variables,
    interval_box,
    is_false,
    is_true,
    refuted,
)
from edmtools.matrix import PartialMatrix
from edmtools.polynomials import AugmentedPolynomial, CayleyMengerCache
from edmtools.utils import NotChordal


nan = np.nan
SLACK = 1e-8


def unit_path(n):
    values = np.full((n, n), nan)
    np.fill_diagonal(values, 0.0)
    for i in range(n - 1):
        values[i, i + 1] = values[i + 1, i] = 1.0
    return PartialMatrix(values)


def cycle(entries):
    n = len(entries)
    values = np.full((n, n), nan)
    np.fill_diagonal(values, 0.0)
    for i, m in enumerate(entries):
        j = (i + 1) % n
        values[i, j] = values[j, i] = m
    return PartialMatrix(values)


def test_path_basis_guess_atoms():
    formula = build_basis_guess_formula(unit_path(4), [0, 1], 1)
    assert formula.variables == ((0, 2), (0, 3), (1, 3))
    assert len(formula) == 7
    kinds = [atom.kind for atom in formula.atoms()]
    assert kinds.count(AtomKind.SIGN) == 1
    assert kinds.count(AtomKind.ONE_POINT) == 2
    assert kinds.count(AtomKind.TWO_POINT) == 1
    assert kinds.count(AtomKind.NONNEGATIVE) == 3
    # points 0, 1, 2, 3 on a line
    assert formula.holds([4.0, 9.0, 4.0], SLACK)
    assert not formula.holds([1.0, 9.0, 4.0], SLACK)
    with pytest.raises(ValueError):
        build_basis_guess_formula(unit_path(4), [0, 1, 2], 1)


def test_uncollapsed_variables():
    formula = build_basis_guess_formula(unit_path(4), [0, 1], 1, collapse_pairs=False)
    assert len(formula.variables) == 6
    kinds = [atom.kind for atom in formula.atoms()]
    assert kinds.count(AtomKind.SYMMETRY) == 3
    assert kinds.count(AtomKind.NONNEGATIVE) == 6
    x = [4.0, 4.0, 9.0, 9.0, 4.0, 4.0]
    assert formula.holds(x, SLACK)
    assert formula.assignment([4.0, 5.0, 9.0, 9.0, 4.0, 4.0])[(0, 2)] == 4.5
    assert not formula.holds([4.0, 5.0, 9.0, 9.0, 4.0, 4.0], SLACK)


def test_shared_cache():
    matrix = unit_path(4)
    cache = CayleyMengerCache(matrix, formula_variables(matrix.unspecified_pairs(), True))
    build_basis_guess_formula(matrix, [0, 1], 1, cache=cache)
    seen = len(cache)
    build_basis_guess_formula(matrix, [1, 0], 1, cache=cache)
    assert len(cache) == seen


def test_worked_basis_guess(data_matrix):
    matrix = data_matrix("worked.edm")
    formula = build_basis_guess_formula(matrix, [0, 1, 2], 2)
    assert formula.variables == ((0, 3), (1, 3))
    assert formula.scale == 1.25
    assert formula.holds([4.25, 4.25], SLACK)
    assert formula.holds([0.25, 0.25], SLACK)
    assert not formula.holds([4.25, 0.25], SLACK)
    assert formula.sound_bound == pytest.approx((2 + 2 * np.sqrt(1.25)) ** 2)


def test_fold_constants():
    triangle = PartialMatrix(np.ones((3, 3)) - np.eye(3))
    assert is_true(fold(build_basis_guess_formula(triangle, [0, 1, 2], 2).root, SLACK))
    root = fold(build_basis_guess_formula(triangle, [0, 1], 2).root, SLACK)
    assert is_false(root)


def test_c4_fillin_formula():
    matrix = cycle([1.0, 1.0, 1.0, 1.0])
    formula = build_fillin_formula(matrix, FillIn(frozenset({(0, 2)})), 1)
    assert formula.variables == ((0, 2),)
    assert isinstance(formula.root, Conjunction)
    assert len(formula.root.children) == 2
    assert all(isinstance(c, Disjunction) for c in formula.root.children)
    assert formula.holds([0.0], SLACK)
    assert formula.holds([4.0], SLACK)
    assert not formula.holds([2.0], SLACK)
    with pytest.raises(NotChordal):
        build_fillin_formula(cycle([1.0] * 5), FillIn(frozenset({(0, 2)})), 1)


def test_fillin_formula_witness():
    values = np.full((5, 5), nan)
    np.fill_diagonal(values, 0.0)
    for i, j in [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4), (2, 4)]:
        values[i, j] = values[j, i] = 1.0
    matrix = PartialMatrix(values)
    formula = build_fillin_formula(matrix, FillIn(frozenset({(0, 2)})), 0)
    root = fold(formula.root, SLACK)
    assert is_false(root)
    assert root.witness == (1, 4)


def test_interval_refutation():
    # triangle 0, 1, 2 on a line needs m02 in {0, 4}
    formula = build_fillin_formula(cycle([1.0, 1.0, 1.0, 16.0]), FillIn(frozenset({(0, 2)})), 1)
    root = fold(formula.root, SLACK)
    assert refuted(root, interval_box([(5.5, 6.5)]), SLACK)
    assert not refuted(root, interval_box([(0.0, 30.0)]), SLACK)


def test_active_atoms_pick_closest_branch():
    formula = build_fillin_formula(cycle([1.0, 1.0, 1.0, 1.0]), FillIn(frozenset({(0, 2)})), 1)
    root = fold(formula.root, SLACK)
    x = np.array([3.9])
    active = active_atoms(root, x, 10 * SLACK)
    assert {atom.kind for atom in active} == {AtomKind.ONE_POINT, AtomKind.NONNEGATIVE}
    assert sum(atom.residual(x, 10 * SLACK)[0] ** 2 for atom in active) < 1.0


@pytest.mark.parametrize(
    "value,relation,expected",
    [
        pytest.param(0.5 * SLACK, Relation.POSITIVE, False, id="positive_in_band"),
        pytest.param(-0.5 * SLACK, Relation.POSITIVE, False, id="positive_below_zero"),
        pytest.param(-2.0 * SLACK, Relation.POSITIVE, True, id="positive_negative"),
        pytest.param(-0.5 * SLACK, Relation.NONNEGATIVE, False, id="nonnegative_in_band"),
        pytest.param(-1.0, Relation.NONNEGATIVE, True, id="nonnegative_negative"),
        pytest.param(2.0 * SLACK, Relation.ZERO, True, id="zero_above"),
        pytest.param(0.5 * SLACK, Relation.ZERO, False, id="zero_in_band"),
    ],
)
def test_atom_refutation_margin(value, relation, expected):
    atom = Atom(AugmentedPolynomial.constant(value, [(0, 1)]), relation, AtomKind.SIGN)
    assert atom.refuted(interval_box([(0.0, 1.0)]), SLACK) is expected

from math import factorial

import numpy as np
import pytest

from edmtools.edm import (
    CertificateReason,
    align,
    as_complete,
    cm_determinant,
    embedding_dimension,
    extend_basis,
    gram_matrix,
    is_embeddable,
    is_independent,
    is_strongly_embeddable,
    metric_basis,
    principal_points,
    realize,
)
from edmtools.matrix import PartialMatrix, squared_distances, verify_realization
from edmtools.utils import NotEDM, NotEmbeddable, NotIndependent, UnspecifiedEntry


WORKED_POINTS = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, 2.0]])
UNIT_TRIANGLE = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
COLLINEAR = np.array([[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]])


def test_cm_goldens():
    assert cm_determinant(UNIT_TRIANGLE, [0, 1, 2]) == pytest.approx(-3.0, abs=1e-12)
    assert cm_determinant(COLLINEAR, [0, 1, 2]) == pytest.approx(0.0, abs=1e-12)
    assert cm_determinant(COLLINEAR, [0, 2]) == pytest.approx(8.0, abs=1e-12)
    with pytest.raises(ValueError):
        cm_determinant(COLLINEAR, [])


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_cm_volume_identity(j):
    rng = np.random.default_rng(11 + j)
    for _ in range(125):
        points = rng.normal(size=(j + 1, j))
        distances = squared_distances(points)
        volume = abs(np.linalg.det(points[1:] - points[0])) / factorial(j)
        expected = (-1) ** (j + 1) * 2 ** j * factorial(j) ** 2 * volume ** 2
        actual = cm_determinant(distances, range(j + 1))
        floor = 1e-9 * distances.max() ** j
        assert actual == pytest.approx(expected, rel=1e-8, abs=floor)


def test_cm_needs_specified_entries(data_matrix):
    matrix = data_matrix("worked.edm")
    assert cm_determinant(matrix, [0, 1, 2]) < 0
    with pytest.raises(UnspecifiedEntry):
        cm_determinant(matrix, [0, 3])
    with pytest.raises(UnspecifiedEntry):
        as_complete(matrix)


def test_realize_worked_points():
    completion = squared_distances(WORKED_POINTS)
    realization = realize(completion, 2)
    assert np.allclose(realization.points[0], 0.0)
    _, residual = align(realization.points, WORKED_POINTS)
    assert residual < 1e-6
    centered = realize(completion, 2, centered=True)
    _, residual = align(centered.points, WORKED_POINTS)
    assert residual < 1e-6


def test_realize_pads_extra_dimensions():
    realization = realize(COLLINEAR, 3)
    assert realization.points.shape == (3, 3)
    assert np.allclose(realization.distance_matrix(), COLLINEAR)


def test_not_embeddable_rank():
    with pytest.raises(NotEmbeddable) as err:
        realize(UNIT_TRIANGLE, 1)
    assert err.value.certificate.reason is CertificateReason.RANK
    assert "rank 2 > 1" in str(err.value.certificate)
    assert not is_embeddable(UNIT_TRIANGLE, 1)
    assert is_embeddable(UNIT_TRIANGLE, 2)


def test_not_edm():
    broken = np.array([[0.0, 1.0, 9.0], [1.0, 0.0, 1.0], [9.0, 1.0, 0.0]])
    with pytest.raises(NotEmbeddable) as err:
        realize(broken, 2)
    assert err.value.certificate.reason is CertificateReason.NEGATIVE_EIGENVALUE
    with pytest.raises(NotEDM):
        embedding_dimension(broken)
    assert principal_points(broken, 1).shape == (3, 1)


def test_embedding_dimension():
    assert embedding_dimension(UNIT_TRIANGLE) == 2
    assert embedding_dimension(COLLINEAR) == 1
    assert embedding_dimension(np.zeros((3, 3))) == 0
    assert is_strongly_embeddable(COLLINEAR, 1)
    assert not is_strongly_embeddable(COLLINEAR, 2)
    assert is_strongly_embeddable(UNIT_TRIANGLE, 2)


def test_gram_forms_agree_on_rank():
    completion = squared_distances(WORKED_POINTS)
    for centered in (False, True):
        evals = np.linalg.eigvalsh(gram_matrix(completion, centered=centered))
        assert np.count_nonzero(evals > 1e-9) == 2
    anchored = gram_matrix(completion)
    assert np.allclose(anchored[0], 0.0)


def test_independence_and_bases():
    assert is_independent(UNIT_TRIANGLE, [0, 1, 2])
    assert not is_independent(COLLINEAR, [0, 1, 2])
    assert is_independent(COLLINEAR, [])
    assert metric_basis(COLLINEAR).indices == (0, 1)
    basis = metric_basis(UNIT_TRIANGLE)
    assert basis.indices == (0, 1, 2)
    assert basis.rank == 2
    assert extend_basis(COLLINEAR, [2]).indices == (2, 0)
    assert extend_basis(UNIT_TRIANGLE, [1], universe=[1, 2]).indices == (1, 2)
    with pytest.raises(NotIndependent):
        extend_basis(COLLINEAR, [0, 1, 2])


def random_points(seed, n_max=20, d_max=4):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(d + 1, n_max + 1))
    return rng, rng.normal(size=(n, d))


@pytest.mark.parametrize("seed", range(30))
def test_realize_round_trip(seed):
    _, points = random_points(seed)
    d = points.shape[1]
    completion = squared_distances(points)
    realization = realize(completion, d)
    assert realization.points.shape == points.shape
    assert verify_realization(PartialMatrix(completion), realization)


@pytest.mark.parametrize("seed", range(30))
def test_realizations_agree_on_a_basis(seed):
    rng, points = random_points(seed)
    n, d = points.shape
    completion = squared_distances(points)
    first = realize(completion, d).points
    order = rng.permutation(n)
    second = np.empty_like(first)
    second[order] = realize(completion[np.ix_(order, order)], d).points
    basis = metric_basis(completion).indices
    assert len(basis) == d + 1
    _, residual = align(second, first, indices=basis)
    assert residual < 1e-6


@pytest.mark.parametrize("seed", range(30))
def test_basis_size_tracks_embedding_dimension(seed):
    rng, points = random_points(seed, n_max=12, d_max=3)
    # rank-deficient points inside R^5
    lifted = points @ rng.normal(size=(points.shape[1], 5))
    completion = squared_distances(lifted)
    dim = embedding_dimension(completion)
    assert dim == points.shape[1]
    assert len(metric_basis(completion).indices) == dim + 1
    assert is_strongly_embeddable(completion, dim)


@pytest.mark.parametrize("seed", range(20))
def test_strong_embeddability_is_hereditary(seed):
    rng, points = random_points(seed, n_max=10, d_max=3)
    n, d = points.shape
    completion = squared_distances(points)
    assert is_strongly_embeddable(completion, d)
    for size in range(2, n):
        subset = sorted(rng.choice(n, size=size, replace=False))
        sub = completion[np.ix_(subset, subset)]
        dims = [r for r in range(size) if is_strongly_embeddable(sub, r)]
        assert dims == [embedding_dimension(sub)]
        assert dims[0] <= d
        assert is_embeddable(sub, d)

"""Cayley-Menger determinants with unspecified entries replaced by indeterminates.

Determinants are expanded exactly over the rationals with a sympy sparse
polynomial ring, then flattened into exponent/coefficient arrays for fast
numerical and interval evaluation.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Sequence, Tuple

import mpmath
import numpy as np
from sympy import QQ
from sympy.polys.rings import ring

from edmtools.edm import cm_determinant
from edmtools.matrix import PartialMatrix, pair
from edmtools.utils import UnhousedPair


Indeterminate = Tuple[int, int]
"""The pair of indices whose squared distance a variable stands for. Ordered only
when the two orientations of a pair get separate variables."""


@dataclass(frozen=True, eq=False)
class AugmentedPolynomial:
    """
    A real polynomial in the variables of a formula.

    Args:
        variables: The variables, in the order used by `exponents` columns and by
            value vectors.
        exponents: (terms, variables) array of nonnegative integer exponents.
        coefficients: Exact rational coefficients, one per term.
    """

    variables: Tuple[Indeterminate, ...]
    exponents: np.ndarray
    coefficients: Tuple[Fraction, ...]

    @classmethod
    def constant(
        cls, value: float, variables: Sequence[Indeterminate] = ()
    ) -> "AugmentedPolynomial":
        variables = tuple(variables)
        if value == 0:
            return cls(variables, np.zeros((0, len(variables)), dtype=int), ())
        return cls(
            variables, np.zeros((1, len(variables)), dtype=int), (Fraction(value),)
        )

    @property
    def floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coefficients], dtype=float)

    @property
    def terms(self) -> Dict[Tuple[int, ...], Fraction]:
        """Map from exponent tuples to coefficients.
        """
        return {
            tuple(int(e) for e in row): coef
            for row, coef in zip(self.exponents, self.coefficients)
        }

    @property
    def degree(self) -> int:
        if not self.coefficients:
            return 0
        return int(self.exponents.sum(axis=1).max())

    @property
    def used_variables(self) -> Tuple[Indeterminate, ...]:
        """Variables that occur with a nonzero exponent.
        """
        if not self.coefficients:
            return ()
        occurs = self.exponents.any(axis=0)
        return tuple(v for v, used in zip(self.variables, occurs) if used)

    @property
    def is_constant(self) -> bool:
        return not self.exponents.any()

    @property
    def constant_value(self) -> float:
        """Sum of the coefficients of the constant terms.
        """
        if not self.coefficients:
            return 0.0
        constant = ~self.exponents.any(axis=1)
        return float(sum(c for c, flag in zip(self.coefficients, constant) if flag))

    def evaluate(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if not self.coefficients:
            return 0.0
        monomials = np.prod(values[None, :] ** self.exponents, axis=1)
        return float(self.floats @ monomials)

    def gradient(self, values) -> np.ndarray:
        """Partial derivatives at `values`, computed term by term.
        """
        values = np.asarray(values, dtype=float)
        grad = np.zeros(len(self.variables))
        if not self.coefficients:
            return grad
        coefs = self.floats
        for j in range(len(self.variables)):
            e = self.exponents[:, j]
            hit = e > 0
            if not hit.any():
                continue
            lowered = self.exponents[hit].copy()
            lowered[:, j] -= 1
            monomials = np.prod(values[None, :] ** lowered, axis=1)
            grad[j] = float((coefs[hit] * e[hit]) @ monomials)
        return grad

    def interval(self, box: Sequence) -> "mpmath.iv.mpf":
        """
        Encloses the range of the polynomial over `box`, a sequence of
        ``mpmath.iv`` intervals aligned with `variables`.
        """
        iv = mpmath.iv
        total = iv.mpf(0)
        for row, coef in zip(self.exponents, self.coefficients):
            term = iv.mpf(coef.numerator) / coef.denominator
            for k, e in enumerate(row):
                if e:
                    term = term * box[k] ** int(e)
            total = total + term
        return total


def _rational(value: float):
    frac = Fraction(float(value))
    return QQ(frac.numerator, frac.denominator)


def _bordered_determinant(entries):
    """
    Laplace expansion along successive rows, memoized on the set of columns
    still available.
    """
    size = len(entries)

    @lru_cache(maxsize=None)
    def minor(columns: FrozenSet[int]):
        row = size - len(columns)
        if not columns:
            return 1
        total = 0
        for position, col in enumerate(sorted(columns)):
            entry = entries[row][col]
            if entry == 0:
                continue
            rest = minor(columns - {col})
            term = entry * rest
            total = total - term if position % 2 else total + term
        return total

    return minor(frozenset(range(size)))


def variable_key(i: int, j: int, collapse_pairs: bool) -> Indeterminate:
    return pair(i, j) if collapse_pairs else (i, j)


def build_augmented_cm(
    matrix: PartialMatrix,
    indices: Sequence[int],
    variables: Iterable[Indeterminate],
    collapse_pairs: bool = True,
) -> AugmentedPolynomial:
    """
    Expands the Cayley-Menger determinant of `indices` with every unspecified
    entry replaced by its variable.

    Args:
        matrix: The partial matrix.
        indices: The points, in order.
        variables: The formula's variables; the result is expressed over all of
            them, in this order.
        collapse_pairs: One variable per unordered pair; otherwise entry (i, j)
            uses the variable (i, j) and entry (j, i) the variable (j, i).

    Raises:
        UnhousedPair: if a pair within `indices` is neither specified nor a
            variable.
    """
    variables = tuple(variables)
    position = {v: k for k, v in enumerate(variables)}
    idx = list(indices)
    needed = set()
    for a in idx:
        for b in idx:
            if a == b or matrix.specified(a, b):
                continue
            key = variable_key(a, b, collapse_pairs)
            if key not in position:
                raise UnhousedPair(pair(a, b))
            needed.add(key)
    if not needed:
        return AugmentedPolynomial.constant(cm_determinant(matrix, idx), variables)
    used = sorted(needed)
    poly_ring, *gens = ring([f"z_{u}_{v}" for u, v in used], QQ)
    symbol = dict(zip(used, gens))
    k = len(idx)
    entries = [[poly_ring(0)] + [poly_ring(1)] * k]
    for a in idx:
        row = [poly_ring(1)]
        for b in idx:
            if a == b:
                row.append(poly_ring(0))
            elif matrix.specified(a, b):
                row.append(poly_ring(_rational(matrix[a, b])))
            else:
                row.append(symbol[variable_key(a, b, collapse_pairs)])
        entries.append(row)
    det = poly_ring(_bordered_determinant(entries))
    terms = det.terms()
    exponents = np.zeros((len(terms), len(variables)), dtype=int)
    columns = [position[v] for v in used]
    coefficients = []
    for t, (monomial, coef) in enumerate(terms):
        exponents[t, columns] = monomial
        coefficients.append(Fraction(int(coef.numerator), int(coef.denominator)))
    return AugmentedPolynomial(variables, exponents, tuple(coefficients))


class CayleyMengerCache:
    """
    Memoizes augmented determinants by index set, which the determinant does not
    depend on the order of.
    """

    def __init__(
        self,
        matrix: PartialMatrix,
        variables: Sequence[Indeterminate],
        collapse_pairs: bool = True,
    ):
        self.matrix = matrix
        self.variables = tuple(variables)
        self.collapse_pairs = collapse_pairs
        self._cache: Dict[FrozenSet[int], AugmentedPolynomial] = {}

    def __len__(self) -> int:
        return len(self._cache)

    def __call__(self, indices: Sequence[int]) -> AugmentedPolynomial:
        key = frozenset(indices)
        poly = self._cache.get(key)
        if poly is None:
            poly = build_augmented_cm(
                self.matrix, sorted(key), self.variables, self.collapse_pairs
            )
            self._cache[key] = poly
        return poly

"""Quantifier-free formulas over augmented Cayley-Menger atoms.

A formula is a tree of conjunctions and disjunctions whose leaves are polynomial
sign conditions. Every atom is normalized by the matrix scale so that a single
absolute slack applies to all of them.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from edmtools.chordal import FillIn, _require_chordal, maximal_cliques_chordal
from edmtools.edm import metric_basis
from edmtools.matrix import PartialMatrix, pair
from edmtools.polynomials import (
    AugmentedPolynomial,
    CayleyMengerCache,
    Indeterminate,
)
from edmtools.utils import NotEDM


class Relation(Enum):
    ZERO = "= 0"
    POSITIVE = "> 0"
    NONNEGATIVE = ">= 0"


class AtomKind(Enum):
    """Which condition of a basis guess an atom encodes.
    """

    SIGN = "sign"
    """Alternating sign of the determinant of a basis prefix."""
    ONE_POINT = "one point"
    """The basis plus one more point spans no extra dimension."""
    TWO_POINT = "two points"
    """The basis plus two more points spans no extra dimension."""
    NONNEGATIVE = "nonnegative"
    """A variable is a nonnegative squared distance."""
    SYMMETRY = "symmetry"
    """Both orientations of a pair take the same value."""


@dataclass(frozen=True, eq=False)
class Atom:
    polynomial: AugmentedPolynomial
    relation: Relation
    kind: AtomKind
    indices: Tuple[int, ...] = ()

    def value(self, x: np.ndarray) -> float:
        return self.polynomial.evaluate(x)

    def accepts(self, value: float, slack: float) -> bool:
        if self.relation is Relation.ZERO:
            return abs(value) <= slack
        if self.relation is Relation.POSITIVE:
            return value > slack
        if self.relation is Relation.NONNEGATIVE:
            return value >= -slack
        raise ValueError(f"Unsupported relation: {self.relation}")

    def holds(self, x: np.ndarray, slack: float) -> bool:
        return self.accepts(self.value(x), slack)

    def residual(self, x: np.ndarray, margin: float) -> Tuple[float, np.ndarray]:
        """
        Smooth violation of the atom (signed for equalities, a hinge for
        inequalities) and its gradient.
        """
        value = self.value(x)
        if self.relation is Relation.ZERO:
            return value, self.polynomial.gradient(x)
        if self.relation is Relation.POSITIVE:
            target = margin
        elif self.relation is Relation.NONNEGATIVE:
            target = 0.0
        else:
            raise ValueError(f"Unsupported relation: {self.relation}")
        if value >= target:
            return 0.0, np.zeros(len(x))
        return target - value, -self.polynomial.gradient(x)

    def refuted(self, box: Sequence, slack: float) -> bool:
        """
        True if no point of `box` satisfies the atom within `slack`. A strict
        atom is refuted only where it is negative beyond `slack`; values in
        [-slack, slack] belong to near-degenerate completions and stay open.
        """
        enclosure = self.polynomial.interval(box)
        low, high = float(enclosure.a), float(enclosure.b)
        if self.relation is Relation.ZERO:
            return high < -slack or low > slack
        if self.relation in (Relation.POSITIVE, Relation.NONNEGATIVE):
            return high < -slack
        raise ValueError(f"Unsupported relation: {self.relation}")

    def __str__(self) -> str:
        return f"{self.kind.value}{list(self.indices)} {self.relation.value}"


@dataclass(frozen=True, eq=False)
class Conjunction:
    """All children hold. The empty conjunction is true.
    """

    children: Tuple["Node", ...] = ()
    label: str = ""


@dataclass(frozen=True, eq=False)
class Disjunction:
    """
    Some child holds. The empty disjunction is false; its `witness`, if any, is a
    fully specified index set that is not embeddable.
    """

    children: Tuple["Node", ...] = ()
    label: str = ""
    witness: Optional[Tuple[int, ...]] = None


Node = Union[Atom, Conjunction, Disjunction]

TRUE = Conjunction(label="true")
FALSE = Disjunction(label="false")


def is_true(node: Node) -> bool:
    return isinstance(node, Conjunction) and not node.children


def is_false(node: Node) -> bool:
    return isinstance(node, Disjunction) and not node.children


def atoms(node: Node) -> Iterator[Atom]:
    if isinstance(node, Atom):
        yield node
    else:
        for child in node.children:
            yield from atoms(child)


def holds(node: Node, x: np.ndarray, slack: float) -> bool:
    if isinstance(node, Atom):
        return node.holds(x, slack)
    if isinstance(node, Conjunction):
        return all(holds(child, x, slack) for child in node.children)
    return any(holds(child, x, slack) for child in node.children)


def fold(node: Node, slack: float) -> Node:
    """Evaluates variable-free atoms and simplifies around the constants.
    """
    if isinstance(node, Atom):
        if not node.polynomial.is_constant:
            return node
        return TRUE if node.accepts(node.polynomial.constant_value, slack) else FALSE
    children = [fold(child, slack) for child in node.children]
    if isinstance(node, Conjunction):
        for child in children:
            if is_false(child):
                return child
        kept = tuple(child for child in children if not is_true(child))
        return Conjunction(kept, node.label) if kept else TRUE
    for child in children:
        if is_true(child):
            return TRUE
    kept = tuple(child for child in children if not is_false(child))
    if kept:
        return Disjunction(kept, node.label, node.witness)
    if node.witness is not None:
        return Disjunction((), node.label, node.witness)
    witnessed = [child for child in children if child.witness is not None]
    return witnessed[0] if witnessed else Disjunction((), node.label)


def penalty(node: Node, x: np.ndarray, margin: float) -> float:
    if isinstance(node, Atom):
        return node.residual(x, margin)[0] ** 2
    if isinstance(node, Conjunction):
        return sum(penalty(child, x, margin) for child in node.children)
    if not node.children:
        return np.inf
    return min(penalty(child, x, margin) for child in node.children)


def active_atoms(node: Node, x: np.ndarray, margin: float) -> List[Atom]:
    """
    The atoms of the branch closest to being satisfied at `x`: every child of a
    conjunction, the least-penalty child of a disjunction (ties to the first).
    """
    if isinstance(node, Atom):
        return [node]
    if isinstance(node, Conjunction):
        return [a for child in node.children for a in active_atoms(child, x, margin)]
    if not node.children:
        return []
    scores = [penalty(child, x, margin) for child in node.children]
    return active_atoms(node.children[int(np.argmin(scores))], x, margin)


def refuted(node: Node, box: Sequence, slack: float) -> bool:
    if isinstance(node, Atom):
        return node.refuted(box, slack)
    if isinstance(node, Conjunction):
        return any(refuted(child, box, slack) for child in node.children)
    return all(refuted(child, box, slack) for child in node.children)


@dataclass(frozen=True, eq=False)
class Formula:
    """
    A formula together with its variables and the matrix scale the atoms were
    normalized by.
    """

    root: Node
    variables: Tuple[Indeterminate, ...]
    scale: float
    collapse_pairs: bool = True
    max_entry: float = 0.0
    sound_bound: float = 0.0

    def __len__(self) -> int:
        """Number of atoms.
        """
        return sum(1 for _ in atoms(self.root))

    def atoms(self) -> List[Atom]:
        return list(atoms(self.root))

    def holds(self, x, slack: float) -> bool:
        return holds(self.root, np.asarray(x, dtype=float), slack)

    def vector(self, assignment: Dict[Indeterminate, float]) -> np.ndarray:
        return np.array([assignment[v] for v in self.variables], dtype=float)

    def assignment(self, x) -> Dict[Tuple[int, int], float]:
        """
        Maps each unordered pair to its value; the two orientations of an
        uncollapsed pair are averaged.
        """
        values: Dict[Tuple[int, int], List[float]] = {}
        for v, value in zip(self.variables, x):
            values.setdefault(pair(*v), []).append(float(value))
        return {p: float(np.mean(vals)) for p, vals in values.items()}


def _normalized(
    poly: AugmentedPolynomial, sign: int, scale: float, degree: int
) -> AugmentedPolynomial:
    factor = Fraction(sign) / Fraction(scale) ** degree
    return AugmentedPolynomial(
        poly.variables, poly.exponents, tuple(c * factor for c in poly.coefficients)
    )


class _AtomFactory:
    def __init__(
        self,
        matrix: PartialMatrix,
        variables,
        collapse_pairs: bool,
        cache: Optional[CayleyMengerCache] = None,
    ):
        self.variables = tuple(variables)
        self.scale = matrix.max_entry if matrix.max_entry > 0 else 1.0
        reusable = (
            cache is not None
            and cache.matrix is matrix
            and cache.variables == self.variables
            and cache.collapse_pairs == collapse_pairs
        )
        if not reusable:
            cache = CayleyMengerCache(matrix, self.variables, collapse_pairs)
        self.cache = cache

    def cm(self, indices: Sequence[int], relation: Relation, kind: AtomKind, sign=1):
        poly = self.cache(indices)
        return Atom(
            _normalized(poly, sign, self.scale, len(indices) - 1),
            relation,
            kind,
            tuple(indices),
        )

    def linear(self, coefficients: Dict[Indeterminate, int], relation, kind):
        position = {v: k for k, v in enumerate(self.variables)}
        exponents = np.zeros((len(coefficients), len(self.variables)), dtype=int)
        coefs = []
        for t, (v, c) in enumerate(sorted(coefficients.items())):
            exponents[t, position[v]] = 1
            coefs.append(Fraction(c) / Fraction(self.scale))
        indices = tuple(sorted({i for v in coefficients for i in v}))
        return Atom(
            AugmentedPolynomial(self.variables, exponents, tuple(coefs)),
            relation,
            kind,
            indices,
        )


def formula_variables(
    pairs: Sequence[Tuple[int, int]], collapse_pairs: bool
) -> Tuple[Indeterminate, ...]:
    pairs = sorted(pair(*p) for p in pairs)
    if collapse_pairs:
        return tuple(pairs)
    return tuple(v for u, w in pairs for v in ((u, w), (w, u)))


def _guess_atoms(
    factory: _AtomFactory,
    members: Sequence[int],
    basis: Sequence[int],
) -> List[Atom]:
    basis = list(basis)
    found = []
    for j in range(1, len(basis)):
        found.append(
            factory.cm(
                basis[: j + 1], Relation.POSITIVE, AtomKind.SIGN, (-1) ** (j + 1)
            )
        )
    rest = [x for x in members if x not in basis]
    for x in rest:
        found.append(factory.cm(basis + [x], Relation.ZERO, AtomKind.ONE_POINT))
    for x, y in combinations(rest, 2):
        found.append(factory.cm(basis + [x, y], Relation.ZERO, AtomKind.TWO_POINT))
    return found


def _variable_atoms(factory: _AtomFactory, variables, collapse_pairs: bool):
    found = [
        factory.linear({v: 1}, Relation.NONNEGATIVE, AtomKind.NONNEGATIVE)
        for v in variables
    ]
    if not collapse_pairs:
        for u, w in sorted({pair(*v) for v in variables}):
            found.append(
                factory.linear(
                    {(u, w): 1, (w, u): -1}, Relation.ZERO, AtomKind.SYMMETRY
                )
            )
    return found


def _sound_bound(matrix: PartialMatrix) -> float:
    """
    Every completion can be translated so that all its squared distances are
    below (sum of specified distances) squared.
    """
    values = matrix.values[np.triu(matrix.mask, k=1)]
    return float(np.sqrt(values).sum() ** 2)


def build_basis_guess_formula(
    matrix: PartialMatrix,
    basis: Sequence[int],
    d: int,
    collapse_pairs: bool = True,
    cache: Optional[CayleyMengerCache] = None,
) -> Formula:
    """
    Formula stating that `basis`, in this order, is a metric basis of some
    completion: its prefixes have alternating determinant signs, and adding any
    one or two other points leaves the determinant zero. Every unspecified pair
    is a variable. Determinants are taken from `cache` when it was built for
    the same matrix and variables.

    Raises:
        ValueError: if `basis` has more than d+1 points.
    """
    if len(basis) > d + 1:
        raise ValueError(f"Basis {tuple(basis)} has more than {d + 1} points")
    variables = formula_variables(matrix.unspecified_pairs(), collapse_pairs)
    factory = _AtomFactory(matrix, variables, collapse_pairs, cache)
    found = _guess_atoms(factory, range(matrix.n), basis)
    found += _variable_atoms(factory, variables, collapse_pairs)
    return Formula(
        Conjunction(tuple(found), label=f"basis {tuple(basis)}"),
        variables,
        factory.scale,
        collapse_pairs,
        matrix.max_entry,
        _sound_bound(matrix),
    )


def build_fillin_formula(
    matrix: PartialMatrix,
    fill_in: FillIn,
    d: int,
    collapse_pairs: bool = True,
) -> Formula:
    """
    Formula stating that the fill-in pairs can be assigned so that every maximal
    clique of the filled graph embeds: for each clique, some extension of a
    basis of its fully specified part by endpoints of fill-in pairs is a
    metric basis of the clique.

    A clique whose fully specified part needs more than d+1 basis points, or is
    not a distance matrix at all, makes the formula false with that part as
    witness.

    Raises:
        NotChordal: if the filled graph is not chordal.
    """
    filled = fill_in.apply(matrix.graph)
    ordering = _require_chordal(filled)
    cliques = maximal_cliques_chordal(filled, ordering)
    variables = formula_variables(list(fill_in), collapse_pairs)
    factory = _AtomFactory(matrix, variables, collapse_pairs)
    terms = []
    for clique in cliques:
        members = set(clique)
        inside = [e for e in fill_in if e[0] in members and e[1] in members]
        endpoints = sorted({v for e in inside for v in e})
        specified = [v for v in clique if v not in endpoints]
        label = f"clique {clique}"
        try:
            if specified:
                local = metric_basis(matrix.submatrix(specified))
                basis = [specified[i] for i in local]
            else:
                basis = []
        except NotEDM:
            terms.append(Disjunction(label=label, witness=tuple(specified)))
            continue
        if len(basis) > d + 1:
            terms.append(Disjunction(label=label, witness=tuple(specified)))
            continue
        clique_vars = formula_variables(inside, collapse_pairs)
        nonnegative = _variable_atoms(factory, clique_vars, collapse_pairs)
        guesses = []
        for size in range(0, d + 2 - len(basis)):
            for extra in combinations(endpoints, size):
                guess = _guess_atoms(factory, clique, basis + list(extra))
                guesses.append(
                    Conjunction(
                        tuple(guess + nonnegative),
                        label=f"{label} basis {tuple(basis) + extra}",
                    )
                )
        terms.append(Disjunction(tuple(guesses), label=label))
    return Formula(
        Conjunction(tuple(terms), label="fill-in"),
        variables,
        factory.scale,
        collapse_pairs,
        matrix.max_entry,
        _sound_bound(matrix),
    )


def interval_box(bounds: Sequence[Tuple[float, float]]) -> List:
    return [mpmath.iv.mpf([low, high]) for low, high in bounds]

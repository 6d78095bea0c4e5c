"""Charts, fields and differential forms with symbolic components.

Conventions
-----------
* A chart is a single coordinate patch with named coordinates and a sampling
  interval per coordinate.  All objects are tied to one chart; mixing charts
  raises :class:`ChartMismatchError`.
* A p-form stores one component per strictly increasing index tuple.  The
  wedge is the shuffle sum without factorial normalisation, anchored by
  (dx ^ dy)(d/dx, d/dy) = 1.
* Evaluation of a p-form on p vector fields expands over increasing tuples
  against the determinant of the argument components, which is exactly the
  shuffle convention.

The exterior derivative comes in two independent implementations: the
coordinate formula on components (production path) and the alternating
vector-field formula with Lie brackets (oracle path).  Tests hold them
against each other.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from . import symexpr as se
from .symexpr import Expr, ZERO

__all__ = [
    "GeometryError",
    "ChartMismatchError",
    "DegreeError",
    "Chart",
    "Point",
    "ScalarField",
    "VectorField",
    "PForm",
    "LinearMap",
    "TensorValuedForm",
    "apply_vector_field",
    "lie_bracket",
    "wedge",
    "interior_product",
    "exterior_derivative",
    "exterior_derivative_intrinsic",
    "exterior_derivative_intrinsic_expr",
    "sort_with_sign",
    "random_point",
    "random_polynomial",
    "random_vector_field",
    "random_pform",
]


class GeometryError(Exception):
    pass


class ChartMismatchError(GeometryError):
    pass


class DegreeError(GeometryError):
    pass


Point = Mapping[str, float]


@dataclass(frozen=True)
class Chart:
    """A named coordinate patch.

    ``intervals`` bounds the sampling domain coordinate by coordinate, and
    ``trig_sampling`` lets the field sampler mix sin/cos factors in (useful
    on charts whose natural data is trigonometric).
    """

    name: str
    coords: tuple[str, ...]
    intervals: tuple[tuple[float, float], ...]
    trig_sampling: bool = False

    def __post_init__(self):
        if len(set(self.coords)) != len(self.coords):
            raise GeometryError(f"duplicate coordinate names in chart '{self.name}'")
        if len(self.intervals) != len(self.coords):
            raise GeometryError("one sampling interval is required per coordinate")
        for name, (lo, hi) in zip(self.coords, self.intervals):
            if not lo < hi:
                raise GeometryError(f"empty sampling interval for coordinate '{name}'")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def axis(self, name: str) -> int:
        try:
            return self.coords.index(name)
        except ValueError:
            raise GeometryError(f"no coordinate '{name}' in chart '{self.name}'") from None

    def parse(self, text: str) -> Expr:
        return se.parse(text, self.coords)

    def basis_field(self, i: int) -> "VectorField":
        comps = [ZERO] * self.dim
        comps[i] = se.ONE
        return VectorField(self, tuple(comps))

    def basis_covector(self, i: int) -> "PForm":
        return PForm(self, 1, {(i,): se.ONE})

    def coordinate_frame(self) -> tuple["VectorField", ...]:
        return tuple(self.basis_field(i) for i in range(self.dim))


def _same_chart(*objs):
    chart = objs[0].chart
    for o in objs[1:]:
        if o.chart is not chart and o.chart != chart:
            raise ChartMismatchError(
                f"objects live on different charts: '{chart.name}' vs '{o.chart.name}'"
            )
    return chart


@dataclass(frozen=True)
class ScalarField:
    chart: Chart
    expr: Expr

    def __call__(self, point: Point) -> float:
        return se.evaluate(self.expr, point)


class VectorField:
    """Vector field with one symbolic component per coordinate."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: Chart, comps: Sequence[Expr]):
        comps = tuple(se.as_expr(c) for c in comps)
        if len(comps) != chart.dim:
            raise GeometryError("component count does not match chart dimension")
        self.chart = chart
        self.comps = comps

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_chart(self, other)
        return VectorField(self.chart, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        _same_chart(self, other)
        return VectorField(self.chart, tuple(a - b for a, b in zip(self.comps, other.comps)))

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, tuple(-c for c in self.comps))

    def scale(self, factor) -> "VectorField":
        f = factor.expr if isinstance(factor, ScalarField) else se.as_expr(factor)
        return VectorField(self.chart, tuple(se.mul(f, c) for c in self.comps))

    def evaluate(self, point: Point) -> list[float]:
        return [se.evaluate(c, point) for c in self.comps]

    def __repr__(self):
        return f"VectorField({[str(c) for c in self.comps]})"


def apply_vector_field(X: VectorField, f) -> Expr:
    """Directional derivative X(f).  ``f`` may be an Expr or ScalarField."""
    expr = f.expr if isinstance(f, ScalarField) else se.as_expr(f)
    chart = X.chart
    return se.add_all(
        se.mul(X.comps[i], se.differentiate(expr, chart.coords[i])) for i in range(chart.dim)
    )


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^k = X(Y^k) - Y(X^k)."""
    chart = _same_chart(X, Y)
    comps = [
        se.sub(apply_vector_field(X, Y.comps[k]), apply_vector_field(Y, X.comps[k]))
        for k in range(chart.dim)
    ]
    return VectorField(chart, comps)


def sort_with_sign(indices: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Sort an index tuple, returning (sorted, permutation sign).

    Sign is 0 when an index repeats.
    """
    idx = list(indices)
    sign = 1
    # insertion sort; tuples have at most five entries here
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return tuple(idx), 0
    return tuple(idx), sign


class PForm:
    """Differential p-form with components on strictly increasing tuples.

    Degree may reach dim + 1 to give `d` of a top-degree form a canonical
    zero target; such forms have no components.
    """

    __slots__ = ("chart", "degree", "comps")

    def __init__(self, chart: Chart, degree: int, comps: Mapping[tuple[int, ...], Expr] | None = None):
        if degree < 0 or degree > chart.dim + 1:
            raise DegreeError(f"degree {degree} out of range on a {chart.dim}-dimensional chart")
        self.chart = chart
        self.degree = degree
        cleaned: dict[tuple[int, ...], Expr] = {}
        for key, value in (comps or {}).items():
            key = tuple(key)
            if len(key) != degree:
                raise DegreeError(f"component key {key} does not have {degree} indices")
            if any(not 0 <= i < chart.dim for i in key):
                raise GeometryError(f"index out of range in component key {key}")
            if list(key) != sorted(key) or len(set(key)) != len(key):
                raise GeometryError(f"component keys must be strictly increasing, got {key}")
            if degree > chart.dim:
                raise DegreeError("forms above top degree are identically zero")
            value = se.as_expr(value)
            if not se._is_const(value, 0):
                cleaned[key] = value
        self.comps = cleaned

    @staticmethod
    def zero(chart: Chart, degree: int) -> "PForm":
        return PForm(chart, degree, {})

    def component(self, indices: Sequence[int]) -> Expr:
        """Signed component for an arbitrary index tuple."""
        key, sign = sort_with_sign(indices)
        if sign == 0:
            return ZERO
        base = self.comps.get(key, ZERO)
        return base if sign == 1 else se.neg(base)

    def __add__(self, other: "PForm") -> "PForm":
        _same_chart(self, other)
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degree")
        out = dict(self.comps)
        for key, value in other.comps.items():
            out[key] = se.add(out.get(key, ZERO), value)
        return PForm(self.chart, self.degree, out)

    def __sub__(self, other: "PForm") -> "PForm":
        return self + (-other)

    def __neg__(self) -> "PForm":
        return PForm(self.chart, self.degree, {k: se.neg(v) for k, v in self.comps.items()})

    def scale(self, factor) -> "PForm":
        f = factor.expr if isinstance(factor, ScalarField) else se.as_expr(factor)
        return PForm(self.chart, self.degree, {k: se.mul(f, v) for k, v in self.comps.items()})

    def apply(self, fields: Sequence[VectorField]) -> Expr:
        """Symbolic evaluation on ``degree`` vector fields."""
        if len(fields) != self.degree:
            raise DegreeError(f"a {self.degree}-form takes {self.degree} arguments, got {len(fields)}")
        if self.degree == 0:
            raise DegreeError("0-forms are scalars; evaluate their expression directly")
        chart = _same_chart(self, *fields)
        total = ZERO
        for key, value in self.comps.items():
            det = _symbolic_det([[fields[b].comps[key[a]] for b in range(len(key))] for a in range(len(key))])
            total = se.add(total, se.mul(value, det))
        return total

    def evaluate(self, point: Point, vectors: Sequence[Sequence[float]]) -> float:
        """Numeric evaluation on component vectors at a point."""
        total = 0.0
        for key, value in self.comps.items():
            det = _numeric_det([[vectors[b][key[a]] for b in range(len(key))] for a in range(len(key))])
            total += se.evaluate(value, point) * det
        return total

    def __repr__(self):
        body = ", ".join(f"{k}: {v}" for k, v in sorted(self.comps.items()))
        return f"PForm(p={self.degree}, {{{body}}})"


def _symbolic_det(matrix: list[list[Expr]]) -> Expr:
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    total = ZERO
    for perm in itertools.permutations(range(n)):
        sign = _perm_sign(perm)
        term = se.ONE
        for row, col in enumerate(perm):
            term = se.mul(term, matrix[row][col])
        total = se.add(total, term if sign == 1 else se.neg(term))
    return total


def _numeric_det(matrix: list[list[float]]) -> float:
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    total = 0.0
    for perm in itertools.permutations(range(n)):
        term = 1.0
        for row, col in enumerate(perm):
            term *= matrix[row][col]
        total += _perm_sign(perm) * term
    return total


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def wedge(A: PForm, B: PForm) -> PForm:
    """Shuffle-sum wedge without factorials.

    Componentwise: (A ^ B)_K = sum over splittings K = I u J of
    sign(I, J) * A_I * B_J with I, J increasing.
    """
    chart = _same_chart(A, B)
    p, q = A.degree, B.degree
    if p + q > chart.dim:
        raise DegreeError(f"wedge degree {p + q} exceeds chart dimension {chart.dim}")
    out: dict[tuple[int, ...], Expr] = {}
    for I, a in A.comps.items():
        for J, b in B.comps.items():
            if set(I) & set(J):
                continue
            key, sign = sort_with_sign(I + J)
            term = se.mul(a, b)
            if sign == -1:
                term = se.neg(term)
            out[key] = se.add(out.get(key, ZERO), term)
    return PForm(chart, p + q, out)


def interior_product(X: VectorField, theta: PForm) -> PForm:
    """Contraction into the first slot: (X . theta)(Y...) = theta(X, Y...)."""
    chart = _same_chart(X, theta)
    if theta.degree == 0:
        raise DegreeError("cannot contract a 0-form")
    out: dict[tuple[int, ...], Expr] = {}
    for key, value in theta.comps.items():
        for slot, idx in enumerate(key):
            rest = key[:slot] + key[slot + 1 :]
            term = se.mul(X.comps[idx], value)
            if slot % 2 == 1:
                term = se.neg(term)
            out[rest] = se.add(out.get(rest, ZERO), term)
    return PForm(chart, theta.degree - 1, out)


def exterior_derivative(theta: PForm) -> PForm:
    """Coordinate exterior derivative on components.

    (d theta)_K = sum_a (-1)^a  d(theta_{K minus K_a}) / dx^{K_a} over the
    increasing tuple K.  Top-degree forms map to the canonical zero form of
    degree dim + 1.
    """
    chart = theta.chart
    if theta.degree >= chart.dim:
        return PForm(chart, theta.degree + 1, {})
    out: dict[tuple[int, ...], Expr] = {}
    for key in itertools.combinations(range(chart.dim), theta.degree + 1):
        total = ZERO
        for a, idx in enumerate(key):
            rest = key[:a] + key[a + 1 :]
            partial = se.differentiate(theta.comps.get(rest, ZERO), chart.coords[idx])
            total = se.add(total, partial if a % 2 == 0 else se.neg(partial))
        out[key] = total
    return PForm(chart, theta.degree + 1, out)


def exterior_derivative_intrinsic_expr(theta: PForm, fields: Sequence[VectorField]) -> Expr:
    """Alternating-sum exterior derivative evaluated on p + 1 vector fields.

    d theta(X_1 .. X_{p+1}) =
        sum_i (-1)^{i+1} X_i(theta(.. X_i-hat ..))
      + sum_{i<j} (-1)^{i+j} theta([X_i, X_j], .. X_i-hat .. X_j-hat ..)

    This is an independent oracle for :func:`exterior_derivative`; the Lie
    bracket terms only vanish on commuting argument fields.
    """
    p = theta.degree
    if len(fields) != p + 1:
        raise DegreeError(f"need {p + 1} argument fields, got {len(fields)}")
    chart = _same_chart(theta, *fields)
    total = ZERO
    for i in range(p + 1):
        others = [f for a, f in enumerate(fields) if a != i]
        inner = theta.apply(others) if p > 0 else theta.comps.get((), ZERO)
        term = apply_vector_field(fields[i], inner)
        total = se.add(total, term if i % 2 == 0 else se.neg(term))
    if p > 0:
        for i in range(p + 1):
            for j in range(i + 1, p + 1):
                rest = [f for a, f in enumerate(fields) if a not in (i, j)]
                term = theta.apply([lie_bracket(fields[i], fields[j])] + rest)
                # (-1)^{i+j} with 1-based positions i+1, j+1 gives (-1)^{i+j+2}
                total = se.add(total, term if (i + j) % 2 == 0 else se.neg(term))
    return total


def exterior_derivative_intrinsic(theta: PForm, fields: Sequence[VectorField], point: Point) -> float:
    return se.evaluate(exterior_derivative_intrinsic_expr(theta, fields), point)


class LinearMap:
    """Endomorphism field: matrix of expressions acting on vector fields.

    entries[k][j] is the dx^k component of the image of d/dx^j.
    """

    __slots__ = ("chart", "entries")

    def __init__(self, chart: Chart, entries: Sequence[Sequence[Expr]]):
        entries = tuple(tuple(se.as_expr(e) for e in row) for row in entries)
        if len(entries) != chart.dim or any(len(row) != chart.dim for row in entries):
            raise GeometryError("endomorphism entries must form a dim x dim matrix")
        self.chart = chart
        self.entries = entries

    @staticmethod
    def identity(chart: Chart) -> "LinearMap":
        return LinearMap(
            chart,
            [[se.ONE if i == j else ZERO for j in range(chart.dim)] for i in range(chart.dim)],
        )

    def __call__(self, X: VectorField) -> VectorField:
        _same_chart(self, X)
        comps = [
            se.add_all(se.mul(self.entries[k][j], X.comps[j]) for j in range(self.chart.dim))
            for k in range(self.chart.dim)
        ]
        return VectorField(self.chart, comps)

    def __add__(self, other: "LinearMap") -> "LinearMap":
        _same_chart(self, other)
        return LinearMap(
            self.chart,
            [
                [se.add(a, b) for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ],
        )

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        return self + (-other)

    def __neg__(self) -> "LinearMap":
        return LinearMap(self.chart, [[se.neg(e) for e in row] for row in self.entries])

    def scale(self, factor) -> "LinearMap":
        f = factor.expr if isinstance(factor, ScalarField) else se.as_expr(factor)
        return LinearMap(self.chart, [[se.mul(f, e) for e in row] for row in self.entries])


class TensorValuedForm:
    """Antisymmetric multilinear map with tensor values.

    ``kind`` is 'vector', 'covector' or 'endomorphism'; ``arity`` is the
    number of vector-field arguments; ``rule`` maps that many fields to a
    VectorField, a degree-1 PForm or a LinearMap respectively.  The rule is
    expected to be multilinear and alternating; tests probe both.
    """

    __slots__ = ("chart", "kind", "arity", "rule")

    KINDS = ("vector", "covector", "endomorphism")

    def __init__(self, chart: Chart, kind: str, arity: int, rule: Callable):
        if kind not in self.KINDS:
            raise GeometryError(f"unsupported value kind '{kind}'")
        if arity < 0:
            raise GeometryError("arity must be non-negative")
        self.chart = chart
        self.kind = kind
        self.arity = arity
        self.rule = rule

    def __call__(self, *fields: VectorField):
        if len(fields) != self.arity:
            raise GeometryError(f"form of arity {self.arity} called with {len(fields)} arguments")
        if fields:
            _same_chart(self, *fields)
        return self.rule(*fields)


# -- seeded randomness -------------------------------------------------------

def random_point(chart: Chart, rng: random.Random) -> dict[str, float]:
    return {
        name: rng.uniform(lo, hi) for name, (lo, hi) in zip(chart.coords, chart.intervals)
    }


def random_polynomial(chart: Chart, rng: random.Random, degree: int = 2) -> Expr:
    """Sparse polynomial with integer coefficients in [-3, 3].

    Charts flagged ``trig_sampling`` may multiply one monomial by sin or cos
    of a coordinate, so trigonometric cancellations get exercised too.
    """
    terms = []
    n_terms = rng.randint(2, 4)
    for _ in range(n_terms):
        coeff = rng.randint(-3, 3)
        if coeff == 0:
            coeff = 1
        term: Expr = se.Const(coeff)
        for _ in range(rng.randint(0, degree)):
            term = se.mul(term, se.Var(rng.choice(chart.coords)))
        if chart.trig_sampling and rng.random() < 0.4:
            fn = se.sin if rng.random() < 0.5 else se.cos
            term = se.mul(term, fn(se.Var(rng.choice(chart.coords))))
        terms.append(term)
    return se.add_all(terms)


def random_vector_field(chart: Chart, rng: random.Random) -> VectorField:
    return VectorField(chart, [random_polynomial(chart, rng) for _ in range(chart.dim)])


def random_pform(chart: Chart, degree: int, rng: random.Random) -> PForm:
    if degree < 0 or degree > chart.dim:
        raise DegreeError(
            f"cannot sample a degree-{degree} form on a {chart.dim}-dimensional chart"
        )
    if degree == 0:
        return PForm(chart, 0, {(): random_polynomial(chart, rng)})
    comps = {
        key: random_polynomial(chart, rng)
        for key in itertools.combinations(range(chart.dim), degree)
    }
    return PForm(chart, degree, comps)

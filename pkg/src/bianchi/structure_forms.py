"""Signed-sum operators induced by a linear connection.

A linear connection splits the exterior derivative of any form into a
torsion part and a covariant-derivative part.  This module implements the
operator families appearing in those splittings:

* insertion forms that feed torsion or curvature values into the slots of
  an ordinary form (``torsion_form``, ``curvature_form``,
  ``torsion_mixed_form``, ``curvature_three_form``),
* alternating covariant-derivative sums (``xi_form``, ``psi_form``,
  ``connection_form``),
* the seven tensor-valued wedge pairings the identities use
  (``tensor_wedge``),
* the exterior covariant derivative on vector- and endomorphism-valued
  forms (``exterior_covariant_derivative``),
* the moving-frame apparatus: connection one-forms plus torsion and
  curvature two-forms of a coframe (``cartan_coframe_forms``).

Every scalar-valued operator comes in two flavours: a builder returning a
componentwise :class:`~bianchi.geometry.PForm` (defining sum evaluated on
the coordinate frame, coefficients kept symbolic) and a direct evaluator,
suffixed ``_apply``, that runs the same signed sum on arbitrary vector
fields and returns a scalar expression.  Agreement of the two routes on
non-coordinate fields is exactly the tensoriality of the operator; the
tests probe it on random fields.

Docstring formulas use one-based argument positions, matching the usual
blackboard presentation; the code is zero-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from . import symexpr as se
from .symexpr import Expr
from .geometry import (
    Chart,
    DegreeError,
    GeometryError,
    LinearMap,
    PForm,
    TensorValuedForm,
    VectorField,
    exterior_derivative,
    lie_bracket,
    random_point,
)
from .connection import (
    Connection,
    covariant_derivative,
    curvature,
    torsion,
)


class StructureFormError(GeometryError):
    pass


class UnsupportedPairingError(StructureFormError):
    """tensor_wedge received a pairing it has no contract for."""


class UnsupportedValueKindError(StructureFormError):
    """The exterior covariant derivative only acts on vector- and
    endomorphism-valued forms."""


class CoFrameError(StructureFormError):
    """A claimed coframe failed its duality check."""


# -- signed-sum plumbing ------------------------------------------------------


def _drop(fields, *skip):
    return [f for pos, f in enumerate(fields) if pos not in skip]


def _pair_sign(a: int, b: int) -> int:
    # (-1)^(i+j+1) for one-based positions i, j; a, b are zero-based.
    return 1 if (a + b) % 2 else -1


def _require_degree(theta: PForm, minimum: int = 1) -> None:
    if theta.degree < minimum:
        raise DegreeError(f"operator needs a form of degree >= {minimum}, got {theta.degree}")


def _expect_args(fields, count: int) -> None:
    if len(fields) != count:
        raise DegreeError(f"expected {count} vector-field arguments, got {len(fields)}")


def _componentwise(chart: Chart, degree: int, value_at) -> PForm:
    """Assemble a PForm by running a defining sum on coordinate frames."""
    if degree > chart.dim:
        return PForm(chart, degree, {})
    frame = chart.coordinate_frame()
    comps = {}
    for key in combinations(range(chart.dim), degree):
        comps[key] = value_at([frame[i] for i in key])
    return PForm(chart, degree, comps)


def _rotations(triple):
    a, b, c = triple
    return ((a, b, c), (b, c, a), (c, a, b))


# -- torsion and covariant-derivative insertion forms -------------------------


def torsion_form_apply(conn: Connection, theta: PForm, fields) -> Expr:
    """Defining sum of the torsion form on arbitrary fields.

    For a p-form Theta and p+1 fields::

        sum_{i<j} (-1)^(i+j+1) Theta(T(X_i, X_j), ..., no X_i, no X_j, ...)

    The inserted torsion value occupies slot 1; the surviving arguments
    keep their original order.
    """
    _require_degree(theta)
    _expect_args(fields, theta.degree + 1)
    tor = torsion(conn)
    terms = []
    for a in range(len(fields)):
        for b in range(a + 1, len(fields)):
            value = theta.apply([tor(fields[a], fields[b])] + _drop(fields, a, b))
            terms.append(value if _pair_sign(a, b) > 0 else se.neg(value))
    return se.add_all(terms)


def torsion_form(conn: Connection, theta: PForm) -> PForm:
    """Torsion (p+1)-form of a p-form; degree 1 gives (X, Y) -> theta(T(X, Y))."""
    _require_degree(theta)
    return _componentwise(
        conn.chart, theta.degree + 1, lambda fs: torsion_form_apply(conn, theta, fs)
    )


def xi_form_apply(conn: Connection, theta: PForm, fields) -> Expr:
    """Alternating covariant-derivative sum on arbitrary fields.

    For a p-form Theta and p+1 fields::

        sum_i (-1)^i (nabla_{X_i} Theta)(..., no X_i, ...)

    Degree 1 reduces to (X, Y) -> nabla_Y theta(X) - nabla_X theta(Y).
    """
    _require_degree(theta)
    _expect_args(fields, theta.degree + 1)
    terms = []
    for a in range(len(fields)):
        value = covariant_derivative(conn, fields[a], theta).apply(_drop(fields, a))
        # one-based (-1)^i: the first position enters negatively
        terms.append(se.neg(value) if a % 2 == 0 else value)
    return se.add_all(terms)


def xi_form(conn: Connection, theta: PForm) -> PForm:
    """Covariant-derivative (p+1)-form completing d to the torsion form."""
    _require_degree(theta)
    return _componentwise(
        conn.chart, theta.degree + 1, lambda fs: xi_form_apply(conn, theta, fs)
    )


def connection_form_apply(conn: Connection, theta: PForm, z: VectorField, fields) -> Expr:
    """Defining sum of the connection form on arbitrary fields.

    For a p-form Theta, a field Z and p fields::

        sum_i (-1)^(i+1) Theta(nabla_{X_i} Z, ..., no X_i, ...)

    Degree 1 reduces to X -> theta(nabla_X Z).
    """
    _require_degree(theta)
    _expect_args(fields, theta.degree)
    terms = []
    for a in range(len(fields)):
        inserted = covariant_derivative(conn, fields[a], z)
        value = theta.apply([inserted] + _drop(fields, a))
        terms.append(value if a % 2 == 0 else se.neg(value))
    return se.add_all(terms)


def connection_form(conn: Connection, theta: PForm, z: VectorField) -> PForm:
    """Connection p-form of a p-form against a reference field Z."""
    _require_degree(theta)
    return _componentwise(
        conn.chart, theta.degree, lambda fs: connection_form_apply(conn, theta, z, fs)
    )


def curvature_form_apply(conn: Connection, theta: PForm, z: VectorField, fields) -> Expr:
    """Defining sum of the curvature form on arbitrary fields.

    For a p-form Theta, a field Z and p+1 fields::

        sum_{i<j} (-1)^(i+j+1) Theta(R(X_i, X_j)Z, ..., no X_i, no X_j, ...)

    Degree 1 reduces to (X, Y) -> theta(R(X, Y)Z).
    """
    _require_degree(theta)
    _expect_args(fields, theta.degree + 1)
    curv = curvature(conn)
    terms = []
    for a in range(len(fields)):
        for b in range(a + 1, len(fields)):
            inserted = curv.apply_to(fields[a], fields[b], z)
            value = theta.apply([inserted] + _drop(fields, a, b))
            terms.append(value if _pair_sign(a, b) > 0 else se.neg(value))
    return se.add_all(terms)


def curvature_form(conn: Connection, theta: PForm, z: VectorField) -> PForm:
    """Curvature (p+1)-form of a p-form against a reference field Z."""
    _require_degree(theta)
    return _componentwise(
        conn.chart, theta.degree + 1, lambda fs: curvature_form_apply(conn, theta, z, fs)
    )


def psi_form_apply(conn: Connection, theta: PForm, z: VectorField, fields) -> Expr:
    """Double covariant-derivative sum on arbitrary fields.

    For a p-form Theta, a field Z and p+1 fields::

        sum_{i<j} (-1)^(i+j) [ (nabla_{X_i}Theta)(nabla_{X_j}Z, rest)
                             - (nabla_{X_j}Theta)(nabla_{X_i}Z, rest) ]

    Degree 1 reduces to (X, Y) -> nabla_Y theta(nabla_X Z) - nabla_X theta(nabla_Y Z).
    """
    _require_degree(theta)
    _expect_args(fields, theta.degree + 1)
    derivative_along = [covariant_derivative(conn, f, theta) for f in fields]
    z_along = [covariant_derivative(conn, f, z) for f in fields]
    terms = []
    for a in range(len(fields)):
        for b in range(a + 1, len(fields)):
            rest = _drop(fields, a, b)
            value = se.sub(
                derivative_along[a].apply([z_along[b]] + rest),
                derivative_along[b].apply([z_along[a]] + rest),
            )
            # one-based (-1)^(i+j)
            terms.append(se.neg(value) if _pair_sign(a, b) > 0 else value)
    return se.add_all(terms)


def psi_form(conn: Connection, theta: PForm, z: VectorField) -> PForm:
    """Second-derivative (p+1)-form completing d of the connection form."""
    _require_degree(theta)
    return _componentwise(
        conn.chart, theta.degree + 1, lambda fs: psi_form_apply(conn, theta, z, fs)
    )


def torsion_mixed_form_apply(conn: Connection, theta: PForm, z: VectorField, fields) -> Expr:
    """Torsion-and-derivative insertion sum on arbitrary fields.

    Zero for 1-forms by definition.  For a p-form Theta with p >= 2 and
    p+1 fields, every increasing triple of positions i<j<k contributes,
    with sign (-1)^(i+j+k), the three cyclic role assignments::

        Theta(T(X_i, X_j), nabla_{X_k} Z, rest)
        Theta(T(X_j, X_k), nabla_{X_i} Z, rest)
        Theta(T(X_k, X_i), nabla_{X_j} Z, rest)

    with the surviving arguments in original order after the two inserts.
    """
    _require_degree(theta)
    _expect_args(fields, theta.degree + 1)
    if theta.degree == 1:
        return se.ZERO
    tor = torsion(conn)
    terms = []
    for key in combinations(range(len(fields)), 3):
        # one-based (-1)^(i+j+k)
        sign = 1 if sum(key) % 2 else -1
        rest = _drop(fields, *key)
        trio = tuple(fields[pos] for pos in key)
        for xi, xj, xk in _rotations(trio):
            value = theta.apply(
                [tor(xi, xj), covariant_derivative(conn, xk, z)] + rest
            )
            terms.append(value if sign > 0 else se.neg(value))
    return se.add_all(terms)


def torsion_mixed_form(conn: Connection, theta: PForm, z: VectorField) -> PForm:
    """Mixed torsion (p+1)-form; identically zero on 1-forms."""
    _require_degree(theta)
    return _componentwise(
        conn.chart, theta.degree + 1, lambda fs: torsion_mixed_form_apply(conn, theta, z, fs)
    )


# -- the curvature 3-form of a 1-form -----------------------------------------


def curvature_three_form_apply(conn: Connection, theta: PForm, fields) -> Expr:
    """Cyclic sum (X, Y, Z) -> theta(R(X, Y)Z) over three fields."""
    if theta.degree != 1:
        raise DegreeError("the curvature 3-form is defined for 1-forms")
    _expect_args(fields, 3)
    curv = curvature(conn)
    terms = []
    for x, y, z in _rotations(tuple(fields)):
        terms.append(theta.apply([curv.apply_to(x, y, z)]))
    return se.add_all(terms)


def curvature_three_form(conn: Connection, theta: PForm) -> PForm:
    """Curvature 3-form of a 1-form; vanishes for torsion-free connections."""
    if theta.degree != 1:
        raise DegreeError("the curvature 3-form is defined for 1-forms")
    return _componentwise(
        conn.chart, 3, lambda fs: curvature_three_form_apply(conn, theta, fs)
    )


def curvature_three_form_via_iterated_derivatives(
    conn: Connection, theta: PForm, fields
) -> Expr:
    """Dual route to the curvature 3-form through iterated derivatives.

    Evaluates::

        - sum_cyc [ (nabla_X nabla_Y theta)(Z) - (nabla_Y nabla_X theta)(Z)
                    - (nabla_[X,Y] theta)(Z) ]

    where nabla_X nabla_Y theta means the covariant derivative along X of
    the 1-form nabla_Y theta (an iterated derivative, not the second
    covariant differential).  Kept deliberately independent of
    ``curvature_three_form_apply`` so the two routes can cross-check.
    """
    if theta.degree != 1:
        raise DegreeError("the curvature 3-form is defined for 1-forms")
    _expect_args(fields, 3)
    terms = []
    for x, y, z in _rotations(tuple(fields)):
        lead = covariant_derivative(conn, x, covariant_derivative(conn, y, theta)).apply([z])
        swapped = covariant_derivative(conn, y, covariant_derivative(conn, x, theta)).apply([z])
        bracket = covariant_derivative(conn, lie_bracket(x, y), theta).apply([z])
        terms.append(se.neg(se.sub(se.sub(lead, swapped), bracket)))
    return se.add_all(terms)


# -- generalized curvature candidate ------------------------------------------


def curvature_form_candidate(conn: Connection, theta: PForm) -> PForm:
    """Candidate general-degree curvature form: d(torsion form) minus the
    derivative-torsion wedge.

    For degree 1 this is exactly the curvature 3-form by the first Bianchi
    identity.  For higher degree no independent definition is available;
    this combination is the unique one making the general first Bianchi
    identity hold by construction.  Its pointwise dependence on the input
    form (function-linearity) is probed numerically in the tests rather
    than assumed.
    """
    _require_degree(theta)
    if theta.degree + 2 > conn.chart.dim + 1:
        raise DegreeError(
            "candidate curvature form would exceed top degree; "
            f"need degree <= {conn.chart.dim - 1}, got {theta.degree}"
        )
    lead = exterior_derivative(torsion_form(conn, theta))
    wedge_part = _componentwise(
        conn.chart, theta.degree + 2, lambda fs: wedge_form_torsion_apply(conn, theta, fs)
    )
    return lead - wedge_part


# -- tensor-valued wedge pairings ----------------------------------------------


class WedgeOperand:
    """Tagged operand for ``tensor_wedge``; build via the factory functions."""

    __slots__ = ("tag", "chart", "conn", "form", "field")

    def __init__(self, tag: str, chart: Chart, conn=None, form=None, field=None):
        self.tag = tag
        self.chart = chart
        self.conn = conn
        self.form = form
        self.field = field

    def __repr__(self):
        return f"WedgeOperand({self.tag})"


def nabla_form_operand(conn: Connection, theta: PForm) -> WedgeOperand:
    """Covariant differential of a form, as a wedge operand."""
    _require_degree(theta)
    return WedgeOperand("nabla_form", conn.chart, conn=conn, form=theta)


def nabla_field_operand(conn: Connection, z: VectorField) -> WedgeOperand:
    """Covariant differential of a vector field, as a wedge operand."""
    return WedgeOperand("nabla_field", conn.chart, conn=conn, field=z)


def identity_operand(chart: Chart) -> WedgeOperand:
    """The identity endomorphism (soldering form), as a wedge operand."""
    return WedgeOperand("identity", chart)


def torsion_operand(conn: Connection) -> WedgeOperand:
    return WedgeOperand("torsion", conn.chart, conn=conn)


def curvature_operand(conn: Connection) -> WedgeOperand:
    return WedgeOperand("curvature", conn.chart, conn=conn)


def curried_curvature_operand(conn: Connection, z: VectorField) -> WedgeOperand:
    """Curvature with its endomorphism slot filled by Z, as a wedge operand."""
    return WedgeOperand("curvature_field", conn.chart, conn=conn, field=z)


def curvature_three_operand(conn: Connection, theta: PForm) -> WedgeOperand:
    """The curvature 3-form contraction of a 1-form, as a wedge operand."""
    if theta.degree != 1:
        raise DegreeError("curvature-three operand needs a 1-form")
    return WedgeOperand("curvature_three", conn.chart, conn=conn, form=theta)


def wedge_covector_identity_apply(conn: Connection, theta: PForm, fields) -> Expr:
    """(nabla theta ^ I)(X, Y) = nabla_X theta(Y) - nabla_Y theta(X)."""
    _expect_args(fields, 2)
    x, y = fields
    return se.sub(
        covariant_derivative(conn, x, theta).apply([y]),
        covariant_derivative(conn, y, theta).apply([x]),
    )


def wedge_covector_nabla_apply(conn: Connection, theta: PForm, z: VectorField, fields) -> Expr:
    """(nabla theta ^ nabla Z)(X, Y) = nabla_X theta(nabla_Y Z) - nabla_Y theta(nabla_X Z)."""
    _expect_args(fields, 2)
    x, y = fields
    return se.sub(
        covariant_derivative(conn, x, theta).apply([covariant_derivative(conn, y, z)]),
        covariant_derivative(conn, y, theta).apply([covariant_derivative(conn, x, z)]),
    )


def wedge_covector_torsion_apply(conn: Connection, theta: PForm, fields) -> Expr:
    """(nabla theta ^ T)(X, Y, Z) = cyclic sum of nabla_X theta(T(Y, Z))."""
    _expect_args(fields, 3)
    tor = torsion(conn)
    terms = []
    for x, y, z in _rotations(tuple(fields)):
        terms.append(covariant_derivative(conn, x, theta).apply([tor(y, z)]))
    return se.add_all(terms)


def wedge_form_torsion_apply(conn: Connection, theta: PForm, fields) -> Expr:
    """General-degree derivative-torsion wedge on p+2 fields.

    Every increasing triple of positions contributes three terms: the
    middle position differentiates while torsion takes the outer pair,
    and the roles then rotate cyclically.  With one-based positions and
    sign (-1)^(i+j+k) for the triple i<j<k::

        - nabla_{X_j} Theta(T(X_i, X_k), rest)
        - nabla_{X_i} Theta(T(X_k, X_j), rest)
        - nabla_{X_k} Theta(T(X_j, X_i), rest)

    Degree 1 collapses to the cyclic three-term wedge above; the tests
    pin the agreement.
    """
    _require_degree(theta)
    _expect_args(fields, theta.degree + 2)
    tor = torsion(conn)
    terms = []
    for key in combinations(range(len(fields)), 3):
        # one-based (-1)^(i+j+k+1)
        sign = -1 if sum(key) % 2 else 1
        rest = _drop(fields, *key)
        xa, xb, xc = (fields[pos] for pos in key)
        for first, direction, second in ((xa, xb, xc), (xc, xa, xb), (xb, xc, xa)):
            value = covariant_derivative(conn, direction, theta).apply(
                [tor(first, second)] + rest
            )
            terms.append(value if sign > 0 else se.neg(value))
    return se.add_all(terms)


def wedge_covector_curvature_apply(
    conn: Connection, theta: PForm, z0: VectorField, fields
) -> Expr:
    """(nabla theta ^ R_Z0)(X, Y, Z) = cyclic sum of nabla_X theta(R(Y, Z)Z0)."""
    _expect_args(fields, 3)
    curv = curvature(conn)
    terms = []
    for x, y, z in _rotations(tuple(fields)):
        terms.append(
            covariant_derivative(conn, x, theta).apply([curv.apply_to(y, z, z0)])
        )
    return se.add_all(terms)


def wedge_curvature_three_nabla_apply(
    conn: Connection, theta: PForm, z0: VectorField, fields
) -> Expr:
    """(R_theta ^ nabla Z0)(X, Y, Z) = cyclic sum of theta(R(Y, Z) nabla_X Z0)."""
    _expect_args(fields, 3)
    curv = curvature(conn)
    terms = []
    for x, y, z in _rotations(tuple(fields)):
        terms.append(
            theta.apply([curv.apply_to(y, z, covariant_derivative(conn, x, z0))])
        )
    return se.add_all(terms)


def wedge_curvature_identity_apply(conn: Connection, fields) -> VectorField:
    """(R ^ I)(X, Y, Z) = cyclic sum of R(X, Y)Z, a vector value."""
    _expect_args(fields, 3)
    curv = curvature(conn)
    total = None
    for x, y, z in _rotations(tuple(fields)):
        value = curv.apply_to(x, y, z)
        total = value if total is None else total + value
    return total


_SUPPORTED_PAIRINGS = (
    "(nabla theta, identity)",
    "(nabla theta, nabla Z)",
    "(nabla Theta, torsion)",
    "(nabla theta, curried curvature)",
    "(curvature three-form, nabla Z)",
    "(curvature, identity)",
)


def tensor_wedge(left: WedgeOperand, right: WedgeOperand):
    """Wedge two tensor-valued operands under one of the supported pairings.

    Returns a componentwise PForm for the scalar-valued pairings and a
    vector-valued form of arity 3 for (curvature, identity).  Pairings
    outside the published list raise :class:`UnsupportedPairingError`;
    this is deliberately not a general graded-wedge machine.
    """
    if not isinstance(left, WedgeOperand) or not isinstance(right, WedgeOperand):
        raise UnsupportedPairingError("tensor_wedge operands must be WedgeOperand values")
    key = (left.tag, right.tag)
    chart = left.chart
    if key == ("nabla_form", "identity"):
        if left.form.degree != 1:
            raise UnsupportedPairingError("the identity pairing needs a 1-form differential")
        conn, theta = left.conn, left.form
        return _componentwise(chart, 2, lambda fs: wedge_covector_identity_apply(conn, theta, fs))
    if key == ("nabla_form", "nabla_field"):
        if left.form.degree != 1:
            raise UnsupportedPairingError("the field pairing needs a 1-form differential")
        conn, theta, z = left.conn, left.form, right.field
        return _componentwise(chart, 2, lambda fs: wedge_covector_nabla_apply(conn, theta, z, fs))
    if key == ("nabla_form", "torsion"):
        conn, theta = left.conn, left.form
        if theta.degree == 1:
            return _componentwise(chart, 3, lambda fs: wedge_covector_torsion_apply(conn, theta, fs))
        if theta.degree + 2 > chart.dim + 1:
            raise DegreeError("derivative-torsion wedge would exceed top degree")
        return _componentwise(
            chart, theta.degree + 2, lambda fs: wedge_form_torsion_apply(conn, theta, fs)
        )
    if key == ("nabla_form", "curvature_field"):
        if left.form.degree != 1:
            raise UnsupportedPairingError("the curvature pairing needs a 1-form differential")
        conn, theta, z0 = left.conn, left.form, right.field
        return _componentwise(
            chart, 3, lambda fs: wedge_covector_curvature_apply(conn, theta, z0, fs)
        )
    if key == ("curvature_three", "nabla_field"):
        conn, theta, z0 = left.conn, left.form, right.field
        return _componentwise(
            chart, 3, lambda fs: wedge_curvature_three_nabla_apply(conn, theta, z0, fs)
        )
    if key == ("curvature", "identity"):
        conn = left.conn
        return TensorValuedForm(
            chart, "vector", 3, lambda *fs: wedge_curvature_identity_apply(conn, list(fs))
        )
    raise UnsupportedPairingError(
        f"no wedge contract for ({left.tag}, {right.tag}); supported: "
        + ", ".join(_SUPPORTED_PAIRINGS)
    )


# -- exterior covariant derivative ---------------------------------------------


def covariant_differential(conn: Connection, z: VectorField) -> TensorValuedForm:
    """The vector-valued 1-form X -> nabla_X Z."""
    return TensorValuedForm(
        conn.chart, "vector", 1, lambda x: covariant_derivative(conn, x, z)
    )


def soldering_form(chart: Chart) -> TensorValuedForm:
    """The identity as a vector-valued 1-form, X -> X."""
    return TensorValuedForm(chart, "vector", 1, lambda x: x)


def exterior_covariant_derivative(conn: Connection, target) -> TensorValuedForm:
    """Exterior covariant derivative of a tensor-valued form.

    On a vector field (arity 0) this is the covariant differential.  On a
    vector- or endomorphism-valued k-form, with zero-based positions::

        sum_i (-1)^i nabla_{X_i}(A(..., no X_i, ...))
        + sum_{i<j} (-1)^(i+j) A([X_i, X_j], ..., no X_i, no X_j, ...)

    Covector-valued forms are rejected: their derivative never enters the
    identities this package verifies, and accepting them silently would
    invite convention drift.
    """
    if isinstance(target, VectorField):
        return covariant_differential(conn, target)
    if isinstance(target, LinearMap):
        return TensorValuedForm(
            conn.chart, "endomorphism", 1, lambda x: covariant_derivative(conn, x, target)
        )
    if not isinstance(target, TensorValuedForm):
        raise UnsupportedValueKindError(
            f"cannot take the exterior covariant derivative of {type(target).__name__}"
        )
    if target.kind == "covector":
        raise UnsupportedValueKindError(
            "exterior covariant derivative supports vector- and endomorphism-valued forms only"
        )
    # arity dim + 1 is allowed, mirroring d on top-degree forms: the
    # alternating-sum rule still evaluates and cancels pointwise
    if target.arity > conn.chart.dim:
        raise DegreeError("exterior covariant derivative would exceed top arity")
    arity = target.arity

    def rule(*fields):
        total = None
        for a in range(arity + 1):
            value = target(*_drop(fields, a))
            term = covariant_derivative(conn, fields[a], value)
            if a % 2:
                term = -term
            total = term if total is None else total + term
        for a in range(arity + 1):
            for b in range(a + 1, arity + 1):
                term = target(lie_bracket(fields[a], fields[b]), *_drop(fields, a, b))
                if (a + b) % 2:
                    term = -term
                total = total + term
        return total

    return TensorValuedForm(conn.chart, target.kind, arity + 1, rule)


# -- coframes and their structure forms ----------------------------------------


class CoFrame:
    """A frame of vector fields with its dual coframe of 1-forms.

    Duality is a pointwise claim, checked numerically at sampled points
    rather than symbolically.
    """

    __slots__ = ("chart", "frame", "coframe")

    def __init__(self, chart: Chart, frame, coframe):
        frame = tuple(frame)
        coframe = tuple(coframe)
        if len(frame) != chart.dim or len(coframe) != chart.dim:
            raise CoFrameError(
                f"need {chart.dim} frame fields and {chart.dim} coframe forms"
            )
        for field in frame:
            if field.chart is not chart:
                raise CoFrameError("frame field lives on a different chart")
        for form in coframe:
            if form.chart is not chart or form.degree != 1:
                raise CoFrameError("coframe entries must be 1-forms on the same chart")
        self.chart = chart
        self.frame = frame
        self.coframe = coframe

    @staticmethod
    def coordinate(chart: Chart) -> "CoFrame":
        return CoFrame(
            chart,
            chart.coordinate_frame(),
            tuple(chart.basis_covector(i) for i in range(chart.dim)),
        )

    def duality_residual(self, points) -> float:
        worst = 0.0
        for point in points:
            for a in range(self.chart.dim):
                for b in range(self.chart.dim):
                    value = se.evaluate(self.coframe[a].apply([self.frame[b]]), point)
                    target = 1.0 if a == b else 0.0
                    worst = max(worst, abs(value - target))
        return worst

    def validate(self, points, tol: float = 1e-10) -> None:
        worst = self.duality_residual(points)
        if worst > tol:
            raise CoFrameError(f"coframe duality violated: residual {worst:.3e} > {tol:.1e}")


@dataclass(frozen=True)
class CartanForms:
    """Connection 1-forms, torsion 2-forms and curvature 2-forms of a coframe.

    ``connection_one_forms[a][b]`` is the 1-form V -> theta^a(nabla_V U_b);
    ``torsion_two_forms[a]`` is (X, Y) -> theta^a(T(X, Y));
    ``curvature_two_forms[a][b]`` is (X, Y) -> theta^a(R(X, Y)U_b).
    """

    coframe: CoFrame
    connection_one_forms: tuple
    torsion_two_forms: tuple
    curvature_two_forms: tuple


def cartan_coframe_forms(
    conn: Connection,
    coframe: CoFrame,
    points=None,
    *,
    seed: int = 0,
    samples: int = 5,
    tol: float = 1e-10,
) -> CartanForms:
    """Build the classical structure forms of a coframe.

    The coframe's duality is validated first (at ``points``, or at seeded
    random points when none are given); a violation beyond ``tol`` raises
    :class:`CoFrameError`.
    """
    chart = conn.chart
    if coframe.chart is not chart:
        raise CoFrameError("coframe lives on a different chart than the connection")
    if points is None:
        import random as _random

        rng = _random.Random(f"coframe-duality/{seed}")
        points = [random_point(chart, rng) for _ in range(samples)]
    coframe.validate(points, tol)

    n = chart.dim
    frame = chart.coordinate_frame()
    tor = torsion(conn)
    curv = curvature(conn)

    connection_rows = []
    curvature_rows = []
    for a in range(n):
        theta_a = coframe.coframe[a]
        conn_row = []
        curv_row = []
        for b in range(n):
            u_b = coframe.frame[b]
            one_form = PForm(
                chart,
                1,
                {
                    (i,): theta_a.apply([covariant_derivative(conn, frame[i], u_b)])
                    for i in range(n)
                },
            )
            conn_row.append(one_form)
            two_form = PForm(
                chart,
                2,
                {
                    (i, j): theta_a.apply([curv.apply_to(frame[i], frame[j], u_b)])
                    for i, j in combinations(range(n), 2)
                },
            )
            curv_row.append(two_form)
        connection_rows.append(tuple(conn_row))
        curvature_rows.append(tuple(curv_row))

    torsion_forms = tuple(
        PForm(
            chart,
            2,
            {
                (i, j): coframe.coframe[a].apply([tor(frame[i], frame[j])])
                for i, j in combinations(range(n), 2)
            },
        )
        for a in range(n)
    )

    return CartanForms(
        coframe=coframe,
        connection_one_forms=tuple(connection_rows),
        torsion_two_forms=torsion_forms,
        curvature_two_forms=tuple(curvature_rows),
    )

"""Operator-family tests: defining sums against hand-derived values,
dual-path cross-checks, tensoriality of the componentwise builders."""

import math
import random

import pytest

from bianchi import connection as con
from bianchi import geometry as geo
from bianchi import structure_forms as sf
from bianchi import symexpr as se


R3 = geo.Chart("r3", ("x", "y", "z"), ((-1.0, 1.0),) * 3)
R4 = geo.Chart("r4", ("x", "y", "z", "w"), ((-1.0, 1.0),) * 4)
SPHERE = geo.Chart(
    "sphere", ("phi", "psi"), ((0.3, 2.8), (0.1, 6.18)), trig_sampling=True
)


def random_linear_connection(chart, seed):
    rng = random.Random(seed)
    n = chart.dim
    gamma = [
        [[geo.random_polynomial(chart, rng, degree=1) for _ in range(n)] for _ in range(n)]
        for _ in range(n)
    ]
    return con.Connection(chart, gamma)


def flat_with_torsion():
    """Flat connection with constant torsion T(dx, dy) = 2 d/dz."""
    return con.Connection.from_nonzero(R3, {(2, 0, 1): se.ONE, (2, 1, 0): se.neg(se.ONE)})


def sphere_connection():
    phi = se.Var("phi")
    metric = con.Metric.from_nonzero(
        SPHERE, {(0, 0): se.ONE, (1, 1): se.power(se.sin(phi), 2)}
    )
    return con.levi_civita(metric)


def sample_points(chart, rng, n=5):
    return [geo.random_point(chart, rng) for _ in range(n)]


def sample_fields(chart, rng, n):
    return [geo.random_vector_field(chart, rng) for _ in range(n)]


def assert_close(lhs, rhs, points, tol=1e-9):
    for pt in points:
        assert se.evaluate(lhs, pt) == pytest.approx(se.evaluate(rhs, pt), abs=tol)


# -- torsion form --------------------------------------------------------------


def test_torsion_form_one_form_inserts_torsion_value():
    conn = random_linear_connection(R3, 11)
    rng = random.Random(12)
    theta = geo.random_pform(R3, 1, rng)
    X, Y = sample_fields(R3, rng, 2)
    tor = con.torsion(conn)
    lhs = sf.torsion_form_apply(conn, theta, [X, Y])
    rhs = theta.apply([tor(X, Y)])
    assert_close(lhs, rhs, sample_points(R3, rng), tol=1e-12)


def test_torsion_form_frozen_values_on_torsion_case():
    conn = flat_with_torsion()
    dz = R3.basis_covector(2)
    built = sf.torsion_form(conn, dz)
    pt = {"x": 0.3, "y": -0.4, "z": 0.9}
    assert se.evaluate(built.component((0, 1)), pt) == pytest.approx(2.0)
    assert se.evaluate(built.component((0, 2)), pt) == pytest.approx(0.0)
    # degree-2 input: every slot of dz^dx kills the inserted 2*d/dz value
    two_form = geo.wedge(dz, R3.basis_covector(0))
    built2 = sf.torsion_form(conn, two_form)
    assert built2.comps == {}


def test_torsion_form_equals_d_plus_xi_on_random_fields():
    """Dual path: the defining sums against the exterior derivative."""
    for degree in (1, 2, 3):
        conn = random_linear_connection(R4, 20 + degree)
        rng = random.Random(30 + degree)
        theta = geo.random_pform(R4, degree, rng)
        fields = sample_fields(R4, rng, degree + 1)
        lhs = sf.torsion_form_apply(conn, theta, fields)
        rhs = se.add(
            geo.exterior_derivative_intrinsic_expr(theta, fields),
            sf.xi_form_apply(conn, theta, fields),
        )
        assert_close(lhs, rhs, sample_points(R4, rng), tol=1e-9)


def test_degree_zero_inputs_rejected():
    conn = random_linear_connection(R3, 40)
    zero_form = geo.PForm(R3, 0, {(): se.Var("x")})
    Z = R3.basis_field(0)
    with pytest.raises(geo.DegreeError):
        sf.torsion_form(conn, zero_form)
    with pytest.raises(geo.DegreeError):
        sf.xi_form(conn, zero_form)
    with pytest.raises(geo.DegreeError):
        sf.connection_form(conn, zero_form, Z)
    with pytest.raises(geo.DegreeError):
        sf.curvature_form(conn, zero_form, Z)
    with pytest.raises(geo.DegreeError):
        sf.psi_form(conn, zero_form, Z)
    with pytest.raises(geo.DegreeError):
        sf.torsion_mixed_form(conn, zero_form, Z)


# -- xi form -------------------------------------------------------------------


def test_xi_form_frozen_flat_example():
    conn = con.Connection.zero(R3)
    theta = R3.basis_covector(1).scale(se.Var("x"))  # x dy
    built = sf.xi_form(conn, theta)
    pt = {"x": 0.7, "y": 0.1, "z": -0.2}
    assert se.evaluate(built.component((0, 1)), pt) == pytest.approx(-1.0)
    # first structure equation closes: T_theta = d theta + Xi_theta = 0
    total = geo.exterior_derivative(theta) + built
    assert all(se.evaluate(v, pt) == pytest.approx(0.0) for v in total.comps.values())


def test_xi_form_frozen_torsion_example():
    conn = flat_with_torsion()
    dz = R3.basis_covector(2)
    built = sf.xi_form(conn, dz)
    pt = {"x": 0.0, "y": 0.5, "z": -0.5}
    assert se.evaluate(built.component((0, 1)), pt) == pytest.approx(2.0)


def test_xi_form_is_negated_identity_wedge():
    rng = random.Random(50)
    for trial in range(20):
        conn = random_linear_connection(R3, 500 + trial)
        theta = geo.random_pform(R3, 1, rng)
        fields = sample_fields(R3, rng, 2)
        lhs = sf.xi_form_apply(conn, theta, fields)
        rhs = se.neg(sf.wedge_covector_identity_apply(conn, theta, fields))
        assert_close(lhs, rhs, [geo.random_point(R3, rng)], tol=1e-9)


def test_xi_one_form_reduction_matches_general_sum():
    """Degree 1 instance of the general sum against the two-term formula."""
    conn = random_linear_connection(R3, 60)
    rng = random.Random(61)
    theta = geo.random_pform(R3, 1, rng)
    X, Y = sample_fields(R3, rng, 2)
    general = sf.xi_form_apply(conn, theta, [X, Y])
    reduced = se.sub(
        con.covariant_derivative(conn, Y, theta).apply([X]),
        con.covariant_derivative(conn, X, theta).apply([Y]),
    )
    assert_close(general, reduced, sample_points(R3, rng), tol=1e-12)


# -- connection form -----------------------------------------------------------


def test_connection_form_frozen_flat_example():
    conn = con.Connection.zero(R3)
    dx = R3.basis_covector(0)
    Z = R3.basis_field(0).scale(se.Var("y"))  # y d/dx
    built = sf.connection_form(conn, dx, Z)
    pt = {"x": 0.2, "y": 0.4, "z": 0.6}
    assert se.evaluate(built.component((1,)), pt) == pytest.approx(1.0)
    assert se.evaluate(built.component((0,)), pt) == pytest.approx(0.0)


def test_connection_form_vanishes_for_parallel_field():
    conn = con.Connection.zero(R3)
    rng = random.Random(70)
    theta = geo.random_pform(R3, 2, rng)
    Z = geo.VectorField(R3, (se.Const(2), se.Const(-1), se.Const(3)))
    built = sf.connection_form(conn, theta, Z)
    assert built.comps == {}


def test_connection_one_form_reduction():
    conn = random_linear_connection(R3, 80)
    rng = random.Random(81)
    theta = geo.random_pform(R3, 1, rng)
    Z, X = sample_fields(R3, rng, 2)
    lhs = sf.connection_form_apply(conn, theta, Z, [X])
    rhs = theta.apply([con.covariant_derivative(conn, X, Z)])
    assert_close(lhs, rhs, sample_points(R3, rng), tol=1e-12)


# -- curvature form ------------------------------------------------------------


def test_curvature_form_sphere_frozen_value():
    conn = sphere_connection()
    dphi = SPHERE.basis_covector(0)
    Z = SPHERE.basis_field(1)
    built = sf.curvature_form(conn, dphi, Z)
    rng = random.Random(90)
    for pt in sample_points(SPHERE, rng):
        expected = math.sin(pt["phi"]) ** 2
        assert se.evaluate(built.component((0, 1)), pt) == pytest.approx(expected, abs=1e-10)


def test_curvature_form_function_linear_in_theta_and_z():
    conn = random_linear_connection(R3, 100)
    rng = random.Random(101)
    theta = geo.random_pform(R3, 1, rng)
    Z = geo.random_vector_field(R3, rng)
    f = geo.random_polynomial(R3, rng)
    fields = sample_fields(R3, rng, 2)
    points = sample_points(R3, rng)

    scaled_z = sf.curvature_form_apply(conn, theta, Z.scale(f), fields)
    scaled_theta = sf.curvature_form_apply(conn, theta.scale(f), Z, fields)
    base = sf.curvature_form_apply(conn, theta, Z, fields)
    assert_close(scaled_z, se.mul(f, base), points)
    assert_close(scaled_theta, se.mul(f, base), points)

    t_scaled = sf.torsion_form_apply(conn, theta.scale(f), fields)
    t_base = sf.torsion_form_apply(conn, theta, fields)
    assert_close(t_scaled, se.mul(f, t_base), points)


def test_curvature_form_flat_connection_vanishes():
    conn = con.Connection.zero(R3)
    rng = random.Random(110)
    theta = geo.random_pform(R3, 2, rng)
    Z = geo.random_vector_field(R3, rng)
    built = sf.curvature_form(conn, theta, Z)
    assert built.comps == {}


# -- psi form ------------------------------------------------------------------


def test_psi_form_frozen_flat_example():
    conn = con.Connection.zero(R3)
    theta = R3.basis_covector(1).scale(se.Var("x"))  # x dy
    Z = R3.basis_field(0).scale(se.Var("x"))  # x d/dx
    built = sf.psi_form(conn, theta, Z)
    pt = {"x": 0.5, "y": 0.5, "z": 0.5}
    assert se.evaluate(built.component((0, 1)), pt) == pytest.approx(0.0)


def test_psi_form_vanishes_for_parallel_field():
    conn = con.Connection.zero(R3)
    rng = random.Random(120)
    theta = geo.random_pform(R3, 2, rng)
    Z = geo.VectorField(R3, (se.ONE, se.Const(4), se.ZERO))
    built = sf.psi_form(conn, theta, Z)
    assert built.comps == {}


def test_psi_form_is_negated_nabla_wedge():
    rng = random.Random(130)
    for trial in range(20):
        conn = random_linear_connection(R3, 600 + trial)
        theta = geo.random_pform(R3, 1, rng)
        Z = geo.random_vector_field(R3, rng)
        fields = sample_fields(R3, rng, 2)
        lhs = sf.psi_form_apply(conn, theta, Z, fields)
        rhs = se.neg(sf.wedge_covector_nabla_apply(conn, theta, Z, fields))
        assert_close(lhs, rhs, [geo.random_point(R3, rng)], tol=1e-9)


def test_psi_one_form_reduction():
    conn = random_linear_connection(R3, 140)
    rng = random.Random(141)
    theta = geo.random_pform(R3, 1, rng)
    Z, X, Y = sample_fields(R3, rng, 3)
    general = sf.psi_form_apply(conn, theta, Z, [X, Y])
    reduced = se.sub(
        con.covariant_derivative(conn, Y, theta).apply([con.covariant_derivative(conn, X, Z)]),
        con.covariant_derivative(conn, X, theta).apply([con.covariant_derivative(conn, Y, Z)]),
    )
    assert_close(general, reduced, sample_points(R3, rng), tol=1e-12)


# -- mixed torsion form ---------------------------------------------------------


def test_torsion_mixed_form_zero_for_one_forms():
    conn = flat_with_torsion()
    rng = random.Random(150)
    theta = geo.random_pform(R3, 1, rng)
    Z = geo.random_vector_field(R3, rng)
    built = sf.torsion_mixed_form(conn, theta, Z)
    assert built.comps == {}
    fields = sample_fields(R3, rng, 2)
    assert sf.torsion_mixed_form_apply(conn, theta, Z, fields) is se.ZERO


def test_torsion_mixed_form_zero_without_torsion():
    conn = sphere_connection()
    dphi = SPHERE.basis_covector(0)
    dpsi = SPHERE.basis_covector(1)
    Z = SPHERE.basis_field(0)
    built = sf.torsion_mixed_form(conn, geo.wedge(dphi, dpsi), Z)
    rng = random.Random(160)
    for pt in sample_points(SPHERE, rng):
        for value in built.comps.values():
            assert se.evaluate(value, pt) == pytest.approx(0.0, abs=1e-12)


def test_torsion_mixed_form_dual_path_via_connection_form():
    """The mixed form is pinned implicitly by the general second structure
    equation: T_{Theta,Z} = d omega - R + Psi."""
    conn = random_linear_connection(R4, 170)
    rng = random.Random(171)
    theta = geo.random_pform(R4, 2, rng)
    Z = geo.random_vector_field(R4, rng)
    fields = sample_fields(R4, rng, 3)

    omega = sf.connection_form(conn, theta, Z)
    d_omega = geo.exterior_derivative(omega)
    implied = se.add_all(
        [
            d_omega.apply(fields),
            se.neg(sf.curvature_form_apply(conn, theta, Z, fields)),
            sf.psi_form_apply(conn, theta, Z, fields),
        ]
    )
    direct = sf.torsion_mixed_form_apply(conn, theta, Z, fields)
    assert_close(direct, implied, sample_points(R4, rng), tol=1e-9)


# -- curvature 3-form -----------------------------------------------------------


def test_curvature_three_form_matches_iterated_derivative_route():
    conn = random_linear_connection(R3, 180)
    rng = random.Random(181)
    theta = geo.random_pform(R3, 1, rng)
    fields = sample_fields(R3, rng, 3)
    lhs = sf.curvature_three_form_apply(conn, theta, fields)
    rhs = sf.curvature_three_form_via_iterated_derivatives(conn, theta, fields)
    assert_close(lhs, rhs, sample_points(R3, rng, n=20), tol=1e-9)


def test_curvature_three_form_vanishes_for_levi_civita():
    rng = random.Random(190)
    g = con.Metric.from_nonzero(
        R3,
        {
            (0, 0): se.add(se.ONE, se.power(se.Var("y"), 2)),
            (1, 1): se.Const(2),
            (2, 2): se.ONE,
        },
    )
    conn3 = con.levi_civita(g)
    theta3 = geo.random_pform(R3, 1, rng)
    built = sf.curvature_three_form(conn3, theta3)
    for pt in sample_points(R3, rng):
        for value in built.comps.values():
            assert se.evaluate(value, pt) == pytest.approx(0.0, abs=1e-10)


def test_curvature_three_form_vanishes_when_curvature_does():
    conn = flat_with_torsion()
    rng = random.Random(200)
    theta = geo.random_pform(R3, 1, rng)
    built = sf.curvature_three_form(conn, theta)
    assert built.comps == {}


# -- candidate general-degree curvature ----------------------------------------


def test_curvature_candidate_reduces_to_three_form_at_degree_one():
    conn = random_linear_connection(R3, 210)
    rng = random.Random(211)
    theta = geo.random_pform(R3, 1, rng)
    candidate = sf.curvature_form_candidate(conn, theta)
    direct = sf.curvature_three_form(conn, theta)
    residual = candidate - direct
    for pt in sample_points(R3, rng):
        for value in residual.comps.values():
            assert se.evaluate(value, pt) == pytest.approx(0.0, abs=1e-10)


def test_curvature_candidate_function_linearity_probe():
    """Numerical probe of the open question: is d T_Theta - nabla Theta ^ T
    function-linear in Theta at degree 2?  The probe reports by assertion;
    a failure here means the candidate is NOT pointwise in Theta."""
    conn = random_linear_connection(R4, 220)
    rng = random.Random(221)
    theta = geo.random_pform(R4, 2, rng)
    f = geo.random_polynomial(R4, rng)
    scaled = sf.curvature_form_candidate(conn, theta.scale(f))
    base = sf.curvature_form_candidate(conn, theta).scale(f)
    residual = scaled - base
    for pt in sample_points(R4, rng):
        for value in residual.comps.values():
            assert se.evaluate(value, pt) == pytest.approx(0.0, abs=1e-9)


def test_curvature_candidate_rejects_top_degree():
    conn = random_linear_connection(R3, 230)
    rng = random.Random(231)
    theta = geo.random_pform(R3, 3, rng)
    with pytest.raises(geo.DegreeError):
        sf.curvature_form_candidate(conn, theta)


# -- tensor wedge ----------------------------------------------------------------


def test_tensor_wedge_general_torsion_pairing_reduces_at_degree_one():
    conn = random_linear_connection(R3, 240)
    rng = random.Random(241)
    theta = geo.random_pform(R3, 1, rng)
    fields = sample_fields(R3, rng, 3)
    general = sf.wedge_form_torsion_apply(conn, theta, fields)
    cyclic = sf.wedge_covector_torsion_apply(conn, theta, fields)
    # identical algebra, different summation order: only roundoff survives
    assert_close(general, cyclic, sample_points(R3, rng), tol=1e-11)


def test_tensor_wedge_dispatch_and_unsupported_pairing():
    conn = random_linear_connection(R3, 250)
    rng = random.Random(251)
    theta = geo.random_pform(R3, 1, rng)
    Z = geo.random_vector_field(R3, rng)

    nabla_theta = sf.nabla_form_operand(conn, theta)
    built = sf.tensor_wedge(nabla_theta, sf.identity_operand(R3))
    assert built.degree == 2
    built = sf.tensor_wedge(nabla_theta, sf.nabla_field_operand(conn, Z))
    assert built.degree == 2
    built = sf.tensor_wedge(nabla_theta, sf.torsion_operand(conn))
    assert built.degree == 3
    built = sf.tensor_wedge(nabla_theta, sf.curried_curvature_operand(conn, Z))
    assert built.degree == 3
    built = sf.tensor_wedge(sf.curvature_three_operand(conn, theta), sf.nabla_field_operand(conn, Z))
    assert built.degree == 3
    vector_valued = sf.tensor_wedge(sf.curvature_operand(conn), sf.identity_operand(R3))
    assert vector_valued.arity == 3 and vector_valued.kind == "vector"

    with pytest.raises(sf.UnsupportedPairingError):
        sf.tensor_wedge(sf.identity_operand(R3), nabla_theta)
    with pytest.raises(sf.UnsupportedPairingError):
        sf.tensor_wedge(sf.torsion_operand(conn), sf.torsion_operand(conn))


def test_tensor_wedge_curvature_identity_against_brute_force():
    for chart, seed in ((SPHERE, 260), (R3, 261)):
        conn = sphere_connection() if chart is SPHERE else random_linear_connection(chart, seed)
        rng = random.Random(seed)
        fields = sample_fields(chart, rng, 3) if chart.dim >= 3 else None
        if chart.dim < 3:
            continue
        wedge = sf.tensor_wedge(sf.curvature_operand(conn), sf.identity_operand(chart))
        lhs = wedge(*fields)
        total = None
        for i in range(3):
            x, y, z = fields[i % 3], fields[(i + 1) % 3], fields[(i + 2) % 3]
            value = con.curvature_via_definition(conn, x, y, z)
            total = value if total is None else total + value
        residual = lhs - total
        for pt in sample_points(chart, rng):
            assert max(abs(v) for v in residual.evaluate(pt)) < 1e-9


def test_tensor_wedge_sphere_curvature_identity_brute_force_frozen():
    """Coordinate triple on the sphere: the cyclic curvature sum telescopes
    to zero by antisymmetry, matching the brute-force value."""
    conn = sphere_connection()
    wedge = sf.tensor_wedge(sf.curvature_operand(conn), sf.identity_operand(SPHERE))
    fields = [SPHERE.basis_field(0), SPHERE.basis_field(1), SPHERE.basis_field(1)]
    value = wedge(*fields)
    pt = {"phi": 1.0, "psi": 1.0}
    assert max(abs(v) for v in value.evaluate(pt)) == pytest.approx(0.0, abs=1e-12)


# -- exterior covariant derivative -----------------------------------------------


def test_exterior_covariant_derivative_of_soldering_is_torsion():
    conn = flat_with_torsion()
    derived = sf.exterior_covariant_derivative(conn, sf.soldering_form(R3))
    value = derived(R3.basis_field(0), R3.basis_field(1))
    pt = {"x": 0.1, "y": 0.2, "z": 0.3}
    assert value.evaluate(pt) == pytest.approx([0.0, 0.0, 2.0])

    conn2 = random_linear_connection(R3, 270)
    rng = random.Random(271)
    X, Y = sample_fields(R3, rng, 2)
    derived2 = sf.exterior_covariant_derivative(conn2, sf.soldering_form(R3))
    tor = con.torsion(conn2)
    residual = derived2(X, Y) - tor(X, Y)
    for pt in sample_points(R3, rng):
        assert max(abs(v) for v in residual.evaluate(pt)) < 1e-10


def test_exterior_covariant_derivative_of_differential_is_curvature():
    conn = random_linear_connection(R3, 280)
    rng = random.Random(281)
    Z = geo.random_vector_field(R3, rng)
    X, Y = sample_fields(R3, rng, 2)
    derived = sf.exterior_covariant_derivative(conn, sf.covariant_differential(conn, Z))
    curried = con.curvature(conn).curried(Z)
    residual = derived(X, Y) - curried(X, Y)
    for pt in sample_points(R3, rng):
        assert max(abs(v) for v in residual.evaluate(pt)) < 1e-9

    flat = con.Connection.zero(R3)
    derived_flat = sf.exterior_covariant_derivative(flat, sf.covariant_differential(flat, Z))
    value = derived_flat(X, Y)
    for pt in sample_points(R3, rng):
        assert max(abs(v) for v in value.evaluate(pt)) < 1e-12


def test_exterior_covariant_derivative_of_torsion_is_curvature_wedge():
    for conn in (sphere_connection(), random_linear_connection(R3, 290)):
        chart = conn.chart
        if chart.dim < 3:
            continue
        rng = random.Random(291)
        fields = sample_fields(chart, rng, 3)
        lhs = sf.exterior_covariant_derivative(conn, con.torsion(conn))(*fields)
        rhs = sf.tensor_wedge(sf.curvature_operand(conn), sf.identity_operand(chart))(*fields)
        residual = lhs - rhs
        for pt in sample_points(chart, rng):
            assert max(abs(v) for v in residual.evaluate(pt)) < 1e-9


def test_exterior_covariant_derivative_of_curvature_vanishes():
    conn = random_linear_connection(R3, 300)
    rng = random.Random(301)
    fields = sample_fields(R3, rng, 3)
    W = geo.random_vector_field(R3, rng)
    derived = sf.exterior_covariant_derivative(conn, con.curvature(conn))
    endo = derived(*fields)
    value = endo(W)
    for pt in sample_points(R3, rng):
        assert max(abs(v) for v in value.evaluate(pt)) < 1e-9


def test_exterior_covariant_derivative_rejects_covectors():
    conn = random_linear_connection(R3, 310)
    covector_valued = geo.TensorValuedForm(
        R3, "covector", 1, lambda x: R3.basis_covector(0)
    )
    with pytest.raises(sf.UnsupportedValueKindError):
        sf.exterior_covariant_derivative(conn, covector_valued)
    with pytest.raises(sf.UnsupportedValueKindError):
        sf.exterior_covariant_derivative(conn, "not a form")


# -- componentwise builders against direct evaluators ----------------------------


def test_componentwise_builders_agree_with_direct_apply():
    """Tensoriality: the coordinate-frame components reproduce the defining
    sums on arbitrary non-coordinate fields."""
    conn = random_linear_connection(R3, 320)
    rng = random.Random(321)
    theta1 = geo.random_pform(R3, 1, rng)
    theta2 = geo.random_pform(R3, 2, rng)
    Z = geo.random_vector_field(R3, rng)
    points = sample_points(R3, rng)

    pairs = []
    fields2 = sample_fields(R3, rng, 2)
    fields3 = sample_fields(R3, rng, 3)
    pairs.append((sf.torsion_form(conn, theta1).apply(fields2),
                  sf.torsion_form_apply(conn, theta1, fields2)))
    pairs.append((sf.torsion_form(conn, theta2).apply(fields3),
                  sf.torsion_form_apply(conn, theta2, fields3)))
    pairs.append((sf.xi_form(conn, theta2).apply(fields3),
                  sf.xi_form_apply(conn, theta2, fields3)))
    pairs.append((sf.connection_form(conn, theta2, Z).apply(fields2),
                  sf.connection_form_apply(conn, theta2, Z, fields2)))
    pairs.append((sf.curvature_form(conn, theta2, Z).apply(fields3),
                  sf.curvature_form_apply(conn, theta2, Z, fields3)))
    pairs.append((sf.psi_form(conn, theta2, Z).apply(fields3),
                  sf.psi_form_apply(conn, theta2, Z, fields3)))
    pairs.append((sf.torsion_mixed_form(conn, theta2, Z).apply(fields3),
                  sf.torsion_mixed_form_apply(conn, theta2, Z, fields3)))
    pairs.append((sf.curvature_three_form(conn, theta1).apply(fields3),
                  sf.curvature_three_form_apply(conn, theta1, fields3)))
    for lhs, rhs in pairs:
        assert_close(lhs, rhs, points, tol=1e-9)


def test_direct_evaluators_are_antisymmetric():
    conn = random_linear_connection(R3, 330)
    rng = random.Random(331)
    theta = geo.random_pform(R3, 2, rng)
    Z = geo.random_vector_field(R3, rng)
    a, b, c = sample_fields(R3, rng, 3)
    points = sample_points(R3, rng)
    for fn in (
        lambda fs: sf.torsion_form_apply(conn, theta, fs),
        lambda fs: sf.xi_form_apply(conn, theta, fs),
        lambda fs: sf.curvature_form_apply(conn, theta, Z, fs),
        lambda fs: sf.psi_form_apply(conn, theta, Z, fs),
        lambda fs: sf.torsion_mixed_form_apply(conn, theta, Z, fs),
    ):
        swapped = se.add(fn([a, b, c]), fn([b, a, c]))
        rotated = se.add(fn([a, b, c]), fn([a, c, b]))
        assert_close(swapped, se.ZERO, points, tol=1e-11)
        assert_close(rotated, se.ZERO, points, tol=1e-11)


# -- coframes ---------------------------------------------------------------------


def test_cartan_coframe_forms_sphere_frozen_values():
    conn = sphere_connection()
    frame = sf.CoFrame.coordinate(SPHERE)
    forms = sf.cartan_coframe_forms(conn, frame, seed=3)
    rng = random.Random(340)
    for pt in sample_points(SPHERE, rng):
        cot = math.cos(pt["phi"]) / math.sin(pt["phi"])
        # omega^psi_phi(d/dpsi) = cot(phi)
        assert se.evaluate(
            forms.connection_one_forms[1][0].component((1,)), pt
        ) == pytest.approx(cot, abs=1e-10)
        # torsion-free: all torsion two-forms vanish
        for two_form in forms.torsion_two_forms:
            for value in two_form.comps.values():
                assert se.evaluate(value, pt) == pytest.approx(0.0, abs=1e-12)
        # Omega^phi_psi(d/dphi, d/dpsi) = sin^2(phi)
        assert se.evaluate(
            forms.curvature_two_forms[0][1].component((0, 1)), pt
        ) == pytest.approx(math.sin(pt["phi"]) ** 2, abs=1e-10)


def test_cartan_coframe_forms_flat_coordinate_frame_trivial():
    conn = con.Connection.zero(R3)
    forms = sf.cartan_coframe_forms(conn, sf.CoFrame.coordinate(R3))
    for row in forms.connection_one_forms:
        for one_form in row:
            assert one_form.comps == {}
    for two_form in forms.torsion_two_forms:
        assert two_form.comps == {}
    for row in forms.curvature_two_forms:
        for two_form in row:
            assert two_form.comps == {}


def test_cartan_torsion_forms_match_torsion_form_builder():
    conn = random_linear_connection(R3, 350)
    frame = sf.CoFrame.coordinate(R3)
    forms = sf.cartan_coframe_forms(conn, frame)
    rng = random.Random(351)
    points = sample_points(R3, rng)
    for a in range(3):
        direct = sf.torsion_form(conn, frame.coframe[a])
        residual = forms.torsion_two_forms[a] - direct
        for pt in points:
            for value in residual.comps.values():
                assert se.evaluate(value, pt) == pytest.approx(0.0, abs=1e-9)


def test_coframe_duality_violation_raises():
    bad = sf.CoFrame(
        R3,
        (R3.basis_field(0), R3.basis_field(0) + R3.basis_field(1), R3.basis_field(2)),
        tuple(R3.basis_covector(i) for i in range(3)),
    )
    conn = con.Connection.zero(R3)
    with pytest.raises(sf.CoFrameError):
        sf.cartan_coframe_forms(conn, bad)


def test_coframe_shape_validation():
    with pytest.raises(sf.CoFrameError):
        sf.CoFrame(R3, (R3.basis_field(0),), tuple(R3.basis_covector(i) for i in range(3)))
    with pytest.raises(sf.CoFrameError):
        sf.CoFrame(
            R3,
            R3.coordinate_frame(),
            (R3.basis_covector(0), R3.basis_covector(1), geo.wedge(R3.basis_covector(0), R3.basis_covector(1))),
        )

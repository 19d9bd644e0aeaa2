import numpy as np
import pytest

from glsm.errors import DimensionMismatch, RankDeficient, SingularMetric, StepUnderflow
from glsm.geometry_engine import (
    AmbientManifold,
    CoordinateField,
    ExpressionField,
    ExpressionMetric,
    Immersion,
    PolynomialField,
    ambient_covariant_derivative,
    christoffel,
    induced_metric,
    lie_bracket,
    pushforward,
)

MINKOWSKI3 = np.diag([-1.0, 1.0, 1.0])
CONE = Immersion(["u1", "u1*cos(u2)", "u1*sin(u2)"], 2, [(0.5, 2.0), (-3.0, 3.0)])
NULL_PLANE = Immersion(["u1", "u2", "u1", "u2"], 2, [(-1.0, 1.0), (-1.0, 1.0)])
PARABOLOID = Immersion(["u1", "u2", "u1^2 + u2^2"], 2, [(-1.0, 1.0), (-1.0, 1.0)])


def test_pushforward_linear_is_constant():
    a = np.array([[1.0, 2.0], [0.0, -1.0], [3.0, 0.5]])
    imm = Immersion.linear(a)
    for u in ([0.0, 0.0], [0.3, -0.7]):
        assert np.allclose(pushforward(imm, u, check=True), a, atol=1e-14)


def test_pushforward_examples():
    assert np.allclose(pushforward(PARABOLOID, [1.0, 2.0]), [[1, 0], [0, 1], [2, 4]], atol=1e-14)
    assert np.allclose(pushforward(CONE, [1.0, np.pi / 2], check=True), [[1, 0], [0, -1], [1, 0]], atol=1e-14)


def test_pushforward_rank_deficient():
    imm = Immersion(["u1", "u1", "0"], 2, [(-1, 1), (-1, 1)])
    with pytest.raises(RankDeficient):
        pushforward(imm, [0.1, 0.1])


def test_immersion_rejects_unknown_chart_variables():
    with pytest.raises(DimensionMismatch):
        Immersion(["u1", "u3"], 2, [(-1, 1), (-1, 1)])


def test_induced_metric_examples():
    amb = AmbientManifold(MINKOWSKI3)
    assert np.allclose(induced_metric(amb, CONE, [1.0, np.pi / 2]).gram, [[0, 0], [0, 1]], atol=1e-14)
    iso = Immersion.linear(np.array([[1.0, 0], [0, 1], [0, 0]]))
    assert np.allclose(induced_metric(AmbientManifold(np.eye(3)), iso, [0.2, 0.4]).gram, np.eye(2))
    split = AmbientManifold(np.diag([1.0, 1.0, -1.0, -1.0]))
    assert np.allclose(induced_metric(split, NULL_PLANE, [0.1, 0.2]).gram, 0.0, atol=1e-14)


def test_degenerate_metric_rejected():
    with pytest.raises(SingularMetric):
        AmbientManifold(np.diag([1.0, 0.0]))


def test_christoffel_flat_is_zero():
    assert not np.any(christoffel(AmbientManifold(MINKOWSKI3), np.array([1.0, 2.0, 3.0])))


def test_christoffel_round_sphere():
    amb = AmbientManifold(ExpressionMetric([["1", "0"], ["0", "sin(x1)^2"]]))
    gamma = christoffel(amb, np.array([np.pi / 4, 0.3]))
    assert gamma[0, 1, 1] == pytest.approx(-0.5, abs=1e-14)
    assert gamma[1, 0, 1] == pytest.approx(1.0, abs=1e-14)
    assert gamma[1, 1, 0] == pytest.approx(1.0, abs=1e-14)


def test_christoffel_exponential_metric():
    amb = AmbientManifold(ExpressionMetric([["exp(2*x1)", "0"], ["0", "1"]]))
    gamma = christoffel(amb, np.array([0.0, 0.0]))
    assert gamma[0, 0, 0] == pytest.approx(1.0, abs=1e-14)
    assert np.count_nonzero(np.abs(gamma) > 1e-14) == 1


def test_covariant_derivative_examples():
    flat = AmbientManifold(np.eye(3))
    ident = Immersion.linear(np.eye(3))
    const = ExpressionField(["1", "2", "0"])
    assert np.allclose(ambient_covariant_derivative(flat, ident, const, const, [0.1, 0.2, 0.3]), 0.0, atol=1e-9)
    u = ExpressionField(["0", "0", "u1"])
    e1 = CoordinateField(0, 3)
    assert np.allclose(ambient_covariant_derivative(flat, ident, e1, u, [0.1, 0.2, 0.3]), [0, 0, 1], atol=1e-9)
    d1 = CoordinateField(0, 2)
    got = ambient_covariant_derivative(flat, PARABOLOID, d1, d1, [0.0, 0.0])
    assert np.allclose(got, [0, 0, 2], atol=1e-9)


def test_covariant_derivative_curved_adds_christoffel_term():
    # identity chart of the exp metric, constant field e1 along e1: nabla = Gamma^1_11 e1 = e1 at x1 = 0
    amb = AmbientManifold(ExpressionMetric([["exp(2*x1)", "0"], ["0", "1"]]))
    ident = Immersion.linear(np.eye(2))
    e1 = CoordinateField(0, 2)
    assert np.allclose(ambient_covariant_derivative(amb, ident, e1, e1, [0.0, 0.0]), [1, 0], atol=1e-9)


def test_stencil_leaving_domain():
    d1 = CoordinateField(0, 2)
    with pytest.raises(StepUnderflow):
        ambient_covariant_derivative(AmbientManifold(np.eye(3)), PARABOLOID, d1, d1, [1.0, 0.0])


def test_lie_bracket_examples():
    c = ExpressionField(["1", "2"])
    assert np.allclose(lie_bracket(c, ExpressionField(["-1", "3"]), [0.3, 0.1]), 0.0)
    assert np.allclose(lie_bracket(CoordinateField(0, 2), ExpressionField(["0", "u1"]), [0.5, 0.5]), [0, 1])
    w, u = ExpressionField(["u2", "0"]), ExpressionField(["0", "u1"])
    assert np.allclose(lie_bracket(w, u, [1.0, 1.0]), [-1, 1])


def test_lie_bracket_antisymmetric_for_polynomial_fields(rng):
    w = PolynomialField.random(3, rng)
    u = PolynomialField.random(3, rng)
    p = rng.uniform(-0.5, 0.5, 3)
    assert np.allclose(lie_bracket(w, u, p), -lie_bracket(u, w, p), atol=1e-14)

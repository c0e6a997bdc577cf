"""Scalar field primitives: exact polynomial calculus, trig eigenfunctions,
weights, and JSON round-trips."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodalab.fields import (
    ConstantWeight,
    FieldError,
    FieldSample,
    GaussianWeight,
    GradientNormField,
    SparsePolynomial,
    WeightedField,
    field_from_json,
    field_to_json,
    make_box_eigenfunction,
    make_torus_eigenfunction,
)

RNG = np.random.default_rng(1234)


def _fd_gradient(field, x, eps=1e-6):
    g = np.zeros(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = eps
        g[i] = (field.value(x + e) - field.value(x - e)) / (2 * eps)
    return g


@st.composite
def small_polynomials(draw, dimension=2, max_degree=4):
    n_terms = draw(st.integers(1, 5))
    terms = {}
    for _ in range(n_terms):
        exps = tuple(
            draw(st.integers(0, max_degree)) for _ in range(dimension)
        )
        coeff = Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 5)))
        terms[exps] = terms.get(exps, Fraction(0)) + coeff
    return SparsePolynomial(dimension, terms)


class TestSparsePolynomial:
    def test_evaluation_matches_manual(self):
        p = SparsePolynomial(2, {(2, 0): Fraction(3), (1, 1): Fraction(-1, 2), (0, 0): Fraction(1)})
        pts = RNG.uniform(-2, 2, size=(50, 2))
        expected = 3 * pts[:, 0] ** 2 - 0.5 * pts[:, 0] * pts[:, 1] + 1
        assert np.allclose(p.value(pts), expected, rtol=1e-14)

    def test_single_point_returns_scalar(self):
        p = SparsePolynomial.coordinate(3, 2)
        assert p.value(np.array([0.0, 0.0, 0.7])) == pytest.approx(0.7)

    def test_gradient_hessian_laplacian_consistency(self):
        p = SparsePolynomial(
            3, {(3, 0, 0): Fraction(1), (1, 2, 0): Fraction(2), (0, 0, 4): Fraction(-1)}
        )
        pts = RNG.uniform(-1, 1, size=(20, 3))
        hess = p.hessian(pts)
        assert np.allclose(np.trace(hess, axis1=1, axis2=2), p.laplacian(pts), rtol=1e-12)
        for x in pts[:5]:
            assert np.allclose(p.gradient(x), _fd_gradient(p, x), atol=1e-6)

    @given(small_polynomials())
    @settings(max_examples=40, deadline=None)
    def test_partials_commute_exactly(self, p):
        assert p.diff(0).diff(1).terms == p.diff(1).diff(0).terms

    @given(small_polynomials())
    @settings(max_examples=40, deadline=None)
    def test_laplacian_poly_matches_evaluated_laplacian(self, p):
        pts = RNG.uniform(-1, 1, size=(8, 2))
        assert np.allclose(p.laplacian_poly().value(pts), p.laplacian(pts), rtol=1e-12, atol=1e-12)

    @given(small_polynomials(), small_polynomials())
    @settings(max_examples=30, deadline=None)
    def test_ring_operations_match_pointwise(self, p, q):
        pts = RNG.uniform(-1, 1, size=(6, 2))
        assert np.allclose((p + q).value(pts), p.value(pts) + q.value(pts), atol=1e-9)
        assert np.allclose((p * q).value(pts), p.value(pts) * q.value(pts), atol=1e-9)

    def test_differentiation_keeps_fractions_exact(self):
        p = SparsePolynomial(2, {(3, 2): Fraction(1, 3)})
        d = p.diff(0)
        assert d.terms == {(2, 2): Fraction(1)}
        assert all(isinstance(c, Fraction) for c in d.terms.values())
        lap = p.laplacian_poly()
        assert all(isinstance(c, Fraction) for c in lap.terms.values())

    def test_homogeneous_degree(self):
        assert SparsePolynomial.radius_squared(3).homogeneous_degree() == 2
        mixed = SparsePolynomial(2, {(1, 0): 1, (2, 0): 1})
        assert mixed.homogeneous_degree() is None

    def test_invalid_terms_rejected(self):
        with pytest.raises(FieldError):
            SparsePolynomial(2, {(1,): Fraction(1)})
        with pytest.raises(FieldError):
            SparsePolynomial(2, {(-1, 0): Fraction(1)})


class TestTrigEigenfunctions:
    def test_torus_value_and_eigenvalue(self):
        f = make_torus_eigenfunction([((1, 0), 0.0, 1.0)])
        x = np.array([0.3, 0.9])
        assert f.value(x) == pytest.approx(math.sin(2 * math.pi * 0.3), rel=1e-14)
        assert f.laplacian(x) == pytest.approx(-4 * math.pi**2 * f.value(x), rel=1e-12)

    def test_torus_multimode_eigenvalue_relation(self):
        f = make_torus_eigenfunction([((2, 1), 0.3, 1.0), ((1, 2), 0.0, -0.5)])
        pts = RNG.uniform(0, 1, size=(30, 2))
        assert np.allclose(f.laplacian(pts), -4 * math.pi**2 * 5 * f.value(pts), rtol=1e-12)

    def test_torus_periodicity(self):
        f = make_torus_eigenfunction([((2, 3), 0.1, 1.0)])
        pts = RNG.uniform(0, 1, size=(10, 2))
        assert np.allclose(f.value(pts), f.value(pts + [1.0, 2.0]), rtol=1e-10, atol=1e-12)

    def test_box_dirichlet_vanishes_on_boundary(self):
        f = make_box_eigenfunction((2, 1), "dirichlet")
        ys = RNG.uniform(0, 1, 20)
        edge = np.stack([np.zeros(20), ys], axis=1)
        assert np.allclose(f.value(edge), 0.0, atol=1e-14)
        edge2 = np.stack([ys, np.ones(20)], axis=1)
        assert np.allclose(f.value(edge2), 0.0, atol=1e-14)

    def test_box_neumann_normal_derivative_vanishes(self):
        f = make_box_eigenfunction((1, 2), "neumann")
        ys = RNG.uniform(0, 1, 20)
        edge = np.stack([np.zeros(20), ys], axis=1)
        assert np.allclose(f.gradient(edge)[:, 0], 0.0, atol=1e-12)

    def test_box_eigenvalue(self):
        f = make_box_eigenfunction((1, 1), "dirichlet")
        pts = RNG.uniform(0.1, 0.9, size=(20, 2))
        assert np.allclose(f.laplacian(pts), -2 * math.pi**2 * f.value(pts), rtol=1e-12)

    def test_gradient_matches_finite_differences(self):
        f = make_box_eigenfunction((2, 1), "neumann")
        for x in RNG.uniform(0.1, 0.9, size=(5, 2)):
            assert np.allclose(f.gradient(x), _fd_gradient(f, x), atol=1e-6)


class TestWeightsAndComposites:
    def test_gradient_norm_field_value(self):
        p = SparsePolynomial(2, {(2, 0): Fraction(1), (0, 2): Fraction(1)})
        g = GradientNormField(p)
        x = np.array([0.3, 0.4])
        assert g.value(x) == pytest.approx(1.0)  # 2 * |x| = 1
        assert np.allclose(g.gradient(x), _fd_gradient(g, x), atol=1e-6)

    def test_gaussian_weight_positive_and_log_gradient(self):
        w = GaussianWeight(2)
        pts = RNG.uniform(-3, 3, size=(40, 2))
        vals = w.value(pts)
        assert np.all(vals > 0)
        # grad log rho = -x for the standard Gaussian weight
        assert np.allclose(w.gradient(pts) / vals[:, None], -pts, rtol=1e-10)

    def test_weighted_laplacian_identity(self):
        base = SparsePolynomial(2, {(2, 0): Fraction(1), (0, 0): Fraction(-1)})
        f = WeightedField(base, GaussianWeight(2))
        pts = RNG.uniform(-2, 2, size=(30, 2))
        expected = base.laplacian(pts) - np.einsum("ni,ni->n", pts, base.gradient(pts))
        assert np.allclose(f.weighted_laplacian(pts), expected, rtol=1e-10, atol=1e-12)

    def test_constant_weight(self):
        w = ConstantWeight(3, 2.5)
        pts = RNG.uniform(-1, 1, size=(7, 3))
        assert np.allclose(w.value(pts), 2.5)
        assert np.allclose(w.gradient(pts), 0.0)

    def test_field_sample_validates_trace(self):
        with pytest.raises(FieldError):
            FieldSample(
                point=np.zeros(2),
                value=0.0,
                gradient=np.zeros(2),
                hessian=np.eye(2),
                laplacian=5.0,
            )


class TestJsonRoundTrip:
    @pytest.mark.parametrize(
        "field",
        [
            SparsePolynomial(2, {(2, 0): Fraction(1, 3), (0, 1): Fraction(-2)}),
            SparsePolynomial(3, {(1, 1, 1): 0.25}),
            make_torus_eigenfunction([((1, 0), 0.0, 1.0), ((0, 1), 0.5, -1.5)]),
            make_box_eigenfunction((2, 1), "dirichlet"),
            make_box_eigenfunction((1, 3), "neumann"),
            GaussianWeight(2),
            ConstantWeight(3, 1.5),
            WeightedField(
                SparsePolynomial(2, {(2, 0): Fraction(1), (0, 0): Fraction(-1)}),
                GaussianWeight(2),
            ),
        ],
    )
    def test_round_trip_preserves_values(self, field):
        clone = field_from_json(field_to_json(field))
        pts = RNG.uniform(-0.9, 0.9, size=(25, field.dimension))
        assert np.allclose(clone.value(pts), field.value(pts), rtol=1e-14, atol=1e-14)
        assert np.allclose(clone.gradient(pts), field.gradient(pts), rtol=1e-12, atol=1e-14)

    def test_fraction_coefficients_survive(self):
        p = SparsePolynomial(2, {(3, 1): Fraction(22, 7)})
        clone = field_from_json(field_to_json(p))
        assert clone.terms == p.terms
        assert isinstance(next(iter(clone.terms.values())), Fraction)

    def test_unknown_kind_rejected(self):
        with pytest.raises(FieldError):
            field_from_json({"kind": "mystery"})

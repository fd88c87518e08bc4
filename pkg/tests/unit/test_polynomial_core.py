"""Unit tests for the Duistermaat-Heckman density polynomials and their identities."""

import pytest
import sympy as sp

from dfinvariant.core.polynomial_core import (
    PolyVectorField,
    centered_field,
    constant,
    coordinates,
    directional_derivative,
    divergence,
    divergence_identity_holds,
    evaluate,
    field_pairing,
    grad_h_top,
    h_sub,
    h_top,
    homogeneous_part,
    is_homogeneous_of_degree,
    linear_form,
    position,
    verify_density_identities,
    weyl_dimension_squared,
)
from dfinvariant.core.root_system import build_root_system, weyl_group
from dfinvariant.errors import DimensionMismatch

R = sp.Rational
PRESETS = ["torus-2", "A1", "A2", "B2", "G2"]


def poly(expr, n):
    return sp.Poly(expr, *coordinates(n), domain=sp.QQ)


class TestBuilders:
    def test_linear_form(self):
        """covector . x + offset."""
        x1, x2 = coordinates(2)
        assert linear_form([2, -1], 2, 3) == poly(2 * x1 - x2 + 3, 2)

    def test_evaluate_exact(self):
        """Evaluation at rational points stays rational."""
        x1, x2 = coordinates(2)
        assert evaluate(poly(x1**2 + x2 / 3, 2), (R(1, 2), 1)) == R(7, 12)

    def test_evaluate_zero(self):
        """The zero polynomial evaluates to 0."""
        assert evaluate(constant(0, 2), (5, 7)) == 0

    def test_homogeneous_part(self):
        """Terms of a given total degree are extracted."""
        x1, x2 = coordinates(2)
        p = poly(x1**2 + 3 * x1 * x2 + x1 + 5, 2)
        assert homogeneous_part(p, 2) == poly(x1**2 + 3 * x1 * x2, 2)
        assert homogeneous_part(p, 3).is_zero

    def test_directional_derivative(self):
        """sum_j v_j dp/dx_j."""
        x1, x2 = coordinates(2)
        p = poly(x1**2 * x2, 2)
        assert directional_derivative(p, (1, 2)) == poly(2 * x1 * x2 + 2 * x1**2, 2)

    def test_directional_derivative_length(self):
        """A direction of the wrong length raises."""
        with pytest.raises(DimensionMismatch):
            directional_derivative(constant(1, 2), (1,))

    def test_divergence(self):
        """div (x1^2, x1 x2) = 3 x1."""
        x1, x2 = coordinates(2)
        field = PolyVectorField((poly(x1**2, 2), poly(x1 * x2, 2)))
        assert divergence(field) == poly(3 * x1, 2)

    def test_empty_field(self):
        """A vector field needs components."""
        with pytest.raises(DimensionMismatch):
            PolyVectorField(())


class TestDensity:
    def test_a1_closed_form(self, a1):
        """A1: H_d = 4x^2, H_{d-1} = 4x."""
        (x,) = coordinates(1)
        assert h_top(a1) == poly(4 * x**2, 1)
        assert h_sub(a1) == poly(4 * x, 1)

    def test_torus(self, torus2):
        """No roots: H_d = 1 and H_{d-1} = 0."""
        assert h_top(torus2) == constant(1, 2)
        assert h_sub(torus2).is_zero

    @pytest.mark.parametrize("name", PRESETS)
    def test_normalised_at_rho(self, name):
        """H_d(rho) = 1 and H_{d-1}(rho) = 2r."""
        rs = build_root_system(name)
        assert evaluate(h_top(rs), rs.rho) == 1
        assert evaluate(h_sub(rs), rs.rho) == 2 * rs.r

    @pytest.mark.parametrize("name", ["A1", "A2", "B2", "G2"])
    def test_degrees(self, name):
        """H_d is homogeneous of degree 2r, H_{d-1} of degree 2r - 1."""
        rs = build_root_system(name)
        assert is_homogeneous_of_degree(h_top(rs), rs.d)
        assert is_homogeneous_of_degree(h_sub(rs), rs.d - 1)

    @pytest.mark.parametrize("name", ["A2", "B2", "G2"])
    def test_weyl_invariant(self, name):
        """H_d(w x) == H_d(x) as polynomials for every w in W."""
        rs = build_root_system(name)
        top = h_top(rs)
        xs = sp.Matrix(coordinates(rs.n))
        for w in weyl_group(rs).elements:
            image = dict(zip(xs, w * xs))
            assert poly(top.as_expr().xreplace(image), rs.n) == top

    def test_a2_vanishes_on_walls(self, a2):
        """H_d contains the square of every wall form."""
        top = h_top(a2)
        assert evaluate(top, (1, 2)) == 0
        assert evaluate(top, (2, 1)) == 0


class TestIdentities:
    @pytest.mark.parametrize("name", PRESETS)
    def test_gradient_along_rho(self, name):
        """<grad H_d, rho> = H_{d-1}."""
        rs = build_root_system(name)
        assert field_pairing(rs, grad_h_top(rs), rs.rho) == h_sub(rs)

    @pytest.mark.parametrize("name", PRESETS)
    def test_euler(self, name):
        """<grad H_d, x> = 2r H_d."""
        rs = build_root_system(name)
        assert field_pairing(rs, grad_h_top(rs), position(rs.n)) == h_top(rs).mul_ground(2 * rs.r)

    @pytest.mark.parametrize("name", PRESETS)
    def test_divergence_identity(self, name):
        """The divergence identity holds for 1 and each coordinate."""
        rs = build_root_system(name)
        for f in (constant(1, rs.n), *position(rs.n)):
            assert divergence_identity_holds(rs, f)

    def test_divergence_identity_quadratic(self, a2):
        """The identity holds for non-affine f too."""
        x1, x2 = coordinates(2)
        assert divergence_identity_holds(a2, poly(x1**2 - 3 * x1 * x2 + R(1, 2), 2))

    def test_gradient_pairing_is_directional_derivative(self, a2):
        """Pairing the root-sum gradient with v equals the derivative along v."""
        v = (R(3), R(-2, 5))
        assert field_pairing(a2, grad_h_top(a2), v) == directional_derivative(h_top(a2), v)

    @pytest.mark.parametrize("name", PRESETS)
    def test_weyl_dimension_parts(self, name):
        """Top two homogeneous parts of the squared dimension formula are H_d and H_{d-1}."""
        rs = build_root_system(name)
        expanded = weyl_dimension_squared(rs)
        assert homogeneous_part(expanded, rs.d) == h_top(rs)
        if rs.d:
            assert homogeneous_part(expanded, rs.d - 1) == h_sub(rs)

    def test_a1_dimension_formula(self, a1):
        """dim E_x squared for A1 is (2x + 1)^2."""
        (x,) = coordinates(1)
        assert weyl_dimension_squared(a1) == poly((2 * x + 1) ** 2, 1)

    @pytest.mark.parametrize("name", PRESETS)
    def test_report_all_passed(self, name):
        """verify_density_identities reports every check as passing."""
        report = verify_density_identities(build_root_system(name))
        assert report.all_passed
        assert report.root_system == name

    def test_centered_field(self, a1):
        """(x - 2 rho) * weight for A1 is (x - 1) * weight."""
        (x,) = coordinates(1)
        field = centered_field(a1, poly(x, 1))
        assert field.components == (poly(x**2 - x, 1),)

"""Exact polynomials for the Duistermaat-Heckman density.

Polynomials are sympy ``Poly`` objects over QQ in the coordinates x1..xn.
Gradients are never materialised through the inverse gram: every <grad g, v>
is the directional derivative sum_j v_j dg/dx_j, which does not depend on the
metric. The gram matrix only enters through H_d, H_{d-1}, rho and c.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import numpy as np
import sympy as sp

from dfinvariant import config
from dfinvariant.core.root_system import RootSystem, pairing
from dfinvariant.errors import DimensionMismatch
from dfinvariant.models.df_models import IdentityReport

logger = logging.getLogger(__name__)


@lru_cache(maxsize=8)
def coordinates(n: int) -> tuple[sp.Symbol, ...]:
    return sp.symbols(f"x1:{n + 1}")


def constant(value: Any, n: int) -> sp.Poly:
    return sp.Poly(sp.Rational(value), *coordinates(n), domain=sp.QQ)


def linear_form(covector: Sequence[Any], n: int, offset: Any = 0) -> sp.Poly:
    """covector . x + offset as a polynomial."""
    xs = coordinates(n)
    expr = sp.Rational(offset) + sum(sp.Rational(a) * x for a, x in zip(covector, xs))
    return sp.Poly(expr, *xs, domain=sp.QQ)


def position(n: int) -> tuple[sp.Poly, ...]:
    """The coordinate functions (x1, ..., xn)."""
    return tuple(sp.Poly(x, *coordinates(n), domain=sp.QQ) for x in coordinates(n))


def evaluate(p: sp.Poly, point: Sequence[Any]) -> sp.Rational:
    if p.is_zero:
        return sp.Integer(0)
    return sp.Rational(p.as_expr().subs(dict(zip(p.gens, point)), simultaneous=True))


def is_homogeneous_of_degree(p: sp.Poly, degree: int) -> bool:
    if p.is_zero:
        return True
    return all(sum(m) == degree for m in p.monoms())


def homogeneous_part(p: sp.Poly, degree: int) -> sp.Poly:
    """Sum of the terms of total degree ``degree`` (zero if there are none)."""
    terms = {m: c for m, c in p.terms() if sum(m) == degree}
    if not terms:
        return sp.Poly(0, *p.gens, domain=sp.QQ)
    return sp.Poly.from_dict(terms, *p.gens, domain=sp.QQ)


@dataclass(frozen=True)
class PolyVectorField:
    components: tuple[sp.Poly, ...]

    def __post_init__(self):
        if not self.components:
            raise DimensionMismatch("a vector field needs at least one component")

    @property
    def n(self) -> int:
        return len(self.components)

    def scale(self, p: sp.Poly) -> "PolyVectorField":
        return PolyVectorField(tuple(c * p for c in self.components))


def _root_forms(rs: RootSystem) -> list[sp.Poly]:
    """<alpha_i, x> for every positive root."""
    return [linear_form(rs.covector(alpha), rs.n) for alpha in rs.positive_roots]


def _product(polys: Sequence[sp.Poly], n: int) -> sp.Poly:
    result = constant(1, n)
    for p in polys:
        result = result * p
    return result


@lru_cache(maxsize=32)
def h_top(rs: RootSystem) -> sp.Poly:
    """H_d(x) = (1/c) prod_i <alpha_i, x>^2, homogeneous of degree 2r."""
    squares = [form**2 for form in _root_forms(rs)]
    return _product(squares, rs.n).mul_ground(1 / rs.c)


@lru_cache(maxsize=32)
def h_sub(rs: RootSystem) -> sp.Poly:
    """H_{d-1}(x) = (1/c) sum_j 2 <alpha_j, x><alpha_j, rho> prod_{i != j} <alpha_i, x>^2."""
    forms = _root_forms(rs)
    total = constant(0, rs.n)
    for j, alpha in enumerate(rs.positive_roots):
        others = [f**2 for i, f in enumerate(forms) if i != j]
        weight = 2 * pairing(rs, alpha, rs.rho)
        total = total + (forms[j] * _product(others, rs.n)).mul_ground(weight)
    return total.mul_ground(1 / rs.c)


def grad_h_top(rs: RootSystem) -> PolyVectorField:
    """Root-sum form of grad H_d, i.e. sum_i (2/c)<alpha_i,x> prod_{k != i}<alpha_k,x>^2 alpha_i.

    Pairing it with v through the gram matrix gives the derivative of H_d along v.
    """
    forms = _root_forms(rs)
    components = [constant(0, rs.n) for _ in range(rs.n)]
    for i, alpha in enumerate(rs.positive_roots):
        others = [f**2 for k, f in enumerate(forms) if k != i]
        coeff = (forms[i] * _product(others, rs.n)).mul_ground(2 / rs.c)
        for j in range(rs.n):
            if alpha[j]:
                components[j] = components[j] + coeff.mul_ground(alpha[j])
    return PolyVectorField(tuple(components))


def field_pairing(rs: RootSystem, field: PolyVectorField, other: Sequence[Any]) -> sp.Poly:
    """<field, other> through the gram matrix; ``other`` holds numbers or polynomials."""
    if field.n != rs.n or len(other) != rs.n:
        raise DimensionMismatch(f"field_pairing expects length {rs.n}")
    other = [w if isinstance(w, sp.Poly) else constant(w, rs.n) for w in other]
    total = constant(0, rs.n)
    for j in range(rs.n):
        for k in range(rs.n):
            g = rs.gram[j][k]
            if g:
                total = total + (field.components[j] * other[k]).mul_ground(g)
    return total


def directional_derivative(p: sp.Poly, v: Sequence[Any]) -> sp.Poly:
    """sum_j v_j dp/dx_j."""
    if len(v) != len(p.gens):
        raise DimensionMismatch(f"direction has length {len(v)}, polynomial has {len(p.gens)} variables")
    total = sp.Poly(0, *p.gens, domain=sp.QQ)
    for gen, vj in zip(p.gens, v):
        if isinstance(vj, sp.Poly):
            total = total + p.diff(gen) * vj
        elif vj:
            total = total + p.diff(gen).mul_ground(sp.Rational(vj))
    return total


def divergence(field: PolyVectorField) -> sp.Poly:
    """sum_j dV_j/dx_j."""
    gens = field.components[0].gens
    total = sp.Poly(0, *gens, domain=sp.QQ)
    for gen, component in zip(gens, field.components):
        total = total + component.diff(gen)
    return total


def centered_field(rs: RootSystem, weight: sp.Poly) -> PolyVectorField:
    """(x - 2 rho) * weight."""
    shifted = [linear_form([1 if k == j else 0 for k in range(rs.n)], rs.n, -rs.two_rho[j]) for j in range(rs.n)]
    return PolyVectorField(tuple(s * weight for s in shifted))


def weyl_dimension_squared(rs: RootSystem) -> sp.Poly:
    """(prod <alpha_i, x + rho> / prod <alpha_i, rho>)^2, fully expanded."""
    numerator = constant(1, rs.n)
    denominator = sp.Integer(1)
    for alpha in rs.positive_roots:
        numerator = numerator * linear_form(rs.covector(alpha), rs.n, pairing(rs, alpha, rs.rho))
        denominator *= pairing(rs, alpha, rs.rho)
    return (numerator**2).mul_ground(1 / denominator**2)


def _affine_family(rs: RootSystem, seed: int) -> list[sp.Poly]:
    """1, the coordinates, and one random rational affine function."""
    rng = np.random.Generator(np.random.Philox(seed))
    family = [constant(1, rs.n), *position(rs.n)]
    numerators = rng.integers(-9, 10, size=rs.n + 1)
    denominators = rng.integers(1, 8, size=rs.n + 1)
    covector = [sp.Rational(int(p), int(q)) for p, q in zip(numerators, denominators)]
    family.append(linear_form(covector[:-1], rs.n, covector[-1]))
    return family


def divergence_identity_holds(rs: RootSystem, f: sp.Poly) -> bool:
    """div((x - 2rho) f H_d) == <grad f, x - 2rho> H_d + (2r+n) f H_d - 2 f H_{d-1}."""
    top, sub = h_top(rs), h_sub(rs)
    lhs = divergence(centered_field(rs, f * top))
    shifted = [x - t for x, t in zip(position(rs.n), rs.two_rho)]
    rhs = (
        directional_derivative(f, shifted) * top
        + (f * top).mul_ground(2 * rs.r + rs.n)
        - (f * sub).mul_ground(2)
    )
    return lhs == rhs


def verify_density_identities(rs: RootSystem, seed: int | None = None) -> IdentityReport:
    """Check the gradient identities as exact polynomial equalities; failures are reported."""
    seed = config.IDENTITY_SEED if seed is None else seed
    top, sub = h_top(rs), h_sub(rs)
    grad = grad_h_top(rs)

    gradient_rho = field_pairing(rs, grad, rs.rho) == sub
    euler = field_pairing(rs, grad, position(rs.n)) == top.mul_ground(2 * rs.r)
    divergence_ok = all(divergence_identity_holds(rs, f) for f in _affine_family(rs, seed))

    expanded = weyl_dimension_squared(rs)
    dimension_ok = (
        homogeneous_part(expanded, rs.d) == top
        and (homogeneous_part(expanded, rs.d - 1) == sub if rs.d else sub.is_zero)
    )

    report = IdentityReport(
        root_system=rs.name,
        gradient_along_rho=gradient_rho,
        euler_identity=euler,
        divergence_identity=divergence_ok,
        top_at_rho_is_one=evaluate(top, rs.rho) == 1,
        sub_at_rho_is_2r=evaluate(sub, rs.rho) == 2 * rs.r,
        homogeneity=is_homogeneous_of_degree(top, rs.d)
        and (sub.is_zero or is_homogeneous_of_degree(sub, rs.d - 1)),
        weyl_dimension_consistent=dimension_ok,
    )
    if not report.all_passed:
        logger.warning("Identity check failed for %s: %s", rs.name, report.model_dump())
    return report


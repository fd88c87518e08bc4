"""Donaldson-Futaki invariant of a W-invariant polytope and a PL test function.

Two routes to the same number:

* the general formula, valid for any convex rational W-invariant PL f,
      -F_1(f) = (boundary + 2 * sub - a * top) / (2 * Vol_DH)
  with boundary = int_{dP+} f H_d dsigma, sub = int_{P+} f H_{d-1} dmu and
  top = int_{P+} f H_d dmu;
* the Fano shortcut, valid when every outer facet of P+ sits at lattice
  distance one from 2 rho and f is affine on P+,
      -F_1(f) = 1/2 * <bar_DH(P+) - 2 rho, grad f>.

df_report runs both and compares them exactly.
"""

import logging
from typing import Any

import sympy as sp

from dfinvariant.core.polynomial_core import (
    centered_field,
    divergence,
    h_sub,
    h_top,
    linear_form,
    position,
    verify_density_identities,
)
from dfinvariant.core.polytope_lab import (
    AffinePiece,
    HPolytope,
    PLFunction,
    check_fano,
    classify_facets,
    dot,
    facets,
    is_weyl_invariant,
    pl_is_weyl_invariant,
    pl_restrict_affine,
    positive_part,
    refine_by_pl,
)
from dfinvariant.core.quadrature import (
    integrate_boundary,
    integrate_facet_sigma,
    integrate_polytope,
    mc_boundary_estimate,
    mc_estimate,
    outward_flux,
)
from dfinvariant.core.root_system import RootSystem, Vector, weyl_group
from dfinvariant.errors import (
    DimensionMismatch,
    NotAffineOnPositivePart,
    NotFano,
    NotWeylInvariantFunction,
    NotWeylInvariantPolytope,
)
from dfinvariant.models.df_models import DFReport, MonteCarloEstimate, TheoremIntegrals

logger = logging.getLogger(__name__)


# ── Duistermaat-Heckman data ──────────────────────────────────────────

def dh_volume(Pplus: HPolytope, rs: RootSystem) -> sp.Rational:
    return integrate_polytope(h_top(rs), Pplus)


def dh_barycenter(Pplus: HPolytope, rs: RootSystem) -> Vector:
    top = h_top(rs)
    vol = dh_volume(Pplus, rs)
    return tuple(integrate_polytope(x * top, Pplus) / vol for x in position(rs.n))


def constant_a(Pplus: HPolytope, rs: RootSystem) -> sp.Rational:
    """(int_{dP+} H_d dsigma + 2 int_{P+} H_{d-1} dmu) / int_{P+} H_d dmu."""
    boundary = integrate_boundary(h_top(rs), facets(Pplus))
    sub = integrate_polytope(h_sub(rs), Pplus)
    a = (boundary + 2 * sub) / dh_volume(Pplus, rs)
    logger.info("a = %s for %s (2r+n = %d)", a, rs.name, 2 * rs.r + rs.n)
    return a


def theorem_integrals(Pplus: HPolytope, rs: RootSystem, f: PLFunction) -> TheoremIntegrals:
    """The three f-weighted integrals of the general formula, cell by cell."""
    top, sub = h_top(rs), h_sub(rs)
    on_boundary = set(Pplus.constraints)
    boundary = sub_total = top_total = sp.Integer(0)

    cells = refine_by_pl(Pplus, f)
    logger.info("f splits P+ into %d cell(s)", len(cells))
    for cell, piece in cells:
        weight = linear_form(piece.b, rs.n, piece.k)
        sub_total += integrate_polytope(weight * sub, cell)
        top_total += integrate_polytope(weight * top, cell)
        for facet in facets(cell):
            if facet.constraint in on_boundary:
                boundary += integrate_facet_sigma(weight * top, facet)

    return TheoremIntegrals(
        boundary=boundary,
        sub=sub_total,
        top=top_total,
        volume=dh_volume(Pplus, rs),
    )


def _combine(integrals: TheoremIntegrals, a: sp.Rational) -> sp.Rational:
    return (integrals.boundary + 2 * integrals.sub - a * integrals.top) / (2 * integrals.volume)


# ── Preconditions ─────────────────────────────────────────────────────

def _checked_positive_part(
    P: HPolytope, rs: RootSystem, f: PLFunction | None, allow_non_invariant_f: bool
) -> tuple[HPolytope, bool]:
    """P+ after the invariance checks; the flag says whether f passed its check."""
    if P.n != rs.n:
        raise DimensionMismatch(f"polytope lives in R^{P.n}, root system has rank {rs.n}", field="polytope")
    group = weyl_group(rs)
    if not is_weyl_invariant(P, group):
        raise NotWeylInvariantPolytope(f"P is not stable under W({rs.name})", field="polytope")

    invariant = True
    if f is not None:
        if f.n != rs.n:
            raise DimensionMismatch(f"function pieces have length {f.n}, expected {rs.n}", field="function")
        invariant = pl_is_weyl_invariant(f, P, group)
        if not invariant:
            if not allow_non_invariant_f:
                raise NotWeylInvariantFunction(f"f is not W({rs.name})-invariant on P", field="function")
            logger.warning("f is not W-invariant; proceeding because the override is set")

    Pplus = positive_part(P, rs)
    classify_facets(Pplus, rs)
    return Pplus, invariant


# ── The two formulas ──────────────────────────────────────────────────

def df_general(P: HPolytope, rs: RootSystem, f: PLFunction, allow_non_invariant_f: bool = False) -> sp.Rational:
    """-F_1(f) from the general integral formula."""
    Pplus, _ = _checked_positive_part(P, rs, f, allow_non_invariant_f)
    value = _combine(theorem_integrals(Pplus, rs, f), constant_a(Pplus, rs))
    logger.info("df_general = %s", value)
    return value


def _affine_value(Pplus: HPolytope, rs: RootSystem, piece: AffinePiece) -> sp.Rational:
    bar = dh_barycenter(Pplus, rs)
    return dot(piece.b, [x - t for x, t in zip(bar, rs.two_rho)]) / 2


def df_fano_affine(P: HPolytope, rs: RootSystem, f: PLFunction) -> sp.Rational:
    """-F_1(f) = 1/2 b . (bar_DH - 2 rho), for Fano P and f = b . x + k on P+."""
    report = check_fano(P, rs)
    if not report.fano:
        bad = ", ".join(f"{facet.normal} . x >= {facet.offset}" for facet in report.offending)
        raise NotFano(f"outer facets not at distance one from 2rho: {bad}", field="polytope")
    Pplus = positive_part(P, rs)
    piece = pl_restrict_affine(f, Pplus)
    if piece is None:
        raise NotAffineOnPositivePart("f has no single affine piece on all of P+", field="function")
    return _affine_value(Pplus, rs, piece)


def divergence_balance(rs: RootSystem, Pplus: HPolytope, f: sp.Poly) -> tuple[sp.Rational, sp.Rational]:
    """(int div V dmu, sum of outward fluxes) for V = (x - 2rho) f H_d; the two must agree."""
    V = centered_field(rs, f * h_top(rs))
    inside = integrate_polytope(divergence(V), Pplus)
    through = sum((outward_flux(V, F) for F in facets(Pplus)), sp.Integer(0))
    return inside, through


# ── Report ────────────────────────────────────────────────────────────

def monte_carlo_check(
    Pplus: HPolytope,
    rs: RootSystem,
    f: PLFunction | None,
    integrals: TheoremIntegrals | None = None,
    samples: int | None = None,
    seed: int | None = None,
) -> list[MonteCarloEstimate]:
    """Floating point corroboration of Vol_DH and the three f-weighted integrals."""
    top = h_top(rs)
    estimates = [mc_estimate(top, Pplus, samples, seed, quantity="vol_dh", exact=dh_volume(Pplus, rs))]
    if f is not None:
        integrals = integrals or theorem_integrals(Pplus, rs, f)
        estimates.append(
            mc_estimate(h_sub(rs), Pplus, samples, seed, weight=f, quantity="int_f_h_sub", exact=integrals.sub)
        )
        estimates.append(
            mc_estimate(top, Pplus, samples, seed, weight=f, quantity="int_f_h_top", exact=integrals.top)
        )
        estimates.append(
            mc_boundary_estimate(
                top, facets(Pplus), samples, seed, weight=f, quantity="int_f_h_top_boundary", exact=integrals.boundary
            )
        )
    return estimates


def df_report(
    P: HPolytope,
    rs: RootSystem,
    f: PLFunction,
    allow_non_invariant_f: bool = False,
    mc_samples: int | None = None,
    mc_seed: int | None = None,
    with_monte_carlo: bool = False,
) -> DFReport:
    Pplus, invariant = _checked_positive_part(P, rs, f, allow_non_invariant_f)
    fano = check_fano(P, rs).fano

    integrals = theorem_integrals(Pplus, rs, f)
    a = constant_a(Pplus, rs)
    general = _combine(integrals, a)
    bar = dh_barycenter(Pplus, rs)
    if fano and a != 2 * rs.r + rs.n:
        logger.warning("Fano polytope but a = %s differs from 2r+n = %d", a, 2 * rs.r + rs.n)

    affine: Any = None
    piece = pl_restrict_affine(f, Pplus) if fano else None
    if piece is not None:
        affine = _affine_value(Pplus, rs, piece)
        cross_check = "equal" if affine == general else "mismatch"
        if cross_check == "mismatch":
            logger.warning("Cross-check mismatch: general %s, affine %s", general, affine)
    else:
        cross_check = "not-applicable"

    report = DFReport(
        fano=fano,
        r=rs.r,
        n=rs.n,
        d=rs.d,
        a=a,
        vol_dh=integrals.volume,
        bar_dh=list(bar),
        two_rho=list(rs.two_rho),
        df_general=general,
        df_affine=affine,
        affine_piece=list(piece.b) if piece is not None else None,
        cross_check=cross_check,
        identities_ok=verify_density_identities(rs).all_passed,
        function_invariant=invariant,
        invariance_override=not invariant,
        integrals=integrals,
    )
    if with_monte_carlo:
        report.monte_carlo = monte_carlo_check(Pplus, rs, f, integrals, mc_samples, mc_seed)
    logger.info("DF report for %s: df_general=%s cross_check=%s", rs.name, general, cross_check)
    return report

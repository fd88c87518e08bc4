"""Exact integration of polynomials over polytopes and their facets.

Volume integrals (dmu) are Lebesgue in the chosen coordinates. Facet
integrals (dsigma) use the measure with dsigma ^ dl = dmu against the facet's
primitive defining form l = normal . x, which is rational on lattice facets.
The Monte-Carlo estimator is the only floating point code in the engine.
"""

import logging
import math
from collections.abc import Sequence
from functools import lru_cache
from typing import Any, Literal

import numpy as np
import sympy as sp

from dfinvariant import config
from dfinvariant.core.polynomial_core import PolyVectorField, evaluate
from dfinvariant.core.polytope_lab import (
    Facet,
    HPolytope,
    PLFunction,
    SimplexT,
    facets,
    triangulate,
    triangulate_points,
    vertices,
)
from dfinvariant.core.root_system import Vector
from dfinvariant.errors import DimensionMismatch, ZeroNormal
from dfinvariant.models.df_models import MonteCarloEstimate

logger = logging.getLogger(__name__)

Measure = Literal["volume", "boundary"]


@lru_cache(maxsize=256)
def _factorial(k: int) -> int:
    return math.factorial(k)


def _monomial_integral(exponents: Sequence[int]) -> sp.Rational:
    """Integral of y^gamma over the standard simplex {y >= 0, sum y <= 1}."""
    numerator = math.prod(_factorial(g) for g in exponents)
    return sp.Rational(numerator, _factorial(sum(exponents) + len(exponents)))


def _pullback_integral(p: sp.Poly, verts: Sequence[Vector], jacobian: sp.Rational) -> sp.Rational:
    """Integrate p over the simplex spanned by ``verts`` (any dimension k <= n)."""
    k = len(verts) - 1
    if k == 0:
        return evaluate(p, verts[0]) * jacobian
    ys = sp.symbols(f"y1:{k + 1}")
    base = verts[0]
    edges = [tuple(v[j] - base[j] for j in range(len(base))) for v in verts[1:]]
    substitution = {
        x: base[j] + sum((e[j] * y for e, y in zip(edges, ys)), sp.Integer(0))
        for j, x in enumerate(p.gens)
    }
    pulled = sp.Poly(p.as_expr().xreplace(substitution), *ys, domain=sp.QQ)
    total = sum((coeff * _monomial_integral(m) for m, coeff in pulled.terms()), sp.Integer(0))
    return sp.Rational(total) * jacobian


def integrate_simplex(p: sp.Poly, S: SimplexT) -> sp.Rational:
    if len(p.gens) != len(S.vertices[0]):
        raise DimensionMismatch(
            f"polynomial in {len(p.gens)} variables, simplex in R^{len(S.vertices[0])}"
        )
    return _pullback_integral(p, S.vertices, abs(S.determinant))


def integrate_polytope(p: sp.Poly, P: HPolytope) -> sp.Rational:
    """Exact integral over P, summed over a triangulation."""
    return sum((integrate_simplex(p, s) for s in triangulate(P)), sp.Integer(0))


def _projection_axis(normal: Sequence[Any]) -> int:
    """Coordinate with the largest |a_j|; ties go to the smallest j."""
    best = 0
    for j, a in enumerate(normal):
        if abs(a) > abs(normal[best]):
            best = j
    return best


def integrate_facet_sigma(p: sp.Poly, F: Facet) -> sp.Rational:
    """Integral of p over F against dsigma, by projection along one coordinate."""
    if not any(F.normal):
        raise ZeroNormal(f"facet {F.normal} . x >= {F.offset} has a zero normal")
    n = len(F.normal)
    j = _projection_axis(F.normal)
    scale = 1 / abs(sp.Rational(F.normal[j]))
    if n == 1:
        return sum((evaluate(p, v) for v in F.vertices), sp.Integer(0)) * scale

    lift = {tuple(x for i, x in enumerate(v) if i != j): v for v in F.vertices}
    total = sp.Integer(0)
    for simplex in triangulate_points(list(lift)):
        base = simplex[0]
        det = sp.Matrix([[a - b for a, b in zip(v, base)] for v in simplex[1:]]).det()
        total += _pullback_integral(p, [lift[v] for v in simplex], abs(det) * scale)
    return total


def integrate_boundary(p: sp.Poly, boundary: Sequence[Facet]) -> sp.Rational:
    return sum((integrate_facet_sigma(p, F) for F in boundary), sp.Integer(0))


def integrate(p: sp.Poly, P: HPolytope, measure: Measure = "volume") -> sp.Rational:
    """Integral of p over P (dmu) or over its whole boundary (dsigma)."""
    if measure == "volume":
        return integrate_polytope(p, P)
    return integrate_boundary(p, facets(P))


def outward_flux(V: PolyVectorField, F: Facet) -> sp.Rational:
    """Flux of V out of the polytope through F, in dsigma units.

    Constraints read normal . x >= offset, so the normal points inward.
    """
    if V.n != len(F.normal):
        raise DimensionMismatch(f"vector field has {V.n} components, facet lives in R^{len(F.normal)}")
    gens = V.components[0].gens
    pairing = sp.Poly(0, *gens, domain=sp.QQ)
    for a, component in zip(F.normal, V.components):
        if a:
            pairing = pairing + component.mul_ground(a)
    return -integrate_facet_sigma(pairing, F)


# ── Monte-Carlo oracle ────────────────────────────────────────────────

def _as_numpy(p: sp.Poly):
    fn = sp.lambdify(p.gens, p.as_expr(), "numpy")

    def call(points: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(fn(*points.T), dtype=float), (points.shape[0],))

    return call


def _pl_weight(f: PLFunction):
    slopes = np.array([[float(x) for x in piece.b] for piece in f.pieces])
    shifts = np.array([float(piece.k) for piece in f.pieces])

    def call(points: np.ndarray) -> np.ndarray:
        return (points @ slopes.T + shifts).max(axis=1)

    return call


def _summary(
    total: float, total_sq: float, samples: int, accepted: int, seed: int, quantity: str, exact: Any
) -> MonteCarloEstimate:
    mean = total / samples
    variance = max(total_sq / samples - mean**2, 0.0) * samples / max(samples - 1, 1)
    result = MonteCarloEstimate(
        quantity=quantity,
        exact=exact,
        estimate=mean,
        stderr=math.sqrt(variance / samples),
        samples=samples,
        accepted=accepted,
        seed=seed,
    )
    logger.info(
        "Monte-Carlo %s: %.6g +/- %.2g (%d of %d accepted)",
        quantity or "integral", mean, result.stderr, accepted, samples,
    )
    return result


def _sample_settings(samples: int | None, seed: int | None) -> tuple[int, int]:
    samples = config.MC_SAMPLES if samples is None else samples
    seed = config.MC_SEED if seed is None else seed
    if samples < 1:
        raise ValueError("samples must be at least 1")
    return samples, seed


def mc_estimate(
    p: sp.Poly,
    P: HPolytope,
    samples: int | None = None,
    seed: int | None = None,
    weight: PLFunction | None = None,
    quantity: str = "",
    exact: Any = None,
) -> MonteCarloEstimate:
    """Rejection-sampling estimate of the integral of p (times ``weight``) over P.

    Draws uniformly from the bounding box with a counter-based Philox stream,
    so a (seed, samples) pair always reproduces the same estimate.
    """
    samples, seed = _sample_settings(samples, seed)

    corners = np.array([[float(x) for x in v] for v in vertices(P).vertices])
    low, high = corners.min(axis=0), corners.max(axis=0)
    box_volume = float(np.prod(high - low))
    normals = np.array([[float(a) for a in c.normal] for c in P.constraints])
    offsets = np.array([float(c.offset) for c in P.constraints])

    integrand = _as_numpy(p)
    pl = _pl_weight(weight) if weight is not None else None
    rng = np.random.Generator(np.random.Philox(seed))

    total = total_sq = 0.0
    accepted = 0
    remaining = samples
    while remaining:
        batch = min(remaining, config.MC_BATCH)
        points = low + (high - low) * rng.random((batch, P.n))
        inside = (points @ normals.T >= offsets).all(axis=1)
        values = np.where(inside, integrand(points), 0.0)
        if pl is not None:
            values = values * np.where(inside, pl(points), 0.0)
        values = values * box_volume
        total += values.sum()
        total_sq += np.square(values).sum()
        accepted += int(inside.sum())
        remaining -= batch

    return _summary(total, total_sq, samples, accepted, seed, quantity, exact)


def _facet_simplices(F: Facet) -> list[tuple[np.ndarray, float]]:
    """(lifted vertices, dsigma mass) for each simplex of F's projected triangulation."""
    j = _projection_axis(F.normal)
    scale = 1 / abs(sp.Rational(F.normal[j]))
    if len(F.normal) == 1:
        return [(np.array([[float(x) for x in v]]), float(scale)) for v in F.vertices]

    lift = {tuple(x for i, x in enumerate(v) if i != j): v for v in F.vertices}
    pieces = []
    for simplex in triangulate_points(list(lift)):
        base = simplex[0]
        det = sp.Matrix([[a - b for a, b in zip(v, base)] for v in simplex[1:]]).det()
        mass = abs(det) * scale / math.factorial(len(simplex) - 1)
        pieces.append((np.array([[float(x) for x in lift[v]] for v in simplex]), float(mass)))
    return pieces


def mc_boundary_estimate(
    p: sp.Poly,
    boundary: Sequence[Facet],
    samples: int | None = None,
    seed: int | None = None,
    weight: PLFunction | None = None,
    quantity: str = "",
    exact: Any = None,
) -> MonteCarloEstimate:
    """Estimate of the dsigma integral of p (times ``weight``) over the given facets.

    Picks a facet simplex with probability proportional to its dsigma mass,
    then a uniform point in it from normalised exponential weights.
    """
    samples, seed = _sample_settings(samples, seed)
    simplices = [s for F in boundary for s in _facet_simplices(F)]
    if not simplices:
        raise ValueError("no facets to sample")
    corners = np.stack([verts for verts, _ in simplices])
    masses = np.array([mass for _, mass in simplices])
    total_mass = float(masses.sum())

    integrand = _as_numpy(p)
    pl = _pl_weight(weight) if weight is not None else None
    rng = np.random.Generator(np.random.Philox(seed))

    total = total_sq = 0.0
    remaining = samples
    while remaining:
        batch = min(remaining, config.MC_BATCH)
        chosen = rng.choice(len(simplices), size=batch, p=masses / total_mass)
        bary = rng.standard_exponential((batch, corners.shape[1]))
        bary /= bary.sum(axis=1, keepdims=True)
        points = np.einsum("bk,bkn->bn", bary, corners[chosen])
        values = integrand(points)
        if pl is not None:
            values = values * pl(points)
        values = values * total_mass
        total += values.sum()
        total_sq += np.square(values).sum()
        remaining -= batch

    return _summary(total, total_sq, samples, samples, seed, quantity, exact)

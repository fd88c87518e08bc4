"""Polytope combinatorics for W-invariant lattice polytopes.

Constraints read ``normal . x >= offset`` with the coordinate (duality)
pairing, never the gram pairing. Normals are kept primitive in the dual of
the character lattice. Everything is exact and sized for desk-scale
instances: vertex enumeration walks every n-subset of constraints.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Any, Literal

import sympy as sp

from dfinvariant import config
from dfinvariant.core.root_system import RootSystem, Vector, WeylGroup, as_rational, as_vector
from dfinvariant.errors import (
    DegenerateFacet,
    DegenerateSimplex,
    DimensionMismatch,
    EmptyPositivePart,
    Infeasible,
    LowerDimensionalPositivePart,
    NotFullDimensional,
    ProblemTooLarge,
    Unbounded,
    ZeroNormal,
)
from dfinvariant.models.df_models import FacetReport, FanoReport

logger = logging.getLogger(__name__)

Lattice = tuple[Vector, ...] | None


def dot(u: Sequence[Any], v: Sequence[Any]) -> sp.Rational:
    return sum((a * b for a, b in zip(u, v)), sp.Integer(0))


def _sub(u: Sequence[Any], v: Sequence[Any]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def centroid(points: Sequence[Vector]) -> Vector:
    count = len(points)
    return tuple(sum(coords, sp.Integer(0)) / count for coords in zip(*points))


def affine_dimension(points: Sequence[Vector]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    return sp.Matrix([_sub(p, base) for p in points[1:]]).rank()


@dataclass(frozen=True)
class Constraint:
    """normal . x >= offset."""

    normal: Vector
    offset: sp.Rational

    def slack(self, x: Sequence[Any]) -> sp.Rational:
        return dot(self.normal, x) - self.offset


def canonical_constraint(normal: Sequence[Any], offset: Any, lattice: Lattice = None) -> Constraint:
    """Rescale by a positive factor so the normal is primitive in the dual lattice."""
    normal = as_vector(normal)
    offset = as_rational(offset)
    if not any(normal):
        raise ZeroNormal(f"constraint with zero normal (offset {offset})")
    coords = normal if lattice is None else tuple(dot(row, normal) for row in lattice)
    denominator = math.lcm(*(int(c.q) for c in coords))
    numerators = [int(c * denominator) for c in coords]
    scale = sp.Rational(denominator, math.gcd(*numerators))
    return Constraint(tuple(scale * a for a in normal), scale * offset)


@dataclass(frozen=True)
class HPolytope:
    """Intersection of half-spaces; constraints are canonicalised and deduplicated on construction."""

    constraints: tuple[Constraint, ...]
    lattice: Lattice = None

    def __post_init__(self):
        if not self.constraints:
            raise DimensionMismatch("an H-polytope needs at least one constraint")
        n = len(self.constraints[0].normal)
        canon: list[Constraint] = []
        for c in self.constraints:
            if len(c.normal) != n:
                raise DimensionMismatch(f"constraint normal {c.normal} does not have length {n}")
            cc = canonical_constraint(c.normal, c.offset, self.lattice)
            if cc not in canon:
                canon.append(cc)
        object.__setattr__(self, "constraints", tuple(canon))

    @classmethod
    def from_inequalities(
        cls, normals: Iterable[Sequence[Any]], offsets: Iterable[Any], lattice: Lattice = None
    ) -> "HPolytope":
        constraints = tuple(Constraint(as_vector(a), as_rational(c)) for a, c in zip(normals, offsets))
        return cls(constraints, lattice)

    @property
    def n(self) -> int:
        return len(self.constraints[0].normal)

    def contains(self, x: Sequence[Any]) -> bool:
        return all(c.slack(x) >= 0 for c in self.constraints)

    def intersect(self, extra: Iterable[Constraint]) -> "HPolytope":
        return HPolytope(self.constraints + tuple(extra), self.lattice)

    def dilate(self, k: Any) -> "HPolytope":
        k = as_rational(k)
        return HPolytope(tuple(Constraint(c.normal, k * c.offset) for c in self.constraints), self.lattice)


@dataclass(frozen=True)
class VPolytope:
    vertices: tuple[Vector, ...]

    @property
    def n(self) -> int:
        return len(self.vertices[0])


@dataclass(frozen=True)
class Facet:
    normal: Vector
    offset: sp.Rational
    vertices: tuple[Vector, ...]
    kind: Literal["outer", "wall"] = "outer"

    @property
    def constraint(self) -> Constraint:
        return Constraint(self.normal, self.offset)


@dataclass(frozen=True)
class SimplexT:
    """n+1 affinely independent points in R^n."""

    vertices: tuple[Vector, ...]

    def __post_init__(self):
        n = len(self.vertices[0])
        if len(self.vertices) != n + 1 or self.determinant == 0:
            raise DegenerateSimplex(f"{self.vertices} is not a nondegenerate {n}-simplex")

    @property
    def determinant(self) -> sp.Rational:
        base = self.vertices[0]
        return sp.Matrix([_sub(v, base) for v in self.vertices[1:]]).det()

    @property
    def volume(self) -> sp.Rational:
        return abs(self.determinant) / sp.factorial(len(self.vertices) - 1)


# ── Piecewise-linear functions ────────────────────────────────────────

@dataclass(frozen=True)
class AffinePiece:
    b: Vector
    k: sp.Rational

    def __call__(self, x: Sequence[Any]) -> sp.Rational:
        return dot(self.b, x) + self.k


@dataclass(frozen=True)
class PLFunction:
    """f(x) = max over pieces of (b . x + k); convex by construction."""

    pieces: tuple[AffinePiece, ...]

    def __post_init__(self):
        if not self.pieces:
            raise DimensionMismatch("a PL function needs at least one piece")
        n = len(self.pieces[0].b)
        if any(len(p.b) != n for p in self.pieces):
            raise DimensionMismatch("all pieces must have the same length")

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[Sequence[Any], Any]]) -> "PLFunction":
        return cls(tuple(AffinePiece(as_vector(b), as_rational(k)) for b, k in pieces))

    @classmethod
    def weyl_symmetrize(cls, b: Sequence[Any], k: Any, group: WeylGroup) -> "PLFunction":
        """max over w of (w^T b) . x + k; W-invariant, and affine on P+ when b is dominant."""
        pieces = [AffinePiece(group.dual_act(w, b), as_rational(k)) for w in group.elements]
        return cls(tuple(pieces)).distinct()

    @property
    def n(self) -> int:
        return len(self.pieces[0].b)

    def __call__(self, x: Sequence[Any]) -> sp.Rational:
        return max(piece(x) for piece in self.pieces)

    def distinct(self) -> "PLFunction":
        unique: list[AffinePiece] = []
        for piece in self.pieces:
            if piece not in unique:
                unique.append(piece)
        return PLFunction(tuple(unique))

    def compose(self, w: sp.ImmutableMatrix) -> "PLFunction":
        """x -> f(w x)."""
        return PLFunction(tuple(AffinePiece(WeylGroup.dual_act(w, p.b), p.k) for p in self.pieces))

    def __add__(self, other: "PLFunction") -> "PLFunction":
        pieces = [
            AffinePiece(tuple(a + b for a, b in zip(p.b, q.b)), p.k + q.k)
            for p in self.pieces
            for q in other.pieces
        ]
        return PLFunction(tuple(pieces)).distinct()

    def scale(self, kappa: Any) -> "PLFunction":
        kappa = as_rational(kappa)
        if kappa < 0:
            raise ValueError("only non-negative multiples of a convex function stay convex")
        return PLFunction(tuple(AffinePiece(tuple(kappa * x for x in p.b), kappa * p.k) for p in self.pieces)).distinct()


# ── H <-> V ───────────────────────────────────────────────────────────

def _solve(rows: Sequence[Vector], rhs: Sequence[Any]) -> Vector | None:
    matrix = sp.Matrix(rows)
    if matrix.det() == 0:
        return None
    return tuple(matrix.LUsolve(sp.Matrix(rhs)))


def _kernel_line(rows: Sequence[Vector], n: int) -> Vector | None:
    """Spanning vector of the kernel of ``rows`` when that kernel is a line."""
    if not rows:
        return (sp.Integer(1),) if n == 1 else None
    kernel = sp.Matrix(rows).nullspace()
    if len(kernel) != 1:
        return None
    return tuple(kernel[0])


def _has_recession_direction(P: HPolytope) -> bool:
    """Pointed cone {y : a_i . y >= 0} is nonzero iff one of its candidate extreme rays lies in it."""
    n = P.n
    for subset in combinations(P.constraints, n - 1):
        line = _kernel_line([c.normal for c in subset], n)
        if line is None:
            continue
        for direction in (line, tuple(-x for x in line)):
            if all(dot(c.normal, direction) >= 0 for c in P.constraints):
                return True
    return False


@lru_cache(maxsize=4096)
def vertices(P: HPolytope) -> VPolytope:
    """Exact vertex set in lexicographic order."""
    n, m = P.n, len(P.constraints)
    if n > config.MAX_DIMENSION or m > config.MAX_CONSTRAINTS:
        raise ProblemTooLarge(
            f"vertex enumeration limited to n <= {config.MAX_DIMENSION}, m <= {config.MAX_CONSTRAINTS} "
            f"(got n={n}, m={m})"
        )
    if sp.Matrix([c.normal for c in P.constraints]).rank() < n:
        raise Unbounded("constraint normals do not span the dual space")

    found: set[Vector] = set()
    for subset in combinations(P.constraints, n):
        point = _solve([c.normal for c in subset], [c.offset for c in subset])
        if point is not None and P.contains(point):
            found.add(point)
    if not found:
        raise Infeasible("the constraints have no common solution")
    if _has_recession_direction(P):
        raise Unbounded("the recession cone is not {0}")

    ordered = tuple(sorted(found))
    if affine_dimension(ordered) < n:
        raise NotFullDimensional(f"polytope spans only {affine_dimension(ordered)} of {n} dimensions")
    return VPolytope(ordered)


def hull(V: VPolytope, lattice: Lattice = None) -> HPolytope:
    """Facet inequalities of conv(V), found by testing every hyperplane through n points."""
    points = sorted(set(as_vector(v) for v in V.vertices))
    n = len(points[0])
    if affine_dimension(points) < n:
        raise NotFullDimensional("vertex set is not full-dimensional")

    found: list[Constraint] = []
    for subset in combinations(points, n):
        base = subset[0]
        normal = _kernel_line([_sub(p, base) for p in subset[1:]], n)
        if normal is None:
            continue
        offset = dot(normal, base)
        slacks = [dot(normal, p) - offset for p in points]
        if all(s <= 0 for s in slacks):
            normal, offset = tuple(-x for x in normal), -offset
        elif not all(s >= 0 for s in slacks):
            continue
        constraint = canonical_constraint(normal, offset, lattice)
        if constraint not in found:
            found.append(constraint)
    return HPolytope(tuple(found), lattice)


@lru_cache(maxsize=4096)
def facets(P: HPolytope) -> tuple[Facet, ...]:
    """Constraints whose tight vertices span a hyperplane, in constraint order."""
    verts = vertices(P).vertices
    result = []
    for c in P.constraints:
        tight = tuple(v for v in verts if c.slack(v) == 0)
        if len(tight) >= P.n and affine_dimension(tight) == P.n - 1:
            result.append(Facet(c.normal, c.offset, tight))
    return tuple(result)


def irredundant(P: HPolytope) -> HPolytope:
    return HPolytope(tuple(f.constraint for f in facets(P)), P.lattice)


def volume(P: HPolytope | VPolytope) -> sp.Rational:
    return sum((s.volume for s in triangulate(P)), sp.Integer(0))


# ── Weyl chamber ──────────────────────────────────────────────────────

def chamber_constraints(rs: RootSystem, lattice: Lattice = None) -> list[Constraint]:
    """<alpha_s, x> >= 0 for each simple root, as primitive dual covectors."""
    return [canonical_constraint(rs.covector(alpha), 0, lattice) for alpha in rs.simple_roots]


def is_weyl_invariant(P: HPolytope, group: WeylGroup) -> bool:
    """Facet inequalities closed under the dual action, and vertex set W-stable."""
    facet_set = {f.constraint for f in facets(P)}
    by_constraints = all(
        canonical_constraint(group.dual_act(w, c.normal), c.offset, P.lattice) in facet_set
        for w in group.elements
        for c in facet_set
    )
    vertex_set = set(vertices(P).vertices)
    by_vertices = all(group.act(w, v) in vertex_set for w in group.elements for v in vertex_set)
    if by_constraints != by_vertices:
        logger.warning(
            "W-invariance tests disagree (constraints=%s, vertices=%s)", by_constraints, by_vertices
        )
    return by_constraints and by_vertices


def positive_part(P: HPolytope, rs: RootSystem) -> HPolytope:
    """P+ = P cut by the chamber walls, with redundant constraints removed."""
    cut = P.intersect(chamber_constraints(rs, P.lattice))
    try:
        vertices(cut)
    except Infeasible as exc:
        raise EmptyPositivePart("P does not meet the positive Weyl chamber", field="polytope") from exc
    except NotFullDimensional as exc:
        raise LowerDimensionalPositivePart(
            "P meets the positive Weyl chamber in a lower-dimensional set", field="polytope"
        ) from exc
    return irredundant(cut)


def classify_facets(Pplus: HPolytope, rs: RootSystem) -> list[Facet]:
    """Label each facet of P+ as a wall facet (inside a chamber wall) or an outer facet."""
    chamber = set(chamber_constraints(rs, Pplus.lattice))
    wall_forms = [rs.covector(alpha) for alpha in rs.simple_roots]
    result = []
    for facet in facets(Pplus):
        if facet.constraint in chamber:
            result.append(Facet(facet.normal, facet.offset, facet.vertices, "wall"))
            continue
        inside_wall = any(all(dot(form, v) == 0 for v in facet.vertices) for form in wall_forms)
        center = centroid(facet.vertices)
        if inside_wall or not all(dot(form, center) > 0 for form in wall_forms):
            raise DegenerateFacet(
                f"facet {facet.normal} . x >= {facet.offset} does not meet the open chamber",
                field="polytope",
            )
        result.append(Facet(facet.normal, facet.offset, facet.vertices, "outer"))
    return result


def check_fano(P: HPolytope, rs: RootSystem) -> FanoReport:
    """Every outer facet of P+ must sit at lattice distance one from 2 rho."""
    two_rho = rs.two_rho
    reports = []
    for facet in classify_facets(positive_part(P, rs), rs):
        report = FacetReport(
            normal=list(facet.normal),
            offset=facet.offset,
            kind=facet.kind,
            vertices=[list(v) for v in facet.vertices],
        )
        if facet.kind == "outer":
            distance = dot(facet.normal, two_rho) - facet.offset
            report.distance_from_two_rho = distance
            report.fano_ok = distance == 1
            if not report.fano_ok:
                logger.info("Outer facet %s . x >= %s is at distance %s from 2rho", facet.normal, facet.offset, distance)
        reports.append(report)
    fano = all(r.fano_ok for r in reports if r.kind == "outer")
    return FanoReport(fano=fano, two_rho=list(two_rho), facets=reports)


# ── Triangulation ─────────────────────────────────────────────────────

def _subfaces(constraints: Sequence[Constraint], face: frozenset, dim: int) -> list[frozenset]:
    found: set[frozenset] = set()
    for c in constraints:
        sub = frozenset(v for v in face if c.slack(v) == 0)
        if len(sub) < dim or sub == face or sub in found:
            continue
        if affine_dimension(sorted(sub)) == dim - 1:
            found.add(sub)
    return sorted(found, key=sorted)


def _triangulate_face(constraints: Sequence[Constraint], face: frozenset, dim: int) -> list[tuple[Vector, ...]]:
    if dim == 0:
        return [tuple(face)]
    apex = min(face)
    simplices = []
    for sub in _subfaces(constraints, face, dim):
        if apex in sub:
            continue
        simplices.extend((apex,) + s for s in _triangulate_face(constraints, sub, dim - 1))
    return simplices


def triangulate(P: HPolytope | VPolytope) -> list[SimplexT]:
    """Cone from the lexicographically least vertex over the facets that miss it, recursively."""
    if isinstance(P, VPolytope):
        P = hull(P)
    face = frozenset(vertices(P).vertices)
    return [SimplexT(s) for s in _triangulate_face(P.constraints, face, P.n)]


def triangulate_points(points: Sequence[Vector]) -> list[tuple[Vector, ...]]:
    """Triangulate conv(points) in its own dimension (points given full-dimensional in R^k)."""
    k = len(points[0])
    if k == 0:
        return [tuple(points[:1])]
    P = hull(VPolytope(tuple(points)))
    return _triangulate_face(P.constraints, frozenset(vertices(P).vertices), k)


# ── Refinement by a PL function ───────────────────────────────────────

def _cut(cell: HPolytope, constraint: Constraint) -> HPolytope:
    """cell with one more half-space, pruned to its facets; raises when nothing full-dimensional is left."""
    if all(constraint.slack(v) >= 0 for v in vertices(cell).vertices):
        return cell
    return irredundant(cell.intersect([constraint]))


def refine_by_pl(Pplus: HPolytope, f: PLFunction) -> list[tuple[HPolytope, AffinePiece]]:
    """Full-dimensional cells of Pplus on which a single piece of f is active.

    Each cell is cut out one competing piece at a time, so vertex enumeration
    only ever sees the facets of the current cell.
    """
    pieces = f.distinct().pieces
    cells = []
    for i, piece in enumerate(pieces):
        cell = Pplus
        try:
            for j, other in enumerate(pieces):
                if i == j:
                    continue
                normal = _sub(piece.b, other.b)
                offset = other.k - piece.k
                if not any(normal):
                    if offset > 0:
                        raise Infeasible(f"piece {piece} is dominated everywhere")
                    continue
                cell = _cut(cell, Constraint(normal, offset))
        except (Infeasible, NotFullDimensional):
            logger.debug("Piece %s is never strictly active on the domain", piece)
            continue
        cells.append((irredundant(cell), piece))
    return cells


def pl_is_weyl_invariant(f: PLFunction, P: HPolytope, group: WeylGroup) -> bool:
    """f(wx) == f(x) on P for every w, compared on the common refinement of f and f o w."""
    base = set(f.distinct().pieces)
    cells = None
    for w in group.elements:
        g = f.compose(w)
        if set(g.distinct().pieces) == base:
            continue
        cells = refine_by_pl(P, f) if cells is None else cells
        for cell, _ in cells:
            for sub, _ in refine_by_pl(cell, g):
                if any(f(v) != g(v) for v in vertices(sub).vertices):
                    return False
    return True


def pl_restrict_affine(f: PLFunction, Pplus: HPolytope) -> AffinePiece | None:
    """The piece that equals f on all of Pplus, or None when f is not affine there."""
    points = set(vertices(Pplus).vertices)
    for cell, _ in refine_by_pl(Pplus, f):
        points.update(vertices(cell).vertices)
    for piece in f.distinct().pieces:
        if all(piece(v) == f(v) for v in points):
            return piece
    return None

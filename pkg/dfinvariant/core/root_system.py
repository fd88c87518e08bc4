"""Reduced root systems with a W-invariant rational pairing, and their Weyl groups.

Presets are stored in presets.yaml (simple-root coordinates); torus-k presets
are generated. Everything is exact: sympy Rationals and ImmutableMatrix.
"""

import logging
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any

import sympy as sp
import yaml

from dfinvariant import config
from dfinvariant.errors import (
    DimensionMismatch,
    GramNotPositiveDefinite,
    GroupCapExceeded,
    InvalidRootSystem,
    NotARoot,
    NotClosedUnderReflection,
    RootOnWall,
    UnknownPreset,
    ValidationError,
)
from dfinvariant.models.df_models import parse_rational

logger = logging.getLogger(__name__)

PRESETS_FILE = Path(__file__).parent / "presets.yaml"
TORUS_PRESETS = ("torus-1", "torus-2", "torus-3")
PRESET_NAMES = TORUS_PRESETS + ("A1", "A2", "B2", "G2")

Vector = tuple[sp.Rational, ...]


def as_rational(value: Any) -> sp.Rational:
    """Exact rational from an int, a sympy Rational or a "p/q" string. Floats and decimals are refused."""
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise ValidationError(f"Not a rational number: {value!r} ({exc})") from exc


def as_vector(values: Sequence[Any]) -> Vector:
    return tuple(as_rational(v) for v in values)


def _is_integral(v: Vector) -> bool:
    return all(x.is_integer for x in v)


@dataclass(frozen=True)
class RootSystem:
    """Positive roots, pairing and derived data (rho, c, r, d).

    ``lattice`` holds a basis of the character lattice M as rows, in the
    chosen coordinates; ``None`` means M = Z^n.
    """

    name: str
    n: int
    gram: tuple[Vector, ...]
    positive_roots: tuple[Vector, ...]
    simple_roots: tuple[Vector, ...]
    rho: Vector
    c: sp.Rational
    lattice: tuple[Vector, ...] | None = None

    @property
    def r(self) -> int:
        return len(self.positive_roots)

    @property
    def d(self) -> int:
        return 2 * self.r

    @property
    def two_rho(self) -> Vector:
        return tuple(2 * x for x in self.rho)

    @property
    def roots(self) -> tuple[Vector, ...]:
        """Phi = Phi+ together with its negatives."""
        return self.positive_roots + tuple(tuple(-x for x in a) for a in self.positive_roots)

    @property
    def gram_matrix(self) -> sp.ImmutableMatrix:
        return sp.ImmutableMatrix(self.gram)

    def covector(self, alpha: Sequence[Any]) -> Vector:
        """gram * alpha, so that pairing(alpha, x) == covector(alpha) . x."""
        return tuple(self.gram_matrix * sp.Matrix(as_vector(alpha)))


def pairing(rs: RootSystem, u: Sequence[Any], v: Sequence[Any]) -> sp.Rational:
    """<u, v> = u^T gram v."""
    if len(u) != rs.n or len(v) != rs.n:
        raise DimensionMismatch(
            f"pairing expects vectors of length {rs.n}, got {len(u)} and {len(v)}"
        )
    return (sp.Matrix(as_vector(u)).T * rs.gram_matrix * sp.Matrix(as_vector(v)))[0, 0]


def reflection_matrix(rs: RootSystem, alpha: Sequence[Any]) -> sp.ImmutableMatrix:
    a = sp.Matrix(as_vector(alpha))
    norm = pairing(rs, alpha, alpha)
    return sp.ImmutableMatrix(sp.eye(rs.n) - (2 / norm) * a * (rs.gram_matrix * a).T)


def reflect(rs: RootSystem, alpha: Sequence[Any], x: Sequence[Any]) -> Vector:
    """s_alpha(x) = x - 2 <alpha, x>/<alpha, alpha> alpha."""
    alpha = as_vector(alpha)
    if len(x) != rs.n:
        raise DimensionMismatch(f"reflect expects a vector of length {rs.n}, got {len(x)}")
    if alpha not in rs.roots:
        raise NotARoot(f"{alpha} is not a root of {rs.name}")
    x = as_vector(x)
    coeff = 2 * pairing(rs, alpha, x) / pairing(rs, alpha, alpha)
    return tuple(xi - coeff * ai for xi, ai in zip(x, alpha))


# ── Construction ──────────────────────────────────────────────────────

@lru_cache(maxsize=1)
def load_presets() -> dict[str, dict]:
    """Parse presets.yaml into {name: {gram, positive_roots}}."""
    with PRESETS_FILE.open(encoding="utf-8") as fh:
        return yaml.safe_load(fh) or {}


def _check_gram(gram: sp.Matrix, n: int) -> None:
    if gram.shape != (n, n):
        raise DimensionMismatch(f"gram must be {n}x{n}, got {gram.shape[0]}x{gram.shape[1]}", field="gram")
    if gram != gram.T:
        raise GramNotPositiveDefinite("gram is not symmetric", field="gram")
    for k in range(1, n + 1):
        if gram[:k, :k].det() <= 0:
            raise GramNotPositiveDefinite(f"leading minor of order {k} is not positive", field="gram")


def _simple_roots(positive: tuple[Vector, ...]) -> tuple[Vector, ...]:
    """Positive roots that are not a sum of two positive roots."""
    sums = {
        tuple(x + y for x, y in zip(a, b))
        for i, a in enumerate(positive)
        for b in positive[i:]
    }
    return tuple(a for a in positive if a not in sums)


def _check_closure(rs: RootSystem) -> None:
    roots = set(rs.roots)
    for alpha in rs.positive_roots:
        s = reflection_matrix(rs, alpha)
        for beta in roots:
            image = tuple(s * sp.Matrix(beta))
            if image not in roots:
                raise NotClosedUnderReflection(
                    f"s_{alpha} maps {beta} to {image}, which is not a root",
                    field="positive_roots",
                )


def _check_positive_system(positive: tuple[Vector, ...], simple: tuple[Vector, ...], n: int) -> None:
    if not positive:
        return
    basis = sp.Matrix.hstack(*[sp.Matrix(s) for s in simple])
    if basis.rank() != len(simple):
        raise InvalidRootSystem("simple roots are linearly dependent", field="positive_roots")
    for alpha in positive:
        try:
            sol, params = basis.gauss_jordan_solve(sp.Matrix(alpha))
        except ValueError as exc:
            raise InvalidRootSystem(
                f"{alpha} is not in the span of the simple roots", field="positive_roots"
            ) from exc
        if params.shape[0] or any(not x.is_integer or x < 0 for x in sol):
            raise InvalidRootSystem(
                f"{alpha} is not a non-negative integer combination of simple roots",
                field="positive_roots",
            )


def _check_lattice(lattice: tuple[Vector, ...], roots: tuple[Vector, ...], n: int) -> None:
    basis = sp.Matrix(lattice)
    if basis.shape != (n, n) or basis.det() == 0:
        raise InvalidRootSystem("lattice must be an invertible n x n basis", field="lattice")
    for alpha in roots:
        coords = basis.T.solve(sp.Matrix(alpha))
        if any(not x.is_integer for x in coords):
            raise InvalidRootSystem(f"root {alpha} is not in the character lattice", field="lattice")


def _from_data(
    name: str,
    gram: Sequence[Sequence[Any]],
    positive_roots: Sequence[Sequence[Any]],
    lattice: Sequence[Sequence[Any]] | None = None,
) -> RootSystem:
    gram_rows = tuple(as_vector(row) for row in gram)
    n = len(gram_rows)
    if n == 0:
        raise InvalidRootSystem("rank must be at least 1", field="gram")
    _check_gram(sp.Matrix(gram_rows), n)

    positive = tuple(as_vector(a) for a in positive_roots)
    for alpha in positive:
        if len(alpha) != n:
            raise DimensionMismatch(f"root {alpha} has length {len(alpha)}, expected {n}", field="positive_roots")
        if not _is_integral(alpha) or not any(alpha):
            raise InvalidRootSystem(f"root {alpha} must be a nonzero integer vector", field="positive_roots")
    if len(set(positive)) != len(positive):
        raise InvalidRootSystem("duplicate positive roots", field="positive_roots")

    simple = _simple_roots(positive)
    _check_positive_system(positive, simple, n)

    gram_m = sp.Matrix(gram_rows)
    rho = tuple(sp.Rational(1, 2) * sum((a[j] for a in positive), sp.Integer(0)) for j in range(n))
    c = sp.Integer(1)
    for alpha in positive:
        value = (sp.Matrix(alpha).T * gram_m * sp.Matrix(rho))[0, 0]
        if value <= 0:
            raise RootOnWall(f"<{alpha}, rho> = {value} is not positive", field="positive_roots")
        c *= value**2

    lattice_rows = tuple(as_vector(row) for row in lattice) if lattice is not None else None
    if lattice_rows is not None:
        _check_lattice(lattice_rows, positive, n)

    rs = RootSystem(
        name=name,
        n=n,
        gram=gram_rows,
        positive_roots=positive,
        simple_roots=simple,
        rho=rho,
        c=c,
        lattice=lattice_rows,
    )
    _check_closure(rs)
    logger.info("Built root system %s: n=%d r=%d c=%s", name, n, rs.r, c)
    return rs


def build_root_system(spec: str | Mapping[str, Any]) -> RootSystem:
    """Build a validated RootSystem from a preset name or {gram, positive_roots[, lattice]}."""
    if isinstance(spec, str):
        if spec in TORUS_PRESETS:
            k = int(spec.split("-")[1])
            return _from_data(spec, sp.eye(k).tolist(), [])
        presets = load_presets()
        if spec not in presets:
            raise UnknownPreset(
                f"Unknown root system preset '{spec}'. Valid presets: {list(PRESET_NAMES)}",
                field="root_system",
            )
        data = presets[spec]
        return _from_data(spec, data["gram"], data["positive_roots"])

    if "gram" not in spec or "positive_roots" not in spec:
        raise InvalidRootSystem("explicit root system needs 'gram' and 'positive_roots'", field="root_system")
    return _from_data(
        spec.get("name", "custom"),
        spec["gram"],
        spec["positive_roots"],
        spec.get("lattice"),
    )


# ── Weyl group ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class WeylGroup:
    """Elements act on M_R by matrix-vector product; transposes act on normals."""

    elements: tuple[sp.ImmutableMatrix, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @staticmethod
    def act(w: sp.ImmutableMatrix, x: Sequence[Any]) -> Vector:
        return tuple(w * sp.Matrix(as_vector(x)))

    @staticmethod
    def dual_act(w: sp.ImmutableMatrix, a: Sequence[Any]) -> Vector:
        return tuple(w.T * sp.Matrix(as_vector(a)))


def _matrix_key(m: sp.ImmutableMatrix) -> tuple:
    return tuple(m)


@lru_cache(maxsize=32)
def weyl_group(rs: RootSystem, cap: int | None = None) -> WeylGroup:
    """Close the simple reflections under products (breadth first)."""
    cap = config.WEYL_GROUP_CAP if cap is None else cap
    identity = sp.ImmutableMatrix(sp.eye(rs.n))
    generators = [reflection_matrix(rs, alpha) for alpha in rs.simple_roots]

    seen = {identity}
    queue = deque([identity])
    while queue:
        g = queue.popleft()
        for s in generators:
            h = sp.ImmutableMatrix(s * g)
            if h in seen:
                continue
            seen.add(h)
            if len(seen) > cap:
                raise GroupCapExceeded(f"Weyl group of {rs.name} exceeds {cap} elements")
            queue.append(h)

    elements = tuple(sorted(seen, key=_matrix_key))
    logger.info("Weyl group of %s has order %d", rs.name, len(elements))
    return WeylGroup(elements=elements)

"""Pydantic models for instance files and computed reports.

Exact rationals travel as ints or "p/q" strings on the wire and as sympy
Rationals in memory. Floats are refused: a value that was rounded once can
never be made exact again.
"""

import re
from fractions import Fraction
from typing import Annotated, Any, Literal

import sympy as sp
from pydantic import BaseModel, Field, PlainSerializer, PlainValidator, field_validator, model_validator

from dfinvariant import config

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rational(value: Any) -> sp.Rational:
    """int, Fraction, sympy Rational or "p/q" string -> sympy Rational."""
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, sp.Rational):
        return value
    if isinstance(value, int):
        return sp.Integer(value)
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, str):
        match = _RATIONAL_RE.match(value)
        if not match:
            raise ValueError(f"'{value}' is not of the form p or p/q")
        num, den = int(match.group(1)), int(match.group(2) or 1)
        if den <= 0:
            raise ValueError(f"'{value}' has a non-positive denominator")
        return sp.Rational(num, den)
    if isinstance(value, float):
        raise ValueError(f"float {value!r} is not exact; write it as \"p/q\"")
    raise ValueError(f"cannot read {value!r} as a rational")


def format_rational(value: sp.Rational) -> str:
    return str(sp.Rational(value))


def decimal_string(value: Any) -> str:
    """12 significant digits, display only."""
    return f"{float(sp.Rational(value)):.12g}"


ExactRational = Annotated[
    sp.Rational,
    PlainValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str, when_used="json"),
]
RationalVector = list[ExactRational]


# ── Instance file ─────────────────────────────────────────────────────

class RootSystemSpec(BaseModel):
    """Explicit root data: pairing matrix and positive roots."""

    name: str = "custom"
    gram: list[RationalVector]
    positive_roots: list[RationalVector] = Field(default_factory=list)
    lattice: list[RationalVector] | None = None

    @field_validator("positive_roots", mode="before")
    @classmethod
    def coerce_roots(cls, v: Any) -> Any:
        return [] if v is None else v


class HRepSpec(BaseModel):
    normals: list[RationalVector]
    offsets: list[ExactRational]

    @model_validator(mode="after")
    def same_length(self) -> "HRepSpec":
        if len(self.normals) != len(self.offsets):
            raise ValueError(f"{len(self.normals)} normals but {len(self.offsets)} offsets")
        if not self.normals:
            raise ValueError("at least one constraint is required")
        return self


class VRepSpec(BaseModel):
    vertices: list[RationalVector] = Field(min_length=1)


class PolytopeSpec(BaseModel):
    h_rep: HRepSpec | None = None
    v_rep: VRepSpec | None = None

    @model_validator(mode="after")
    def exactly_one(self) -> "PolytopeSpec":
        if (self.h_rep is None) == (self.v_rep is None):
            raise ValueError("give exactly one of 'h_rep' or 'v_rep'")
        return self


class PieceSpec(BaseModel):
    b: RationalVector
    k: ExactRational = sp.Integer(0)


class FunctionSpec(BaseModel):
    pieces: list[PieceSpec] = Field(min_length=1)


class InstanceOptions(BaseModel):
    mc_samples: int = Field(default=config.MC_SAMPLES, ge=1)
    seed: int = config.MC_SEED
    allow_non_invariant_f: bool = False


class InstanceFile(BaseModel):
    """One self-contained computation: root data, polytope, optional test function."""

    root_system: str | RootSystemSpec
    polytope: PolytopeSpec
    function: FunctionSpec | None = None
    options: InstanceOptions = Field(default_factory=InstanceOptions)


# ── Reports ───────────────────────────────────────────────────────────

class FacetReport(BaseModel):
    normal: RationalVector
    offset: ExactRational
    kind: Literal["outer", "wall"]
    vertices: list[RationalVector] = Field(default_factory=list)
    # normal . 2rho - offset on outer facets; the facet is Fano iff this is 1
    distance_from_two_rho: ExactRational | None = None
    fano_ok: bool | None = None


class FanoReport(BaseModel):
    fano: bool
    two_rho: RationalVector
    facets: list[FacetReport] = Field(default_factory=list)

    @property
    def offending(self) -> list[FacetReport]:
        return [f for f in self.facets if f.fano_ok is False]


class IdentityReport(BaseModel):
    """Pass/fail per polynomial identity of the DH density."""

    root_system: str = ""
    gradient_along_rho: bool = False
    euler_identity: bool = False
    divergence_identity: bool = False
    top_at_rho_is_one: bool = False
    sub_at_rho_is_2r: bool = False
    homogeneity: bool = False
    weyl_dimension_consistent: bool = False

    @property
    def all_passed(self) -> bool:
        return all(v for k, v in self.model_dump().items() if isinstance(v, bool))


class MonteCarloEstimate(BaseModel):
    quantity: str = ""
    exact: ExactRational | None = None
    estimate: float = 0.0
    stderr: float = 0.0
    samples: int = 0
    accepted: int = 0
    seed: int = 0

    @property
    def relative_error(self) -> float | None:
        if self.exact is None or self.exact == 0:
            return None
        exact = float(self.exact)
        return abs(self.estimate - exact) / abs(exact)


class TheoremIntegrals(BaseModel):
    """The three integrals of the general DF formula, plus the DH volume."""

    boundary: ExactRational
    sub: ExactRational
    top: ExactRational
    volume: ExactRational


class DFReport(BaseModel):
    fano: bool
    r: int
    n: int
    d: int
    a: ExactRational
    vol_dh: ExactRational
    bar_dh: RationalVector
    two_rho: RationalVector
    df_general: ExactRational
    df_affine: ExactRational | None = None
    affine_piece: RationalVector | None = None
    cross_check: Literal["equal", "mismatch", "not-applicable"] = "not-applicable"
    identities_ok: bool = False
    function_invariant: bool = True
    invariance_override: bool = False
    integrals: TheoremIntegrals | None = None
    monte_carlo: list[MonteCarloEstimate] = Field(default_factory=list)


class ValidationSummary(BaseModel):
    """What `validate` established about an instance."""

    root_system: str
    n: int
    r: int
    weyl_order: int
    vertices: list[RationalVector]
    facets: int
    positive_part_vertices: list[RationalVector]
    polytope_invariant: bool = True
    function_invariant: bool | None = None


class VolumeReport(BaseModel):
    vol_dh: ExactRational
    volume: ExactRational
    volume_positive_part: ExactRational


class BarycenterReport(BaseModel):
    bar_dh: RationalVector
    two_rho: RationalVector

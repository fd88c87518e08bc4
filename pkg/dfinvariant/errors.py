"""Exception hierarchy shared by the engine and the CLI.

ValidationError means the instance itself is wrong (CLI exit 1);
ComputationError means the engine could not finish (CLI exit 2).
"""


class DFInvariantError(Exception):
    """Base class; ``field`` names the offending instance field when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ValidationError(DFInvariantError):
    """Input violates a type or invariant requirement."""


class ComputationError(DFInvariantError):
    """Input is acceptable but the computation failed."""


# ── Input / root data ─────────────────────────────────────────────────

class ParseError(ValidationError):
    """Malformed instance file."""


class DimensionMismatch(ValidationError):
    """Vector length does not match the ambient rank."""


class UnknownPreset(ValidationError):
    """Root system preset name is not recognised."""


class InvalidRootSystem(ValidationError):
    """Root data fails a structural check."""


class NotClosedUnderReflection(InvalidRootSystem):
    """Phi is not stable under its own reflections."""


class GramNotPositiveDefinite(InvalidRootSystem):
    """Gram matrix is not symmetric positive definite."""


class RootOnWall(InvalidRootSystem):
    """Some positive root pairs non-positively with rho."""


class NotARoot(ValidationError):
    """Reflection requested along a vector outside Phi."""


# ── Polytopes ─────────────────────────────────────────────────────────

class Infeasible(ValidationError):
    """The H-representation defines the empty set."""


class Unbounded(ValidationError):
    """The H-representation has a nonzero recession cone."""


class NotFullDimensional(ValidationError):
    """The polytope has empty interior."""


class EmptyPositivePart(ValidationError):
    """P does not meet the positive Weyl chamber."""


class LowerDimensionalPositivePart(ValidationError):
    """P meets the chamber in a set of measure zero."""


class DegenerateFacet(ValidationError):
    """A non-chamber facet of P+ lies inside a Weyl wall."""


# ── DF preconditions ──────────────────────────────────────────────────

class NotWeylInvariantPolytope(ValidationError):
    """P is not stable under the Weyl group."""


class NotWeylInvariantFunction(ValidationError):
    """f(wx) != f(x) somewhere on P."""


class NotFano(ValidationError):
    """Some outer facet of P+ is not at lattice distance one from 2*rho."""


class NotAffineOnPositivePart(ValidationError):
    """No single affine piece of f dominates on all of P+."""


# ── Engine ────────────────────────────────────────────────────────────

class GroupCapExceeded(ComputationError):
    """Weyl group closure grew past the configured cap."""


class ProblemTooLarge(ComputationError):
    """Vertex enumeration beyond the desk-scale limits."""


class DegenerateSimplex(ComputationError):
    """Simplex with zero volume handed to the integrator."""


class ZeroNormal(ComputationError):
    """Facet or constraint with a zero normal vector."""

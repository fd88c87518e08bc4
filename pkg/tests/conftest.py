"""Shared fixtures for the dfinvariant test suite."""

import sys
from pathlib import Path

import pytest

# Ensure project root is on path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

INSTANCES_DIR = PROJECT_ROOT / "dfinvariant" / "instances"


# ── Root systems ────────────────────────────────────────────────────

@pytest.fixture
def a1():
    from dfinvariant.core.root_system import build_root_system

    return build_root_system("A1")


@pytest.fixture
def a2():
    from dfinvariant.core.root_system import build_root_system

    return build_root_system("A2")


@pytest.fixture
def torus2():
    from dfinvariant.core.root_system import build_root_system

    return build_root_system("torus-2")


@pytest.fixture
def a1_euclidean():
    """A1 with root (2), pairing [[1]] and character lattice 2Z."""
    from dfinvariant.core.root_system import build_root_system

    return build_root_system({"name": "A1-euclidean", "gram": [[1]], "positive_roots": [[2]], "lattice": [[2]]})


# ── Polytopes ───────────────────────────────────────────────────────

@pytest.fixture
def a1_interval():
    """P = [-2, 2], the anticanonical polytope of PGL(2)."""
    from dfinvariant.core.polytope_lab import HPolytope

    return HPolytope.from_inequalities([[1], [-1]], [-2, -2])


@pytest.fixture
def square():
    """[-1, 1]^2."""
    from dfinvariant.core.polytope_lab import HPolytope

    return HPolytope.from_inequalities([[1, 0], [-1, 0], [0, 1], [0, -1]], [-1, -1, -1, -1])


@pytest.fixture
def hexagon():
    """W(A2)-invariant hexagon with every outer offset -3."""
    from dfinvariant.core.polytope_lab import HPolytope

    normals = [[1, 0], [-1, 0], [0, 1], [0, -1], [1, -1], [-1, 1]]
    return HPolytope.from_inequalities(normals, [-3] * 6)


# ── Functions ───────────────────────────────────────────────────────

@pytest.fixture
def abs_x():
    """f(x) = |x| on R^1."""
    from dfinvariant.core.polytope_lab import PLFunction

    return PLFunction.from_pieces([([1], 0), ([-1], 0)])


@pytest.fixture
def instance_files():
    """Bundled instance files."""
    return sorted(INSTANCES_DIR.glob("*.json"))

"""Unit tests for the DH volume and barycenter, the constant a, and both DF formulas."""

import numpy as np
import pytest
import sympy as sp

from dfinvariant.core.futaki import (
    constant_a,
    df_fano_affine,
    df_general,
    df_report,
    dh_barycenter,
    dh_volume,
    divergence_balance,
    theorem_integrals,
)
from dfinvariant.core.polynomial_core import constant, position
from dfinvariant.core.polytope_lab import HPolytope, PLFunction, positive_part
from dfinvariant.core.root_system import build_root_system, weyl_group
from dfinvariant.errors import (
    NotAffineOnPositivePart,
    NotFano,
    NotWeylInvariantFunction,
    NotWeylInvariantPolytope,
)

R = sp.Rational


def interval(lo, hi, lattice=None):
    return HPolytope.from_inequalities([[1], [-1]], [lo, -hi], lattice)


def const(value, n):
    return PLFunction.from_pieces([([0] * n, value)])


def random_rational(rng, lo=0, hi=6):
    return R(int(rng.integers(lo, hi + 1)), int(rng.integers(1, 6)))


def random_invariant_affine(rng, rs):
    """Sum of W-orbit maxima of dominant covectors, plus a constant."""
    group = weyl_group(rs)
    f = None
    for _ in range(int(rng.integers(1, 3))):
        if rs.simple_roots:
            # b . alpha_s >= 0 on simple roots keeps the orbit maximum affine on the chamber
            basis = sp.Matrix(rs.simple_roots).T
            b = tuple(basis.T.solve(sp.Matrix([random_rational(rng) for _ in rs.simple_roots])))
        else:
            b = tuple(random_rational(rng, -6, 6) for _ in range(rs.n))
        term = PLFunction.weyl_symmetrize(b, random_rational(rng, -4, 4), group)
        f = term if f is None else f + term
    return f


@pytest.fixture
def fano_instances(a1, torus2, a2, a1_interval, square, hexagon):
    return [(a1_interval, a1), (square, torus2), (hexagon, a2)]


class TestDHData:
    def test_a1(self, a1_interval, a1):
        """A1 on [-2, 2]: Vol_DH = 32/3, bar_DH = 3/2."""
        Pplus = positive_part(a1_interval, a1)
        assert dh_volume(Pplus, a1) == R(32, 3)
        assert dh_barycenter(Pplus, a1) == (R(3, 2),)

    def test_torus_square(self, square, torus2):
        assert dh_volume(square, torus2) == 4
        assert dh_barycenter(square, torus2) == (0, 0)

    def test_torus_segment(self):
        """Uniform centroid of [0, 1]."""
        rs = build_root_system("torus-1")
        assert dh_barycenter(interval(0, 1), rs) == (R(1, 2),)

    def test_dilation(self, a1):
        """[0, 4] carries (32/3) * 2^3."""
        assert dh_volume(interval(0, 4), a1) == R(256, 3)

    def test_barycenter_in_open_chamber(self, hexagon, a2):
        """bar_DH of the hexagon lies strictly inside the chamber."""
        bar = dh_barycenter(positive_part(hexagon, a2), a2)
        assert 2 * bar[0] - bar[1] > 0
        assert 2 * bar[1] - bar[0] > 0


class TestConstantA:
    def test_a1(self, a1_interval, a1):
        """Boundary 16 plus 2 * 16, over 32/3, is 3."""
        assert constant_a(positive_part(a1_interval, a1), a1) == 3

    def test_torus_square(self, square, torus2):
        assert constant_a(square, torus2) == 2

    def test_hexagon(self, hexagon, a2):
        """a = 2r + n = 8 for the Fano hexagon."""
        assert constant_a(positive_part(hexagon, a2), a2) == 8

    def test_fano_gives_dimension(self, fano_instances):
        for P, rs in fano_instances:
            assert constant_a(positive_part(P, rs), rs) == 2 * rs.r + rs.n

    def test_non_fano(self, a1):
        """[-3, 3] is not Fano and a = 2."""
        assert constant_a(positive_part(interval(-3, 3), a1), a1) == 2


class TestDFGeneral:
    def test_a1_abs(self, a1_interval, a1, abs_x):
        """-F_1(|x|) = (3/64)(32 + 64/3 - 48) = 1/4."""
        assert df_general(a1_interval, a1, abs_x) == R(1, 4)

    def test_a1_integrals(self, a1_interval, a1, abs_x):
        integrals = theorem_integrals(positive_part(a1_interval, a1), a1, abs_x)
        assert integrals.boundary == 32
        assert integrals.sub == R(32, 3)
        assert integrals.top == 16
        assert integrals.volume == R(32, 3)

    def test_constant_gives_zero(self, fano_instances):
        """The definition of a makes constants cancel."""
        for P, rs in fano_instances:
            assert df_general(P, rs, const(R(7, 3), rs.n)) == 0

    def test_constant_gives_zero_non_fano(self, a1):
        assert df_general(interval(-3, 3), a1, const(5, 1)) == 0

    def test_torus_affine_is_zero(self, square, torus2):
        """A linear function on the centred square has -F_1 = 0."""
        assert df_general(square, torus2, PLFunction.from_pieces([([1, 0], 0)])) == 0

    def test_torus_abs(self, square, torus2):
        """|x1| on the square: boundary 6, top 2, a = 2, so (6 - 4) / 8."""
        f = PLFunction.from_pieces([([1, 0], 0), ([-1, 0], 0)])
        assert df_general(square, torus2, f) == R(1, 4)

    def test_linearity(self, square, torus2):
        """-F_1(f + g) = -F_1(f) + -F_1(g) and -F_1(k f) = k -F_1(f)."""
        f = PLFunction.from_pieces([([1, 0], 0), ([-1, 0], 0)])
        g = PLFunction.from_pieces([([0, 1], 0), ([0, -1], R(1, 2))])
        total = df_general(square, torus2, f + g)
        assert total == df_general(square, torus2, f) + df_general(square, torus2, g)
        assert df_general(square, torus2, f.scale(3)) == 3 * df_general(square, torus2, f)

    def test_linearity_hexagon(self, hexagon, a2):
        group = weyl_group(a2)
        f = PLFunction.weyl_symmetrize((1, 0), 0, group)
        g = PLFunction.weyl_symmetrize((0, 2), 1, group)
        assert df_general(hexagon, a2, f + g) == df_general(hexagon, a2, f) + df_general(hexagon, a2, g)

    def test_presentation_invariance(self, a1_euclidean):
        """A1 as root (2), pairing [[1]], lattice 2Z, P = [-4, 4], f = |y|/2 gives 1/4 again."""
        P = interval(-4, 4, a1_euclidean.lattice)
        f = PLFunction.from_pieces([([R(1, 2)], 0), ([R(-1, 2)], 0)])
        assert constant_a(positive_part(P, a1_euclidean), a1_euclidean) == 3
        assert df_general(P, a1_euclidean, f) == R(1, 4)
        assert df_fano_affine(P, a1_euclidean, f) == R(1, 4)

    def test_non_invariant_function(self, a1_interval, a1):
        """f = x is not W(A1)-invariant."""
        with pytest.raises(NotWeylInvariantFunction) as exc:
            df_general(a1_interval, a1, PLFunction.from_pieces([([1], 0)]))
        assert exc.value.field == "function"

    def test_override(self, a1_interval, a1):
        """The override computes anyway."""
        value = df_general(a1_interval, a1, PLFunction.from_pieces([([1], 0)]), allow_non_invariant_f=True)
        assert value == R(1, 4)

    def test_non_invariant_polytope(self, a1, abs_x):
        with pytest.raises(NotWeylInvariantPolytope):
            df_general(interval(-1, 2), a1, abs_x)


class TestDFFanoAffine:
    def test_a1(self, a1_interval, a1, abs_x):
        """1/2 * 1 * (3/2 - 1) = 1/4."""
        assert df_fano_affine(a1_interval, a1, abs_x) == R(1, 4)

    def test_torus(self, square, torus2):
        assert df_fano_affine(square, torus2, PLFunction.from_pieces([([1, 0], 0)])) == 0

    def test_constant(self, a1_interval, a1):
        assert df_fano_affine(a1_interval, a1, const(3, 1)) == 0

    def test_not_fano(self, a1, abs_x):
        with pytest.raises(NotFano):
            df_fano_affine(interval(-3, 3), a1, abs_x)

    def test_not_affine(self, square, torus2):
        f = PLFunction.from_pieces([([1, 0], 0), ([-1, 0], 0)])
        with pytest.raises(NotAffineOnPositivePart):
            df_fano_affine(square, torus2, f)


class TestCrossCheck:
    @pytest.mark.parametrize("seed", range(20))
    def test_random_invariant_functions(self, seed, fano_instances):
        """General and Fano formulas agree exactly on random W-invariant f affine on P+."""
        rng = np.random.Generator(np.random.Philox(seed))
        for P, rs in fano_instances:
            f = random_invariant_affine(rng, rs)
            assert df_general(P, rs, f) == df_fano_affine(P, rs, f)

    def test_divergence_balance(self, fano_instances):
        """Volume integral of div((x - 2rho) f H_d) equals the total outward flux."""
        for P, rs in fano_instances:
            Pplus = positive_part(P, rs)
            for f in (constant(1, rs.n), *position(rs.n)):
                inside, through = divergence_balance(rs, Pplus, f)
                assert inside == through


class TestReport:
    def test_a1(self, a1_interval, a1, abs_x):
        report = df_report(a1_interval, a1, abs_x)
        assert report.fano
        assert (report.r, report.n, report.d) == (1, 1, 2)
        assert report.a == 3
        assert report.vol_dh == R(32, 3)
        assert report.bar_dh == [R(3, 2)]
        assert report.df_general == R(1, 4)
        assert report.df_affine == R(1, 4)
        assert report.cross_check == "equal"
        assert report.identities_ok
        assert report.monte_carlo == []

    def test_hexagon(self, hexagon, a2):
        f = PLFunction.weyl_symmetrize((1, 1), 0, weyl_group(a2))
        report = df_report(hexagon, a2, f)
        assert report.fano
        assert report.a == 8
        assert report.cross_check == "equal"
        assert report.affine_piece == [1, 1]

    def test_not_applicable(self, square, torus2):
        """|x1| is not affine on the square, so there is nothing to compare."""
        f = PLFunction.from_pieces([([1, 0], 0), ([-1, 0], 0)])
        report = df_report(square, torus2, f)
        assert report.cross_check == "not-applicable"
        assert report.df_affine is None
        assert report.df_general == R(1, 4)

    def test_non_fano(self, a1, abs_x):
        report = df_report(interval(-3, 3), a1, abs_x)
        assert not report.fano
        assert report.a == 2
        assert report.cross_check == "not-applicable"

    def test_override_marked(self, a1_interval, a1):
        report = df_report(a1_interval, a1, PLFunction.from_pieces([([1], 0)]), allow_non_invariant_f=True)
        assert not report.function_invariant
        assert report.invariance_override

    def test_monte_carlo_block(self, a1_interval, a1, abs_x):
        report = df_report(a1_interval, a1, abs_x, mc_samples=200_000, mc_seed=0, with_monte_carlo=True)
        assert [m.quantity for m in report.monte_carlo] == [
            "vol_dh",
            "int_f_h_sub",
            "int_f_h_top",
            "int_f_h_top_boundary",
        ]
        for estimate in report.monte_carlo:
            assert estimate.relative_error < 0.02

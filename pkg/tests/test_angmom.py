"""Exact angular-momentum algebra: coefficients, d-matrices, rotations."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eitstore.angmom import (HalfInt, clebsch_gordan, projections,
                             rotation_matrix, spin_x_matrix, spin_xz_matrix,
                             spin_z_matrix, wigner_small_d)

half_ints = st.integers(min_value=0, max_value=6).map(HalfInt)


@st.composite
def momentum_with_projection(draw, max_twice=6):
    f = HalfInt(draw(st.integers(min_value=0, max_value=max_twice)))
    k = draw(st.integers(min_value=0, max_value=f.twice))
    return f, HalfInt(-f.twice + 2 * k)


class TestHalfInt:
    def test_coerce(self):
        assert HalfInt.coerce(2) == HalfInt(4)
        assert HalfInt.coerce(1.5) == HalfInt(3)
        assert HalfInt.coerce(HalfInt(3)) == HalfInt(3)
        with pytest.raises(ValueError):
            HalfInt.coerce(0.3)

    def test_arithmetic_exact(self):
        a, b = HalfInt(3), HalfInt(4)
        assert (a + b).twice == 7
        assert (a - b).twice == -1
        assert (-a).twice == -3
        assert abs(HalfInt(-5)) == HalfInt(5)
        assert HalfInt(3) < HalfInt(4)
        assert float(HalfInt(3)) == 1.5

    def test_projections_cover_range(self):
        ms = projections(HalfInt(3))
        assert [m.twice for m in ms] == [-3, -1, 1, 3]


class TestClebschGordan:
    def test_stretched_state(self):
        assert clebsch_gordan(1, 1, 2, 1, 1, 2) == 1.0

    def test_symmetry_forbidden(self):
        assert clebsch_gordan(1, 1, 1, 0, 0, 0) == 0.0

    def test_racah_value(self):
        assert clebsch_gordan(1, 1, 2, 0, 1, 1) == pytest.approx(
            0.7071067811865476, abs=1e-15)

    def test_projection_selection(self):
        assert clebsch_gordan(1, 1, 2, 1, -1, 1) == 0.0

    def test_triangle_violation_is_zero(self):
        assert clebsch_gordan(1, 1, 3, 0, 0, 0) == 0.0
        assert clebsch_gordan(2, 1, 0, 1, -1, 0) == 0.0

    def test_parity_mismatch_raises(self):
        with pytest.raises(ValueError):
            clebsch_gordan(1, 1, 2, 0.5, 0.5, 1)

    def test_out_of_range_projection_raises(self):
        with pytest.raises(ValueError):
            clebsch_gordan(1, 1, 2, 2, 0, 2)

    @given(momentum_with_projection(), momentum_with_projection())
    @settings(max_examples=60, deadline=None)
    def test_row_normalization(self, fm1, fm2):
        """For fixed (F1, m1, F2, m2), the couplings to all valid F resolve
        the product state: sum_F C^2 = 1."""
        (f1, m1), (f2, m2) = fm1, fm2
        m = m1 + m2
        total = 0.0
        for tf in range(abs(f1.twice - f2.twice), f1.twice + f2.twice + 1, 2):
            f = HalfInt(tf)
            if abs(m.twice) > f.twice:
                continue
            total += clebsch_gordan(f1, f2, f, m1, m2, m) ** 2
        assert total == pytest.approx(1.0, abs=1e-12)

    @given(momentum_with_projection(max_twice=4),
           momentum_with_projection(max_twice=4))
    @settings(max_examples=60, deadline=None)
    def test_row_orthogonality(self, fm1, fm2):
        """Distinct total-F rows are orthogonal when resolved over the
        product basis at fixed total projection."""
        (f1, m1), (f2, m2) = fm1, fm2
        m = m1 + m2
        tf_values = [tf for tf in range(abs(f1.twice - f2.twice),
                                        f1.twice + f2.twice + 1, 2)
                     if abs(m.twice) <= tf]
        if len(tf_values) < 2:
            return
        fa, fb = HalfInt(tf_values[0]), HalfInt(tf_values[-1])
        dot = 0.0
        for m1p in projections(f1):
            m2p = m - m1p
            if abs(m2p.twice) > f2.twice:
                continue
            dot += (clebsch_gordan(f1, f2, fa, m1p, m2p, m)
                    * clebsch_gordan(f1, f2, fb, m1p, m2p, m))
        assert dot == pytest.approx(0.0, abs=1e-12)


class TestWignerSmallD:
    def test_spin_one_center_element(self):
        for beta in (0.3, 1.1, 2.9, -0.7):
            d = wigner_small_d(1, beta)
            assert d[1, 1] == pytest.approx(math.cos(beta), abs=1e-14)

    def test_zero_angle_identity(self):
        for f in (0, 0.5, 1, 1.5, 2, 3):
            d = wigner_small_d(f, 0.0)
            assert np.allclose(d, np.eye(d.shape[0]), atol=1e-14)

    def test_spin_half_closed_form(self):
        d = wigner_small_d(0.5, math.pi / 2)
        assert d[1, 1] == pytest.approx(math.cos(math.pi / 4), abs=1e-15)

    def test_sign_convention(self):
        # <1,1| exp(-i beta F_y) |1,0> = -sin(beta)/sqrt(2)
        beta = 0.8
        d = wigner_small_d(1, beta)
        assert d[2, 1] == pytest.approx(-math.sin(beta) / math.sqrt(2),
                                        abs=1e-14)

    @given(st.integers(min_value=0, max_value=6),
           st.floats(min_value=-10.0, max_value=10.0))
    @settings(max_examples=80, deadline=None)
    def test_symmetry_relation(self, twice_f, beta):
        """d[m, m'] = (-1)^(m - m') d[m', m]."""
        d = wigner_small_d(HalfInt(twice_f), beta)
        dim = twice_f + 1
        for i in range(dim):
            for j in range(dim):
                sign = -1.0 if (i - j) % 2 else 1.0
                assert d[i, j] == pytest.approx(sign * d[j, i], abs=1e-12)

    @given(st.integers(min_value=0, max_value=6),
           st.floats(min_value=-10.0, max_value=10.0))
    @settings(max_examples=50, deadline=None)
    def test_orthogonality(self, twice_f, beta):
        d = wigner_small_d(HalfInt(twice_f), beta)
        assert np.max(np.abs(d @ d.T - np.eye(twice_f + 1))) < 1e-12

    def test_infinite_angle_rejected(self):
        with pytest.raises(ValueError):
            wigner_small_d(1, math.inf)


class TestRotationMatrix:
    def test_axial_field_is_diagonal_phases(self):
        rot = rotation_matrix(2, -1.0 / 3.0, 2.0e6, 0.0, 3.7e-7)
        phi = (-1.0 / 3.0) * 2.0e6 * 3.7e-7
        m_values = np.arange(-2, 3)
        expected = np.diag(np.exp(-1j * m_values * phi))
        assert np.max(np.abs(rot.entries - expected)) < 1e-13

    def test_zero_time_identity(self):
        rot = rotation_matrix(3, 0.5, 1.0e6, 0.9, 0.0)
        assert np.max(np.abs(rot.entries - np.eye(7))) < 1e-14

    def test_transverse_half_turn_reverses_m(self):
        """A half-turn about x maps m to -m up to phase."""
        omega_b, g = 1.0e6, 1.0
        t = math.pi / (g * omega_b)  # phi = pi
        rot = rotation_matrix(2, g, omega_b, math.pi / 2, t)
        mat = np.abs(rot.entries)
        anti = np.fliplr(np.eye(5))
        assert np.max(np.abs(mat - anti)) < 1e-12

    @given(st.integers(min_value=0, max_value=6),
           st.floats(min_value=0.0, max_value=math.pi / 2),
           st.floats(min_value=-5.0, max_value=5.0))
    @settings(max_examples=60, deadline=None)
    def test_unitarity(self, twice_f, theta, phase):
        rot = rotation_matrix(HalfInt(twice_f), 1.0, 1.0, theta, phase)
        dim = twice_f + 1
        dev = rot.entries.conj().T @ rot.entries - np.eye(dim)
        assert np.max(np.abs(dev)) < 1e-12

    @given(st.floats(min_value=0.0, max_value=math.pi / 2),
           st.floats(min_value=-3.0, max_value=3.0),
           st.floats(min_value=-3.0, max_value=3.0))
    @settings(max_examples=50, deadline=None)
    def test_composition_same_axis(self, theta, t1, t2):
        a = rotation_matrix(2, 0.4, 1.0, theta, t1).entries
        b = rotation_matrix(2, 0.4, 1.0, theta, t2).entries
        c = rotation_matrix(2, 0.4, 1.0, theta, t1 + t2).entries
        assert np.max(np.abs(a @ b - c)) < 1e-10

    def test_matches_generator_exponential(self):
        """Euler-assembled matrix equals the exponential of the axis
        projection of the spin operator."""
        from scipy.linalg import expm
        theta, phi = 0.77, 1.9
        gen = spin_xz_matrix(2, theta)
        expected = expm(-1j * phi * gen)
        rot = rotation_matrix(2, 1.0, 1.0, theta, phi)
        assert np.max(np.abs(rot.entries - expected)) < 1e-12


class TestSpinMatrices:
    def test_commutator(self):
        # [F_z, F_x] = i F_y closes the algebra: check via [F_x,[F_x,F_z]]
        fx, fz = spin_x_matrix(1.5), spin_z_matrix(1.5)
        fy = (fz @ fx - fx @ fz) / 1j
        assert np.max(np.abs((fx @ fy - fy @ fx) - 1j * fz)) < 1e-12

    def test_casimir(self):
        f = 2
        fx, fz = spin_x_matrix(f), spin_z_matrix(f)
        fy = (fz @ fx - fx @ fz) / 1j
        total = fx @ fx + fy @ fy + fz @ fz
        assert np.allclose(total, f * (f + 1) * np.eye(2 * f + 1), atol=1e-12)

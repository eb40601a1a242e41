"""Element matrices, assembly, point masses, and modal analysis."""

import math

import numpy as np
import pytest

from snubbeam import (
    BeamProperties,
    add_point_mass,
    assemble,
    calibrate_point_mass,
    eigenfrequencies,
    element_matrices,
)

PAPER_PROPS = BeamProperties(
    length=0.35,
    width=0.0385,
    thickness=0.003,
    young_modulus=69.0e9,
    density=2700.0,
)

# clamped-free beta_n * L roots of 1 + cos(bL) cosh(bL) = 0
BETA_L = (1.8751040687119611, 4.694091132974175, 7.854757438237613)


def analytical_cantilever_hz(props, mode):
    """Closed-form Euler-Bernoulli clamped-free frequency, Hz."""
    bl = BETA_L[mode - 1]
    return (
        bl**2
        / (2.0 * math.pi * props.length**2)
        * math.sqrt(props.bending_stiffness / props.mass_per_length)
    )


def hermite_element_by_quadrature(EI, rhoS, le, n_gauss=12):
    """Independent oracle: Gauss-Legendre integration of shape products.

    N1 = 1 - 3x^2 + 2x^3, N2 = le (x - 2x^2 + x^3), N3 = 3x^2 - 2x^3,
    N4 = le (-x^2 + x^3) with x = s/le.
    """
    nodes, weights = np.polynomial.legendre.leggauss(n_gauss)
    s = 0.5 * le * (nodes + 1.0)  # map [-1, 1] -> [0, le]
    w = 0.5 * le * weights
    x = s / le

    N = np.stack(
        [
            1.0 - 3.0 * x**2 + 2.0 * x**3,
            le * (x - 2.0 * x**2 + x**3),
            3.0 * x**2 - 2.0 * x**3,
            le * (-(x**2) + x**3),
        ]
    )
    d2N = np.stack(
        [
            (-6.0 + 12.0 * x) / le**2,
            (-4.0 + 6.0 * x) / le,
            (6.0 - 12.0 * x) / le**2,
            (-2.0 + 6.0 * x) / le,
        ]
    )
    Ke = EI * (d2N * w) @ d2N.T
    Me = rhoS * (N * w) @ N.T
    return Ke, Me


class TestElementMatrices:
    def test_matches_quadrature_oracle(self):
        """Ke and Me agree with direct integration of the shape functions."""
        EI, rhoS, le = 5.9771, 0.31185, 0.035
        Ke, Me = element_matrices(EI, rhoS, le)
        Ke_ref, Me_ref = hermite_element_by_quadrature(EI, rhoS, le)
        np.testing.assert_allclose(Ke, Ke_ref, rtol=1e-12, atol=1e-9)
        np.testing.assert_allclose(Me, Me_ref, rtol=1e-12, atol=1e-15)

    def test_leading_entries(self):
        """K[0,0] = 12 EI/le^3 and M[0,0] = 156 rhoS le / 420."""
        EI, rhoS, le = 2.5, 0.7, 0.4
        Ke, Me = element_matrices(EI, rhoS, le)
        assert Ke[0, 0] == pytest.approx(12.0 * EI / le**3, rel=1e-14)
        assert Me[0, 0] == pytest.approx(156.0 * rhoS * le / 420.0, rel=1e-14)

    def test_zero_mass_density(self):
        """rhoS = 0 zeroes the mass matrix and leaves stiffness intact."""
        Ke0, Me0 = element_matrices(1.0, 0.0, 1.0)
        Ke1, _ = element_matrices(1.0, 1.0, 1.0)
        np.testing.assert_array_equal(Me0, np.zeros((4, 4)))
        np.testing.assert_array_equal(Ke0, Ke1)

    @pytest.mark.parametrize("EI,rhoS,le", [(3.0, 0.5, 0.1), (1e2, 2.0, 1.3)])
    def test_symmetry(self, EI, rhoS, le):
        Ke, Me = element_matrices(EI, rhoS, le)
        np.testing.assert_array_equal(Ke, Ke.T)
        np.testing.assert_array_equal(Me, Me.T)

    @pytest.mark.parametrize(
        "bad", [dict(EI=0.0), dict(EI=-1.0), dict(le=0.0), dict(le=-0.2), dict(rhoS=-0.1)]
    )
    def test_invalid_parameters(self, bad):
        kwargs = dict(EI=1.0, rhoS=1.0, le=1.0)
        kwargs.update(bad)
        with pytest.raises(ValueError):
            element_matrices(**kwargs)


class TestBeamProperties:
    def test_derived_quantities(self):
        p = PAPER_PROPS
        assert p.section_area == pytest.approx(0.0385 * 0.003)
        assert p.second_moment == pytest.approx(0.0385 * 0.003**3 / 12.0)

    @pytest.mark.parametrize(
        "field", ["length", "width", "thickness", "young_modulus", "density"]
    )
    def test_rejects_nonpositive(self, field):
        kwargs = dict(
            length=0.35, width=0.0385, thickness=0.003, young_modulus=69e9, density=2700.0
        )
        kwargs[field] = 0.0
        with pytest.raises(ValueError):
            BeamProperties(**kwargs)


class TestAssembly:
    def test_single_element_equals_element_matrices(self):
        model = assemble(PAPER_PROPS, 1)
        Ke, Me = element_matrices(
            PAPER_PROPS.bending_stiffness, PAPER_PROPS.mass_per_length, PAPER_PROPS.length
        )
        np.testing.assert_allclose(model.K, Ke)
        np.testing.assert_allclose(model.M, Me)

    def test_ten_elements_reduced_size(self):
        """10 elements, 2 DOFs per node, clamped node removed -> 20 DOFs."""
        model = assemble(PAPER_PROPS, 10)
        M_red, K_red = model.reduced_matrices()
        assert M_red.shape == (20, 20)
        assert K_red.shape == (20, 20)
        assert model.constrained_dofs == (0, 1)

    def test_total_mass_partition(self):
        """Summing translation-DOF mass entries recovers rho S L."""
        model = assemble(PAPER_PROPS, 7)
        trans = np.arange(0, model.n_dof, 2)
        ones = np.zeros(model.n_dof)
        ones[trans] = 1.0
        total = ones @ model.M @ ones
        expected = PAPER_PROPS.mass_per_length * PAPER_PROPS.length
        assert total == pytest.approx(expected, rel=1e-10)

    def test_translation_invariance(self):
        """Every element block of the global matrices is identical."""
        model = assemble(PAPER_PROPS, 5)
        Ke, Me = element_matrices(
            PAPER_PROPS.bending_stiffness,
            PAPER_PROPS.mass_per_length,
            PAPER_PROPS.length / 5,
        )
        K_blocks = [model.K[2 * e : 2 * e + 4, 2 * e : 2 * e + 4] for e in range(5)]
        # interior blocks overlap; differences of consecutive blocks repeat exactly
        np.testing.assert_allclose(K_blocks[1], K_blocks[2])
        np.testing.assert_allclose(
            K_blocks[0][:2, :2], Ke[:2, :2]
        )  # first block unshared corner
        np.testing.assert_allclose(K_blocks[-1][2:, 2:], Ke[2:, 2:])

    def test_dof_map(self):
        model = assemble(PAPER_PROPS, 3)
        assert model.dof_pair(0) == (0, 1)
        assert model.dof_pair(3) == (6, 7)
        assert model.dof_map[2] == (4, 5)
        with pytest.raises(IndexError):
            model.dof_pair(4)

    def test_zero_elements_rejected(self):
        with pytest.raises(ValueError):
            assemble(PAPER_PROPS, 0)

    def test_symmetry_and_definiteness(self):
        model = assemble(PAPER_PROPS, 10)
        M_red, K_red = model.reduced_matrices()
        np.testing.assert_allclose(M_red, M_red.T, rtol=1e-12)
        np.testing.assert_allclose(K_red, K_red.T, rtol=1e-12)
        assert np.all(np.linalg.eigvalsh(K_red) > 0.0)
        assert np.all(np.linalg.eigvalsh(M_red) > 0.0)


class TestPointMass:
    def test_zero_mass_is_identity(self):
        model = assemble(PAPER_PROPS, 4)
        modified = add_point_mass(model, 2, 0.0)
        np.testing.assert_array_equal(model.M, modified.M)
        np.testing.assert_array_equal(model.K, modified.K)

    def test_only_translation_entry_changes(self):
        model = assemble(PAPER_PROPS, 4)
        modified = add_point_mass(model, 3, 0.02)
        diff = modified.M - model.M
        t_dof = model.dof_pair(3)[0]
        assert diff[t_dof, t_dof] == pytest.approx(0.02)
        diff[t_dof, t_dof] = 0.0
        np.testing.assert_array_equal(diff, np.zeros_like(diff))
        np.testing.assert_array_equal(modified.K, model.K)

    def test_tip_mass_lowers_every_frequency(self):
        """Rayleigh-quotient monotonicity: added mass never raises a mode."""
        model = assemble(PAPER_PROPS, 6)
        before = eigenfrequencies(model, 6)
        after = eigenfrequencies(add_point_mass(model, 6, 0.01), 6)
        assert np.all(after <= before + 1e-12)
        assert after[0] < before[0]

    def test_mass_at_clamped_node_changes_nothing_reduced(self):
        model = assemble(PAPER_PROPS, 4)
        modified = add_point_mass(model, 0, 0.5)
        np.testing.assert_allclose(
            eigenfrequencies(model, 4), eigenfrequencies(modified, 4), rtol=1e-14
        )

    def test_negative_mass_rejected(self):
        model = assemble(PAPER_PROPS, 2)
        with pytest.raises(ValueError):
            add_point_mass(model, 1, -0.01)

    def test_bad_node_rejected(self):
        model = assemble(PAPER_PROPS, 2)
        with pytest.raises(IndexError):
            add_point_mass(model, 7, 0.01)


class TestEigenfrequencies:
    def test_paper_first_frequency(self):
        """10 elements with the published properties: f1 = 19.97 Hz within 1%."""
        model = assemble(PAPER_PROPS, 10)
        f = eigenfrequencies(model, 1)
        assert f[0] == pytest.approx(19.97, rel=0.01)

    def test_matches_analytical_cantilever(self):
        """First three modes within 0.5% of the closed-form values."""
        model = assemble(PAPER_PROPS, 10)
        f = eigenfrequencies(model, 3)
        for mode in (1, 2, 3):
            assert f[mode - 1] == pytest.approx(
                analytical_cantilever_hz(PAPER_PROPS, mode), rel=0.005
            )

    def test_density_scaling_law(self):
        """Doubling the density divides every frequency by sqrt(2)."""
        heavy = BeamProperties(
            length=0.35, width=0.0385, thickness=0.003, young_modulus=69e9, density=5400.0
        )
        f_ref = eigenfrequencies(assemble(PAPER_PROPS, 8), 5)
        f_heavy = eigenfrequencies(assemble(heavy, 8), 5)
        np.testing.assert_allclose(f_heavy, f_ref / math.sqrt(2.0), rtol=1e-8)

    @pytest.mark.parametrize("mode", [1, 2, 3])
    def test_mesh_convergence(self, mode):
        """Refining the mesh never worsens the error vs the closed form."""
        exact = analytical_cantilever_hz(PAPER_PROPS, mode)
        errors = []
        for m in (2, 4, 8, 16, 32):
            f = eigenfrequencies(assemble(PAPER_PROPS, m), mode)
            errors.append(abs(f[mode - 1] - exact))
        for coarse, fine in zip(errors, errors[1:]):
            assert fine <= coarse

    def test_count_validation(self):
        model = assemble(PAPER_PROPS, 2)
        with pytest.raises(ValueError):
            eigenfrequencies(model, 0)
        with pytest.raises(ValueError):
            eigenfrequencies(model, 5)

    def test_ascending_order(self):
        f = eigenfrequencies(assemble(PAPER_PROPS, 10), 10)
        assert np.all(np.diff(f) > 0.0)


class TestCalibration:
    def test_bisection_reaches_f3_target(self):
        report = calibrate_point_mass(PAPER_PROPS, 10, 2, 122.2, 318.8)
        assert 0.0 <= report.mass <= 0.1
        assert report.frequencies[2] == pytest.approx(318.8, rel=1e-6)
        assert report.within_tolerance

    def test_unreachable_target_reports_endpoint(self):
        """A target above the bare beam's f3 pins the mass at zero."""
        report = calibrate_point_mass(PAPER_PROPS, 10, 2, 122.2, 1000.0)
        assert report.mass == 0.0
        assert not report.within_tolerance
        assert "no match" in report.summary()

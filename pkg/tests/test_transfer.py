import math

import numpy as np
import pytest

from errors import EvanescentOverflow, InvalidGrid, NotConverged, SubThresholdEnergy
from models.analytic import match_and_scatter
from models.base import Direction, SolverKind
from models.heterojunction import ProfileGrid, sample_profile
from models.transfer import (
    SliceStack,
    TransferMatrixSolver,
    convergence_order,
    richardson_check,
    scaled_product,
    transfer_scatter,
)


@pytest.fixture
def uniform_grid():
    """
    Fixture providing a free unit-mass medium cut into 200 slices.
    """
    return ProfileGrid(edges=np.linspace(-5.0, 5.0, 201), m=np.ones(200), V=np.zeros(200, dtype=complex))


@pytest.fixture
def well_grid(well_params):
    """
    Fixture providing a model grid of the PT-symmetric well.
    """
    return sample_profile(well_params, 2000)


class TestScaledProduct:
    def test_matches_direct_product(self):
        """
        Test that the normalised pairwise product equals the ordered direct product.
        """
        rng = np.random.default_rng(3)
        matrices = rng.normal(size=(37, 2, 2)) + 1j * rng.normal(size=(37, 2, 2))
        direct = np.eye(2, dtype=complex)
        for matrix in matrices:
            direct = matrix @ direct
        product, log_scale = scaled_product(matrices)
        assert np.max(np.abs(product)) == pytest.approx(1.0)
        np.testing.assert_allclose(
            product * math.exp(log_scale), direct, rtol=0, atol=1e-11 * np.max(np.abs(direct))
        )

    def test_unit_determinant(self, well_grid):
        """
        Test that every slice matrix has unit determinant.
        """
        matrices = SliceStack.from_grid(well_grid, 1.0).slice_matrices()
        np.testing.assert_allclose(np.linalg.det(matrices), 1.0, rtol=0, atol=1e-12)


class TestSliceStack:
    def test_wavenumbers_decay(self, well_grid):
        stack = SliceStack.from_grid(well_grid, 1.0)
        assert np.all(stack.k.imag >= 0)

    def test_evanescent_slices(self):
        grid = ProfileGrid(edges=np.array([0.0, 1.0]), m=np.array([1.0]), V=np.array([3.0 + 0j]))
        stack = SliceStack.from_grid(grid, 1.0)
        assert stack.k[0] == pytest.approx(2j)


class TestTransferScatter:
    def test_uniform_medium(self, uniform_grid):
        for direction in Direction:
            result = transfer_scatter(uniform_grid, 1.0, direction)
            assert abs(result.R) < 1e-12
            assert abs(result.T - 1.0) < 1e-12
        assert richardson_check(uniform_grid, 1.0, Direction.LeftIncidence).richardson_error < 1e-12

    def test_reflectionless_is_converged(self, uniform_grid, monkeypatch, caplog):
        """
        Test that round-off in a vanishing |R|^2 neither warns nor fails at the slice cap.
        """
        monkeypatch.setattr("models.transfer.CONVERGENCE_SLICES", 400)
        with caplog.at_level("WARNING", logger="models.transfer"):
            result = richardson_check(uniform_grid, 1.0, Direction.RightIncidence)
        assert result.n_slices == 400
        assert result.richardson_error < 1e-12
        assert "changed by" not in caplog.text

    def test_hermitian_flux_conservation(self, hermitian_params):
        grid = sample_profile(hermitian_params, 2000)
        for E in [0.2, 1.0, 2.5]:
            for direction in Direction:
                result = transfer_scatter(grid, E, direction)
                assert result.R2 + result.T2 == pytest.approx(1.0, abs=1e-10)

    def test_right_incidence_mirrors_grid(self, well_grid):
        right = transfer_scatter(well_grid, 1.0, Direction.RightIncidence)
        mirrored = transfer_scatter(well_grid.reversed(), 1.0, Direction.LeftIncidence)
        assert right.R == mirrored.R
        assert right.T == mirrored.T

    def test_reciprocity_and_handedness(self, well_grid):
        """
        Test that T is the same from both sides while R is not.
        """
        left = transfer_scatter(well_grid, 1.0, Direction.LeftIncidence)
        right = transfer_scatter(well_grid, 1.0, Direction.RightIncidence)
        assert abs(left.T - right.T) <= 1e-10 * abs(left.T)
        assert abs(left.R2 - right.R2) > 1e-8

    @pytest.mark.parametrize("E", [0.3, 1.0, 2.0])
    def test_generalized_unitarity(self, well_grid, E):
        """
        Test that |T|^2 + conj(R_left) R_right = 1 on the exactly PT-symmetric slicing.
        """
        left = transfer_scatter(well_grid, E, Direction.LeftIncidence)
        right = transfer_scatter(well_grid, E, Direction.RightIncidence)
        assert abs(left.T2 + left.R.conjugate() * right.R - 1.0) < 1e-9

    def test_flux_normalised_transmission(self):
        """
        Test that a step between different exteriors conserves flux with normalised T.
        """
        grid = ProfileGrid(
            edges=np.linspace(-1.0, 1.0, 201),
            m=np.where(np.arange(200) < 100, 1.0, 0.5),
            V=np.where(np.arange(200) < 100, 0.0, 0.4).astype(complex),
        )
        result = transfer_scatter(grid, 1.0, Direction.LeftIncidence)
        assert result.R2 + result.T2 == pytest.approx(1.0, abs=1e-12)

    def test_refines_to_requested_slices(self, well_grid):
        result = transfer_scatter(well_grid, 1.0, Direction.LeftIncidence, n=1000)
        assert result.n_slices == 1000

    def test_below_exterior_potential(self, uniform_grid):
        with pytest.raises(SubThresholdEnergy):
            transfer_scatter(uniform_grid, 0.0, Direction.LeftIncidence)

    def test_evanescent_overflow(self):
        """
        Test that a deep wide barrier overflows the scaled product instead of returning NaN.
        """
        edges = np.concatenate([[-12.0], np.linspace(-10.0, 10.0, 401), [12.0]])
        V = np.full(402, 5000.0 + 0j)
        V[0] = V[-1] = 0.0
        grid = ProfileGrid(edges=edges, m=np.ones(402), V=V)
        with pytest.raises(EvanescentOverflow):
            transfer_scatter(grid, 1.0, Direction.LeftIncidence)


class TestConvergence:
    def test_richardson_reports_fine_run(self, well_grid):
        result = richardson_check(well_grid, 1.0, Direction.LeftIncidence, n=1000)
        assert result.n_slices == 2000
        assert 0 <= result.richardson_error < 1e-3
        assert result.T2_extrapolated == pytest.approx(result.T2, rel=1e-3)

    def test_not_converged_at_largest_grid(self, well_grid, monkeypatch):
        """
        Test that failing the tolerance raises only once the fine run reaches the slice cap.
        """
        monkeypatch.setattr("models.transfer.CONVERGENCE_TOLERANCE", 0.0)
        result = richardson_check(well_grid, 1.0, Direction.LeftIncidence, n=1000)
        assert result.richardson_error > 0
        monkeypatch.setattr("models.transfer.CONVERGENCE_SLICES", 2000)
        with pytest.raises(NotConverged):
            richardson_check(well_grid, 1.0, Direction.LeftIncidence, n=1000)

    @pytest.mark.slow
    def test_second_order(self, well_grid):
        assert convergence_order(well_grid, 1.0, Direction.LeftIncidence) >= 1.9

    def test_order_needs_three_counts(self, well_grid):
        with pytest.raises(InvalidGrid):
            convergence_order(well_grid, 1.0, Direction.LeftIncidence, slice_counts=(1000, 2000))

    @pytest.mark.slow
    @pytest.mark.parametrize("E", [0.05, 0.5, 1.0, 2.0, 3.0])
    def test_agrees_with_analytic(self, well_params, E):
        """
        Test that the extrapolated oracle reproduces the closed-form intensities.
        """
        solver = TransferMatrixSolver(well_params, 20_000)
        assert solver.solver_kind == SolverKind.Oracle
        for direction in Direction:
            oracle = solver.scatter(E, direction)
            analytic = match_and_scatter(E, well_params, direction)
            assert oracle.T2_extrapolated == pytest.approx(analytic.T2, rel=1e-6)
            assert oracle.R2_extrapolated == pytest.approx(analytic.R2, rel=1e-6, abs=1e-9)

    @pytest.mark.slow
    def test_agrees_with_analytic_across_sweep(self, well_params):
        """
        Test both intensities and both incidences on 50 energies at 1e5 slices.
        """
        solver = TransferMatrixSolver(well_params, 100_000)
        for E in np.linspace(0.05, 3.0, 50):
            for oracle in solver.scatter_both(float(E)):
                analytic = match_and_scatter(float(E), well_params, oracle.direction)
                assert oracle.richardson_error < 1e-5
                assert oracle.T2_extrapolated == pytest.approx(analytic.T2, rel=1e-6)
                assert oracle.R2_extrapolated == pytest.approx(analytic.R2, rel=1e-6, abs=1e-9)

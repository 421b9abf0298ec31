import math

import numpy as np
import pytest
from pydantic import ValidationError

from errors import InvalidGrid, SubThresholdEnergy
from models.heterojunction import (
    ModelParams,
    ProfileGrid,
    PTPhase,
    derive,
    effective_potential,
    mass_at,
    potential_at,
    pt_phase_classify,
    published_V1,
    rho_of_z,
    sample_profile,
    scarf_strengths,
    symmetric_points,
    transformed_potential,
)


@pytest.fixture
def well_grid(well_params):
    """
    Fixture providing a coarse model grid of the well.
    """
    return sample_profile(well_params, 200)


class TestModelParams:
    def test_exterior_values(self, well_params):
        assert well_params.m0 == 16.0 / 34.0
        assert well_params.V0 == -3.0 / 17.0
        assert well_params.threshold == 1.0 / 64.0

    @pytest.mark.parametrize(
        "overrides",
        [{"beta": 0.0}, {"a0": -1.0}, {"mu2": -0.5}, {"gamma": 1.0}],
    )
    def test_invalid(self, overrides):
        """
        Test that non-positive scales, negative gain and unknown fields are rejected.
        """
        values = {"mu1": 1.0, "mu2": 1.0, "beta": 1.0, "a0": 1.0, **overrides}
        with pytest.raises(ValidationError):
            ModelParams(**values)


class TestProfiles:
    def test_values_at_origin(self, well_params):
        assert mass_at(0.0, well_params) == 8.0
        assert potential_at(0.0, well_params) == -3.0 + 0j

    def test_exterior_is_constant(self, well_params):
        z = np.array([-9.0, -4.0, 4.0, 4.5, 100.0])
        np.testing.assert_array_equal(mass_at(z, well_params), well_params.m0)
        V = potential_at(z, well_params)
        np.testing.assert_array_equal(V.real, well_params.V0)
        np.testing.assert_array_equal(V.imag, 0.0)

    def test_pt_symmetry(self, well_params):
        """
        Test that m is even and V(-z) = conj V(z) exactly on mirrored samples.
        """
        z = symmetric_points(6.0, 1001)
        m = mass_at(z, well_params)
        V = potential_at(z, well_params)
        np.testing.assert_array_equal(m, m[::-1])
        np.testing.assert_array_equal(V, np.conj(V[::-1]))

    def test_real_potential_continuous_at_junction(self, well_params):
        """
        Test that only Re V is continuous across the junctions.
        """
        inside = potential_at(4.0 - 1e-12, well_params)
        outside = potential_at(4.0, well_params)
        assert inside.real == pytest.approx(outside.real, abs=1e-11)
        assert inside.imag == pytest.approx(3.0 * 4.0 / 17.0, rel=1e-9)
        assert outside.imag == 0.0

    def test_rho(self, well_params):
        assert rho_of_z(4.0, well_params) == pytest.approx(4.0 * math.asinh(4.0), rel=1e-15)
        z = symmetric_points(8.0, 401)
        rho = rho_of_z(z, well_params)
        np.testing.assert_allclose(rho, -rho[::-1], rtol=0, atol=1e-14)
        assert np.all(np.diff(rho) > 0)

    def test_transformed_matches_effective(self, well_params):
        """
        Test that the mass-derivative form of the potential equals the Scarf form.
        """
        rng = np.random.default_rng(7)
        z = rng.uniform(-well_params.a0, well_params.a0, 1000)
        np.testing.assert_allclose(
            transformed_potential(z, well_params),
            effective_potential(np.arcsinh(z), well_params),
            rtol=0,
            atol=1e-10,
        )

    def test_scarf_strengths(self, well_params):
        assert scarf_strengths(well_params) == (47.75, 48.0)
        assert published_V1(well_params) == 48.25


class TestDerive:
    def test_well_parameters(self, well_params):
        d = derive(well_params, 1.0)
        assert d.p == pytest.approx(0.25 + 0.5 * math.sqrt(96.0), rel=1e-15)
        assert d.q == pytest.approx(0.25, abs=1e-15)
        assert d.kappa == pytest.approx(math.sqrt(15.75), rel=1e-15)
        assert d.k == pytest.approx(math.sqrt(2 * well_params.m0 * (1.0 - well_params.V0)), rel=1e-15)
        assert d.a + d.b == pytest.approx(2 * (d.p + d.q), abs=1e-14)
        assert d.c == pytest.approx(2 * d.p + 0.5, abs=1e-14)

    def test_barrier_parameters(self, barrier_params):
        """
        Test that the barrier has c = 2 and a complex exponent q.
        """
        d = derive(barrier_params, 1.0)
        assert d.p == pytest.approx(0.75, abs=1e-15)
        assert d.c == pytest.approx(2.0, abs=1e-15)
        assert d.q == pytest.approx(0.25 + 0.5j * math.sqrt(3.0), abs=1e-15)

    def test_threshold(self, well_params):
        assert derive(well_params, 1.0 / 64.0).kappa == 0.0

    def test_below_threshold(self, well_params):
        with pytest.raises(SubThresholdEnergy):
            derive(well_params, 0.01)

    def test_below_exterior_potential(self):
        """
        Test that energies at or below V0 are refused even above 1/(4 beta^2).
        """
        params = ModelParams(mu1=-17.0, mu2=0.0, beta=4.0, a0=4.0)
        assert params.V0 == 1.0
        with pytest.raises(SubThresholdEnergy):
            derive(params, 0.5)
        with pytest.raises(SubThresholdEnergy):
            derive(params, 1.0)


class TestPTPhase:
    def test_exact(self, well_params):
        classification = pt_phase_classify(well_params)
        assert classification.phase == PTPhase.ExactPT
        assert not classification.boundary
        assert classification.margin == pytest.approx(1.0 / 32.0)

    def test_broken(self, barrier_params):
        assert pt_phase_classify(barrier_params).phase == PTPhase.BrokenPT

    def test_boundary_counts_as_broken(self):
        """
        Test that equality in the phase inequality is flagged and classified as broken.
        """
        classification = pt_phase_classify(ModelParams(mu1=0.5, mu2=1.0, beta=1.0, a0=2.0))
        assert classification.boundary
        assert classification.phase == PTPhase.BrokenPT


class TestProfileGrid:
    def test_sample_counts(self, well_params, well_grid):
        assert well_grid.interior_slices == 200
        assert len(well_grid.m) == 200 + 16
        assert len(well_grid.edges) == len(well_grid.m) + 1
        assert well_grid.edges[0] == -6.0
        assert well_grid.edges[-1] == 6.0
        assert well_grid.params == well_params

    def test_sample_is_mirror_symmetric(self, well_grid):
        np.testing.assert_array_equal(well_grid.edges, -well_grid.edges[::-1])
        np.testing.assert_array_equal(well_grid.m, well_grid.m[::-1])
        np.testing.assert_array_equal(well_grid.V, np.conj(well_grid.V[::-1]))

    def test_sample_exterior(self, well_params, well_grid):
        np.testing.assert_array_equal(well_grid.m[:8], well_params.m0)
        np.testing.assert_array_equal(well_grid.V[-8:], well_params.V0 + 0j)

    def test_reversed(self, well_grid):
        """
        Test that mirroring a PT grid conjugates its potential.
        """
        mirrored = well_grid.reversed()
        np.testing.assert_array_equal(mirrored.edges, well_grid.edges)
        np.testing.assert_array_equal(mirrored.m, well_grid.m)
        np.testing.assert_array_equal(mirrored.V, np.conj(well_grid.V))

    def test_refined(self, well_params, well_grid):
        refined = well_grid.refined(400)
        assert refined.interior_slices == 400
        assert refined.params == well_params
        assert refined.edges[0] == well_grid.edges[0]

    def test_refined_raw_grid(self):
        grid = ProfileGrid(edges=np.array([0.0, 1.0, 2.0]), m=np.array([1.0, 3.0]), V=np.array([0j, 2j]))
        assert grid.interior_slices == 2
        refined = grid.refined(4)
        assert len(refined.m) == 4
        assert refined.m[0] == 1.0
        assert refined.V[-1] == 2j

    @pytest.mark.parametrize("n,padding", [(50, 2.0), (200, 0.0), (200, -1.0)])
    def test_sample_invalid(self, well_params, n, padding):
        with pytest.raises(InvalidGrid):
            sample_profile(well_params, n, padding)

    @pytest.mark.parametrize(
        "edges,m,V",
        [
            ([0.0, 1.0, 1.0], [1.0, 1.0], [0j, 0j]),
            ([0.0, 1.0, 2.0], [1.0], [0j, 0j]),
            ([0.0, 1.0, 2.0], [1.0, -1.0], [0j, 0j]),
            ([0.0, 1.0, 2.0], [1.0, 1.0], [0j, complex("nan")]),
        ],
    )
    def test_grid_invariants(self, edges, m, V):
        """
        Test that malformed slicings are refused.
        """
        with pytest.raises(InvalidGrid):
            ProfileGrid(edges=np.array(edges), m=np.array(m), V=np.array(V))

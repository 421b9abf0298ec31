"""
Transfer-matrix oracle for arbitrary sliced profiles.

Each slice has constant mass and potential, so the state (psi, psi'/m) propagates across
a slice of width d exactly by

    [[cos kd, (m/k) sin kd], [-(k/m) sin kd, cos kd]],

and continuity of psi and psi'/m at every interface is automatic in this state. The
slice product is formed by pairwise reduction with every partial product normalised to
unit max entry, so deeply evanescent stacks only overflow the accumulated log scale.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import Field

from errors import EvanescentOverflow, InvalidGrid, NotConverged, SubThresholdEnergy
from models.base import Direction, PhysicsModel, ScatteringResult, ScatteringSolver, SolverKind
from models.heterojunction import ModelParams, ProfileGrid, sample_profile

logger = logging.getLogger(__name__)

DEFAULT_SLICES = 100_000
CONVERGENCE_TOLERANCE = 1e-5
CONVERGENCE_SLICES = 1_000_000
MAX_LOG10_SCALE = 300.0


class SliceStack(PhysicsModel):
    """
    Piecewise-constant layers of a profile at one energy.
    """

    boundaries: np.ndarray = Field(..., description="Interface positions")
    m: np.ndarray = Field(..., description="Mass per slice")
    V: np.ndarray = Field(..., description="Complex potential per slice")
    k: np.ndarray = Field(..., description="Local wavenumber, Im k >= 0")

    @classmethod
    def from_grid(cls, grid: ProfileGrid, E: float) -> "SliceStack":
        """
        Local wavenumbers at energy E, on the decaying branch for evanescent slices.
        """
        k = np.sqrt(2.0 * grid.m * (E - grid.V) + 0j)
        k = np.where(k.imag < 0, -k, k)
        return cls(boundaries=grid.edges, m=grid.m, V=grid.V, k=k)

    def slice_matrices(self) -> np.ndarray:
        """
        Per-slice matrices acting on (psi, psi'/m), shape (n, 2, 2).
        """
        d = np.diff(self.boundaries)
        kd = self.k * d
        cos = np.cos(kd)
        # sin(kd)/k with the k -> 0 limit d
        sin_over_k = d * np.sinc(kd / np.pi)
        matrices = np.empty((len(d), 2, 2), dtype=complex)
        matrices[:, 0, 0] = cos
        matrices[:, 0, 1] = self.m * sin_over_k
        matrices[:, 1, 0] = -(self.k**2 / self.m) * sin_over_k
        matrices[:, 1, 1] = cos
        return matrices


class TransferResult(ScatteringResult):
    """
    Oracle amplitudes with their convergence diagnostics.
    """

    n_slices: int = Field(..., description="Interior slice count of the run")
    richardson_error: float = Field(0.0, ge=0, description="Change of |R|^2, |T|^2 from n to 2n over |R|^2 + |T|^2")
    R2_extrapolated: Optional[float] = Field(None, description="Second-order extrapolated |R|^2")
    T2_extrapolated: Optional[float] = Field(None, description="Second-order extrapolated |T|^2")


def scaled_product(matrices: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Ordered product M[n-1] ... M[1] M[0] as (normalised matrix, natural log of its scale).
    """
    product = matrices.copy()
    log_scale = np.zeros(len(product))
    while len(product) > 1:
        if len(product) % 2:
            product = np.concatenate([product, np.eye(2, dtype=complex)[None]])
            log_scale = np.concatenate([log_scale, [0.0]])
        product = product[1::2] @ product[0::2]
        log_scale = log_scale[1::2] + log_scale[0::2]
        norms = np.max(np.abs(product), axis=(1, 2))
        product /= norms[:, None, None]
        log_scale += np.log(norms)
    return product[0], float(log_scale[0])


def _left_incidence(grid: ProfileGrid, E: float) -> Tuple[complex, complex]:
    """
    R and flux-normalised T for a wave entering from the left end of the grid.
    """
    if E <= grid.V[0].real or E <= grid.V[-1].real:
        raise SubThresholdEnergy(
            f"E={E} does not exceed the exterior potentials {grid.V[0].real}, {grid.V[-1].real}"
        )
    stack = SliceStack.from_grid(grid, E)
    matrix, log_scale = scaled_product(stack.slice_matrices())
    if not math.isfinite(log_scale) or log_scale / math.log(10.0) > MAX_LOG10_SCALE:
        raise EvanescentOverflow(
            f"Transfer product at E={E} reaches 1e{log_scale / math.log(10.0):.0f}"
        )

    k_left, m_left = stack.k[0], stack.m[0]
    k_right, m_right = stack.k[-1], stack.m[-1]
    z_left, z_right = grid.edges[0], grid.edges[-1]

    incoming = np.exp(1j * k_left * z_left) * np.array([1.0, 1j * k_left / m_left])
    reflected = np.exp(-1j * k_left * z_left) * np.array([1.0, -1j * k_left / m_left])
    outgoing = np.exp(1j * k_right * z_right) * np.array([1.0, 1j * k_right / m_right])

    # R M~ reflected - T' outgoing = -M~ incoming, with T = T' exp(log_scale)
    system = np.column_stack([matrix @ reflected, -outgoing])
    R, T_scaled = np.linalg.solve(system, -(matrix @ incoming))
    T = T_scaled * math.exp(log_scale)
    flux_ratio = (k_right.real / m_right) / (k_left.real / m_left)
    return complex(R), complex(T * math.sqrt(flux_ratio))


def transfer_scatter(
    grid: ProfileGrid, E: float, direction: Direction, n: Optional[int] = None
) -> TransferResult:
    """
    Scattering amplitudes of a sliced profile, phase-referenced to z = 0.

    Right incidence is left incidence on the mirrored grid. When the exteriors differ,
    T is normalised so that |T|^2 is the transmitted flux fraction.
    """
    if n is not None and n != grid.interior_slices:
        grid = grid.refined(n)
    if direction == Direction.LeftIncidence:
        R, T = _left_incidence(grid, E)
    else:
        R, T = _left_incidence(grid.reversed(), E)
    return TransferResult(
        direction=direction,
        energy=E,
        R=R,
        T=T,
        n_slices=grid.interior_slices,
    )


def _richardson_error(fine: TransferResult, coarse: TransferResult) -> float:
    # relative to the total intensity; a vanishing |R|^2 has no scale of its own
    scale = max(fine.R2 + fine.T2, coarse.R2 + coarse.T2)
    return max(abs(fine.R2 - coarse.R2), abs(fine.T2 - coarse.T2)) / scale


def _richardson(
    coarse_grid: ProfileGrid, fine_grid: ProfileGrid, E: float, direction: Direction
) -> TransferResult:
    coarse = transfer_scatter(coarse_grid, E, direction)
    fine = transfer_scatter(fine_grid, E, direction)
    error = _richardson_error(fine, coarse)
    if error > CONVERGENCE_TOLERANCE:
        if fine_grid.interior_slices >= CONVERGENCE_SLICES:
            raise NotConverged(error, fine_grid.interior_slices)
        logger.warning(
            "Oracle at E=%s (%s) changed by %.3e between %d and %d slices",
            E,
            direction.value,
            error,
            coarse.n_slices,
            fine.n_slices,
        )
    return fine.model_copy(
        update={
            "richardson_error": error,
            "R2_extrapolated": fine.R2 + (fine.R2 - coarse.R2) / 3.0,
            "T2_extrapolated": fine.T2 + (fine.T2 - coarse.T2) / 3.0,
        }
    )


def richardson_check(
    grid: ProfileGrid, E: float, direction: Direction, n: Optional[int] = None
) -> TransferResult:
    """
    Run at n and 2n slices and report the 2n amplitudes with the change of |R|^2 and
    |T|^2 relative to |R|^2 + |T|^2, and their second-order extrapolation.

    Raises NotConverged only when the 2n run already has at least a million slices.
    """
    n = n if n is not None else grid.interior_slices
    coarse = grid if n == grid.interior_slices else grid.refined(n)
    return _richardson(coarse, grid.refined(2 * n), E, direction)


def convergence_order(
    grid: ProfileGrid,
    E: float,
    direction: Direction,
    slice_counts: Sequence[int] = (1000, 2000, 4000, 8000),
) -> float:
    """
    Empirical order p of the oracle error, from a least-squares fit of
    log max(|dR|, |dT|) between consecutive slice counts against log n.
    """
    if len(slice_counts) < 3:
        raise InvalidGrid("Order fit needs at least three slice counts")
    results = [transfer_scatter(grid, E, direction, n) for n in slice_counts]
    changes = [
        max(abs(b.R - a.R), abs(b.T - a.T)) for a, b in zip(results[:-1], results[1:])
    ]
    slope, _ = np.polyfit(np.log(slice_counts[:-1]), np.log(changes), 1)
    return float(-slope)


class TransferMatrixSolver(ScatteringSolver[TransferResult]):
    """
    Oracle bound to one parameter set, reporting Richardson-checked results.
    """

    solver_kind = SolverKind.Oracle
    result_model = TransferResult

    def __init__(self, params: ModelParams, n: int = DEFAULT_SLICES, padding: float = 2.0) -> None:
        super().__init__(params)
        self.grid = sample_profile(params, n, padding)
        self.fine_grid = sample_profile(params, 2 * n, padding)

    def scatter(self, energy: float, direction: Direction) -> TransferResult:
        return _richardson(self.grid, self.fine_grid, energy, direction)

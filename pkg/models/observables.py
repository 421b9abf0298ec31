"""
Scattering observables built on the analytic solver and the transfer-matrix oracle.

PT-current. For m(-z) = m(z) and V(-z) = conj V(z), both conj(psi(z)) and psi(-z) solve
the stationary equation -(1/2)(u'/m)' + conj(V) u = E u when psi solves it with V at a
real energy E. For two solutions u, v of the same equation, (u v' - u' v)/m is constant.
Taking u = conj(psi(z)) and v = psi(-z), with v'(z) = -psi'(-z), gives the constant

    J(z) = (i / (2 m(z))) [conj(psi'(z)) psi(-z) + conj(psi(z)) psi'(-z)].

The other ordering, with parity applied after differentiation, flips the sign of the
second term and is not constant even for a free plane wave. In rho = beta asinh(z) the
current of phi = (2m)^(-1/4) psi carries extra terms proportional to m'(z) psi(z) psi(-z)
and m'(-z) psi(z) psi(-z); they cancel because m' is odd, so the rho-space current equals
J above exactly. A current normalised by 1/sqrt(2m) instead would not be constant where
m varies. Outside the junctions a left-incidence state has J = k conj(T) R / m0, which
is purely imaginary because conj(T) R is.

Generalised unitarity. The same Wronskian argument with u = conj(psi_left(z)) and
v = psi_right(-z) gives |T|^2 + conj(R_left) R_right = 1, which replaces flux
conservation |R|^2 + |T|^2 = 1 when mu2 != 0.
"""

import functools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import Field
from scipy.optimize import minimize_scalar

from errors import (
    AsymmetricGrid,
    BrokenPTPhase,
    InvalidParameters,
    NoPeakFound,
    PdemScatterError,
)
from models.analytic import match_and_scatter, wavefunction_with_derivative
from models.base import Direction, PhysicsModel, SolverKind
from models.heterojunction import (
    ModelParams,
    PTPhase,
    mass_at,
    pt_phase_classify,
    published_V1,
    scarf_strengths,
)
from models.transfer import DEFAULT_SLICES, CONVERGENCE_TOLERANCE, TransferMatrixSolver

logger = logging.getLogger(__name__)

CONDITION_FLAG_LIMIT = 1e8
SCAN_POINTS = 400
DEFAULT_PEAK_THRESHOLD = 100.0
DEFAULT_REFINEMENT_TOL = 1e-8
MIRROR_TOLERANCE = 1e-12


class SolverChoice(str, Enum):
    analytic = "analytic"
    oracle = "oracle"
    both = "both"

    @property
    def kinds(self) -> List[SolverKind]:
        if self == SolverChoice.analytic:
            return [SolverKind.Analytic]
        if self == SolverChoice.oracle:
            return [SolverKind.Oracle]
        return [SolverKind.Analytic, SolverKind.Oracle]


class SweepRow(PhysicsModel):
    """
    Left and right incidence intensities at one energy from one solver.
    """

    energy: float = Field(..., description="Scattering energy")
    T2: float = Field(..., description="|T|^2, left incidence")
    R2_left: float = Field(..., description="|R|^2 for left incidence")
    R2_right: float = Field(..., description="|R|^2 for right incidence")
    flux_deficit: float = Field(..., description="|R_left|^2 + |T|^2 - 1")
    solver: SolverKind = Field(..., description="Solver that produced the row")
    condition_flag: bool = Field(False, description="Ill-conditioned or unconverged row")
    T2_mismatch: float = Field(0.0, description="| |T_left|^2 - |T_right|^2 |")
    failed: bool = Field(False, description="Solver raised for this row")


class TransmissionScan(PhysicsModel):
    energies: np.ndarray
    T2: np.ndarray
    R2_left: np.ndarray
    R2_right: np.ndarray


class SingularityReport(PhysicsModel):
    """
    Located transmission peak and the closed-form estimates it is compared against.
    """

    E_located: float = Field(..., description="Refined peak energy")
    peak_T2: float = Field(..., description="|T|^2 at the peak")
    peak_R2_left: float = Field(..., description="|R|^2 for left incidence at the peak")
    peak_R2_right: float = Field(..., description="|R|^2 for right incidence at the peak")
    E_linear: float = Field(..., description="(mu2 - mu1) beta^2 / 4 - 1/8")
    E_squared: float = Field(..., description="Squared Scarf reading with the published V1")
    E_mapped: float = Field(..., description="Linear bracket with corrected V1, read as kappa^2")
    window: Tuple[float, float] = Field(..., description="Scanned energy interval")
    refinement_tol: float = Field(..., description="Tolerance of the peak refinement in E")


class PTCurrentTrace(PhysicsModel):
    z: np.ndarray = Field(..., description="Sample positions, mirror-symmetric")
    J: np.ndarray = Field(..., description="PT-current samples")
    omega: np.ndarray = Field(..., description="PT charge density conj(psi(z)) psi(-z)")
    J_mean: complex = Field(..., description="Mean of J over the samples")
    spread: float = Field(..., ge=0, description="Relative spread of J, absolute when J_mean ~ 0")


class FluxTrace(PhysicsModel):
    z: np.ndarray
    j: np.ndarray = Field(..., description="(1/m) Im(conj(psi) psi')")
    spread: float = Field(..., ge=0)


class NonlinearityMetric(PhysicsModel):
    """
    Relative spread of zero-crossing spacings of Re psi inside and outside the junctions.
    """

    interior_spread: Optional[float] = None
    exterior_spread: Optional[float] = None


def _spread(values: np.ndarray) -> Tuple[complex, float]:
    mean = complex(np.mean(values))
    deviation = float(np.max(np.abs(values - mean))) if len(values) else 0.0
    if abs(mean) > 1e-14:
        return mean, deviation / abs(mean)
    return mean, deviation


@functools.lru_cache(maxsize=4)
def _oracle(params: ModelParams, slices: int, padding: float) -> TransferMatrixSolver:
    return TransferMatrixSolver(params, slices, padding)


def _failed_row(E: float, kind: SolverKind) -> SweepRow:
    nan = float("nan")
    return SweepRow(
        energy=E,
        T2=nan,
        R2_left=nan,
        R2_right=nan,
        flux_deficit=nan,
        solver=kind,
        condition_flag=True,
        T2_mismatch=nan,
        failed=True,
    )


def sweep_row(
    params: ModelParams,
    E: float,
    kind: SolverKind,
    slices: int = DEFAULT_SLICES,
    padding: float = 2.0,
) -> SweepRow:
    """
    One sweep row; solver errors produce a failed row instead of raising.
    """
    try:
        if kind == SolverKind.Analytic:
            left = match_and_scatter(E, params, Direction.LeftIncidence)
            right = match_and_scatter(E, params, Direction.RightIncidence)
            T2, R2_left, R2_right = left.T2, left.R2, right.R2
            condition = max(left.condition or 0.0, right.condition or 0.0)
            flagged = condition > CONDITION_FLAG_LIMIT
            mismatch = abs(left.T2 - right.T2)
        else:
            oracle = _oracle(params, slices, padding)
            left_o, right_o = oracle.scatter_both(E)
            T2 = left_o.T2_extrapolated if left_o.T2_extrapolated is not None else left_o.T2
            R2_left = left_o.R2_extrapolated if left_o.R2_extrapolated is not None else left_o.R2
            R2_right = (
                right_o.R2_extrapolated if right_o.R2_extrapolated is not None else right_o.R2
            )
            flagged = max(left_o.richardson_error, right_o.richardson_error) > CONVERGENCE_TOLERANCE
            mismatch = abs(left_o.T2 - right_o.T2)
    except (PdemScatterError, np.linalg.LinAlgError) as exc:
        logger.warning("Sweep row at E=%s (%s) failed: %s", E, kind.value, exc)
        return _failed_row(E, kind)

    return SweepRow(
        energy=E,
        T2=T2,
        R2_left=R2_left,
        R2_right=R2_right,
        flux_deficit=R2_left + T2 - 1.0,
        solver=kind,
        condition_flag=flagged,
        T2_mismatch=mismatch,
    )


def _sweep_task(task: Tuple[ModelParams, float, SolverKind, int, float]) -> SweepRow:
    return sweep_row(*task)


def sweep(
    params: ModelParams,
    E_min: float,
    E_max: float,
    n_points: int,
    solver: SolverChoice = SolverChoice.analytic,
    slices: int = DEFAULT_SLICES,
    padding: float = 2.0,
    workers: int = 1,
) -> List[SweepRow]:
    """
    Rows on a uniform energy grid, energy-major, one row per requested solver.

    Rows are independent; with workers > 1 they are computed in a process pool and
    returned in grid order.
    """
    if n_points < 2:
        raise InvalidParameters(f"Sweep needs at least 2 points, got {n_points}")
    if not E_max > E_min:
        raise InvalidParameters(f"E_max={E_max} must exceed E_min={E_min}")
    if E_min < 1.0 / (4.0 * params.beta**2) or E_min <= params.V0:
        raise InvalidParameters(
            f"E_min={E_min} is below the scattering threshold {params.threshold}"
        )

    energies = np.linspace(E_min, E_max, n_points)
    tasks = [
        (params, float(E), kind, slices, padding) for E in energies for kind in solver.kinds
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_sweep_task(task) for task in tasks]

    failed = sum(row.failed for row in rows)
    logger.info("Sweep produced %d rows, %d failed", len(rows), failed)
    return rows


def handedness_window(rows: Sequence[SweepRow]) -> List[float]:
    """
    Energies where left incidence reflects normally and right incidence amplifies.
    """
    return [
        row.energy
        for row in rows
        if not row.failed and row.R2_left < 1.0 < row.R2_right
    ]


def transmission_scan(params: ModelParams, energies: np.ndarray) -> TransmissionScan:
    """
    Analytic |T|^2 and both |R|^2 on an energy grid, with the condition check off.
    """
    T2 = np.full(len(energies), np.nan)
    R2_left = np.full(len(energies), np.nan)
    R2_right = np.full(len(energies), np.nan)
    for i, E in enumerate(energies):
        try:
            left = match_and_scatter(float(E), params, Direction.LeftIncidence, check_condition=False)
            right = match_and_scatter(float(E), params, Direction.RightIncidence, check_condition=False)
        except (PdemScatterError, np.linalg.LinAlgError) as exc:
            logger.warning("Scan point E=%s failed: %s", E, exc)
            continue
        T2[i], R2_left[i], R2_right[i] = left.T2, left.R2, right.R2
    return TransmissionScan(energies=np.asarray(energies), T2=T2, R2_left=R2_left, R2_right=R2_right)


def singularity_estimates(params: ModelParams) -> Tuple[float, float, float]:
    """
    Closed-form spectral-singularity energies: the published linear formula, its squared
    reading with the published V1, and the linear bracket with the corrected V1 read as
    kappa^2 and mapped through E = (kappa^2 + 1/4)/beta^2.
    """
    beta2 = params.beta**2
    V1, V2 = scarf_strengths(params)
    E_linear = 0.25 * (params.mu2 - params.mu1) * beta2 - 0.125
    kappa_s = (V2 - published_V1(params) - 0.25) / 2.0
    E_squared = (kappa_s**2 + 0.25) / beta2
    E_mapped = (0.25 * (abs(V2) - V1 - 0.25) + 0.25) / beta2
    return E_linear, E_squared, E_mapped


def _inverse_transmission(E: float, params: ModelParams) -> float:
    try:
        T2 = match_and_scatter(E, params, Direction.LeftIncidence, check_condition=False).T2
    except (PdemScatterError, np.linalg.LinAlgError):
        return math.inf
    return 1.0 / T2 if T2 > 0 else math.inf


def locate_spectral_singularity(
    params: ModelParams,
    window: Tuple[float, float],
    peak_threshold: float = DEFAULT_PEAK_THRESHOLD,
    refinement_tol: float = DEFAULT_REFINEMENT_TOL,
    scan: Optional[TransmissionScan] = None,
) -> SingularityReport:
    """
    Scan |T|^2 on SCAN_POINTS energies, bracket the largest value and refine it by
    golden-section minimisation of 1/|T|^2.

    Because the potential is cut off at the junctions the singularity shows up as a
    finite resonance, so a peak counts once it exceeds peak_threshold.
    """
    if not params.mu1 < 0:
        raise InvalidParameters(f"Spectral singularity search needs a barrier, mu1={params.mu1}")
    if not params.mu2 > params.mu1 + 1.0 / (2.0 * params.beta**2):
        raise InvalidParameters(
            f"mu2={params.mu2} must exceed mu1 + 1/(2 beta^2)={params.mu1 + 1.0 / (2.0 * params.beta**2)}"
        )
    E_lo, E_hi = window
    if not E_hi > E_lo or E_lo < 1.0 / (4.0 * params.beta**2) or E_lo <= params.V0:
        raise InvalidParameters(f"Window {window} is not inside the scattering regime")

    energies = np.linspace(E_lo, E_hi, SCAN_POINTS)
    if scan is None or len(scan.energies) != SCAN_POINTS:
        scan = transmission_scan(params, energies)
    energies = scan.energies
    if np.all(np.isnan(scan.T2)):
        raise NoPeakFound(float("nan"), peak_threshold, window)
    i = int(np.nanargmax(scan.T2))
    peak = float(scan.T2[i])
    if peak < peak_threshold:
        raise NoPeakFound(peak, peak_threshold, window)

    lo, hi = energies[max(i - 1, 0)], energies[min(i + 1, SCAN_POINTS - 1)]
    if 0 < i < SCAN_POINTS - 1:
        result = minimize_scalar(
            _inverse_transmission,
            bracket=(lo, energies[i], hi),
            args=(params,),
            method="golden",
            options={"xtol": refinement_tol / max(abs(energies[i]), 1.0)},
        )
    else:
        result = minimize_scalar(
            _inverse_transmission,
            bounds=(lo, hi),
            args=(params,),
            method="bounded",
            options={"xatol": refinement_tol},
        )
    E_located = float(np.clip(result.x, E_lo, E_hi))
    if not E_located > 1.0 / (4.0 * params.beta**2) or _inverse_transmission(E_located, params) > 1.0 / peak:
        E_located = float(energies[i])

    left = match_and_scatter(E_located, params, Direction.LeftIncidence, check_condition=False)
    right = match_and_scatter(E_located, params, Direction.RightIncidence, check_condition=False)
    E_linear, E_squared, E_mapped = singularity_estimates(params)
    logger.info("Located transmission peak |T|^2=%.6g at E=%.10g", left.T2, E_located)
    return SingularityReport(
        E_located=E_located,
        peak_T2=left.T2,
        peak_R2_left=left.R2,
        peak_R2_right=right.R2,
        E_linear=E_linear,
        E_squared=E_squared,
        E_mapped=E_mapped,
        window=(E_lo, E_hi),
        refinement_tol=refinement_tol,
    )


def pt_current(
    psi: np.ndarray, dpsi: np.ndarray, m: np.ndarray, mirror: np.ndarray
) -> np.ndarray:
    """
    J(z) = (i / (2 m(z))) [conj(psi'(z)) psi(-z) + conj(psi(z)) psi'(-z)], where mirror[i]
    is the index of -z[i].
    """
    return 1j / (2.0 * m) * (np.conj(dpsi) * psi[mirror] + np.conj(psi) * dpsi[mirror])


def _mirror_indices(z: np.ndarray) -> np.ndarray:
    """
    Index of -z[i] for every sample; AsymmetricGrid when a mirror point is missing.
    """
    order = np.argsort(z)
    ordered = z[order]
    scale = max(float(np.max(np.abs(z))), 1.0) if len(z) else 1.0
    if not np.allclose(ordered, -ordered[::-1], rtol=0.0, atol=MIRROR_TOLERANCE * scale):
        raise AsymmetricGrid("Sample grid is not symmetric about z = 0")
    mirror = np.empty(len(z), dtype=int)
    mirror[order] = order[::-1]
    return mirror


def pt_current_trace(
    E: float, params: ModelParams, direction: Direction, z_grid: np.ndarray
) -> PTCurrentTrace:
    """
    PT-current and charge density of a scattering state on a mirror-symmetric grid.
    """
    classification = pt_phase_classify(params)
    if classification.phase != PTPhase.ExactPT:
        raise BrokenPTPhase(
            f"mu2={params.mu2} breaks PT symmetry (margin {classification.margin:.6g})"
        )
    z = np.asarray(z_grid, dtype=float)
    mirror = _mirror_indices(z)
    psi, dpsi = wavefunction_with_derivative(E, params, direction, z)
    m = np.asarray(mass_at(z, params))

    J = pt_current(psi, dpsi, m, mirror)
    omega = np.conj(psi) * psi[mirror]
    J_mean, spread = _spread(J)
    logger.info("PT-current at E=%s (%s): mean %s, spread %.3e", E, direction.value, J_mean, spread)
    return PTCurrentTrace(z=z, J=J, omega=omega, J_mean=J_mean, spread=spread)


def flux_trace(
    E: float, params: ModelParams, direction: Direction, z_grid: np.ndarray
) -> FluxTrace:
    """
    Probability current (1/m) Im(conj(psi) psi'); constant only in the Hermitian case.
    """
    z = np.asarray(z_grid, dtype=float)
    psi, dpsi = wavefunction_with_derivative(E, params, direction, z)
    j = np.imag(np.conj(psi) * dpsi) / np.asarray(mass_at(z, params))
    _, spread = _spread(j)
    return FluxTrace(z=z, j=j, spread=spread)


def generalized_unitarity(E: float, params: ModelParams) -> complex:
    """
    Residual |T|^2 + conj(R_left) R_right - 1.
    """
    left = match_and_scatter(E, params, Direction.LeftIncidence)
    right = match_and_scatter(E, params, Direction.RightIncidence)
    return left.T2 + left.R.conjugate() * right.R - 1.0


def _crossing_spacings(z: np.ndarray, values: np.ndarray) -> np.ndarray:
    signs = np.signbit(values)
    idx = np.nonzero(signs[1:] != signs[:-1])[0]
    # linear interpolation of each crossing
    crossings = z[idx] - values[idx] * (z[idx + 1] - z[idx]) / (values[idx + 1] - values[idx])
    return np.diff(crossings)


def _relative_std(spacings: np.ndarray) -> Optional[float]:
    if len(spacings) < 2:
        return None
    return float(np.std(spacings) / np.mean(spacings))


def phase_nonlinearity(z: np.ndarray, psi: np.ndarray, a0: float) -> NonlinearityMetric:
    """
    Local-wavelength variation of Re psi, split at the junctions.
    """
    re = np.real(psi)
    inside = np.abs(z) < a0
    interior = _crossing_spacings(z[inside], re[inside])
    left = _crossing_spacings(z[z <= -a0], re[z <= -a0])
    right = _crossing_spacings(z[z >= a0], re[z >= a0])
    return NonlinearityMetric(
        interior_spread=_relative_std(interior),
        exterior_spread=_relative_std(np.concatenate([left, right])),
    )

import cmath
import logging
from typing import Optional, Tuple

import numpy as np
from pydantic import Field

from errors import IllConditionedMatching
from models.base import Direction, PhysicsModel, ScatteringResult, ScatteringSolver, SolverKind
from models.heterojunction import DerivedParams, ModelParams, derive, mass_at
from specfun import hyp2f1, hyp2f1_derivative

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12


class InteriorBasisValue(PhysicsModel):
    """
    Values and z-derivatives of the two interior solutions at one point.
    """

    z: float = Field(..., description="Interior position")
    psi1: complex = Field(..., description="First basis solution")
    dpsi1: complex = Field(..., description="z-derivative of the first basis solution")
    psi2: complex = Field(..., description="Second basis solution")
    dpsi2: complex = Field(..., description="z-derivative of the second basis solution")


def _power(base: complex, exponent: complex) -> complex:
    return cmath.exp(exponent * cmath.log(base))


def interior_basis(
    z: float, E: float, params: ModelParams, derived: Optional[DerivedParams] = None
) -> InteriorBasisValue:
    """
    Interior solutions on the real axis, with y = (1 + iz)/2:

        psi = beta^(1/2) 2^-(p+q) (1 + iz)^(p - 1/4) (1 - iz)^(q - 1/4) u(y),

    and u is the solution regular at y = 0, 2F1(a, b; c; y), or the one regular at
    y = 1, 2F1(a, b; a+b-c+1; 1-y). Re c and Re(a+b-c+1) are at least 1 and Re a > 0,
    so the pair is defined and independent even where c or c-a-b is an integer.
    Both 1 + iz and 1 - iz have real part 1, so principal powers are smooth in z.
    """
    d = derived if derived is not None else derive(params, E)
    p, q, a, b, c = d.p, d.q, d.a, d.b, d.c
    one_plus = 1 + 1j * z
    one_minus = 1 - 1j * z
    y = one_plus / 2

    prefactor = (
        params.beta**0.5
        * _power(2.0, -(p + q))
        * _power(one_plus, p - 0.25)
        * _power(one_minus, q - 0.25)
    )
    log_slope = 1j * (p - 0.25) / one_plus - 1j * (q - 0.25) / one_minus

    # dy/dz = i/2
    f = hyp2f1(a, b, c, y)
    df = hyp2f1_derivative(a, b, c, y)
    g = hyp2f1(a, b, a + b - c + 1, 1 - y)
    dg = hyp2f1_derivative(a, b, a + b - c + 1, 1 - y)
    psi1 = prefactor * f
    dpsi1 = prefactor * (log_slope * f + 0.5j * df)
    psi2 = prefactor * g
    dpsi2 = prefactor * (log_slope * g - 0.5j * dg)

    return InteriorBasisValue(z=z, psi1=psi1, dpsi1=dpsi1, psi2=psi2, dpsi2=dpsi2)


def weighted_wronskian(
    z: float, E: float, params: ModelParams, derived: Optional[DerivedParams] = None
) -> complex:
    """
    (psi1 psi2' - psi2 psi1') / m(z), constant along the interior.
    """
    v = interior_basis(z, E, params, derived)
    return (v.psi1 * v.dpsi2 - v.psi2 * v.dpsi1) / float(mass_at(z, params))


def _matching_system(
    d: DerivedParams,
    left: InteriorBasisValue,
    right: InteriorBasisValue,
    a0: float,
    direction: Direction,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Continuity of psi and psi'/m at -a0 and +a0, unknowns ordered (P, Q, R, T).

    Left incidence: e^(ikz) + R e^(-ikz) on the left, T e^(ikz) on the right.
    Right incidence: T e^(-ikz) on the left, e^(-ikz) + R e^(ikz) on the right.
    """
    k, m0 = d.k, d.m0
    outgoing = cmath.exp(1j * k * a0)
    incoming = cmath.exp(-1j * k * a0)
    ik = 1j * k / m0

    A = np.zeros((4, 4), dtype=complex)
    rhs = np.zeros(4, dtype=complex)
    A[0, :2] = left.psi1, left.psi2
    A[1, :2] = left.dpsi1 / m0, left.dpsi2 / m0
    A[2, :2] = right.psi1, right.psi2
    A[3, :2] = right.dpsi1 / m0, right.dpsi2 / m0

    if direction == Direction.LeftIncidence:
        A[0, 2] = -outgoing
        A[1, 2] = ik * outgoing
        A[2, 3] = -outgoing
        A[3, 3] = -ik * outgoing
        rhs[0] = incoming
        rhs[1] = ik * incoming
    else:
        A[0, 3] = -outgoing
        A[1, 3] = ik * outgoing
        A[2, 2] = -outgoing
        A[3, 2] = -ik * outgoing
        rhs[2] = incoming
        rhs[3] = -ik * incoming
    return A, rhs


def match_and_scatter(
    E: float,
    params: ModelParams,
    direction: Direction,
    check_condition: bool = True,
) -> ScatteringResult:
    """
    Solve the 4x4 junction-matching system for the scattering amplitudes.

    Columns are equilibrated before the LU solve, and the 2-norm condition number of the
    equilibrated matrix is reported. With check_condition the solve refuses matrices
    above CONDITION_LIMIT; scans that walk onto a spectral singularity turn it off.
    """
    d = derive(params, E)
    left = interior_basis(-params.a0, E, params, d)
    right = interior_basis(params.a0, E, params, d)
    A, rhs = _matching_system(d, left, right, params.a0, direction)

    scale = np.max(np.abs(A), axis=0)
    scale[scale == 0] = 1.0
    scaled = A / scale
    condition = float(np.linalg.cond(scaled))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        if check_condition:
            raise IllConditionedMatching(E, condition)
        logger.warning("Matching at E=%s is ill-conditioned (condition %.3e)", E, condition)

    P, Q, R, T = np.linalg.solve(scaled, rhs) / scale
    logger.debug(
        "Matched %s at E=%s: condition %.3e, |R|^2=%.6g, |T|^2=%.6g",
        direction.value,
        E,
        condition,
        abs(R) ** 2,
        abs(T) ** 2,
    )
    return ScatteringResult(
        direction=direction,
        energy=E,
        R=complex(R),
        T=complex(T),
        P=complex(P),
        Q=complex(Q),
        condition=condition,
    )


def wavefunction_with_derivative(
    E: float,
    params: ModelParams,
    direction: Direction,
    z_grid: np.ndarray,
    result: Optional[ScatteringResult] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    psi(z) and psi'(z) assembled from the exterior plane waves and the interior basis.
    """
    if result is None:
        result = match_and_scatter(E, params, direction)
    d = derive(params, E)
    k = d.k
    P = result.P if result.P is not None else 0j
    Q = result.Q if result.Q is not None else 0j

    zs = np.asarray(z_grid, dtype=float)
    psi = np.empty(zs.shape, dtype=complex)
    dpsi = np.empty(zs.shape, dtype=complex)
    for i, z in enumerate(zs):
        if z <= -params.a0:
            if direction == Direction.LeftIncidence:
                psi[i] = cmath.exp(1j * k * z) + result.R * cmath.exp(-1j * k * z)
                dpsi[i] = 1j * k * (cmath.exp(1j * k * z) - result.R * cmath.exp(-1j * k * z))
            else:
                psi[i] = result.T * cmath.exp(-1j * k * z)
                dpsi[i] = -1j * k * psi[i]
        elif z >= params.a0:
            if direction == Direction.LeftIncidence:
                psi[i] = result.T * cmath.exp(1j * k * z)
                dpsi[i] = 1j * k * psi[i]
            else:
                psi[i] = cmath.exp(-1j * k * z) + result.R * cmath.exp(1j * k * z)
                dpsi[i] = 1j * k * (result.R * cmath.exp(1j * k * z) - cmath.exp(-1j * k * z))
        else:
            v = interior_basis(float(z), E, params, d)
            psi[i] = P * v.psi1 + Q * v.psi2
            dpsi[i] = P * v.dpsi1 + Q * v.dpsi2
    return psi, dpsi


def wavefunction_trace(
    E: float,
    params: ModelParams,
    direction: Direction,
    z_grid: np.ndarray,
    result: Optional[ScatteringResult] = None,
) -> np.ndarray:
    """
    psi on z_grid, reusing result when the amplitudes are already known.
    """
    psi, _ = wavefunction_with_derivative(E, params, direction, z_grid, result)
    return psi


class AnalyticSolver(ScatteringSolver[ScatteringResult]):
    """
    Closed-form hypergeometric solver.
    """

    solver_kind = SolverKind.Analytic
    result_model = ScatteringResult

    def __init__(self, params: ModelParams, check_condition: bool = True) -> None:
        super().__init__(params)
        self.check_condition = check_condition

    def scatter(self, energy: float, direction: Direction) -> ScatteringResult:
        return match_and_scatter(energy, self.params, direction, self.check_condition)

"""
PT-symmetric double heterojunction with a position-dependent effective mass.

Inside |z| < a0 the particle sees a diffused quantum well (or barrier, mu1 < 0)

    m(z) = beta^2 / (2 (1 + z^2)),    V(z) = (-mu1 + i mu2 z) / (1 + z^2),

and outside it sees the constant exterior m0 = m(a0), V0 = Re V(a0). The imaginary part
of V jumps to zero across each junction; only Re V is continuous.

The coordinate rho = beta asinh(z) turns the kinetic term into a constant-mass one and
the potential into a Scarf II form with strengths V1 = mu1 beta^2 - 1/4 and V2 = mu2 beta^2.
The -1/4 comes from the mass terms (7/32) m'^2/m^3 - m''/(8 m^2) = (1 + sech^2)/(4 beta^2);
the published value mu1 beta^2 + 1/4 is kept as `published_V1` for the closed-form
singularity estimates.
"""

import cmath
import logging
import math
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from errors import InvalidGrid, SubThresholdEnergy
from models.base import PhysicsModel

logger = logging.getLogger(__name__)

Samples = Union[float, complex, np.ndarray]

EXTERIOR_SLICES = 8
MIN_SLICES = 100
BOUNDARY_TOLERANCE = 1e-12


class ModelParams(PhysicsModel):
    """
    Couplings and geometry of the heterojunction.
    """

    mu1: float = Field(..., description="Well depth coupling; negative for a barrier")
    mu2: float = Field(..., ge=0, description="Gain/loss coupling, gain at z > 0")
    beta: float = Field(..., gt=0, description="Mass-scale parameter")
    a0: float = Field(..., gt=0, description="Junction half-width")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def m0(self) -> float:
        return self.beta**2 / (2.0 * (1.0 + self.a0**2))

    @property
    def V0(self) -> float:
        return -self.mu1 / (1.0 + self.a0**2)

    @property
    def threshold(self) -> float:
        """
        Lowest energy of the scattering regime.
        """
        return max(1.0 / (4.0 * self.beta**2), self.V0)


class DerivedParams(PhysicsModel):
    """
    Energy-dependent parameters of the interior hypergeometric solution.
    """

    V1: float = Field(..., description="Scarf strength of the real sech^2 term")
    V2: float = Field(..., description="Scarf strength of the imaginary sech tanh term")
    m0: float = Field(..., description="Exterior mass")
    V0: float = Field(..., description="Exterior potential")
    kappa: float = Field(..., description="Transformed wavenumber, kappa^2 = E beta^2 - 1/4")
    k: float = Field(..., description="Exterior wavenumber")
    p: complex = Field(..., description="Exponent of (1 + iz)")
    q: complex = Field(..., description="Exponent of (1 - iz)")
    a: complex
    b: complex
    c: complex


class PTPhase(str, Enum):
    ExactPT = "ExactPT"
    BrokenPT = "BrokenPT"


class PTPhaseClassification(PhysicsModel):
    phase: PTPhase
    boundary: bool = Field(False, description="Inequality holds with equality to 1e-12")
    margin: float = Field(..., description="mu1 + 1/(2 beta^2) - |mu2|")


def _as_output(values: np.ndarray) -> Samples:
    return values if values.ndim else values.item()


def mass_at(z: Samples, params: ModelParams) -> Samples:
    """
    Effective mass, clamped to m0 outside the junctions.
    """
    zc = np.clip(np.asarray(z, dtype=float), -params.a0, params.a0)
    return _as_output(params.beta**2 / (2.0 * (1.0 + zc**2)))


def potential_at(z: Samples, params: ModelParams) -> Samples:
    """
    Complex potential; real constant V0 for |z| >= a0.

    Real and imaginary parts are assembled separately so that V(-z) = conj V(z) holds
    bit for bit on mirrored samples.
    """
    zs = np.asarray(z, dtype=float)
    inside = np.abs(zs) < params.a0
    denominator = 1.0 + zs**2
    values = np.empty(zs.shape, dtype=complex)
    values.real = np.where(inside, -params.mu1 / denominator, params.V0)
    values.imag = np.where(inside, params.mu2 * zs / denominator, 0.0)
    return _as_output(values)


def rho_of_z(z: Samples, params: ModelParams) -> Samples:
    """
    Transformed coordinate beta asinh(z), continued linearly with slope sqrt(2 m0) outside.

    The slope matches d rho/dz at the junction, so the map is odd, continuous and
    strictly increasing on the whole line.
    """
    zs = np.asarray(z, dtype=float)
    edge = params.beta * math.asinh(params.a0)
    slope = math.sqrt(2.0 * params.m0)
    outside = np.sign(zs) * (edge + slope * (np.abs(zs) - params.a0))
    return _as_output(np.where(np.abs(zs) <= params.a0, params.beta * np.arcsinh(zs), outside))


def scarf_strengths(params: ModelParams) -> Tuple[float, float]:
    """
    Corrected Scarf strengths (V1, V2) = (mu1 beta^2 - 1/4, mu2 beta^2) used by the solvers.
    """
    return params.mu1 * params.beta**2 - 0.25, params.mu2 * params.beta**2


def published_V1(params: ModelParams) -> float:
    """
    V1 as printed in the literature, mu1 beta^2 + 1/4; only the singularity estimates use it.
    """
    return params.mu1 * params.beta**2 + 0.25


def effective_potential(rho_bar: Samples, params: ModelParams) -> Samples:
    """
    Constant-mass potential as a function of rho/beta.
    """
    r = np.asarray(rho_bar, dtype=float)
    V1, V2 = scarf_strengths(params)
    beta2 = params.beta**2
    sech = 1.0 / np.cosh(r)
    values = 1.0 / (4.0 * beta2) - (V1 / beta2) * sech**2 + 1j * (V2 / beta2) * sech * np.tanh(r)
    return _as_output(values)


def mass_derivatives(z: Samples, params: ModelParams) -> Tuple[Samples, Samples, Samples]:
    """
    Interior m, m' and m'' from the closed-form profile.
    """
    zs = np.asarray(z, dtype=float)
    beta2 = params.beta**2
    s = 1.0 + zs**2
    m = beta2 / (2.0 * s)
    dm = -beta2 * zs / s**2
    d2m = -beta2 * (1.0 - 3.0 * zs**2) / s**3
    return _as_output(m), _as_output(dm), _as_output(d2m)


def transformed_potential(z: Samples, params: ModelParams) -> Samples:
    """
    V(z) + (7/32) m'^2/m^3 - m''/(8 m^2), evaluated from the mass derivatives.

    Interior only; for |z| < a0 it equals effective_potential(asinh(z)).
    """
    zs = np.asarray(z, dtype=float)
    m, dm, d2m = (np.asarray(v) for v in mass_derivatives(zs, params))
    s = 1.0 + zs**2
    bare = (-params.mu1 + 1j * params.mu2 * zs) / s
    return _as_output(bare + (7.0 / 32.0) * dm**2 / m**3 - d2m / (8.0 * m**2))


def derive(params: ModelParams, E: float) -> DerivedParams:
    """
    Scarf strengths, wavenumbers and hypergeometric parameters at energy E.

    Raises SubThresholdEnergy below 1/(4 beta^2) or at or below V0.
    """
    beta2 = params.beta**2
    if E < 1.0 / (4.0 * beta2):
        raise SubThresholdEnergy(f"E={E} is below the threshold 1/(4 beta^2)={1.0 / (4.0 * beta2)}")
    if E <= params.V0:
        raise SubThresholdEnergy(f"E={E} does not exceed the exterior potential V0={params.V0}")

    V1, V2 = scarf_strengths(params)
    kappa = math.sqrt(max(E * beta2 - 0.25, 0.0))
    k = math.sqrt(2.0 * params.m0 * (E - params.V0))
    p = 0.25 + 0.5 * cmath.sqrt(0.25 + V1 + V2)
    q = 0.25 + 0.5 * cmath.sqrt(0.25 + V1 - V2)
    return DerivedParams(
        V1=V1,
        V2=V2,
        m0=params.m0,
        V0=params.V0,
        kappa=kappa,
        k=k,
        p=p,
        q=q,
        a=p + q - 1j * kappa,
        b=p + q + 1j * kappa,
        c=2.0 * p + 0.5,
    )


def pt_phase_classify(params: ModelParams) -> PTPhaseClassification:
    """
    Exact PT phase iff |mu2| < mu1 + 1/(2 beta^2); equality counts as broken.

    With the corrected Scarf strengths the full-line criterion |V2| <= V1 + 1/4 reads
    |mu2| <= mu1; the truncated well is classified with the published bound.
    """
    margin = params.mu1 + 1.0 / (2.0 * params.beta**2) - abs(params.mu2)
    boundary = abs(margin) <= BOUNDARY_TOLERANCE
    phase = PTPhase.ExactPT if margin > BOUNDARY_TOLERANCE else PTPhase.BrokenPT
    return PTPhaseClassification(phase=phase, boundary=boundary, margin=margin)


def symmetric_points(half_width: float, count: int) -> np.ndarray:
    """
    Uniform points on [-half_width, half_width] with exact mirror pairs.
    """
    points = np.linspace(-half_width, half_width, count)
    return (points - points[::-1]) / 2.0


class ProfileGrid(PhysicsModel):
    """
    Piecewise-constant slicing of a mass and potential profile.
    """

    edges: np.ndarray = Field(..., description="Slice boundaries, strictly increasing")
    m: np.ndarray = Field(..., description="Mass at each slice midpoint")
    V: np.ndarray = Field(..., description="Complex potential at each slice midpoint")
    params: Optional[ModelParams] = Field(None, description="Model the grid was sampled from")
    padding: float = Field(0.0, description="Exterior length on each side")
    interior_slices: int = Field(..., description="Slices inside the junctions")

    @model_validator(mode="before")
    @classmethod
    def default_interior_slices(cls, data):
        """
        Grids built from raw arrays count every slice as interior.
        """
        if isinstance(data, dict) and "interior_slices" not in data and "m" in data:
            data["interior_slices"] = len(data["m"])
        return data

    @model_validator(mode="after")
    def check_slicing(self) -> "ProfileGrid":
        edges = np.asarray(self.edges, dtype=float)
        if edges.ndim != 1 or len(edges) < 2:
            raise InvalidGrid("Grid needs at least one slice")
        if not np.all(np.diff(edges) > 0):
            raise InvalidGrid("Grid edges must be strictly increasing")
        if len(self.m) != len(edges) - 1 or len(self.V) != len(edges) - 1:
            raise InvalidGrid(
                f"Grid has {len(edges) - 1} slices but {len(self.m)} masses and {len(self.V)} potentials"
            )
        if not np.all(np.isfinite(self.m)) or not np.all(self.m > 0):
            raise InvalidGrid("Mass samples must be finite and positive")
        if not np.all(np.isfinite(self.V)):
            raise InvalidGrid("Potential samples must be finite")
        return self

    @property
    def z(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def reversed(self) -> "ProfileGrid":
        """
        Mirror image z -> -z of the same profile.
        """
        return ProfileGrid(
            edges=-self.edges[::-1],
            m=self.m[::-1].copy(),
            V=self.V[::-1].copy(),
            padding=self.padding,
            interior_slices=self.interior_slices,
        )

    def refined(self, n: int) -> "ProfileGrid":
        """
        Resample with n interior slices; exact for model grids, interpolated otherwise.
        """
        if self.params is not None:
            return sample_profile(self.params, n, self.padding)
        edges = np.linspace(self.edges[0], self.edges[-1], n + 1)
        z = 0.5 * (edges[:-1] + edges[1:])
        m = np.interp(z, self.z, self.m)
        V = np.interp(z, self.z, self.V.real) + 1j * np.interp(z, self.z, self.V.imag)
        return ProfileGrid(edges=edges, m=m, V=V, padding=self.padding, interior_slices=n)


def sample_profile(params: ModelParams, n: int, padding: float = 2.0) -> ProfileGrid:
    """
    Midpoint slicing with n interior slices over [-a0, a0] and EXTERIOR_SLICES per side
    across the padding. Edges are mirrored exactly, so the sampled profile satisfies
    m(-z) = m(z) and V(-z) = conj V(z) bit for bit.
    """
    if n < MIN_SLICES:
        raise InvalidGrid(f"Need at least {MIN_SLICES} interior slices, got {n}")
    if not padding > 0:
        raise InvalidGrid(f"Padding must be positive, got {padding}")

    interior = np.linspace(-params.a0, params.a0, n + 1)
    left = np.linspace(-params.a0 - padding, -params.a0, EXTERIOR_SLICES + 1)[:-1]
    edges = np.concatenate([left, interior, -left[::-1]])
    edges = (edges - edges[::-1]) / 2.0

    z = 0.5 * (edges[:-1] + edges[1:])
    grid = ProfileGrid(
        edges=edges,
        m=np.asarray(mass_at(z, params)),
        V=np.asarray(potential_at(z, params)),
        params=params,
        padding=padding,
        interior_slices=n,
    )
    logger.debug("Sampled profile with %d interior slices, padding %s", n, padding)
    return grid

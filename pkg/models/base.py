import logging
from enum import Enum
from typing import Generic, Optional, Tuple, Type, TypeVar, TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field, computed_field

if TYPE_CHECKING:
    from models.heterojunction import ModelParams

logger = logging.getLogger(__name__)


class PhysicsModel(BaseModel):
    """
    Base model for all immutable physics values.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class Direction(str, Enum):
    LeftIncidence = "LeftIncidence"
    RightIncidence = "RightIncidence"


class SolverKind(str, Enum):
    Analytic = "analytic"
    Oracle = "oracle"


class ScatteringResult(PhysicsModel):
    """
    Reflection and transmission amplitudes for one incidence direction at one energy.
    """

    direction: Direction = Field(..., description="Side the particle enters from")
    energy: float = Field(..., description="Real scattering energy")
    R: complex = Field(..., description="Reflection amplitude")
    T: complex = Field(..., description="Transmission amplitude")
    P: Optional[complex] = Field(None, description="Interior coefficient of the first basis solution")
    Q: Optional[complex] = Field(None, description="Interior coefficient of the second basis solution")
    condition: Optional[float] = Field(None, description="Condition estimate of the solved system")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def R2(self) -> float:
        return abs(self.R) ** 2

    @computed_field  # type: ignore[prop-decorator]
    @property
    def T2(self) -> float:
        return abs(self.T) ** 2


R = TypeVar("R", bound=ScatteringResult)


class ScatteringSolver(Generic[R]):
    """
    Base class for scattering solvers bound to one parameter set.
    """

    solver_kind: SolverKind
    result_model: Type[R]

    def __init__(self, params: "ModelParams") -> None:
        self.params = params

    def scatter(self, energy: float, direction: Direction) -> R:
        """
        Solve the scattering problem for one incidence direction.
        """
        raise NotImplementedError

    def scatter_both(self, energy: float) -> Tuple[R, R]:
        """
        Solve for left and right incidence at the same energy.
        """
        left = self.scatter(energy, Direction.LeftIncidence)
        right = self.scatter(energy, Direction.RightIncidence)
        logger.debug(
            "%s at E=%s: T2=%.6g R2_left=%.6g R2_right=%.6g",
            self.solver_kind.value,
            energy,
            left.T2,
            left.R2,
            right.R2,
        )
        return left, right

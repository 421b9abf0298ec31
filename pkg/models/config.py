import logging
import os
from enum import Enum
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.base import Direction
from models.heterojunction import ModelParams
from models.observables import DEFAULT_PEAK_THRESHOLD, SolverChoice
from models.transfer import DEFAULT_SLICES

logger = logging.getLogger(__name__)


class OutputKind(str, Enum):
    sweep = "sweep"
    wavefunction = "wavefunction"
    singularity = "singularity"
    continuity = "continuity"
    profile = "profile"


class EnergyWindow(BaseModel):
    """
    Uniform energy grid for sweeps and singularity scans.
    """

    E_min: float = Field(..., description="Lowest energy")
    E_max: float = Field(..., description="Highest energy")
    n_points: int = Field(..., ge=2, description="Number of grid points")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def check_order(self) -> "EnergyWindow":
        if not self.E_max > self.E_min:
            raise ValueError(f"E_max={self.E_max} must exceed E_min={self.E_min}")
        return self


class RunConfig(BaseModel):
    """
    One run of the command-line tool, read from a JSON document.
    """

    params: ModelParams = Field(..., description="Heterojunction parameters")
    energy_window: EnergyWindow = Field(..., description="Sweep and scan energies")
    solver: SolverChoice = Field(SolverChoice.analytic, description="Solver for sweeps")
    slices: int = Field(DEFAULT_SLICES, ge=100, description="Oracle interior slice count")
    outputs: List[OutputKind] = Field([], description="Artifacts requested by the run")
    out_dir: Path = Field(Path("."), description="Directory receiving the artifacts")
    energy: Optional[float] = Field(None, description="Energy for single-energy commands")
    direction: Direction = Field(Direction.LeftIncidence, description="Incidence for traces")
    peak_threshold: float = Field(DEFAULT_PEAK_THRESHOLD, gt=0, description="Minimum |T|^2 of a singularity peak")
    padding: float = Field(2.0, gt=0, description="Exterior length sampled by the oracle")

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_energy_window(self) -> "RunConfig":
        """
        Sweeps start inside the scattering regime.
        """
        if self.energy_window.E_min < 1.0 / (4.0 * self.params.beta**2):
            raise ValueError(
                f"energy_window.E_min={self.energy_window.E_min} is below 1/(4 beta^2)"
            )
        if self.energy_window.E_min <= self.params.V0:
            raise ValueError(
                f"energy_window.E_min={self.energy_window.E_min} does not exceed V0={self.params.V0}"
            )
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """
        Read and validate a JSON run configuration.
        """
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def worker_count() -> int:
    """
    Worker processes for sweeps, capped by PDEMSCATTER_THREADS.
    """
    available = os.cpu_count() or 1
    value = os.environ.get("PDEMSCATTER_THREADS")
    if not value:
        return available
    try:
        requested = int(value)
    except ValueError:
        logger.warning("Ignoring PDEMSCATTER_THREADS=%r; expected an integer", value)
        return available
    return max(1, min(requested, available))


def log_level() -> str:
    """
    Root log level from PDEMSCATTER_LOG_LEVEL, WARNING by default.
    """
    return os.environ.get("PDEMSCATTER_LOG_LEVEL", "WARNING").upper()

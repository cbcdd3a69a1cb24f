"""Process-level settings using Pydantic for validation."""
from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Numerical tolerances and runtime knobs, overridable through LCFLAB_* variables."""

    THREADS: int = Field(1, ge=1)

    CLUSTER_TOL: float = Field(1e-7, gt=0)
    SYMMETRY_TOL: float = Field(1e-9, gt=0)

    FD_STEP: float = Field(1e-3, gt=0)
    OUTER_FD_STEP: float = Field(2e-3, gt=0)

    GUARD_RADIUS: float = Field(10.0, gt=0)
    DRIFT_LIMIT: float = Field(1e-3, gt=0)

    LOG_LEVEL: str = "INFO"

    class Config:
        """Pydantic configuration."""

        env_prefix = "LCFLAB_"
        env_file = ".env"

    @property
    def tolerances(self) -> dict[str, float]:
        """Get the tolerance values echoed into every report."""
        return {
            "cluster_tol": self.CLUSTER_TOL,
            "symmetry_tol": self.SYMMETRY_TOL,
            "fd_step": self.FD_STEP,
            "outer_fd_step": self.OUTER_FD_STEP,
            "drift_limit": self.DRIFT_LIMIT,
        }


settings = Settings()

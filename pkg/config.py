"""
carbon-gmam Configuration Module
Runtime settings and numerical constants, overridable from environment variables.
"""
import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

PROJECT_ROOT = Path(__file__).parent.absolute()
APP_VERSION = "1.0.0"


@dataclass
class DomainConfig:
    """Admissible-domain floors for the carbonate state."""
    c_min: float = 1e-6  # umol/kg; the buffer metric is singular at c = 0


@dataclass
class CycleConfig:
    """Limit-cycle extraction constants (nondimensional time)."""
    dt: float = 1e-3
    cycle_tol: float = 1e-6  # return-map convergence, state-space distance
    closure_tol: float = 1e-5
    max_steps: int = 10_000_000
    min_points: int = 256
    # Relative offset used to seed searches away from the fixed point
    seed_offset: float = 0.05


@dataclass
class ScanConfig:
    """c_x regime scan settings (umol/kg)."""
    cx_window: tuple = (40.0, 80.0)
    threshold_tol: float = 0.01


@dataclass
class Config:
    """Main application configuration."""

    # Logging
    log_level: str = "INFO"
    log_file: str = "logs/carbon_gmam.log"

    # Parallel workers (processes); 1 runs everything inline
    threads: int = 1

    # Paths
    output_dir: str = "output"
    params_file: str = "params/rothman-modern-ocean.json"

    domain: DomainConfig = field(default_factory=DomainConfig)
    cycles: CycleConfig = field(default_factory=CycleConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)

    def __post_init__(self):
        """Override from environment if present."""
        if os.getenv("LOG_LEVEL"):
            self.log_level = os.getenv("LOG_LEVEL")
        if os.getenv("LOG_FILE") is not None:
            self.log_file = os.getenv("LOG_FILE")
        if os.getenv("GMAM_THREADS"):
            self.threads = int(os.getenv("GMAM_THREADS"))
        if os.getenv("GMAM_OUTPUT_DIR"):
            self.output_dir = os.getenv("GMAM_OUTPUT_DIR")
        if os.getenv("GMAM_PARAMS_FILE"):
            self.params_file = os.getenv("GMAM_PARAMS_FILE")
        if os.getenv("GMAM_CYCLE_DT"):
            self.cycles.dt = float(os.getenv("GMAM_CYCLE_DT"))

    def resolve(self, path: str) -> Path:
        """Resolve a path relative to the project root."""
        candidate = Path(path)
        if candidate.is_absolute():
            return candidate
        return PROJECT_ROOT / candidate


# Global config instance
config = Config()


def get_config() -> Config:
    """Get the global configuration instance."""
    return config

"""
Configuration management for branchcov.
"""

import os
from typing import Optional, Dict
from pydantic import BaseModel
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class ToleranceConfig(BaseModel):
    """Every numerical tolerance used by the rational-map analysis."""
    normalization: float = 1e-12
    coprimality: float = 1e-8
    root_correction: float = 1e-12
    max_sweeps: int = 500
    cluster_radius: float = 1e-6
    value_merge: float = 1e-9
    orbit_tol: float = 1e-9
    exact_return: float = 1e-14
    infinity_snap: float = 1e-150
    density_dedupe: float = 1e-10
    density_sample: int = 2000
    expansion_epsilon: float = 0.1
    expansion_sample: int = 8000
    explosion_limit: int = 1_000_000


class AppConfig(BaseModel):
    """Configuration for the CLI and the compute server."""
    log_level: str = "WARNING"
    seed: int = 0
    host: str = "127.0.0.1"
    port: int = 8000
    tolerances: ToleranceConfig = ToleranceConfig()


def load_config() -> AppConfig:
    """Load configuration from environment variables."""
    return AppConfig(
        log_level=os.getenv("BRANCHCOV_LOG_LEVEL", "WARNING"),
        seed=int(os.getenv("BRANCHCOV_SEED", "0")),
        host=os.getenv("BRANCHCOV_HOST", "127.0.0.1"),
        port=int(os.getenv("BRANCHCOV_PORT", "8000")),
        tolerances=ToleranceConfig(**_parse_tolerances(os.getenv("BRANCHCOV_TOLERANCES"))),
    )


def _parse_tolerances(spec: Optional[str]) -> Dict[str, str]:
    """Parse `name:value` pairs, e.g. "orbit_tol:1e-8,max_sweeps:800"."""
    if not spec:
        return {}

    overrides = {}
    for pair in spec.split(","):
        if ":" in pair:
            name, value = pair.split(":", 1)
            overrides[name.strip()] = value.strip()

    return overrides


def with_overrides(
    config: AppConfig,
    log_level: Optional[str] = None,
    seed: Optional[int] = None,
    orbit_tol: Optional[float] = None,
) -> AppConfig:
    """Return a copy of the configuration with command-line overrides applied."""
    tolerances = config.tolerances
    if orbit_tol is not None:
        tolerances = tolerances.model_copy(update={"orbit_tol": orbit_tol})
    update = {"tolerances": tolerances}
    if log_level is not None:
        update["log_level"] = log_level
    if seed is not None:
        update["seed"] = seed
    return config.model_copy(update=update)


DEFAULT_TOLERANCES = ToleranceConfig()

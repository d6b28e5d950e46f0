"""
Centralized configuration for the Chrestenson spreading toolkit.

This module provides a single source of truth for all tool settings,
using Pydantic BaseSettings for environment variable management and validation.
"""

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Tool settings with environment variable support."""

    # Logging Configuration
    log_level: str = Field(default="INFO", description="Root logging level")
    debug_mode: bool = Field(default=False, description="Enable debug mode")

    # Tracing Configuration
    trace_stages: bool = Field(default=False, description="Log an OpenTelemetry span for every pipeline stage")

    # Transform Configuration
    matrix_size_limit: int = Field(default=2 ** 16, ge=2, description="Largest Chrestenson matrix row or m-sequence length")
    direct_transform_limit: int = Field(
        default=1024, ge=2, description="Largest length transformed by direct matrix summation"
    )
    matrix_cache_size: int = Field(default=16, ge=0, description="Number of cached Chrestenson matrices")

    # Experiment Configuration
    default_output_dir: str = Field(default="out", description="Output directory for experiment artifacts")
    default_seed: int = Field(default=0, description="Seed used when neither config nor flags set one")
    tool_version: str = Field(default="0.1.0", description="Version echoed into experiment reports")

    class Config:
        env_prefix = "CHRESTENSON_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False
        extra = "allow"  # Allow extra fields from environment


# Global settings instance
settings = Settings()

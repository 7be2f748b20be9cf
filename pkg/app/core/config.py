import os
from functools import lru_cache

from dotenv import load_dotenv

load_dotenv()


class Settings:
    def __init__(self) -> None:
        self.environment = os.getenv("SIGEVO_ENVIRONMENT", "development")
        self.output_root = os.getenv("SIGEVO_OUTPUT_ROOT", "runs")
        self.log_level = os.getenv("SIGEVO_LOG_LEVEL", "INFO").upper()
        self.default_jobs = int(os.getenv("SIGEVO_DEFAULT_JOBS", "1"))
        self.samples_per_decade = int(os.getenv("SIGEVO_SAMPLES_PER_DECADE", "16"))
        self.first_output_time = float(os.getenv("SIGEVO_FIRST_OUTPUT_TIME", "0.1"))
        self.boundary_mass_tol = float(os.getenv("SIGEVO_BOUNDARY_MASS_TOL", "1e-8"))
        self.max_scan_points = int(os.getenv("SIGEVO_MAX_SCAN_POINTS", "200000"))

    def validate(self) -> None:
        invalid = []
        if not self.output_root or self.output_root.strip() == "":
            invalid.append("SIGEVO_OUTPUT_ROOT")
        if self.log_level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            invalid.append("SIGEVO_LOG_LEVEL")
        if self.default_jobs < 1:
            invalid.append("SIGEVO_DEFAULT_JOBS")
        if self.samples_per_decade < 2:
            invalid.append("SIGEVO_SAMPLES_PER_DECADE")
        if self.first_output_time <= 0:
            invalid.append("SIGEVO_FIRST_OUTPUT_TIME")
        if self.boundary_mass_tol <= 0:
            invalid.append("SIGEVO_BOUNDARY_MASS_TOL")
        if self.max_scan_points < 1:
            invalid.append("SIGEVO_MAX_SCAN_POINTS")

        if invalid:
            raise RuntimeError(
                f"Invalid environment variables: {', '.join(invalid)}\n"
                f"Please check your .env file in the project root.\n"
                f"Current values: SIGEVO_OUTPUT_ROOT={self.output_root!r}, "
                f"SIGEVO_LOG_LEVEL={self.log_level!r}, "
                f"SIGEVO_DEFAULT_JOBS={self.default_jobs}, "
                f"SIGEVO_SAMPLES_PER_DECADE={self.samples_per_decade}, "
                f"SIGEVO_FIRST_OUTPUT_TIME={self.first_output_time}, "
                f"SIGEVO_BOUNDARY_MASS_TOL={self.boundary_mass_tol}, "
                f"SIGEVO_MAX_SCAN_POINTS={self.max_scan_points}"
            )


@lru_cache
def get_settings() -> Settings:
    settings = Settings()
    return settings

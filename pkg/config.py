"""
Configuration management for the quantum illumination toolkit
"""
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

from dotenv import load_dotenv

load_dotenv()

ROOT_DIR = Path(__file__).resolve().parent


def parse_log_base(value: str) -> float:
    """QI_LOG_BASE takes "e" for nats or any numeric base"""
    return math.e if value.strip().lower() == "e" else float(value)


@dataclass
class Config:
    # Quadrature
    tolerance: float = field(default_factory=lambda: float(os.getenv("QI_TOLERANCE", "1e-5")))
    expensive_tolerance: float = field(default_factory=lambda: float(os.getenv("QI_EXPENSIVE_TOLERANCE", "1e-4")))
    max_depth: int = field(default_factory=lambda: int(os.getenv("QI_MAX_DEPTH", "14")))
    max_evaluations: int = field(default_factory=lambda: int(os.getenv("QI_MAX_EVALUATIONS", "20000000")))
    threads: int = field(default_factory=lambda: int(os.getenv("QI_THREADS", str(os.cpu_count() or 1))))

    # Spectra and information
    tie_tol: float = field(default_factory=lambda: float(os.getenv("QI_TIE_TOL", "1e-10")))
    log_base: float = field(default_factory=lambda: parse_log_base(os.getenv("QI_LOG_BASE", "e")))

    # Output
    log_level: str = field(default_factory=lambda: os.getenv("QI_LOG_LEVEL", "WARNING"))
    output_dir: str = field(default_factory=lambda: os.getenv("QI_OUTPUT_DIR", "results"))
    resolution: int = field(default_factory=lambda: int(os.getenv("QI_RESOLUTION", "101")))

    # Scenario presets shipped with the repo
    presets_path: str = field(default_factory=lambda: os.getenv("QI_PRESETS_PATH", str(ROOT_DIR / "scenarios" / "presets.json")))

    # Boundary handling
    boundary_tol: float = 1e-12
    commutator_tol: float = 1e-8
    ranking_tie_tol: float = 1e-4

    def validate(self) -> List[str]:
        """Validate configuration and return list of warnings"""
        warnings = []
        if self.tolerance <= 0 or self.expensive_tolerance <= 0:
            warnings.append("QI_TOLERANCE / QI_EXPENSIVE_TOLERANCE must be positive - quadrature cannot converge")
        if self.threads < 1:
            warnings.append(f"QI_THREADS={self.threads} - falling back to a single worker")
        if self.log_base <= 1:
            warnings.append(f"QI_LOG_BASE={self.log_base} is not a valid logarithm base (use 2 for bits, e for nats)")
        if not 1 <= self.max_depth <= 20:
            warnings.append(f"QI_MAX_DEPTH={self.max_depth} outside 1..20 - refinement may stop early or never")
        if self.resolution < 2:
            warnings.append("QI_RESOLUTION must be at least 2 for region grids")
        if not Path(self.presets_path).is_file():
            warnings.append(f"Presets file not found at {self.presets_path} - preset names will not resolve")
        return warnings


config = Config()

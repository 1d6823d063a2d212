"""Detection of malaria parasites in stained blood-film images."""

from .detect import DetectionReport, PipelineConfig, run_pipeline
from .enhance import NormalizationParams
from .morph import StructuringElement

__all__ = ["DetectionReport", "PipelineConfig", "run_pipeline", "NormalizationParams", "StructuringElement"]
__version__ = "0.1.0"

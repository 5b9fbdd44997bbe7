from .config import (
    DeformBackend,
    InitMethod,
    OptimizerKind,
    FrameOrder,
    PlaneResolution,
    QuantizationConfig,
    ModelConfig,
    TrainConfig,
    RasterConfig,
)
from .gaussian import Gaussian2D, GaussianCloud, DeformDelta, RenderGrads
from .field import MlpWeights, PlaneLevel, PlaneSet, EncoderGrads, FieldGrads
from .video import FrameSequence, TemporalMap, normalized_time
from .gaussian_video import GaussianVideoModel
from .codec import QuantizedTensor, StreamHeader, FORMAT_VERSION
from .reports import MetricReport, FrameMetrics, EvaluationReport, EpochMetrics, EncodeSummary

__all__ = [
    "DeformBackend",
    "InitMethod",
    "OptimizerKind",
    "FrameOrder",
    "PlaneResolution",
    "QuantizationConfig",
    "ModelConfig",
    "TrainConfig",
    "RasterConfig",
    "Gaussian2D",
    "GaussianCloud",
    "DeformDelta",
    "RenderGrads",
    "MlpWeights",
    "PlaneLevel",
    "PlaneSet",
    "EncoderGrads",
    "FieldGrads",
    "FrameSequence",
    "TemporalMap",
    "normalized_time",
    "GaussianVideoModel",
    "QuantizedTensor",
    "StreamHeader",
    "FORMAT_VERSION",
    "MetricReport",
    "FrameMetrics",
    "EvaluationReport",
    "EpochMetrics",
    "EncodeSummary",
]

"""Multichannel speech-enhancement front-end.

MVDR beamforming toward a localized or configured look direction, followed
by a Wiener postfilter whose gains are driven by a direction-independent
estimate of the coherent-to-diffuse power ratio. Ships with a synthetic
acoustic-scene simulator with known ground truth for verification.
"""

from .beamforming import BeamformerWeights, apply_beamformer, mvdr_weights
from .cdr import (
    CDR_MAX,
    CdrEstimate,
    average_input_cdr,
    cdr_at_beamformer_output,
    correction_factor,
    diffuseness,
    estimate_cdr_pair,
)
from .enhancer import CoherenceEnhancer, EnhancementResult
from .geometry import (
    ArrayGeometry,
    DoA,
    diffuse_coherence,
    diffuse_coherence_matrix,
    direct_coherence,
    steering_matrix,
    steering_vector,
    wavevector,
)
from .localization import DoAGrid, SrpResult, srp_phat
from .pipeline import ConfigError, PipelineConfig, run, run_batch
from .postfilter import GainMask, PostfilterParams, apply_gain, wiener_gain
from .simulate import (
    GroundTruth,
    SceneSpec,
    generate_diffuse_field,
    generate_point_source,
    mix_scene,
)
from .spectral import (
    NoiseCovariance,
    SpectralAccumulator,
    estimate_noise_covariance,
    pairwise_coherence_track,
)
from .stft import FrameParams, MultichannelSpectrum, analyze, sine_window, synthesize

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "BeamformerWeights",
    "CDR_MAX",
    "CdrEstimate",
    "CoherenceEnhancer",
    "ConfigError",
    "DoA",
    "DoAGrid",
    "EnhancementResult",
    "FrameParams",
    "GainMask",
    "GroundTruth",
    "MultichannelSpectrum",
    "NoiseCovariance",
    "PipelineConfig",
    "PostfilterParams",
    "SceneSpec",
    "SpectralAccumulator",
    "SrpResult",
    "analyze",
    "apply_beamformer",
    "apply_gain",
    "average_input_cdr",
    "cdr_at_beamformer_output",
    "correction_factor",
    "diffuse_coherence",
    "diffuse_coherence_matrix",
    "diffuseness",
    "direct_coherence",
    "estimate_cdr_pair",
    "estimate_noise_covariance",
    "generate_diffuse_field",
    "generate_point_source",
    "mix_scene",
    "mvdr_weights",
    "pairwise_coherence_track",
    "run",
    "run_batch",
    "sine_window",
    "srp_phat",
    "steering_matrix",
    "steering_vector",
    "synthesize",
    "wavevector",
    "wiener_gain",
]

"""Prompt-embedding optimization engine (sep-CMA-ES and Adam over a generate-and-score backend)."""

from ._embopt import (  # noqa: F401
    AdamConfig,
    AdamState,
    DomainError,
    FitnessConfig,
    MetricScores,
    MockBackend,
    ObjectiveError,
    ProtocolError,
    SepCmaes,
    TransportError,
    ValidationError,
    adam_step,
    clip_score,
    cli,
    cosine_distance,
    finite_difference_gradient,
    fitness,
    fnv1a64,
    loss,
    maximize_adam,
    maximize_sep_cmaes,
    percent_change,
    ssim,
    synthetic_gradient,
    synthetic_scores,
    __version__,
)

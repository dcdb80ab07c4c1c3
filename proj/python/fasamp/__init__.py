"""Activity detection and channel estimation for fluid-antenna uplinks."""

from ._core import (
    ConfigError,
    DimensionError,
    DivergenceError,
    DomainError,
    __version__,
    ade,
    build_codebook,
    calibrate_noise,
    denoise,
    generate_pilots,
    greedy_floor_mse,
    init_lambda,
    lsfc,
    nmse,
    omp_refine,
    run,
    run_sweep,
    sample_scene,
    somp,
    steering_vector,
    synthesize_received,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "DivergenceError",
    "DomainError",
    "__version__",
    "ade",
    "build_codebook",
    "calibrate_noise",
    "denoise",
    "generate_pilots",
    "greedy_floor_mse",
    "init_lambda",
    "lsfc",
    "nmse",
    "omp_refine",
    "run",
    "run_sweep",
    "sample_scene",
    "somp",
    "steering_vector",
    "synthesize_received",
]

"""Square roots of CIR processes and reflected (fractional) Ornstein-Uhlenbeck processes.

Simulation schemes, reflection-function estimators and common-random-number
convergence experiments for the limit ``sqrt(CIR) -> reflected OU`` as the
drift perturbation vanishes, in the Brownian and fractional Brownian cases.
"""

from .convergence import (
    ConvergenceReport,
    RefinementSpec,
    epsilon_ladder,
    grid_refinement_study,
    square_consistency,
)
from .errors import (
    CirculantEmbeddingFailure,
    GridMismatchError,
    InsufficientSampleError,
    ParameterError,
    RouCirError,
)
from .models import ModelParams, ReflectionPath, Regime, SamplePath, regime, validate
from .noise import (
    NoisePath,
    RngSeed,
    TimeGrid,
    fbm_covariance,
    generate_bm_increments,
    generate_fbm_increments,
    stack_noises,
    validate_noise_covariance,
)
from .reflection import (
    epsilon_integral_reflection,
    hitting_time,
    inverse_integral_diagnostic,
    occupation_local_time,
    residual_reflection,
    skorokhod_map,
    tanaka_noise,
)
from .schemes import (
    SchemeOutput,
    euler_cir_full_truncation,
    implicit_sqrt_step,
    ou_squared_sum,
    simulate_ou,
    simulate_rou_projected,
    simulate_sqrt_process,
)

__version__ = "0.1.0"

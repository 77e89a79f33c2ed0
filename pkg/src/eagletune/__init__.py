"""Eagle Strategy optimisation (Levy flights + PSO/Firefly) with a
Lyapunov-scored BLDC reference-model tracking benchmark."""
from ._backend import NAME as KERNEL_BACKEND
from .levy import LevyParams, global_explore, levy_density, sample_levy_step
from .lyapunov import PMatrix, is_hurwitz, is_positive_definite, solve_lyapunov
from .objective import (
    LyapunovObjectiveSpec,
    ObjectiveFunction,
    instant_cost,
    make_benchmark,
    make_bldc_objective,
    tracking_objective,
)
from .optimizers import (
    EagleConfig,
    FireflyAgent,
    FireflyParams,
    Particle,
    PsoParams,
    RunResult,
    eagle_strategy_run,
    firefly_accept,
    firefly_step,
    plain_run,
    pso_accept,
    pso_step,
)
from .plant import (
    AdaptationParams,
    AdaptiveGains,
    GenericPlantParams,
    MotorParams,
    PIDGains,
    ReferenceModelParams,
    StepProfile,
    TrajectoryLog,
    bldc_dynamics,
    build_error_model,
    motor_time_constants,
    reference_model_dynamics,
    rk4_step,
    simulate_closed_loop,
    update_adaptive_gains,
)

__version__ = "0.1.0"

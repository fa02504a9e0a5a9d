"""modelfree: deterministic closed-loop simulation of model-free control.

Sliding-window algebraic differentiators, LTI and averaged buck-converter
plants, Broida-tuned PID, the discrete i-PI law and its symplectic i-PIS
extension with online alpha tuning, plus a scenario harness and CLI.
"""

__version__ = "0.1.0"

from .controllers import (  # noqa: F401
    BroidaModel,
    ControlInputs,
    IPiConfig,
    IPiState,
    IPisConfig,
    IPisState,
    PidGains,
    PidState,
    alpha_criterion,
    broida_gains,
    el_residual,
    ipi_step,
    ipis_alpha_update,
    ipis_step,
    pid_step,
)
from .estimation import (  # noqa: F401
    EstimatorOutput,
    SlidingWindow,
    estimate,
    estimate_derivative,
    estimate_value,
    push_sample,
    sliding_window,
)
from .harness import (  # noqa: F401
    DivergenceError,
    RunMetrics,
    Trace,
    Violation,
    compute_metrics,
    run_closed_loop,
    validate_scenario,
)
from .oscillator import (  # noqa: F401
    OscillatorParams,
    OscillatorState,
    explicit_euler_step,
    oscillator_energy,
    rk4_oscillator_step,
    run_energy_demo,
    symplectic_euler_step,
)
from .plants import (  # noqa: F401
    BuckConverter,
    NoiseSource,
    ParameterSchedule,
    StateSpacePlant,
    TransferFunction,
    dc_gain,
    noisy_measure,
    realize,
    schedule_value,
    step_buck,
    step_lti,
)
from .scenario import (  # noqa: F401
    ConfigError,
    ReferenceTrajectory,
    Scenario,
    load_scenario,
    parse_scenario_text,
    reference_at,
)

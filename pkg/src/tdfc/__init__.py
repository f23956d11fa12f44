"""Two-delay feedback control with a 3*tau periodic gain.

Gain synthesis for hyperbolic equilibria, exact period-map certification,
a fixed-step delay integrator and the wait-time chaos-control strategy.
"""

from .matlin import (
    DefectiveMatrixError,
    QuadratureError,
    RealBlockForm,
    Spectrum,
    eig,
    expm,
    integrate_matrix,
    real_block_form,
)
from .synth import (
    ControllerDesign,
    ModeTarget,
    NonHyperbolicError,
    complex_gain,
    jordan_gain,
    jordan_return_matrix,
    scalar_gain,
    synthesize,
    uniform_targets,
)
from .monodromy import MonodromyReport, certify, expected_multipliers, monodromy_matrix
from .systems import (
    DOUBLE_HOOK,
    DOUBLE_SCROLL,
    KONISHI_DOUBLE_SCROLL,
    ChuaParams,
    SystemModel,
    chua,
    linear,
    rossler,
)
from .dde import GainSchedule, History, Trajectory, integrate, order_check
from .chaos import RunMetrics, StrategyConfig, delta_sweep, run_strategy

__version__ = "0.1.0"

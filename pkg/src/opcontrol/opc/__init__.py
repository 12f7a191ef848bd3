from .expm import expm_frechet, matrix_exponential
from .fit import (
    Adam,
    FitReport,
    MemorySeedConfig,
    OpcModel,
    OptimizerConfig,
    fit_known_b,
    fit_unknown_b,
    spectrum,
)
from .generate import correction_operators, generate_averaged
from .memory import memory_columns, memory_correction, memory_transfer
from .objective import (
    gradient_known_b,
    gradient_unknown_b,
    objective_known_b,
    objective_unknown_b,
    value_and_grad_known_b,
    value_and_grad_unknown_b,
)

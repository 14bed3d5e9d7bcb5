"""Low-rank matrix projection for bipartite interaction prediction."""
from .errors import ConfigError, InputError, LmprojError, NumericalError, UndefinedMetricError
from .solver import LrrSolution, SolverConfig, l21_prox, numerical_rank, solve_lrr, svt

__version__ = "0.1.0"

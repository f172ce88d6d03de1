"""Simulation lab for partial sums of heavy-tailed moving averages."""
from .cadlag_geometry import StepPath, completed_graph, m2_distance, m2_distance_oracle, uniform_distance
from .experiments import ExperimentConfig, ResultRow
from .innovations import GAUSS_COPULA_AR, IID, InnovationModel, generate
from .levy_limit import CharTriple, StableLaw, levy_exponent
from .moving_average import Deterministic, GeometricRandom, ScaledPattern, WeightLaw
from .tail_model import TailParams

__version__ = "0.1.0"

"""fbmlab: numerical laboratory for fractional Brownian motion representations."""

__version__ = "0.1.0"

from .errors import DomainError, FeasibilityError, NumericsError, PreconditionError
from .fracops import FracOrder, HolderParams, SampledPath, TrigPoly
from .genpath import GeneratorConfig, PathEnsemble
from .kernels import KernelSpec
from .lawlab import LawReport, VarSeqPair
from .special import HurstParam, ModelConstants

__all__ = [
    "__version__",
    "DomainError",
    "PreconditionError",
    "NumericsError",
    "FeasibilityError",
    "SampledPath",
    "FracOrder",
    "HolderParams",
    "TrigPoly",
    "KernelSpec",
    "GeneratorConfig",
    "PathEnsemble",
    "VarSeqPair",
    "LawReport",
    "HurstParam",
    "ModelConstants",
]

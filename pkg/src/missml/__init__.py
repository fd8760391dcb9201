"""Maximum-likelihood structure of bivariate missing-data models.

Gaussian part: all complex critical points of the observed-data likelihood
by homotopy continuation, their classification, EM and simulation regimes.
Multinomial part: exact ML-degree combinatorics and an LP oracle over the
regions of the associated hyperplane arrangement.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .model import CountTable, Dataset, GaussianParams, ProbTable, SuffStats, reduce  # noqa: E402

__all__ = ["BACKEND", "CountTable", "Dataset", "GaussianParams", "ProbTable", "SuffStats", "reduce",
           "__version__"]

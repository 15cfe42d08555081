"""Tensor-network generative optimization for multi-knapsack assignment.

MPS Born machines (optionally U(1)-symmetric so every sample satisfies the
one-knapsack-per-object equality constraints), two-site sweep training on a
cost-weighted negative log-likelihood, exact autoregressive sampling, the
generative-enhanced optimization loop, and matched-budget baselines.
"""
from .baselines import (SAConfig, default_ensemble_size, random_search,
                        simulated_annealing)
from .dmrg import (TrainConfig, WeightedDataset, merged_gradient, nll_loss,
                   sweep, two_site_update)
from .errors import (CanonicalFormError, DegenerateStateError, EmptySelectionError,
                     EncodingError, OracleBudgetError, ShapeError, SupportError,
                     SymmetryError)
from .geo import (GeoConfig, Population, RunResult, geo_run, metrics, select,
                  softmax_weights)
from .knapsack import (KnapsackInstance, PenaltyConfig, brute_force_solve,
                       cost_binary, cost_integer, default_penalty,
                       generate_instance, is_feasible, to_binary, to_integer,
                       total_value)
from .mps import MPS, product_state, random_mps
from .sampling import SampleBatch, perfect_sample, sample_batch
from .symmetric import SymmetricMPS, build_assignment_mps, symmetry_defect
from .tensor import contract, matricize, tensorize, truncated_svd

__all__ = [
    "CanonicalFormError", "DegenerateStateError", "EmptySelectionError",
    "EncodingError", "GeoConfig", "KnapsackInstance", "MPS", "OracleBudgetError",
    "PenaltyConfig", "Population", "RunResult", "SAConfig", "SampleBatch",
    "ShapeError", "SupportError", "SymmetricMPS", "SymmetryError", "TrainConfig",
    "WeightedDataset", "brute_force_solve", "build_assignment_mps", "contract",
    "cost_binary", "cost_integer", "default_ensemble_size", "default_penalty",
    "generate_instance", "geo_run", "is_feasible", "matricize",
    "merged_gradient", "metrics", "nll_loss", "perfect_sample", "product_state",
    "random_mps", "random_search", "sample_batch", "select",
    "simulated_annealing", "softmax_weights", "sweep", "symmetry_defect",
    "tensorize", "to_binary", "to_integer", "total_value", "truncated_svd",
    "two_site_update",
]

"""Planted subgraph detection and identification in dense random graphs.

Samplers for the null and planted models, exact statistics (density,
embedding counts, likelihood ratio, regime predicates, second moment),
spectral detection and identification, and the semidefinite relaxation
with its null-graph certificate.
"""

__version__ = "0.1.0"

from .certificate import NullCertificate, laplacian_spectrum_check, null_certificate
from .counting import count_embeddings, edge_max_profile, edge_max_profile_all
from .density import DensityWitness, max_density
from .estimators import ExhaustiveDetector, SdpDetector, SpectralDetector, SpectralIdentifier
from .exceptions import (BudgetExceededError, EmptyGraphError, InvalidArgumentError,
                         InvalidEmbeddingError, InvalidParameterError, NoConvergenceError,
                         PlantedGraphError, SubgraphTooLargeError)
from .experiment import ExperimentConfig, ExperimentReport, run_experiment, sweep
from .graphs import (Embedding, Graph, PlantedInstance, ShiftedAdjacency, build_family, clique,
                     cycle_power, er_sample, hypercube, plant, regular_tree, shifted_adjacency, sigma)
from .outcomes import TestOutcome
from .qap import lift_assignment, qap_brute_force, qap_objective
from .sdp import SdpParams, SdpSolution, sdp_solve, sdp_test
from .spectral import (balance_certificate, identification_condition, identify,
                       significant_set, spectral_test)
from .stats import (exhaustive_test, likelihood_ratio, regime_report, second_moment_report)

__all__ = [name for name in dir() if not name.startswith("_")]

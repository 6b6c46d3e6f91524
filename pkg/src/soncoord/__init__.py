"""Stability analysis and coordination of parallel self-organizing control loops."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .system_model import (FunctionEvaluator, KpiEvaluator, LinearEvaluator, LinearLoopSystem,
                           SparsityPattern, WeightVector, neighbor_sets, pattern_from_adjacency)
from .stability import (StabilityReport, diag_strict_concavity_check, is_hurwitz_eigen,
                        integrate_linear, lambda_max_sym, lyapunov_certificate, routh_hurwitz_2,
                        routh_hurwitz_3, spectral_abscissa)
from .distributed import (DiagonalCoordinator, coordinate_2, coordinate_3, fisher_fuller,
                          gradient_coordinator)
from .synthesis import SolverConfig, Status, SynthesisProblem, SynthesisSolution, synthesize
from .simulation import (Constant, Harmonic, SaConfig, Trajectory, UpdateMode, integrate_ode,
                         ensemble_summary, noise_martingale_check, run_ensemble, simulate_sa)
from .estimation import (ConditionDatabase, SampleSet, finite_difference_estimate,
                         least_squares_estimate)
from .queueing import (DEFAULT_MODEL, OperatingPoint, PsQueueModel, blocking_probability,
                       jacobian_at, load, mean_transfer_time, outage, stability_region_scan,
                       stationary_distribution)
from .lte import (HexNetwork, Scenario, SonState, coordination_demo, evaluate_kpis,
                  linearize_and_coordinate, run_experiment, son_vector_field)

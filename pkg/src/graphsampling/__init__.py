"""Sampling-set selection and bandlimited reconstruction for graph signals.

The package selects near-optimal node subsets for reconstructing smooth
(bandlimited) signals on weighted graphs. Its main selection algorithm
works directly with the variation operator through sparse matvecs, with no
eigendecomposition of the full operator, which keeps memory at O(N) and
lets it scale well past the dense-basis regime. Dense spectral baselines,
reconstruction routines, synthetic signal models and a config-driven
experiment runner round out the toolkit.

Typical flow::

    import graphsampling as gs

    g = gs.erdos_renyi(300, 0.05, seed=1)
    op = gs.build_variation_operator(g, "combinatorial")
    chosen = gs.select_greedy_proxy(op, m=40, k=8)

    basis = gs.dense_gft(op)
    f = gs.gen_signal(basis, gs.SignalModel("exact", r=20, seed=3))
    rec = gs.consistent_reconstruct(basis, 20, chosen.indices,
                                    f[chosen.indices])
"""

__version__ = "0.1.0"

from .errors import (ConfigurationError, GraphParseError,
                     NonUniqueReconstructionError, NumericError)
from .graphs import (Graph, barabasi_albert, erdos_renyi, generate_graph,
                     knn_graph, largest_scc, load_features, load_graph,
                     save_features, save_graph, small_world)
from .operators import (OPERATOR_KINDS, SYMMETRIC_KINDS, VariationOperator,
                        build_variation_operator, max_magnitude_eigenvalue,
                        stationary_distribution)
from .reconstruction import (ReconstructionResult, check_theorem2_bound,
                             consistent_reconstruct, reconstruction_metrics,
                             variational_reconstruct)
from .selection import (SamplingSet, brute_force_best_set,
                        select_gauss_pivot, select_greedy_proxy, select_m2,
                        select_optimal_design, select_random)
from .signals import (SignalModel, add_noise_snr, gen_signal,
                      read_signal_csv, write_signal_csv)
from .spectral import (DENSE_CAP, CutoffEstimate, GftBasis, SolverConfig,
                       bandwidth, cos_theta_max, cutoff_estimate, dense_gft,
                       spectral_proxy)
from .experiments import (ExperimentConfig, ResultTable, SelectorSpec,
                          classify_one_vs_rest, derive_rng, load_config,
                          partial_basis, run_bench, run_mse_experiment)

__all__ = [
    "__version__",
    "ConfigurationError", "GraphParseError", "NonUniqueReconstructionError",
    "NumericError",
    "Graph", "barabasi_albert", "erdos_renyi", "generate_graph", "knn_graph",
    "largest_scc", "load_features", "load_graph", "save_features",
    "save_graph", "small_world",
    "OPERATOR_KINDS", "SYMMETRIC_KINDS", "VariationOperator",
    "build_variation_operator", "max_magnitude_eigenvalue",
    "stationary_distribution",
    "ReconstructionResult", "check_theorem2_bound", "consistent_reconstruct",
    "reconstruction_metrics", "variational_reconstruct",
    "SamplingSet", "brute_force_best_set", "select_gauss_pivot",
    "select_greedy_proxy", "select_m2", "select_optimal_design",
    "select_random",
    "SignalModel", "add_noise_snr", "gen_signal", "read_signal_csv",
    "write_signal_csv",
    "DENSE_CAP", "CutoffEstimate", "GftBasis", "SolverConfig", "bandwidth",
    "cos_theta_max", "cutoff_estimate", "dense_gft", "spectral_proxy",
    "ExperimentConfig", "ResultTable", "SelectorSpec",
    "classify_one_vs_rest", "derive_rng", "load_config", "partial_basis",
    "run_bench", "run_mse_experiment",
]

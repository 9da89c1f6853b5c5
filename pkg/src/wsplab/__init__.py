"""wsplab: a numerical laboratory for graphon-sampled graphs, spectral
filters, convolutional networks on graphs, and the error bounds that
govern transferring them across graph sizes."""

from .graphon import (Graph, Graphon, GraphonSignal, constant_graphon,
                      constant_signal, exp_graphon, graphon_l2_distance,
                      induced_graphon, induced_graphon_signal, max_degree,
                      mean_graphon, product_graphon, ramp_signal, sbm_graphon,
                      signal_l2_distance, sine_signal, step_graphon,
                      step_signal)
from .sampling import (SampleSpec, bernoulli_from_weighted, rng_stream,
                       sample_graph, sample_graph_signal, sample_stochastic,
                       sample_template, sample_weighted)
from .spectral import (EmptyBandError, GraphonSpectrum, SpectralDecomposition,
                       c_band_cardinality, c_eigenvalue_margin, eigendecompose,
                       gft, graphon_spectrum, inverse_gft, signed_spectrum,
                       step_graphon_spectrum_exact, wft)
from .filters import (SpectralProfile, apply_graph_filter, apply_graphon_filter,
                      apply_spectral, estimate_spectral_profile,
                      induced_graphon_filter_output, shift_commutation_check)
from .gnn import (CoefficientTensor, GnnConfig, TrainConfig, TrainingDivergence,
                  gnn_forward, init_coefficients, nonlinearity_check,
                  train_adam, wnn_forward)
from .bounds import (AssumptionReport, BoundIngredients, BoundReport,
                     bound_filter_transfer, bound_generic_filter,
                     bound_network_approx, bound_network_transfer,
                     bound_stochastic_filter, bound_template_filter,
                     bound_weighted_filter, bound_weighted_to_stochastic,
                     check_assumptions, edge_stochasticity_beta,
                     mc_verify_edge_norm, mc_verify_spacing,
                     node_stochasticity_alpha)
from .homdensity import (EDGE, PATH2, TRIANGLE, Motif, hom_count,
                         hom_density_graph, hom_density_graphon)
from .experiments import (ExperimentConfig, TrainTransferConfig, TransferReport,
                          TrainTransferReport, emit_report, run_train_transfer,
                          run_transfer_sweep)

__version__ = "0.1.0"

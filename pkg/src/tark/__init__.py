"""Row-access randomized Kaczmarz solvers with tail averaging.

Solves overdetermined least-squares and ridge-regression problems by
sampling one row at a time, including tail-averaged variants that
converge past the finite horizon of the plain iteration, plus bound
evaluators, benchmark problem generators, and an experiment harness.
"""

from .linalg import (DenseMatrix, LeastSquaresProblem, NumericalError,
                     SpectralSummary, demmel_condition, lstsq_reference,
                     ridge_solution, spectral_summary)
from .rng import RngStream, derive_seed, splitmix64
from .sampling import (WeightedSampler, build_sampler, diag_reweight,
                       rejection_sample, sample, sampler_for)
from .solvers import (SolverConfig, TailAverager, bound_theorem1, bound_theorem2,
                      bound_theorem3, doubling_burn_in, rk_step, run_rk, run_rka,
                      run_rku, run_tark, run_tark_doubling, run_tark_stream)
from .ridge import (RidgeConfig, augmented_problem, bound_theorem4, bound_theorem5,
                    lambda_to_mu, mu_to_lambda, rkrr_step, run_dual_rk, run_rkrr,
                    run_tark_rr)
from .active import (QRFactors, VolumeSample, bound_theorem6, entry_budget,
                     run_preconditioned_tark, thin_qr, volume_sample,
                     volume_sample_batch)
from .problems import (ChebyshevRowOracle, LowerBoundSpec, PolyRegressionSpec,
                       RowOracle, chebyshev_row_oracle, chebyshev_values,
                       eval_poly, gen_lower_bound_problem, gen_poly_regression,
                       lower_bound_mse, target_function)
from .harness import (BoundCheck, ConfigError, ExperimentConfig, MethodSpec,
                      TraceRecord, checkpoint_grid, records_to_csv,
                      run_experiment, verify_bounds, write_csv)

__version__ = "0.1.0"

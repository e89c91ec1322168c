"""Stochastic line-search laboratory.

A numpy/scipy library for studying adaptive line search driven by
probabilistic zeroth- and first-order oracles: instrumented problem
fixtures, contract-checked noisy oracles, the line-search loop itself,
post-hoc path classification, closed-form complexity constants, and a
Monte Carlo harness comparing empirical stopping-time tails against
high-probability bounds.
"""

__version__ = "1.0.0"

from .estimation import EpochEpsFController, EstimatorConfig, estimate_eps_f
from .harness import (CertificationReport, ExperimentConfig,
                      InadmissibleConfigError, TrialRow, TrialSummary,
                      certify_oracles, empirical_tail, run_trials,
                      wilson_interval)
from .instrument import (CENSORED, GridStraddleError, PathReport,
                         StoppingSpec, classify_large, classify_true,
                         compute_path_report, progress_Z, snap_to_step_grid,
                         stopping_time, verify_path_lemmas)
from .linesearch import (AloeParams, IterationRecord, Trace,
                         TrialDivergedError, aloe_run, armijo_check,
                         step_update)
from .oracles import (FirstOracleSpec, GsgFirstOracle, GsgParams,
                      MiniBatchFirstOracle, MiniBatchZerothOracle,
                      OracleParameterError, OracleQueryLog,
                      SyntheticFirstOracle, SyntheticZerothOracle,
                      ZerothOracleSpec, gsg_gradient, minibatch_gradient,
                      minibatch_value, prop1_subexp_params,
                      prop2_sample_size, prop3_params)
from .problems import (ErmDataset, ProblemInstance,
                       estimate_growth_constants, finite_difference_gradient,
                       make_linear, make_strongly_convex_quadratic,
                       make_synthetic_logistic)
from .rng import TrialStreams, probe_rng
from .theory import (TheoremInapplicableError, TheoryConstants, azuma_tail,
                     bar_alpha, bernstein_tail, constants_report,
                     convex_eps1_min, derive_constants, eps_lower_bound,
                     eta_range, h_of_alpha, r_damage,
                     simplified_nonconvex_eps_min, strongly_convex_display_C,
                     subexp_params_r, success_prob_p)

__all__ = [name for name in dir() if not name.startswith("_")]

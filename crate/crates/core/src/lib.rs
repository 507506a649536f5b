//! Exact and asymptotic statistics of arithmetic-progression counts in
//! Bernoulli random subsets of {1, .., n}.
//!
//! The crate is organized around a handful of exact combinatorial objects:
//! progression counts and enumeration (`progression`), the pair-overlap
//! census (`census`), limiting overlap kernels and their inner products
//! (`kernel`), regime classification and limiting correlations (`regime`),
//! tuple exploration and exact joint moments (`explorer`), seeded
//! simulation (`montecarlo`), an exhaustive small-n oracle (`oracle`),
//! Poisson-approximation bounds (`bounds`), and empirical distances
//! (`stats`). The `verify` module packages the acceptance criteria that
//! tie the independent routes to each other.
//!
//! Conventions used throughout: ground sets are 1-based intervals
//! {1, .., n}; progressions have diff >= 1 and length >= 3; pairs of
//! lengths are ordered ell1 >= ell2 >= 3; probabilities may be exact
//! rationals or f64, and everything that can stay rational does.

pub mod bounds;
pub mod census;
pub mod error;
pub mod explorer;
pub mod kernel;
pub mod montecarlo;
pub mod oracle;
pub mod progression;
pub mod rational;
pub mod regime;
pub mod stats;
pub mod verify;

pub use bounds::{bound_report, chen_stein_exact, BoundReport};
pub use census::{
    census_bruteforce, census_bruteforce_with_budget, census_fast, overlap_count, point_degree,
    positional_sum, PairCensus, DEFAULT_PAIR_BUDGET,
};
pub use error::{Error, Result};
pub use explorer::{
    centred_product_expectation, dominant_moment, exact_joint_moment,
    exact_joint_moment_with_budget, explore, perfect_matchings, progressions_meet,
    standardized_from_mixed, validate_type_vectors, ExplorationResult, JointMomentResult,
    StandardizedMoment, TypeVectorCheck, DEFAULT_MOMENT_BUDGET, MAX_CENTRED_TUPLE,
};
pub use kernel::{
    build_phi, entropy_norm_sq, inner_product, l2_distance, lambda_constant, write_samples_csv,
    Kernel, LambdaReport, LengthClass, PiecewiseLinear,
};
pub use montecarlo::{
    count_in_subset, count_naive, read_batch_csv, replica_seed, run_experiment, sample_subset,
    splitmix64, SampleBatch, SampleRow, SubsetMask,
};
pub use oracle::{
    covariance_from_census, covariance_from_census_f64, exact_covariance, exact_covariance_f64,
    exact_joint_distribution, ExactDistribution, MAX_ORACLE_N,
};
pub use progression::{count_aps, enumerate_aps, expected_count, ModelParams, Progression};
pub use rational::{fmt_rat, parse_rat, rat, rat_int, rat_pow, rat_to_f64, Num, Prob, Rat};
pub use regime::{
    classify_regimes, classify_regimes_with, gamma_coeff, kappa, PairRegime, RegimeReport,
    RegimeThresholds, UnivariateRegime,
};
pub use stats::{empirical_correlation, empirical_pmf, ks_normal_distance, tv_distance_poisson};
pub use verify::{run_all, run_criterion, CriterionReport, CRITERION_NAMES};

//! Checkers for containment, diminishing adaptation, drift, the law of large
//! numbers, geometric bounds of the auto-regressive examples and the
//! simultaneous weak Harris constants.

mod bounds;
mod containment;
mod diminishing;
mod drift;
mod harris;
mod lln;

pub use bounds::{ar_bound_check, restricted_adaptation_drift_bound, ArExample, BoundRow, BOUND_TOL};
pub use containment::{
    containment_discrete_ar_exact, containment_horizon, containment_tail, estimate_containment,
    pilot_burn_in, pilot_reference, ContainmentConfig, ContainmentEstimate,
};
pub use diminishing::{estimate_diminishing, DiminishingConfig, DiminishingEstimate, DEFAULT_PAIRS, REAL_LATTICE};
pub use drift::{check_drift, fit_drift, DriftPoint, DriftReport};
pub use harris::{
    check_harris_hypotheses, fit_harris_inputs, harris_constants, random_reversible_chain,
    verify_harris_contraction, FiniteChain, HarrisConstants, HarrisReport, MAX_STATES,
};
pub use lln::{lln_curve, LlnReport, TestFn, TestFunction};

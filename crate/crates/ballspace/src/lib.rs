//! Exact-arithmetic ball spaces over finite metric spaces.
//!
//! The crate builds Caristi-Kirk (CK), Oettli-Thera (OT) and CK-infinity
//! ball families from exact rational data, checks the axioms and the
//! strong-contractivity conditions that make singleton descent work, and
//! solves the classical fixed-point and variational theorems (Caristi-Kirk,
//! Ekeland in three forms, Flower Petal, Takahashi, Oettli-Thera) on
//! concrete instances, emitting certificates whose conclusions are
//! re-verified by independent brute force.
//!
//! Start with the runnable examples (`cargo run --example ck_balls`) or the
//! `ballspace` binary, which exposes the same checks over instance files.

pub mod balls;
pub mod functions;
pub mod scalar;
pub mod space;

#[cfg(test)]
pub(crate) mod testdata;

pub use balls::{
    check_nest_equivalences, check_spherical_completeness, check_strongly_contractive,
    ck_assignment, ck_ball, ckinf_assignment, ckinf_ball, ckinf_singleton,
    enumerate_maximal_nests, generated_ball_space, ot_assignment, ot_ball, petal,
    singleton_descent, Ball, BallAssignment, BallOrigin, ContractivityViolation, DescentError,
    DescentTrace, NestBoundError, NestViolation, NEST_ENUMERATION_BOUND,
};
pub use functions::{
    check_ot_axioms, ck_to_ot, generate_instance, generate_ot, ot_elements, restrict_ckinf,
    CkFunction, CkInfFunction, FunctionError, OtAxiomReport, OtFunction, OtViolation,
};
pub use scalar::{ExtScalar, ParseScalarError, Scalar};
pub use space::{check_metric_axioms, FiniteMetricSpace, MetricViolation, PointId, SpaceError};

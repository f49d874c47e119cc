//! Maintenance tour planning under RUL deadlines.
//!
//! Assets report their position and remaining useful life (RUL) through an
//! upstream prognostics stage. This crate plans a minimum-distance tour from
//! a maintenance center that reaches every asset before its RUL expires:
//!
//! - [`problem`]: instances (center, assets, travel model), validation,
//!   seeded random generation, JSON file format.
//! - [`route`]: permutation routes and their evaluation (distance, arrival
//!   times, lateness penalty, feasibility).
//! - [`ga`]: the genetic algorithm (uniform PMX crossover, uniform swap
//!   mutation, tournament selection, elitism) with convergence history.
//! - [`oracle`]: exact solvers (exhaustive search, Held–Karp with deadline
//!   pruning) for validating the GA on small instances.
//! - [`service`]: the decision service — RUL ingestion, append-only log,
//!   plan requests with cost annotation.
//! - [`http`]: JSON HTTP front for the decision service.

pub mod ga;
pub mod http;
pub mod oracle;
pub mod problem;
pub mod route;
pub mod service;

pub use ga::{run_ga, EvalMode, GaConfig, GaRunResult, GenerationStats};
pub use oracle::{solve_exhaustive, solve_held_karp, OracleResult, OracleStatus};
pub use problem::{distance, generate_instance, AssetRecord, Bounds, Point2D, ProblemInstance};
pub use route::{evaluate_route, route_from_ids, Route, RouteEvaluation};
pub use service::{DecisionService, PlanBody, PlanOptions, PlanReport, RulUpdate, ServiceConfig};

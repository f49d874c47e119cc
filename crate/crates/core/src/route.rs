//! Route encoding and evaluation.
//!
//! A route is a permutation of the instance's asset indices. Evaluation
//! walks the legs from the center, accumulating distance and time, checks
//! every arrival against the asset's RUL deadline, and folds lateness into
//! a penalized scalar fitness the GA minimizes.

use crate::problem::{distance, ProblemInstance};
use serde::{Deserialize, Serialize};

/// Visiting order: a permutation of `{0..n-1}` over the instance's assets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Route {
    order: Vec<usize>,
}

impl Route {
    /// Builds a route, rejecting anything that is not a permutation of
    /// `{0..n-1}`.
    pub fn new(order: Vec<usize>) -> Result<Self, RouteError> {
        check_permutation(&order)?;
        Ok(Route { order })
    }

    /// The identity route `[0, 1, .., n-1]`.
    pub fn identity(n: usize) -> Self {
        Route {
            order: (0..n).collect(),
        }
    }

    /// Wraps an order already known to be a permutation (operator outputs).
    pub(crate) fn from_permutation(order: Vec<usize>) -> Self {
        debug_assert!(check_permutation(&order).is_ok());
        Route { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

fn check_permutation(order: &[usize]) -> Result<(), RouteError> {
    let n = order.len();
    let mut seen = vec![false; n];
    for &idx in order {
        if idx >= n {
            return Err(RouteError::NotAPermutation {
                detail: format!("index {idx} out of range for length {n}"),
            });
        }
        if seen[idx] {
            return Err(RouteError::NotAPermutation {
                detail: format!("index {idx} appears more than once"),
            });
        }
        seen[idx] = true;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouteError {
    #[error("route is not a valid permutation: {detail}")]
    NotAPermutation { detail: String },
    #[error("route length {route_len} does not match instance with {n_assets} assets")]
    LengthMismatch { route_len: usize, n_assets: usize },
    #[error("unknown asset id {id:?}")]
    UnknownId { id: String },
    #[error("asset id {id:?} appears more than once")]
    DuplicateId { id: String },
}

/// Result of walking one route: distance, per-visit arrival times, deadline
/// violations and the penalized fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteEvaluation {
    pub total_distance: f64,
    /// Arrival time at each visited asset, in visit order.
    pub arrival_times: Vec<f64>,
    /// `(asset id, lateness hours)` for every missed deadline.
    pub violations: Vec<(String, f64)>,
    pub feasible: bool,
    /// `total_distance + penalty_coefficient * sum of lateness`.
    pub fitness: f64,
}

/// Evaluates `route` against `instance`.
///
/// Arrival at the k-th visit is the cumulative leg distance divided by the
/// travel speed plus the service times of the visits before it; the deadline
/// is checked at arrival, before the asset's own service. Ties at the
/// boundary (`arrival == rul`) count as feasible. When `return_to_center`
/// is set the return leg adds to distance but has no deadline.
pub fn evaluate_route(
    instance: &ProblemInstance,
    route: &Route,
    penalty_coefficient: f64,
) -> Result<RouteEvaluation, RouteError> {
    if route.len() != instance.n_assets() {
        return Err(RouteError::LengthMismatch {
            route_len: route.len(),
            n_assets: instance.n_assets(),
        });
    }
    check_permutation(route.order())?;

    let mut total_distance = 0.0;
    let mut elapsed_service = 0.0;
    let mut arrival_times = Vec::with_capacity(route.len());
    let mut violations = Vec::new();
    let mut lateness_sum = 0.0;
    let mut prev = instance.center;

    for &idx in route.order() {
        let asset = &instance.assets[idx];
        total_distance += distance(prev, asset.position);
        let arrival = total_distance / instance.travel_speed + elapsed_service;
        arrival_times.push(arrival);
        if arrival > asset.rul {
            let late = arrival - asset.rul;
            violations.push((asset.id.clone(), late));
            lateness_sum += late;
        }
        elapsed_service += asset.service_time;
        prev = asset.position;
    }
    if instance.return_to_center {
        total_distance += distance(prev, instance.center);
    }

    let feasible = violations.is_empty();
    Ok(RouteEvaluation {
        total_distance,
        arrival_times,
        violations,
        feasible,
        fitness: total_distance + penalty_coefficient * lateness_sum,
    })
}

/// Translates an ordered list of asset ids into an index route.
pub fn route_from_ids(instance: &ProblemInstance, ids: &[String]) -> Result<Route, RouteError> {
    if ids.len() != instance.n_assets() {
        return Err(RouteError::LengthMismatch {
            route_len: ids.len(),
            n_assets: instance.n_assets(),
        });
    }
    let mut order = Vec::with_capacity(ids.len());
    let mut used = vec![false; instance.n_assets()];
    for id in ids {
        let idx = instance
            .assets
            .iter()
            .position(|a| &a.id == id)
            .ok_or_else(|| RouteError::UnknownId { id: id.clone() })?;
        if used[idx] {
            return Err(RouteError::DuplicateId { id: id.clone() });
        }
        used[idx] = true;
        order.push(idx);
    }
    Ok(Route::from_permutation(order))
}

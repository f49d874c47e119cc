//! Exact ground-truth solvers for small instances.
//!
//! `solve_exhaustive` enumerates every visiting order; `solve_held_karp`
//! runs subset dynamic programming with deadline pruning. Both return the
//! minimum-distance feasible route, and must agree wherever both run; the
//! GA is validated against them.

use crate::problem::{distance, ProblemInstance};
use crate::route::{evaluate_route, Route, RouteEvaluation};
use itertools::Itertools;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleStatus {
    OptimalFeasible,
    NoFeasibleRoute,
    InstanceTooLarge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub status: OracleStatus,
    pub best_route: Option<Route>,
    pub best_evaluation: Option<RouteEvaluation>,
}

impl OracleResult {
    fn too_large() -> Self {
        OracleResult {
            status: OracleStatus::InstanceTooLarge,
            best_route: None,
            best_evaluation: None,
        }
    }

    fn infeasible() -> Self {
        OracleResult {
            status: OracleStatus::NoFeasibleRoute,
            best_route: None,
            best_evaluation: None,
        }
    }

    fn optimal(instance: &ProblemInstance, route: Route) -> Self {
        let eval = evaluate_route(instance, &route, 0.0).expect("oracle route is a permutation");
        debug_assert!(eval.feasible);
        OracleResult {
            status: OracleStatus::OptimalFeasible,
            best_route: Some(route),
            best_evaluation: Some(eval),
        }
    }

    pub fn optimal_distance(&self) -> Option<f64> {
        self.best_evaluation.as_ref().map(|e| e.total_distance)
    }
}

/// Enumerates all `n!` visiting orders and returns the feasible route of
/// minimum distance. Enumeration is in lexicographic order and only strict
/// improvements are kept, so ties resolve to the lexicographically smallest
/// permutation.
pub fn solve_exhaustive(instance: &ProblemInstance, max_n: usize) -> OracleResult {
    let n = instance.n_assets();
    if n > max_n {
        return OracleResult::too_large();
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..n).permutations(n) {
        let route = Route::from_permutation(perm);
        let eval = evaluate_route(instance, &route, 0.0).expect("generated permutation");
        if !eval.feasible {
            continue;
        }
        let better = match &best {
            None => true,
            Some((d, _)) => eval.total_distance < *d,
        };
        if better {
            best = Some((eval.total_distance, route.order().to_vec()));
        }
    }
    match best {
        Some((_, order)) => OracleResult::optimal(instance, Route::from_permutation(order)),
        None => OracleResult::infeasible(),
    }
}

/// Held–Karp dynamic programming over (visited subset, last asset) states,
/// minimizing path distance, with deadline pruning.
///
/// Pruning is exact: within a fixed visited subset the accumulated service
/// time is order-independent, so the arrival time at `last` is a strictly
/// increasing affine function of the path distance. A state reached with
/// smaller distance therefore dominates — it can never make a feasible
/// continuation infeasible nor a cheap completion expensive.
pub fn solve_held_karp(instance: &ProblemInstance, max_n: usize) -> OracleResult {
    let n = instance.n_assets();
    if n > max_n {
        return OracleResult::too_large();
    }

    let speed = instance.travel_speed;
    let from_center: Vec<f64> = instance
        .assets
        .iter()
        .map(|a| distance(instance.center, a.position))
        .collect();
    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| distance(instance.assets[i].position, instance.assets[j].position))
                .collect()
        })
        .collect();
    let service: Vec<f64> = instance.assets.iter().map(|a| a.service_time).collect();
    let rul: Vec<f64> = instance.assets.iter().map(|a| a.rul).collect();

    let full = 1usize << n;
    let mut dp = vec![f64::INFINITY; full * n];
    let mut parent = vec![usize::MAX; full * n];

    // service time accumulated before arriving at `last`, given the visited set
    let service_before = |mask: usize, last: usize| -> f64 {
        let mut sum = 0.0;
        let mut m = mask & !(1 << last);
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            sum += service[i];
            m &= m - 1;
        }
        sum
    };

    for last in 0..n {
        let d = from_center[last];
        if d / speed <= rul[last] {
            dp[(1 << last) * n + last] = d;
        }
    }

    for mask in 1..full {
        for last in 0..n {
            if mask & (1 << last) == 0 {
                continue;
            }
            let cur = dp[mask * n + last];
            if !cur.is_finite() {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nmask = mask | (1 << next);
                let nd = cur + dist[last][next];
                let arrival = nd / speed + service_before(nmask, next);
                if arrival > rul[next] {
                    continue;
                }
                let slot = nmask * n + next;
                if nd < dp[slot] {
                    dp[slot] = nd;
                    parent[slot] = last;
                }
            }
        }
    }

    let full_mask = full - 1;
    let mut best: Option<(f64, usize)> = None;
    for last in 0..n {
        let d = dp[full_mask * n + last];
        if !d.is_finite() {
            continue;
        }
        let total = if instance.return_to_center {
            d + from_center[last]
        } else {
            d
        };
        let better = match best {
            None => true,
            Some((bd, _)) => total < bd,
        };
        if better {
            best = Some((total, last));
        }
    }

    let Some((_, mut last)) = best else {
        return OracleResult::infeasible();
    };
    let mut order = Vec::with_capacity(n);
    let mut mask = full_mask;
    loop {
        order.push(last);
        let prev = parent[mask * n + last];
        mask &= !(1 << last);
        if prev == usize::MAX {
            break;
        }
        last = prev;
    }
    order.reverse();
    OracleResult::optimal(instance, Route::from_permutation(order))
}

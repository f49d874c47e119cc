//! Post-prognostics decision service: ingests RUL updates from the
//! prognostics stage, keeps an asset registry backed by an append-only
//! JSON-lines log, and turns the registry into maintenance plans with cost
//! annotation.
//!
//! RULs are taken as valid at plan time; any decay between ingestion and
//! planning is the caller's concern.

use crate::ga::{run_ga, GaConfig, GaError, GenerationStats};
use crate::problem::{AssetRecord, Point2D, ProblemInstance, ValidationError, Violation};
use crate::route::{evaluate_route, RouteEvaluation};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

/// One RUL report for one asset, as produced upstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulUpdate {
    pub asset_id: String,
    pub position: Point2D,
    pub rul: f64,
    #[serde(default)]
    pub service_time: f64,
    #[serde(default)]
    pub component_cost: f64,
    pub timestamp: DateTime<Utc>,
}

impl RulUpdate {
    fn validate(&self) -> Result<(), ValidationError> {
        let mut violations = Vec::new();
        let mut push = |field: &str, reason: &str| {
            violations.push(Violation {
                field: field.to_string(),
                reason: reason.to_string(),
            })
        };
        if self.asset_id.is_empty() {
            push("asset_id", "must be non-empty");
        }
        if !self.position.is_finite() {
            push("position", "coordinates must be finite");
        }
        if !(self.rul.is_finite() && self.rul > 0.0) {
            push("rul", "rul must be > 0");
        }
        if !(self.service_time.is_finite() && self.service_time >= 0.0) {
            push("service_time", "must be >= 0");
        }
        if !(self.component_cost.is_finite() && self.component_cost >= 0.0) {
            push("component_cost", "must be >= 0");
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations })
        }
    }

    fn to_asset(&self) -> AssetRecord {
        AssetRecord {
            id: self.asset_id.clone(),
            position: self.position,
            rul: self.rul,
            service_time: self.service_time,
            component_cost: self.component_cost,
        }
    }
}

/// Instance-level parameters the registry itself does not carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub center: Point2D,
    pub travel_speed: f64,
    pub hourly_wage: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            center: Point2D::new(0.0, 0.0),
            travel_speed: 1.0,
            hourly_wage: 0.0,
        }
    }
}

/// Options accepted by a plan request. Unset GA fields fall back to the
/// defaults; an unset seed is drawn from entropy and echoed in the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanOptions {
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub crossover_prob: Option<f64>,
    pub crossover_swap_prob: Option<f64>,
    pub mutation_prob: Option<f64>,
    pub mutation_swap_prob: Option<f64>,
    pub tournament_size: Option<usize>,
    pub elitism_count: Option<usize>,
    pub penalty_coefficient: Option<f64>,
    pub return_to_center: Option<bool>,
    pub seed: Option<u64>,
}

impl PlanOptions {
    pub fn ga_config(&self, seed: u64) -> GaConfig {
        let d = GaConfig::default();
        GaConfig {
            population_size: self.population_size.unwrap_or(d.population_size),
            generations: self.generations.unwrap_or(d.generations),
            crossover_prob: self.crossover_prob.unwrap_or(d.crossover_prob),
            crossover_swap_prob: self.crossover_swap_prob.unwrap_or(d.crossover_swap_prob),
            mutation_prob: self.mutation_prob.unwrap_or(d.mutation_prob),
            mutation_swap_prob: self.mutation_swap_prob.unwrap_or(d.mutation_swap_prob),
            tournament_size: self.tournament_size.unwrap_or(d.tournament_size),
            elitism_count: self.elitism_count.unwrap_or(d.elitism_count),
            penalty_coefficient: self.penalty_coefficient.unwrap_or(d.penalty_coefficient),
            seed,
        }
    }
}

/// One scheduled visit in a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub asset_id: String,
    pub arrival_time: f64,
    pub deadline: f64,
    /// `deadline - arrival_time`; negative when late.
    pub slack: f64,
}

/// GA provenance attached to a plan: the final generation's stats plus the
/// seed that drove the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaSummary {
    #[serde(flatten)]
    pub final_generation: GenerationStats,
    pub seed: u64,
}

/// The deterministic content of a plan (everything except its identity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanBody {
    pub visits: Vec<Visit>,
    pub total_distance: f64,
    pub feasible: bool,
    pub travel_time: f64,
    pub labor_cost: f64,
    pub parts_cost: f64,
    pub total_cost: f64,
    pub ga_summary: GaSummary,
}

/// A stored plan: identity plus body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub plan_id: String,
    pub created_at: DateTime<Utc>,
    #[serde(flatten)]
    pub body: PlanBody,
}

/// Cost annotation of an evaluated route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub travel_time: f64,
    pub labor_cost: f64,
    pub parts_cost: f64,
    pub total_cost: f64,
}

/// Travel time, labor cost (wage x on-duty hours) and parts cost for a
/// route evaluated against `instance`.
pub fn annotate_plan_cost(evaluation: &RouteEvaluation, instance: &ProblemInstance) -> CostBreakdown {
    let travel_time = evaluation.total_distance / instance.travel_speed;
    let service_total: f64 = instance.assets.iter().map(|a| a.service_time).sum();
    let labor_cost = instance.hourly_wage * (travel_time + service_total);
    let parts_cost: f64 = instance.assets.iter().map(|a| a.component_cost).sum();
    CostBreakdown {
        travel_time,
        labor_cost,
        parts_cost,
        total_cost: labor_cost + parts_cost,
    }
}

/// Builds the deterministic plan content for an instance: runs the GA,
/// derives the visit schedule and annotates costs.
pub fn compute_plan(instance: &ProblemInstance, config: &GaConfig) -> Result<PlanBody, GaError> {
    let result = run_ga(instance, config)?;
    Ok(plan_body(instance, &result))
}

/// Turns a finished GA run into the visit schedule plus cost annotation.
pub fn plan_body(instance: &ProblemInstance, result: &crate::ga::GaRunResult) -> PlanBody {
    let eval = &result.best_evaluation;
    let visits = result
        .best_route
        .order()
        .iter()
        .zip(&eval.arrival_times)
        .map(|(&idx, &arrival)| {
            let asset = &instance.assets[idx];
            Visit {
                asset_id: asset.id.clone(),
                arrival_time: arrival,
                deadline: asset.rul,
                slack: asset.rul - arrival,
            }
        })
        .collect();
    let cost = annotate_plan_cost(eval, instance);
    PlanBody {
        visits,
        total_distance: eval.total_distance,
        feasible: eval.feasible,
        travel_time: cost.travel_time,
        labor_cost: cost.labor_cost,
        parts_cost: cost.parts_cost,
        total_cost: cost.total_cost,
        ga_summary: GaSummary {
            final_generation: result.history.last().expect("history non-empty").clone(),
            seed: result.seed,
        },
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("persistence log error: {0}")]
    Storage(#[from] std::io::Error),
    #[error("corrupt persistence log at line {line}: {source}")]
    CorruptLog {
        line: usize,
        source: serde_json::Error,
    },
    #[error("registry is empty; ingest at least one asset before planning")]
    EmptyRegistry,
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error("plan {0:?} not found")]
    PlanNotFound(String),
}

/// The registry plus plan store. Writers are serialized by the owner
/// (typically a lock); plan computation runs on a snapshot and never sees
/// concurrent ingestion.
pub struct DecisionService {
    config: ServiceConfig,
    log_path: Option<PathBuf>,
    registry: BTreeMap<String, RulUpdate>,
    version: u64,
    plans: HashMap<String, PlanReport>,
}

impl DecisionService {
    /// In-memory service without persistence.
    pub fn in_memory(config: ServiceConfig) -> Self {
        DecisionService {
            config,
            log_path: None,
            registry: BTreeMap::new(),
            version: 0,
            plans: HashMap::new(),
        }
    }

    /// Opens a service backed by a JSON-lines log, replaying any existing
    /// entries to rebuild the registry.
    pub fn open(config: ServiceConfig, log_path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = log_path.as_ref().to_path_buf();
        let mut svc = DecisionService {
            config,
            log_path: Some(path.clone()),
            registry: BTreeMap::new(),
            version: 0,
            plans: HashMap::new(),
        };
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let update: RulUpdate = serde_json::from_str(&line)
                    .map_err(|source| ServiceError::CorruptLog { line: i + 1, source })?;
                svc.apply(update);
            }
        }
        Ok(svc)
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    // upsert: newest timestamp wins, equal timestamps last-write-wins
    fn apply(&mut self, update: RulUpdate) {
        match self.registry.get(&update.asset_id) {
            Some(existing) if existing.timestamp > update.timestamp => {}
            _ => {
                self.registry.insert(update.asset_id.clone(), update);
            }
        }
        self.version += 1;
    }

    /// Validates, persists and applies one RUL update; returns the new
    /// registry version.
    pub fn ingest_rul_update(&mut self, update: RulUpdate) -> Result<u64, ServiceError> {
        update.validate()?;
        if let Some(path) = &self.log_path {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            let mut line = serde_json::to_string(&update).expect("update serializes");
            line.push('\n');
            file.write_all(line.as_bytes())?;
        }
        self.apply(update);
        Ok(self.version)
    }

    /// Registry snapshot sorted by asset id.
    pub fn list_assets(&self) -> Vec<AssetRecord> {
        self.registry.values().map(RulUpdate::to_asset).collect()
    }

    /// Point-in-time problem instance built from the registry (assets
    /// ordered by id, so ingestion order never matters).
    pub fn snapshot_instance(&self, return_to_center: bool) -> Result<ProblemInstance, ServiceError> {
        if self.registry.is_empty() {
            return Err(ServiceError::EmptyRegistry);
        }
        let mut instance = ProblemInstance::new(self.config.center, self.list_assets());
        instance.travel_speed = self.config.travel_speed;
        instance.hourly_wage = self.config.hourly_wage;
        instance.return_to_center = return_to_center;
        Ok(instance)
    }

    /// Plans a tour over the current registry and stores the report.
    pub fn request_plan(&mut self, options: &PlanOptions) -> Result<PlanReport, ServiceError> {
        let instance = self.snapshot_instance(options.return_to_center.unwrap_or(false))?;
        let seed = options.seed.unwrap_or_else(rand::random);
        let body = compute_plan(&instance, &options.ga_config(seed))?;
        let report = PlanReport {
            plan_id: uuid::Uuid::new_v4().to_string(),
            created_at: Utc::now(),
            body,
        };
        self.store_plan(report.clone());
        Ok(report)
    }

    pub fn store_plan(&mut self, report: PlanReport) {
        self.plans.insert(report.plan_id.clone(), report);
    }

    pub fn get_plan(&self, plan_id: &str) -> Result<&PlanReport, ServiceError> {
        self.plans
            .get(plan_id)
            .ok_or_else(|| ServiceError::PlanNotFound(plan_id.to_string()))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }
}

/// Re-checks a plan's feasibility and slacks against a fresh evaluation of
/// its visit order; used by tests and the feasibility-honesty invariant.
pub fn verify_plan(body: &PlanBody, instance: &ProblemInstance) -> Result<(), String> {
    let ids: Vec<String> = body.visits.iter().map(|v| v.asset_id.clone()).collect();
    let route = crate::route::route_from_ids(instance, &ids).map_err(|e| e.to_string())?;
    let eval = evaluate_route(instance, &route, 0.0).map_err(|e| e.to_string())?;
    if eval.feasible != body.feasible {
        return Err(format!(
            "feasible flag mismatch: plan says {}, re-evaluation says {}",
            body.feasible, eval.feasible
        ));
    }
    for (visit, arrival) in body.visits.iter().zip(&eval.arrival_times) {
        if (visit.arrival_time - arrival).abs() > 1e-9 {
            return Err(format!("arrival mismatch at {}", visit.asset_id));
        }
        if (visit.slack - (visit.deadline - arrival)).abs() > 1e-9 {
            return Err(format!("slack mismatch at {}", visit.asset_id));
        }
    }
    Ok(())
}

//! Problem model: assets with positions and RUL deadlines, the maintenance
//! center, and the travel model.
//!
//! Units: distance in km, time in hours, speed in km/h. With the default
//! speed of 1.0 km/h travel time and distance are numerically equal.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

/// A position in the plane, in kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance between two points, in km.
pub fn distance(a: Point2D, b: Point2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// One maintainable asset as known to the planner.
///
/// `rul` is a hard deadline on the arrival time at the asset, measured from
/// tour start (time 0 at the maintenance center).
#[derive(Debug, Clone, PartialEq)]
pub struct AssetRecord {
    pub id: String,
    pub position: Point2D,
    pub rul: f64,
    pub service_time: f64,
    pub component_cost: f64,
}

impl AssetRecord {
    pub fn new(id: impl Into<String>, position: Point2D, rul: f64) -> Self {
        AssetRecord {
            id: id.into(),
            position,
            rul,
            service_time: 0.0,
            component_cost: 0.0,
        }
    }
}

/// A deadline-constrained routing instance: the maintenance center plus the
/// assets the team must visit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub center: Point2D,
    pub assets: Vec<AssetRecord>,
    /// km/h; default 1.0 so distance and travel time coincide.
    pub travel_speed: f64,
    /// Open path by default; when set, the tour distance includes the leg
    /// back to the center (no deadline applies to the return).
    pub return_to_center: bool,
    pub hourly_wage: f64,
}

impl ProblemInstance {
    pub fn new(center: Point2D, assets: Vec<AssetRecord>) -> Self {
        ProblemInstance {
            center,
            assets,
            travel_speed: 1.0,
            return_to_center: false,
            hourly_wage: 0.0,
        }
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    /// Checks every instance invariant, reporting all violations at once.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut violations = Vec::new();
        if !self.center.is_finite() {
            violations.push(Violation::new("center", "coordinates must be finite"));
        }
        if !(self.travel_speed.is_finite() && self.travel_speed > 0.0) {
            violations.push(Violation::new("travel_speed", "must be > 0"));
        }
        if !(self.hourly_wage.is_finite() && self.hourly_wage >= 0.0) {
            violations.push(Violation::new("hourly_wage", "must be >= 0"));
        }
        if self.assets.is_empty() {
            violations.push(Violation::new("assets", "must contain at least one asset"));
        }
        let mut seen = HashSet::new();
        for (i, asset) in self.assets.iter().enumerate() {
            let field = |name: &str| format!("assets[{i}].{name}");
            if asset.id.is_empty() {
                violations.push(Violation::new(field("id"), "must be non-empty"));
            }
            if !seen.insert(asset.id.clone()) {
                violations.push(Violation::new(
                    field("id"),
                    format!("duplicate id {:?}", asset.id),
                ));
            }
            if !asset.position.is_finite() {
                violations.push(Violation::new(
                    field("position"),
                    "coordinates must be finite",
                ));
            }
            if !(asset.rul.is_finite() && asset.rul > 0.0) {
                violations.push(Violation::new(field("rul"), "rul must be > 0"));
            }
            if !(asset.service_time.is_finite() && asset.service_time >= 0.0) {
                violations.push(Violation::new(field("service_time"), "must be >= 0"));
            }
            if !(asset.component_cost.is_finite() && asset.component_cost >= 0.0) {
                violations.push(Violation::new(field("component_cost"), "must be >= 0"));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations })
        }
    }

    /// Parses and validates the instance JSON document.
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let wire: InstanceWire = serde_json::from_str(text)?;
        let instance = ProblemInstance::from(wire);
        instance.validate()?;
        Ok(instance)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&InstanceWire::from(self))
            .expect("instance serialization cannot fail");
        out.push('\n');
        out
    }
}

/// One violated invariant: where and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

impl Violation {
    fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// All invariant violations found in a candidate instance.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid instance:")?;
        for v in &self.violations {
            write!(f, " [{}: {}]", v.field, v.reason)?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("malformed instance JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

// Wire format. Asset coordinates are flattened to x/y and optional fields
// take documented defaults; unknown fields are rejected.

fn default_speed() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceWire {
    center: Point2D,
    #[serde(default = "default_speed")]
    travel_speed: f64,
    #[serde(default)]
    return_to_center: bool,
    #[serde(default)]
    hourly_wage: f64,
    assets: Vec<AssetWire>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct AssetWire {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub rul: f64,
    #[serde(default)]
    pub service_time: f64,
    #[serde(default)]
    pub component_cost: f64,
}

impl From<InstanceWire> for ProblemInstance {
    fn from(w: InstanceWire) -> Self {
        ProblemInstance {
            center: w.center,
            assets: w.assets.into_iter().map(AssetRecord::from).collect(),
            travel_speed: w.travel_speed,
            return_to_center: w.return_to_center,
            hourly_wage: w.hourly_wage,
        }
    }
}

impl From<AssetWire> for AssetRecord {
    fn from(w: AssetWire) -> Self {
        AssetRecord {
            id: w.id,
            position: Point2D::new(w.x, w.y),
            rul: w.rul,
            service_time: w.service_time,
            component_cost: w.component_cost,
        }
    }
}

impl From<&ProblemInstance> for InstanceWire {
    fn from(p: &ProblemInstance) -> Self {
        InstanceWire {
            center: p.center,
            travel_speed: p.travel_speed,
            return_to_center: p.return_to_center,
            hourly_wage: p.hourly_wage,
            assets: p.assets.iter().map(AssetWire::from).collect(),
        }
    }
}

impl From<&AssetRecord> for AssetWire {
    fn from(a: &AssetRecord) -> Self {
        AssetWire {
            id: a.id.clone(),
            x: a.position.x,
            y: a.position.y,
            rul: a.rul,
            service_time: a.service_time,
            component_cost: a.component_cost,
        }
    }
}

/// Axis-aligned bounding box for instance generation, in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Bounds {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn square(side: f64) -> Self {
        Bounds::new(0.0, side, 0.0, side)
    }

    pub fn midpoint(&self) -> Point2D {
        Point2D::new(
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GenerateError {
    #[error("n must be >= 1")]
    EmptyInstance,
    #[error("invalid bounds: min must not exceed max and all values finite")]
    BadBounds,
    #[error("invalid rul range: need 0 < min <= max")]
    BadRulRange,
}

/// Generates a seeded random instance: positions uniform in `bounds`, RULs
/// uniform in `rul_range`, ids `A0..A{n-1}`, center at the bounds midpoint.
/// Identical seeds give identical instances.
pub fn generate_instance(
    n: usize,
    bounds: Bounds,
    rul_range: (f64, f64),
    seed: u64,
) -> Result<ProblemInstance, GenerateError> {
    if n == 0 {
        return Err(GenerateError::EmptyInstance);
    }
    let finite = [bounds.x_min, bounds.x_max, bounds.y_min, bounds.y_max]
        .iter()
        .all(|v| v.is_finite());
    if !finite || bounds.x_min > bounds.x_max || bounds.y_min > bounds.y_max {
        return Err(GenerateError::BadBounds);
    }
    let (rul_lo, rul_hi) = rul_range;
    if !(rul_lo.is_finite() && rul_hi.is_finite()) || rul_lo <= 0.0 || rul_lo > rul_hi {
        return Err(GenerateError::BadRulRange);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assets = (0..n)
        .map(|i| {
            let x = rng.random_range(bounds.x_min..=bounds.x_max);
            let y = rng.random_range(bounds.y_min..=bounds.y_max);
            let rul = rng.random_range(rul_lo..=rul_hi);
            AssetRecord::new(format!("A{i}"), Point2D::new(x, y), rul)
        })
        .collect();
    Ok(ProblemInstance::new(bounds.midpoint(), assets))
}

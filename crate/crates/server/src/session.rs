use std::time::{SystemTime, UNIX_EPOCH};

use invlearn_core::geometry::parameter_polytope;
use invlearn_core::model::{componentwise_median, InverseProblem, ObservationSummary, ProblemDocument, TrackedQuantity};
use invlearn_core::solvers::{check_trace, initial_step, solve_mgil_step, tight_tol, MgilConfig, StepRecord};
use invlearn_diet::{DietModel, FoodGroupTable, NutrientMatrix, RegimenBounds, DEFAULT_CAP, DEFAULT_PRESET};
use serde::{Deserialize, Serialize};

use crate::ApiError;

/// A constraint row given by index or by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RowRef {
    Index(usize),
    Name(String),
}

/// A bundled preset name or an inline regimen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegimenRef {
    Preset(String),
    Inline(RegimenBounds),
}

impl RegimenRef {
    pub fn resolve(this: Option<&Self>) -> Result<RegimenBounds, ApiError> {
        let regimen = match this {
            None => RegimenBounds::preset(DEFAULT_PRESET)?,
            Some(Self::Preset(name)) if name.trim().is_empty() => RegimenBounds::preset(DEFAULT_PRESET)?,
            Some(Self::Preset(name)) => RegimenBounds::preset(name.trim())?,
            Some(Self::Inline(r)) => {
                r.validate()?;
                r.clone()
            }
        };
        Ok(regimen)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DietRequest {
    #[serde(default)]
    pub regimen: Option<RegimenRef>,
    /// One row of servings per day, in food-group order.
    pub intake: Vec<Vec<f64>>,
    #[serde(default)]
    pub preferred: Vec<RowRef>,
    #[serde(default)]
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CreateSession {
    Problem(ProblemDocument),
    Diet(DietRequest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRequest {
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub preferred: Option<Vec<RowRef>>,
    #[serde(default)]
    pub tau: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for StepRequest {
    fn default() -> Self {
        Self { omega: 1.0, preferred: None, tau: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollbackRequest {
    pub to: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Generic,
    Diet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityValue {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepView {
    pub index: usize,
    pub z: Vec<f64>,
    pub loss: f64,
    pub delta: f64,
    pub active: Vec<usize>,
    pub active_names: Vec<String>,
    pub added: Vec<usize>,
    pub added_names: Vec<String>,
    pub theta: Vec<f64>,
    /// Per-coordinate range of the parameters making `z` optimal.
    pub theta_bounds: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<QuantityValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingStep {
    #[serde(flatten)]
    pub step: StepView,
    pub omega: f64,
    pub preferred: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub exceeds_tau: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub kind: ProblemKind,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regimen: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable_names: Option<Vec<String>>,
    pub row_names: Vec<String>,
    pub relevant: Vec<usize>,
    pub preferred: Vec<usize>,
    pub steps: Vec<StepView>,
    pub pending: Option<PendingStep>,
}

/// Shared read-only diet tables.
#[derive(Debug, Clone)]
pub struct DietTables {
    pub groups: FoodGroupTable,
    pub nutrients: NutrientMatrix,
}

impl DietTables {
    pub fn bundled() -> Self {
        let groups = FoodGroupTable::bundled();
        let nutrients = NutrientMatrix::bundled(&groups);
        Self { groups, nutrients }
    }

    pub fn model(&self, regimen: RegimenBounds, cap: Option<f64>) -> Result<DietModel, ApiError> {
        let cap = cap.unwrap_or(DEFAULT_CAP);
        if !(cap.is_finite() && cap > 0.0) {
            return Err(ApiError::unprocessable("invalid_request", format!("serving cap must be positive, got {cap}")));
        }
        Ok(DietModel::new(self.groups.clone(), self.nutrients.clone(), regimen, cap)?)
    }
}

pub struct Session {
    id: String,
    kind: ProblemKind,
    created_at: u64,
    regimen: Option<String>,
    variable_names: Option<Vec<String>>,
    quantities: Vec<TrackedQuantity>,
    problem: InverseProblem,
    steps: Vec<StepRecord>,
    views: Vec<StepView>,
    pending: Option<(StepRecord, PendingStep)>,
}

fn resolve_rows(problem: &InverseProblem, rows: &[RowRef]) -> Result<Vec<usize>, ApiError> {
    let region = &problem.region;
    rows.iter()
        .map(|r| {
            let i = match r {
                RowRef::Index(i) if *i < region.m() => *i,
                RowRef::Index(i) => {
                    return Err(ApiError::unprocessable("invalid_request", format!("row {i} out of range")));
                }
                RowRef::Name(name) => region
                    .names()
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| ApiError::unprocessable("invalid_request", format!("no row named {name:?}")))?,
            };
            if !problem.hierarchy.is_relevant(i) {
                return Err(ApiError::unprocessable(
                    "invalid_request",
                    format!("row {i} ({}) is not relevant and cannot be preferred", region.name(i)),
                ));
            }
            Ok(i)
        })
        .collect()
}

fn intake_summary(intake: &[Vec<f64>], n: usize) -> Result<ObservationSummary, ApiError> {
    for (d, day) in intake.iter().enumerate() {
        if day.len() != n {
            return Err(ApiError::unprocessable(
                "invalid_intake",
                format!("day {d} lists {} servings, expected {n}", day.len()),
            ));
        }
        if let Some(j) = day.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ApiError::unprocessable("invalid_intake", format!("day {d}, group {j}: servings must be nonnegative")));
        }
    }
    if intake.is_empty() {
        return Ok(ObservationSummary::empty(n, true));
    }
    let summary = ObservationSummary::from_points(intake, true).and_then(|s| s.with_median(componentwise_median(intake)));
    summary.map_err(|e| ApiError::unprocessable("invalid_intake", e.to_string()))
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl Session {
    /// Validates the problem and solves step 0.
    pub fn create(id: String, request: CreateSession, tables: &DietTables) -> Result<Self, ApiError> {
        let (kind, regimen, variable_names, quantities, problem) = match request {
            CreateSession::Problem(doc) => {
                let problem = doc.to_problem().map_err(|e| ApiError::unprocessable("invalid_document", e.to_string()))?;
                let n = problem.n();
                if let Some(q) = doc.quantities.iter().find(|q| q.coefficients.len() != n) {
                    return Err(ApiError::unprocessable("invalid_document", format!("quantity {:?} needs {n} coefficients", q.name)));
                }
                if doc.variable_names.as_ref().is_some_and(|v| v.len() != n) {
                    return Err(ApiError::unprocessable("invalid_document", format!("expected {n} variable names")));
                }
                (ProblemKind::Generic, None, doc.variable_names, doc.quantities, problem)
            }
            CreateSession::Diet(req) => {
                let regimen = RegimenRef::resolve(req.regimen.as_ref())?;
                let model = tables.model(regimen, req.cap)?;
                let obs = intake_summary(&req.intake, model.groups.len())?;
                let mut problem = model.problem(obs)?;
                let preferred = resolve_rows(&problem, &req.preferred)?;
                problem.hierarchy = problem.hierarchy.with_preferred(preferred);
                let names = Some(model.groups.names().to_vec());
                (ProblemKind::Diet, Some(model.regimen.name.clone()), names, model.quantities(), problem)
            }
        };
        let findings = problem.validate();
        if !findings.is_empty() {
            return Err(ApiError::Invalid(findings));
        }
        let step = initial_step(&problem, Default::default())?;
        check_trace(&problem, std::slice::from_ref(&step)).map_err(ApiError::Invariant)?;
        let mut session = Self {
            id,
            kind,
            created_at: now_secs(),
            regimen,
            variable_names,
            quantities,
            problem,
            steps: Vec::new(),
            views: Vec::new(),
            pending: None,
        };
        let view = session.step_view(&step);
        session.steps.push(step);
        session.views.push(view);
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    fn step_view(&self, rec: &StepRecord) -> StepView {
        let region = &self.problem.region;
        let names = |rows: &[usize]| rows.iter().map(|&i| region.name(i).to_string()).collect();
        let theta_bounds = parameter_polytope(region, &rec.point, &self.problem.normalization, tight_tol(region))
            .ok()
            .and_then(|p| p.bounds().ok().map(<[_]>::to_vec))
            .unwrap_or_default();
        let values = self
            .quantities
            .iter()
            .map(|q| QuantityValue {
                name: q.name.clone(),
                value: q.coefficients.iter().zip(&rec.point).map(|(c, z)| c * z).sum(),
                lower: q.lower,
                upper: q.upper,
            })
            .collect();
        StepView {
            index: rec.index,
            z: rec.point.clone(),
            loss: rec.loss,
            delta: rec.delta,
            active: rec.active.clone(),
            active_names: names(&rec.active),
            added: rec.added.clone(),
            added_names: names(&rec.added),
            theta: rec.theta.clone(),
            theta_bounds,
            values,
        }
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            kind: self.kind,
            created_at: self.created_at,
            regimen: self.regimen.clone(),
            variable_names: self.variable_names.clone(),
            row_names: self.problem.region.names().to_vec(),
            relevant: self.problem.hierarchy.relevant().to_vec(),
            preferred: self.problem.hierarchy.preferred().to_vec(),
            steps: self.views.clone(),
            pending: self.pending.as_ref().map(|(_, p)| p.clone()),
        }
    }

    /// Computes the next step from the last accepted one without committing it.
    pub fn propose(&mut self, req: &StepRequest) -> Result<PendingStep, ApiError> {
        if !(0.0..=1.0).contains(&req.omega) {
            return Err(ApiError::unprocessable("invalid_request", format!("omega must lie in [0, 1], got {}", req.omega)));
        }
        if req.tau.is_some_and(f64::is_nan) {
            return Err(ApiError::unprocessable("invalid_request", "tau must be a number"));
        }
        let preferred = match &req.preferred {
            Some(rows) => resolve_rows(&self.problem, rows)?,
            None => self.problem.hierarchy.preferred().to_vec(),
        };
        let mut problem = self.problem.clone();
        problem.hierarchy = problem.hierarchy.with_preferred(preferred);
        let last = self.steps.last().expect("sessions hold step 0");
        let cfg = MgilConfig { omega: req.omega, ..MgilConfig::default() };
        let mut rec = solve_mgil_step(&problem, &last.active, &cfg)?;
        rec.index = last.index + 1;
        rec.delta = rec.loss - last.loss;
        let pending = PendingStep {
            step: self.step_view(&rec),
            omega: req.omega,
            preferred: problem.hierarchy.preferred().to_vec(),
            tau: req.tau,
            exceeds_tau: req.tau.is_some_and(|t| rec.delta > t),
        };
        self.pending = Some((rec, pending.clone()));
        Ok(pending)
    }

    /// Appends the pending step after re-checking the trace invariants.
    pub fn accept(&mut self) -> Result<SessionView, ApiError> {
        let (rec, pending) = self.pending.take().ok_or(ApiError::NothingPending)?;
        self.steps.push(rec);
        if let Err(e) = check_trace(&self.problem, &self.steps) {
            self.steps.pop();
            return Err(ApiError::Invariant(e));
        }
        self.views.push(pending.step);
        Ok(self.view())
    }

    /// Keeps steps `0..=to` and clears any pending step.
    pub fn rollback(&mut self, to: usize) -> Result<SessionView, ApiError> {
        if to >= self.steps.len() {
            return Err(ApiError::unprocessable(
                "invalid_rollback",
                format!("cannot roll back to step {to} of a {}-step trace", self.steps.len()),
            ));
        }
        self.steps.truncate(to + 1);
        self.views.truncate(to + 1);
        self.pending = None;
        check_trace(&self.problem, &self.steps).map_err(ApiError::Invariant)?;
        Ok(self.view())
    }
}

/// A diet region skeleton for building intake forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DietRegionView {
    pub regimen: RegimenBounds,
    pub cap: f64,
    pub groups: Vec<FoodGroupView>,
    pub document: ProblemDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoodGroupView {
    pub name: String,
    pub serving_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DietRegionRequest {
    #[serde(default)]
    pub regimen: Option<RegimenRef>,
    #[serde(default)]
    pub cap: Option<f64>,
}

pub fn diet_region(req: &DietRegionRequest, tables: &DietTables) -> Result<DietRegionView, ApiError> {
    let model = tables.model(RegimenRef::resolve(req.regimen.as_ref())?, req.cap)?;
    let groups = model
        .groups
        .names()
        .iter()
        .zip(model.groups.serving_g())
        .map(|(name, &serving_g)| FoodGroupView { name: name.clone(), serving_g })
        .collect();
    let document = model.document(ObservationSummary::empty(model.groups.len(), true))?;
    Ok(DietRegionView { regimen: model.regimen.clone(), cap: model.cap, groups, document })
}

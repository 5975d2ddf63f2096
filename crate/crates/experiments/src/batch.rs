use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use invlearn_core::model::InverseProblem;
use invlearn_core::solvers::{
    solve_gil, solve_il_with, solve_ilo_baseline, solve_mgil_step, GilConfig, MgilConfig, SearchMode, SolveError,
};

use crate::instance::{evaluate_recovery, generate_instance, InstanceSpec, Scenario};
use crate::stats::quartiles;
use crate::ExperimentError;

pub const CSV_HEADER: [&str; 9] = ["instance", "model", "r", "scenario", "noise", "knowledge", "distance", "recovered", "seconds"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelSpec {
    Il,
    Gil(usize),
    Mgil(usize),
    Baseline,
}

impl ModelSpec {
    pub fn name(self) -> &'static str {
        match self {
            Self::Il => "il",
            Self::Gil(_) => "gil",
            Self::Mgil(_) => "mgil",
            Self::Baseline => "baseline",
        }
    }

    pub fn r(self) -> Option<usize> {
        match self {
            Self::Gil(r) | Self::Mgil(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.r() {
            Some(r) => write!(f, "{}({r})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = String;

    /// `il`, `baseline`, `gil(5)` or `mgil:5`.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "il" => return Ok(Self::Il),
            "baseline" | "ilo" => return Ok(Self::Baseline),
            _ => {}
        }
        let (head, tail) = s.split_once(['(', ':']).ok_or_else(|| format!("unknown model {s:?}"))?;
        let r: usize = tail.trim_end_matches(')').parse().map_err(|_| format!("bad cardinality in {s:?}"))?;
        if r == 0 {
            return Err(format!("cardinality must be positive in {s:?}"));
        }
        match head {
            "gil" => Ok(Self::Gil(r)),
            "mgil" => Ok(Self::Mgil(r)),
            _ => Err(format!("unknown model {s:?}")),
        }
    }
}

impl TryFrom<String> for ModelSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ModelSpec> for String {
    fn from(m: ModelSpec) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchOptions {
    /// Lifted-vertex candidates for the baseline.
    pub vertex_samples: usize,
    /// GIL/MGIL weight when preferred rows are disclosed; `1` otherwise.
    pub knowledge_omega: f64,
    pub mode: SearchMode,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self { vertex_samples: 8, knowledge_omega: 1e-3, mode: SearchMode::BestFirst, threads: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub instance: usize,
    pub model: String,
    pub r: Option<usize>,
    pub scenario: Scenario,
    pub noise: f64,
    pub knowledge: usize,
    /// Configured binding level.
    pub binding: usize,
    pub distance: Option<f64>,
    pub recovered: bool,
    pub seconds: f64,
    /// `ok` or a solver error code.
    pub status: String,
    pub loss: Option<f64>,
}

struct Outcome {
    point: Vec<f64>,
    loss: f64,
    seconds: f64,
    status: &'static str,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

/// Per-step points of one MGIL trace, extended until `r_max` relevant rows
/// bind or the face is exhausted. Each entry times only its own solve call.
fn mgil_ladder(problem: &InverseProblem, r_max: usize, cfg: &MgilConfig) -> Result<(Vec<(usize, Outcome)>, bool), SolveError> {
    let (il, secs) = timed(|| solve_il_with(problem, cfg.mode));
    let il = il?;
    let mut prev: Vec<usize> = il.active.iter().copied().filter(|&i| problem.hierarchy.is_relevant(i)).collect();
    let mut ladder = vec![(prev.len(), Outcome { point: il.point, loss: il.loss, seconds: secs, status: "ok" })];
    let cap = problem.hierarchy.relevant().len().min(problem.n());
    while prev.len() < r_max.min(cap) {
        let (step, secs) = timed(|| solve_mgil_step(problem, &prev, cfg));
        match step {
            Ok(s) => {
                prev = s.active.clone();
                ladder.push((prev.len(), Outcome { point: s.point, loss: s.loss, seconds: secs, status: "ok" }));
            }
            Err(SolveError::FaceExhausted) => return Ok((ladder, true)),
            Err(e) => return Err(e),
        }
    }
    Ok((ladder, prev.len() < r_max))
}

fn run_instance(id: usize, spec: &InstanceSpec, models: &[ModelSpec], opts: &BatchOptions) -> Vec<MetricsRow> {
    let row = |model: ModelSpec| MetricsRow {
        instance: id,
        model: model.name().to_string(),
        r: model.r(),
        scenario: spec.scenario,
        noise: spec.noise,
        knowledge: spec.knowledge,
        binding: spec.binding,
        distance: None,
        recovered: false,
        seconds: 0.0,
        status: String::new(),
        loss: None,
    };
    let inst = match generate_instance(spec) {
        Ok(inst) => inst,
        Err(_) => {
            return models.iter().map(|&m| MetricsRow { status: "generation_failed".into(), ..row(m) }).collect()
        }
    };
    let problem = &inst.problem;
    let omega = if problem.hierarchy.preferred().is_empty() { 1.0 } else { opts.knowledge_omega };
    let mgil_cfg = MgilConfig { omega, mode: opts.mode, ..MgilConfig::default() };
    let r_max = models.iter().filter_map(|m| matches!(m, ModelSpec::Mgil(_)).then(|| m.r().unwrap())).max();
    let ladder = r_max.map(|r| mgil_ladder(problem, r, &mgil_cfg));

    let finish = |model: ModelSpec, out: Result<Outcome, SolveError>| {
        let base = row(model);
        match out {
            Ok(o) => MetricsRow {
                distance: Some(inst.distance(&o.point)),
                recovered: evaluate_recovery(&inst, &o.point),
                seconds: o.seconds,
                status: o.status.to_string(),
                loss: Some(o.loss),
                ..base
            },
            Err(e) => MetricsRow { status: e.code().to_string(), ..base },
        }
    };
    models
        .iter()
        .map(|&model| {
            let out = match model {
                ModelSpec::Il => {
                    let (s, secs) = timed(|| solve_il_with(problem, opts.mode));
                    s.map(|s| Outcome { point: s.point, loss: s.loss, seconds: secs, status: "ok" })
                }
                ModelSpec::Gil(r) => {
                    let cfg = GilConfig { r, omega, epsilon: None, mode: opts.mode };
                    let (s, secs) = timed(|| solve_gil(problem, &cfg));
                    s.map(|s| Outcome { point: s.point, loss: s.loss, seconds: secs, status: "ok" })
                }
                ModelSpec::Mgil(r) => match ladder.as_ref().expect("ladder computed") {
                    Ok((steps, exhausted)) => {
                        let (_, o) = steps.iter().find(|(k, _)| *k >= r).unwrap_or_else(|| steps.last().expect("step 0"));
                        let short = *exhausted && steps.iter().all(|(k, _)| *k < r);
                        Ok(Outcome {
                            point: o.point.clone(),
                            loss: o.loss,
                            seconds: o.seconds,
                            status: if short { "face_exhausted" } else { "ok" },
                        })
                    }
                    Err(e) => Err(e.clone()),
                },
                ModelSpec::Baseline => {
                    let (s, secs) = timed(|| solve_ilo_baseline(problem, opts.vertex_samples, spec.seed));
                    s.and_then(|s| {
                        Ok(Outcome { loss: problem.total_loss(&s.forward_point)?, point: s.forward_point, seconds: secs, status: "ok" })
                    })
                }
            };
            finish(model, out)
        })
        .collect()
}

/// Solves every model on `repetitions` seeds per spec. Instance ids follow
/// spec order then repetition; row order is stable regardless of threads.
pub fn run_batch(specs: &[InstanceSpec], models: &[ModelSpec], repetitions: usize, opts: &BatchOptions) -> Result<Vec<MetricsRow>, ExperimentError> {
    for spec in specs {
        spec.validate()?;
    }
    let jobs: Vec<(usize, InstanceSpec)> = specs
        .iter()
        .flat_map(|s| (0..repetitions as u64).map(move |rep| InstanceSpec { seed: s.seed.wrapping_add(rep), ..s.clone() }))
        .enumerate()
        .collect();
    let work = || jobs.par_iter().map(|(id, spec)| run_instance(*id, spec, models, opts)).collect::<Vec<_>>();
    let nested = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| ExperimentError::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(nested.into_iter().flatten().collect())
}

/// Writes the plot-ready CSV; `timings = false` blanks the seconds column
/// for byte-level comparisons.
pub fn write_metrics_csv<W: Write>(out: W, rows: &[MetricsRow], timings: bool) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.instance.to_string(),
            r.model.clone(),
            r.r.map(|v| v.to_string()).unwrap_or_default(),
            r.scenario.as_str().to_string(),
            r.noise.to_string(),
            r.knowledge.to_string(),
            r.distance.map(|d| d.to_string()).unwrap_or_default(),
            r.recovered.to_string(),
            if timings { r.seconds.to_string() } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryEntry {
    pub model: String,
    pub r: Option<usize>,
    pub scenario: Scenario,
    pub noise: f64,
    pub knowledge: usize,
    pub binding: usize,
    pub count: usize,
    pub failures: usize,
    pub mean_distance: Option<f64>,
    pub distance_quartiles: Option<(f64, f64, f64)>,
    pub recovery_rate: f64,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureNote {
    pub instance: usize,
    pub model: String,
    pub r: Option<usize>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub entries: Vec<SummaryEntry>,
    pub failures: Vec<FailureNote>,
}

type GroupKey = (String, Option<usize>, Scenario, u64, usize, usize);

pub fn summarize(rows: &[MetricsRow]) -> Summary {
    let mut groups: BTreeMap<GroupKey, Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.model.clone(), r.r, r.scenario, r.noise.to_bits(), r.knowledge, r.binding);
        groups.entry(key).or_default().push(r);
    }
    let entries = groups
        .into_iter()
        .map(|((model, r, scenario, noise, knowledge, binding), members)| {
            let dist: Vec<f64> = members.iter().filter_map(|m| m.distance).collect();
            let count = members.len();
            SummaryEntry {
                model,
                r,
                scenario,
                noise: f64::from_bits(noise),
                knowledge,
                binding,
                count,
                failures: count - dist.len(),
                mean_distance: (!dist.is_empty()).then(|| dist.iter().sum::<f64>() / dist.len() as f64),
                distance_quartiles: (!dist.is_empty()).then(|| quartiles(&dist)),
                recovery_rate: members.iter().filter(|m| m.recovered).count() as f64 / count as f64,
                mean_seconds: members.iter().map(|m| m.seconds).sum::<f64>() / count as f64,
            }
        })
        .collect();
    let failures = rows
        .iter()
        .filter(|r| r.status != "ok")
        .map(|r| FailureNote { instance: r.instance, model: r.model.clone(), r: r.r, status: r.status.clone() })
        .collect();
    Summary { rows: rows.len(), entries, failures }
}

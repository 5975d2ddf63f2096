use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context};
use invlearn_core::geometry::{identifiability_report, parameter_polytope, IdentifiabilityReport};
use invlearn_core::model::{Finding, InverseProblem, ProblemDocument, TrackedQuantity};
use invlearn_core::numeric::lpfile::write_lp;
use invlearn_core::solvers::{
    gil_milp_model, run_mgil, solve_gil, solve_il_with, solve_ilo_baseline, tight_tol, GilConfig, IlSolution, MgilConfig,
    SearchStats, TradeoffTrace,
};
use serde::Serialize;

use crate::Io;

#[derive(Debug, Serialize)]
pub struct Value {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SolutionReport {
    pub model: &'static str,
    pub point: Vec<f64>,
    pub loss: f64,
    pub active: Vec<usize>,
    pub active_names: Vec<String>,
    pub theta: Vec<f64>,
    pub theta_bounds: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<SearchStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TradeoffTrace>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Value>,
}

pub struct Loaded {
    pub problem: InverseProblem,
    pub quantities: Vec<TrackedQuantity>,
}

pub fn load(path: &Path) -> anyhow::Result<Loaded> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    let doc = ProblemDocument::from_json(&text)?;
    Ok(Loaded { problem: doc.to_problem()?, quantities: doc.quantities })
}

pub fn values(quantities: &[TrackedQuantity], point: &[f64]) -> Vec<Value> {
    quantities
        .iter()
        .map(|q| Value {
            name: q.name.clone(),
            value: q.coefficients.iter().zip(point).map(|(c, z)| c * z).sum(),
            lower: q.lower,
            upper: q.upper,
        })
        .collect()
}

fn report(model: &'static str, loaded: &Loaded, point: Vec<f64>, loss: f64, theta: Vec<f64>) -> anyhow::Result<SolutionReport> {
    let region = &loaded.problem.region;
    let tol = tight_tol(region);
    let active = region.tight_rows(&point, tol);
    let pp = parameter_polytope(region, &point, &loaded.problem.normalization, tol)?;
    Ok(SolutionReport {
        model,
        active_names: active.iter().map(|&i| region.name(i).to_string()).collect(),
        active,
        theta_bounds: pp.bounds().map(<[_]>::to_vec).unwrap_or_default(),
        values: values(&loaded.quantities, &point),
        point,
        loss,
        theta,
        subset: None,
        stats: None,
        trace: None,
    })
}

fn from_solution(model: &'static str, loaded: &Loaded, sol: IlSolution) -> anyhow::Result<SolutionReport> {
    let mut rep = report(model, loaded, sol.point, sol.loss, sol.theta)?;
    rep.subset = sol.subset;
    rep.stats = Some(sol.stats);
    Ok(rep)
}

fn emit<T: Serialize>(io: &Io, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match &io.output {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())),
        None => Ok(crate::print_out(&(text + "\n"))?),
    }
}

pub fn il(io: &Io) -> anyhow::Result<()> {
    let loaded = load(&io.problem)?;
    let sol = solve_il_with(&loaded.problem, io.mode.into())?;
    emit(io, &from_solution("il", &loaded, sol)?)
}

pub fn gil(io: &Io, r: usize, omega: f64, epsilon: Option<f64>, export_lp: Option<&Path>, big_m: f64) -> anyhow::Result<()> {
    let loaded = load(&io.problem)?;
    let cfg = GilConfig { r, omega, epsilon, mode: io.mode.into() };
    if let Some(path) = export_lp {
        std::fs::write(path, write_lp(&gil_milp_model(&loaded.problem, &cfg, big_m)))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let sol = solve_gil(&loaded.problem, &cfg)?;
    emit(io, &from_solution("gil", &loaded, sol)?)
}

pub fn mgil(io: &Io, lmax: Option<usize>, tau: Option<f64>, omega: f64, epsilon: Option<f64>) -> anyhow::Result<()> {
    let loaded = load(&io.problem)?;
    let cfg = MgilConfig { l_max: lmax.unwrap_or(usize::MAX), omega, tau, epsilon, mode: io.mode.into() };
    let trace = run_mgil(&loaded.problem, &cfg)?;
    let last = trace.steps.last().expect("traces hold step 0").clone();
    let mut rep = report("mgil", &loaded, last.point, last.loss, last.theta)?;
    rep.subset = Some(last.active);
    rep.trace = Some(trace);
    emit(io, &rep)
}

pub fn baseline(io: &Io, vertex_samples: usize, seed: u64) -> anyhow::Result<()> {
    let loaded = load(&io.problem)?;
    let sol = solve_ilo_baseline(&loaded.problem, vertex_samples, seed)?;
    emit(io, &report("baseline", &loaded, sol.forward_point, sol.loss, sol.theta)?)
}

#[derive(Serialize)]
struct Diagnosis {
    findings: Vec<Finding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    identifiability: Option<IdentifiabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

pub fn diagnose(io: &Io) -> anyhow::Result<()> {
    let loaded = load(&io.problem)?;
    let p = &loaded.problem;
    let findings = p.validate();
    let Some(points) = p.observations.points() else {
        bail!("diagnose needs raw observation points, not a summary");
    };
    let tol = tight_tol(&p.region);
    let (identifiability, note) = if !findings.is_empty() {
        (None, None)
    } else if let Some(k) = points.iter().position(|z| !p.region.contains(z, tol)) {
        (None, Some(format!("observation {k} lies outside the region; identifiability applies to feasible decisions")))
    } else {
        (Some(identifiability_report(points, &p.region, &p.normalization, tol)?), None)
    };
    emit(io, &Diagnosis { findings, identifiability, note })
}

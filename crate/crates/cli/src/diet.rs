use std::fmt::Write;
use std::fs::File;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Subcommand;
use invlearn_core::model::{componentwise_median, ObservationSummary};
use invlearn_core::solvers::{run_mgil, MgilConfig, StepRecord, Termination};
use invlearn_diet::{ingest_intake_csv, perturb_observations, DietModel, RegimenBounds, DEFAULT_CAP, DEFAULT_PRESET, SAMPLE_INTAKE};
use serde::Serialize;

use crate::solve::{values, Value};

#[derive(Subcommand)]
pub enum DietCommand {
    /// Step through nutrient-bound activations for an intake record.
    Plan {
        /// Intake CSV, one day per row with a column per food group; the
        /// bundled synthetic cohort when omitted.
        #[arg(long)]
        intake: Option<PathBuf>,
        /// Bundled preset name or path to a regimen JSON file.
        #[arg(long, default_value = DEFAULT_PRESET)]
        regimen: String,
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Bound rows to favour, by name (for example "sodium_mg upper").
        #[arg(long)]
        preferred: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: f64,
        /// Add this many Gaussian perturbations of every day.
        #[arg(long)]
        perturb: Option<usize>,
        /// Perturbation scale, in sample standard deviations per group.
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the trace with nutrient values as JSON.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the bundled regimen presets.
    Presets,
}

#[derive(Serialize)]
struct PlanStep {
    #[serde(flatten)]
    step: StepRecord,
    added_names: Vec<String>,
    values: Vec<Value>,
}

#[derive(Serialize)]
struct Plan {
    regimen: String,
    observations: usize,
    termination: Termination,
    steps: Vec<PlanStep>,
}

pub fn run(command: DietCommand) -> anyhow::Result<()> {
    match command {
        DietCommand::Presets => {
            let mut text = String::new();
            for name in RegimenBounds::preset_names() {
                let r = RegimenBounds::preset(name)?;
                writeln!(text, "{name:<14} {}", r.description)?;
            }
            Ok(crate::print_out(&text)?)
        }
        DietCommand::Plan { intake, regimen, steps, tau, omega, preferred, cap, perturb, sigma, seed, output } => {
            let base = DietModel::bundled(&regimen)?;
            let model = DietModel::new(base.groups, base.nutrients, base.regimen, cap)?;
            let obs = match &intake {
                Some(path) => {
                    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                    ingest_intake_csv(file, &model.groups)?
                }
                None => ingest_intake_csv(SAMPLE_INTAKE.as_bytes(), &model.groups)?,
            };
            let obs = match perturb {
                Some(copies) => {
                    let points = perturb_observations(obs.points().unwrap_or_default(), copies, sigma, seed)?;
                    if points.is_empty() {
                        bail!("no intake rows to perturb");
                    }
                    ObservationSummary::from_points(&points, true)?.with_median(componentwise_median(&points))?
                }
                None => obs,
            };
            let count = obs.count();
            let mut problem = model.problem(obs)?;
            let rows = preferred
                .iter()
                .map(|name| {
                    problem.region.names().iter().position(|n| n == name).with_context(|| format!("no bound row named {name:?}"))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            problem.hierarchy = problem.hierarchy.with_preferred(rows);
            let findings = problem.validate();
            if !findings.is_empty() {
                let msgs: Vec<_> = findings.iter().map(|f| f.message.as_str()).collect();
                bail!("invalid diet problem: {}", msgs.join("; "));
            }

            let trace = run_mgil(&problem, &MgilConfig { l_max: steps, omega, tau, ..MgilConfig::default() })?;
            let quantities = model.quantities();
            let plan = Plan {
                regimen: model.regimen.name.clone(),
                observations: count,
                termination: trace.termination,
                steps: trace
                    .steps
                    .iter()
                    .map(|s| PlanStep {
                        added_names: s.added.iter().map(|&i| problem.region.name(i).to_string()).collect(),
                        values: values(&quantities, &s.point),
                        step: s.clone(),
                    })
                    .collect(),
            };
            crate::print_out(&render_plan(&plan, trace.rejected.as_ref())?)?;
            if let Some(path) = output {
                std::fs::write(&path, serde_json::to_string_pretty(&plan)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
    }
}

fn render_plan(plan: &Plan, rejected: Option<&StepRecord>) -> Result<String, std::fmt::Error> {
    let mut out = String::new();
    writeln!(out, "regimen {}, {} observation(s)", plan.regimen, plan.observations)?;
    writeln!(out, "{:>4} {:>12} {:>10}  activated", "step", "distance", "marginal")?;
    for s in &plan.steps {
        writeln!(out, "{:>4} {:>12.4} {:>10.4}  {}", s.step.index, s.step.loss, s.step.delta, s.added_names.join(", "))?;
    }
    if let Some(r) = rejected {
        writeln!(out, "next step would cost {:.4}, above the threshold", r.delta)?;
    }
    writeln!(out, "stopped: {:?}", plan.termination)?;
    writeln!(out)?;

    let bound = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v}"));
    write!(out, "{:<18} {:>8} {:>8}", "nutrient", "lower", "upper")?;
    for s in &plan.steps {
        write!(out, " {:>10}", format!("step {}", s.step.index))?;
    }
    writeln!(out)?;
    let Some(first) = plan.steps.first() else { return Ok(out) };
    for (k, q) in first.values.iter().enumerate() {
        write!(out, "{:<18} {:>8} {:>8}", q.name, bound(q.lower), bound(q.upper))?;
        for s in &plan.steps {
            write!(out, " {:>10.1}", s.values[k].value)?;
        }
        writeln!(out)?;
    }
    Ok(out)
}

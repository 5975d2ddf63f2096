use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::gil::Ctx;
use super::il::{Frontier, Node};
use super::{dominated, finish, for_each_combination, solve_il_with, tight_tol, Candidate, SearchMode, SolveError};
use crate::model::InverseProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgilConfig {
    pub l_max: usize,
    pub omega: f64,
    /// Marginal-cost threshold; `None` never stops on cost.
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub mode: SearchMode,
}

impl Default for MgilConfig {
    fn default() -> Self {
        Self { l_max: usize::MAX, omega: 1.0, tau: None, epsilon: None, mode: SearchMode::BestFirst }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub point: Vec<f64>,
    pub loss: f64,
    pub delta: f64,
    /// Relevant rows binding at `point`.
    pub active: Vec<usize>,
    pub theta: Vec<f64>,
    pub added: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    MaxIterations,
    ThresholdExceeded,
    FaceExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffTrace {
    pub steps: Vec<StepRecord>,
    pub termination: Termination,
    /// The step whose marginal cost exceeded the threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<StepRecord>,
}

/// One augmentation: equalities on `prev ∪ ΔS` for the best nonempty
/// `ΔS ⊆ R \ prev`, strict slack on the remaining relevant rows. The record
/// has index 0 and `delta = loss`; the loop rebases both.
pub fn solve_mgil_step(problem: &InverseProblem, prev: &[usize], cfg: &MgilConfig) -> Result<StepRecord, SolveError> {
    let mut ctx = Ctx::new(problem, cfg.omega, cfg.epsilon, cfg.mode)?;
    let mut prev = prev.to_vec();
    prev.sort_unstable();
    prev.dedup();
    if let Some(&bad) = prev.iter().find(|&&i| !problem.hierarchy.is_relevant(i)) {
        return Err(SolveError::Config(format!("row {bad} is not relevant")));
    }
    let avail: Vec<usize> = ctx.relevant.iter().copied().filter(|i| prev.binary_search(i).is_err()).collect();
    let cap = problem.n().saturating_sub(prev.len()).min(avail.len());
    if cap == 0 {
        return Err(SolveError::FaceExhausted);
    }
    let merged = |ds: &[usize]| {
        let mut s: Vec<usize> = prev.iter().chain(ds).copied().collect();
        s.sort_unstable();
        s
    };
    let key = |ds: &[usize]| vec![vec![ds.len()], ds.to_vec()];
    let mut best: Option<Candidate> = None;
    match cfg.mode {
        SearchMode::Exhaustive => {
            for k in 1..=cap {
                for_each_combination(&avail, k, &mut |ds| {
                    ctx.ev.stats.patterns += 1;
                    ctx.evaluate_subset(&merged(ds), key(ds), &mut best)
                })?;
            }
        }
        SearchMode::BestFirst => {
            let preferred_after =
                |pos: usize| avail[pos..].iter().filter(|&&i| problem.hierarchy.is_preferred(i)).count();
            let base_pref = ctx.preferred_count(&prev);
            let mut frontier = Frontier::new();
            frontier.push(Reverse(Node { lb: ctx.bound(0.0, base_pref + preferred_after(0).min(cap)), set: Vec::new() }));
            while let Some(Reverse(node)) = frontier.pop() {
                if dominated(node.lb, &best) {
                    ctx.ev.stats.pruned += 1 + frontier.len();
                    break;
                }
                ctx.ev.stats.patterns += 1;
                let s = merged(&node.set);
                let Some(face) = ctx.ev.project(&s, &[])? else {
                    ctx.ev.stats.pruned += 1;
                    continue;
                };
                if !node.set.is_empty() {
                    ctx.evaluate_subset(&s, key(&node.set), &mut best)?;
                }
                if node.set.len() >= cap {
                    continue;
                }
                let pos0 = node.set.last().map_or(0, |l| avail.partition_point(|i| i <= l));
                for pos in pos0..avail.len() {
                    let mut ds = node.set.clone();
                    ds.push(avail[pos]);
                    let s = merged(&ds);
                    let Some(aff) = ctx.ev.affine_bound(&s) else { continue };
                    let loss_lb = face.loss.max(ctx.ev.loss_of(aff));
                    let pref = ctx.preferred_count(&s) + preferred_after(pos + 1).min(cap - ds.len());
                    let lb = ctx.bound(loss_lb, pref);
                    if dominated(lb, &best) {
                        ctx.ev.stats.pruned += 1;
                        continue;
                    }
                    frontier.push(Reverse(Node { lb, set: ds }));
                }
            }
        }
    }
    let cand = best.ok_or(SolveError::FaceExhausted)?;
    let sol = finish(problem, cand, ctx.ev.stats)?;
    let active = sol.subset.clone().unwrap_or_default();
    let added = active.iter().copied().filter(|i| prev.binary_search(i).is_err()).collect();
    Ok(StepRecord { index: 0, point: sol.point, loss: sol.loss, delta: sol.loss, active, theta: sol.theta, added })
}

/// Step 0 of a trace: the IL solution with its relevant tight rows as the
/// active set.
pub fn initial_step(problem: &InverseProblem, mode: SearchMode) -> Result<StepRecord, SolveError> {
    let il = solve_il_with(problem, mode)?;
    let a0: Vec<usize> = il.active.iter().copied().filter(|&i| problem.hierarchy.is_relevant(i)).collect();
    Ok(StepRecord { index: 0, point: il.point, loss: il.loss, delta: 0.0, active: a0.clone(), theta: il.theta, added: a0 })
}

/// The sequential tradeoff loop: IL first, then repeated augmentation.
pub fn run_mgil(problem: &InverseProblem, cfg: &MgilConfig) -> Result<TradeoffTrace, SolveError> {
    let mut steps = vec![initial_step(problem, cfg.mode)?];
    let cap = problem.hierarchy.relevant().len().min(problem.n());
    let tau = cfg.tau.unwrap_or(f64::INFINITY);
    let termination = loop {
        let last = steps.last().expect("nonempty trace");
        if last.index >= cfg.l_max {
            break Termination::MaxIterations;
        }
        if last.active.len() >= cap {
            break Termination::FaceExhausted;
        }
        let mut rec = match solve_mgil_step(problem, &last.active, cfg) {
            Ok(rec) => rec,
            Err(SolveError::FaceExhausted) => break Termination::FaceExhausted,
            Err(e) => return Err(e),
        };
        rec.index = last.index + 1;
        rec.delta = rec.loss - last.loss;
        if rec.delta > tau {
            return Ok(TradeoffTrace { steps, termination: Termination::ThresholdExceeded, rejected: Some(rec) });
        }
        steps.push(rec);
    };
    Ok(TradeoffTrace { steps, termination, rejected: None })
}

/// Checks the tradeoff invariants of an accepted sequence: consecutive
/// indices, feasible points, active rows tight, nested active sets and
/// non-decreasing loss with consistent marginal costs.
pub fn check_trace(problem: &InverseProblem, steps: &[StepRecord]) -> Result<(), String> {
    let region = &problem.region;
    let tol = tight_tol(region);
    let loss_tol = |d: f64| 1e-7 * (1.0 + d.abs());
    for (l, step) in steps.iter().enumerate() {
        if step.index != l {
            return Err(format!("step {l} carries index {}", step.index));
        }
        if !region.contains(&step.point, tol) {
            return Err(format!("step {l} is infeasible"));
        }
        if let Some(&i) = step.active.iter().find(|&&i| region.slack(i, &step.point).abs() > tol) {
            return Err(format!("step {l}: active row {i} is not tight"));
        }
        if let Some(prev) = l.checked_sub(1).map(|k| &steps[k]) {
            if let Some(i) = prev.active.iter().find(|i| !step.active.contains(i)) {
                return Err(format!("step {l} drops active row {i}"));
            }
            if step.loss < prev.loss - loss_tol(prev.loss) {
                return Err(format!("step {l} decreases the loss"));
            }
            if (step.delta - (step.loss - prev.loss)).abs() > loss_tol(step.loss) {
                return Err(format!("step {l} has an inconsistent marginal cost"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstraintHierarchy, ObservationSummary};
    use crate::solvers::fixtures::{triangle, triangle_problem};
    use crate::solvers::{solve_gil, GilConfig};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    #[test]
    fn step_from_first_face() {
        let p = triangle_problem(&[vec![0.6, 0.6]]);
        for mode in [SearchMode::Exhaustive, SearchMode::BestFirst] {
            let rec = solve_mgil_step(&p, &[0], &MgilConfig { mode, ..MgilConfig::default() }).unwrap();
            assert_eq!(rec.added, vec![2]);
            assert!(close(&rec.point, &[0.0, 1.0]));
            assert!((rec.loss - 0.52).abs() < 1e-9);
        }
    }

    #[test]
    fn check_trace_flags_broken_nesting() {
        let p = triangle_problem(&[vec![0.6, 0.6]]);
        let t = run_mgil(&p, &MgilConfig { l_max: 3, ..MgilConfig::default() }).unwrap();
        assert_eq!(check_trace(&p, &t.steps), Ok(()));
        let mut broken = t.steps.clone();
        broken[1].active.retain(|i| !t.steps[0].active.contains(i));
        assert!(check_trace(&p, &broken).unwrap_err().contains("drops"));
        broken = t.steps.clone();
        broken.swap(0, 1);
        assert!(check_trace(&p, &broken).is_err());
    }

    #[test]
    fn full_inheritance_is_exhausted() {
        let p = triangle_problem(&[vec![0.6, 0.6]]);
        assert_eq!(solve_mgil_step(&p, &[0, 2], &MgilConfig::default()).unwrap_err(), SolveError::FaceExhausted);
    }

    #[test]
    fn empty_inheritance_matches_gil() {
        let p = triangle_problem(&[vec![0.6, 0.6]]).with_hierarchy(ConstraintHierarchy::new(vec![0], vec![]));
        let rec = solve_mgil_step(&p, &[], &MgilConfig::default()).unwrap();
        let gil = solve_gil(&p, &GilConfig::new(1)).unwrap();
        assert!(close(&rec.point, &gil.point));
        assert_eq!(rec.active, vec![0]);
    }

    #[test]
    fn trace_examples() {
        let p = triangle_problem(&[vec![0.6, 0.6]]);
        let t = run_mgil(&p, &MgilConfig { l_max: 3, ..MgilConfig::default() }).unwrap();
        let d: Vec<f64> = t.steps.iter().map(|s| s.loss).collect();
        assert_eq!(d.len(), 2);
        assert!((d[0] - 0.36).abs() < 1e-9 && (d[1] - 0.52).abs() < 1e-9);
        assert_eq!(t.termination, Termination::FaceExhausted);
        assert_eq!(t.steps[1].active, vec![0, 2]);

        let t = run_mgil(&p, &MgilConfig { l_max: 3, tau: Some(0.1), ..MgilConfig::default() }).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.termination, Termination::ThresholdExceeded);
        assert!((t.rejected.unwrap().delta - 0.16).abs() < 1e-9);
    }

    #[test]
    fn vertex_observation_gives_single_step() {
        let p = InverseProblem::new(triangle(), ObservationSummary::from_points(&[vec![0.0, 0.0]], true).unwrap());
        let t = run_mgil(&p, &MgilConfig::default()).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!(t.steps[0].loss.abs() < 1e-12);
    }
}

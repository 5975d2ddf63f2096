use std::cmp::Reverse;

use super::face::Evaluator;
use super::il::{Frontier, Node};
use super::{
    default_epsilon, dominated, finish, for_each_combination, offer, validate, Candidate, GilConfig, IlSolution, SearchMode,
    SolveError,
};
use crate::model::InverseProblem;

/// Search state shared by GIL and the MGIL step.
pub(crate) struct Ctx<'p> {
    pub ev: Evaluator<'p>,
    pub relevant: Vec<usize>,
    pub trivial: Vec<usize>,
    pub omega: f64,
    pub mode: SearchMode,
}

impl<'p> Ctx<'p> {
    pub fn new(problem: &'p InverseProblem, omega: f64, epsilon: Option<f64>, mode: SearchMode) -> Result<Self, SolveError> {
        validate(problem)?;
        if !(0.0..=1.0).contains(&omega) {
            return Err(SolveError::Config(format!("omega {omega} outside [0, 1]")));
        }
        let eps = epsilon.unwrap_or_else(|| default_epsilon(&problem.region));
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(SolveError::Config(format!("epsilon {eps} must be positive")));
        }
        Ok(Self {
            ev: Evaluator::new(problem, eps)?,
            relevant: problem.hierarchy.relevant().to_vec(),
            trivial: problem.hierarchy.trivial(problem.m()),
            omega,
            mode,
        })
    }

    pub fn preferred_count(&self, s: &[usize]) -> usize {
        s.iter().filter(|&&i| self.ev.problem.hierarchy.is_preferred(i)).count()
    }

    pub fn score(&self, loss: f64, preferred: usize) -> f64 {
        self.omega * loss - (1.0 - self.omega) * preferred as f64
    }

    /// Score lower bound from a loss bound and the most preferred rows still
    /// reachable.
    pub fn bound(&self, loss_lb: f64, preferred_max: usize) -> f64 {
        self.score(loss_lb, preferred_max)
    }

    fn strict_for(&self, s: &[usize]) -> Vec<usize> {
        self.relevant.iter().copied().filter(|i| s.binary_search(i).is_err()).collect()
    }

    /// Best point with equalities on `s` (sorted, relevant), strict slack on
    /// the other relevant rows, and any trivial rows co-activated as needed
    /// for the cone condition.
    pub fn evaluate_subset(&mut self, s: &[usize], prefix: Vec<Vec<usize>>, best: &mut Option<Candidate>) -> Result<(), SolveError> {
        let strict = self.strict_for(s);
        let pref = self.preferred_count(s);
        let n = self.ev.problem.n();
        let room = n.saturating_sub(s.len());
        match self.mode {
            SearchMode::Exhaustive => {
                let trivial = self.trivial.clone();
                for k in 0..=room.min(trivial.len()) {
                    for_each_combination(&trivial, k, &mut |st| {
                        let mut eq: Vec<usize> = s.iter().chain(st).copied().collect();
                        eq.sort_unstable();
                        self.try_face(&eq, &strict, s, pref, &prefix, best).map(|_| ())
                    })?;
                }
                Ok(())
            }
            SearchMode::BestFirst => {
                match self.try_face(s, &strict, s, pref, &prefix, best)? {
                    Outcome::Infeasible | Outcome::Dominated | Outcome::Accepted => return Ok(()),
                    Outcome::Rejected(_) => {}
                }
                // Minimal trivial co-activation, best-first over trivial sets.
                let mut frontier = Frontier::new();
                frontier.push(Reverse(Node { lb: f64::NEG_INFINITY, set: Vec::new() }));
                while let Some(Reverse(node)) = frontier.pop() {
                    if dominated(node.lb, best) {
                        self.ev.stats.pruned += 1 + frontier.len();
                        break;
                    }
                    let mut eq: Vec<usize> = s.iter().chain(&node.set).copied().collect();
                    eq.sort_unstable();
                    let parent = if node.set.is_empty() {
                        self.ev.project(s, &strict)?.map(|f| self.score(f.loss, pref))
                    } else {
                        self.ev.stats.patterns += 1;
                        match self.try_face(&eq, &strict, s, pref, &prefix, best)? {
                            Outcome::Rejected(sc) => Some(sc),
                            _ => None,
                        }
                    };
                    let Some(parent) = parent else { continue };
                    if node.set.len() >= room {
                        continue;
                    }
                    let start = node.set.last().map_or(0, |&l| self.trivial.partition_point(|&t| t <= l));
                    for &t in &self.trivial[start..] {
                        if !self.ev.independent(&eq, t) {
                            continue;
                        }
                        let mut child_eq = eq.clone();
                        child_eq.push(t);
                        child_eq.sort_unstable();
                        let Some(aff) = self.ev.affine_bound(&child_eq) else { continue };
                        let lb = self.score(self.ev.loss_of(aff), pref).max(parent);
                        if dominated(lb, best) {
                            self.ev.stats.pruned += 1;
                            continue;
                        }
                        let mut set = node.set.clone();
                        set.push(t);
                        frontier.push(Reverse(Node { lb, set }));
                    }
                }
                Ok(())
            }
        }
    }

    fn try_face(
        &mut self,
        eq: &[usize],
        strict: &[usize],
        s: &[usize],
        pref: usize,
        prefix: &[Vec<usize>],
        best: &mut Option<Candidate>,
    ) -> Result<Outcome, SolveError> {
        let Some(face) = self.ev.project(eq, strict)? else { return Ok(Outcome::Infeasible) };
        let score = self.score(face.loss, pref);
        if dominated(score, best) {
            self.ev.stats.pruned += 1;
            return Ok(Outcome::Dominated);
        }
        let tight = self.ev.tight(&face.z);
        if !self.ev.cone_ok(&tight)? {
            return Ok(Outcome::Rejected(score));
        }
        let mut key = prefix.to_vec();
        key.push(tight);
        offer(best, Candidate { z: face.z, loss: face.loss, score, key, subset: Some(s.to_vec()) });
        Ok(Outcome::Accepted)
    }

    /// Relevant rows that cannot be made binding anywhere in the region.
    pub fn blocking(&mut self) -> Result<Vec<usize>, SolveError> {
        let mut out = Vec::new();
        for i in self.relevant.clone() {
            if self.ev.project(&[i], &[])?.is_none() {
                out.push(i);
            }
        }
        Ok(out)
    }
}

enum Outcome {
    Infeasible,
    Dominated,
    Rejected(f64),
    Accepted,
}

pub fn solve_gil(problem: &InverseProblem, cfg: &GilConfig) -> Result<IlSolution, SolveError> {
    let mut ctx = Ctx::new(problem, cfg.omega, cfg.epsilon, cfg.mode)?;
    let r = cfg.r;
    let cap = ctx.relevant.len().min(problem.n());
    if r == 0 || r > cap {
        return Err(SolveError::Config(format!("r = {r} must lie in 1..={cap}")));
    }
    let mut best = None;
    match cfg.mode {
        SearchMode::Exhaustive => {
            let relevant = ctx.relevant.clone();
            for_each_combination(&relevant, r, &mut |s| {
                ctx.ev.stats.patterns += 1;
                ctx.evaluate_subset(s, vec![s.to_vec()], &mut best)
            })?;
        }
        SearchMode::BestFirst => best_first(&mut ctx, r, &mut best)?,
    }
    match best {
        Some(c) => finish(problem, c, ctx.ev.stats),
        None => Err(SolveError::Realizability { r, blocking: ctx.blocking()? }),
    }
}

/// Best-first over relevant subsets in canonical order; interior nodes are
/// bounded by the projection onto their partial face.
fn best_first(ctx: &mut Ctx, r: usize, best: &mut Option<Candidate>) -> Result<(), SolveError> {
    let relevant = ctx.relevant.clone();
    let preferred_after = |pos: usize| relevant[pos..].iter().filter(|&&i| ctx.ev.problem.hierarchy.is_preferred(i)).count();
    let root_pref = preferred_after(0).min(r);
    let mut frontier = Frontier::new();
    frontier.push(Reverse(Node { lb: ctx.bound(0.0, root_pref), set: Vec::new() }));
    while let Some(Reverse(node)) = frontier.pop() {
        if dominated(node.lb, best) {
            ctx.ev.stats.pruned += 1 + frontier.len();
            break;
        }
        ctx.ev.stats.patterns += 1;
        if node.set.len() == r {
            ctx.evaluate_subset(&node.set, vec![node.set.clone()], best)?;
            continue;
        }
        let Some(face) = ctx.ev.project(&node.set, &[])? else {
            ctx.ev.stats.pruned += 1;
            continue;
        };
        let pos0 = node.set.last().map_or(0, |l| relevant.partition_point(|i| i <= l));
        for pos in pos0..relevant.len() {
            let j = relevant[pos];
            if node.set.len() + 1 + (relevant.len() - pos - 1) < r {
                break;
            }
            let mut set = node.set.clone();
            set.push(j);
            let Some(aff) = ctx.ev.affine_bound(&set) else { continue };
            let loss_lb = face.loss.max(ctx.ev.loss_of(aff));
            let pref = ctx.preferred_count(&set) + preferred_after(pos + 1).min(r - set.len());
            let lb = ctx.bound(loss_lb, pref);
            if dominated(lb, best) {
                ctx.ev.stats.pruned += 1;
                continue;
            }
            frontier.push(Reverse(Node { lb, set }));
        }
    }
    Ok(())
}

use super::face::Evaluator;
use super::gil::Ctx;
use super::{finish, offer, validate, Candidate, IlSolution, SearchMode, SolveError};
use crate::model::InverseProblem;

const MAX_N: usize = 4;
const MAX_M: usize = 10;

fn check_size(problem: &InverseProblem) -> Result<(), SolveError> {
    if problem.n() > MAX_N || problem.m() > MAX_M {
        return Err(SolveError::SizeLimit { max_n: MAX_N, max_m: MAX_M });
    }
    Ok(())
}

fn mask_rows(mask: usize, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask >> i & 1 == 1).collect()
}

/// Every row subset as an equality pattern, no pruning; a projection counts
/// when the cone of all rows tight there meets the normalization.
pub fn brute_force_oracle(problem: &InverseProblem) -> Result<IlSolution, SolveError> {
    check_size(problem)?;
    validate(problem)?;
    let m = problem.m();
    let mut ev = Evaluator::new(problem, 0.0)?;
    let mut best = None;
    for mask in 0..1usize << m {
        let eq = mask_rows(mask, m);
        let Some(face) = ev.project(&eq, &[])? else { continue };
        let tight = ev.tight(&face.z);
        if ev.cone_ok(&tight)? {
            offer(&mut best, Candidate { z: face.z, loss: face.loss, score: face.score, key: vec![tight], subset: None });
        }
    }
    let cand = best.ok_or(SolveError::NotRationalizable)?;
    finish(problem, cand, ev.stats)
}

/// GIL by enumeration of every equality pattern over all rows, with strict
/// slack on the relevant rows left out; a projection counts when exactly `r`
/// relevant rows bind and the tight cone meets the normalization.
pub fn brute_force_gil_oracle(problem: &InverseProblem, r: usize, omega: f64, epsilon: Option<f64>) -> Result<IlSolution, SolveError> {
    check_size(problem)?;
    let mut ctx = Ctx::new(problem, omega, epsilon, SearchMode::Exhaustive)?;
    let m = problem.m();
    let mut best = None;
    for mask in 0..1usize << m {
        let eq = mask_rows(mask, m);
        let s: Vec<usize> = eq.iter().copied().filter(|&i| problem.hierarchy.is_relevant(i)).collect();
        if s.len() != r {
            continue;
        }
        let strict: Vec<usize> = ctx.relevant.iter().copied().filter(|i| !s.contains(i)).collect();
        let Some(face) = ctx.ev.project(&eq, &strict)? else { continue };
        let tight = ctx.ev.tight(&face.z);
        let bound: Vec<usize> = tight.iter().copied().filter(|&i| problem.hierarchy.is_relevant(i)).collect();
        if bound != s || !ctx.ev.cone_ok(&tight)? {
            continue;
        }
        let score = ctx.score(face.loss, ctx.preferred_count(&s));
        offer(&mut best, Candidate { z: face.z, loss: face.loss, score, key: vec![s.clone(), tight], subset: Some(s) });
    }
    match best {
        Some(c) => finish(problem, c, ctx.ev.stats),
        None => Err(SolveError::Realizability { r, blocking: ctx.blocking()? }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::fixtures::{box_cut_problem, triangle_problem};
    use crate::solvers::{solve_il_with, SearchMode};

    #[test]
    fn agrees_with_il_on_fixtures() {
        for p in [triangle_problem(&[vec![0.6, 0.6]]), triangle_problem(&[vec![0.2, 0.1], vec![0.9, 0.1]]), box_cut_problem()] {
            let o = brute_force_oracle(&p).unwrap();
            let s = solve_il_with(&p, SearchMode::Exhaustive).unwrap();
            assert!((o.loss - s.loss).abs() < 1e-9);
            assert!(o.point.iter().zip(&s.point).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn gil_oracle_matches_example() {
        let o = brute_force_gil_oracle(&triangle_problem(&[vec![0.6, 0.6]]), 2, 1.0, None).unwrap();
        assert_eq!(o.subset, Some(vec![0, 2]));
    }
}

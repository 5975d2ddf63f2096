use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::face::{Evaluator, FacePoint};
use super::{dominated, finish, for_each_combination, offer, validate, Candidate, IlSolution, SearchMode, SolveError};
use crate::model::InverseProblem;

/// A search node: a row set in canonical order with a score lower bound.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub lb: f64,
    pub set: Vec<usize>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lb.total_cmp(&other.lb).then_with(|| self.set.cmp(&other.set))
    }
}

pub(crate) type Frontier = BinaryHeap<Reverse<Node>>;

pub fn solve_il(problem: &InverseProblem) -> Result<IlSolution, SolveError> {
    solve_il_with(problem, SearchMode::BestFirst)
}

pub fn solve_il_with(problem: &InverseProblem, mode: SearchMode) -> Result<IlSolution, SolveError> {
    validate(problem)?;
    let mut ev = Evaluator::new(problem, 0.0)?;
    let best = match mode {
        SearchMode::Exhaustive => exhaustive(&mut ev)?,
        SearchMode::BestFirst => best_first(&mut ev)?,
    };
    let cand = best.ok_or(SolveError::NotRationalizable)?;
    finish(problem, cand, ev.stats)
}

fn candidate(ev: &Evaluator, face: FacePoint) -> Candidate {
    let key = vec![ev.tight(&face.z)];
    Candidate { z: face.z, loss: face.loss, score: face.score, key, subset: None }
}

fn exhaustive(ev: &mut Evaluator) -> Result<Option<Candidate>, SolveError> {
    let (n, m) = (ev.problem.n(), ev.problem.m());
    let rows: Vec<usize> = (0..m).collect();
    let mut best = None;
    for k in 1..=n.min(m) {
        for_each_combination(&rows, k, &mut |set| {
            ev.stats.patterns += 1;
            let independent = set.split_last().is_some_and(|(last, rest)| ev.independent(rest, *last));
            if !independent || !ev.cone_ok(set)? {
                return Ok(());
            }
            if let Some(face) = ev.project(set, &[])? {
                let c = candidate(ev, face);
                offer(&mut best, c);
            }
            Ok::<_, SolveError>(())
        })?;
    }
    Ok(best)
}

/// Best-first over linearly independent row sets. A node whose own cone
/// meets the normalization, or whose relaxed projection is already
/// rationalized by its tight rows, is a leaf; otherwise its projection bounds
/// every descendant.
fn best_first(ev: &mut Evaluator) -> Result<Option<Candidate>, SolveError> {
    let (n, m) = (ev.problem.n(), ev.problem.m());
    let mut best: Option<Candidate> = None;
    let mut frontier = Frontier::new();
    frontier.push(Reverse(Node { lb: 0.0, set: Vec::new() }));
    while let Some(Reverse(node)) = frontier.pop() {
        if dominated(node.lb, &best) {
            ev.stats.pruned += 1 + frontier.len();
            break;
        }
        ev.stats.patterns += 1;
        let Some(face) = ev.project(&node.set, &[])? else {
            ev.stats.pruned += 1;
            continue;
        };
        if dominated(face.score, &best) {
            ev.stats.pruned += 1;
            continue;
        }
        if ev.cone_ok(&node.set)? {
            let c = candidate(ev, face);
            offer(&mut best, c);
            continue;
        }
        let tight = ev.tight(&face.z);
        if ev.cone_ok(&tight)? {
            let c = candidate(ev, face);
            offer(&mut best, c);
            continue;
        }
        if node.set.len() >= n {
            continue;
        }
        let start = node.set.last().map_or(0, |l| l + 1);
        for j in start..m {
            if !ev.independent(&node.set, j) {
                continue;
            }
            let mut set = node.set.clone();
            set.push(j);
            let Some(aff) = ev.affine_bound(&set) else { continue };
            let lb = aff.max(face.score);
            if dominated(lb, &best) {
                ev.stats.pruned += 1;
                continue;
            }
            frontier.push(Reverse(Node { lb, set }));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ObservationSummary, PolyhedralRegion};
    use crate::solvers::fixtures::{box_cut_problem, triangle_problem};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    #[test]
    fn triangle_tie_goes_to_smallest_active_set() {
        let p = triangle_problem(&[vec![0.6, 0.6]]);
        for mode in [SearchMode::Exhaustive, SearchMode::BestFirst] {
            let s = solve_il_with(&p, mode).unwrap();
            assert!(close(&s.point, &[0.0, 0.6]), "{:?}", s.point);
            assert!((s.loss - 0.36).abs() < 1e-12);
            assert_eq!(s.active, vec![0]);
            assert!(close(&s.theta, &[1.0, 0.0]));
        }
    }

    #[test]
    fn observation_on_face_is_fixed_point() {
        let s = solve_il(&triangle_problem(&[vec![0.0, 0.4]])).unwrap();
        assert!(close(&s.point, &[0.0, 0.4]));
        assert!(s.loss.abs() < 1e-12);
    }

    #[test]
    fn box_with_cut() {
        // Oracle for the loss: K‖z − x̄‖² + c₂ at the lexicographically first
        // rationalizable minimizer; (1,1) has normal (−1,−1) outside the simplex.
        let p = box_cut_problem();
        for mode in [SearchMode::Exhaustive, SearchMode::BestFirst] {
            let s = solve_il_with(&p, mode).unwrap();
            assert!(close(&s.point, &[0.0, 2.0]), "{:?}", s.point);
            assert!((s.loss - 12.0).abs() < 1e-9);
            assert_eq!(s.active, vec![0, 4]);
            assert!((s.loss - p.total_loss(&s.point).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn no_rationalizable_point() {
        // Every normal has a negative entry, so no cone reaches the simplex.
        let region = PolyhedralRegion::from_rows(&[vec![-1.0, 0.0], vec![0.0, -1.0]], vec![-1.0, -1.0]).unwrap();
        let p = InverseProblem::new(region, ObservationSummary::from_points(&[vec![0.0, 0.0]], true).unwrap());
        assert_eq!(solve_il(&p).unwrap_err(), SolveError::NotRationalizable);
    }

    #[test]
    fn search_effort_is_independent_of_count() {
        let region = crate::solvers::fixtures::triangle();
        let small = ObservationSummary::from_moments(2, vec![0.6, 0.6], 1.0).unwrap();
        let large = ObservationSummary::from_moments(10_000, vec![0.6, 0.6], 5_000.0).unwrap();
        let a = solve_il(&InverseProblem::new(region.clone(), small)).unwrap();
        let b = solve_il(&InverseProblem::new(region, large)).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.point, b.point);
    }
}

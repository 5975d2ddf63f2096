//! Two-phase primal simplex on a dense tableau with implicit variable bounds.
//!
//! Pivoting follows Bland's rule (lowest eligible entering index, lowest basic
//! index among ratio ties), so a given spec always takes the same path.

use serde::{Deserialize, Serialize};

use super::linalg::{dot, invert, norm_inf, DenseMatrix};
use super::{InfeasibilityCertificate, NumericError};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VarBound {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl VarBound {
    pub const FREE: VarBound = VarBound { lower: None, upper: None };
    pub const NONNEG: VarBound = VarBound { lower: Some(0.0), upper: None };

    pub fn range(lower: f64, upper: f64) -> Self {
        Self { lower: Some(lower), upper: Some(upper) }
    }
}

/// `min cᵀx` subject to `E x = f`, `G x ≥ h` and optional per-variable bounds.
/// Variables without bounds are free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSpec {
    pub objective: Vec<f64>,
    pub eq_matrix: DenseMatrix,
    pub eq_rhs: Vec<f64>,
    pub ineq_matrix: DenseMatrix,
    pub ineq_rhs: Vec<f64>,
    pub bounds: Option<Vec<VarBound>>,
}

impl LpSpec {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            eq_matrix: DenseMatrix::zeros(0, n),
            eq_rhs: Vec::new(),
            ineq_matrix: DenseMatrix::zeros(0, n),
            ineq_rhs: Vec::new(),
            bounds: None,
        }
    }

    /// Zero objective over `n` variables.
    pub fn feasibility(n: usize) -> Self {
        Self::new(vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.objective.len()
    }

    pub fn push_eq(&mut self, row: &[f64], rhs: f64) -> Result<(), NumericError> {
        self.eq_matrix.push_row(row)?;
        self.eq_rhs.push(rhs);
        Ok(())
    }

    pub fn push_ineq(&mut self, row: &[f64], rhs: f64) -> Result<(), NumericError> {
        self.ineq_matrix.push_row(row)?;
        self.ineq_rhs.push(rhs);
        Ok(())
    }

    pub fn set_bound(&mut self, j: usize, bound: VarBound) {
        let n = self.n();
        self.bounds.get_or_insert_with(|| vec![VarBound::FREE; n])[j] = bound;
    }

    pub fn with_bounds(mut self, bounds: Vec<VarBound>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn bound(&self, j: usize) -> VarBound {
        self.bounds.as_ref().map_or(VarBound::FREE, |b| b[j])
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        let n = self.n();
        let dims = [
            ("equality matrix columns", n, self.eq_matrix.cols()),
            ("equality right-hand side", self.eq_matrix.rows(), self.eq_rhs.len()),
            ("inequality matrix columns", n, self.ineq_matrix.cols()),
            ("inequality right-hand side", self.ineq_matrix.rows(), self.ineq_rhs.len()),
        ];
        for (context, expected, found) in dims {
            if expected != found {
                return Err(NumericError::Dimension { context, expected, found });
            }
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) || !finite(&self.eq_rhs) || !finite(&self.ineq_rhs) {
            return Err(NumericError::NonFinite("objective or right-hand side"));
        }
        if let Some(b) = &self.bounds {
            if b.len() != n {
                return Err(NumericError::Dimension { context: "bounds", expected: n, found: b.len() });
            }
            for (j, vb) in b.iter().enumerate() {
                if vb.lower.is_some_and(|l| l.is_nan() || l == f64::INFINITY)
                    || vb.upper.is_some_and(|u| u.is_nan() || u == f64::NEG_INFINITY)
                {
                    return Err(NumericError::NonFinite("variable bound"));
                }
                if let (Some(l), Some(u)) = (vb.lower, vb.upper) {
                    if l > u {
                        return Err(NumericError::InvalidBounds(j));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// One multiplier per inequality row, nonnegative at optimality.
    pub ineq_duals: Vec<f64>,
    pub eq_duals: Vec<f64>,
    pub objective: f64,
    pub certificate: Option<InfeasibilityCertificate>,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub tol: f64,
    pub max_pivots: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_pivots: 200_000 }
    }
}

pub fn solve_lp(spec: &LpSpec) -> Result<LpOutcome, NumericError> {
    solve_lp_with(spec, &LpOptions::default())
}

pub fn solve_lp_with(spec: &LpSpec, opts: &LpOptions) -> Result<LpOutcome, NumericError> {
    spec.validate()?;
    let std = StandardForm::build(spec);
    let mut tab = Tableau::new(&std);

    let phase_one_costs: Vec<f64> = (0..tab.ncols).map(|j| if j >= tab.art0 { 1.0 } else { 0.0 }).collect();
    tab.rebuild(&phase_one_costs)?;
    tab.iterate(&phase_one_costs, opts)?;
    let residual: f64 = (0..tab.m).filter(|&r| tab.basis[r] >= tab.art0).map(|r| tab.beta[r].max(0.0)).sum();
    let rhs_scale = 1.0 + norm_inf(&tab.b0);
    if residual > opts.tol * rhs_scale {
        let weights = std.row_duals(&tab.row_map, &tab.pi);
        let (eq_weights, ineq_weights) = weights.split_at(std.n_eq);
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            x: std.recover_x(&tab),
            ineq_duals: Vec::new(),
            eq_duals: Vec::new(),
            objective: f64::NAN,
            certificate: Some(InfeasibilityCertificate {
                residual,
                eq_weights: eq_weights.to_vec(),
                ineq_weights: ineq_weights.to_vec(),
            }),
        });
    }
    tab.expel_artificials();

    let costs = std.costs.clone();
    tab.rebuild(&costs)?;
    let bounded = tab.iterate(&costs, opts)?;
    let x = std.recover_x(&tab);
    let objective = dot(&spec.objective, &x);
    if !bounded {
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            x,
            ineq_duals: Vec::new(),
            eq_duals: Vec::new(),
            objective: f64::NEG_INFINITY,
            certificate: None,
        });
    }
    let duals = std.row_duals(&tab.row_map, &tab.pi);
    let (eq, ineq) = duals.split_at(std.n_eq);
    let ineq_duals = ineq.iter().map(|&l| if l < 0.0 && l >= -1e-9 * (1.0 + norm_inf(&spec.objective)) { 0.0 } else { l }).collect();
    let outcome = LpOutcome {
        status: LpStatus::Optimal,
        x,
        ineq_duals,
        eq_duals: eq.to_vec(),
        objective,
        certificate: None,
    };
    check_primal(spec, &outcome.x, opts.tol)?;
    Ok(outcome)
}

fn check_primal(spec: &LpSpec, x: &[f64], tol: f64) -> Result<(), NumericError> {
    let scale = 1.0 + norm_inf(x);
    for (row, &f) in spec.eq_matrix.row_iter().zip(&spec.eq_rhs) {
        let v = (dot(row, x) - f).abs();
        if v > 10.0 * tol * scale * (1.0 + norm_inf(row)) {
            return Err(NumericError::Breakdown(format!("equality residual {v:.3e} after refactorization")));
        }
    }
    for (row, &h) in spec.ineq_matrix.row_iter().zip(&spec.ineq_rhs) {
        let v = h - dot(row, x);
        if v > 10.0 * tol * scale * (1.0 + norm_inf(row)) {
            return Err(NumericError::Breakdown(format!("inequality violation {v:.3e} after refactorization")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum ColMap {
    /// `x_j = shift + y`
    Shift(usize, f64),
    /// `x_j = upper - y`
    Flip(usize, f64),
    /// `x_j -= y` (negative part of a free variable)
    Neg(usize),
}

struct StandardForm {
    cols: Vec<ColMap>,
    n_orig: usize,
    n_eq: usize,
    n_rows: usize,
    ncols: usize,
    /// Row-major `n_rows × ncols` including slack and artificial columns.
    a: Vec<f64>,
    b: Vec<f64>,
    ub: Vec<f64>,
    costs: Vec<f64>,
    /// Row sign times inverse row scale, used to map duals back.
    row_factor: Vec<f64>,
}

impl StandardForm {
    fn build(spec: &LpSpec) -> Self {
        let n = spec.n();
        let mut cols = Vec::with_capacity(n);
        let mut ub = Vec::new();
        for j in 0..n {
            let vb = spec.bound(j);
            match (vb.lower.filter(|l| l.is_finite()), vb.upper.filter(|u| u.is_finite())) {
                (Some(l), Some(u)) => {
                    cols.push(ColMap::Shift(j, l));
                    ub.push(u - l);
                }
                (Some(l), None) => {
                    cols.push(ColMap::Shift(j, l));
                    ub.push(f64::INFINITY);
                }
                (None, Some(u)) => {
                    cols.push(ColMap::Flip(j, u));
                    ub.push(f64::INFINITY);
                }
                (None, None) => {
                    cols.push(ColMap::Shift(j, 0.0));
                    ub.push(f64::INFINITY);
                    cols.push(ColMap::Neg(j));
                    ub.push(f64::INFINITY);
                }
            }
        }
        let n_struct = cols.len();
        let n_eq = spec.eq_matrix.rows();
        let n_ineq = spec.ineq_matrix.rows();
        let n_rows = n_eq + n_ineq;
        let ncols = n_struct + n_ineq + n_rows;
        ub.extend(std::iter::repeat_n(f64::INFINITY, n_ineq + n_rows));

        let mut costs = vec![0.0; ncols];
        for (k, c) in cols.iter().enumerate() {
            costs[k] = match *c {
                ColMap::Shift(j, _) => spec.objective[j],
                ColMap::Flip(j, _) | ColMap::Neg(j) => -spec.objective[j],
            };
        }

        let mut a = vec![0.0; n_rows * ncols];
        let mut b = vec![0.0; n_rows];
        let mut row_factor = vec![1.0; n_rows];
        let rows = spec.eq_matrix.row_iter().zip(&spec.eq_rhs).chain(spec.ineq_matrix.row_iter().zip(&spec.ineq_rhs));
        for (r, (orow, &rhs)) in rows.enumerate() {
            let dst = &mut a[r * ncols..(r + 1) * ncols];
            let mut rhs = rhs;
            for (k, c) in cols.iter().enumerate() {
                match *c {
                    ColMap::Shift(j, l) => {
                        dst[k] = orow[j];
                        rhs -= orow[j] * l;
                    }
                    ColMap::Flip(j, u) => {
                        dst[k] = -orow[j];
                        rhs -= orow[j] * u;
                    }
                    ColMap::Neg(j) => dst[k] = -orow[j],
                }
            }
            if r >= n_eq {
                dst[n_struct + (r - n_eq)] = -1.0;
            }
            let scale = dst[..n_struct].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
            let f = sign / scale;
            dst[..n_struct + n_ineq].iter_mut().for_each(|v| *v *= f);
            dst[n_struct + n_ineq + r] = 1.0;
            b[r] = rhs * f;
            row_factor[r] = f;
        }
        Self { cols, n_orig: n, n_eq, n_rows, ncols, a, b, ub, costs, row_factor }
    }

    fn recover_x(&self, tab: &Tableau) -> Vec<f64> {
        let mut x = vec![0.0; self.n_orig];
        for (k, c) in self.cols.iter().enumerate() {
            let y = tab.value(k);
            match *c {
                ColMap::Shift(j, l) => x[j] += l + y,
                ColMap::Flip(j, u) => x[j] += u - y,
                ColMap::Neg(j) => x[j] -= y,
            }
        }
        x
    }

    /// Maps tableau duals (one per kept row) to the caller's rows.
    fn row_duals(&self, row_map: &[usize], pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        for (k, &r) in row_map.iter().enumerate() {
            out[r] = pi[k] * self.row_factor[r];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
}

struct Tableau {
    m: usize,
    ncols: usize,
    art0: usize,
    a0: Vec<f64>,
    b0: Vec<f64>,
    ub: Vec<f64>,
    /// Original row index of each tableau row.
    row_map: Vec<usize>,
    t: Vec<f64>,
    beta: Vec<f64>,
    d: Vec<f64>,
    pi: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    pos: Vec<usize>,
    pivots: usize,
}

const REBUILD_EVERY: usize = 64;
const PIVOT_TOL: f64 = 1e-9;
const RELATIVE_PIVOT_TOL: f64 = 1e-7;

impl Tableau {
    fn new(std: &StandardForm) -> Self {
        let m = std.n_rows;
        let ncols = std.ncols;
        let art0 = ncols - m;
        let basis: Vec<usize> = (art0..ncols).collect();
        let mut state = vec![VarState::Lower; ncols];
        let mut pos = vec![usize::MAX; ncols];
        for (r, &j) in basis.iter().enumerate() {
            state[j] = VarState::Basic;
            pos[j] = r;
        }
        Self {
            m,
            ncols,
            art0,
            a0: std.a.clone(),
            b0: std.b.clone(),
            ub: std.ub.clone(),
            row_map: (0..m).collect(),
            t: std.a.clone(),
            beta: std.b.clone(),
            d: vec![0.0; ncols],
            pi: vec![0.0; m],
            basis,
            state,
            pos,
            pivots: 0,
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic => self.beta[self.pos[j]],
            VarState::Lower => 0.0,
            VarState::Upper => self.ub[j],
        }
    }

    /// Recomputes the tableau, basic values, duals and reduced costs from the
    /// original data and the current basis.
    fn rebuild(&mut self, costs: &[f64]) -> Result<(), NumericError> {
        let (m, nc) = (self.m, self.ncols);
        let mut bmat = vec![0.0; m * m];
        for r in 0..m {
            for (k, &j) in self.basis.iter().enumerate() {
                bmat[r * m + k] = self.a0[r * nc + j];
            }
        }
        let binv = invert(&bmat, m, 1e-12).ok_or_else(|| NumericError::Breakdown("singular basis".into()))?;
        let mut rhs = self.b0.clone();
        for j in 0..nc {
            if self.state[j] == VarState::Upper {
                for (r, v) in rhs.iter_mut().enumerate() {
                    *v -= self.a0[r * nc + j] * self.ub[j];
                }
            }
        }
        let mut t = vec![0.0; m * nc];
        for r in 0..m {
            let dst = &mut t[r * nc..(r + 1) * nc];
            for k in 0..m {
                let w = binv[r * m + k];
                if w != 0.0 {
                    let src = &self.a0[k * nc..(k + 1) * nc];
                    dst.iter_mut().zip(src).for_each(|(a, b)| *a += w * b);
                }
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                t[i * nc + j] = if i == r { 1.0 } else { 0.0 };
            }
        }
        self.beta = (0..m).map(|r| dot(&binv[r * m..(r + 1) * m], &rhs)).collect();
        let cb: Vec<f64> = self.basis.iter().map(|&j| costs[j]).collect();
        self.pi = (0..m).map(|k| (0..m).map(|r| cb[r] * binv[r * m + k]).sum()).collect();
        self.d = (0..nc)
            .map(|j| {
                if self.state[j] == VarState::Basic {
                    0.0
                } else {
                    costs[j] - (0..m).map(|r| self.pi[r] * self.a0[r * nc + j]).sum::<f64>()
                }
            })
            .collect();
        self.t = t;
        Ok(())
    }

    /// Runs simplex iterations until optimal (`Ok(true)`) or unbounded (`Ok(false)`).
    fn iterate(&mut self, costs: &[f64], opts: &LpOptions) -> Result<bool, NumericError> {
        let dtol = 1e-9 * (1.0 + norm_inf(costs));
        let nc = self.ncols;
        let mut since_rebuild = 0;
        let mut verified = false;
        loop {
            if self.pivots > opts.max_pivots {
                return Err(NumericError::IterationLimit(opts.max_pivots));
            }
            let entering = (0..self.art0).find_map(|j| match self.state[j] {
                VarState::Lower if self.d[j] < -dtol => Some((j, 1.0)),
                VarState::Upper if self.d[j] > dtol => Some((j, -1.0)),
                _ => None,
            });
            let Some((q, dir)) = entering else {
                if verified {
                    return Ok(true);
                }
                self.rebuild(costs)?;
                verified = true;
                since_rebuild = 0;
                continue;
            };
            verified = false;

            // Ratio test; `None` as the leaving row means a bound flip of `q`.
            let mut best_t = self.ub[q];
            let mut best_row: Option<(usize, VarState)> = None;
            let mut best_idx = q;
            let col_max = (0..self.m).map(|r| self.t[r * nc + q].abs()).fold(0.0, f64::max);
            let piv_tol = PIVOT_TOL.max(RELATIVE_PIVOT_TOL * col_max);
            for r in 0..self.m {
                let a = dir * self.t[r * nc + q];
                let jb = self.basis[r];
                let (t, bound) = if a > piv_tol {
                    ((self.beta[r] / a).max(0.0), VarState::Lower)
                } else if a < -piv_tol && self.ub[jb].is_finite() {
                    (((self.ub[jb] - self.beta[r]) / -a).max(0.0), VarState::Upper)
                } else {
                    continue;
                };
                let tie = 1e-12 * (1.0 + t.abs());
                if t < best_t - tie || ((t - best_t).abs() <= tie && jb < best_idx) {
                    best_t = t;
                    best_row = Some((r, bound));
                    best_idx = jb;
                }
            }
            if !best_t.is_finite() {
                return Ok(false);
            }
            let step = best_t * dir;
            for r in 0..self.m {
                let a = self.t[r * nc + q];
                if a != 0.0 {
                    self.beta[r] -= step * a;
                }
            }
            match best_row {
                None => {
                    self.state[q] = if self.state[q] == VarState::Lower { VarState::Upper } else { VarState::Lower };
                }
                Some((r, bound)) => {
                    let entering_value = self.value_nonbasic(q) + step;
                    let leaving = self.basis[r];
                    self.state[leaving] = bound;
                    self.pos[leaving] = usize::MAX;
                    self.pivot(r, q);
                    self.beta[r] = entering_value;
                    self.basis[r] = q;
                    self.state[q] = VarState::Basic;
                    self.pos[q] = r;
                }
            }
            self.pivots += 1;
            since_rebuild += 1;
            if since_rebuild >= REBUILD_EVERY {
                self.rebuild(costs)?;
                since_rebuild = 0;
            }
        }
    }

    fn value_nonbasic(&self, j: usize) -> f64 {
        if self.state[j] == VarState::Upper {
            self.ub[j]
        } else {
            0.0
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + q];
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        prow.iter_mut().for_each(|v| *v /= piv);
        for row in before.chunks_exact_mut(nc).chain(after.chunks_exact_mut(nc)) {
            let f = row[q];
            if f != 0.0 {
                row.iter_mut().zip(prow.iter()).for_each(|(a, b)| *a -= f * b);
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            self.d.iter_mut().zip(prow.iter()).for_each(|(a, b)| *a -= f * b);
            self.d[q] = 0.0;
        }
    }

    /// Pivots zero-valued artificials out of the basis and deletes rows that
    /// turn out to be linear combinations of the others.
    fn expel_artificials(&mut self) {
        let nc = self.ncols;
        let mut redundant = Vec::new();
        for r in 0..self.m {
            if self.basis[r] < self.art0 {
                continue;
            }
            let candidate = (0..self.art0)
                .filter(|&j| self.state[j] != VarState::Basic)
                .find(|&j| self.t[r * nc + j].abs() > 1e-7);
            match candidate {
                Some(j) => {
                    let value = self.value_nonbasic(j);
                    let art = self.basis[r];
                    self.state[art] = VarState::Lower;
                    self.pos[art] = usize::MAX;
                    self.pivot(r, j);
                    self.beta[r] = value;
                    self.basis[r] = j;
                    self.state[j] = VarState::Basic;
                    self.pos[j] = r;
                }
                None => redundant.push(r),
            }
        }
        if redundant.is_empty() {
            return;
        }
        let keep: Vec<usize> = (0..self.m).filter(|r| !redundant.contains(r)).collect();
        for &r in &redundant {
            let art = self.basis[r];
            self.state[art] = VarState::Lower;
            self.pos[art] = usize::MAX;
        }
        self.a0 = keep.iter().flat_map(|&r| self.a0[r * nc..(r + 1) * nc].to_vec()).collect();
        self.b0 = keep.iter().map(|&r| self.b0[r]).collect();
        self.row_map = keep.iter().map(|&r| self.row_map[r]).collect();
        self.basis = keep.iter().map(|&r| self.basis[r]).collect();
        self.beta = keep.iter().map(|&r| self.beta[r]).collect();
        self.m = keep.len();
        for (r, &j) in self.basis.iter().enumerate() {
            self.pos[j] = r;
        }
    }
}

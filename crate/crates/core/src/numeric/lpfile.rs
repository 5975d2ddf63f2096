//! CPLEX-style LP text export for cross-checking against external solvers.

use std::fmt::Write as _;

use super::lp::{LpSpec, VarBound};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A named model with a linear-plus-quadratic objective and optional binaries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpModel {
    pub var_names: Vec<String>,
    pub linear: Vec<f64>,
    /// Terms `q · x_i · x_j`, written inside the `[ ... ] / 2` block with doubled coefficients.
    pub quadratic: Vec<(usize, usize, f64)>,
    pub constant: f64,
    pub rows: Vec<LinearRow>,
    pub bounds: Vec<VarBound>,
    pub binaries: Vec<usize>,
}

impl LpModel {
    pub fn add_var(&mut self, name: impl Into<String>, bound: VarBound) -> usize {
        self.var_names.push(name.into());
        self.linear.push(0.0);
        self.bounds.push(bound);
        self.var_names.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(LinearRow { name: name.into(), terms, sense, rhs });
    }
}

impl From<&LpSpec> for LpModel {
    fn from(spec: &LpSpec) -> Self {
        let n = spec.n();
        let mut m = LpModel::default();
        for j in 0..n {
            m.add_var(format!("x{}", j + 1), spec.bound(j));
        }
        m.linear = spec.objective.clone();
        let sparse = |row: &[f64]| row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect();
        for (i, (row, &f)) in spec.eq_matrix.row_iter().zip(&spec.eq_rhs).enumerate() {
            m.add_row(format!("e{}", i + 1), sparse(row), Sense::Eq, f);
        }
        for (i, (row, &h)) in spec.ineq_matrix.row_iter().zip(&spec.ineq_rhs).enumerate() {
            m.add_row(format!("g{}", i + 1), sparse(row), Sense::Ge, h);
        }
        m
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn write_terms(out: &mut String, names: &[String], terms: impl Iterator<Item = (usize, f64)>) -> bool {
    let mut first = true;
    for (j, c) in terms.filter(|(_, c)| *c != 0.0) {
        let sign = match (c < 0.0, first) {
            (true, _) => "- ",
            (false, true) => "",
            (false, false) => "+ ",
        };
        let _ = write!(out, " {sign}{} {}", fmt_num(c.abs()), names[j]);
        first = false;
    }
    !first
}

pub fn write_lp(model: &LpModel) -> String {
    let names = &model.var_names;
    let mut out = String::from("\\ inverse learning export\nMinimize\n obj:");
    let mut any = write_terms(&mut out, names, model.linear.iter().copied().enumerate());
    if !model.quadratic.is_empty() {
        out.push_str(if any { " + [" } else { " [" });
        let mut first = true;
        for &(i, j, q) in &model.quadratic {
            let c = 2.0 * q;
            let sign = match (c < 0.0, first) {
                (true, _) => "- ",
                (false, true) => "",
                (false, false) => "+ ",
            };
            let body = if i == j { format!("{}^2", names[i]) } else { format!("{} * {}", names[i], names[j]) };
            let _ = write!(out, " {sign}{} {body}", fmt_num(c.abs()));
            first = false;
        }
        out.push_str(" ] / 2");
        any = true;
    }
    if model.constant != 0.0 {
        let _ = write!(out, " {} {}", if model.constant < 0.0 { "-" } else { "+" }, fmt_num(model.constant.abs()));
        any = true;
    }
    if !any {
        out.push_str(" 0 ");
        out.push_str(names.first().map_or("x1", String::as_str));
    }
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}:", row.name);
        if !write_terms(&mut out, names, row.terms.iter().copied()) {
            let _ = write!(out, " 0 {}", names.first().map_or("x1", String::as_str));
        }
        let _ = writeln!(out, " {} {}", row.sense.symbol(), fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (j, b) in model.bounds.iter().enumerate() {
        let name = &names[j];
        let line = match (b.lower, b.upper) {
            (None, None) => format!(" {name} free"),
            (Some(l), None) if l == 0.0 => continue,
            (Some(l), None) => format!(" {name} >= {}", fmt_num(l)),
            (None, Some(u)) => format!(" -inf <= {name} <= {}", fmt_num(u)),
            (Some(l), Some(u)) => format!(" {} <= {name} <= {}", fmt_num(l), fmt_num(u)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    if !model.binaries.is_empty() {
        out.push_str("Binaries\n");
        for &j in &model.binaries {
            let _ = writeln!(out, " {}", names[j]);
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_sections() {
        let mut s = LpSpec::new(vec![1.0, -2.0]);
        s.push_ineq(&[1.0, 1.0], 1.0).unwrap();
        s.push_eq(&[0.0, 1.0], 0.5).unwrap();
        s.set_bound(0, VarBound::NONNEG);
        let text = write_lp(&LpModel::from(&s));
        assert!(text.contains("Minimize\n obj: 1 x1 - 2 x2\n"));
        assert!(text.contains(" e1: 1 x2 = 0.5\n"));
        assert!(text.contains(" g1: 1 x1 + 1 x2 >= 1\n"));
        assert!(text.contains(" x2 free\n"));
        assert!(!text.contains("x1 free"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn quadratic_block_and_binaries() {
        let mut m = LpModel::default();
        let z = m.add_var("z", VarBound::FREE);
        let v = m.add_var("v", VarBound::range(0.0, 1.0));
        m.quadratic.push((z, z, 3.0));
        m.linear[z] = -6.0;
        m.binaries.push(v);
        m.add_row("c", vec![(z, 1.0), (v, -4.0)], Sense::Le, 0.0);
        let text = write_lp(&m);
        assert!(text.contains("obj: - 6 z + [ 6 z^2 ] / 2"), "{text}");
        assert!(text.contains("Binaries\n v\n"));
    }
}

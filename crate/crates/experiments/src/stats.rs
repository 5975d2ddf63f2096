use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::statistics::{Data, OrderStatistics, RankTieBreaker, Statistics};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spearman {
    pub rho: f64,
    /// Two-sided, from the t approximation with `n − 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

/// Rank correlation with average ranks for ties. `None` for fewer than three
/// pairs or a constant series.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<Spearman> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return None;
    }
    let rx = Data::new(x.to_vec()).ranks(RankTieBreaker::Average);
    let ry = Data::new(y.to_vec()).ranks(RankTieBreaker::Average);
    let (sx, sy) = (rx.iter().std_dev(), ry.iter().std_dev());
    if sx == 0.0 || sy == 0.0 {
        return None;
    }
    let rho = (rx.iter().covariance(ry.iter()) / (sx * sy)).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if 1.0 - rho.abs() < 1e-15 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).ok()?;
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Some(Spearman { rho, p_value, n })
}

/// `(q1, median, q3)` of a nonempty sample.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut d = Data::new(values.to_vec());
    (d.lower_quartile(), d.median(), d.upper_quartile())
}

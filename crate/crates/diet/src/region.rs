use invlearn_core::model::{
    ConstraintHierarchy, InverseProblem, LossKind, NormalizationSet, ObservationSummary, PolyhedralRegion, ProblemDocument,
    RowClass, TrackedQuantity,
};
use invlearn_core::numeric::{solve_lp, DenseMatrix, LpStatus};

use crate::{DietError, FoodGroupTable, NutrientBound, NutrientMatrix, RegimenBounds};

pub const DEFAULT_CAP: f64 = 8.0;

const LOWER: &str = " lower";
const UPPER: &str = " upper";

/// Nutrient bound rows (in regimen order, lower before upper) followed by the
/// serving box `0 ≤ z_j ≤ cap`.
pub fn build_diet_region(
    groups: &FoodGroupTable,
    nutrients: &NutrientMatrix,
    regimen: &RegimenBounds,
    cap: f64,
) -> Result<(PolyhedralRegion, ConstraintHierarchy), DietError> {
    let n = groups.len();
    if nutrients.groups() != n {
        return Err(DietError::Table(format!("nutrient matrix has {} groups, table has {n}", nutrients.groups())));
    }
    if !(cap.is_finite() && cap > 0.0) {
        return Err(DietError::Config(format!("serving cap must be positive, got {cap}")));
    }
    regimen.validate()?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    let mut names = Vec::new();
    let mut relevant = Vec::new();
    for bound in &regimen.bounds {
        let i = nutrients
            .index_of(&bound.nutrient)
            .ok_or_else(|| DietError::Config(format!("regimen bounds unknown nutrient {:?}", bound.nutrient)))?;
        let content = nutrients.row(i);
        if let Some(lo) = bound.lower {
            if bound.relevant_lower {
                relevant.push(rows.len());
            }
            rows.push(content.to_vec());
            rhs.push(lo);
            names.push(format!("{}{LOWER}", bound.nutrient));
        }
        if let Some(hi) = bound.upper {
            if bound.relevant_upper {
                relevant.push(rows.len());
            }
            rows.push(content.iter().map(|c| -c).collect());
            rhs.push(-hi);
            names.push(format!("{}{UPPER}", bound.nutrient));
        }
    }
    let structural = rows.len();
    for (j, group) in groups.names().iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push(e.clone());
        rhs.push(0.0);
        names.push(format!("{group} >= 0"));
        e[j] = -1.0;
        rows.push(e);
        rhs.push(-cap);
        names.push(format!("{group} <= {cap}"));
    }
    let mut labels = vec![RowClass::Structural; structural];
    labels.resize(rows.len(), RowClass::Box);
    let a = DenseMatrix::from_rows(n, &rows).map_err(invlearn_core::model::ModelError::from)?;
    let region = PolyhedralRegion::with_names(a, rhs, labels, names)?;

    let phase_one = solve_lp(&region.forward_lp(&vec![0.0; n])).map_err(invlearn_core::model::ModelError::from)?;
    if phase_one.status == LpStatus::Infeasible {
        return Err(DietError::Config(infeasibility_message(&region, structural, phase_one.certificate.map(|c| c.ineq_weights))));
    }
    Ok((region, ConstraintHierarchy::new(relevant, Vec::new())))
}

/// Names the nutrient rows carrying the most weight in the phase-one dual.
fn infeasibility_message(region: &PolyhedralRegion, structural: usize, weights: Option<Vec<f64>>) -> String {
    let weights = weights.unwrap_or_default();
    let mut ranked: Vec<(usize, f64)> =
        (0..structural).map(|i| (i, weights.get(i).copied().unwrap_or(0.0).abs())).filter(|(_, w)| *w > 0.0).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let describe = |i: usize| {
        let name = region.name(i);
        let value = if name.ends_with(UPPER) { -region.rhs(i) } else { region.rhs(i) };
        format!("{name} {value}")
    };
    match ranked.as_slice() {
        [] => "regimen bounds admit no diet within the serving cap".to_string(),
        [(i, _)] => format!("regimen bound {} is unattainable within the serving cap", describe(*i)),
        [(i, _), (j, _), ..] => format!("regimen bounds conflict: {} against {}", describe(*i), describe(*j)),
    }
}

/// Reads nutrient bounds back from a region built by [`build_diet_region`].
pub fn extract_bounds(region: &PolyhedralRegion, hierarchy: &ConstraintHierarchy) -> Vec<NutrientBound> {
    let mut out: Vec<NutrientBound> = Vec::new();
    for (i, name) in region.names().iter().enumerate() {
        if region.label(i) != RowClass::Structural {
            continue;
        }
        let (nutrient, upper) = match (name.strip_suffix(LOWER), name.strip_suffix(UPPER)) {
            (Some(n), _) => (n, false),
            (_, Some(n)) => (n, true),
            _ => continue,
        };
        let pos = match out.iter().position(|b| b.nutrient == nutrient) {
            Some(p) => p,
            None => {
                out.push(NutrientBound {
                    nutrient: nutrient.to_string(),
                    lower: None,
                    upper: None,
                    relevant_lower: false,
                    relevant_upper: false,
                });
                out.len() - 1
            }
        };
        let b = &mut out[pos];
        if upper {
            b.upper = Some(-region.rhs(i));
            b.relevant_upper = hierarchy.is_relevant(i);
        } else {
            b.lower = Some(region.rhs(i));
            b.relevant_lower = hierarchy.is_relevant(i);
        }
    }
    out
}

/// One tracked total per nutrient, with the regimen's band where it has one.
pub fn nutrient_quantities(nutrients: &NutrientMatrix, regimen: &RegimenBounds) -> Vec<TrackedQuantity> {
    nutrients
        .nutrients()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let bound = regimen.get(name);
            TrackedQuantity {
                name: name.clone(),
                coefficients: nutrients.row(i).to_vec(),
                lower: bound.and_then(|b| b.lower),
                upper: bound.and_then(|b| b.upper),
            }
        })
        .collect()
}

/// The l1 inverse problem over the diet region. Validation (including the
/// empty-observation finding) is left to [`InverseProblem::validate`].
pub fn assemble_diet_problem(
    region: PolyhedralRegion,
    hierarchy: ConstraintHierarchy,
    observations: ObservationSummary,
) -> Result<InverseProblem, DietError> {
    if observations.dim() != region.n() {
        return Err(DietError::Config(format!(
            "intake has {} food groups, region has {}",
            observations.dim(),
            region.n()
        )));
    }
    Ok(InverseProblem { region, hierarchy, observations, loss: LossKind::L1, normalization: NormalizationSet::simplex() })
}

/// Tables, regimen and the region built from them.
#[derive(Debug, Clone)]
pub struct DietModel {
    pub groups: FoodGroupTable,
    pub nutrients: NutrientMatrix,
    pub regimen: RegimenBounds,
    pub cap: f64,
    pub region: PolyhedralRegion,
    pub hierarchy: ConstraintHierarchy,
}

impl DietModel {
    pub fn new(groups: FoodGroupTable, nutrients: NutrientMatrix, regimen: RegimenBounds, cap: f64) -> Result<Self, DietError> {
        let (region, hierarchy) = build_diet_region(&groups, &nutrients, &regimen, cap)?;
        Ok(Self { groups, nutrients, regimen, cap, region, hierarchy })
    }

    /// Bundled tables with a bundled preset (or regimen file path).
    pub fn bundled(regimen: &str) -> Result<Self, DietError> {
        let groups = FoodGroupTable::bundled();
        let nutrients = NutrientMatrix::bundled(&groups);
        Self::new(groups, nutrients, RegimenBounds::resolve(regimen)?, DEFAULT_CAP)
    }

    pub fn problem(&self, observations: ObservationSummary) -> Result<InverseProblem, DietError> {
        assemble_diet_problem(self.region.clone(), self.hierarchy.clone(), observations)
    }

    pub fn quantities(&self) -> Vec<TrackedQuantity> {
        nutrient_quantities(&self.nutrients, &self.regimen)
    }

    /// Interchange document with group names and nutrient totals attached.
    pub fn document(&self, observations: ObservationSummary) -> Result<ProblemDocument, DietError> {
        let mut doc = ProblemDocument::from_problem(&self.problem(observations)?);
        doc.variable_names = Some(self.groups.names().to_vec());
        doc.quantities = self.quantities();
        Ok(doc)
    }

    /// Row index of a nutrient bound, `upper` selecting the upper side.
    pub fn bound_row(&self, nutrient: &str, upper: bool) -> Option<usize> {
        let name = format!("{nutrient}{}", if upper { UPPER } else { LOWER });
        self.region.names().iter().position(|n| *n == name)
    }
}

use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::DietError;

const FOOD_GROUPS_CSV: &str = include_str!("../data/food_groups.csv");
const NUTRIENTS_CSV: &str = include_str!("../data/nutrients.csv");

/// Ordered food groups (the decision variables) with serving sizes in grams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoodGroupTable {
    names: Vec<String>,
    serving_g: Vec<f64>,
}

impl FoodGroupTable {
    pub fn new(names: Vec<String>, serving_g: Vec<f64>) -> Result<Self, DietError> {
        if names.is_empty() || names.len() != serving_g.len() {
            return Err(DietError::Table(format!("{} group names for {} serving sizes", names.len(), serving_g.len())));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(DietError::Table(format!("duplicate food group {dup:?}")));
        }
        if let Some(i) = serving_g.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(DietError::Table(format!("serving size of {:?} must be positive", names[i])));
        }
        Ok(Self { names, serving_g })
    }

    /// CSV with columns `group,serving_g`.
    pub fn from_csv<R: Read>(input: R) -> Result<Self, DietError> {
        #[derive(Deserialize)]
        struct Row {
            group: String,
            serving_g: f64,
        }
        let mut names = Vec::new();
        let mut serving = Vec::new();
        for row in csv::Reader::from_reader(input).deserialize() {
            let row: Row = row?;
            names.push(row.group);
            serving.push(row.serving_g);
        }
        Self::new(names, serving)
    }

    pub fn bundled() -> Self {
        Self::from_csv(FOOD_GROUPS_CSV.as_bytes()).expect("bundled food groups parse")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn serving_g(&self) -> &[f64] {
        &self.serving_g
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Nutrient content per serving, one row per nutrient and one column per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NutrientMatrix {
    nutrients: Vec<String>,
    content: Vec<Vec<f64>>,
}

impl NutrientMatrix {
    pub fn new(nutrients: Vec<String>, content: Vec<Vec<f64>>) -> Result<Self, DietError> {
        if nutrients.is_empty() || nutrients.len() != content.len() {
            return Err(DietError::Table(format!("{} nutrient names for {} rows", nutrients.len(), content.len())));
        }
        let width = content[0].len();
        for (name, row) in nutrients.iter().zip(&content) {
            if row.len() != width {
                return Err(DietError::Table(format!("nutrient {name:?} has {} entries, expected {width}", row.len())));
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(DietError::Table(format!("nutrient {name:?} has a negative or non-finite entry")));
            }
        }
        Ok(Self { nutrients, content })
    }

    /// Long-format CSV: a `group` column, an optional `source` column, then
    /// one column per nutrient. Rows are reordered to follow `groups`.
    pub fn from_csv<R: Read>(input: R, groups: &FoodGroupTable) -> Result<Self, DietError> {
        let mut reader = csv::Reader::from_reader(input);
        let header = reader.headers()?.clone();
        if header.get(0) != Some("group") {
            return Err(DietError::Table("first nutrient column must be `group`".into()));
        }
        let skip = if header.get(1) == Some("source") { 2 } else { 1 };
        let nutrients: Vec<String> = header.iter().skip(skip).map(str::to_string).collect();
        let mut content = vec![vec![f64::NAN; groups.len()]; nutrients.len()];
        let mut filled = vec![false; groups.len()];
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let group = record.get(0).unwrap_or_default();
            let j = groups
                .index_of(group)
                .ok_or_else(|| DietError::Table(format!("line {line}: unknown food group {group:?}")))?;
            if std::mem::replace(&mut filled[j], true) {
                return Err(DietError::Table(format!("line {line}: food group {group:?} listed twice")));
            }
            for (i, cell) in record.iter().skip(skip).enumerate() {
                content[i][j] = cell
                    .trim()
                    .parse()
                    .map_err(|_| DietError::Table(format!("line {line}: {cell:?} is not a number")))?;
            }
        }
        if let Some(j) = filled.iter().position(|f| !f) {
            return Err(DietError::Table(format!("no nutrient row for food group {:?}", groups.names()[j])));
        }
        Self::new(nutrients, content)
    }

    pub fn bundled(groups: &FoodGroupTable) -> Self {
        Self::from_csv(NUTRIENTS_CSV.as_bytes(), groups).expect("bundled nutrients parse")
    }

    pub fn nutrients(&self) -> &[String] {
        &self.nutrients
    }

    pub fn groups(&self) -> usize {
        self.content[0].len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.content[i]
    }

    pub fn index_of(&self, nutrient: &str) -> Option<usize> {
        self.nutrients.iter().position(|n| n == nutrient)
    }

    /// Nutrient totals of a servings vector.
    pub fn totals(&self, servings: &[f64]) -> Vec<f64> {
        self.content.iter().map(|row| row.iter().zip(servings).map(|(c, s)| c * s).sum()).collect()
    }
}

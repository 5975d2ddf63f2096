use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::DietError;

pub const DEFAULT_PRESET: &str = "dash-w51";

const PRESETS: &[(&str, &str)] = &[
    ("dash-w51", include_str!("../data/regimens/dash-w51.json")),
    ("dash-w51-alt", include_str!("../data/regimens/dash-w51-alt.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NutrientBound {
    pub nutrient: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default)]
    pub relevant_lower: bool,
    #[serde(default)]
    pub relevant_upper: bool,
}

/// A named set of nutrient bounds for one demographic group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimenBounds {
    pub name: String,
    #[serde(default)]
    pub demographic: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub bounds: Vec<NutrientBound>,
}

impl RegimenBounds {
    pub fn validate(&self) -> Result<(), DietError> {
        let mut seen = HashSet::new();
        for b in &self.bounds {
            let name = &b.nutrient;
            if !seen.insert(name.as_str()) {
                return Err(DietError::Config(format!("nutrient {name:?} bounded twice")));
            }
            if b.lower.into_iter().chain(b.upper).any(|v| !v.is_finite()) {
                return Err(DietError::Config(format!("{name}: non-finite bound")));
            }
            if let (Some(lo), Some(hi)) = (b.lower, b.upper) {
                if lo > hi {
                    return Err(DietError::Config(format!("{name}: lower bound {lo} exceeds upper bound {hi}")));
                }
            }
            if (b.relevant_lower && b.lower.is_none()) || (b.relevant_upper && b.upper.is_none()) {
                return Err(DietError::Config(format!("{name}: relevance flag on a missing bound")));
            }
        }
        if !self.bounds.iter().any(|b| b.relevant_lower || b.relevant_upper) {
            return Err(DietError::Config(format!("regimen {:?} marks no bound as relevant", self.name)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, DietError> {
        let r: Self = serde_json::from_str(text)?;
        r.validate()?;
        Ok(r)
    }

    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    pub fn preset(name: &str) -> Result<Self, DietError> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| DietError::UnknownPreset(name.into()))?;
        Self::from_json(text)
    }

    /// A bundled preset name, or a path to a regimen JSON file.
    pub fn resolve(name_or_path: &str) -> Result<Self, DietError> {
        if PRESETS.iter().any(|(n, _)| *n == name_or_path) {
            return Self::preset(name_or_path);
        }
        let path = Path::new(name_or_path);
        if path.is_file() {
            return Self::from_json(&std::fs::read_to_string(path)?);
        }
        Err(DietError::UnknownPreset(name_or_path.into()))
    }

    pub fn get(&self, nutrient: &str) -> Option<&NutrientBound> {
        self.bounds.iter().find(|b| b.nutrient == nutrient)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load_and_differ_in_relevance() {
        let names: Vec<_> = RegimenBounds::preset_names().collect();
        assert!(names.contains(&DEFAULT_PRESET));
        let main = RegimenBounds::preset("dash-w51").unwrap();
        let alt = RegimenBounds::preset("dash-w51-alt").unwrap();
        let sodium = main.get("sodium_mg").unwrap();
        assert_eq!((sodium.lower, sodium.upper), (Some(1000.0), Some(2300.0)));
        assert!(sodium.relevant_upper && !sodium.relevant_lower);
        assert!(alt.get("sodium_mg").unwrap().relevant_lower);
        assert_eq!(main.bounds.len(), 8);
        assert!(matches!(RegimenBounds::preset("keto"), Err(DietError::UnknownPreset(_))));
    }

    #[test]
    fn validation_errors() {
        let bound = |lower, upper, rl| NutrientBound {
            nutrient: "x".into(),
            lower,
            upper,
            relevant_lower: rl,
            relevant_upper: false,
        };
        let r = |b| RegimenBounds { name: "t".into(), demographic: String::new(), description: String::new(), bounds: vec![b] };
        assert!(r(bound(Some(1.0), Some(2.0), true)).validate().is_ok());
        assert!(matches!(r(bound(Some(3.0), Some(2.0), true)).validate(), Err(DietError::Config(_))));
        assert!(r(bound(Some(1.0), Some(2.0), false)).validate().is_err());
        assert!(r(bound(None, Some(2.0), true)).validate().is_err());
    }
}

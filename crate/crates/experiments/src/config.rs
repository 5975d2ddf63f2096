use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::batch::{BatchOptions, ModelSpec};
use crate::instance::{InstanceSpec, Scenario};
use crate::ExperimentError;

/// A grid of instance specs, the models to run and the repetitions per grid
/// point. Grid axes expand as a full product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    pub repetitions: usize,
    pub n: Vec<usize>,
    /// Relevant rows per instance; defaults to `2n`.
    #[serde(default)]
    pub relevant: Option<usize>,
    pub scenarios: Vec<Scenario>,
    #[serde(default = "one")]
    pub binding: Vec<usize>,
    pub noise: Vec<f64>,
    #[serde(default = "zero")]
    pub knowledge: Vec<usize>,
    #[serde(default = "k_min")]
    pub k_min: usize,
    #[serde(default = "k_max")]
    pub k_max: usize,
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub options: BatchOptions,
}

fn one() -> Vec<usize> {
    vec![1]
}
fn zero() -> Vec<usize> {
    vec![0]
}
fn k_min() -> usize {
    2
}
fn k_max() -> usize {
    8
}

impl BenchConfig {
    /// Parses JSON when the text starts with `{`, TOML otherwise.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn check(&self) -> Result<(), ExperimentError> {
        if self.repetitions == 0 || self.n.is_empty() || self.scenarios.is_empty() || self.noise.is_empty() || self.models.is_empty() {
            return Err(ExperimentError::Config("every grid axis needs at least one value".into()));
        }
        self.specs().iter().try_for_each(InstanceSpec::validate)
    }

    pub fn specs(&self) -> Vec<InstanceSpec> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &scenario in &self.scenarios {
                for &binding in &self.binding {
                    for &noise in &self.noise {
                        for &knowledge in &self.knowledge {
                            out.push(InstanceSpec {
                                seed: self.seed,
                                n,
                                relevant: self.relevant.unwrap_or(2 * n),
                                scenario,
                                binding,
                                noise,
                                k_min: self.k_min,
                                k_max: self.k_max,
                                knowledge,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML: &str = r#"
seed = 7
repetitions = 100
n = [10]
scenarios = ["il-assumption", "io-assumption"]
noise = [0.0, 0.05, 0.2]
models = ["il", "baseline", "gil(5)", "mgil:5"]

[options]
vertex_samples = 4
"#;

    #[test]
    fn toml_and_json_agree() {
        let t = BenchConfig::parse(TOML).unwrap();
        assert_eq!(t.specs().len(), 6);
        assert_eq!(t.options.vertex_samples, 4);
        assert_eq!(t.models[3], ModelSpec::Mgil(5));
        let j = BenchConfig::parse(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(t, j);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(BenchConfig::parse(&TOML.replace("n = [10]", "n = [10]\nbinding = [11]")).is_err());
        assert!(BenchConfig::parse(&TOML.replace("\"il\",", "\"lasso\",")).is_err());
        assert!(BenchConfig::parse(&TOML.replace("repetitions = 100", "repetitions = 0")).is_err());
    }
}

//! Experiment files.
//!
//! A file is TOML whose tables act as INI-style sections. Every section
//! except `[compare]` is flattened into one key space that maps onto
//! [`TrainConfig`], so the grouping is purely cosmetic:
//!
//! ```toml
//! [problem]
//! problem = "poisson2d"
//! d = 2
//!
//! [model]
//! m = 50
//! L = 3
//!
//! [training]
//! n = 2000
//! N1 = 1000
//! N2 = 1000
//!
//! [compare]
//! methods = ["basic", "selectnet"]
//! trials = 5
//! ```
//!
//! A `[metadata]` section is ignored, which lets a run's `metadata.toml`
//! be fed back in unchanged.

use std::path::Path;

use anyhow::{bail, Context, Result};
use selectnet::{Method, TrainConfig};
use serde::{Deserialize, Serialize};

const COMPARE_SECTION: &str = "compare";
const METADATA_SECTION: &str = "metadata";

/// Settings of the `compare` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub methods: Vec<Method>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Seed of the first trial; the run seed when absent.
    pub base_seed: Option<u64>,
}

fn default_trials() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentFile {
    pub train: TrainConfig,
    pub compare: Option<CompareSpec>,
}

pub fn parse_experiment(text: &str) -> Result<ExperimentFile> {
    let doc: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
    let mut flat = toml::Table::new();
    let mut compare = None;
    for (key, value) in doc {
        match (key.as_str(), value) {
            (COMPARE_SECTION, toml::Value::Table(t)) => {
                compare = Some(
                    toml::Value::Table(t)
                        .try_into::<CompareSpec>()
                        .context("invalid [compare] section")?,
                );
            }
            (METADATA_SECTION, toml::Value::Table(_)) => {}
            (section, toml::Value::Table(t)) => {
                for (k, v) in t {
                    if flat.insert(k.clone(), v).is_some() {
                        bail!("key `{k}` is set twice (again in [{section}])");
                    }
                }
            }
            (k, v) => {
                if flat.insert(k.to_string(), v).is_some() {
                    bail!("key `{k}` is set twice");
                }
            }
        }
    }
    let train: TrainConfig = toml::Value::Table(flat)
        .try_into()
        .context("invalid configuration")?;
    train.validate().context("invalid configuration")?;
    if let Some(c) = &compare {
        if c.methods.is_empty() {
            bail!("[compare] needs at least one method");
        }
        if c.trials == 0 {
            bail!("[compare] trials must be at least 1");
        }
    }
    Ok(ExperimentFile { train, compare })
}

pub fn load_experiment(path: &Path) -> Result<ExperimentFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_experiment(&text).with_context(|| format!("in {}", path.display()))
}

/// The effective configuration as a TOML table, defaults included.
pub fn config_table(config: &TrainConfig) -> Result<toml::Table> {
    match toml::Value::try_from(config)? {
        toml::Value::Table(t) => Ok(t),
        _ => bail!("configuration did not serialize to a table"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use selectnet::ProblemName;

    #[test]
    fn sections_are_flattened() {
        let f = parse_experiment(
            "[problem]\nproblem = \"poisson2d\"\nd = 2\n[model]\nm = 7\nL = 2\n[training]\nN1 = 30\nN2 = 20\nn = 5\n",
        )
        .unwrap();
        assert_eq!(f.train.problem, ProblemName::Poisson2d);
        assert_eq!((f.train.m, f.train.depth), (7, 2));
        assert_eq!((f.train.interior_points, f.train.boundary_points, f.train.n), (30, 20, 5));
        assert!(f.compare.is_none());
    }

    #[test]
    fn duplicates_and_unknown_keys_are_rejected() {
        assert!(parse_experiment("[a]\nm = 3\n[b]\nm = 4\n").is_err());
        assert!(parse_experiment("[a]\nwidth = 3\n").is_err());
        assert!(parse_experiment("problem = \"heat\"\n").is_err());
    }

    #[test]
    fn compare_section() {
        let f = parse_experiment("[compare]\nmethods = [\"basic\", \"selectnet\"]\ntrials = 3\n").unwrap();
        let c = f.compare.unwrap();
        assert_eq!(c.methods, vec![Method::Basic, Method::Selectnet]);
        assert_eq!(c.trials, 3);
        assert!(parse_experiment("[compare]\nmethods = []\n").is_err());
    }

    #[test]
    fn effective_config_round_trips() {
        let mut c = TrainConfig::default();
        c.schedule_iterations = Some(17);
        c.tau_s = 0.1 + 0.2;
        let text = toml::to_string(&config_table(&c).unwrap()).unwrap();
        let back = parse_experiment(&format!("[config]\n{text}")).unwrap();
        assert_eq!(back.train, c);
    }
}

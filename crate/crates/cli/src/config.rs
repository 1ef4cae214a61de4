//! Pipeline configuration: one TOML file plus command-line overrides.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use efclass::learners::{ForestParams, ModelFamily, ModelSpec};
use efclass::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

fn default_k() -> usize {
    10
}

fn default_models() -> Vec<ModelSpec> {
    ModelFamily::ALL.iter().map(|&f| ModelSpec::default_for(f)).collect()
}

/// Recursive feature elimination settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfeConfig {
    /// Strictly decreasing subset sizes.
    pub sizes: Vec<usize>,
    #[serde(default = "RfeConfig::default_k")]
    pub k: usize,
    #[serde(default = "RfeConfig::default_forest")]
    pub forest: ForestParams,
    /// Evaluate the models on the selected subset rather than every feature.
    #[serde(default = "RfeConfig::default_apply")]
    pub apply: bool,
}

impl RfeConfig {
    fn default_k() -> usize {
        5
    }

    fn default_forest() -> ForestParams {
        ForestParams {
            n_trees: 100,
            ..ForestParams::default()
        }
    }

    fn default_apply() -> bool {
        true
    }

    /// Every size from `p` down to 1.
    pub fn full_grid(p: usize) -> Self {
        RfeConfig {
            sizes: (1..=p).rev().collect(),
            k: Self::default_k(),
            forest: Self::default_forest(),
            apply: Self::default_apply(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset: PathBuf,
    /// Built-in schema name (`step1`, `step2`) or a schema file path.
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_models")]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub rfe: Option<RfeConfig>,
    pub output_dir: PathBuf,
}

/// Values given on the command line; each one replaces the file value.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub dataset: Option<PathBuf>,
    pub schema: Option<String>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    /// Families to enable. Hyperparameters come from the file when it lists
    /// the family, defaults otherwise.
    pub models: Option<Vec<ModelFamily>>,
    pub rfe_sizes: Option<Vec<usize>>,
    pub output_dir: Option<PathBuf>,
}

/// File contents before overrides; every field may be absent.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    dataset: Option<PathBuf>,
    schema: Option<String>,
    seed: Option<u64>,
    k: Option<usize>,
    models: Option<Vec<ModelSpec>>,
    rfe: Option<RfeConfig>,
    output_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a configuration from an optional file and overrides. Relative
    /// paths in the file are taken relative to the file's directory.
    pub fn resolve(file: Option<&Path>, overrides: &ConfigOverrides) -> Result<Self> {
        let mut partial = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let mut p: PartialConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
                let base = path.parent().unwrap_or(Path::new(""));
                p.dataset = p.dataset.map(|d| base.join(d));
                p.output_dir = p.output_dir.map(|d| base.join(d));
                p
            }
            None => PartialConfig::default(),
        };

        if let Some(families) = &overrides.models {
            let listed = partial.models.take().unwrap_or_default();
            partial.models = Some(
                families
                    .iter()
                    .map(|&f| {
                        listed
                            .iter()
                            .find(|m| m.family() == f)
                            .copied()
                            .unwrap_or_else(|| ModelSpec::default_for(f))
                    })
                    .collect(),
            );
        }
        if let Some(sizes) = &overrides.rfe_sizes {
            let mut rfe = partial.rfe.take().unwrap_or_else(|| RfeConfig::full_grid(1));
            rfe.sizes = sizes.clone();
            partial.rfe = Some(rfe);
        }

        let cfg = PipelineConfig {
            dataset: overrides
                .dataset
                .clone()
                .or(partial.dataset)
                .ok_or_else(|| Error::Config("no dataset given".into()))?,
            schema: overrides
                .schema
                .clone()
                .or(partial.schema)
                .ok_or_else(|| Error::Config("no schema given".into()))?,
            seed: overrides.seed.or(partial.seed).unwrap_or(0),
            k: overrides.k.or(partial.k).unwrap_or_else(default_k),
            models: partial.models.unwrap_or_else(default_models),
            rfe: partial.rfe,
            output_dir: overrides
                .output_dir
                .clone()
                .or(partial.output_dir)
                .ok_or_else(|| Error::Config("no output directory given".into()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models enabled".into()));
        }
        let mut seen = HashSet::new();
        for m in &self.models {
            if !seen.insert(m.family()) {
                return Err(Error::Config(format!("model `{}` listed twice", m.name())));
            }
        }
        if let Some(rfe) = &self.rfe {
            if rfe.k < 2 {
                return Err(Error::Config(format!("rfe.k must be at least 2, got {}", rfe.k)));
            }
            if rfe.sizes.is_empty() {
                return Err(Error::Config("rfe.sizes is empty".into()));
            }
        }
        if self.output_dir.exists() && !self.output_dir.is_dir() {
            return Err(Error::Config(format!("{} is not a directory", self.output_dir.display())));
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 over everything that affects the results. The output
    /// directory is left out: it says where results go, not what they are.
    pub fn hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.output_dir = PathBuf::new();
        let json = serde_json::to_vec(&hashed).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = r#"
dataset = "cohort.csv"
schema = "step1"
seed = 7
output_dir = "out"

[[models]]
family = "knn"
k = 7

[[models]]
family = "random_forest"
n_trees = 50
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = PipelineConfig::from_toml_str(FILE).unwrap();
        assert_eq!(cfg.k, 10);
        assert_eq!(cfg.models.len(), 2);
        assert!(cfg.rfe.is_none());
        let bare = "dataset = \"a.csv\"\nschema = \"step2\"\noutput_dir = \"o\"\n";
        let cfg = PipelineConfig::from_toml_str(bare).unwrap();
        assert_eq!(cfg.models.len(), 5);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, FILE).unwrap();
        let o = ConfigOverrides {
            seed: Some(99),
            k: Some(3),
            models: Some(vec![ModelFamily::Knn, ModelFamily::Svm]),
            output_dir: Some(PathBuf::from("elsewhere")),
            ..Default::default()
        };
        let cfg = PipelineConfig::resolve(Some(&path), &o).unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.output_dir, PathBuf::from("elsewhere"));
        assert_eq!(cfg.dataset, dir.path().join("cohort.csv"));
        assert_eq!(cfg.models.len(), 2);
        // File hyperparameters survive for families it lists.
        assert!(matches!(cfg.models[0], ModelSpec::Knn(p) if p.k == 7));
        assert_eq!(cfg.models[1], ModelSpec::default_for(ModelFamily::Svm));
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "dataset = \"a\"\nschema = \"step1\"\noutput_dir = \"o\"\nk = 1\n",
            "dataset = \"a\"\nschema = \"step1\"\noutput_dir = \"o\"\nmodels = []\n",
            "dataset = \"a\"\nschema = \"step1\"\noutput_dir = \"o\"\nunknown = 3\n",
            "dataset = \"a\"\nschema = \"step1\"\noutput_dir = \"o\"\n[[models]]\nfamily = \"svm\"\n[[models]]\nfamily = \"svm\"\n",
            "schema = \"step1\"\noutput_dir = \"o\"\n",
        ] {
            assert!(matches!(PipelineConfig::from_toml_str(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = PipelineConfig::from_toml_str(FILE).unwrap();
        let mut b = a.clone();
        b.output_dir = PathBuf::from("other");
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn toml_round_trip() {
        let mut a = PipelineConfig::from_toml_str(FILE).unwrap();
        a.rfe = Some(RfeConfig::full_grid(4));
        let back = PipelineConfig::from_toml_str(&a.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, a);
    }
}

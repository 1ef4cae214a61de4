//! Seedable synthetic cohorts with a planted latent-severity structure.
//!
//! Features are drawn independently from per-column marginals. A latent score
//! `sum_f w_f * z_f + noise` (with `z_f` the standardized feature) is cut at
//! two thresholds into the three ordered ejection-fraction bands.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::tabular::{ColumnKind, Dataset, FeatureSchema, OrdinalLabel, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Marginal {
    Uniform { low: f64, high: f64 },
    /// Right-skewed values on `[low, high)`: most mass near the low end with a
    /// long upper tail, like enzyme and timing measurements.
    LognormalLike { low: f64, high: f64 },
    Bernoulli { p: f64 },
}

impl Marginal {
    fn validate(&self, column: &str) -> Result<()> {
        let ok = match *self {
            Marginal::Uniform { low, high } | Marginal::LognormalLike { low, high } => {
                low.is_finite() && high.is_finite() && low < high
            }
            Marginal::Bernoulli { p } => p > 0.0 && p < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("degenerate marginal for `{column}`: {self:?}")))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => rng.random_range(low..high),
            Marginal::LognormalLike { low, high } => {
                let z: f64 = rng.sample(StandardNormal);
                let l = z.exp();
                low + (high - low) * l / (l + 3.0)
            }
            Marginal::Bernoulli { p } => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn kind(&self) -> ColumnKind {
        match self {
            Marginal::Bernoulli { .. } => ColumnKind::Binary,
            _ => ColumnKind::Continuous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaChoice {
    Step1,
    Step2,
}

impl SchemaChoice {
    pub fn schema(self) -> FeatureSchema {
        match self {
            SchemaChoice::Step1 => FeatureSchema::step1(),
            SchemaChoice::Step2 => FeatureSchema::step2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortConfig {
    pub n_patients: usize,
    pub schema: SchemaChoice,
    /// One marginal per schema column, in schema order.
    pub marginals: Vec<Marginal>,
    /// Signed weight of each standardized feature on the latent severity.
    pub effect_weights: Vec<f64>,
    /// Latent cut points; below the first is class 0, at or above the second
    /// is class 2.
    pub thresholds: [f64; 2],
    pub noise_sd: f64,
    pub seed: u64,
}

fn default_marginals(schema: SchemaChoice) -> Vec<Marginal> {
    use Marginal::*;
    match schema {
        SchemaChoice::Step1 => vec![
            Uniform { low: 30.0, high: 90.0 },          // Age
            Bernoulli { p: 0.6 },                       // LAD
            LognormalLike { low: 4.0, high: 25.0 },     // W.B.C
            Uniform { low: 3.5, high: 6.0 },            // R.B.C
            LognormalLike { low: 7.0, high: 60.0 },     // B.U.N
            Uniform { low: 9.0, high: 17.0 },           // HB
            LognormalLike { low: 50.0, high: 5000.0 },  // CPK
            LognormalLike { low: 5.0, high: 400.0 },    // CPK-MB
            Uniform { low: 50.0, high: 130.0 },         // PR
            LognormalLike { low: 70.0, high: 400.0 },   // BS
            LognormalLike { low: 10.0, high: 300.0 },   // TimeX12
            LognormalLike { low: 60.0, high: 900.0 },   // TimeX1234
            LognormalLike { low: 20.0, high: 300.0 },   // TimeX23
            Bernoulli { p: 0.7 },                       // HeartNormSound
        ],
        SchemaChoice::Step2 => vec![
            LognormalLike { low: 10.0, high: 300.0 },   // TimeX12
            LognormalLike { low: 60.0, high: 900.0 },   // TimeX1234
            LognormalLike { low: 20.0, high: 300.0 },   // TimeX23
            LognormalLike { low: 40.0, high: 700.0 },   // TimeX123
            Bernoulli { p: 0.7 },                       // HeartNormSound
            LognormalLike { low: 5.0, high: 240.0 },    // FmcOnset
        ],
    }
}

/// Standard normal quantiles at 0.40 and 0.75, giving roughly 40/35/25
/// class proportions when the latent score is close to Gaussian.
const Q40: f64 = -0.253_347_103_135_799_7;
const Q75: f64 = 0.674_489_750_196_081_7;

impl CohortConfig {
    /// Two informative features among the schema columns: CPK-MB and PR for
    /// step 1, TimeX1234 and TimeX12 for step 2.
    pub fn default_planted(schema: SchemaChoice, n_patients: usize, seed: u64) -> Self {
        let s = schema.schema();
        let mut effect_weights = vec![0.0; s.width()];
        let planted: [(&str, f64); 2] = match schema {
            SchemaChoice::Step1 => [("CPK-MB", 1.0), ("PR", 0.9)],
            SchemaChoice::Step2 => [("TimeX1234", 1.0), ("TimeX12", 0.9)],
        };
        for (name, w) in planted {
            effect_weights[s.index_of(name).expect("planted column")] = w;
        }
        let noise_sd = 0.5;
        let sd = (effect_weights.iter().map(|w| w * w).sum::<f64>() + noise_sd * noise_sd).sqrt();
        CohortConfig {
            n_patients,
            schema,
            marginals: default_marginals(schema),
            effect_weights,
            thresholds: [Q40 * sd, Q75 * sd],
            noise_sd,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let schema = self.schema.schema();
        if self.n_patients < 9 {
            return Err(Error::Config(format!("n_patients must be at least 9, got {}", self.n_patients)));
        }
        if self.marginals.len() != schema.width() || self.effect_weights.len() != schema.width() {
            return Err(Error::Config(format!(
                "expected {} marginals and weights, got {} and {}",
                schema.width(),
                self.marginals.len(),
                self.effect_weights.len()
            )));
        }
        for (m, col) in self.marginals.iter().zip(schema.columns()) {
            m.validate(&col.name)?;
            if m.kind() != col.kind {
                return Err(Error::Config(format!("marginal for `{}` does not match its column kind", col.name)));
            }
        }
        if !self.effect_weights.iter().all(|w| w.is_finite()) {
            return Err(Error::Config("effect weights must be finite".into()));
        }
        let [t1, t2] = self.thresholds;
        if t1.is_nan() || t2.is_nan() || !(t1 < t2) {
            return Err(Error::Config(format!("thresholds must be ordered, got {:?}", self.thresholds)));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::Config("noise_sd must be finite and non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeight {
    pub feature: String,
    pub weight: f64,
}

/// What the generator planted, written beside the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeTruth {
    pub schema: String,
    pub weights: Vec<FeatureWeight>,
    pub informative: Vec<String>,
    pub thresholds: [f64; 2],
    pub noise_sd: f64,
    pub class_counts: [usize; N_CLASSES],
    pub seed: u64,
}

/// Draws a cohort from `cfg`. Deterministic for a given seed.
pub fn generate_cohort(cfg: &CohortConfig) -> Result<(Dataset, GenerativeTruth)> {
    cfg.validate()?;
    let schema = cfg.schema.schema();
    let n = cfg.n_patients;
    let p = schema.width();
    let mut rng = rng::substream(cfg.seed, "cohort", 0);

    let mut rows = vec![vec![0.0; p]; n];
    for (j, m) in cfg.marginals.iter().enumerate() {
        for row in rows.iter_mut() {
            row[j] = m.sample(&mut rng);
        }
    }

    let mut latent = vec![0.0; n];
    for (j, &w) in cfg.effect_weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        for (l, v) in latent.iter_mut().zip(&col) {
            if sd > 0.0 {
                *l += w * (v - mean) / sd;
            }
        }
    }
    if cfg.noise_sd > 0.0 {
        for l in latent.iter_mut() {
            let e: f64 = rng.sample(StandardNormal);
            *l += cfg.noise_sd * e;
        }
    }

    let [t1, t2] = cfg.thresholds;
    let labels: Vec<OrdinalLabel> = latent
        .iter()
        .map(|&l| {
            let c = if l < t1 {
                0
            } else if l < t2 {
                1
            } else {
                2
            };
            OrdinalLabel::new(c).expect("class")
        })
        .collect();

    let d = Dataset::new(schema.clone(), rows, labels)?;
    let names = schema.feature_names();
    let truth = GenerativeTruth {
        schema: schema.name().to_string(),
        weights: names
            .iter()
            .zip(&cfg.effect_weights)
            .map(|(f, &w)| FeatureWeight {
                feature: f.clone(),
                weight: w,
            })
            .collect(),
        informative: names
            .iter()
            .zip(&cfg.effect_weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(f, _)| f.clone())
            .collect(),
        thresholds: cfg.thresholds,
        noise_sd: cfg.noise_sd,
        class_counts: d.class_counts(),
        seed: cfg.seed,
    };
    Ok((d, truth))
}

/// Blanks each feature cell independently with probability `rate`.
pub fn inject_missing(d: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Parameter(format!("missing rate must lie in [0, 1), got {rate}")));
    }
    let mut rng = rng::substream(seed, "missing", 0);
    let mut rows = d.rows().to_vec();
    let mut mask = d.missing_mask().to_vec();
    for (row, m) in rows.iter_mut().zip(mask.iter_mut()) {
        for (v, hole) in row.iter_mut().zip(m.iter_mut()) {
            if rng.random::<f64>() < rate {
                *v = f64::NAN;
                *hole = true;
            }
        }
    }
    Dataset::with_missing(d.schema().clone(), rows, d.labels().to_vec(), mask)
}

/// Path of the truth file written next to `dataset_path`.
pub fn truth_path(dataset_path: &Path) -> PathBuf {
    dataset_path.with_extension("truth.json")
}

/// Writes the cohort CSV and its truth JSON; returns the truth path.
pub fn write_cohort(d: &Dataset, truth: &GenerativeTruth, path: &Path) -> Result<PathBuf> {
    d.save_csv(path)?;
    let tp = truth_path(path);
    crate::io::write_atomic(&tp, serde_json::to_string_pretty(truth)?.as_bytes())?;
    Ok(tp)
}

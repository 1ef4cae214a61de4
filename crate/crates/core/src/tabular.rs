//! Tabular data: schemas, the in-memory dataset, CSV ingestion and the
//! preparation steps applied before modelling (imputation, class balancing,
//! standardization and stratified fold planning).

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const N_CLASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn continuous(name: &str) -> Self {
        Column {
            name: name.to_string(),
            kind: ColumnKind::Continuous,
        }
    }

    pub fn binary(name: &str) -> Self {
        Column {
            name: name.to_string(),
            kind: ColumnKind::Binary,
        }
    }
}

/// Ordered feature columns plus the name of the ordinal target column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSchema {
    name: String,
    columns: Vec<Column>,
    target: String,
}

#[derive(Deserialize)]
struct SchemaFile {
    #[serde(default)]
    name: Option<String>,
    target: String,
    columns: Vec<Column>,
}

impl<'de> Deserialize<'de> for FeatureSchema {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = SchemaFile::deserialize(de)?;
        FeatureSchema::new(raw.name.as_deref().unwrap_or("custom"), raw.columns, &raw.target)
            .map_err(serde::de::Error::custom)
    }
}

impl FeatureSchema {
    pub fn new(name: &str, columns: Vec<Column>, target: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            if c.name.is_empty() {
                return Err(Error::Schema {
                    column: String::new(),
                    message: "empty column name".into(),
                });
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema {
                    column: c.name.clone(),
                    message: "duplicate column name".into(),
                });
            }
        }
        if seen.contains(target) {
            return Err(Error::Schema {
                column: target.to_string(),
                message: "target listed among feature columns".into(),
            });
        }
        Ok(FeatureSchema {
            name: name.to_string(),
            columns,
            target: target.to_string(),
        })
    }

    /// The fourteen step-one inputs: demographics, labs, examination and
    /// emergency timing.
    pub fn step1() -> Self {
        use Column as C;
        let columns = vec![
            C::continuous("Age"),
            C::binary("LAD"),
            C::continuous("W.B.C"),
            C::continuous("R.B.C"),
            C::continuous("B.U.N"),
            C::continuous("HB"),
            C::continuous("CPK"),
            C::continuous("CPK-MB"),
            C::continuous("PR"),
            C::continuous("BS"),
            C::continuous("TimeX12"),
            C::continuous("TimeX1234"),
            C::continuous("TimeX23"),
            C::binary("HeartNormSound"),
        ];
        FeatureSchema::new("step1", columns, "EF").expect("built-in schema is valid")
    }

    /// The six step-two operational inputs.
    pub fn step2() -> Self {
        use Column as C;
        let columns = vec![
            C::continuous("TimeX12"),
            C::continuous("TimeX1234"),
            C::continuous("TimeX23"),
            C::continuous("TimeX123"),
            C::binary("HeartNormSound"),
            C::continuous("FmcOnset"),
        ];
        FeatureSchema::new("step2", columns, "EF").expect("built-in schema is valid")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "step1" => Some(Self::step1()),
            "step2" => Some(Self::step2()),
            _ => None,
        }
    }

    /// Parses a declarative TOML schema file.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Resolves a built-in name (`step1`, `step2`) or a path to a schema file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match Self::builtin(name_or_path) {
            Some(s) => Ok(s),
            None => {
                let p = Path::new(name_or_path);
                if p.exists() {
                    Self::load(p)
                } else {
                    Err(Error::Config(format!("unknown schema `{name_or_path}`")))
                }
            }
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Schema restricted to the given column indices, in that order.
    pub fn project(&self, indices: &[usize]) -> Result<Self> {
        let columns = indices
            .iter()
            .map(|&i| {
                self.columns.get(i).cloned().ok_or(Error::Shape {
                    expected: self.width(),
                    got: i,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FeatureSchema::new(&self.name, columns, &self.target)
    }
}

/// Ejection-fraction band. Ordered: 0 = Normal (50-70%), 1 = Below Normal
/// (36-49%), 2 = Low (<35%).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct OrdinalLabel(u8);

impl OrdinalLabel {
    pub const NORMAL: OrdinalLabel = OrdinalLabel(0);
    pub const BELOW_NORMAL: OrdinalLabel = OrdinalLabel(1);
    pub const LOW: OrdinalLabel = OrdinalLabel(2);
    pub const ALL: [OrdinalLabel; N_CLASSES] = [Self::NORMAL, Self::BELOW_NORMAL, Self::LOW];

    pub fn new(index: usize) -> Option<Self> {
        (index < N_CLASSES).then_some(OrdinalLabel(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    pub fn display_name(self) -> &'static str {
        match self.0 {
            0 => "Normal",
            1 => "Below normal",
            _ => "Low",
        }
    }

    /// Majority class of a vote vector; ties go to the lowest class index.
    pub fn argmax(votes: &[usize; N_CLASSES]) -> Self {
        let mut best = 0;
        for c in 1..N_CLASSES {
            if votes[c] > votes[best] {
                best = c;
            }
        }
        OrdinalLabel(best as u8)
    }
}

impl TryFrom<u8> for OrdinalLabel {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        OrdinalLabel::new(v as usize).ok_or_else(|| format!("class index {v} out of range"))
    }
}

impl From<OrdinalLabel> for u8 {
    fn from(l: OrdinalLabel) -> u8 {
        l.0
    }
}

impl fmt::Display for OrdinalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Feature matrix, labels and missing-value mask under one schema.
///
/// Missing cells hold `NaN` in `rows` and `true` in the mask.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: FeatureSchema,
    rows: Vec<Vec<f64>>,
    labels: Vec<OrdinalLabel>,
    missing: Vec<Vec<bool>>,
}

impl PartialEq for Dataset {
    /// Missing cells compare equal regardless of their placeholder value.
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema
            && self.labels == other.labels
            && self.missing == other.missing
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y || (x.is_nan() && y.is_nan()))
            })
    }
}

impl Dataset {
    /// Builds a fully observed dataset.
    pub fn new(schema: FeatureSchema, rows: Vec<Vec<f64>>, labels: Vec<OrdinalLabel>) -> Result<Self> {
        let missing = rows.iter().map(|r| vec![false; r.len()]).collect();
        Self::with_missing(schema, rows, labels, missing)
    }

    pub fn with_missing(
        schema: FeatureSchema,
        mut rows: Vec<Vec<f64>>,
        labels: Vec<OrdinalLabel>,
        missing: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Shape {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        if rows.len() != missing.len() {
            return Err(Error::Shape {
                expected: rows.len(),
                got: missing.len(),
            });
        }
        let width = schema.width();
        for (row, mask) in rows.iter_mut().zip(&missing) {
            if row.len() != width {
                return Err(Error::Shape {
                    expected: width,
                    got: row.len(),
                });
            }
            if mask.len() != width {
                return Err(Error::Shape {
                    expected: width,
                    got: mask.len(),
                });
            }
            for (v, &m) in row.iter_mut().zip(mask) {
                if m {
                    *v = f64::NAN;
                } else if !v.is_finite() {
                    return Err(Error::Domain("observed feature values must be finite".into()));
                }
            }
        }
        Ok(Dataset {
            schema,
            rows,
            labels,
            missing,
        })
    }

    /// Convenience constructor over anonymous continuous features `x0..`.
    pub fn from_features(rows: Vec<Vec<f64>>, labels: Vec<OrdinalLabel>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        let columns = (0..width).map(|i| Column::continuous(&format!("x{i}"))).collect();
        let schema = FeatureSchema::new("anonymous", columns, "y")?;
        Self::new(schema, rows, labels)
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[OrdinalLabel] {
        &self.labels
    }

    pub fn missing_mask(&self) -> &[Vec<bool>] {
        &self.missing
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.width()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().flatten().any(|&m| m)
    }

    pub fn count_missing(&self) -> usize {
        self.missing.iter().flatten().filter(|&&m| m).count()
    }

    pub fn class_counts(&self) -> [usize; N_CLASSES] {
        let mut counts = [0; N_CLASSES];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows at `indices` (repeats allowed), in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            missing: indices.iter().map(|&i| self.missing[i].clone()).collect(),
        }
    }

    /// Columns at `indices`, in that order.
    pub fn select_features(&self, indices: &[usize]) -> Result<Dataset> {
        let schema = self.schema.project(indices)?;
        let pick = |r: &Vec<f64>| indices.iter().map(|&j| r[j]).collect::<Vec<_>>();
        Ok(Dataset {
            schema,
            rows: self.rows.iter().map(pick).collect(),
            labels: self.labels.clone(),
            missing: self
                .missing
                .iter()
                .map(|m| indices.iter().map(|&j| m[j]).collect())
                .collect(),
        })
    }

    pub fn select_features_by_name<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let indices = names
            .iter()
            .map(|n| {
                self.schema.index_of(n.as_ref()).ok_or_else(|| Error::Schema {
                    column: n.as_ref().to_string(),
                    message: "not in dataset".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.select_features(&indices)
    }

    pub fn with_labels(&self, labels: Vec<OrdinalLabel>) -> Result<Dataset> {
        if labels.len() != self.labels.len() {
            return Err(Error::Shape {
                expected: self.labels.len(),
                got: labels.len(),
            });
        }
        let mut d = self.clone();
        d.labels = labels;
        Ok(d)
    }

    /// Writes the dataset as comma-separated text with a header row.
    /// Missing cells are written as empty strings.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.schema.feature_names();
        header.push(self.schema.target.clone());
        w.write_record(&header)?;
        for ((row, mask), label) in self.rows.iter().zip(&self.missing).zip(&self.labels) {
            let mut record: Vec<String> = row
                .iter()
                .zip(mask)
                .map(|(v, &m)| if m { String::new() } else { format_number(*v) })
                .collect();
            record.push(label.to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        crate::io::write_atomic(path, &buf)
    }
}

/// Decimal text for a finite value; shortest form that parses back exactly.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

/// Reads a CSV file against `schema`.
pub fn load_dataset(path: &Path, schema: &FeatureSchema) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_dataset(file, schema)
}

/// Reads comma-separated text whose header lists every schema column and the
/// target (in any order). Empty cells are recorded as missing.
pub fn read_dataset<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::Schema {
                column: h.clone(),
                message: "duplicate header column".into(),
            });
        }
        if h != schema.target() && schema.index_of(h).is_none() {
            return Err(Error::Schema {
                column: h.clone(),
                message: "unexpected column not in schema".into(),
            });
        }
    }
    let position = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Schema {
            column: name.to_string(),
            message: "missing from header".into(),
        })
    };
    let feature_pos = schema
        .columns()
        .iter()
        .map(|c| position(&c.name))
        .collect::<Result<Vec<_>>>()?;
    let target_pos = position(schema.target())?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut missing = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = i + 1;
        if record.len() != header.len() {
            return Err(Error::Shape {
                expected: header.len(),
                got: record.len(),
            });
        }
        let mut row = Vec::with_capacity(schema.width());
        let mut mask = Vec::with_capacity(schema.width());
        for (col, &pos) in schema.columns().iter().zip(&feature_pos) {
            let cell = &record[pos];
            if cell.is_empty() {
                row.push(f64::NAN);
                mask.push(true);
                continue;
            }
            let value = parse_cell(cell, col.kind).ok_or_else(|| Error::Parse {
                row: row_no,
                column: col.name.clone(),
                value: cell.to_string(),
            })?;
            row.push(value);
            mask.push(false);
        }
        let raw = &record[target_pos];
        let label = raw
            .parse::<usize>()
            .ok()
            .and_then(OrdinalLabel::new)
            .ok_or_else(|| Error::Label {
                row: row_no,
                value: raw.to_string(),
            })?;
        rows.push(row);
        labels.push(label);
        missing.push(mask);
    }
    Dataset::with_missing(schema.clone(), rows, labels, missing)
}

fn parse_cell(cell: &str, kind: ColumnKind) -> Option<f64> {
    match kind {
        ColumnKind::Continuous => cell.parse::<f64>().ok().filter(|v| v.is_finite()),
        ColumnKind::Binary => match cell.to_ascii_lowercase().as_str() {
            "yes" | "value1" => Some(1.0),
            "no" | "value0" => Some(0.0),
            other => other.parse::<f64>().ok().filter(|&v| v == 0.0 || v == 1.0),
        },
    }
}

/// Fills holes with the column median (continuous) or mode (binary, ties to 0).
pub fn impute_missing(d: &Dataset) -> Result<Dataset> {
    let mut out = d.clone();
    if !d.has_missing() {
        return Ok(out);
    }
    for (j, col) in d.schema.columns().iter().enumerate() {
        let observed: Vec<f64> = d
            .rows
            .iter()
            .zip(&d.missing)
            .filter(|(_, m)| !m[j])
            .map(|(r, _)| r[j])
            .collect();
        if observed.len() == d.n_rows() {
            continue;
        }
        if observed.is_empty() {
            return Err(Error::Imputation {
                column: col.name.clone(),
            });
        }
        let fill = match col.kind {
            ColumnKind::Continuous => median(observed),
            ColumnKind::Binary => {
                let ones = observed.iter().filter(|&&v| v == 1.0).count();
                if ones > observed.len() - ones {
                    1.0
                } else {
                    0.0
                }
            }
        };
        for (row, mask) in out.rows.iter_mut().zip(out.missing.iter_mut()) {
            if mask[j] {
                row[j] = fill;
                mask[j] = false;
            }
        }
    }
    Ok(out)
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Pads every minority class to the majority count by resampling its own
/// rows with replacement. Original rows come first, in their original order.
pub fn upsample_balance(d: &Dataset, seed: u64) -> Result<Dataset> {
    let counts = d.class_counts();
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Balance(format!("class {c} has no rows")));
    }
    let target = *counts.iter().max().expect("three classes");
    let mut indices: Vec<usize> = (0..d.n_rows()).collect();
    for label in OrdinalLabel::ALL {
        let members: Vec<usize> = (0..d.n_rows()).filter(|&i| d.labels[i] == label).collect();
        let mut rng = rng::substream(seed, "balance", label.index() as u64);
        for _ in members.len()..target {
            indices.push(members[rng.random_range(0..members.len())]);
        }
    }
    Ok(d.select_rows(&indices))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub mean: f64,
    pub std_dev: f64,
}

/// Per-column centring and scaling learned on a training split. Binary
/// columns carry `None` and pass through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub columns: Vec<Option<ColumnScale>>,
}

impl ScalingParams {
    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.columns.len() {
            return Err(Error::Shape {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.columns)
            .map(|(&v, s)| match s {
                Some(s) => (v - s.mean) / s.std_dev,
                None => v,
            })
            .collect())
    }

    pub fn apply_dataset(&self, d: &Dataset) -> Result<Dataset> {
        let rows = d.rows.iter().map(|r| self.apply(r)).collect::<Result<Vec<_>>>()?;
        Dataset::with_missing(d.schema.clone(), rows, d.labels.clone(), d.missing.clone())
    }
}

/// Centres continuous columns to zero mean and scales them to unit sample
/// standard deviation (n - 1 denominator).
pub fn standardize(d: &Dataset) -> Result<(Dataset, ScalingParams)> {
    if d.has_missing() {
        return Err(Error::Parameter("standardize requires an imputed dataset".into()));
    }
    let n = d.n_rows() as f64;
    let mut columns = Vec::with_capacity(d.n_features());
    for (j, col) in d.schema.columns().iter().enumerate() {
        if col.kind == ColumnKind::Binary {
            columns.push(None);
            continue;
        }
        let values = d.column(j);
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std_dev = var.sqrt();
        if !(std_dev > 0.0) || !std_dev.is_finite() {
            return Err(Error::Scaling {
                column: col.name.clone(),
            });
        }
        columns.push(Some(ColumnScale { mean, std_dev }));
    }
    let params = ScalingParams { columns };
    Ok((params.apply_dataset(d)?, params))
}

/// Assignment of every row to one of `k` test folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    pub fn from_assignments(k: usize, assignments: Vec<usize>, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Fold(format!("k must be at least 2, got {k}")));
        }
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            if a >= k {
                return Err(Error::Fold(format!("fold index {a} out of range for k = {k}")));
            }
            sizes[a] += 1;
        }
        if let Some(f) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Fold(format!("fold {f} is empty")));
        }
        Ok(FoldPlan { k, assignments, seed })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn n_rows(&self) -> usize {
        self.assignments.len()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Seeded stratified k-fold plan.
///
/// Rows of each class are shuffled and dealt round-robin; the dealing
/// position carries over from one class to the next, so fold sizes differ by
/// at most one as well as per-class counts. Absent classes are skipped.
pub fn stratified_folds(d: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Fold(format!("k must be at least 2, got {k}")));
    }
    let counts = d.class_counts();
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 && n < k {
            return Err(Error::Fold(format!("class {c} has {n} rows, fewer than k = {k}")));
        }
    }
    if d.is_empty() {
        return Err(Error::Fold("dataset is empty".into()));
    }
    let mut rng = rng::substream(seed, "folds", 0);
    let mut assignments = vec![0; d.n_rows()];
    let mut position = 0;
    for label in OrdinalLabel::ALL {
        let mut members: Vec<usize> = (0..d.n_rows()).filter(|&i| d.labels[i] == label).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = position % k;
            position += 1;
        }
    }
    FoldPlan::from_assignments(k, assignments, seed)
}

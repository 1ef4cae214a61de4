use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Dataset, OrdinalLabel, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// Stored (already standardized) training rows for nearest-neighbour voting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    rows: Vec<Vec<f64>>,
    labels: Vec<OrdinalLabel>,
    k: usize,
}

pub fn train_knn(d: &Dataset, k: usize) -> Result<KnnModel> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::Parameter(format!("k must be odd and positive, got {k}")));
    }
    if k > d.n_rows() {
        return Err(Error::Parameter(format!(
            "k = {k} exceeds training size {}",
            d.n_rows()
        )));
    }
    Ok(KnnModel {
        rows: d.rows().to_vec(),
        labels: d.labels().to_vec(),
        k,
    })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_features(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Indices of the `k` nearest training rows; equal distances are broken
    /// by the lower row index.
    pub fn neighbours(&self, row: &[f64]) -> Result<Vec<usize>> {
        if row.len() != self.n_features() {
            return Err(Error::Shape {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        let mut order: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (squared_distance(r, row), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(order.into_iter().take(self.k).map(|(_, i)| i).collect())
    }

    pub fn predict(&self, row: &[f64]) -> Result<OrdinalLabel> {
        let mut votes = [0usize; N_CLASSES];
        for i in self.neighbours(row)? {
            votes[self.labels[i].index()] += 1;
        }
        Ok(OrdinalLabel::argmax(&votes))
    }
}

pub fn predict_knn(m: &KnnModel, row: &[f64]) -> Result<OrdinalLabel> {
    m.predict(row)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[usize]) -> Vec<OrdinalLabel> {
        v.iter().map(|&c| OrdinalLabel::new(c).unwrap()).collect()
    }

    #[test]
    fn exact_match_with_k1() {
        let d = Dataset::from_features(vec![vec![0.0, 1.0], vec![3.0, 3.0], vec![5.0, -1.0]], labels(&[2, 1, 0]))
            .unwrap();
        let m = train_knn(&d, 1).unwrap();
        for (r, l) in d.rows().iter().zip(d.labels()) {
            assert_eq!(m.predict(r).unwrap(), *l);
        }
    }

    #[test]
    fn three_point_vote() {
        let d = Dataset::from_features(vec![vec![0.0], vec![0.1], vec![5.0]], labels(&[0, 0, 2])).unwrap();
        let m = train_knn(&d, 3).unwrap();
        assert_eq!(m.predict(&[0.05]).unwrap(), OrdinalLabel::NORMAL);
    }

    #[test]
    fn boundary_tie_prefers_lower_index() {
        let d = Dataset::from_features(vec![vec![-1.0], vec![1.0], vec![3.0]], labels(&[2, 1, 0])).unwrap();
        let m = train_knn(&d, 1).unwrap();
        assert_eq!(m.neighbours(&[0.0]).unwrap(), vec![0]);
        assert_eq!(m.predict(&[0.0]).unwrap(), OrdinalLabel::LOW);
    }

    #[test]
    fn parameter_errors() {
        let d = Dataset::from_features(vec![vec![0.0], vec![1.0], vec![2.0]], labels(&[0, 1, 2])).unwrap();
        assert!(matches!(train_knn(&d, 2), Err(Error::Parameter(_))));
        assert!(matches!(train_knn(&d, 5), Err(Error::Parameter(_))));
        assert!(matches!(train_knn(&d, 0), Err(Error::Parameter(_))));
    }
}

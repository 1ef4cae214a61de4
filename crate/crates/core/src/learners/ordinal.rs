//! Proportional-odds (cumulative logit) ordinal regression.
//!
//! `P(y <= j | x) = sigmoid(theta_j - beta . x)` for `j = 0, 1`, with class
//! probabilities as adjacent differences. Fitted by deterministic gradient
//! descent with backtracking; the cutpoints are parameterised as
//! `theta_2 = theta_1 + exp(s)` so their order can never flip.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Dataset, OrdinalLabel, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrdinalLogitParams {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for OrdinalLogitParams {
    fn default() -> Self {
        OrdinalLogitParams {
            max_iter: 2000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalLogitModel {
    coefficients: Vec<f64>,
    thresholds: [f64; 2],
}

/// Negative log-likelihood with its analytic gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct NllEval {
    pub value: f64,
    pub grad_coefficients: Vec<f64>,
    pub grad_thresholds: [f64; 2],
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl OrdinalLogitModel {
    pub fn new(coefficients: Vec<f64>, thresholds: [f64; 2]) -> Result<Self> {
        if !(thresholds[0] < thresholds[1]) || !thresholds.iter().all(|t| t.is_finite()) {
            return Err(Error::Invariant(format!(
                "cutpoints must be finite and strictly increasing, got {thresholds:?}"
            )));
        }
        Ok(OrdinalLogitModel {
            coefficients,
            thresholds,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn thresholds(&self) -> [f64; 2] {
        self.thresholds
    }

    fn linear(&self, row: &[f64]) -> f64 {
        self.coefficients.iter().zip(row).map(|(b, x)| b * x).sum()
    }

    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.coefficients.len() {
            return Err(Error::Shape {
                expected: self.coefficients.len(),
                got: row.len(),
            });
        }
        Ok(())
    }

    pub fn class_probabilities(&self, row: &[f64]) -> Result<[f64; N_CLASSES]> {
        self.check_width(row)?;
        let eta = self.linear(row);
        let c0 = sigmoid(self.thresholds[0] - eta);
        let c1 = sigmoid(self.thresholds[1] - eta);
        Ok([c0, (c1 - c0).max(0.0), 1.0 - c1])
    }

    /// Most probable class; ties go to the lowest class index.
    pub fn predict(&self, row: &[f64]) -> Result<OrdinalLabel> {
        let p = self.class_probabilities(row)?;
        let mut best = 0;
        for c in 1..N_CLASSES {
            if p[c] > p[best] {
                best = c;
            }
        }
        Ok(OrdinalLabel::new(best).expect("class index in range"))
    }
}

/// Negative log-likelihood of `d` under `model` and its gradient with respect
/// to the coefficients and both cutpoints.
pub fn olr_negative_log_likelihood(model: &OrdinalLogitModel, d: &Dataset) -> Result<NllEval> {
    let [t1, t2] = model.thresholds;
    if !(t1 < t2) {
        return Err(Error::Invariant("cutpoints out of order".into()));
    }
    let gap = t2 - t1;
    let log_gap_term = (-(-gap).exp_m1()).ln();
    let mut value = 0.0;
    let mut gb = vec![0.0; model.coefficients.len()];
    let mut gt = [0.0; 2];

    for (row, label) in d.rows().iter().zip(d.labels()) {
        model.check_width(row)?;
        let eta = model.linear(row);
        let a1 = t1 - eta;
        let a2 = t2 - eta;
        // d(nll)/d(a1), d(nll)/d(a2); eta enters both with a minus sign.
        let (g1, g2) = match label.index() {
            0 => {
                value += softplus(-a1);
                (-sigmoid(-a1), 0.0)
            }
            1 => {
                value += softplus(-a2) + softplus(a1) - log_gap_term;
                let denom = -(-gap).exp_m1();
                let d1 = (softplus(-a2) - softplus(-a1)).exp() / denom;
                let d2 = (softplus(a1) - softplus(a2)).exp() / denom;
                (d1, -d2)
            }
            _ => {
                value += softplus(a2);
                (0.0, sigmoid(a2))
            }
        };
        gt[0] += g1;
        gt[1] += g2;
        let g_eta = -(g1 + g2);
        for (g, x) in gb.iter_mut().zip(row) {
            *g += g_eta * x;
        }
    }
    if !value.is_finite() || !gt.iter().chain(&gb).all(|g| g.is_finite()) {
        return Err(Error::Numeric("non-finite likelihood or gradient".into()));
    }
    Ok(NllEval {
        value,
        grad_coefficients: gb,
        grad_thresholds: gt,
    })
}

struct Unconstrained {
    p: usize,
}

impl Unconstrained {
    fn model(&self, w: &[f64]) -> Result<OrdinalLogitModel> {
        let t1 = w[self.p];
        let t2 = t1 + w[self.p + 1].exp();
        if !(t1 < t2) || !t2.is_finite() {
            return Err(Error::Numeric("cutpoint gap collapsed".into()));
        }
        Ok(OrdinalLogitModel {
            coefficients: w[..self.p].to_vec(),
            thresholds: [t1, t2],
        })
    }

    fn eval(&self, w: &[f64], d: &Dataset) -> Result<(f64, Vec<f64>)> {
        let e = olr_negative_log_likelihood(&self.model(w)?, d)?;
        let mut g = e.grad_coefficients;
        g.push(e.grad_thresholds[0] + e.grad_thresholds[1]);
        g.push(e.grad_thresholds[1] * w[self.p + 1].exp());
        Ok((e.value, g))
    }
}

/// Fits the model from `beta = 0`, cutpoints `(-1, 1)`.
pub fn train_ordinal_logit(d: &Dataset, max_iter: usize, tol: f64) -> Result<OrdinalLogitModel> {
    if d.is_empty() {
        return Err(Error::Training("cannot fit on an empty dataset".into()));
    }
    let p = d.n_features();
    let space = Unconstrained { p };
    let mut w = vec![0.0; p + 2];
    w[p] = -1.0;
    w[p + 1] = 2f64.ln();

    let (mut f, mut g) = space.eval(&w, d)?;
    let mut step = 1.0;
    for _ in 0..max_iter {
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg.sqrt() < tol {
            break;
        }
        let mut accepted = None;
        while step > 1e-18 {
            let trial: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi).collect();
            if let Ok((ft, gt)) = space.eval(&trial, d) {
                if ft <= f - 1e-4 * step * gg {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, ft, gt)) = accepted else {
            break;
        };
        w = trial;
        f = ft;
        g = gt;
        step = (step * 2.0).min(1e6);
    }
    let model = space.model(&w)?;
    OrdinalLogitModel::new(model.coefficients, model.thresholds)
}

pub fn train_ordinal_logit_with(d: &Dataset, params: &OrdinalLogitParams) -> Result<OrdinalLogitModel> {
    train_ordinal_logit(d, params.max_iter, params.tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[usize]) -> Vec<OrdinalLabel> {
        v.iter().map(|&c| OrdinalLabel::new(c).unwrap()).collect()
    }

    #[test]
    fn zero_coefficients_closed_form() {
        let d = Dataset::from_features(
            vec![vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.0, 0.0]],
            labels(&[0, 0, 1]),
        )
        .unwrap();
        let m = OrdinalLogitModel::new(vec![0.0, 0.0], [0.0, 40.0]).unwrap();
        let p = m.class_probabilities(d.row(0)).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        let e = olr_negative_log_likelihood(&m, &d).unwrap();
        // Two class-0 rows at 0.5 each, one class-1 row at sigmoid(40) - 0.5.
        let s40 = 1.0 / (1.0 + (-40f64).exp());
        let expected = -2.0 * 0.5f64.ln() - (s40 - 0.5).ln();
        assert!((e.value - expected).abs() < 1e-12);
    }

    #[test]
    fn duplicated_rows_double_everything() {
        let rows = vec![vec![0.3, -1.0], vec![1.2, 0.4], vec![-0.7, 2.0]];
        let ls = labels(&[0, 1, 2]);
        let d = Dataset::from_features(rows.clone(), ls.clone()).unwrap();
        let dd = Dataset::from_features(
            rows.iter().chain(&rows).cloned().collect(),
            ls.iter().chain(&ls).copied().collect(),
        )
        .unwrap();
        let m = OrdinalLogitModel::new(vec![0.4, -0.2], [-0.5, 0.9]).unwrap();
        let a = olr_negative_log_likelihood(&m, &d).unwrap();
        let b = olr_negative_log_likelihood(&m, &dd).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1.0);
        assert!(close(b.value, 2.0 * a.value));
        for j in 0..2 {
            assert!(close(b.grad_thresholds[j], 2.0 * a.grad_thresholds[j]));
        }
        for (x, y) in a.grad_coefficients.iter().zip(&b.grad_coefficients) {
            assert!(close(*y, 2.0 * x));
        }
    }

    #[test]
    fn rejects_unordered_cutpoints() {
        assert!(matches!(OrdinalLogitModel::new(vec![0.0], [1.0, 1.0]), Err(Error::Invariant(_))));
    }

    #[test]
    fn separable_ordered_data_is_fit_exactly() {
        let xs: Vec<f64> = (0..30).map(|i| -2.05 + i as f64 * 0.15).collect();
        let ls: Vec<usize> = xs
            .iter()
            .map(|&x| if x < 0.0 { 0 } else if x < 1.0 { 1 } else { 2 })
            .collect();
        let d = Dataset::from_features(xs.iter().map(|&x| vec![x]).collect(), labels(&ls)).unwrap();
        let m = train_ordinal_logit(&d, 5000, 1e-8).unwrap();
        let correct = d
            .rows()
            .iter()
            .zip(d.labels())
            .filter(|(r, l)| m.predict(r).unwrap() == **l)
            .count();
        assert_eq!(correct, d.n_rows());
        assert!(m.thresholds()[0] < m.thresholds()[1]);
    }

    #[test]
    fn training_is_deterministic() {
        let d = Dataset::from_features(
            vec![vec![0.1], vec![0.5], vec![0.9], vec![1.4], vec![2.2], vec![-0.3]],
            labels(&[0, 1, 0, 2, 2, 1]),
        )
        .unwrap();
        assert_eq!(train_ordinal_logit(&d, 300, 1e-9).unwrap(), train_ordinal_logit(&d, 300, 1e-9).unwrap());
    }
}

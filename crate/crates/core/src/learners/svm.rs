//! Soft-margin RBF support vector machine.
//!
//! Each binary machine solves the dual
//! `min 1/2 a'Qa - e'a  s.t.  y'a = 0, 0 <= a_i <= C`, `Q_ij = y_i y_j K_ij`,
//! by SMO with second-order working-set selection. Three classes are handled
//! one-vs-one with majority voting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Dataset, OrdinalLabel, N_CLASSES};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    /// RBF bandwidth; `None` means `1 / p`.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_iter: 100_000,
        }
    }
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * sq).exp()
}

pub fn rbf_kernel_matrix(rows: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in 0..i {
            let v = rbf_kernel(&rows[i], &rows[j], gamma);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Solution of one binary dual problem over all training points.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    /// Decision offset: `f(x) = sum a_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Maximal KKT violation `m(a) - M(a)` at exit.
    pub max_violation: f64,
}

/// SMO on a precomputed kernel matrix with targets `y_i` in {-1, +1}.
pub fn solve_dual(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iter: usize) -> Result<DualSolution> {
    let n = y.len();
    if kernel.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: kernel.len(),
        });
    }
    if !(c > 0.0) || !(tol > 0.0) {
        return Err(Error::Parameter("C and tol must be positive".into()));
    }
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i][j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    loop {
        // i: maximal violator in I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut sel_i = None;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = if y[t] > 0.0 { !is_upper(alpha[t]) } else { !is_lower(alpha[t]) };
            if in_up && v >= gmax {
                gmax = v;
                sel_i = Some(t);
            }
        }
        // j: second-order choice in I_low.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut sel_j = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = sel_i {
            for t in 0..n {
                let in_low = if y[t] > 0.0 { !is_lower(alpha[t]) } else { !is_upper(alpha[t]) };
                if !in_low {
                    continue;
                }
                let v = y[t] * grad[t];
                gmax2 = gmax2.max(v);
                let grad_diff = gmax + v;
                if grad_diff > 0.0 {
                    let quad = kernel[i][i] + kernel[t][t] - 2.0 * kernel[i][t];
                    let quad = if quad > 0.0 { quad } else { TAU };
                    let obj = -(grad_diff * grad_diff) / quad;
                    if obj <= best_obj {
                        best_obj = obj;
                        sel_j = Some(t);
                    }
                }
            }
        }
        let violation = gmax + gmax2;
        let (i, j) = match (sel_i, sel_j) {
            (Some(i), Some(j)) if violation >= tol => (i, j),
            _ => {
                let max_violation = if violation.is_finite() { violation.max(0.0) } else { 0.0 };
                let rho = compute_rho(&alpha, &grad, y, c);
                return Ok(DualSolution {
                    alphas: alpha,
                    rho,
                    iterations,
                    max_violation,
                });
            }
        };
        if iterations >= max_iter {
            return Err(Error::Convergence {
                iterations,
                max_violation: violation,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}

/// One-vs-one machine separating `positive` (target +1) from `negative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub positive: OrdinalLabel,
    pub negative: OrdinalLabel,
    pub support_vectors: Vec<Vec<f64>>,
    /// Dual variables of the support vectors, each in `(0, C]`.
    pub alphas: Vec<f64>,
    /// Targets (+1 / -1) of the support vectors.
    pub targets: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub max_violation: f64,
}

impl BinaryMachine {
    pub fn decision(&self, row: &[f64], gamma: f64) -> f64 {
        self.support_vectors
            .iter()
            .zip(self.alphas.iter().zip(&self.targets))
            .map(|(sv, (a, y))| a * y * rbf_kernel(sv, row, gamma))
            .sum::<f64>()
            - self.rho
    }

    pub fn predict(&self, row: &[f64], gamma: f64) -> OrdinalLabel {
        if self.decision(row, gamma) > 0.0 {
            self.positive
        } else {
            self.negative
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    machines: Vec<BinaryMachine>,
    gamma: f64,
    c: f64,
    n_features: usize,
    /// Set when training data held a single class.
    constant: Option<OrdinalLabel>,
}

impl SvmModel {
    pub fn machines(&self) -> &[BinaryMachine] {
        &self.machines
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn predict(&self, row: &[f64]) -> Result<OrdinalLabel> {
        if row.len() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                got: row.len(),
            });
        }
        if let Some(c) = self.constant {
            return Ok(c);
        }
        let mut votes = [0usize; N_CLASSES];
        for m in &self.machines {
            votes[m.predict(row, self.gamma).index()] += 1;
        }
        Ok(OrdinalLabel::argmax(&votes))
    }
}

pub fn predict_svm(m: &SvmModel, row: &[f64]) -> Result<OrdinalLabel> {
    m.predict(row)
}

pub fn train_svm(d: &Dataset, c: f64, gamma: f64, tol: f64) -> Result<SvmModel> {
    train_svm_with(
        d,
        &SvmParams {
            c,
            gamma: Some(gamma),
            tol,
            ..SvmParams::default()
        },
    )
}

pub fn train_svm_with(d: &Dataset, params: &SvmParams) -> Result<SvmModel> {
    if d.is_empty() {
        return Err(Error::Training("cannot train an SVM on an empty dataset".into()));
    }
    let gamma = params.gamma.unwrap_or(1.0 / d.n_features().max(1) as f64);
    if !(params.c > 0.0) || !(gamma > 0.0) {
        return Err(Error::Parameter("C and gamma must be positive".into()));
    }
    let present: Vec<OrdinalLabel> = OrdinalLabel::ALL
        .into_iter()
        .filter(|l| d.labels().contains(l))
        .collect();
    let mut model = SvmModel {
        machines: Vec::new(),
        gamma,
        c: params.c,
        n_features: d.n_features(),
        constant: None,
    };
    if present.len() == 1 {
        model.constant = Some(present[0]);
        return Ok(model);
    }
    for (a, &pos) in present.iter().enumerate() {
        for &neg in &present[a + 1..] {
            model.machines.push(train_pair(d, pos, neg, gamma, params)?);
        }
    }
    Ok(model)
}

fn train_pair(d: &Dataset, pos: OrdinalLabel, neg: OrdinalLabel, gamma: f64, params: &SvmParams) -> Result<BinaryMachine> {
    let idx: Vec<usize> = (0..d.n_rows())
        .filter(|&i| d.labels()[i] == pos || d.labels()[i] == neg)
        .collect();
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| d.row(i).to_vec()).collect();
    let y: Vec<f64> = idx
        .iter()
        .map(|&i| if d.labels()[i] == pos { 1.0 } else { -1.0 })
        .collect();
    let kernel = rbf_kernel_matrix(&rows, gamma);
    let sol = solve_dual(&kernel, &y, params.c, params.tol, params.max_iter)?;
    let mut machine = BinaryMachine {
        positive: pos,
        negative: neg,
        support_vectors: Vec::new(),
        alphas: Vec::new(),
        targets: Vec::new(),
        rho: sol.rho,
        iterations: sol.iterations,
        max_violation: sol.max_violation,
    };
    for (t, &a) in sol.alphas.iter().enumerate() {
        if a > 0.0 {
            machine.support_vectors.push(rows[t].clone());
            machine.alphas.push(a);
            machine.targets.push(y[t]);
        }
    }
    Ok(machine)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[usize]) -> Vec<OrdinalLabel> {
        v.iter().map(|&c| OrdinalLabel::new(c).unwrap()).collect()
    }

    #[test]
    fn minimal_separable_pair() {
        let d = Dataset::from_features(vec![vec![-2.0, 0.0], vec![2.0, 0.0]], labels(&[0, 2])).unwrap();
        let m = train_svm(&d, 1000.0, 0.5, 1e-6).unwrap();
        assert_eq!(m.machines().len(), 1);
        assert_eq!(m.machines()[0].support_vectors.len(), 2);
        assert_eq!(m.predict(&[-2.0, 0.0]).unwrap(), OrdinalLabel::NORMAL);
        assert_eq!(m.predict(&[2.0, 0.0]).unwrap(), OrdinalLabel::LOW);
    }

    #[test]
    fn two_point_dual_closed_form() {
        // K = [[1, k], [k, 1]], y = (+1, -1): a1 = a2 = 2 / (2 - 2k) when below C.
        let k = (-0.5f64 * 16.0).exp();
        let kernel = vec![vec![1.0, k], vec![k, 1.0]];
        let sol = solve_dual(&kernel, &[1.0, -1.0], 100.0, 1e-9, 1000).unwrap();
        let expected = 1.0 / (1.0 - k);
        assert!((sol.alphas[0] - expected).abs() < 1e-9);
        assert!((sol.alphas[1] - expected).abs() < 1e-9);
        assert!(sol.rho.abs() < 1e-9);
    }

    #[test]
    fn single_class_is_constant() {
        let d = Dataset::from_features(vec![vec![0.0], vec![1.0]], labels(&[1, 1])).unwrap();
        let m = train_svm_with(&d, &SvmParams::default()).unwrap();
        assert_eq!(m.predict(&[5.0]).unwrap(), OrdinalLabel::BELOW_NORMAL);
    }

    #[test]
    fn iteration_cap_reports_violation() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()]).collect();
        let ls: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let d = Dataset::from_features(rows, labels(&ls)).unwrap();
        let params = SvmParams {
            c: 10.0,
            gamma: Some(1.0),
            tol: 1e-12,
            max_iter: 1,
        };
        match train_svm_with(&d, &params) {
            Err(Error::Convergence { iterations, max_violation }) => {
                assert_eq!(iterations, 1);
                assert!(max_violation > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let d = Dataset::from_features(vec![vec![0.0], vec![1.0]], labels(&[0, 1])).unwrap();
        assert!(matches!(train_svm(&d, 0.0, 1.0, 1e-3), Err(Error::Parameter(_))));
        assert!(matches!(train_svm(&d, 1.0, -1.0, 1e-3), Err(Error::Parameter(_))));
    }
}

use efclass::learners::ordinal::olr_negative_log_likelihood;
use efclass::learners::svm::{rbf_kernel_matrix, solve_dual};
use efclass::learners::{
    train_forest, train_knn, train_ordinal_logit, train_svm, train_tree, ForestParams, OrdinalLogitModel, TreeNode,
};
use efclass::{Dataset, OrdinalLabel};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn label(c: usize) -> OrdinalLabel {
    OrdinalLabel::new(c).unwrap()
}

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    let rows = (0..n)
        .map(|_| (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let labels = (0..n).map(|_| label(rng.random_range(0..3))).collect();
    Dataset::from_features(rows, labels).unwrap()
}

/// Three well separated Gaussian blobs in the plane.
fn blobs(rng: &mut ChaCha8Rng, per_class: usize) -> Dataset {
    let centres = [(-4.0, 0.0), (4.0, 0.0), (0.0, 6.0)];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, (cx, cy)) in centres.iter().enumerate() {
        for _ in 0..per_class {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            rows.push(vec![cx + 0.7 * dx, cy + 0.7 * dy]);
            labels.push(label(c));
        }
    }
    Dataset::from_features(rows, labels).unwrap()
}

/// Three concentric noisy rings, class = ring index.
fn rings(rng: &mut ChaCha8Rng, per_class: usize) -> Dataset {
    let radii = [1.0, 2.5, 4.0];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, r) in radii.iter().enumerate() {
        for _ in 0..per_class {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let noise: f64 = rng.sample(StandardNormal);
            let rad = r + 0.15 * noise;
            rows.push(vec![rad * angle.cos(), rad * angle.sin()]);
            labels.push(label(c));
        }
    }
    Dataset::from_features(rows, labels).unwrap()
}

fn accuracy(predicted: &[OrdinalLabel], actual: &[OrdinalLabel]) -> f64 {
    predicted.iter().zip(actual).filter(|(p, a)| p == a).count() as f64 / actual.len() as f64
}

#[test]
fn olr_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-5;
    for point in 0..20 {
        let p = 1 + point % 4;
        let d = random_dataset(&mut rng, 10, p);
        let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let t1 = rng.random_range(-2.0..1.0);
        let t2 = t1 + rng.random_range(0.2..2.5);
        let m = OrdinalLogitModel::new(beta.clone(), [t1, t2]).unwrap();
        let e = olr_negative_log_likelihood(&m, &d).unwrap();

        let nll = |b: Vec<f64>, t: [f64; 2]| {
            olr_negative_log_likelihood(&OrdinalLogitModel::new(b, t).unwrap(), &d)
                .unwrap()
                .value
        };
        let mut numeric = Vec::with_capacity(p + 2);
        for j in 0..p {
            let mut up = beta.clone();
            let mut down = beta.clone();
            up[j] += h;
            down[j] -= h;
            numeric.push((nll(up, [t1, t2]) - nll(down, [t1, t2])) / (2.0 * h));
        }
        numeric.push((nll(beta.clone(), [t1 + h, t2]) - nll(beta.clone(), [t1 - h, t2])) / (2.0 * h));
        numeric.push((nll(beta.clone(), [t1, t2 + h]) - nll(beta.clone(), [t1, t2 - h])) / (2.0 * h));

        let analytic: Vec<f64> = e.grad_coefficients.iter().chain(&e.grad_thresholds).copied().collect();
        let diff = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
        assert!(diff / scale < 1e-5, "point {point}: {analytic:?} vs {numeric:?}");
    }
}

#[test]
fn olr_fit_is_stationary() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..120).map(|_| vec![rng.sample(StandardNormal)]).collect();
    let labels = rows
        .iter()
        .map(|r| {
            let z = 1.5 * r[0] + rng.sample::<f64, _>(StandardNormal);
            label(if z < -0.5 { 0 } else if z < 0.7 { 1 } else { 2 })
        })
        .collect();
    let d = Dataset::from_features(rows, labels).unwrap();
    let m = train_ordinal_logit(&d, 5000, 1e-8).unwrap();
    let e = olr_negative_log_likelihood(&m, &d).unwrap();
    let norm = e
        .grad_coefficients
        .iter()
        .chain(&e.grad_thresholds)
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    assert!(norm < 1e-4, "gradient norm {norm}");
    assert!(m.coefficients()[0] > 0.5);
}

#[test]
fn olr_stays_near_chance_on_shuffled_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let train = random_dataset(&mut rng, 300, 3);
    let test = random_dataset(&mut rng, 600, 3);
    let m = train_ordinal_logit(&train, 2000, 1e-6).unwrap();
    let predicted: Vec<OrdinalLabel> = test.rows().iter().map(|r| m.predict(r).unwrap()).collect();
    let acc = accuracy(&predicted, test.labels());
    assert!((acc - 1.0 / 3.0).abs() < 0.08, "accuracy {acc}");
}

fn brute_knn(rows: &[Vec<f64>], labels: &[OrdinalLabel], k: usize, q: &[f64]) -> OrdinalLabel {
    let dist = |r: &Vec<f64>| r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut taken = vec![false; rows.len()];
    let mut votes = [0usize; 3];
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for i in 0..rows.len() {
            if taken[i] {
                continue;
            }
            if best.is_none_or(|b| dist(&rows[i]) < dist(&rows[b])) {
                best = Some(i);
            }
        }
        let b = best.unwrap();
        taken[b] = true;
        votes[labels[b].index()] += 1;
    }
    let top = *votes.iter().max().unwrap();
    label(votes.iter().position(|&v| v == top).unwrap())
}

#[test]
fn knn_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut queries = 0;
    for round in 0..8 {
        let p = 1 + round % 3;
        let n = 15 + 5 * round;
        // Integer grid coordinates make distance ties common.
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-3i32..=3) as f64).collect())
            .collect();
        let labels: Vec<OrdinalLabel> = (0..n).map(|_| label(rng.random_range(0..3))).collect();
        let d = Dataset::from_features(rows.clone(), labels.clone()).unwrap();
        for k in [1, 3, 5] {
            let m = train_knn(&d, k).unwrap();
            for _ in 0..10 {
                let q: Vec<f64> = (0..p).map(|_| rng.random_range(-4i32..=4) as f64 * 0.5).collect();
                assert_eq!(m.predict(&q).unwrap(), brute_knn(&rows, &labels, k, &q), "k={k} q={q:?}");
                queries += 1;
            }
        }
    }
    assert!(queries >= 200);
}

fn route(nodes: &[TreeNode], row: &[f64]) -> (OrdinalLabel, [usize; 3]) {
    let mut i = 0;
    loop {
        match &nodes[i] {
            TreeNode::Leaf { class, counts } => return (*class, *counts),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                i = if row[*feature] <= *threshold { *left } else { *right };
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_prediction_equals_manual_routing(seed in any::<u64>(), n in 10usize..80, p in 1usize..5, min_leaf in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_dataset(&mut rng, n, p);
        let t = train_tree(&d, min_leaf, 10).unwrap();
        for (row, l) in d.rows().iter().zip(d.labels()) {
            let (class, counts) = route(t.nodes(), row);
            prop_assert_eq!(t.predict(row).unwrap(), class);
            prop_assert!(counts[l.index()] > 0);
            prop_assert!(counts.iter().sum::<usize>() >= min_leaf);
        }
        for _ in 0..20 {
            let q: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
            prop_assert_eq!(t.predict(&q).unwrap(), route(t.nodes(), &q).0);
        }
    }

    #[test]
    fn svm_dual_is_feasible(seed in any::<u64>(), n in 4usize..30, c in 0.1f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..2).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let mut y: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let gamma = rng.random_range(0.1..2.0);
        let k = rbf_kernel_matrix(&rows, gamma);

        let eig = DMatrix::from_fn(n, n, |i, j| k[i][j]).symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&e| e >= -1e-9), "{:?}", eig);

        let tol = 1e-3;
        let sol = solve_dual(&k, &y, c, tol, 100_000).unwrap();
        let balance: f64 = sol.alphas.iter().zip(&y).map(|(a, t)| a * t).sum();
        prop_assert!(balance.abs() <= 1e-9 * c * n as f64, "sum a_i y_i = {}", balance);
        for &a in &sol.alphas {
            prop_assert!((0.0..=c).contains(&a), "alpha {} outside [0, {}]", a, c);
        }
        prop_assert!(sol.max_violation <= tol, "violation {}", sol.max_violation);
    }
}

#[test]
fn forest_out_of_bag_error_on_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = blobs(&mut rng, 60);
    let f = train_forest(&d, &ForestParams { n_trees: 200, ..Default::default() }, 4).unwrap();
    let oob = f.oob_error().unwrap();
    assert!(oob <= 0.1, "oob error {oob}");
    assert_eq!(f.oob_error_curve().len(), 200);
    assert_eq!(f.node_histogram().len(), 200);
}

#[test]
fn svm_separates_concentric_rings() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let train = rings(&mut rng, 100);
    let test = rings(&mut rng, 100);
    let m = train_svm(&train, 10.0, 1.0, 1e-3).unwrap();
    let predicted: Vec<OrdinalLabel> = test.rows().iter().map(|r| m.predict(r).unwrap()).collect();
    let acc = accuracy(&predicted, test.labels());
    assert!(acc >= 0.95, "ring accuracy {acc}");
}

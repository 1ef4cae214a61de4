use efclass::tabular::{impute_missing, read_dataset, stratified_folds, upsample_balance, Column};
use efclass::{Dataset, Error, FeatureSchema, OrdinalLabel};
use proptest::prelude::*;

fn schema(p: usize, binary_last: bool) -> FeatureSchema {
    let cols = (0..p)
        .map(|j| {
            let name = format!("f{j}");
            if binary_last && j == p - 1 {
                Column::binary(&name)
            } else {
                Column::continuous(&name)
            }
        })
        .collect();
    FeatureSchema::new("props", cols, "EF").unwrap()
}

/// Rows with a binary last column, optional holes, and 0..=2 labels.
fn dataset_strategy(allow_missing: bool) -> impl Strategy<Value = Dataset> {
    (2usize..5, 3usize..40).prop_flat_map(move |(p, n)| {
        let cell = prop_oneof![-1e6f64..1e6, (-50i32..50).prop_map(f64::from)];
        let hole = if allow_missing { 0.0..0.3f64 } else { 0.0..f64::MIN_POSITIVE };
        (
            proptest::collection::vec(proptest::collection::vec(cell, p), n),
            proptest::collection::vec(0usize..3, n),
            proptest::collection::vec(proptest::collection::vec(0.0..1.0f64, p), n),
            hole,
        )
            .prop_map(move |(mut rows, labels, draws, rate)| {
                for r in rows.iter_mut() {
                    r[p - 1] = if r[p - 1] > 0.0 { 1.0 } else { 0.0 };
                }
                let mask: Vec<Vec<bool>> = draws
                    .iter()
                    .map(|d| d.iter().map(|&u| u < rate).collect())
                    .collect();
                let labels = labels.into_iter().map(|c| OrdinalLabel::new(c).unwrap()).collect();
                Dataset::with_missing(schema(p, true), rows, labels, mask).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_lossless(d in dataset_strategy(true)) {
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = read_dataset(buf.as_slice(), d.schema()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn balancing_equalizes_without_inventing(d in dataset_strategy(false), seed in any::<u64>()) {
        let before = d.class_counts();
        if before.contains(&0) {
            prop_assert!(matches!(upsample_balance(&d, seed), Err(Error::Balance(_))));
            return Ok(());
        }
        let b = upsample_balance(&d, seed).unwrap();
        let after = b.class_counts();
        let majority = *before.iter().max().unwrap();
        prop_assert_eq!(after, [majority; 3]);
        prop_assert_eq!(b.n_rows(), 3 * majority);
        // Originals come first, unchanged.
        prop_assert_eq!(&b.rows()[..d.n_rows()], d.rows());
        // Every appended row is a copy of an original row of the same class.
        for i in d.n_rows()..b.n_rows() {
            let found = (0..d.n_rows())
                .any(|j| d.row(j) == b.row(i) && d.labels()[j] == b.labels()[i]);
            prop_assert!(found);
        }
        prop_assert_eq!(upsample_balance(&d, seed).unwrap(), b);
    }

    #[test]
    fn folds_partition_rows(d in dataset_strategy(false), k in 2usize..6, seed in any::<u64>()) {
        let counts = d.class_counts();
        if counts.iter().any(|&c| c > 0 && c < k) {
            prop_assert!(matches!(stratified_folds(&d, k, seed), Err(Error::Fold(_))));
            return Ok(());
        }
        let plan = stratified_folds(&d, k, seed).unwrap();
        prop_assert_eq!(&stratified_folds(&d, k, seed).unwrap(), &plan);
        let mut seen = vec![0usize; d.n_rows()];
        for f in 0..k {
            let test = plan.test_indices(f);
            let train = plan.train_indices(f);
            prop_assert_eq!(test.len() + train.len(), d.n_rows());
            for i in test {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
        // Each class spreads over folds as evenly as possible.
        for c in OrdinalLabel::ALL {
            let per_fold: Vec<usize> = (0..k)
                .map(|f| plan.test_indices(f).iter().filter(|&&i| d.labels()[i] == c).count())
                .collect();
            let lo = per_fold.iter().min().unwrap();
            let hi = per_fold.iter().max().unwrap();
            prop_assert!(hi - lo <= 1, "{:?}", per_fold);
        }
    }

    #[test]
    fn imputation_fills_and_is_idempotent(d in dataset_strategy(true)) {
        let all_missing = (0..d.n_features())
            .any(|j| d.missing_mask().iter().all(|m| m[j]));
        prop_assume!(!all_missing);
        let once = impute_missing(&d).unwrap();
        prop_assert!(!once.has_missing());
        prop_assert!(once.rows().iter().flatten().all(|v| v.is_finite()));
        for (i, m) in d.missing_mask().iter().enumerate() {
            for (j, &hole) in m.iter().enumerate() {
                if !hole {
                    prop_assert_eq!(once.row(i)[j], d.row(i)[j]);
                }
            }
        }
        let p = d.n_features();
        prop_assert!(once.column(p - 1).iter().all(|&v| v == 0.0 || v == 1.0));
        prop_assert_eq!(impute_missing(&once).unwrap(), once);
    }
}

#[test]
fn clinical_sized_input_balances_to_126() {
    let labels: Vec<OrdinalLabel> = [42usize, 35, 28]
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat_n(OrdinalLabel::new(c).unwrap(), n))
        .collect();
    let rows = (0..105).map(|i| vec![i as f64]).collect();
    let d = Dataset::from_features(rows, labels).unwrap();
    let b = upsample_balance(&d, 7).unwrap();
    assert_eq!(b.class_counts(), [42, 42, 42]);
    assert_eq!(b.n_rows(), 126);
}

use efclass::eval::{confusion_matrix, cross_validate, per_class_metrics, rank_models, ConfusionMatrix};
use efclass::learners::{ModelFamily, ModelSpec};
use efclass::tabular::{stratified_folds, upsample_balance};
use efclass::synth::{generate_cohort, CohortConfig, SchemaChoice};
use efclass::OrdinalLabel;
use proptest::prelude::*;

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn labels_strategy() -> impl Strategy<Value = (Vec<OrdinalLabel>, Vec<OrdinalLabel>)> {
    (1usize..200).prop_flat_map(|n| {
        let l = proptest::collection::vec((0usize..3).prop_map(|c| OrdinalLabel::new(c).unwrap()), n);
        (l.clone(), l)
    })
}

fn matrix_strategy() -> impl Strategy<Value = ConfusionMatrix> {
    proptest::array::uniform3(proptest::array::uniform3(0usize..60))
        .prop_filter("non-empty", |c| c.iter().flatten().sum::<usize>() > 0)
        .prop_map(ConfusionMatrix::from_counts)
}

proptest! {
    #[test]
    fn rows_are_supports_and_trace_is_hits((actual, predicted) in labels_strategy()) {
        let cm = confusion_matrix(&actual, &predicted).unwrap();
        let rows = cm.row_sums();
        for (c, &r) in rows.iter().enumerate() {
            prop_assert_eq!(r, actual.iter().filter(|l| l.index() == c).count());
        }
        let hits = actual.iter().zip(&predicted).filter(|(a, p)| a == p).count();
        prop_assert_eq!(cm.trace(), hits);
        prop_assert_eq!(cm.total(), actual.len());
    }

    #[test]
    fn precision_and_recall_conserve_trace(cm in matrix_strategy()) {
        let m = per_class_metrics(&cm).unwrap();
        let cols = cm.col_sums();
        let rows = cm.row_sums();
        let via_precision: f64 = (0..3).map(|c| m.per_class[c].precision.unwrap_or(0.0) * cols[c] as f64).sum();
        let via_recall: f64 = (0..3).map(|c| m.per_class[c].recall.unwrap_or(0.0) * rows[c] as f64).sum();
        let trace = cm.trace() as f64;
        prop_assert!((via_precision - trace).abs() < 1e-9);
        prop_assert!((via_recall - trace).abs() < 1e-9);
    }

    #[test]
    fn macro_scores_ignore_class_names(cm in matrix_strategy()) {
        let base = per_class_metrics(&cm).unwrap();
        for perm in PERMS {
            let m = per_class_metrics(&cm.relabel(perm)).unwrap();
            for (a, b) in [
                (base.macro_f_score, m.macro_f_score),
                (base.macro_g_score, m.macro_g_score),
                (base.macro_precision, m.macro_precision),
                (base.macro_recall, m.macro_recall),
            ] {
                match (a, b) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                    (x, y) => prop_assert_eq!(x, y),
                }
            }
            prop_assert_eq!(m.accuracy, base.accuracy);
        }
    }
}

#[test]
fn cv_on_planted_cohort_beats_chance_and_conserves_counts() {
    let (d, _) = generate_cohort(&CohortConfig::default_planted(SchemaChoice::Step1, 300, 17)).unwrap();
    let d = upsample_balance(&d, 17).unwrap();
    let plan = stratified_folds(&d, 10, 17).unwrap();
    let r = cross_validate(&d, &ModelSpec::default_for(ModelFamily::RandomForest), &plan, 17).unwrap();
    assert!(r.mean_accuracy > 1.0 / 3.0 + 0.15, "mean accuracy {}", r.mean_accuracy);
    assert_eq!(r.pooled.row_sums(), d.class_counts());
    let hits = r.predictions.iter().zip(d.labels()).filter(|(p, a)| p == a).count();
    assert_eq!(r.pooled.trace(), hits);
    assert_eq!(r.fold_accuracies.len(), 10);
}

#[test]
fn every_family_cross_validates_and_ranks() {
    let (d, _) = generate_cohort(&CohortConfig::default_planted(SchemaChoice::Step2, 120, 4)).unwrap();
    let d = upsample_balance(&d, 4).unwrap();
    let plan = stratified_folds(&d, 5, 4).unwrap();
    let results: Vec<_> = ModelFamily::ALL
        .iter()
        .map(|&f| cross_validate(&d, &ModelSpec::default_for(f), &plan, 4).unwrap())
        .collect();
    for r in &results {
        assert!((0.0..=1.0).contains(&r.mean_accuracy));
        assert_eq!(r.pooled.total(), d.n_rows());
        assert_eq!(r.pooled.row_sums(), d.class_counts());
    }
    let ranked = rank_models(&results).unwrap();
    assert_eq!(ranked.len(), 5);
    assert!(ranked.windows(2).all(|w| w[0].mean_accuracy >= w[1].mean_accuracy));
}

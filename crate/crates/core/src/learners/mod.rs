//! The five classifiers behind one train/predict contract.

pub mod forest;
pub mod knn;
pub mod model;
pub mod ordinal;
pub mod svm;
pub mod tree;

pub use forest::{predict_forest, train_forest, ForestModel, ForestParams};
pub use knn::{predict_knn, train_knn, KnnModel, KnnParams};
pub use model::{ModelFamily, ModelSpec, TrainedModel, MODEL_FORMAT_VERSION};
pub use ordinal::{
    olr_negative_log_likelihood, train_ordinal_logit, NllEval, OrdinalLogitModel, OrdinalLogitParams,
};
pub use svm::{predict_svm, train_svm, SvmModel, SvmParams};
pub use tree::{gini_impurity, train_tree, DecisionTree, TreeNode, TreeParams};

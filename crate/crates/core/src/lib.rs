//! Graphlet kernels with structural smoothing.
//!
//! The pipeline: enumerate or sample connected induced subgraphs of each
//! graph ([`sampling`]), identify them by canonical code ([`canonical`])
//! against a catalog of graphlet types linked level-to-level by single-vertex
//! deletion ([`catalog`]), estimate per-graph graphlet distributions with
//! structure-aware smoothing ([`smoothing`], [`pyp`]), and evaluate the
//! resulting kernels with an SVM harness ([`kernel`]).

pub mod canonical;
pub mod catalog;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod pyp;
pub mod sampling;
pub mod smoothing;
pub mod svm;

pub use canonical::{are_isomorphic, canonical_form, CanonicalCode};
pub use catalog::{
    base_distribution, build_catalog, build_dag, load_catalog, push_forward, save_catalog,
    BaseMode, Distribution, GraphletCatalog, GraphletDag, MAX_LEVEL, MIN_LEVEL,
};
pub use error::{Error, Result};
pub use graph::{parse_edge_list, parse_tu_dataset, Graph, GraphCollection};
pub use kernel::{
    collection_counts, cross_validate, cross_validate_gram, export_precomputed_kernel,
    feature_vector, feature_vectors, features_from_counts, gram_matrix,
    import_precomputed_kernel, stratified_folds, t_test, CvResult, EvalReport, FeatureConfig,
    KernelMatrix,
};
pub use pyp::{HpypChain, PypConfig};
pub use sampling::{
    count_collection, enumerate_connected_subgraphs, load_counts, log_log_slope, mix_seed,
    powerlaw_table, sample_connected_subgraphs, save_counts, CountSource, CountVector,
    SampleMethod, SAMPLE_BUDGET_FACTOR,
};
pub use smoothing::{
    kneser_ney, laplace, load_distributions, mle, save_distributions, structural_kneser_ney,
    SmoothMethod, SmoothingConfig, DISCOUNT_GRID,
};
pub use svm::{svm_train, SvmClassifier, SvmModel};

//! Graph features from smoothed graphlet distributions, Gram matrices,
//! cross-validated classification, and significance testing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::catalog::{BaseMode, Distribution, GraphletCatalog, GraphletDag, MIN_LEVEL};
use crate::error::{Error, Result};
use crate::graph::GraphCollection;
use crate::pyp::HpypChain;
use crate::sampling::{count_collection, mix_seed, CountSource, CountVector};
use crate::smoothing::{self, SmoothMethod, SmoothingConfig};
use crate::svm::SvmClassifier;

/// Everything that determines a feature vector: where counts come from
/// and how they are turned into a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub level: u8,
    pub source: CountSource,
    pub method: SmoothMethod,
    /// Rescale discounted estimates to sum to 1 (discounting methods only).
    pub renormalize: bool,
    /// Where the structural fallback starts (structural discounting only).
    pub base: BaseMode,
}

impl FeatureConfig {
    pub fn method_name(&self) -> &'static str {
        match self.method {
            SmoothMethod::Mle => "mle",
            SmoothMethod::Laplace => "laplace",
            SmoothMethod::KneserNey { .. } => "kn",
            SmoothMethod::StructuralKneserNey { .. } => "skn",
            SmoothMethod::PitmanYor(_) => "pyp",
        }
    }

    pub fn discount(&self) -> Option<f64> {
        match self.method {
            SmoothMethod::KneserNey { d } | SmoothMethod::StructuralKneserNey { d } => Some(d),
            SmoothMethod::PitmanYor(cfg) => Some(cfg.d),
            _ => None,
        }
    }

    /// Level whose counts feed the structural fallback, if any.
    fn lower_level(&self) -> Option<u8> {
        match (self.method, self.base) {
            (SmoothMethod::StructuralKneserNey { .. }, BaseMode::ParentMle) => {
                Some(self.level - 1)
            }
            (SmoothMethod::StructuralKneserNey { .. }, BaseMode::Recursive) => Some(MIN_LEVEL),
            _ => None,
        }
    }
}

/// One graph's feature vector from its count vector(s).
pub fn feature_vector(
    counts: &CountVector,
    lower: Option<&CountVector>,
    config: &FeatureConfig,
    dag: &GraphletDag,
) -> Result<Vec<f64>> {
    let dist: Distribution = match config.method {
        SmoothMethod::Mle => smoothing::mle(counts)?,
        SmoothMethod::Laplace => smoothing::laplace(counts)?,
        SmoothMethod::KneserNey { d } => {
            let uniform = Distribution::uniform(counts.level, counts.counts.len());
            smoothing::kneser_ney(counts, &uniform, d, config.renormalize)?
        }
        SmoothMethod::StructuralKneserNey { d } => {
            let lower = lower.ok_or_else(|| {
                Error::InvalidArgument(
                    "structural discounting needs counts for the fallback level".into(),
                )
            })?;
            let cfg = SmoothingConfig {
                d,
                renormalize: config.renormalize,
                base: config.base,
            };
            smoothing::structural_kneser_ney(counts, lower, dag, &cfg)?
        }
        SmoothMethod::PitmanYor(pyp) => {
            let mut chain = HpypChain::standard(dag, counts.level, pyp)?;
            chain.gibbs_fit(counts)?
        }
    };
    Ok(dist.probs)
}

/// Count vectors feeding [`features_from_counts`]: one per graph at the
/// feature level, plus the fallback level when the method needs one
/// (counted exhaustively when the fallback recurses from the bottom
/// level, whose single graphlet makes the count value irrelevant).
pub fn collection_counts(
    collection: &GraphCollection,
    config: &FeatureConfig,
    catalog: &GraphletCatalog,
) -> Result<(Vec<CountVector>, Option<Vec<CountVector>>)> {
    let upper = count_collection(collection, config.level, config.source, catalog)?;
    let lower = match config.lower_level() {
        Some(l) if l == MIN_LEVEL => Some(count_collection(
            collection,
            l,
            CountSource::Exhaustive,
            catalog,
        )?),
        Some(l) => Some(count_collection(collection, l, config.source, catalog)?),
        None => None,
    };
    Ok((upper, lower))
}

/// Per-graph feature vectors from already-obtained counts; seating
/// chains get one decorrelated seed per graph.
pub fn features_from_counts(
    upper: &[CountVector],
    lower: Option<&[CountVector]>,
    config: &FeatureConfig,
    dag: &GraphletDag,
) -> Result<Vec<Vec<f64>>> {
    if let Some(lower) = lower {
        if lower.len() != upper.len() {
            return Err(Error::InvalidArgument(format!(
                "{} fallback count vectors for {} graphs",
                lower.len(),
                upper.len()
            )));
        }
    }
    upper
        .par_iter()
        .enumerate()
        .map(|(idx, counts)| {
            let mut cfg = *config;
            if let SmoothMethod::PitmanYor(ref mut pyp) = cfg.method {
                pyp.seed = mix_seed(pyp.seed, idx as u64);
            }
            feature_vector(counts, lower.map(|l| &l[idx]), &cfg, dag).map_err(|e| match e {
                Error::Estimation(msg) => Error::Estimation(format!("graph {idx}: {msg}")),
                other => other,
            })
        })
        .collect()
}

/// Feature vectors for a whole collection: count, then smooth.
pub fn feature_vectors(
    collection: &GraphCollection,
    config: &FeatureConfig,
    catalog: &GraphletCatalog,
    dag: &GraphletDag,
) -> Result<Vec<Vec<f64>>> {
    let (upper, lower) = collection_counts(collection, config, catalog)?;
    features_from_counts(&upper, lower.as_deref(), config, dag)
}

/// Symmetric matrix of pairwise feature dot products.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub n: usize,
    pub values: Vec<f64>,
    pub meta: Option<FeatureConfig>,
}

impl KernelMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Gram matrix of the given vectors, parallelized over the upper
/// triangle and mirrored.
pub fn gram_matrix(features: &[Vec<f64>], meta: Option<FeatureConfig>) -> Result<KernelMatrix> {
    let n = features.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no feature vectors".into()));
    }
    let width = features[0].len();
    if features.iter().any(|f| f.len() != width) {
        return Err(Error::InvalidArgument(
            "feature vectors have unequal lengths".into(),
        ));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    features[i]
                        .iter()
                        .zip(&features[j])
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(KernelMatrix { n, values, meta })
}

/// Deterministic stratified fold assignment: indices grouped by label,
/// each group shuffled by a label-specific stream, then dealt round-robin
/// across folds with a cursor that persists across groups.
pub fn stratified_folds(labels: &[i64], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let mut by_label: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (idx, &label) in labels.iter().enumerate() {
        by_label.entry(label).or_default().push(idx);
    }
    for (label, members) in &by_label {
        if members.len() < folds {
            return Err(Error::InvalidArgument(format!(
                "class {label} has only {} graphs, fewer than {folds} folds",
                members.len()
            )));
        }
    }
    let mut assignment = vec![Vec::new(); folds];
    let mut cursor = 0usize;
    for (label, mut members) in by_label {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, label as u64));
        members.shuffle(&mut rng);
        for idx in members {
            assignment[cursor].push(idx);
            cursor = (cursor + 1) % folds;
        }
    }
    Ok(assignment)
}

/// Per-fold test accuracies in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, std)
}

/// Cross-validation over a precomputed kernel. Each graph's feature
/// vector is independent of the fold split, so training-fold submatrices
/// of the full Gram matrix equal per-fold recomputation exactly.
pub fn cross_validate_gram(
    km: &KernelMatrix,
    labels: &[i64],
    folds: usize,
    c: f64,
    seed: u64,
) -> Result<CvResult> {
    if labels.len() != km.n {
        return Err(Error::InvalidArgument(format!(
            "{} labels for a {}-graph kernel",
            labels.len(),
            km.n
        )));
    }
    let assignment = stratified_folds(labels, folds, seed)?;
    let fold_accuracies: Vec<f64> = assignment
        .par_iter()
        .map(|test| {
            let mut in_test = vec![false; km.n];
            test.iter().for_each(|&t| in_test[t] = true);
            let train: Vec<usize> = (0..km.n).filter(|&t| !in_test[t]).collect();
            let tn = train.len();
            let mut sub = vec![0.0; tn * tn];
            for (a, &i) in train.iter().enumerate() {
                for (b, &j) in train.iter().enumerate() {
                    sub[a * tn + b] = km.get(i, j);
                }
            }
            let train_labels: Vec<i64> = train.iter().map(|&i| labels[i]).collect();
            let clf = SvmClassifier::train(&sub, &train_labels, c)?;
            let correct = test
                .iter()
                .filter(|&&t| {
                    let row: Vec<f64> = train.iter().map(|&s| km.get(t, s)).collect();
                    clf.predict(&row) == labels[t]
                })
                .count();
            Ok(100.0 * correct as f64 / test.len() as f64)
        })
        .collect::<Result<_>>()?;
    let (mean, std) = mean_and_sample_std(&fold_accuracies);
    Ok(CvResult {
        fold_accuracies,
        mean,
        std,
    })
}

/// Outcome of one full evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub level: u8,
    pub method: String,
    pub d: Option<f64>,
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl EvalReport {
    /// Machine-readable summary line.
    pub fn result_line(&self) -> String {
        format!(
            "RESULT dataset={} k={} method={} d={} mean={:.2} std={:.2}",
            self.dataset,
            self.level,
            self.method,
            self.d.map_or_else(|| "-".to_string(), |d| d.to_string()),
            self.mean,
            self.std
        )
    }
}

/// Full pipeline: count, smooth, Gram, stratified k-fold classification.
pub fn cross_validate(
    collection: &GraphCollection,
    config: &FeatureConfig,
    folds: usize,
    c: f64,
    seed: u64,
    catalog: &GraphletCatalog,
    dag: &GraphletDag,
) -> Result<EvalReport> {
    let features = feature_vectors(collection, config, catalog, dag)?;
    let km = gram_matrix(&features, Some(*config))?;
    let cv = cross_validate_gram(&km, &collection.labels, folds, c, seed)?;
    Ok(EvalReport {
        dataset: collection.name.clone(),
        level: config.level,
        method: config.method_name().to_string(),
        d: config.discount(),
        fold_accuracies: cv.fold_accuracies,
        mean: cv.mean,
        std: cv.std,
    })
}

/// Two-sided unpaired t-test with unpooled variances. Zero variance on
/// both sides degenerates to p = 1 for equal means and p = 0 otherwise.
pub fn t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (ma, mb) = (
        a.iter().sum::<f64>() / a.len() as f64,
        b.iter().sum::<f64>() / b.len() as f64,
    );
    let var = |xs: &[f64], m: f64| {
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let (va, vb) = (var(a, ma), var(b, mb));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        return Ok(if ma == mb { 1.0 } else { 0.0 });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::Estimation(format!("t distribution: {e}")))?;
    Ok((2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0))
}

/// Writes the conventional precomputed-kernel text layout: one line per
/// graph, "<label> 0:<row index+1> 1:<v1> ... n:<vn>".
pub fn export_precomputed_kernel(
    km: &KernelMatrix,
    labels: &[i64],
    path: &Path,
) -> Result<()> {
    if labels.len() != km.n {
        return Err(Error::InvalidArgument(format!(
            "{} labels for a {}-graph kernel",
            labels.len(),
            km.n
        )));
    }
    let mut text = String::new();
    for (i, &label) in labels.iter().enumerate() {
        let _ = write!(text, "{label} 0:{}", i + 1);
        for j in 0..km.n {
            let _ = write!(text, " {}:{:.16e}", j + 1, km.get(i, j));
        }
        text.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a file written by [`export_precomputed_kernel`].
pub fn import_precomputed_kernel(path: &Path) -> Result<(KernelMatrix, Vec<i64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let fail = |msg: String| Error::Format(format!("{}:{}: {msg}", path.display(), no + 1));
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let label: i64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail("bad label".into()))?;
        let mut values = Vec::new();
        for (col, pair) in it.enumerate() {
            let (k, v) = pair
                .split_once(':')
                .ok_or_else(|| fail(format!("bad pair {pair:?}")))?;
            let k: usize = k.parse().map_err(|_| fail(format!("bad column in {pair:?}")))?;
            if k != col {
                return Err(fail(format!("column {k}, expected {col}")));
            }
            if col == 0 {
                let row: usize = v.parse().map_err(|_| fail("bad row index".into()))?;
                if row != rows.len() + 1 {
                    return Err(fail(format!("row index {row}, expected {}", rows.len() + 1)));
                }
            } else {
                values.push(
                    v.parse::<f64>()
                        .map_err(|_| fail(format!("bad value in {pair:?}")))?,
                );
            }
        }
        labels.push(label);
        rows.push(values);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Format(format!("{}: empty kernel file", path.display())));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format(format!(
            "{}: kernel matrix is not square",
            path.display()
        )));
    }
    let mut values = Vec::with_capacity(n * n);
    rows.into_iter().for_each(|r| values.extend(r));
    Ok((
        KernelMatrix {
            n,
            values,
            meta: None,
        },
        labels,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_catalog, build_dag};
    use crate::graph::Graph;
    use crate::sampling::SampleMethod;

    fn setup() -> (GraphletCatalog, GraphletDag) {
        let catalog = build_catalog(5).unwrap();
        let dag = build_dag(&catalog);
        (catalog, dag)
    }

    fn triangle() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn path3() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn mle_config(level: u8) -> FeatureConfig {
        FeatureConfig {
            level,
            source: CountSource::Exhaustive,
            method: SmoothMethod::Mle,
            renormalize: true,
            base: BaseMode::ParentMle,
        }
    }

    fn collection(graphs: Vec<Graph>, labels: Vec<i64>) -> GraphCollection {
        GraphCollection {
            graphs,
            labels,
            name: "synthetic".into(),
        }
    }

    #[test]
    fn point_mass_features_for_the_two_triangles() {
        let (catalog, dag) = setup();
        let coll = collection(vec![triangle(), path3()], vec![1, -1]);
        let features =
            feature_vectors(&coll, &mle_config(3), &catalog, &dag).unwrap();
        assert_eq!(features[0], vec![0.0, 1.0]);
        assert_eq!(features[1], vec![1.0, 0.0]);

        let km = gram_matrix(&features, None).unwrap();
        assert_eq!(km.values, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn structural_smoothing_fills_unseen_types() {
        // a lone triangle never shows the 3-path, yet the fallback assigns
        // it mass; with every count <= d the estimate IS the fallback
        let (catalog, dag) = setup();
        let coll = collection(vec![triangle()], vec![1]);
        let cfg = FeatureConfig {
            method: SmoothMethod::StructuralKneserNey { d: 1.0 },
            ..mle_config(3)
        };
        let features = feature_vectors(&coll, &cfg, &catalog, &dag).unwrap();
        assert_eq!(features[0], vec![0.4, 0.6]);
    }

    #[test]
    fn fallback_levels_for_each_base_mode() {
        let (catalog, dag) = setup();
        let g = Graph::new(
            6,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 2)],
        )
        .unwrap();
        let coll = collection(vec![g], vec![1]);
        for base in [BaseMode::ParentMle, BaseMode::Recursive] {
            let cfg = FeatureConfig {
                level: 4,
                method: SmoothMethod::StructuralKneserNey { d: 0.5 },
                base,
                ..mle_config(4)
            };
            let features = feature_vectors(&coll, &cfg, &catalog, &dag).unwrap();
            let total: f64 = features[0].iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_graphs_share_kernel_rows() {
        let (catalog, dag) = setup();
        let coll = collection(vec![triangle(), triangle(), path3()], vec![1, 1, -1]);
        let features = feature_vectors(&coll, &mle_config(3), &catalog, &dag).unwrap();
        let km = gram_matrix(&features, None).unwrap();
        assert_eq!(km.row(0), km.row(1));
        assert_eq!(km.get(0, 1), km.get(0, 0));
        assert_eq!(km.max_asymmetry(), 0.0);
    }

    #[test]
    fn gram_is_positive_semidefinite_in_quadratic_forms() {
        let (catalog, dag) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let graphs: Vec<Graph> = (0..10)
            .map(|_| {
                let mut edges = Vec::new();
                for i in 0..9u32 {
                    for j in i + 1..9 {
                        if rng.gen::<f64>() < 0.45 {
                            edges.push((i, j));
                        }
                    }
                }
                Graph::new(9, &edges).unwrap()
            })
            .collect();
        let coll = collection(graphs, vec![1; 10]);
        let features = feature_vectors(&coll, &mle_config(4), &catalog, &dag).unwrap();
        let km = gram_matrix(&features, None).unwrap();
        for i in 0..10 {
            let d = km.get(i, i);
            assert!(d > 0.0 && d <= 1.0 + 1e-12, "diagonal {d}");
        }
        for _ in 0..100 {
            let z: Vec<f64> = (0..10).map(|_| rng.gen::<f64>() - 0.5).collect();
            let mut form = 0.0;
            for i in 0..10 {
                for j in 0..10 {
                    form += z[i] * km.get(i, j) * z[j];
                }
            }
            assert!(form >= -1e-8, "quadratic form {form}");
        }
    }

    #[test]
    fn folds_are_stratified_and_deterministic() {
        let labels: Vec<i64> = (0..20).map(|i| if i < 12 { 1 } else { -1 }).collect();
        let folds = stratified_folds(&labels, 5, 7).unwrap();
        assert_eq!(folds, stratified_folds(&labels, 5, 7).unwrap());
        let mut seen = vec![false; 20];
        for fold in &folds {
            let pos = fold.iter().filter(|&&i| labels[i] == 1).count();
            let neg = fold.len() - pos;
            assert!((2..=3).contains(&pos), "{pos} positives in a fold");
            assert!((1..=2).contains(&neg), "{neg} negatives in a fold");
            for &i in fold {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));

        assert!(matches!(
            stratified_folds(&[1, 1, 1, -1], 5, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn label_determined_features_classify_perfectly() {
        let (catalog, dag) = setup();
        let mut graphs = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..10 {
            graphs.push(triangle());
            labels.push(1);
            graphs.push(path3());
            labels.push(-1);
        }
        let coll = collection(graphs, labels);
        let report =
            cross_validate(&coll, &mle_config(3), 5, 1.0, 3, &catalog, &dag).unwrap();
        assert_eq!(report.fold_accuracies, vec![100.0; 5]);
        assert_eq!(report.mean, 100.0);
        assert_eq!(report.std, 0.0);

        let again = cross_validate(&coll, &mle_config(3), 5, 1.0, 3, &catalog, &dag).unwrap();
        assert_eq!(report, again);
        assert_eq!(
            report.result_line(),
            "RESULT dataset=synthetic k=3 method=mle d=- mean=100.00 std=0.00"
        );
    }

    #[test]
    fn sampled_pipeline_is_reproducible() {
        let (catalog, dag) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut graphs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..14 {
            let p = if i % 2 == 0 { 0.7 } else { 0.25 };
            let mut edges = Vec::new();
            for a in 0..10u32 {
                for b in a + 1..10 {
                    if rng.gen::<f64>() < p {
                        edges.push((a, b));
                    }
                }
            }
            let g = Graph::new(10, &edges).unwrap();
            if !g.is_connected() {
                continue;
            }
            graphs.push(g);
            labels.push(if i % 2 == 0 { 1 } else { -1 });
        }
        let coll = collection(graphs, labels);
        let cfg = FeatureConfig {
            source: CountSource::Sampled {
                n_samples: 400,
                method: SampleMethod::Expand,
                seed: 9,
            },
            method: SmoothMethod::StructuralKneserNey { d: 1.0 },
            ..mle_config(4)
        };
        let a = cross_validate(&coll, &cfg, 3, 1.0, 5, &catalog, &dag).unwrap();
        let b = cross_validate(&coll, &cfg, 3, 1.0, 5, &catalog, &dag).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.method, "skn");
        assert_eq!(a.d, Some(1.0));
    }

    #[test]
    fn seating_features_are_deterministic_and_normalized() {
        let (catalog, dag) = setup();
        let coll = collection(vec![triangle(), path3()], vec![1, -1]);
        let pyp = crate::pyp::PypConfig {
            sweeps: 10,
            burn_in: 5,
            avg_last: 5,
            seed: 40,
            ..Default::default()
        };
        let cfg = FeatureConfig {
            method: SmoothMethod::PitmanYor(pyp),
            ..mle_config(3)
        };
        let a = feature_vectors(&coll, &cfg, &catalog, &dag).unwrap();
        let b = feature_vectors(&coll, &cfg, &catalog, &dag).unwrap();
        assert_eq!(a, b);
        for f in &a {
            assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(f.iter().all(|&p| p > 0.0));
        }
        // the two graphs get different seating streams
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn welch_test_behaviour() {
        assert_eq!(t_test(&[80.0, 80.0], &[80.0, 80.0]).unwrap(), 1.0);
        assert_eq!(t_test(&[80.0, 80.0], &[70.0, 70.0]).unwrap(), 0.0);

        let a = [0.0, 0.1, 0.05, 0.02, 0.08];
        let b = [99.9, 100.0, 99.95, 99.98, 100.0];
        assert!(t_test(&a, &b).unwrap() < 1e-6);
        let ab = t_test(&a, &b).unwrap();
        let ba = t_test(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-15);

        let close_a = [80.0, 81.0, 79.5];
        let close_b = [80.5, 79.8, 80.9];
        let p = t_test(&close_a, &close_b).unwrap();
        assert!(p > 0.3 && p <= 1.0, "p = {p}");

        assert!(t_test(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn precomputed_kernel_round_trip() {
        let km = KernelMatrix {
            n: 2,
            values: vec![1.0, 0.0, 0.0, 1.0],
            meta: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kernel.txt");
        export_precomputed_kernel(&km, &[1, -1], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("1 0:1 1:"));

        let (km2, labels) = import_precomputed_kernel(&path).unwrap();
        assert_eq!(km2.values, km.values);
        assert_eq!(labels, vec![1, -1]);

        // fractional values survive bit-exactly
        let km = KernelMatrix {
            n: 2,
            values: vec![0.123456789123456789, 1.0 / 3.0, 1.0 / 3.0, 0.98765432109876],
            meta: None,
        };
        export_precomputed_kernel(&km, &[5, 7], &path).unwrap();
        let (km2, _) = import_precomputed_kernel(&path).unwrap();
        assert_eq!(km2.values, km.values);

        assert!(matches!(
            export_precomputed_kernel(&km, &[1], &path),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn kernel_import_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kernel.txt");
        for bad in [
            "1 0:2 1:1.0\n-1 0:1 1:1.0", // row indices out of order
            "1 0:1 1:1.0 2:0.0",         // not square
            "1 1:1.0",                   // missing row index column
            "x 0:1 1:1.0",               // bad label
        ] {
            std::fs::write(&path, bad).unwrap();
            assert!(
                matches!(import_precomputed_kernel(&path), Err(Error::Format(_))),
                "accepted {bad:?}"
            );
        }
    }

    #[test]
    fn cv_errors_surface() {
        let km = KernelMatrix {
            n: 4,
            values: vec![0.0; 16],
            meta: None,
        };
        assert!(matches!(
            cross_validate_gram(&km, &[1, 1, -1], 2, 1.0, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            cross_validate_gram(&km, &[1, 1, 1, -1], 2, 1.0, 0),
            Err(Error::InvalidArgument(_))
        ));
    }
}

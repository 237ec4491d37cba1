//! Support vector classification on precomputed kernel matrices, solved
//! by pairwise coordinate descent on the dual with maximal-violating-pair
//! selection.

use crate::error::{Error, Result};

/// Stopping threshold on the duality-gap surrogate m - M.
pub const SMO_EPS: f64 = 1e-3;
/// One epoch is n pair updates; training aborts after this many epochs.
pub const SMO_MAX_EPOCHS: usize = 10_000;
/// Curvature floor for near-duplicate kernel rows.
const CURVATURE_FLOOR: f64 = 1e-12;

/// One trained binary margin machine.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// Training indices with nonzero dual weight.
    pub support: Vec<usize>,
    /// alpha_t * y_t for each support index.
    pub coef: Vec<f64>,
    pub rho: f64,
    /// Value of the maximized dual objective.
    pub dual_objective: f64,
    pub pair_updates: usize,
    pub converged: bool,
}

impl SvmModel {
    /// Decision value for a point whose kernel row over the training set
    /// is `row`.
    pub fn decision(&self, row: &[f64]) -> f64 {
        let mut f = -self.rho;
        for (&s, &c) in self.support.iter().zip(&self.coef) {
            f += c * row[s];
        }
        f
    }
}

/// Maximizes sum(alpha) - 1/2 alpha' Q alpha with Q_ts = y_t y_s K_ts over
/// the box [0, C]^n intersected with y'alpha = 0, updating the maximal
/// violating pair until m - M < eps.
pub fn svm_train(gram: &[f64], y: &[f64], c: f64) -> Result<SvmModel> {
    let n = y.len();
    if gram.len() != n * n {
        return Err(Error::InvalidArgument(format!(
            "kernel matrix has {} entries, expected {}",
            gram.len(),
            n * n
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no training points".into()));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidArgument("labels must be +1 or -1".into()));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::Training(
            "training data contains a single class".into(),
        ));
    }

    let mut alpha = vec![0.0f64; n];
    let mut grad = vec![-1.0f64; n]; // gradient of the minimized dual at alpha = 0
    let mut updates = 0usize;
    let max_updates = SMO_MAX_EPOCHS.saturating_mul(n);
    let mut converged = false;

    loop {
        // maximal violating pair over the feasible ascent directions
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        let mut m_up = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0);
            if in_up && v > m_up {
                m_up = v;
                i = t;
            }
            if in_low && v < m_low {
                m_low = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || m_up - m_low < SMO_EPS {
            converged = true;
            break;
        }
        if updates >= max_updates {
            break;
        }

        // step of size lambda along (y_i, -y_j), the feasible descent
        // direction; box limits depend on which bound each end approaches
        let a = (gram[i * n + i] + gram[j * n + j] - 2.0 * gram[i * n + j]).max(CURVATURE_FLOOR);
        let mut lambda = (m_up - m_low) / a;
        lambda = lambda.min(if y[i] > 0.0 { c - alpha[i] } else { alpha[i] });
        lambda = lambda.min(if y[j] > 0.0 { alpha[j] } else { c - alpha[j] });
        alpha[i] += y[i] * lambda;
        alpha[j] -= y[j] * lambda;
        for t in 0..n {
            grad[t] += y[t] * lambda * (gram[t * n + i] - gram[t * n + j]);
        }
        updates += 1;
    }

    // recompute the pair bounds for the bias
    let mut m_up = f64::NEG_INFINITY;
    let mut m_low = f64::INFINITY;
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..n {
        let v = -y[t] * grad[t];
        if (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0) {
            m_up = m_up.max(v);
        }
        if (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0) {
            m_low = m_low.min(v);
        }
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += y[t] * grad[t];
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        -(m_up + m_low) / 2.0
    };

    // dual objective of the maximization form: sum(alpha) - 1/2 a'Qa,
    // using a'Qa = a'(grad + 1)
    let quad: f64 = alpha
        .iter()
        .zip(&grad)
        .map(|(&a, &g)| a * (g + 1.0))
        .sum();
    let dual_objective = alpha.iter().sum::<f64>() - 0.5 * quad;

    let mut support = Vec::new();
    let mut coef = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support.push(t);
            coef.push(alpha[t] * y[t]);
        }
    }
    Ok(SvmModel {
        support,
        coef,
        rho,
        dual_objective,
        pair_updates: updates,
        converged,
    })
}

/// Multi-label wrapper: one-vs-rest with ties resolved toward the
/// smaller label; two classes collapse to a single machine.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmClassifier {
    pub classes: Vec<i64>,
    models: Vec<SvmModel>,
}

impl SvmClassifier {
    pub fn train(gram: &[f64], labels: &[i64], c: f64) -> Result<Self> {
        let n = labels.len();
        if gram.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "kernel matrix has {} entries, expected {}",
                gram.len(),
                n * n
            )));
        }
        let mut classes: Vec<i64> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::Training(format!(
                "need at least 2 classes, found {}",
                classes.len()
            )));
        }
        let models = if classes.len() == 2 {
            let pos = *classes.last().unwrap();
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == pos { 1.0 } else { -1.0 })
                .collect();
            vec![svm_train(gram, &y, c)?]
        } else {
            classes
                .iter()
                .map(|&cls| {
                    let y: Vec<f64> = labels
                        .iter()
                        .map(|&l| if l == cls { 1.0 } else { -1.0 })
                        .collect();
                    svm_train(gram, &y, c)
                })
                .collect::<Result<Vec<_>>>()?
        };
        Ok(SvmClassifier { classes, models })
    }

    /// Predicts from a kernel row over the training points.
    pub fn predict(&self, row: &[f64]) -> i64 {
        if self.classes.len() == 2 {
            let f = self.models[0].decision(row);
            return if f > 0.0 {
                self.classes[1]
            } else {
                self.classes[0]
            };
        }
        let mut best = 0usize;
        let mut best_f = f64::NEG_INFINITY;
        for (ci, model) in self.models.iter().enumerate() {
            let f = model.decision(row);
            if f > best_f {
                best_f = f;
                best = ci;
            }
        }
        self.classes[best]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_gram(points: &[Vec<f64>]) -> Vec<f64> {
        let n = points.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] = points[i].iter().zip(&points[j]).map(|(a, b)| a * b).sum();
            }
        }
        gram
    }

    fn two_clusters() -> (Vec<Vec<f64>>, Vec<i64>) {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for i in 0..8 {
            let t = i as f64 * 0.1;
            points.push(vec![3.0 + t, 2.0 - t, 1.0]);
            labels.push(1);
            points.push(vec![-2.0 - t, -3.0 + t, 1.0]);
            labels.push(-1);
        }
        (points, labels)
    }

    #[test]
    fn separable_data_is_fit_exactly() {
        let (points, labels) = two_clusters();
        let gram = linear_gram(&points);
        let clf = SvmClassifier::train(&gram, &labels, 10.0).unwrap();
        let n = labels.len();
        for t in 0..n {
            let row: Vec<f64> = (0..n).map(|s| gram[t * n + s]).collect();
            assert_eq!(clf.predict(&row), labels[t], "point {t}");
        }
    }

    #[test]
    fn identity_kernel_separates_two_points() {
        let gram = [1.0, 0.0, 0.0, 1.0];
        let model = svm_train(&gram, &[1.0, -1.0], 1.0).unwrap();
        assert!(model.decision(&gram[0..2]) > 0.0);
        assert!(model.decision(&gram[2..4]) < 0.0);
    }

    #[test]
    fn optimum_satisfies_the_constraints() {
        let (points, labels) = two_clusters();
        let gram = linear_gram(&points);
        let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
        let model = svm_train(&gram, &y, 1.0).unwrap();
        assert!(model.converged);
        assert!(model.dual_objective > 0.0);
        // coef = alpha*y, so |coef| <= C and sum(coef) = y'alpha = 0
        assert!(model.coef.iter().all(|&c| c.abs() <= 1.0 + 1e-9));
        let balance: f64 = model.coef.iter().sum();
        assert!(balance.abs() < 1e-9, "class balance {balance}");
    }

    #[test]
    fn contradictory_labels_cap_accuracy_at_half() {
        // identical points, opposite labels: any classifier is constant
        let points: Vec<Vec<f64>> = (0..10).map(|_| vec![1.0, 2.0]).collect();
        let labels: Vec<i64> = (0..10).map(|i| if i < 5 { 1 } else { -1 }).collect();
        let gram = linear_gram(&points);
        let clf = SvmClassifier::train(&gram, &labels, 1.0).unwrap();
        let n = labels.len();
        let correct = (0..n)
            .filter(|&t| {
                let row: Vec<f64> = (0..n).map(|s| gram[t * n + s]).collect();
                clf.predict(&row) == labels[t]
            })
            .count();
        assert_eq!(correct, 5);
    }

    #[test]
    fn scaling_gram_and_inverse_scaling_c_preserves_decisions() {
        // substituting beta = alpha/4 maps one problem onto the other, so
        // decision values coincide exactly up to solver tolerance
        let (points, labels) = two_clusters();
        let gram = linear_gram(&points);
        let scaled: Vec<f64> = gram.iter().map(|&v| 4.0 * v).collect();
        let n = labels.len();
        let a = SvmClassifier::train(&gram, &labels, 2.0).unwrap();
        let b = SvmClassifier::train(&scaled, &labels, 0.5).unwrap();
        for t in 0..n {
            let row: Vec<f64> = (0..n).map(|s| gram[t * n + s]).collect();
            let srow: Vec<f64> = row.iter().map(|&v| 4.0 * v).collect();
            assert_eq!(a.predict(&row), b.predict(&srow));
        }
    }

    #[test]
    fn three_classes_one_vs_rest() {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        let centers = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)];
        for (ci, &(cx, cy)) in centers.iter().enumerate() {
            for i in 0..6 {
                let t = i as f64 * 0.2;
                points.push(vec![cx + t, cy - t, 1.0]);
                labels.push(ci as i64 * 3 + 1); // labels 1, 4, 7
            }
        }
        let gram = linear_gram(&points);
        let clf = SvmClassifier::train(&gram, &labels, 10.0).unwrap();
        assert_eq!(clf.classes, vec![1, 4, 7]);
        let n = labels.len();
        for t in 0..n {
            let row: Vec<f64> = (0..n).map(|s| gram[t * n + s]).collect();
            assert_eq!(clf.predict(&row), labels[t]);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let gram = linear_gram(&[vec![1.0], vec![2.0]]);
        assert!(matches!(
            SvmClassifier::train(&gram, &[3, 3], 1.0),
            Err(Error::Training(_))
        ));
        assert!(matches!(
            svm_train(&gram, &[1.0, 1.0], 1.0),
            Err(Error::Training(_))
        ));
        assert!(svm_train(&[1.0, 0.0, 0.0, 1.0], &[1.0, 2.0], 1.0).is_err());
        assert!(svm_train(&[1.0], &[1.0, -1.0], 1.0).is_err());
        assert!(svm_train(&[1.0, 0.0, 0.0, 1.0], &[1.0, -1.0], 0.0).is_err());
    }
}

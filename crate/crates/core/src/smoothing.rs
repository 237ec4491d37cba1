//! Estimators that turn graphlet count vectors into probability
//! distributions, with absolute discounting backed by a structural
//! fallback distribution.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::catalog::{base_distribution, BaseMode, Distribution, GraphletCatalog, GraphletDag, MIN_LEVEL};
use crate::error::{Error, Result};
use crate::pyp::PypConfig;
use crate::sampling::CountVector;

/// Discounts tried when searching for the best-performing smoothing
/// strength. Spans four orders of magnitude around typical count scales.
pub const DISCOUNT_GRID: [f64; 21] = [
    0.01, 0.1, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 25.0, 50.0, 100.0, 250.0,
    500.0, 1000.0, 2500.0, 5000.0, 10000.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothMethod {
    Mle,
    Laplace,
    /// Absolute discounting against a uniform fallback.
    KneserNey { d: f64 },
    /// Absolute discounting against the DAG push-forward fallback.
    StructuralKneserNey { d: f64 },
    /// Hierarchical Pitman-Yor posterior predictive.
    PitmanYor(PypConfig),
}

/// Knobs for [`structural_kneser_ney`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConfig {
    pub d: f64,
    pub renormalize: bool,
    pub base: BaseMode,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            d: 1.0,
            renormalize: true,
            base: BaseMode::ParentMle,
        }
    }
}

/// Relative frequencies. Fails on an all-zero vector.
pub fn mle(counts: &CountVector) -> Result<Distribution> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::Estimation(
            "cannot normalize an all-zero count vector".into(),
        ));
    }
    Ok(Distribution {
        level: counts.level,
        probs: counts
            .counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect(),
    })
}

/// Add-one estimate (c+1)/(N+M); defined even when all counts are zero.
pub fn laplace(counts: &CountVector) -> Result<Distribution> {
    let m = counts.counts.len();
    if m == 0 {
        return Err(Error::InvalidArgument("empty count vector".into()));
    }
    let denom = (counts.total() + m as u64) as f64;
    Ok(Distribution {
        level: counts.level,
        probs: counts
            .counts
            .iter()
            .map(|&c| (c + 1) as f64 / denom)
            .collect(),
    })
}

/// Absolute discounting with a strict retained-type count:
///
///   P(i) = max(c_i - d, 0)/N + T (d/N) base(i),   T = |{j : c_j > d}|
///
/// Types with c_j == d contribute no retained mass and no discount
/// transfer, so the raw estimate sums to 1 - S/N where S is the total
/// count on types with 0 < c_j <= d; `renormalize` rescales that away.
/// When no type survives the discount (T == 0, which covers N == 0)
/// every estimate falls back entirely to `base`.
pub fn kneser_ney(
    counts: &CountVector,
    base: &Distribution,
    d: f64,
    renormalize: bool,
) -> Result<Distribution> {
    if base.level != counts.level || base.probs.len() != counts.counts.len() {
        return Err(Error::InvalidArgument(format!(
            "base distribution (level {}, len {}) does not match counts (level {}, len {})",
            base.level,
            base.probs.len(),
            counts.level,
            counts.counts.len()
        )));
    }
    if !d.is_finite() || d < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "discount must be finite and non-negative, got {d}"
        )));
    }
    let retained = counts.counts.iter().filter(|&&c| (c as f64) > d).count();
    if retained == 0 {
        return Ok(base.clone());
    }
    let n = counts.total() as f64;
    let transfer = retained as f64 * d / n;
    let mut probs: Vec<f64> = counts
        .counts
        .iter()
        .zip(&base.probs)
        .map(|(&c, &b)| (c as f64 - d).max(0.0) / n + transfer * b)
        .collect();
    if renormalize {
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
    }
    Ok(Distribution {
        level: counts.level,
        probs,
    })
}

/// Kneser-Ney smoothing of `upper` counts against the fallback obtained
/// by normalizing `lower` counts and pushing them up the DAG.
pub fn structural_kneser_ney(
    upper: &CountVector,
    lower: &CountVector,
    dag: &GraphletDag,
    config: &SmoothingConfig,
) -> Result<Distribution> {
    let base = base_distribution(lower, dag, config.base, upper.level)?;
    kneser_ney(upper, &base, config.d, config.renormalize)
}

/// Writes one line per distribution: index, level, then sparse
/// "ordinal:probability" pairs, ascending, zeros omitted.
pub fn save_distributions(dists: &[Distribution], path: &Path) -> Result<()> {
    let mut text = String::new();
    for (idx, dist) in dists.iter().enumerate() {
        let _ = write!(text, "{idx} {}", dist.level);
        for (ord, &p) in dist.probs.iter().enumerate() {
            if p != 0.0 {
                let _ = write!(text, " {ord}:{p:.16e}");
            }
        }
        text.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a file written by [`save_distributions`].
pub fn load_distributions(path: &Path, catalog: &GraphletCatalog) -> Result<Vec<Distribution>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let fail = |msg: String| Error::Format(format!("{}:{}: {msg}", path.display(), no + 1));
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let idx: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail("bad index".into()))?;
        if idx != out.len() {
            return Err(fail(format!("index {idx}, expected {}", out.len())));
        }
        let level: u8 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail("bad level".into()))?;
        if !(MIN_LEVEL..=catalog.k_max()).contains(&level) {
            return Err(fail(format!("level {level} outside catalog range")));
        }
        let mut probs = vec![0.0; catalog.level_size(level)];
        let mut prev: Option<usize> = None;
        for pair in it {
            let (ord, p) = pair
                .split_once(':')
                .ok_or_else(|| fail(format!("bad pair {pair:?}")))?;
            let ord: usize = ord.parse().map_err(|_| fail(format!("bad ordinal in {pair:?}")))?;
            let p: f64 = p.parse().map_err(|_| fail(format!("bad probability in {pair:?}")))?;
            if ord >= probs.len() {
                return Err(fail(format!("ordinal {ord} out of range for level {level}")));
            }
            if prev.is_some_and(|q| q >= ord) {
                return Err(fail("ordinals not strictly ascending".into()));
            }
            if !p.is_finite() || !(0.0..=1.0 + 1e-9).contains(&p) {
                return Err(fail(format!("probability {p} out of range")));
            }
            probs[ord] = p;
            prev = Some(ord);
        }
        out.push(Distribution { level, probs });
    }
    Ok(out)
}

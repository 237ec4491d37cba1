//! Exhaustive enumeration and random sampling of connected induced
//! subgraphs, recorded as per-graphlet count vectors.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::canonical::{bits_from_masks, canonical_bits, masks_connected, CanonicalCode};
use crate::catalog::{GraphletCatalog, MIN_LEVEL};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphCollection};

/// Occurrence counts over the catalog ordinals of one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    pub level: u8,
    pub counts: Vec<u64>,
}

impl CountVector {
    pub fn zeros(level: u8, len: usize) -> Self {
        CountVector {
            level,
            counts: vec![0; len],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    /// Grow a connected set from a random start vertex by uniform
    /// frontier expansion. Fast, but occurrence-biased.
    Expand,
    /// Draw uniform k-subsets and keep the connected ones. Unbiased
    /// over connected induced subgraphs.
    Reject,
}

/// How per-graph count vectors are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountSource {
    Exhaustive,
    Sampled {
        n_samples: usize,
        method: SampleMethod,
        seed: u64,
    },
}

/// Attempts allowed per requested sample before giving up.
pub const SAMPLE_BUDGET_FACTOR: usize = 100;

/// splitmix64 finalizer; decorrelates seeds derived from a base seed.
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(salt.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn set_bit(mask: &mut [u64], v: u32) {
    mask[(v / 64) as usize] |= 1 << (v % 64);
}

fn test_bit(mask: &[u64], v: u32) -> bool {
    mask[(v / 64) as usize] >> (v % 64) & 1 == 1
}

fn check_level(k: u8, catalog: &GraphletCatalog) -> Result<()> {
    if !(MIN_LEVEL..=catalog.k_max()).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "subgraph size {k} outside catalog range 2..={}",
            catalog.k_max()
        )));
    }
    Ok(())
}

fn record_subgraph(g: &Graph, verts: &[u32], codes: &[CanonicalCode], counts: &mut [u64]) -> Result<()> {
    let k = verts.len();
    let mut adj = [0u8; 8];
    for i in 0..k {
        for j in i + 1..k {
            if g.has_edge(verts[i], verts[j]) {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    let bits = canonical_bits(k, bits_from_masks(k, &adj));
    let ord = codes
        .binary_search_by_key(&bits, |c| c.bits())
        .map_err(|_| {
            Error::Format(format!(
                "catalog has no graphlet {k}:{bits:x}; the catalog file may be stale"
            ))
        })?;
    counts[ord] += 1;
    Ok(())
}

fn extend_subgraph(
    g: &Graph,
    k: usize,
    v0: u32,
    sub: &mut Vec<u32>,
    mut ext: Vec<u32>,
    closed: &[u64],
    emit: &mut dyn FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    while let Some(w) = ext.pop() {
        sub.push(w);
        if sub.len() == k {
            emit(sub)?;
            sub.pop();
            continue;
        }
        // candidates exclusive to w: outside sub and its neighborhood as
        // they stood before w joined
        let mut child_ext = ext.clone();
        let mut child_closed = closed.to_vec();
        set_bit(&mut child_closed, w);
        for &u in g.neighbors(w) {
            if u > v0 && !test_bit(closed, u) {
                child_ext.push(u);
            }
            set_bit(&mut child_closed, u);
        }
        extend_subgraph(g, k, v0, sub, child_ext, &child_closed, emit)?;
        sub.pop();
    }
    Ok(())
}

/// Counts every connected induced k-vertex subgraph exactly once.
/// Each subgraph is discovered from its minimum vertex by growing with
/// exclusive-neighborhood candidates only, which rules out revisits.
pub fn enumerate_connected_subgraphs(
    g: &Graph,
    k: u8,
    catalog: &GraphletCatalog,
) -> Result<CountVector> {
    check_level(k, catalog)?;
    let codes = catalog.level(k);
    let mut counts = vec![0u64; codes.len()];
    let n = g.num_vertices();
    let k = k as usize;
    let words = n.div_ceil(64);
    let mut sub = Vec::with_capacity(k);
    for v in 0..n {
        let v = v as u32;
        let mut closed = vec![0u64; words];
        set_bit(&mut closed, v);
        let mut ext = Vec::new();
        for &u in g.neighbors(v) {
            set_bit(&mut closed, u);
            if u > v {
                ext.push(u);
            }
        }
        sub.push(v);
        let mut emit = |verts: &[u32]| record_subgraph(g, verts, codes, &mut counts);
        if k == 1 {
            emit(&sub)?;
        } else {
            extend_subgraph(g, k, v, &mut sub, ext, &closed, &mut emit)?;
        }
        sub.pop();
    }
    Ok(CountVector {
        level: k as u8,
        counts,
    })
}

fn expand_attempt(g: &Graph, k: usize, rng: &mut ChaCha8Rng, sub: &mut Vec<u32>) -> bool {
    let n = g.num_vertices();
    sub.clear();
    let words = n.div_ceil(64);
    let mut in_sub = vec![0u64; words];
    let mut on_frontier = vec![0u64; words];
    let mut frontier: Vec<u32> = Vec::new();
    let start = rng.gen_range(0..n) as u32;
    sub.push(start);
    set_bit(&mut in_sub, start);
    for &u in g.neighbors(start) {
        set_bit(&mut on_frontier, u);
        frontier.push(u);
    }
    while sub.len() < k {
        if frontier.is_empty() {
            return false;
        }
        let pick = rng.gen_range(0..frontier.len());
        let w = frontier.swap_remove(pick);
        sub.push(w);
        set_bit(&mut in_sub, w);
        for &u in g.neighbors(w) {
            if !test_bit(&in_sub, u) && !test_bit(&on_frontier, u) {
                set_bit(&mut on_frontier, u);
                frontier.push(u);
            }
        }
    }
    true
}

fn reject_attempt(g: &Graph, k: usize, rng: &mut ChaCha8Rng, sub: &mut Vec<u32>) -> bool {
    sub.clear();
    sub.extend(
        rand::seq::index::sample(rng, g.num_vertices(), k)
            .into_iter()
            .map(|v| v as u32),
    );
    let mut adj = [0u8; 8];
    for i in 0..k {
        for j in i + 1..k {
            if g.has_edge(sub[i], sub[j]) {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    masks_connected(k, &adj)
}

/// Draws `n_samples` connected induced k-subgraphs, spending at most
/// 100 attempts per requested sample across the whole run.
pub fn sample_connected_subgraphs(
    g: &Graph,
    k: u8,
    n_samples: usize,
    method: SampleMethod,
    seed: u64,
    catalog: &GraphletCatalog,
) -> Result<CountVector> {
    check_level(k, catalog)?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let codes = catalog.level(k);
    let mut counts = vec![0u64; codes.len()];
    let k = k as usize;
    if g.num_vertices() < k {
        return Err(Error::SamplingExhausted {
            attempts: 0,
            accepted: 0,
            requested: n_samples as u64,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = (SAMPLE_BUDGET_FACTOR * n_samples) as u64;
    let mut accepted = 0u64;
    let mut attempts = 0u64;
    let mut sub = Vec::with_capacity(k);
    while accepted < n_samples as u64 {
        if attempts == budget {
            return Err(Error::SamplingExhausted {
                attempts,
                accepted,
                requested: n_samples as u64,
            });
        }
        attempts += 1;
        let ok = match method {
            SampleMethod::Expand => expand_attempt(g, k, &mut rng, &mut sub),
            SampleMethod::Reject => reject_attempt(g, k, &mut rng, &mut sub),
        };
        if ok {
            record_subgraph(g, &sub, codes, &mut counts)?;
            accepted += 1;
        }
    }
    Ok(CountVector {
        level: k as u8,
        counts,
    })
}

/// Per-graph count vectors for a whole collection, in graph order.
/// Sampled counts derive one decorrelated seed per (level, graph) pair,
/// so reruns reproduce byte-identical results.
pub fn count_collection(
    collection: &GraphCollection,
    k: u8,
    source: CountSource,
    catalog: &GraphletCatalog,
) -> Result<Vec<CountVector>> {
    check_level(k, catalog)?;
    collection
        .graphs
        .par_iter()
        .enumerate()
        .map(|(idx, g)| match source {
            CountSource::Exhaustive => enumerate_connected_subgraphs(g, k, catalog),
            CountSource::Sampled {
                n_samples,
                method,
                seed,
            } => {
                let graph_seed = mix_seed(mix_seed(seed, k as u64), idx as u64);
                sample_connected_subgraphs(g, k, n_samples, method, graph_seed, catalog)
                    .map_err(|e| match e {
                        Error::SamplingExhausted {
                            attempts,
                            accepted,
                            requested,
                        } => Error::Estimation(format!(
                            "graph {idx}: sampling exhausted after {attempts} attempts \
                             ({accepted}/{requested} accepted)"
                        )),
                        other => other,
                    })
            }
        })
        .collect()
}

/// Nonzero counts ranked by descending frequency; ties keep ordinal order.
pub fn powerlaw_table(counts: &CountVector) -> Result<Vec<(u32, u64)>> {
    let mut nonzero: Vec<(usize, u64)> = counts
        .counts
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .collect();
    if nonzero.is_empty() {
        return Err(Error::Estimation(
            "cannot rank an all-zero count vector".into(),
        ));
    }
    nonzero.sort_by_key(|&(ord, c)| (std::cmp::Reverse(c), ord));
    Ok(nonzero
        .into_iter()
        .enumerate()
        .map(|(i, (_, c))| (i as u32 + 1, c))
        .collect())
}

/// Least-squares slope of ln(frequency) against ln(rank).
pub fn log_log_slope(table: &[(u32, u64)]) -> Result<f64> {
    if table.len() < 2 {
        return Err(Error::Estimation(format!(
            "need at least 2 ranked frequencies for a slope, got {}",
            table.len()
        )));
    }
    let pts: Vec<(f64, f64)> = table
        .iter()
        .map(|&(r, f)| ((r as f64).ln(), (f as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let var: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(cov / var)
}

/// Writes one line per graph: index, level, then sparse
/// "ordinal:count" pairs in ascending ordinal order.
pub fn save_counts(vectors: &[CountVector], path: &Path) -> Result<()> {
    let mut text = String::new();
    for (idx, v) in vectors.iter().enumerate() {
        let _ = write!(text, "{idx} {}", v.level);
        for (ord, &c) in v.counts.iter().enumerate() {
            if c > 0 {
                let _ = write!(text, " {ord}:{c}");
            }
        }
        text.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a file written by [`save_counts`]; the catalog supplies the
/// dense length of each level.
pub fn load_counts(path: &Path, catalog: &GraphletCatalog) -> Result<Vec<CountVector>> {
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
            .ok_or_else(|| fail("bad graph index".into()))?;
        if idx != out.len() {
            return Err(fail(format!("graph index {idx}, expected {}", out.len())));
        }
        let level: u8 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail("bad level".into()))?;
        if !(MIN_LEVEL..=catalog.k_max()).contains(&level) {
            return Err(fail(format!("level {level} outside catalog range")));
        }
        let mut counts = vec![0u64; catalog.level_size(level)];
        let mut prev: Option<usize> = None;
        for pair in it {
            let (ord, c) = pair
                .split_once(':')
                .ok_or_else(|| fail(format!("bad pair {pair:?}")))?;
            let ord: usize = ord.parse().map_err(|_| fail(format!("bad ordinal in {pair:?}")))?;
            let c: u64 = c.parse().map_err(|_| fail(format!("bad count in {pair:?}")))?;
            if ord >= counts.len() {
                return Err(fail(format!("ordinal {ord} out of range for level {level}")));
            }
            if prev.is_some_and(|p| p >= ord) {
                return Err(fail("ordinals not strictly ascending".into()));
            }
            if c == 0 {
                return Err(fail("explicit zero count".into()));
            }
            counts[ord] = c;
            prev = Some(ord);
        }
        out.push(CountVector { level, counts });
    }
    Ok(out)
}

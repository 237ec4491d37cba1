//! Graphlet catalog and the delete-one-node DAG.
//!
//! The catalog holds every connected non-isomorphic graph per size level.
//! Level k+1 is generated from level k by attaching a fresh vertex to each
//! non-empty neighbor subset; every connected graph on k+1 vertices arises
//! this way because deleting a non-cut vertex leaves a connected graph.
//!
//! The DAG links a parent graphlet at level k to a child at level k+1 with
//! multiplicity s = the number of child vertices whose deletion leaves a
//! connected graph isomorphic to the parent. Deletions that disconnect the
//! child carry no edge. Edge weights normalize s over all children of the
//! parent, so pushing a level-k distribution through the weights yields a
//! valid level-(k+1) distribution.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::canonical::{
    bits_from_masks, canonical_bits, masks_connected, masks_from_bits, CanonicalCode,
};
use crate::error::{Error, Result};
use crate::sampling::CountVector;
use crate::smoothing;

pub const MIN_LEVEL: u8 = 2;
pub const MAX_LEVEL: u8 = 8;

/// All connected non-isomorphic graphlet types for levels 2..=k_max,
/// with ordinals assigned by ascending canonical code.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphletCatalog {
    k_max: u8,
    levels: Vec<Vec<CanonicalCode>>,
    index: HashMap<CanonicalCode, (u8, u32)>,
}

impl GraphletCatalog {
    pub fn k_max(&self) -> u8 {
        self.k_max
    }

    pub fn level(&self, k: u8) -> &[CanonicalCode] {
        &self.levels[(k - MIN_LEVEL) as usize]
    }

    pub fn level_size(&self, k: u8) -> usize {
        self.level(k).len()
    }

    pub fn has_level(&self, k: u8) -> bool {
        (MIN_LEVEL..=self.k_max).contains(&k)
    }

    /// (level, ordinal) of a code, if cataloged.
    pub fn position(&self, code: CanonicalCode) -> Option<(u8, u32)> {
        self.index.get(&code).copied()
    }

    pub fn ordinal(&self, code: CanonicalCode) -> Option<u32> {
        self.position(code).map(|(_, ord)| ord)
    }

    pub fn code(&self, level: u8, ordinal: u32) -> CanonicalCode {
        self.level(level)[ordinal as usize]
    }

    fn from_levels(k_max: u8, levels: Vec<Vec<CanonicalCode>>) -> Self {
        let mut index = HashMap::new();
        for (li, codes) in levels.iter().enumerate() {
            for (ord, &code) in codes.iter().enumerate() {
                index.insert(code, (li as u8 + MIN_LEVEL, ord as u32));
            }
        }
        GraphletCatalog {
            k_max,
            levels,
            index,
        }
    }
}

/// Neighbor masks of `code`'s graph with vertex `v` deleted and the
/// remaining vertices repacked densely.
fn delete_vertex(n: usize, adj: &[u8; 8], v: usize) -> [u8; 8] {
    let mut out = [0u8; 8];
    for old in 0..n {
        if old == v {
            continue;
        }
        let nu = old - (old > v) as usize;
        let mut m = adj[old] & !(1 << v);
        while m != 0 {
            let w = m.trailing_zeros() as usize;
            m &= m - 1;
            out[nu] |= 1 << (w - (w > v) as usize);
        }
    }
    out
}

/// Builds the catalog for levels 2..=k_max by vertex extension with
/// canonical deduplication.
pub fn build_catalog(k_max: u8) -> Result<GraphletCatalog> {
    if !(3..=MAX_LEVEL).contains(&k_max) {
        return Err(Error::InvalidArgument(format!(
            "k_max must lie in 3..={MAX_LEVEL}, got {k_max}"
        )));
    }
    let mut levels: Vec<Vec<CanonicalCode>> = vec![vec![CanonicalCode::try_new(2, 1)?]];
    for k in MIN_LEVEL..k_max {
        let n = k as usize;
        let extended: HashSet<u32> = levels[(k - MIN_LEVEL) as usize]
            .par_iter()
            .map(|code| {
                let adj = masks_from_bits(n, code.bits());
                let mut local = HashSet::new();
                for subset in 1u16..1 << n {
                    let subset = subset as u8;
                    let mut grown = adj;
                    grown[n] = subset;
                    let mut m = subset;
                    while m != 0 {
                        let v = m.trailing_zeros() as usize;
                        m &= m - 1;
                        grown[v] |= 1 << n;
                    }
                    let raw = bits_from_masks(n + 1, &grown);
                    local.insert(canonical_bits(n + 1, raw));
                }
                local
            })
            .reduce(HashSet::new, |mut a, b| {
                a.extend(b);
                a
            });
        let mut codes: Vec<u32> = extended.into_iter().collect();
        codes.sort_unstable();
        levels.push(
            codes
                .into_iter()
                .map(|bits| CanonicalCode::try_new(k + 1, bits))
                .collect::<Result<_>>()?,
        );
    }
    Ok(GraphletCatalog::from_levels(k_max, levels))
}

impl CanonicalCode {
    pub(crate) fn try_new(n: u8, bits: u32) -> Result<Self> {
        format!("{n}:{bits:x}").parse()
    }
}

/// Weighted edge to a child graphlet one level up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChildEdge {
    pub child: u32,
    pub s: u32,
    pub w: f64,
}

/// Weighted edge to a parent graphlet one level down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParentEdge {
    pub parent: u32,
    pub s: u32,
    pub w: f64,
}

/// Layered DAG of single-vertex deletions between consecutive catalog
/// levels, stored in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphletDag {
    k_max: u8,
    level_sizes: Vec<usize>,
    children: Vec<Vec<Vec<ChildEdge>>>,
    parents: Vec<Vec<Vec<ParentEdge>>>,
}

impl GraphletDag {
    pub fn k_max(&self) -> u8 {
        self.k_max
    }

    pub fn level_size(&self, k: u8) -> usize {
        self.level_sizes[(k - MIN_LEVEL) as usize]
    }

    /// Edges from each parent ordinal at `level` to level+1.
    pub fn children(&self, level: u8) -> &[Vec<ChildEdge>] {
        &self.children[(level - MIN_LEVEL) as usize]
    }

    /// Edges from each child ordinal at `level` down to level-1.
    pub fn parents(&self, level: u8) -> &[Vec<ParentEdge>] {
        &self.parents[(level - MIN_LEVEL - 1) as usize]
    }

    pub fn has_children(&self, level: u8) -> bool {
        level >= MIN_LEVEL && level < self.k_max
    }
}

/// Builds the deletion DAG over all consecutive level pairs of the catalog.
pub fn build_dag(catalog: &GraphletCatalog) -> GraphletDag {
    let k_max = catalog.k_max();
    let mut parents: Vec<Vec<Vec<ParentEdge>>> = Vec::new();
    let mut children: Vec<Vec<Vec<ChildEdge>>> = Vec::new();

    for k in MIN_LEVEL + 1..=k_max {
        let n = k as usize;
        // per child: distinct parents with deletion multiplicities
        let raw: Vec<Vec<(u32, u32)>> = catalog
            .level(k)
            .par_iter()
            .map(|code| {
                let adj = masks_from_bits(n, code.bits());
                let mut s_by_parent: BTreeMap<u32, u32> = BTreeMap::new();
                for v in 0..n {
                    let rest = delete_vertex(n, &adj, v);
                    if !masks_connected(n - 1, &rest) {
                        continue;
                    }
                    let parent_bits = canonical_bits(n - 1, bits_from_masks(n - 1, &rest));
                    let parent_code = CanonicalCode::try_new(k - 1, parent_bits)
                        .expect("deletion yields a valid code");
                    let ordinal = catalog
                        .ordinal(parent_code)
                        .expect("connected deletion result is cataloged");
                    *s_by_parent.entry(ordinal).or_insert(0) += 1;
                }
                s_by_parent.into_iter().collect()
            })
            .collect();

        // normalize s over each parent's full child set
        let parent_count = catalog.level_size(k - 1);
        let mut totals = vec![0u64; parent_count];
        for edges in &raw {
            for &(parent, s) in edges {
                totals[parent as usize] += s as u64;
            }
        }
        let mut child_lists: Vec<Vec<ChildEdge>> = vec![Vec::new(); parent_count];
        let mut parent_lists: Vec<Vec<ParentEdge>> = Vec::with_capacity(raw.len());
        for (child, edges) in raw.into_iter().enumerate() {
            let mut list = Vec::with_capacity(edges.len());
            for (parent, s) in edges {
                let w = s as f64 / totals[parent as usize] as f64;
                list.push(ParentEdge { parent, s, w });
                child_lists[parent as usize].push(ChildEdge {
                    child: child as u32,
                    s,
                    w,
                });
            }
            parent_lists.push(list);
        }
        parents.push(parent_lists);
        children.push(child_lists);
    }

    GraphletDag {
        k_max,
        level_sizes: (MIN_LEVEL..=k_max).map(|k| catalog.level_size(k)).collect(),
        children,
        parents,
    }
}

/// Probabilities over the catalog ordinals of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub level: u8,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn uniform(level: u8, len: usize) -> Self {
        Distribution {
            level,
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Transports a level-k distribution to level k+1 along the DAG weights:
/// each child receives the w-weighted share of every parent's mass.
/// The output sums to 1 because each parent's child weights do.
pub fn push_forward(dist: &Distribution, dag: &GraphletDag) -> Result<Distribution> {
    if !dag.has_children(dist.level) {
        return Err(Error::InvalidArgument(format!(
            "no DAG edges out of level {} (k_max {})",
            dist.level,
            dag.k_max()
        )));
    }
    if dist.probs.len() != dag.level_size(dist.level) {
        return Err(Error::InvalidArgument(format!(
            "distribution length {} does not match level {} size {}",
            dist.probs.len(),
            dist.level,
            dag.level_size(dist.level)
        )));
    }
    let mut out = vec![0.0; dag.level_size(dist.level + 1)];
    for (parent, edges) in dag.children(dist.level).iter().enumerate() {
        let mass = dist.probs[parent];
        if mass == 0.0 {
            continue;
        }
        for e in edges {
            out[e.child as usize] += e.w * mass;
        }
    }
    Ok(Distribution {
        level: dist.level + 1,
        probs: out,
    })
}

/// How the fallback distribution for a level is derived from lower counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseMode {
    /// One push-forward step from the counts one level below the target.
    #[default]
    ParentMle,
    /// Repeated push-forward from counts at any lower level (typically 2).
    Recursive,
}

/// Fallback distribution at `target_level` from observed counts below it:
/// normalize the counts and push the result up the DAG.
pub fn base_distribution(
    counts: &CountVector,
    dag: &GraphletDag,
    mode: BaseMode,
    target_level: u8,
) -> Result<Distribution> {
    if target_level > dag.k_max() || target_level <= counts.level {
        return Err(Error::InvalidArgument(format!(
            "cannot derive a level-{target_level} base from level-{} counts (k_max {})",
            counts.level,
            dag.k_max()
        )));
    }
    if mode == BaseMode::ParentMle && counts.level + 1 != target_level {
        return Err(Error::InvalidArgument(format!(
            "parent-mle base needs counts one level below {target_level}, got level {}",
            counts.level
        )));
    }
    let mut dist = smoothing::mle(counts)?;
    while dist.level < target_level {
        dist = push_forward(&dist, dag)?;
    }
    Ok(dist)
}

fn format_weight(w: f64) -> String {
    format!("{w:.16e}")
}

/// Writes catalog plus DAG as versioned text. One line per graphlet
/// ("level:hex ordinal"), then one line per DAG edge
/// ("E parent_level:parent_hex child_hex s w").
pub fn save_catalog(catalog: &GraphletCatalog, dag: &GraphletDag, path: &Path) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "graphlet-catalog v1 kmax={}", catalog.k_max());
    for k in MIN_LEVEL..=catalog.k_max() {
        for (ord, code) in catalog.level(k).iter().enumerate() {
            let _ = writeln!(text, "{code} {ord}");
        }
    }
    for k in MIN_LEVEL..catalog.k_max() {
        for (parent, edges) in dag.children(k).iter().enumerate() {
            let parent_code = catalog.code(k, parent as u32);
            for e in edges {
                let child_code = catalog.code(k + 1, e.child);
                let _ = writeln!(
                    text,
                    "E {parent_code} {:x} {} {}",
                    child_code.bits(),
                    e.s,
                    format_weight(e.w)
                );
            }
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a file written by [`save_catalog`], validating codes, ordinals and
/// edge weights.
pub fn load_catalog(path: &Path) -> Result<(GraphletCatalog, GraphletDag)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty catalog file", path.display())))?;
    let k_max = header
        .strip_prefix("graphlet-catalog v1 kmax=")
        .and_then(|s| s.parse::<u8>().ok())
        .ok_or_else(|| Error::Format(format!("{}: bad header {header:?}", path.display())))?;
    if !(3..=MAX_LEVEL).contains(&k_max) {
        return Err(Error::Format(format!(
            "{}: k_max {k_max} out of range",
            path.display()
        )));
    }

    let mut levels: Vec<Vec<CanonicalCode>> =
        vec![Vec::new(); (k_max - MIN_LEVEL + 1) as usize];
    let mut edge_lines: Vec<(CanonicalCode, CanonicalCode, u32)> = Vec::new();
    for (no, line) in lines.enumerate() {
        let fail = |msg: &str| Error::Format(format!("{}:{}: {msg}", path.display(), no + 2));
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("E ") {
            let mut it = rest.split_whitespace();
            let (parent, child_hex, s, w) = match (it.next(), it.next(), it.next(), it.next(), it.next())
            {
                (Some(p), Some(c), Some(s), Some(w), None) => (p, c, s, w),
                _ => return Err(fail("bad edge line")),
            };
            let parent: CanonicalCode = parent.parse()?;
            let child_bits = u32::from_str_radix(child_hex, 16)
                .map_err(|_| fail("bad child code"))?;
            let child = CanonicalCode::try_new(parent.num_vertices() + 1, child_bits)?;
            let s: u32 = s.parse().map_err(|_| fail("bad multiplicity"))?;
            let w: f64 = w.parse().map_err(|_| fail("bad weight"))?;
            if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                return Err(fail("weight out of range"));
            }
            edge_lines.push((parent, child, s));
            let _ = w; // recomputed below and cross-checked
            continue;
        }
        let mut it = line.split_whitespace();
        let (code, ordinal) = match (it.next(), it.next(), it.next()) {
            (Some(c), Some(o), None) => (c, o),
            _ => return Err(fail("bad graphlet line")),
        };
        let code: CanonicalCode = code.parse()?;
        let ordinal: usize = ordinal.parse().map_err(|_| fail("bad ordinal"))?;
        let k = code.num_vertices();
        if k > k_max {
            return Err(fail("graphlet level above k_max"));
        }
        let level = &mut levels[(k - MIN_LEVEL) as usize];
        if ordinal != level.len() {
            return Err(fail("ordinal out of sequence"));
        }
        if canonical_bits(k as usize, code.bits()) != code.bits() {
            return Err(fail("code is not canonical"));
        }
        if !masks_connected(k as usize, &masks_from_bits(k as usize, code.bits())) {
            return Err(fail("code decodes to a disconnected graph"));
        }
        level.push(code);
    }

    for (li, level) in levels.iter().enumerate() {
        if level.is_empty() {
            return Err(Error::Format(format!(
                "{}: level {} missing",
                path.display(),
                li as u8 + MIN_LEVEL
            )));
        }
        if level.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format(format!(
                "{}: level {} codes not strictly ascending",
                path.display(),
                li as u8 + MIN_LEVEL
            )));
        }
    }
    let catalog = GraphletCatalog::from_levels(k_max, levels);

    // regroup edges per level pair
    let mut per_child: Vec<Vec<Vec<(u32, u32)>>> = (MIN_LEVEL + 1..=k_max)
        .map(|k| vec![Vec::new(); catalog.level_size(k)])
        .collect();
    for (parent, child, s) in edge_lines {
        let (pk, pord) = catalog
            .position(parent)
            .ok_or_else(|| Error::Format(format!("{}: edge parent {parent} not cataloged", path.display())))?;
        let (_, cord) = catalog
            .position(child)
            .ok_or_else(|| Error::Format(format!("{}: edge child {child} not cataloged", path.display())))?;
        per_child[(pk - MIN_LEVEL) as usize][cord as usize].push((pord, s));
    }

    let mut parents: Vec<Vec<Vec<ParentEdge>>> = Vec::new();
    let mut children: Vec<Vec<Vec<ChildEdge>>> = Vec::new();
    for (li, child_edges) in per_child.into_iter().enumerate() {
        let k = li as u8 + MIN_LEVEL + 1;
        let parent_count = catalog.level_size(k - 1);
        let mut totals = vec![0u64; parent_count];
        for edges in &child_edges {
            for &(parent, s) in edges {
                totals[parent as usize] += s as u64;
            }
        }
        let mut child_lists: Vec<Vec<ChildEdge>> = vec![Vec::new(); parent_count];
        let mut parent_lists: Vec<Vec<ParentEdge>> = Vec::with_capacity(child_edges.len());
        for (child, mut edges) in child_edges.into_iter().enumerate() {
            if edges.is_empty() {
                return Err(Error::Format(format!(
                    "{}: graphlet {} has no parents",
                    path.display(),
                    catalog.code(k, child as u32)
                )));
            }
            edges.sort_unstable();
            let mut list = Vec::with_capacity(edges.len());
            for (parent, s) in edges {
                if totals[parent as usize] == 0 {
                    return Err(Error::Format(format!(
                        "{}: zero multiplicity total for a parent at level {}",
                        path.display(),
                        k - 1
                    )));
                }
                let w = s as f64 / totals[parent as usize] as f64;
                list.push(ParentEdge { parent, s, w });
                child_lists[parent as usize].push(ChildEdge {
                    child: child as u32,
                    s,
                    w,
                });
            }
            parent_lists.push(list);
        }
        for (parent, list) in child_lists.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::Format(format!(
                    "{}: graphlet {} has no children",
                    path.display(),
                    catalog.code(k - 1, parent as u32)
                )));
            }
        }
        parents.push(parent_lists);
        children.push(child_lists);
    }

    let dag = GraphletDag {
        k_max,
        level_sizes: (MIN_LEVEL..=k_max).map(|k| catalog.level_size(k)).collect(),
        children,
        parents,
    };
    Ok((catalog, dag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    use super::Distribution;
    use crate::canonical::pair_count;

    fn catalog5() -> (GraphletCatalog, GraphletDag) {
        let catalog = build_catalog(5).unwrap();
        let dag = build_dag(&catalog);
        (catalog, dag)
    }

    #[test]
    fn level_sizes_up_to_five() {
        let (catalog, _) = catalog5();
        assert_eq!(catalog.level_size(2), 1);
        assert_eq!(catalog.level_size(3), 2);
        assert_eq!(catalog.level_size(4), 6);
        assert_eq!(catalog.level_size(5), 21);
    }

    #[test]
    fn level_three_is_path_and_triangle() {
        let catalog = build_catalog(3).unwrap();
        let codes: Vec<String> = catalog.level(3).iter().map(|c| c.to_string()).collect();
        assert_eq!(codes, vec!["3:3", "3:7"]);
    }

    #[test]
    fn k_max_bounds() {
        assert!(build_catalog(2).is_err());
        assert!(build_catalog(9).is_err());
    }

    /// Independent oracle: enumerate every labeled graph on n vertices,
    /// keep the connected ones, deduplicate by canonical code.
    fn exhaustive_level(n: usize) -> Vec<u32> {
        let p = pair_count(n);
        let mut set = HashSet::new();
        for raw in 0..1u32 << p {
            if masks_connected(n, &masks_from_bits(n, raw)) {
                set.insert(canonical_bits(n, raw));
            }
        }
        let mut v: Vec<u32> = set.into_iter().collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn extension_matches_exhaustive_enumeration_to_five() {
        let (catalog, _) = catalog5();
        for k in 3..=5u8 {
            let by_extension: Vec<u32> =
                catalog.level(k).iter().map(|c| c.bits()).collect();
            assert_eq!(by_extension, exhaustive_level(k as usize), "level {k}");
        }
    }

    #[test]
    fn dag_edges_of_the_smallest_levels() {
        let (catalog, dag) = catalog5();
        let p3 = catalog.ordinal("3:3".parse().unwrap()).unwrap();
        let k3 = catalog.ordinal("3:7".parse().unwrap()).unwrap();

        let p3_parents = &dag.parents(3)[p3 as usize];
        assert_eq!(p3_parents.len(), 1);
        assert_eq!((p3_parents[0].parent, p3_parents[0].s), (0, 2));

        let k3_parents = &dag.parents(3)[k3 as usize];
        assert_eq!(k3_parents.len(), 1);
        assert_eq!((k3_parents[0].parent, k3_parents[0].s), (0, 3));

        let k2_children = &dag.children(2)[0];
        assert_eq!(k2_children.len(), 2);
        let by_child: HashMap<u32, f64> =
            k2_children.iter().map(|e| (e.child, e.w)).collect();
        assert_eq!(by_child[&p3], 0.4);
        assert_eq!(by_child[&k3], 0.6);
    }

    #[test]
    fn push_forward_point_mass_on_k2() {
        let (_, dag) = catalog5();
        let dist = Distribution {
            level: 2,
            probs: vec![1.0],
        };
        let up = push_forward(&dist, &dag).unwrap();
        assert_eq!(up.level, 3);
        assert_eq!(up.probs, vec![0.4, 0.6]);
    }

    #[test]
    fn push_forward_keeps_total_mass() {
        let (_, dag) = catalog5();
        let up = push_forward(
            &Distribution {
                level: 3,
                probs: vec![0.5, 0.5],
            },
            &dag,
        )
        .unwrap();
        assert_eq!(up.probs.len(), 6);
        assert!((up.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn push_forward_routes_single_parent_mass_through_its_weights() {
        let (_, dag) = catalog5();
        let up = push_forward(
            &Distribution {
                level: 3,
                probs: vec![1.0, 0.0],
            },
            &dag,
        )
        .unwrap();
        for (child, &p) in up.probs.iter().enumerate() {
            let w = dag.children(3)[0]
                .iter()
                .find(|e| e.child == child as u32)
                .map_or(0.0, |e| e.w);
            assert!((p - w).abs() < 1e-15);
        }
        assert!((up.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn push_forward_level_mismatch_is_rejected() {
        let (_, dag) = catalog5();
        let top = Distribution::uniform(5, 21);
        assert!(matches!(
            push_forward(&top, &dag),
            Err(Error::InvalidArgument(_))
        ));
        let short = Distribution {
            level: 3,
            probs: vec![1.0],
        };
        assert!(matches!(
            push_forward(&short, &dag),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn push_forward_random_distributions_stay_normalized() {
        let (_, dag) = catalog5();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for level in 2..=4u8 {
            for _ in 0..100 {
                let mut probs: Vec<f64> =
                    (0..dag.level_size(level)).map(|_| rng.gen::<f64>()).collect();
                let total: f64 = probs.iter().sum();
                probs.iter_mut().for_each(|p| *p /= total);
                let up = push_forward(&Distribution { level, probs }, &dag).unwrap();
                assert!((up.sum() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn multiplicity_sums_are_bounded_by_child_size() {
        let (catalog, dag) = catalog5();
        for k in 3..=5u8 {
            for (child, edges) in dag.parents(k).iter().enumerate() {
                assert!(!edges.is_empty(), "level {k} child {child} has no parent");
                let total: u32 = edges.iter().map(|e| e.s).sum();
                assert!(total <= k as u32);
                let code = catalog.code(k, child as u32);
                if code.bits() == (1 << pair_count(k as usize)) - 1 {
                    // complete graph: every deletion stays connected
                    assert_eq!(total, k as u32);
                }
            }
        }
    }

    #[test]
    fn child_weights_normalize_per_parent() {
        let (_, dag) = catalog5();
        for k in 2..=4u8 {
            for edges in dag.children(k) {
                let total: f64 = edges.iter().map(|e| e.w).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn base_distribution_modes() {
        let (_, dag) = catalog5();
        let level2 = CountVector {
            level: 2,
            counts: vec![7],
        };
        for mode in [BaseMode::ParentMle, BaseMode::Recursive] {
            let base = base_distribution(&level2, &dag, mode, 3).unwrap();
            assert_eq!(base.probs, vec![0.4, 0.6]);
        }

        let level3 = CountVector {
            level: 3,
            counts: vec![1, 1],
        };
        let base = base_distribution(&level3, &dag, BaseMode::ParentMle, 4).unwrap();
        let expect = push_forward(
            &Distribution {
                level: 3,
                probs: vec![0.5, 0.5],
            },
            &dag,
        )
        .unwrap();
        assert_eq!(base, expect);

        // recursive mode climbs multiple levels
        let deep = base_distribution(&level2, &dag, BaseMode::Recursive, 5).unwrap();
        assert_eq!(deep.level, 5);
        assert!((deep.sum() - 1.0).abs() < 1e-9);

        // parent-mle refuses a gap wider than one level
        assert!(matches!(
            base_distribution(&level2, &dag, BaseMode::ParentMle, 4),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn base_distribution_zero_counts_fail() {
        let (_, dag) = catalog5();
        let zero = CountVector {
            level: 3,
            counts: vec![0, 0],
        };
        assert!(matches!(
            base_distribution(&zero, &dag, BaseMode::ParentMle, 4),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let (catalog, dag) = catalog5();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("catalog.txt");
        save_catalog(&catalog, &dag, &path).unwrap();
        let (catalog2, dag2) = load_catalog(&path).unwrap();
        assert_eq!(catalog, catalog2);
        assert_eq!(dag, dag2);
        // rebuilding the DAG from the loaded catalog changes nothing
        assert_eq!(build_dag(&catalog2), dag2);
    }

    #[test]
    fn load_rejects_truncated_file() {
        let (catalog, dag) = catalog5();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("catalog.txt");
        save_catalog(&catalog, &dag, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let truncated = lines[..lines.len() / 2].join("\n");
        std::fs::write(&path, truncated).unwrap();
        assert!(matches!(load_catalog(&path), Err(Error::Format(_))));
    }

    #[test]
    fn load_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("catalog.txt");
        std::fs::write(&path, "graphlet-catalog v2 kmax=5\n").unwrap();
        assert!(matches!(load_catalog(&path), Err(Error::Format(_))));
    }

    #[test]
    fn save_is_deterministic() {
        let (catalog, dag) = catalog5();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        let b = dir.path().join("b.txt");
        save_catalog(&catalog, &dag, &a).unwrap();
        save_catalog(&catalog, &dag, &b).unwrap();
        assert_eq!(
            std::fs::read(&a).unwrap(),
            std::fs::read(&b).unwrap()
        );
    }
}

//! Canonical isomorphism codes for graphs of at most 8 vertices.
//!
//! A graph is encoded as its upper-triangular adjacency bits read row-major,
//! pair (0,1) most significant. The canonical code is the lexicographic
//! minimum of that encoding over all vertex permutations, so two graphs of
//! equal size are isomorphic exactly when their codes match.
//!
//! The minimum is found by an ordered partition search: positions are filled
//! left to right, and committing a row as "non-neighbors before neighbors"
//! within each pending cell is always optimal because earlier rows occupy
//! more significant bits. Candidates that tie on a row are branched, with
//! interchangeable (twin) vertices collapsed. Results are memoized process-
//! wide since sampled subgraphs repeat heavily.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest graph size with a canonical code.
pub const MAX_CODE_VERTICES: usize = 8;

/// Number of vertex pairs (= code bits) for an n-vertex graph.
pub fn pair_count(n: usize) -> u32 {
    (n * (n - 1) / 2) as u32
}

/// Labeling-invariant identity of a small graph.
///
/// Orders numerically within a size, which is the ordinal order used by the
/// graphlet catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode {
    n: u8,
    bits: u32,
}

impl CanonicalCode {
    pub fn num_vertices(&self) -> u8 {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Decodes back to a concrete graph with the canonical labeling.
    pub fn to_graph(&self) -> Graph {
        let n = self.n as usize;
        let mut edges = Vec::new();
        let p = pair_count(n);
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.bits >> (p - 1 - idx) & 1 == 1 {
                    edges.push((i as u32, j as u32));
                }
                idx += 1;
            }
        }
        Graph::new(n, &edges).expect("decoded edges are in range")
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:x}", self.n, self.bits)
    }
}

impl FromStr for CanonicalCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, hex) = s
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("bad code token {s:?}")))?;
        let n: u8 = n
            .parse()
            .map_err(|_| Error::Format(format!("bad code size in {s:?}")))?;
        if !(2..=MAX_CODE_VERTICES as u8).contains(&n) {
            return Err(Error::Format(format!("code size {n} out of range in {s:?}")));
        }
        let bits = u32::from_str_radix(hex, 16)
            .map_err(|_| Error::Format(format!("bad code bits in {s:?}")))?;
        if bits >> pair_count(n as usize) != 0 {
            return Err(Error::Format(format!("code bits too wide in {s:?}")));
        }
        Ok(CanonicalCode { n, bits })
    }
}

/// Raw (labeling-dependent) upper-triangular bit code of a graph.
pub fn encode_upper_bits(g: &Graph) -> Result<u32> {
    let n = g.num_vertices();
    if !(2..=MAX_CODE_VERTICES).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "canonical codes cover 2..={MAX_CODE_VERTICES} vertices, got {n}"
        )));
    }
    let p = pair_count(n);
    let mut bits = 0u32;
    let mut idx = 0;
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if g.has_edge(i, j) {
                bits |= 1 << (p - 1 - idx);
            }
            idx += 1;
        }
    }
    Ok(bits)
}

/// Per-vertex neighbor masks for a raw bit code.
pub(crate) fn masks_from_bits(n: usize, bits: u32) -> [u8; 8] {
    let mut adj = [0u8; 8];
    let p = pair_count(n);
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bits >> (p - 1 - idx) & 1 == 1 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
            idx += 1;
        }
    }
    adj
}

/// Raw bit code from per-vertex neighbor masks.
pub(crate) fn bits_from_masks(n: usize, adj: &[u8; 8]) -> u32 {
    let p = pair_count(n);
    let mut bits = 0u32;
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            if adj[i] >> j & 1 == 1 {
                bits |= 1 << (p - 1 - idx);
            }
            idx += 1;
        }
    }
    bits
}

/// Connectivity over neighbor masks.
pub(crate) fn masks_connected(n: usize, adj: &[u8; 8]) -> bool {
    if n <= 1 {
        return true;
    }
    let all = ((1u16 << n) - 1) as u8;
    let mut reached: u8 = 1;
    loop {
        let mut next = reached;
        let mut m = reached;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            next |= adj[v];
        }
        if next == reached {
            return reached == all;
        }
        reached = next;
    }
}

struct MinSearch {
    adj: [u8; 8],
    total_bits: u32,
    best: u32,
}

impl MinSearch {
    // Appends one cell's worth of row bits: zeros for the cell's
    // non-neighbors of the candidate, then ones for its neighbors.
    fn push_cell(row: u32, cell: u8, nbrs: u8) -> u32 {
        let width = cell.count_ones();
        let ones = (cell & nbrs).count_ones();
        (row << width) | ((1u32 << ones) - 1)
    }

    fn dfs(&mut self, cells: &[u8], acc: u32, filled: u32) {
        if self.best != u32::MAX {
            let best_prefix = self.best >> (self.total_bits - filled);
            if acc > best_prefix {
                return;
            }
        }
        if cells.is_empty() {
            self.best = self.best.min(acc);
            return;
        }

        let first = cells[0];
        let mut best_row = u32::MAX;
        let mut cands: u8 = 0;
        let mut m = first;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let nv = self.adj[v];
            let mut row = Self::push_cell(0, first & !(1 << v), nv);
            for &c in &cells[1..] {
                row = Self::push_cell(row, c, nv);
            }
            if row < best_row {
                best_row = row;
                cands = 1 << v;
            } else if row == best_row {
                cands |= 1 << v;
            }
        }

        // Collapse twin candidates: a transposition of u and v is an
        // automorphism of the unassigned part when their neighbor masks
        // agree outside the pair, so one branch suffices.
        let rem_all: u8 = cells.iter().fold(0, |a, &c| a | c);
        let mut kept: u8 = 0;
        let mut m = cands;
        'cand: while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let mut k = kept;
            while k != 0 {
                let u = k.trailing_zeros() as usize;
                k &= k - 1;
                let pair = (1u8 << v) | (1u8 << u);
                if (self.adj[v] ^ self.adj[u]) & rem_all & !pair == 0 {
                    continue 'cand;
                }
            }
            kept |= 1 << v;
        }

        let row_width = rem_all.count_ones() - 1;
        let acc_next = (acc << row_width) | best_row;
        let filled_next = filled + row_width;
        let mut m = kept;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let nv = self.adj[v];
            let mut next: Vec<u8> = Vec::with_capacity(cells.len() * 2);
            let lead = first & !(1 << v);
            for c in std::iter::once(lead).chain(cells[1..].iter().copied()) {
                if c == 0 {
                    continue;
                }
                let out = c & !nv;
                let inn = c & nv;
                if out != 0 {
                    next.push(out);
                }
                if inn != 0 {
                    next.push(inn);
                }
            }
            self.dfs(&next, acc_next, filled_next);
        }
    }
}

fn canonical_cache() -> &'static DashMap<u32, u32> {
    static CACHE: OnceLock<DashMap<u32, u32>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

/// Minimal bit code over all permutations, memoized by (size, raw bits).
pub fn canonical_bits(n: usize, raw: u32) -> u32 {
    let key = (n as u32) << 28 | raw;
    if let Some(hit) = canonical_cache().get(&key) {
        return *hit;
    }
    let mut search = MinSearch {
        adj: masks_from_bits(n, raw),
        total_bits: pair_count(n),
        best: u32::MAX,
    };
    let all = ((1u16 << n) - 1) as u8;
    search.dfs(&[all], 0, 0);
    let code = search.best;
    canonical_cache().insert(key, code);
    code
}

/// Canonical code of a raw bit encoding.
pub fn canonical_code_from_bits(n: usize, raw: u32) -> Result<CanonicalCode> {
    if !(2..=MAX_CODE_VERTICES).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "canonical codes cover 2..={MAX_CODE_VERTICES} vertices, got {n}"
        )));
    }
    if raw >> pair_count(n) != 0 {
        return Err(Error::InvalidArgument(format!(
            "raw bits 0x{raw:x} too wide for {n} vertices"
        )));
    }
    Ok(CanonicalCode {
        n: n as u8,
        bits: canonical_bits(n, raw),
    })
}

/// Canonical code of a graph with 2..=8 vertices.
pub fn canonical_form(g: &Graph) -> Result<CanonicalCode> {
    let raw = encode_upper_bits(g)?;
    canonical_code_from_bits(g.num_vertices(), raw)
}

/// Isomorphism test via canonical codes. Sizes up to 8; graphs of 0 or 1
/// vertex compare by size alone.
pub fn are_isomorphic(a: &Graph, b: &Graph) -> Result<bool> {
    if a.num_vertices() > MAX_CODE_VERTICES || b.num_vertices() > MAX_CODE_VERTICES {
        return Err(Error::InvalidArgument(format!(
            "isomorphism test covers at most {MAX_CODE_VERTICES} vertices, got {} and {}",
            a.num_vertices(),
            b.num_vertices()
        )));
    }
    if a.num_vertices() != b.num_vertices() {
        return Ok(false);
    }
    if a.num_vertices() <= 1 {
        return Ok(true);
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}

//! Hierarchical Pitman-Yor estimation over the graphlet DAG.
//!
//! One seating arrangement per level links consecutive levels: every
//! occupied table at level m is backed by exactly one customer at level
//! m-1, carrying the parent graphlet its dish was generated from. The
//! bottom level draws dishes from an explicit base distribution instead.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::catalog::{push_forward, Distribution, GraphletDag, MIN_LEVEL};
use crate::error::{Error, Result};
use crate::sampling::CountVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PypConfig {
    /// Discount in [0, 1); shared by every level.
    pub d: f64,
    /// Concentration, > -d; shared by every level.
    pub theta: f64,
    /// Resampling passes kept after burn-in.
    pub sweeps: usize,
    /// Initial resampling passes discarded.
    pub burn_in: usize,
    /// Trailing kept passes whose predictives are averaged.
    pub avg_last: usize,
    pub seed: u64,
}

impl Default for PypConfig {
    fn default() -> Self {
        PypConfig {
            d: 0.5,
            theta: 1.0,
            sweeps: 100,
            burn_in: 50,
            avg_last: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Table {
    label: u32,
    count: u64,
    /// Ordinal of the parent graphlet whose customer backs this table;
    /// None only at the bottom level.
    parent_label: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Restaurant {
    level: u8,
    tables: Vec<Table>,
    customers: u64,
}

impl Restaurant {
    pub fn num_tables(&self) -> usize {
        self.tables.len()
    }

    pub fn num_customers(&self) -> u64 {
        self.customers
    }
}

#[derive(Debug, Clone)]
pub struct HpypChain<'a> {
    dag: &'a GraphletDag,
    config: PypConfig,
    base_level: u8,
    top_level: u8,
    base: Vec<f64>,
    restaurants: Vec<Restaurant>,
    pred_cache: Vec<Option<Vec<f64>>>,
    rng: ChaCha8Rng,
}

impl<'a> HpypChain<'a> {
    pub fn new(
        dag: &'a GraphletDag,
        base_level: u8,
        top_level: u8,
        base: Vec<f64>,
        config: PypConfig,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&config.d) {
            return Err(Error::InvalidArgument(format!(
                "discount must lie in [0, 1), got {}",
                config.d
            )));
        }
        if !config.theta.is_finite() || config.theta <= -config.d || (config.theta == 0.0 && config.d == 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "concentration {} incompatible with discount {}",
                config.theta, config.d
            )));
        }
        if base_level < MIN_LEVEL || top_level < base_level || top_level > dag.k_max() {
            return Err(Error::InvalidArgument(format!(
                "level range {base_level}..={top_level} outside catalog range 2..={}",
                dag.k_max()
            )));
        }
        if base.len() != dag.level_size(base_level) {
            return Err(Error::InvalidArgument(format!(
                "base length {} does not match level {base_level} size {}",
                base.len(),
                dag.level_size(base_level)
            )));
        }
        if base.iter().any(|&p| !p.is_finite() || p < 0.0)
            || (base.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidArgument(
                "base distribution must be non-negative and sum to 1".into(),
            ));
        }
        let levels = (top_level - base_level + 1) as usize;
        Ok(HpypChain {
            dag,
            config,
            base_level,
            top_level,
            base,
            restaurants: (0..levels)
                .map(|i| Restaurant {
                    level: base_level + i as u8,
                    tables: Vec::new(),
                    customers: 0,
                })
                .collect(),
            pred_cache: vec![None; levels],
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        })
    }

    /// Chain rooted at the single two-vertex graphlet.
    pub fn standard(dag: &'a GraphletDag, top_level: u8, config: PypConfig) -> Result<Self> {
        HpypChain::new(dag, MIN_LEVEL, top_level, vec![1.0], config)
    }

    pub fn top_level(&self) -> u8 {
        self.top_level
    }

    pub fn restaurant(&self, level: u8) -> &Restaurant {
        &self.restaurants[(level - self.base_level) as usize]
    }

    fn idx(&self, level: u8) -> usize {
        (level - self.base_level) as usize
    }

    fn invalidate_from(&mut self, level: u8) {
        for slot in &mut self.pred_cache[(level - self.base_level) as usize..] {
            *slot = None;
        }
    }

    fn reset(&mut self) {
        for r in &mut self.restaurants {
            r.tables.clear();
            r.customers = 0;
        }
        self.pred_cache.iter_mut().for_each(|c| *c = None);
        self.rng = ChaCha8Rng::seed_from_u64(self.config.seed);
    }

    /// Index drawn proportionally to `weights`; caller guarantees a
    /// positive total.
    fn pick(rng: &mut ChaCha8Rng, weights: &[f64], total: f64) -> usize {
        let mut r = rng.gen::<f64>() * total;
        for (i, &w) in weights.iter().enumerate() {
            r -= w;
            if r <= 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }

    /// Fallback dish distribution feeding level `m`: the explicit base at
    /// the bottom, the pushed-forward predictive of m-1 above it.
    fn base_at(&mut self, m: u8) -> Result<Vec<f64>> {
        if m == self.base_level {
            return Ok(self.base.clone());
        }
        let lower = self.predictive(m - 1)?;
        Ok(push_forward(
            &Distribution {
                level: m - 1,
                probs: lower,
            },
            self.dag,
        )?
        .probs)
    }

    /// Posterior predictive over dishes at level `m`, cached until a
    /// seating at that level or below changes.
    pub fn predictive(&mut self, m: u8) -> Result<Vec<f64>> {
        if m < self.base_level || m > self.top_level {
            return Err(Error::InvalidArgument(format!(
                "level {m} outside chain range {}..={}",
                self.base_level, self.top_level
            )));
        }
        if let Some(cached) = &self.pred_cache[self.idx(m)] {
            return Ok(cached.clone());
        }
        let mut probs = self.base_at(m)?;
        let i = self.idx(m);
        let r = &self.restaurants[i];
        if r.customers > 0 {
            let d = self.config.d;
            let theta = self.config.theta;
            let denom = theta + r.customers as f64;
            let new_mass = (theta + d * r.tables.len() as f64) / denom;
            probs.iter_mut().for_each(|p| *p *= new_mass);
            for t in &r.tables {
                probs[t.label as usize] += (t.count as f64 - d) / denom;
            }
        }
        self.pred_cache[i] = Some(probs.clone());
        Ok(probs)
    }

    /// Predictive at the top level as a [`Distribution`].
    pub fn predictive_distribution(&mut self) -> Result<Distribution> {
        Ok(Distribution {
            level: self.top_level,
            probs: self.predictive(self.top_level)?,
        })
    }

    /// Seats one observed customer with dish `label`. A new table also
    /// seats a backing customer one level down, recursively.
    pub fn insert(&mut self, label: u32) -> Result<()> {
        if label as usize >= self.dag.level_size(self.top_level) {
            return Err(Error::InvalidArgument(format!(
                "label {label} out of range at level {}",
                self.top_level
            )));
        }
        self.insert_posterior(self.top_level, label)
    }

    fn insert_posterior(&mut self, m: u8, label: u32) -> Result<()> {
        let base_label = self.base_at(m).map(|b| b[label as usize])?;
        let d = self.config.d;
        let theta = self.config.theta;
        let i = self.idx(m);
        let open = if self.restaurants[i].customers == 0 {
            true
        } else {
            let r = &self.restaurants[i];
            let mut weights: Vec<f64> = Vec::new();
            let mut slots: Vec<usize> = Vec::new();
            for (ti, t) in r.tables.iter().enumerate() {
                if t.label == label {
                    weights.push(t.count as f64 - d);
                    slots.push(ti);
                }
            }
            let new_w = (theta + d * r.tables.len() as f64) * base_label;
            let total: f64 = weights.iter().sum::<f64>() + new_w;
            if total <= 0.0 {
                return Err(Error::ChainState(format!(
                    "dish {label} at level {m} has no seat: zero fallback probability"
                )));
            }
            weights.push(new_w);
            let choice = Self::pick(&mut self.rng, &weights, total);
            if choice < slots.len() {
                self.restaurants[i].tables[slots[choice]].count += 1;
                self.restaurants[i].customers += 1;
                self.invalidate_from(m);
                return Ok(());
            }
            true
        };
        debug_assert!(open);
        let parent_label = if m == self.base_level {
            if base_label <= 0.0 {
                return Err(Error::ChainState(format!(
                    "dish {label} has zero base probability at level {m}"
                )));
            }
            None
        } else {
            let lower = self.predictive(m - 1)?;
            let edges = &self.dag.parents(m)[label as usize];
            let weights: Vec<f64> = edges
                .iter()
                .map(|e| e.w * lower[e.parent as usize])
                .collect();
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return Err(Error::ChainState(format!(
                    "dish {label} at level {m}: every parent has zero predictive mass"
                )));
            }
            let parent = edges[Self::pick(&mut self.rng, &weights, total)].parent;
            self.insert_posterior(m - 1, parent)?;
            Some(parent)
        };
        let i = self.idx(m);
        self.restaurants[i].tables.push(Table {
            label,
            count: 1,
            parent_label,
        });
        self.restaurants[i].customers += 1;
        self.invalidate_from(m);
        Ok(())
    }

    /// Draws one customer from the prior process, seating it and every
    /// backing customer it opens. Returns the dish served.
    pub fn draw(&mut self) -> Result<u32> {
        self.insert_generative(self.top_level)
    }

    fn insert_generative(&mut self, m: u8) -> Result<u32> {
        let d = self.config.d;
        let theta = self.config.theta;
        let i = self.idx(m);
        {
            let r = &self.restaurants[i];
            if r.customers > 0 {
                let mut weights: Vec<f64> =
                    r.tables.iter().map(|t| t.count as f64 - d).collect();
                let new_w = theta + d * r.tables.len() as f64;
                let total: f64 = weights.iter().sum::<f64>() + new_w;
                weights.push(new_w);
                let choice = Self::pick(&mut self.rng, &weights, total);
                if choice < self.restaurants[i].tables.len() {
                    let label = self.restaurants[i].tables[choice].label;
                    self.restaurants[i].tables[choice].count += 1;
                    self.restaurants[i].customers += 1;
                    self.invalidate_from(m);
                    return Ok(label);
                }
            }
        }
        // open a fresh table and generate its dish
        let (label, parent_label) = if m == self.base_level {
            let total: f64 = self.base.iter().sum();
            let label = Self::pick(&mut self.rng, &self.base.clone(), total) as u32;
            (label, None)
        } else {
            let parent = self.insert_generative(m - 1)?;
            let edges: Vec<(u32, f64)> = self.dag.children(m - 1)[parent as usize]
                .iter()
                .map(|e| (e.child, e.w))
                .collect();
            let weights: Vec<f64> = edges.iter().map(|e| e.1).collect();
            let label = edges[Self::pick(&mut self.rng, &weights, weights.iter().sum())].0;
            (label, Some(parent))
        };
        let i = self.idx(m);
        self.restaurants[i].tables.push(Table {
            label,
            count: 1,
            parent_label,
        });
        self.restaurants[i].customers += 1;
        self.invalidate_from(m);
        Ok(label)
    }

    /// Unseats one customer with dish `label` (chosen uniformly among
    /// them, exchangeably). Closing a table also removes its backing
    /// customer below.
    pub fn delete(&mut self, label: u32) -> Result<()> {
        self.delete_labeled(self.top_level, label)
    }

    fn delete_labeled(&mut self, m: u8, label: u32) -> Result<()> {
        let i = self.idx(m);
        let mut weights: Vec<f64> = Vec::new();
        let mut slots: Vec<usize> = Vec::new();
        for (ti, t) in self.restaurants[i].tables.iter().enumerate() {
            if t.label == label {
                weights.push(t.count as f64);
                slots.push(ti);
            }
        }
        if slots.is_empty() {
            return Err(Error::ChainState(format!(
                "no customer with dish {label} at level {m}"
            )));
        }
        let total: f64 = weights.iter().sum();
        let ti = slots[Self::pick(&mut self.rng, &weights, total)];
        self.restaurants[i].tables[ti].count -= 1;
        self.restaurants[i].customers -= 1;
        self.invalidate_from(m);
        if self.restaurants[i].tables[ti].count == 0 {
            let closed = self.restaurants[i].tables.remove(ti);
            if let Some(parent) = closed.parent_label {
                self.delete_labeled(m - 1, parent)?;
            }
        }
        Ok(())
    }

    /// Verifies the cross-level bookkeeping: every level's customers are
    /// exactly the backing customers of the tables one level up, dish by
    /// dish, and per-restaurant tallies agree with their tables.
    pub fn consistency_check(&self) -> Result<()> {
        for (i, r) in self.restaurants.iter().enumerate() {
            let m = self.base_level + i as u8;
            if r.level != m {
                return Err(Error::ChainState(format!("restaurant {i} mislabeled")));
            }
            if r.tables.iter().any(|t| t.count == 0) {
                return Err(Error::ChainState(format!("empty table at level {m}")));
            }
            let seated: u64 = r.tables.iter().map(|t| t.count).sum();
            if seated != r.customers {
                return Err(Error::ChainState(format!(
                    "level {m}: {seated} seated vs {} recorded",
                    r.customers
                )));
            }
            if m == self.base_level {
                if r.tables.iter().any(|t| t.parent_label.is_some()) {
                    return Err(Error::ChainState(format!(
                        "bottom level {m} table carries a parent"
                    )));
                }
                continue;
            }
            let below = &self.restaurants[i - 1];
            let size = self.dag.level_size(m - 1);
            let mut backing = vec![0u64; size];
            for t in &r.tables {
                match t.parent_label {
                    Some(p) if (p as usize) < size => backing[p as usize] += 1,
                    _ => {
                        return Err(Error::ChainState(format!(
                            "level {m} table lacks a valid parent dish"
                        )))
                    }
                }
            }
            let mut served = vec![0u64; size];
            for t in &below.tables {
                served[t.label as usize] += t.count;
            }
            if served != backing {
                return Err(Error::ChainState(format!(
                    "level {} customers do not match level {m} tables",
                    m - 1
                )));
            }
        }
        Ok(())
    }

    /// Seats `counts` as observations, resamples each customer's seat for
    /// burn_in + sweeps passes, and returns the predictive averaged over
    /// the trailing `avg_last` kept passes. Deterministic in the seed.
    pub fn gibbs_fit(&mut self, counts: &CountVector) -> Result<Distribution> {
        if counts.level != self.top_level {
            return Err(Error::InvalidArgument(format!(
                "counts at level {} but chain tops out at {}",
                counts.level, self.top_level
            )));
        }
        if counts.counts.len() != self.dag.level_size(self.top_level) {
            return Err(Error::InvalidArgument(format!(
                "count vector length {} does not match level {} size {}",
                counts.counts.len(),
                self.top_level,
                self.dag.level_size(self.top_level)
            )));
        }
        if counts.total() == 0 {
            return Err(Error::Estimation(
                "cannot fit a seating arrangement to zero observations".into(),
            ));
        }
        self.reset();
        for (label, &c) in counts.counts.iter().enumerate() {
            for _ in 0..c {
                self.insert_posterior(self.top_level, label as u32)?;
            }
        }
        let passes = self.config.burn_in + self.config.sweeps;
        let keep = self.config.avg_last.clamp(1, self.config.sweeps.max(1));
        let mut avg = vec![0.0; counts.counts.len()];
        let mut kept = 0usize;
        for pass in 0..passes {
            for (label, &c) in counts.counts.iter().enumerate() {
                for _ in 0..c {
                    self.delete_labeled(self.top_level, label as u32)?;
                    self.insert_posterior(self.top_level, label as u32)?;
                }
            }
            if passes - pass <= keep {
                let p = self.predictive(self.top_level)?;
                avg.iter_mut().zip(&p).for_each(|(a, &x)| *a += x);
                kept += 1;
            }
        }
        if kept == 0 {
            // no resampling requested: use the seated state directly
            avg = self.predictive(self.top_level)?;
            kept = 1;
        }
        avg.iter_mut().for_each(|a| *a /= kept as f64);
        Ok(Distribution {
            level: self.top_level,
            probs: avg,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_catalog, build_dag, GraphletDag};
    use crate::sampling::{log_log_slope, powerlaw_table};

    fn dag5() -> GraphletDag {
        build_dag(&build_catalog(5).unwrap())
    }

    fn config(d: f64, theta: f64, seed: u64) -> PypConfig {
        PypConfig {
            d,
            theta,
            seed,
            ..PypConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        let dag = dag5();
        assert!(HpypChain::standard(&dag, 3, config(1.0, 1.0, 0)).is_err());
        assert!(HpypChain::standard(&dag, 3, config(-0.1, 1.0, 0)).is_err());
        assert!(HpypChain::standard(&dag, 3, config(0.0, 0.0, 0)).is_err());
        assert!(HpypChain::standard(&dag, 3, config(0.5, -0.6, 0)).is_err());
        assert!(HpypChain::standard(&dag, 9, config(0.5, 1.0, 0)).is_err());
        assert!(HpypChain::new(&dag, 2, 3, vec![0.5, 0.5], config(0.5, 1.0, 0)).is_err());
        assert!(HpypChain::standard(&dag, 3, config(0.5, 1.0, 0)).is_ok());
        // negative concentration is legal above -d once a table exists
        assert!(HpypChain::standard(&dag, 3, config(0.5, -0.4, 0)).is_ok());
    }

    #[test]
    fn empty_chain_predicts_the_pushed_forward_base() {
        let dag = dag5();
        let mut chain = HpypChain::standard(&dag, 4, config(0.5, 1.0, 0)).unwrap();
        let p3 = chain.predictive(3).unwrap();
        assert_eq!(p3, vec![0.4, 0.6]);
        let p4 = chain.predictive(4).unwrap();
        let expect = push_forward(
            &Distribution {
                level: 3,
                probs: vec![0.4, 0.6],
            },
            &dag,
        )
        .unwrap();
        assert_eq!(p4, expect.probs);
    }

    #[test]
    fn single_observation_predictive_is_exact() {
        // d=0.5, theta=1: one customer leaves (1-d)/(theta+1) = 0.25 on its
        // dish and routes (theta+d)/(theta+1) = 0.75 through the fallback,
        // which at the bottom is pinned at (0.4, 0.6)
        let dag = dag5();
        let mut chain = HpypChain::standard(&dag, 3, config(0.5, 1.0, 7)).unwrap();
        chain.insert(0).unwrap();
        let p = chain.predictive(3).unwrap();
        assert!((p[0] - (0.25 + 0.75 * 0.4)).abs() < 1e-12);
        assert!((p[1] - 0.75 * 0.6).abs() < 1e-12);
        chain.consistency_check().unwrap();
        assert_eq!(chain.restaurant(3).num_tables(), 1);
        assert_eq!(chain.restaurant(2).num_customers(), 1);
    }

    #[test]
    fn predictive_always_sums_to_one() {
        let dag = dag5();
        let mut chain = HpypChain::standard(&dag, 5, config(0.6, 0.8, 11)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut live: Vec<u32> = Vec::new();
        for _ in 0..500 {
            if live.is_empty() || rng.gen::<f64>() < 0.6 {
                let label = rng.gen_range(0..21);
                chain.insert(label).unwrap();
                live.push(label);
            } else {
                let at = rng.gen_range(0..live.len());
                let label = live.swap_remove(at);
                chain.delete(label).unwrap();
            }
            for m in 2..=5u8 {
                let s: f64 = chain.predictive(m).unwrap().iter().sum();
                assert!((s - 1.0).abs() < 1e-9, "level {m} sums to {s}");
            }
        }
        chain.consistency_check().unwrap();
    }

    #[test]
    fn deleting_everything_empties_every_level() {
        let dag = dag5();
        let mut chain = HpypChain::standard(&dag, 4, config(0.5, 1.0, 3)).unwrap();
        let labels = [0u32, 3, 3, 5, 1, 0, 3];
        for &l in &labels {
            chain.insert(l).unwrap();
        }
        chain.consistency_check().unwrap();
        for &l in &labels {
            chain.delete(l).unwrap();
        }
        for m in 2..=4u8 {
            assert_eq!(chain.restaurant(m).num_customers(), 0);
            assert_eq!(chain.restaurant(m).num_tables(), 0);
        }
        assert!(chain.delete(0).is_err());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let dag = dag5();
        let mut a = HpypChain::standard(&dag, 5, config(0.5, 1.0, 99)).unwrap();
        let mut b = HpypChain::standard(&dag, 5, config(0.5, 1.0, 99)).unwrap();
        for label in [2u32, 2, 7, 0, 2, 19, 7] {
            a.insert(label).unwrap();
            b.insert(label).unwrap();
        }
        assert_eq!(a.predictive(5).unwrap(), b.predictive(5).unwrap());
        assert_eq!(a.restaurant(4), b.restaurant(4));
    }

    #[test]
    fn bookkeeping_survives_a_long_random_walk() {
        let dag = dag5();
        let mut chain = HpypChain::standard(&dag, 4, config(0.3, 0.5, 5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut live: Vec<u32> = Vec::new();
        for step in 0..2000 {
            if live.is_empty() || rng.gen::<f64>() < 0.55 {
                let label = rng.gen_range(0..6);
                chain.insert(label).unwrap();
                live.push(label);
            } else {
                let at = rng.gen_range(0..live.len());
                chain.delete(live.swap_remove(at)).unwrap();
            }
            if step % 100 == 0 {
                chain.consistency_check().unwrap();
            }
        }
        chain.consistency_check().unwrap();
    }

    #[test]
    fn insertion_order_does_not_matter_on_average() {
        let dag = dag5();
        let orders: [&[u32]; 2] = [&[0, 0, 1], &[1, 0, 0]];
        let mut avgs = Vec::new();
        for order in orders {
            let mut avg = vec![0.0; 2];
            for seed in 0..200u64 {
                let mut chain = HpypChain::standard(&dag, 3, config(0.5, 1.0, seed)).unwrap();
                for &l in order {
                    chain.insert(l).unwrap();
                }
                let p = chain.predictive(3).unwrap();
                avg.iter_mut().zip(&p).for_each(|(a, &x)| *a += x);
            }
            avg.iter_mut().for_each(|a| *a /= 200.0);
            avgs.push(avg);
        }
        let l1: f64 = avgs[0]
            .iter()
            .zip(&avgs[1])
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(l1 < 0.02, "order sensitivity {l1}");
    }

    #[test]
    fn flat_process_draws_follow_the_pushed_base() {
        // with d=0 and enormous theta every customer opens a table, so
        // draws are near-independent samples from the pushed-forward base
        let dag = dag5();
        let mut chain = HpypChain::standard(&dag, 4, config(0.0, 1e9, 13)).unwrap();
        let expect = chain.predictive(4).unwrap();
        let n = 20_000usize;
        let mut freq = vec![0u64; 6];
        for _ in 0..n {
            freq[chain.draw().unwrap() as usize] += 1;
        }
        let l1: f64 = freq
            .iter()
            .zip(&expect)
            .map(|(&f, &e)| (f as f64 / n as f64 - e).abs())
            .sum();
        assert!(l1 < 0.05, "draw frequencies off by {l1}");
        chain.consistency_check().unwrap();
    }

    #[test]
    fn strong_discount_concentrates_the_draws() {
        let dag = dag5();
        let mut chain = HpypChain::standard(&dag, 5, config(0.8, 1.0, 17)).unwrap();
        let mut counts = CountVector::zeros(5, 21);
        for _ in 0..5000 {
            counts.counts[chain.draw().unwrap() as usize] += 1;
        }
        let table = powerlaw_table(&counts).unwrap();
        assert!(table.len() >= 3);
        assert!(log_log_slope(&table).unwrap() < 0.0);
        assert!(table[0].1 > 5000 / 21 * 2, "no head buildup: {:?}", &table[..3]);
    }

    #[test]
    fn fitted_predictive_tracks_the_data() {
        let dag = dag5();
        let counts = CountVector {
            level: 3,
            counts: vec![30, 20],
        };
        let cfg = PypConfig {
            sweeps: 40,
            burn_in: 10,
            avg_last: 10,
            seed: 23,
            ..PypConfig::default()
        };
        let mut chain = HpypChain::standard(&dag, 3, cfg).unwrap();
        let fit = chain.gibbs_fit(&counts).unwrap();
        assert!((fit.sum() - 1.0).abs() < 1e-9);
        assert!(fit.probs[0] > fit.probs[1]);
        assert!(fit.probs[1] > 0.0);
        chain.consistency_check().unwrap();
        assert_eq!(chain.restaurant(3).num_customers(), 50);

        let again = HpypChain::standard(&dag, 3, cfg).unwrap().gibbs_fit(&counts).unwrap();
        assert_eq!(fit, again);
    }

    #[test]
    fn fit_rejects_mismatched_counts() {
        let dag = dag5();
        let mut chain = HpypChain::standard(&dag, 3, PypConfig::default()).unwrap();
        assert!(chain
            .gibbs_fit(&CountVector {
                level: 4,
                counts: vec![1; 6]
            })
            .is_err());
        assert!(chain
            .gibbs_fit(&CountVector {
                level: 3,
                counts: vec![1, 2, 3]
            })
            .is_err());
        assert!(chain
            .gibbs_fit(&CountVector {
                level: 3,
                counts: vec![0, 0]
            })
            .is_err());
    }

    #[test]
    fn labels_out_of_range_are_rejected() {
        let dag = dag5();
        let mut chain = HpypChain::standard(&dag, 3, PypConfig::default()).unwrap();
        assert!(chain.insert(2).is_err());
        assert!(matches!(chain.delete(0), Err(Error::ChainState(_))));
    }
}

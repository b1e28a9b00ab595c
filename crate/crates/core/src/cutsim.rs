//! The k-cut process on complete binary trees.
//!
//! Two simulators are provided. [`simulate_process`] plays the cutting game
//! directly. [`simulate_records`] draws `k` exponential clocks per node and
//! counts r-records, which has the same law for the total and also splits
//! it by `r`. [`brute_force_distribution`] enumerates the game exactly for
//! very small trees.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KcutError, Result};
use crate::rng::{domain, substream};
use crate::series::ConstantTable;

/// Largest tree the simulators accept.
pub const MAX_NODES: u64 = 1 << 26;

/// Complete binary tree on nodes `1..=n` in heap order: the children of `i`
/// are `2i` and `2i + 1`, and the last level is packed to the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompleteTree {
    n: u64,
}

impl CompleteTree {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(KcutError::domain("a tree needs at least one node"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Height of node `i` (root is 0).
    pub fn height(&self, i: u64) -> u32 {
        debug_assert!(i >= 1 && i <= self.n);
        63 - i.leading_zeros()
    }

    /// Height of the deepest level, floor(lg n).
    pub fn max_height(&self) -> u32 {
        self.height(self.n)
    }

    /// Number of nodes at height `h`.
    pub fn level_population(&self, h: u32) -> u64 {
        let m = self.max_height();
        match h.cmp(&m) {
            std::cmp::Ordering::Less => 1u64 << h,
            std::cmp::Ordering::Equal => self.n - ((1u64 << m) - 1),
            std::cmp::Ordering::Greater => 0,
        }
    }

    /// Size of the subtree rooted at `i`, in O(log n).
    pub fn subtree_size(&self, i: u64) -> u64 {
        if i == 0 || i > self.n {
            return 0;
        }
        let mut size = 0;
        let (mut lo, mut hi) = (i, i);
        while lo <= self.n {
            size += hi.min(self.n) - lo + 1;
            lo *= 2;
            hi = 2 * hi + 1;
        }
        size
    }

    pub fn check_size(&self) -> Result<()> {
        if self.n > MAX_NODES {
            Err(KcutError::config(format!("n = {} exceeds the simulation cap {MAX_NODES}", self.n)))
        } else {
            Ok(())
        }
    }
}

/// Which objects are cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Node,
    Edge,
}

impl std::str::FromStr for Variant {
    type Err = KcutError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node" => Ok(Variant::Node),
            "edge" => Ok(Variant::Edge),
            other => Err(KcutError::config(format!("unknown variant `{other}`"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Node => "node",
            Variant::Edge => "edge",
        })
    }
}

/// Per-node cumulative clock times `T_{1,v} < … < T_{k,v}`, stored densely
/// in heap order. Only used when the clocks themselves are of interest; the
/// simulators draw clocks on the fly.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockAssignment {
    k: usize,
    times: Vec<f64>,
}

impl ClockAssignment {
    pub fn draw<R: Rng + ?Sized>(tree: &CompleteTree, k: usize, rng: &mut R) -> Result<Self> {
        tree.check_size()?;
        if k == 0 {
            return Err(KcutError::domain("k must be at least 1"));
        }
        let mut times = Vec::with_capacity(tree.n() as usize * k);
        for _ in 0..tree.n() {
            let mut t = 0.0;
            for _ in 0..k {
                t += rng.sample::<f64, _>(Exp1);
                times.push(t);
            }
        }
        Ok(Self { k, times })
    }

    /// `T_{r,v}` for `1 ≤ r ≤ k` and heap index `v`.
    pub fn time(&self, r: usize, v: u64) -> f64 {
        self.times[(v as usize - 1) * self.k + r - 1]
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// One simulated cut count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSample {
    /// `per_r[r-1]` counts the r-records; empty for the process simulator.
    pub per_r: Vec<u64>,
    pub total: u64,
    pub variant: Variant,
    pub seed: u64,
    pub index: u64,
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(KcutError::domain("k must be at least 1"));
    }
    if k > 255 {
        return Err(KcutError::config("k above 255 is not supported"));
    }
    Ok(())
}

/// Count r-records by a depth-first walk carrying the minimum of `T_k` over
/// the ancestors seen so far. A node whose `T_r` exactly ties that minimum is
/// not a record, so ties always go to the ancestor (the smaller index).
fn count_records<R: Rng + ?Sized>(tree: &CompleteTree, k: usize, rng: &mut R, skip_root: bool) -> Vec<u64> {
    let n = tree.n();
    let mut per_r = vec![0u64; k];
    let mut clocks = vec![0.0f64; k];
    let mut stack: Vec<(u64, f64)> = Vec::with_capacity(2 * (tree.max_height() as usize + 2));
    if skip_root {
        for c in [2, 3] {
            if c <= n {
                stack.push((c, f64::INFINITY));
            }
        }
    } else {
        stack.push((1, f64::INFINITY));
    }
    while let Some((v, min)) = stack.pop() {
        let mut t = 0.0;
        for c in clocks.iter_mut() {
            t += rng.sample::<f64, _>(Exp1);
            *c = t;
        }
        for (count, &c) in per_r.iter_mut().zip(&clocks) {
            if c < min {
                *count += 1;
            } else {
                break;
            }
        }
        let next = min.min(clocks[k - 1]);
        let left = 2 * v;
        if left < n {
            stack.push((left + 1, next));
        }
        if left <= n {
            stack.push((left, next));
        }
    }
    per_r
}

/// Record counts with an explicit generator.
pub fn simulate_records_with<R: Rng + ?Sized>(tree: &CompleteTree, k: usize, rng: &mut R) -> Result<Vec<u64>> {
    check_k(k)?;
    tree.check_size()?;
    Ok(count_records(tree, k, rng, false))
}

/// Edge-variant record counts with an explicit generator.
pub fn simulate_edge_records_with<R: Rng + ?Sized>(tree: &CompleteTree, k: usize, rng: &mut R) -> Result<Vec<u64>> {
    check_k(k)?;
    tree.check_size()?;
    Ok(count_records(tree, k, rng, true))
}

fn records_sample(tree: &CompleteTree, k: usize, seed: u64, index: u64, variant: Variant) -> Result<SimSample> {
    let per_r = match variant {
        Variant::Node => simulate_records_with(tree, k, &mut substream(seed, domain::RECORDS, index))?,
        Variant::Edge => simulate_edge_records_with(tree, k, &mut substream(seed, domain::EDGE, index))?,
    };
    Ok(SimSample { total: per_r.iter().sum(), per_r, variant, seed, index })
}

/// Node-variant record simulation for sample 0 of `seed`.
pub fn simulate_records(tree: &CompleteTree, k: usize, seed: u64) -> Result<SimSample> {
    records_sample(tree, k, seed, 0, Variant::Node)
}

/// Edge-variant record simulation for sample 0 of `seed`.
pub fn simulate_edge_records(tree: &CompleteTree, k: usize, seed: u64) -> Result<SimSample> {
    records_sample(tree, k, seed, 0, Variant::Edge)
}

/// Play the cutting game directly and return the number of cuts.
///
/// Nodes still attached to the root are kept in a dense array with a
/// position index, so a uniform pick is O(1) and a removal swaps out the
/// whole detached subtree. Total cost is O(n + cuts).
pub fn simulate_process_with<R: Rng + ?Sized>(tree: &CompleteTree, k: usize, rng: &mut R) -> Result<u64> {
    check_k(k)?;
    tree.check_size()?;
    let n = tree.n() as usize;
    let mut active: Vec<u32> = (1..=n as u32).collect();
    let mut pos: Vec<u32> = (0..=n as u32).map(|i| i.saturating_sub(1)).collect();
    let mut counter = vec![0u8; n + 1];
    const GONE: u32 = u32::MAX;
    let mut cuts = 0u64;
    loop {
        let v = active[rng.random_range(0..active.len())] as usize;
        cuts += 1;
        counter[v] += 1;
        if counter[v] as usize == k {
            if v == 1 {
                return Ok(cuts);
            }
            // detach the attached part of v's subtree; a removed node's
            // whole subtree is already gone, so the walk stops there
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                let p = pos[u];
                if p == GONE {
                    continue;
                }
                let last = active.pop().expect("root is still active");
                if last as usize != u {
                    active[p as usize] = last;
                    pos[last as usize] = p;
                }
                pos[u] = GONE;
                for c in [2 * u, 2 * u + 1] {
                    if c <= n {
                        stack.push(c);
                    }
                }
            }
        }
    }
}

/// Process simulation for sample 0 of `seed`.
pub fn simulate_process(tree: &CompleteTree, k: usize, seed: u64) -> Result<SimSample> {
    process_sample(tree, k, seed, 0)
}

fn process_sample(tree: &CompleteTree, k: usize, seed: u64, index: u64) -> Result<SimSample> {
    let total = simulate_process_with(tree, k, &mut substream(seed, domain::PROCESS, index))?;
    Ok(SimSample { per_r: Vec::new(), total, variant: Variant::Node, seed, index })
}

/// Which simulator a batch uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Simulator {
    Records,
    Process,
}

/// Samples `0..samples` of `seed`, computed in parallel. The result does not
/// depend on the number of worker threads.
pub fn simulate_batch(
    tree: &CompleteTree,
    k: usize,
    variant: Variant,
    simulator: Simulator,
    samples: u64,
    seed: u64,
) -> Result<Vec<SimSample>> {
    check_k(k)?;
    tree.check_size()?;
    if simulator == Simulator::Process && variant == Variant::Edge {
        return Err(KcutError::config("the process simulator only covers the node variant"));
    }
    (0..samples)
        .into_par_iter()
        .map(|i| match simulator {
            Simulator::Records => records_sample(tree, k, seed, i, variant),
            Simulator::Process => process_sample(tree, k, seed, i),
        })
        .collect()
}

/// Exact law of the total cut count for a tiny tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPmf {
    pub atoms: BTreeMap<u64, BigRational>,
}

impl ExactPmf {
    pub fn mean(&self) -> BigRational {
        self.atoms
            .iter()
            .map(|(&x, p)| p * BigRational::from_integer(BigInt::from(x)))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn prob(&self, x: u64) -> BigRational {
        self.atoms.get(&x).cloned().unwrap_or_else(BigRational::zero)
    }
}

/// Enumerate every play of the cutting game on `n ≤ 4` nodes with `k ≤ 3`.
pub fn brute_force_distribution(n: u64, k: usize) -> Result<ExactPmf> {
    if n == 0 || k == 0 {
        return Err(KcutError::domain("n and k must be positive"));
    }
    if n > 4 || k > 3 {
        return Err(KcutError::config(format!("brute force is capped at n ≤ 4, k ≤ 3 (got n = {n}, k = {k})")));
    }
    let tree = CompleteTree::new(n)?;
    let n = n as usize;
    let ku = k as u8;
    // a node is selectable iff neither it nor any ancestor has been cut k times
    let selectable = |state: &[u8]| -> Vec<usize> {
        (1..=n)
            .filter(|&v| {
                let mut u = v;
                while u >= 1 {
                    if state[u - 1] == ku {
                        return false;
                    }
                    u /= 2;
                }
                true
            })
            .collect()
    };
    let mut atoms: BTreeMap<u64, BigRational> = BTreeMap::new();
    let mut frontier: HashMap<Vec<u8>, BigRational> = HashMap::new();
    frontier.insert(vec![0u8; n], BigRational::one());
    let mut step = 0u64;
    while !frontier.is_empty() {
        step += 1;
        let mut next: HashMap<Vec<u8>, BigRational> = HashMap::new();
        for (state, p) in frontier {
            let choices = selectable(&state);
            let share = p / BigRational::from_integer(BigInt::from(choices.len()));
            for v in choices {
                let mut s = state.clone();
                s[v - 1] += 1;
                if v == 1 && s[0] == ku {
                    *atoms.entry(step).or_insert_with(BigRational::zero) += &share;
                } else {
                    *next.entry(s).or_insert_with(BigRational::zero) += &share;
                }
            }
        }
        frontier = next;
    }
    debug_assert_eq!(tree.n() as usize, n);
    Ok(ExactPmf { atoms })
}

fn check_rescale(table: &ConstantTable, n: f64) -> Result<()> {
    if !(n >= 4.0) {
        return Err(KcutError::domain(format!("rescaling needs n ≥ 4, got {n}")));
    }
    if table.k == 0 {
        return Err(KcutError::domain("empty constant table"));
    }
    Ok(())
}

/// `x · lg(n)^{r/k+1} / (n C2(r)) − μ_{r,n}` for a raw r-record count `x`.
pub fn rescale_count(x: f64, table: &ConstantTable, n: f64) -> Result<f64> {
    check_rescale(table, n)?;
    Ok(x * table.rescale_factor(n) - table.mu(n)?)
}

/// Rescaled r-record count of a record-simulator sample.
pub fn rescale_sample(sample: &SimSample, r: usize, table: &ConstantTable, n: f64) -> Result<f64> {
    if sample.per_r.len() != table.k {
        return Err(KcutError::domain(format!(
            "sample carries {} record orders but the table is for k = {}",
            sample.per_r.len(),
            table.k
        )));
    }
    if table.r != r {
        return Err(KcutError::domain(format!("table is for r = {}, asked for r = {r}", table.r)));
    }
    rescale_count(sample.per_r[r - 1] as f64, table, n)
}

/// Centering and scale for the total cut count: `tables[r-1]` must hold the
/// constants for `(k, r)`.
#[derive(Debug, Clone)]
pub struct TotalRescaling {
    pub factor: f64,
    pub center: f64,
}

impl TotalRescaling {
    pub fn new(tables: &[ConstantTable], n: f64) -> Result<Self> {
        let k = tables.len();
        if k == 0 || tables.iter().enumerate().any(|(i, t)| t.k != k || t.r != i + 1) {
            return Err(KcutError::domain("total rescaling needs the tables for r = 1..k in order"));
        }
        check_rescale(&tables[0], n)?;
        let lg = n.log2();
        let mut center = 0.0;
        for t in tables {
            let weight = lg.powf(-((t.r - 1) as f64) / k as f64) * t.c2 / tables[0].c2;
            center += weight * t.mu(n)?;
        }
        Ok(Self { factor: tables[0].rescale_factor(n), center })
    }

    pub fn apply(&self, total: f64) -> f64 {
        total * self.factor - self.center
    }
}

/// Rescaled total of a sample (either simulator) for the given tables.
pub fn rescale_total(sample: &SimSample, tables: &[ConstantTable], n: f64) -> Result<f64> {
    if !sample.per_r.is_empty() && sample.per_r.len() != tables.len() {
        return Err(KcutError::domain("sample k does not match the tables"));
    }
    Ok(TotalRescaling::new(tables, n)?.apply(sample.total as f64))
}

//! Modular subset sum over the weights `6^j mod p`.
//!
//! Three solvers share one instance type:
//!
//! * exhaustive: scans all `2^n` selections in increasing mask order;
//! * meet-in-the-middle: sorts the subset sums of the low half and streams
//!   the high half against it;
//! * list-merge: a seeded k-tree merge for the dense regime. Disjoint
//!   random groups of weights give `2^d` lists of subset sums; each merge
//!   level keeps only pairs whose sum lies in a shrinking window around zero
//!   (mod p), and the root merge asks for an exact zero. It is heuristic and
//!   can give up; the other two are complete.
//!
//! Every returned [`SubsetSumSolution`] has been re-summed with big-integer
//! arithmetic, independent of the solver's internal representation.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::residue::{Big, Residues, Word};
use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus};

/// Largest `n` the exhaustive scan accepts.
pub const EXHAUSTIVE_MAX_N: usize = 24;
/// Largest `n` meet-in-the-middle accepts.
pub const MEET_IN_MIDDLE_MAX_N: usize = 48;
/// Restarts granted to the list-merge solver by default.
pub const DEFAULT_RESTARTS: usize = 32;

/// Largest weight group per leaf list (leaf lists have `2^group` entries).
const MAX_GROUP: usize = 20;
/// Solutions collected at the root before picking the smallest.
const ROOT_SOLUTIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveStrategy {
    Exhaustive,
    MeetInMiddle,
    ListMerge,
    #[default]
    Auto,
}

impl fmt::Display for SolveStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStrategy::Exhaustive => "exhaustive",
            SolveStrategy::MeetInMiddle => "meet-in-middle",
            SolveStrategy::ListMerge => "list-merge",
            SolveStrategy::Auto => "auto",
        })
    }
}

impl FromStr for SolveStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exhaustive" => Ok(SolveStrategy::Exhaustive),
            "meet-in-middle" | "mitm" => Ok(SolveStrategy::MeetInMiddle),
            "list-merge" => Ok(SolveStrategy::ListMerge),
            "auto" => Ok(SolveStrategy::Auto),
            other => Err(Error::Parse(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Find `x in {0,1}^n` with `sum x_j 6^j = target (mod p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSumInstance {
    n: usize,
    target: FieldElement,
}

impl SubsetSumInstance {
    pub fn new(n: usize, target: FieldElement) -> SubsetSumInstance {
        SubsetSumInstance { n, target }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn target(&self) -> &FieldElement {
        &self.target
    }

    pub fn modulus(&self) -> &Modulus {
        self.target.modulus()
    }

    /// `6^0, 6^1, ..., 6^(n-1) mod p`.
    pub fn weights(&self) -> Vec<BigUint> {
        let m = self.modulus();
        let mut out = Vec::with_capacity(self.n);
        let mut w = BigUint::from(1u32) % m.value();
        for _ in 0..self.n {
            out.push(w.clone());
            w = m.mul_small_raw(&w, 6);
        }
        out
    }

    /// Smallest `n` for which the dense-regime heuristic is expected to work:
    /// `ceil(2^sqrt(2 log2 p))`.
    pub fn dense_threshold(modulus: &Modulus) -> usize {
        (2.0 * modulus.log2()).sqrt().exp2().ceil() as usize
    }
}

/// A verified selection vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSumSolution {
    x: Vec<bool>,
}

impl SubsetSumSolution {
    /// Checks `sum x_j 6^j = target` by direct summation.
    pub fn new(instance: &SubsetSumInstance, x: Vec<bool>) -> Result<SubsetSumSolution> {
        if x.len() != instance.n {
            return Err(Error::Verification(format!(
                "selection has length {}, instance has n = {}",
                x.len(),
                instance.n
            )));
        }
        let m = instance.modulus();
        let mut sum = BigUint::zero();
        let mut w = BigUint::from(1u32) % m.value();
        for &bit in &x {
            if bit {
                sum += &w;
            }
            w = (&w * 6u32) % m.value();
        }
        if sum % m.value() != *instance.target.value() {
            return Err(Error::Verification(
                "subset sum does not hit the target".into(),
            ));
        }
        Ok(SubsetSumSolution { x })
    }

    pub fn x(&self) -> &[bool] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.x.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub strategy: SolveStrategy,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            strategy: SolveStrategy::Auto,
            seed: 0,
            restarts: DEFAULT_RESTARTS,
        }
    }
}

pub fn solve_subset_sum(
    instance: &SubsetSumInstance,
    strategy: SolveStrategy,
    seed: u64,
) -> Result<SubsetSumSolution> {
    solve_subset_sum_with(
        instance,
        &SolverConfig {
            strategy,
            seed,
            ..SolverConfig::default()
        },
    )
}

/// The strategy `Auto` resolves to for this instance.
pub fn resolve_strategy(instance: &SubsetSumInstance) -> SolveStrategy {
    let n = instance.n;
    if n <= 20 {
        SolveStrategy::Exhaustive
    } else if dense_plan(n, instance.modulus().log2()).is_some() {
        SolveStrategy::ListMerge
    } else if n <= 40 {
        SolveStrategy::MeetInMiddle
    } else {
        SolveStrategy::ListMerge
    }
}

pub fn solve_subset_sum_with(
    instance: &SubsetSumInstance,
    config: &SolverConfig,
) -> Result<SubsetSumSolution> {
    let strategy = match config.strategy {
        SolveStrategy::Auto => resolve_strategy(instance),
        s => s,
    };
    let weights = instance.weights();
    let target = instance.target.value();
    let modulus = instance.modulus();
    let x = match Word::new(modulus) {
        Some(word) => run(&word, strategy, &weights, target, modulus, config),
        None => run(
            &Big::new(modulus),
            strategy,
            &weights,
            target,
            modulus,
            config,
        ),
    }?;
    SubsetSumSolution::new(instance, x)
}

fn run<R: Residues>(
    ar: &R,
    strategy: SolveStrategy,
    weights: &[BigUint],
    target: &BigUint,
    modulus: &Modulus,
    config: &SolverConfig,
) -> Result<Vec<bool>> {
    let w: Vec<R::V> = weights.iter().map(|v| ar.lift(v)).collect();
    let t = ar.lift(target);
    let n = w.len();
    match strategy {
        SolveStrategy::Exhaustive => {
            if n > EXHAUSTIVE_MAX_N {
                return Err(Error::StrategyUnsuitable(format!(
                    "exhaustive scan limited to n <= {EXHAUSTIVE_MAX_N}, got {n}"
                )));
            }
            exhaustive(ar, &w, &t)
                .map(|mask| mask_to_bits(mask, n))
                .ok_or(Error::Unsolvable)
        }
        SolveStrategy::MeetInMiddle => {
            if n > MEET_IN_MIDDLE_MAX_N {
                return Err(Error::StrategyUnsuitable(format!(
                    "meet-in-the-middle limited to n <= {MEET_IN_MIDDLE_MAX_N}, got {n}"
                )));
            }
            meet_in_middle(ar, &w, &t)
                .map(|mask| mask_to_bits(mask, n))
                .ok_or(Error::Unsolvable)
        }
        SolveStrategy::ListMerge => list_merge(ar, &w, &t, modulus, config),
        SolveStrategy::Auto => unreachable!("resolved by caller"),
    }
}

fn mask_to_bits(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|j| (mask >> j) & 1 == 1).collect()
}

/// Calls `visit(mask, sum)` for every mask in `0..2^n` in increasing order.
/// Stops early when `visit` returns `true`.
fn for_each_subset_sum<R: Residues>(
    ar: &R,
    w: &[R::V],
    mut visit: impl FnMut(u64, &R::V) -> bool,
) -> bool {
    let n = w.len();
    // prefix[k] = w_0 + ... + w_(k-1)
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(ar.zero());
    for (k, wk) in w.iter().enumerate() {
        let next = ar.add(&prefix[k], wk);
        prefix.push(next);
    }
    let last = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut sum = ar.zero();
    let mut mask = 0u64;
    loop {
        if visit(mask, &sum) {
            return true;
        }
        if mask == last {
            return false;
        }
        // mask + 1 clears the k trailing ones and sets bit k.
        let k = mask.trailing_ones() as usize;
        sum = ar.add(&ar.sub(&sum, &prefix[k]), &w[k]);
        mask += 1;
    }
}

fn exhaustive<R: Residues>(ar: &R, w: &[R::V], target: &R::V) -> Option<u64> {
    let mut found = None;
    for_each_subset_sum(ar, w, |mask, sum| {
        if sum == target {
            found = Some(mask);
            true
        } else {
            false
        }
    });
    found
}

fn meet_in_middle<R: Residues>(ar: &R, w: &[R::V], target: &R::V) -> Option<u64> {
    let low = w.len() / 2;
    let mut table: Vec<(R::V, u64)> = Vec::with_capacity(1usize << low);
    for_each_subset_sum(ar, &w[..low], |mask, sum| {
        table.push((sum.clone(), mask));
        false
    });
    table.sort_unstable();
    let mut found = None;
    for_each_subset_sum(ar, &w[low..], |high, sum| {
        let need = ar.sub(target, sum);
        let i = table.partition_point(|(v, _)| v < &need);
        if i < table.len() && table[i].0 == need {
            found = Some(table[i].1 | (high << low));
            true
        } else {
            false
        }
    });
    found
}

/// Shape of a list-merge run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergePlan {
    /// Number of merge levels; there are `2^depth` leaf lists.
    pub depth: u32,
    /// Weights per leaf list.
    pub groups: Vec<usize>,
    /// Bits of the window shrink per intermediate level.
    pub window_bits: u32,
}

/// The cheapest k-tree shape whose windows absorb all of `log2 p` with one
/// bit of slack per leaf, if `n` weights suffice for it.
pub fn dense_plan(n: usize, log2_p: f64) -> Option<MergePlan> {
    let mut best: Option<(f64, MergePlan)> = None;
    let mut depth = 1u32;
    while (1usize << depth) <= n && depth < 20 {
        let window_bits = (log2_p / (depth as f64 + 1.0)).ceil().max(1.0) as u32;
        let group = window_bits as usize + 1;
        let lists = 1usize << depth;
        if group <= MAX_GROUP && lists * group <= n {
            let cost = (group as f64 + depth as f64).exp2();
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((
                    cost,
                    MergePlan {
                        depth,
                        groups: vec![group; lists],
                        window_bits,
                    },
                ));
            }
        }
        depth += 1;
    }
    best.map(|(_, plan)| plan)
}

/// The plan list-merge actually uses: the dense plan, or a two-list exact
/// join over (up to) all weights when the instance is too sparse.
pub fn merge_plan(n: usize, log2_p: f64) -> MergePlan {
    dense_plan(n, log2_p).unwrap_or_else(|| {
        let low = (n / 2).min(MAX_GROUP);
        let high = (n - n / 2).min(MAX_GROUP);
        MergePlan {
            depth: 1,
            groups: vec![low, high],
            window_bits: 0,
        }
    })
}

#[derive(Clone, Debug)]
struct Node<V> {
    value: V,
    /// Leaf: subset mask within the group. Inner: index into the left child list.
    left: u32,
    /// Inner: index into the right child list.
    right: u32,
}

fn list_merge<R: Residues>(
    ar: &R,
    w: &[R::V],
    target: &R::V,
    modulus: &Modulus,
    config: &SolverConfig,
) -> Result<Vec<bool>> {
    let n = w.len();
    let plan = merge_plan(n, modulus.log2());
    let lists = plan.groups.len();
    let used: usize = plan.groups.iter().sum();
    let cap = 1usize << (plan.window_bits as usize + 3).clamp(10, 22);

    // Window half-widths B_1 > B_2 > ... for the intermediate levels.
    let bounds: Vec<R::V> = (1..plan.depth)
        .map(|level| {
            let shift = level as u64 * plan.window_bits as u64 + 1;
            ar.lift(&(modulus.value() >> shift))
        })
        .collect();

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let attempts = config.restarts.max(1);

    for _ in 0..attempts {
        order.shuffle(&mut rng);
        let mut groups: Vec<&[usize]> = Vec::with_capacity(lists);
        let mut start = 0;
        for &g in &plan.groups {
            groups.push(&order[start..start + g]);
            start += g;
        }
        debug_assert_eq!(start, used);

        // Leaves; the first one absorbs the target.
        let mut levels: Vec<Vec<Vec<Node<R::V>>>> = Vec::with_capacity(plan.depth as usize + 1);
        let leaves: Vec<Vec<Node<R::V>>> = groups
            .iter()
            .enumerate()
            .map(|(li, idx)| {
                let gw: Vec<R::V> = idx.iter().map(|&i| w[i].clone()).collect();
                let mut list = Vec::with_capacity(1usize << gw.len());
                for_each_subset_sum(ar, &gw, |mask, sum| {
                    let value = if li == 0 {
                        ar.sub(sum, target)
                    } else {
                        sum.clone()
                    };
                    list.push(Node {
                        value,
                        left: mask as u32,
                        right: 0,
                    });
                    false
                });
                list
            })
            .collect();
        levels.push(leaves);

        for bound in &bounds {
            let current = levels.last_mut().expect("at least the leaves");
            for list in current.iter_mut() {
                list.sort_unstable_by(|a, b| a.value.cmp(&b.value));
            }
            let next: Vec<Vec<Node<R::V>>> = current
                .chunks(2)
                .map(|pair| merge_window(ar, &pair[0], &pair[1], bound, cap))
                .collect();
            levels.push(next);
        }

        let top = levels.last_mut().expect("at least the leaves");
        debug_assert_eq!(top.len(), 2);
        top[1].sort_unstable_by(|a, b| a.value.cmp(&b.value));
        let roots = merge_exact(ar, &top[0], &top[1], ROOT_SOLUTIONS);

        let best = roots
            .into_iter()
            .map(|(li, ri)| {
                let mut x = vec![false; n];
                let depth = levels.len() - 1;
                unfold(&levels, depth, 0, li, &groups, &mut x);
                unfold(&levels, depth, 1, ri, &groups, &mut x);
                x
            })
            .min();
        if let Some(x) = best {
            return Ok(x);
        }
    }
    Err(Error::SolverGaveUp { attempts })
}

/// Pairs `(x, y)` with `x + y` within `[-bound, bound]` mod p. `right` must
/// be sorted.
fn merge_window<R: Residues>(
    ar: &R,
    left: &[Node<R::V>],
    right: &[Node<R::V>],
    bound: &R::V,
    cap: usize,
) -> Vec<Node<R::V>> {
    let mut out = Vec::new();
    let max = ar.max();
    let lower = |v: &R::V| right.partition_point(|n| &n.value < v);
    let upper = |v: &R::V| right.partition_point(|n| &n.value <= v);
    'outer: for (li, x) in left.iter().enumerate() {
        let neg = ar.neg(&x.value);
        let lo = ar.sub(&neg, bound);
        let hi = ar.add(&neg, bound);
        let ranges = if lo <= hi {
            [(lower(&lo), upper(&hi)), (0, 0)]
        } else {
            [(lower(&lo), upper(&max)), (0, upper(&hi))]
        };
        for (a, b) in ranges {
            for (ri, y) in right.iter().enumerate().take(b).skip(a) {
                out.push(Node {
                    value: ar.add(&x.value, &y.value),
                    left: li as u32,
                    right: ri as u32,
                });
                if out.len() >= cap {
                    break 'outer;
                }
            }
        }
    }
    out
}

/// Index pairs with `x + y = 0` mod p. `right` must be sorted.
fn merge_exact<R: Residues>(
    ar: &R,
    left: &[Node<R::V>],
    right: &[Node<R::V>],
    limit: usize,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (li, x) in left.iter().enumerate() {
        let need = ar.neg(&x.value);
        let mut ri = right.partition_point(|n| n.value < need);
        while ri < right.len() && right[ri].value == need {
            out.push((li, ri));
            if out.len() >= limit {
                return out;
            }
            ri += 1;
        }
    }
    out
}

fn unfold<V>(
    levels: &[Vec<Vec<Node<V>>>],
    level: usize,
    list: usize,
    index: usize,
    groups: &[&[usize]],
    x: &mut [bool],
) {
    let node = &levels[level][list][index];
    if level == 0 {
        for (bit, &weight_index) in groups[list].iter().enumerate() {
            if (node.left >> bit) & 1 == 1 {
                x[weight_index] = true;
            }
        }
    } else {
        unfold(levels, level - 1, 2 * list, node.left as usize, groups, x);
        unfold(
            levels,
            level - 1,
            2 * list + 1,
            node.right as usize,
            groups,
            x,
        );
    }
}

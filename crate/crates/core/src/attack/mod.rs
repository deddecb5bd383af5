//! Second preimages for `H` from the digest and the message length alone.
//!
//! 1. Decode the digest to the product map `(r, s)`.
//! 2. Recover the letter counts `(a, b)` from `r = 2^a 3^b`.
//! 3. Take the canonical word `(01)^n` + surplus letters, `n = min(a, b)`,
//!    with constant term `u`.
//! 4. Swapping block `j` from `01` to `10` adds exactly `6^j` to the constant
//!    term, so a selection `x` with `sum x_j 6^j = s - u` turns the canonical
//!    word into a preimage.

mod residue;
pub mod subset_sum;

use std::cell::Cell;

use num_bigint::BigUint;
use num_traits::One;

pub use subset_sum::{
    solve_subset_sum, solve_subset_sum_with, SolveStrategy, SolverConfig, SubsetSumInstance,
    SubsetSumSolution,
};

use crate::affine::{AffineMap, HashOutput};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus};
use crate::hashes::{hash_h, product_map};
use crate::transcript::Transcript;

/// Letter counts of a message: `zeros` copies of `0`, `ones` copies of `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExponentSplit {
    zeros: usize,
    ones: usize,
}

impl ExponentSplit {
    pub fn new(zeros: usize, ones: usize) -> ExponentSplit {
        ExponentSplit { zeros, ones }
    }

    pub fn of(m: &BitString) -> ExponentSplit {
        ExponentSplit::new(m.count_zeros(), m.count_ones())
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn len(&self) -> usize {
        self.zeros + self.ones
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of swappable `01` blocks.
    pub fn blocks(&self) -> usize {
        self.zeros.min(self.ones)
    }

    /// `2^zeros * 3^ones mod p`.
    pub fn linear_part(&self, modulus: &Modulus) -> FieldElement {
        &modulus.element(2u32).pow_u64(self.zeros as u64)
            * &modulus.element(3u32).pow_u64(self.ones as u64)
    }
}

/// Output of [`recover_exponents_counted`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovery {
    pub split: ExponentSplit,
    /// How many splits of the requested length match `r`.
    pub multiplicity: usize,
    /// Field operations plus table comparisons performed.
    pub operations: u64,
}

pub fn recover_exponents(r: &FieldElement, length: usize) -> Result<ExponentSplit> {
    recover_exponents_counted(r, length).map(|rec| rec.split)
}

fn fingerprint(v: &BigUint) -> u64 {
    v.iter_u64_digits().next().unwrap_or(0)
}

/// Finds `(a, b)` with `a + b = length` and `2^a 3^b = r`.
///
/// The powers `2^0 .. 2^length` are tabulated by 64-bit fingerprint and
/// sorted; then `r, r/3, r/9, ...` are looked up in turn. A fingerprint hit
/// at the complementary index is confirmed with a full comparison. When
/// several splits match, the one with the fewest ones wins.
pub fn recover_exponents_counted(r: &FieldElement, length: usize) -> Result<Recovery> {
    let m = r.modulus();
    let mut ops = 0u64;

    let mut table: Vec<(u64, usize)> = Vec::with_capacity(length + 1);
    let mut pow2 = BigUint::one();
    for i in 0..=length {
        table.push((fingerprint(&pow2), i));
        if i < length {
            pow2 = m.add_raw(&pow2, &pow2);
            ops += 1;
        }
    }
    let comparisons = Cell::new(0u64);
    table.sort_unstable_by(|a, b| {
        comparisons.set(comparisons.get() + 1);
        a.cmp(b)
    });

    let inv3 = m.inv_raw(&BigUint::from(3u32))?;
    ops += 1;
    let two = m.element(2u32);
    let mut q = r.value().clone();
    let mut matches: Vec<usize> = Vec::new();
    for ones in 0..=length {
        let fp = fingerprint(&q);
        // Counted lower-bound search.
        let (mut lo, mut hi) = (0usize, table.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            comparisons.set(comparisons.get() + 1);
            if table[mid].0 < fp {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        for &(entry_fp, zeros) in &table[lo..] {
            if entry_fp != fp {
                break;
            }
            if zeros + ones == length {
                ops += 2 * (usize::BITS - zeros.leading_zeros()) as u64;
                if *two.pow_u64(zeros as u64).value() == q {
                    matches.push(ones);
                }
            }
        }
        if ones < length {
            q = m.mul_raw(&q, &inv3);
            ops += 1;
        }
    }
    ops += comparisons.get();

    match matches.first() {
        Some(&ones) => Ok(Recovery {
            split: ExponentSplit::new(length - ones, ones),
            multiplicity: matches.len(),
            operations: ops,
        }),
        None => Err(Error::NotAnImage { length }),
    }
}

/// `(01)^n` followed by the surplus letter `|a - b|` times.
pub fn canonical_word(split: &ExponentSplit) -> BitString {
    let n = split.blocks();
    let mut out = BitString::with_capacity(split.len());
    for _ in 0..n {
        out.push(false);
        out.push(true);
    }
    let surplus = split.zeros < split.ones;
    for _ in 0..(split.len() - 2 * n) {
        out.push(surplus);
    }
    out
}

/// Subset-sum instance whose solutions turn the canonical word for `split`
/// into a preimage of `y`.
pub fn swap_target(y: &AffineMap, split: &ExponentSplit) -> Result<SubsetSumInstance> {
    let m = y.modulus();
    if split.linear_part(m) != y.r() {
        return Err(Error::SplitMismatch);
    }
    let u = product_map(&canonical_word(split), m).s();
    Ok(SubsetSumInstance::new(split.blocks(), &y.s() - &u))
}

/// Canonical word with block `j` written `10` wherever `x_j = 1`.
pub fn assemble_second_preimage(split: &ExponentSplit, x: &SubsetSumSolution) -> Result<BitString> {
    if x.len() != split.blocks() {
        return Err(Error::Verification(format!(
            "selection of length {} for {} blocks",
            x.len(),
            split.blocks()
        )));
    }
    let mut out = canonical_word(split).into_bits();
    for (j, &swap) in x.x().iter().enumerate() {
        if swap {
            out.swap(2 * j, 2 * j + 1);
        }
    }
    Ok(BitString::from_bits(out))
}

/// Everything the pipeline produced along the way.
#[derive(Debug, Clone)]
pub struct AttackReport {
    pub preimage: BitString,
    pub split: ExponentSplit,
    pub multiplicity: usize,
    pub instance: SubsetSumInstance,
    pub solution: SubsetSumSolution,
    pub strategy: SolveStrategy,
    pub transcript: Transcript,
}

/// A length-`length` message hashing to `target`, re-verified before
/// returning.
pub fn second_preimage(target: &HashOutput, length: usize, seed: u64) -> Result<BitString> {
    let config = SolverConfig {
        seed,
        ..SolverConfig::default()
    };
    second_preimage_traced(target, length, &config).map(|r| r.preimage)
}

pub fn second_preimage_traced(
    target: &HashOutput,
    length: usize,
    config: &SolverConfig,
) -> Result<AttackReport> {
    let mut transcript = Transcript::new("second-preimage");
    transcript.set("p", target.modulus());
    transcript.set("seed", config.seed);
    transcript.set("target", target);
    transcript.set("length", length);

    let y = transcript.timed("from_output", || {
        let y = AffineMap::from_output(target);
        let fields = match &y {
            Ok(y) => vec![("r", y.r().to_string()), ("s", y.s().to_string())],
            Err(e) => vec![("error", quote(e))],
        };
        (y, fields)
    })?;

    let recovery = transcript.timed("recover_exponents", || {
        let rec = recover_exponents_counted(&y.r(), length);
        let fields = match &rec {
            Ok(rec) => vec![
                ("a", rec.split.zeros().to_string()),
                ("b", rec.split.ones().to_string()),
                ("multiplicity", rec.multiplicity.to_string()),
                ("operations", rec.operations.to_string()),
            ],
            Err(e) => vec![("error", quote(e))],
        };
        (rec, fields)
    })?;
    let split = recovery.split;

    let instance = transcript.timed("swap_target", || {
        let inst = swap_target(&y, &split);
        let fields = match &inst {
            Ok(inst) => vec![
                ("n", inst.n().to_string()),
                ("target", inst.target().to_string()),
            ],
            Err(e) => vec![("error", quote(e))],
        };
        (inst, fields)
    })?;

    let strategy = match config.strategy {
        SolveStrategy::Auto => subset_sum::resolve_strategy(&instance),
        s => s,
    };
    let solution = transcript.timed("solve_subset_sum", || {
        let sol = solve_subset_sum_with(&instance, config);
        let mut fields = vec![("strategy", strategy.to_string())];
        match &sol {
            Ok(sol) => fields.push(("swaps", sol.weight().to_string())),
            Err(e) => fields.push(("error", quote(e))),
        }
        (sol, fields)
    })?;

    let preimage = assemble_second_preimage(&split, &solution)?;
    let verified = hash_h(&preimage, target.modulus()) == *target && preimage.len() == length;
    transcript.push(
        "verify",
        vec![(
            "verdict",
            if verified { "ok" } else { "FAILED" }.to_string(),
        )],
        std::time::Duration::ZERO,
    );
    if !verified {
        return Err(Error::Verification(
            "assembled message does not hash to the target".into(),
        ));
    }
    Ok(AttackReport {
        preimage,
        split,
        multiplicity: recovery.multiplicity,
        instance,
        solution,
        strategy,
        transcript,
    })
}

fn quote(e: &Error) -> String {
    format!("{:?}", e.to_string())
}

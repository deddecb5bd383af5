//! The four hash functions: `H`, `H2`, `hatH` and `hatH2`.
//!
//! All of them are left-to-right products of generator maps. `hatH`
//! additionally multiplies by a fixed group element `g` after every
//! position `i` (1-based) with `t | i`. The `*_par` variants split the input
//! into segments and compose the partial products in order.

use rayon::prelude::*;

use crate::affine::{AffineMap, HashOutput};
use crate::bits::BitString;
use crate::field::Modulus;
use crate::params::HashParams;

/// Field-operation counts gathered by the instrumented evaluators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub multiplications: u64,
    pub additions: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.multiplications + self.additions
    }
}

impl std::ops::AddAssign for OpCount {
    fn add_assign(&mut self, rhs: OpCount) {
        self.multiplications += rhs.multiplications;
        self.additions += rhs.additions;
    }
}

/// Sink for operation counts. `()` discards them at no cost.
trait Tally {
    fn generator_step(&mut self);
}

impl Tally for () {
    #[inline]
    fn generator_step(&mut self) {}
}

impl Tally for OpCount {
    #[inline]
    fn generator_step(&mut self) {
        // (r, s) * (c, 1) = (c r, r + s)
        self.multiplications += 1;
        self.additions += 1;
    }
}

fn product_bits<T: Tally>(acc: &mut AffineMap, bits: &[bool], tally: &mut T) {
    for &b in bits {
        acc.push_generator(b);
        tally.generator_step();
    }
}

/// Left-to-right product of the generator maps; the empty string maps to the
/// identity.
pub fn product_map(m: &BitString, p: &Modulus) -> AffineMap {
    let mut acc = AffineMap::identity(p);
    product_bits(&mut acc, m.bits(), &mut ());
    acc
}

/// [`product_map`] with field operations counted.
pub fn product_map_counted(m: &BitString, p: &Modulus) -> (AffineMap, OpCount) {
    let mut acc = AffineMap::identity(p);
    let mut count = OpCount::default();
    product_bits(&mut acc, m.bits(), &mut count);
    (acc, count)
}

/// Number of field multiplications used by [`hash_h`] on `m`.
pub fn multiplication_count(m: &BitString, p: &Modulus) -> u64 {
    product_map_counted(m, p).1.multiplications
}

/// Segmented evaluation of [`product_map`]. Equal to the sequential result
/// for every segment size.
pub fn product_map_par(m: &BitString, p: &Modulus, segment: usize) -> AffineMap {
    let segment = segment.max(1);
    m.bits()
        .par_chunks(segment)
        .map(|chunk| {
            let mut acc = AffineMap::identity(p);
            product_bits(&mut acc, chunk, &mut ());
            acc
        })
        .reduce(|| AffineMap::identity(p), |a, b| a.compose_unchecked(&b))
}

pub fn hash_h(m: &BitString, p: &Modulus) -> HashOutput {
    product_map(m, p).to_output()
}

/// `H(m || (enc(h(m)) xor c_rnd))`, where `enc` is the fixed-width encoding
/// of the product map.
pub fn hash_h2(m: &BitString, params: &HashParams) -> HashOutput {
    let head = product_map(m, params.modulus());
    let suffix = xor_suffix(&head, params);
    head.compose_unchecked(&product_map(&suffix, params.modulus()))
        .to_output()
}

/// Product of the `hatH` factors for `bits` sitting at positions
/// `offset + 1 ..= offset + bits.len()` of a longer message.
pub fn hat_segment(bits: &[bool], offset: usize, params: &HashParams) -> AffineMap {
    let t = params.t();
    let g = params.g();
    let mut acc = AffineMap::identity(params.modulus());
    // Positions up to the next trigger, then full periods.
    let mut next = t - (offset % t);
    let mut rest = bits;
    while rest.len() >= next {
        let (head, tail) = rest.split_at(next);
        product_bits(&mut acc, head, &mut ());
        acc = acc.compose_unchecked(g);
        rest = tail;
        next = t;
    }
    product_bits(&mut acc, rest, &mut ());
    acc
}

pub fn hash_hat_h(m: &BitString, params: &HashParams) -> AffineMap {
    hat_segment(m.bits(), 0, params)
}

/// Segmented `hatH`; each segment carries its own position offset.
pub fn hash_hat_h_par(m: &BitString, params: &HashParams, segment: usize) -> AffineMap {
    let segment = segment.max(1);
    m.bits()
        .par_chunks(segment)
        .enumerate()
        .map(|(i, chunk)| hat_segment(chunk, i * segment, params))
        .reduce(
            || AffineMap::identity(params.modulus()),
            |a, b| a.compose_unchecked(&b),
        )
}

/// `hatH(m || (enc(hatH(m)) xor c_rnd))`. The suffix continues the position
/// count of `m`.
pub fn hash_hat_h2(m: &BitString, params: &HashParams) -> AffineMap {
    let head = hash_hat_h(m, params);
    let suffix = xor_suffix(&head, params);
    head.compose_unchecked(&hat_segment(suffix.bits(), m.len(), params))
}

fn xor_suffix(map: &AffineMap, params: &HashParams) -> BitString {
    map.encode_bits()
        .xor(params.c_rnd())
        .expect("c_rnd width is validated against the modulus")
}

/// Length below which [`pad_message`] extends its input.
pub const PAD_THRESHOLD: usize = 323;
/// Length of a padded short message.
pub const PAD_LENGTH: usize = 512;

/// Pads messages of at most [`PAD_THRESHOLD`] bits to [`PAD_LENGTH`] bits by
/// appending a single `1` followed by zeros. Longer messages are returned
/// unchanged.
pub fn pad_message(m: &BitString) -> BitString {
    if m.len() > PAD_THRESHOLD {
        return m.clone();
    }
    let mut out = m.clone();
    out.push(true);
    while out.len() < PAD_LENGTH {
        out.push(false);
    }
    out
}

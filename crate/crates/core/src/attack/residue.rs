//! Residue arithmetic for the subset-sum solvers: machine words when the
//! modulus allows it, big integers otherwise.

use std::fmt::Debug;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::field::Modulus;

pub(crate) trait Residues: Sync {
    type V: Clone + Ord + Eq + Debug + Send + Sync;

    fn zero(&self) -> Self::V;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn sub(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn lift(&self, v: &BigUint) -> Self::V;
    /// Largest residue, `p - 1`.
    fn max(&self) -> Self::V;

    fn neg(&self, a: &Self::V) -> Self::V {
        self.sub(&self.zero(), a)
    }
}

/// `p < 2^63`, so sums of two residues never overflow.
pub(crate) struct Word {
    p: u64,
}

impl Word {
    pub(crate) fn new(modulus: &Modulus) -> Option<Word> {
        modulus
            .to_u64()
            .filter(|&p| p < (1u64 << 63))
            .map(|p| Word { p })
    }
}

impl Residues for Word {
    type V = u64;

    fn zero(&self) -> u64 {
        0
    }

    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - b + a
        }
    }

    fn lift(&self, v: &BigUint) -> u64 {
        (v % self.p).to_u64().expect("reduced below p")
    }

    fn max(&self) -> u64 {
        self.p - 1
    }
}

pub(crate) struct Big {
    modulus: Modulus,
}

impl Big {
    pub(crate) fn new(modulus: &Modulus) -> Big {
        Big {
            modulus: modulus.clone(),
        }
    }
}

impl Residues for Big {
    type V = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }

    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        self.modulus.add_raw(a, b)
    }

    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        self.modulus.sub_raw(a, b)
    }

    fn lift(&self, v: &BigUint) -> BigUint {
        v % self.modulus.value()
    }

    fn max(&self) -> BigUint {
        self.modulus.value() - 1u32
    }
}

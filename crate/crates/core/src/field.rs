//! Arithmetic modulo an odd prime.
//!
//! A [`PrimeModulus`] is validated once (size, oddness, 64 Miller-Rabin
//! rounds) and then shared behind an [`Arc`]. Every [`FieldElement`] keeps
//! its value canonical in `[0, p)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Miller-Rabin rounds used when validating a modulus.
pub const PRIMALITY_ROUNDS: usize = 64;

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Shared handle to a validated modulus.
pub type Modulus = Arc<PrimeModulus>;

/// An odd prime `p > 3`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PrimeModulus {
    p: BigUint,
    bits: usize,
}

impl fmt::Debug for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeModulus({})", self.p)
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

impl PrimeModulus {
    pub fn new(p: BigUint) -> Result<Modulus> {
        if p < BigUint::from(5u32) {
            return Err(Error::InvalidModulus(format!("{p} is not greater than 3")));
        }
        if !is_probable_prime(&p, PRIMALITY_ROUNDS) {
            return Err(Error::InvalidModulus(format!("{p} is not prime")));
        }
        let bits = p.bits() as usize;
        Ok(Arc::new(PrimeModulus { p, bits }))
    }

    pub fn from_u64(p: u64) -> Result<Modulus> {
        Self::new(BigUint::from(p))
    }

    /// Parses decimal or `0x`-prefixed hexadecimal text.
    pub fn parse(text: &str) -> Result<Modulus> {
        Self::new(parse_integer(text)?)
    }

    pub fn value(&self) -> &BigUint {
        &self.p
    }

    /// `ceil(log2 p)`, which for an odd prime is its bit count.
    pub fn bit_length(&self) -> usize {
        self.bits
    }

    /// The modulus as a `u64`, when it fits.
    pub fn to_u64(&self) -> Option<u64> {
        self.p.to_u64()
    }

    pub fn log2(&self) -> f64 {
        // Exact enough for threshold computations: use the top 53 bits.
        let shift = self.bits.saturating_sub(53);
        let top = (&self.p >> shift).to_f64().unwrap_or(f64::MAX);
        top.log2() + shift as f64
    }

    pub fn element(self: &Arc<Self>, value: impl Into<BigUint>) -> FieldElement {
        FieldElement {
            value: value.into() % &self.p,
            modulus: Arc::clone(self),
        }
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        FieldElement {
            value: BigUint::zero(),
            modulus: Arc::clone(self),
        }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        FieldElement {
            value: BigUint::one(),
            modulus: Arc::clone(self),
        }
    }

    // Raw residue arithmetic. Inputs must already be reduced.

    pub(crate) fn add_raw(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let sum = a + b;
        if sum >= self.p {
            sum - &self.p
        } else {
            sum
        }
    }

    pub(crate) fn sub_raw(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.p - b + a
        }
    }

    pub(crate) fn neg_raw(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.p - a
        }
    }

    pub(crate) fn mul_raw(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.p
    }

    /// Multiplication by a small constant `c < p`, reduced by repeated
    /// subtraction when `c` is tiny.
    pub(crate) fn mul_small_raw(&self, a: &BigUint, c: u32) -> BigUint {
        let mut prod = a * c;
        if c <= 4 {
            while prod >= self.p {
                prod -= &self.p;
            }
            prod
        } else {
            prod % &self.p
        }
    }

    pub(crate) fn inv_raw(&self, a: &BigUint) -> Result<BigUint> {
        if a.is_zero() {
            return Err(Error::NotInvertible);
        }
        a.modinv(&self.p).ok_or(Error::NotInvertible)
    }
}

/// A residue modulo a [`PrimeModulus`], always in `[0, p)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: BigUint,
    modulus: Modulus,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus.p)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElement {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn into_value(self) -> BigUint {
        self.value
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn same_field(&self, other: &FieldElement) -> bool {
        Arc::ptr_eq(&self.modulus, &other.modulus) || self.modulus.p == other.modulus.p
    }

    fn check(&self, other: &FieldElement) {
        assert!(
            self.same_field(other),
            "field elements from different moduli"
        );
    }

    pub fn pow(&self, exp: &BigUint) -> FieldElement {
        mod_pow(self, exp)
    }

    pub fn pow_u64(&self, exp: u64) -> FieldElement {
        mod_pow(self, &BigUint::from(exp))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        mod_inv(self)
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.check(rhs);
        FieldElement {
            value: self.modulus.add_raw(&self.value, &rhs.value),
            modulus: Arc::clone(&self.modulus),
        }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.check(rhs);
        FieldElement {
            value: self.modulus.sub_raw(&self.value, &rhs.value),
            modulus: Arc::clone(&self.modulus),
        }
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.check(rhs);
        FieldElement {
            value: self.modulus.mul_raw(&self.value, &rhs.value),
            modulus: Arc::clone(&self.modulus),
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            value: self.modulus.neg_raw(&self.value),
            modulus: Arc::clone(&self.modulus),
        }
    }
}

/// `base^exp mod p` by left-to-right square-and-multiply.
pub fn mod_pow(base: &FieldElement, exp: &BigUint) -> FieldElement {
    let m = &base.modulus;
    let mut acc = BigUint::one();
    for i in (0..exp.bits()).rev() {
        acc = m.mul_raw(&acc, &acc);
        if exp.bit(i) {
            acc = m.mul_raw(&acc, &base.value);
        }
    }
    FieldElement {
        value: acc % &m.p,
        modulus: Arc::clone(m),
    }
}

/// Multiplicative inverse; zero has none.
pub fn mod_inv(a: &FieldElement) -> Result<FieldElement> {
    Ok(FieldElement {
        value: a.modulus.inv_raw(&a.value)?,
        modulus: Arc::clone(&a.modulus),
    })
}

/// True iff `p` and `(p - 1) / 2` are both prime.
pub fn is_safe_prime(p: &BigUint) -> bool {
    if p < &BigUint::from(5u32) || p.is_even() {
        return false;
    }
    let q: BigUint = (p - 1u32) >> 1;
    is_probable_prime(&q, PRIMALITY_ROUNDS) && is_probable_prime(p, PRIMALITY_ROUNDS)
}

/// Trial division by small primes followed by `rounds` Miller-Rabin rounds.
///
/// Witnesses come from a ChaCha stream seeded by `n` itself, so the verdict
/// for a given `n` is reproducible.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    if let Some(small) = n.to_u32() {
        if small < 2 {
            return false;
        }
        if SMALL_PRIMES.contains(&small) {
            return true;
        }
    }
    for &sp in &SMALL_PRIMES {
        if (n % sp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let twos = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> twos;

    let mut seed = [0u8; 32];
    for (dst, src) in seed.iter_mut().zip(n.to_bytes_le()) {
        *dst ^= src;
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    let two = BigUint::from(2u32);

    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..twos {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Random prime with exactly `bits` bits (`bits >= 3`).
pub fn random_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> BigUint {
    assert!(bits >= 3, "need at least 3 bits");
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, PRIMALITY_ROUNDS) {
            return candidate;
        }
    }
}

/// Random safe prime `p = 2q + 1` with exactly `bits` bits (`bits >= 4`).
pub fn random_safe_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> BigUint {
    assert!(bits >= 4, "need at least 4 bits");
    loop {
        let mut q = rng.gen_biguint(bits - 1);
        q.set_bit(bits - 2, true);
        q.set_bit(0, true);
        let p: BigUint = (&q << 1) + 1u32;
        // Cheap sieve on both before the expensive rounds.
        let sieved = SMALL_PRIMES.iter().all(|&sp| {
            let sp_big = BigUint::from(sp);
            (q == sp_big || !(&q % sp).is_zero()) && (p == sp_big || !(&p % sp).is_zero())
        });
        if sieved
            && is_probable_prime(&q, PRIMALITY_ROUNDS)
            && is_probable_prime(&p, PRIMALITY_ROUNDS)
        {
            return p;
        }
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_integer(text: &str) -> Result<BigUint> {
    let t = text.trim();
    let parsed = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        BigUint::parse_bytes(hex.as_bytes(), 16)
    } else {
        BigUint::parse_bytes(t.as_bytes(), 10)
    };
    parsed.ok_or_else(|| Error::Parse(format!("not an integer: {t:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p101() -> Modulus {
        PrimeModulus::from_u64(101).unwrap()
    }

    /// Trial-division primality, independent of Miller-Rabin.
    fn trial_prime(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn pow_examples() {
        let m = p101();
        assert_eq!(m.element(2u32).pow_u64(10), m.element(14u32));
        assert_eq!(m.element(7u32).pow_u64(0), m.one());
        assert_eq!(m.element(2u32).pow_u64(1), m.element(2u32));
    }

    #[test]
    fn inv_examples() {
        let m = p101();
        assert_eq!(m.element(6u32).inv().unwrap(), m.element(17u32));
        assert_eq!(m.element(1u32).inv().unwrap(), m.one());
        assert_eq!(m.element(3u32).inv().unwrap(), m.element(34u32));
        assert_eq!(m.zero().inv(), Err(Error::NotInvertible));
    }

    #[test]
    fn safe_prime_examples() {
        assert!(is_safe_prime(&BigUint::from(107u32)));
        assert!(!is_safe_prime(&BigUint::from(101u32)));
        assert!(is_safe_prime(&BigUint::from(7u32)));
        assert!(is_safe_prime(&BigUint::from(5u32)));
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0u64..5000 {
            assert_eq!(
                is_probable_prime(&BigUint::from(n), PRIMALITY_ROUNDS),
                trial_prime(n),
                "n = {n}"
            );
        }
        // Carmichael numbers.
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265] {
            assert!(!is_probable_prime(&BigUint::from(n), PRIMALITY_ROUNDS));
        }
    }

    #[test]
    fn modulus_validation() {
        assert!(matches!(
            PrimeModulus::from_u64(3),
            Err(Error::InvalidModulus(_))
        ));
        assert!(matches!(
            PrimeModulus::from_u64(91),
            Err(Error::InvalidModulus(_))
        ));
        assert!(PrimeModulus::from_u64(5).is_ok());
        assert_eq!(PrimeModulus::parse("0x65").unwrap().to_u64(), Some(101));
        assert_eq!(PrimeModulus::parse("101").unwrap().bit_length(), 7);
        assert!(PrimeModulus::parse("abc").is_err());
    }

    #[test]
    fn pow_agrees_with_repeated_multiplication() {
        for p in [5u64, 101, 1009] {
            let m = PrimeModulus::from_u64(p).unwrap();
            for base in 0..p.min(40) {
                let b = m.element(base);
                let mut acc = m.one();
                for e in 0..=64u64 {
                    assert_eq!(b.pow_u64(e), acc, "p={p} base={base} e={e}");
                    acc = &acc * &b;
                }
            }
        }
    }

    #[test]
    fn subtraction_wraps() {
        let m = p101();
        assert_eq!(&m.element(3u32) - &m.element(5u32), m.element(99u32));
        assert_eq!(-&m.element(1u32), m.element(100u32));
        assert_eq!(-&m.zero(), m.zero());
    }

    #[test]
    fn generated_primes_have_requested_size() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let p = random_prime(60, &mut rng);
        assert_eq!(p.bits(), 60);
        let sp = random_safe_prime(36, &mut rng);
        assert_eq!(sp.bits(), 36);
        assert!(is_safe_prime(&sp));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn inverse_is_inverse(a in 1u64..1009) {
                let m = PrimeModulus::from_u64(1009).unwrap();
                let x = m.element(a);
                prop_assert_eq!(&x * &x.inv().unwrap(), m.one());
            }

            #[test]
            fn pow_adds_exponents(a in 0u64..1009, e1 in 0u64..5000, e2 in 0u64..5000) {
                let m = PrimeModulus::from_u64(1009).unwrap();
                let x = m.element(a);
                prop_assert_eq!(x.pow_u64(e1 + e2), &x.pow_u64(e1) * &x.pow_u64(e2));
            }
        }
    }
}

//! Invertible affine maps `x -> r*x + s` over a prime field.
//!
//! A map is stored as the upper-triangular matrix `[[r, s], [0, 1]]`, and
//! [`AffineMap::compose`] is the matrix product `left * right`, i.e. the
//! function `left(right(x))`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffineMap {
    r: BigUint,
    s: BigUint,
    modulus: Modulus,
}

impl fmt::Debug for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffineMap({},{} mod {})", self.r, self.s, self.modulus)
    }
}

/// Renders as `r,s`.
impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.r, self.s)
    }
}

impl AffineMap {
    pub fn new(r: FieldElement, s: FieldElement) -> Result<AffineMap> {
        if !r.same_field(&s) {
            return Err(Error::ModulusMismatch);
        }
        if r.is_zero() {
            return Err(Error::NotInvertible);
        }
        let modulus = Arc::clone(r.modulus());
        Ok(AffineMap {
            r: r.into_value(),
            s: s.into_value(),
            modulus,
        })
    }

    /// Builds a map from raw integers, reducing them mod p.
    pub fn from_values(
        modulus: &Modulus,
        r: impl Into<BigUint>,
        s: impl Into<BigUint>,
    ) -> Result<AffineMap> {
        AffineMap::new(modulus.element(r), modulus.element(s))
    }

    pub(crate) fn from_raw(modulus: &Modulus, r: BigUint, s: BigUint) -> AffineMap {
        debug_assert!(!r.is_zero() && &r < modulus.value() && &s < modulus.value());
        AffineMap {
            r,
            s,
            modulus: Arc::clone(modulus),
        }
    }

    pub fn identity(modulus: &Modulus) -> AffineMap {
        AffineMap::from_raw(modulus, BigUint::one(), BigUint::zero())
    }

    /// `f0 = 2x + 1` for bit 0, `f1 = 3x + 1` for bit 1.
    pub fn generator(modulus: &Modulus, bit: bool) -> AffineMap {
        let r = if bit { 3u32 } else { 2u32 };
        AffineMap::from_raw(modulus, BigUint::from(r), BigUint::one())
    }

    /// Parses `r,s`.
    pub fn parse(modulus: &Modulus, text: &str) -> Result<AffineMap> {
        let (r, s) = parse_pair(text)?;
        AffineMap::from_values(modulus, r, s)
    }

    pub fn r(&self) -> FieldElement {
        self.modulus.element(self.r.clone())
    }

    pub fn s(&self) -> FieldElement {
        self.modulus.element(self.s.clone())
    }

    pub fn r_value(&self) -> &BigUint {
        &self.r
    }

    pub fn s_value(&self) -> &BigUint {
        &self.s
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn is_identity(&self) -> bool {
        self.r.is_one() && self.s.is_zero()
    }

    pub fn same_field(&self, other: &AffineMap) -> bool {
        Arc::ptr_eq(&self.modulus, &other.modulus) || self.modulus == other.modulus
    }

    /// Evaluates the map at `x`.
    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        &(&self.r() * x) + &self.s()
    }

    /// Matrix product `self * right`: `(r_L r_R, r_L s_R + s_L)`.
    pub fn compose(&self, right: &AffineMap) -> Result<AffineMap> {
        if !self.same_field(right) {
            return Err(Error::ModulusMismatch);
        }
        Ok(self.compose_unchecked(right))
    }

    pub(crate) fn compose_unchecked(&self, right: &AffineMap) -> AffineMap {
        let m = &self.modulus;
        let r = m.mul_raw(&self.r, &right.r);
        let s = m.add_raw(&m.mul_raw(&self.r, &right.s), &self.s);
        AffineMap::from_raw(m, r, s)
    }

    /// Right-multiplication by a generator: two field operations.
    pub(crate) fn push_generator(&mut self, bit: bool) {
        let m = &self.modulus;
        let c = if bit { 3 } else { 2 };
        // (r, s) * (c, 1) = (c r, r + s)
        let s = m.add_raw(&self.r, &self.s);
        self.r = m.mul_small_raw(&self.r, c);
        self.s = s;
    }

    /// `(r^-1, -r^-1 s)`.
    pub fn inverse(&self) -> Result<AffineMap> {
        let m = &self.modulus;
        let r_inv = m.inv_raw(&self.r)?;
        let s = m.neg_raw(&m.mul_raw(&r_inv, &self.s));
        Ok(AffineMap::from_raw(m, r_inv, s))
    }

    pub fn to_output(&self) -> HashOutput {
        HashOutput {
            first: self.modulus.add_raw(&self.r, &self.s),
            second: self.s.clone(),
            modulus: Arc::clone(&self.modulus),
        }
    }

    pub fn from_output(output: &HashOutput) -> Result<AffineMap> {
        let m = &output.modulus;
        let r = m.sub_raw(&output.first, &output.second);
        if r.is_zero() {
            return Err(Error::InvalidHashOutput);
        }
        Ok(AffineMap::from_raw(m, r, output.second.clone()))
    }

    /// Big-endian `r || s`, each component `ceil(log2 p)` bits wide.
    pub fn encode_bits(&self) -> BitString {
        let width = self.modulus.bit_length() as u64;
        let mut out = BitString::with_capacity(2 * width as usize);
        for value in [&self.r, &self.s] {
            for i in (0..width).rev() {
                out.push(value.bit(i));
            }
        }
        out
    }

    pub fn decode_bits(modulus: &Modulus, bits: &BitString) -> Result<AffineMap> {
        let width = modulus.bit_length();
        if bits.len() != 2 * width {
            return Err(Error::Encoding(format!(
                "expected {} bits, got {}",
                2 * width,
                bits.len()
            )));
        }
        let read = |chunk: &[bool]| {
            let mut v = BigUint::zero();
            for &b in chunk {
                v <<= 1u32;
                if b {
                    v += 1u32;
                }
            }
            v
        };
        let r = read(&bits.bits()[..width]);
        let s = read(&bits.bits()[width..]);
        if &r >= modulus.value() || &s >= modulus.value() {
            return Err(Error::Encoding("component out of range".into()));
        }
        if r.is_zero() {
            return Err(Error::Encoding("zero linear coefficient".into()));
        }
        Ok(AffineMap::from_raw(modulus, r, s))
    }
}

/// The published digest `(r + s, s)` of a product map.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HashOutput {
    first: BigUint,
    second: BigUint,
    modulus: Modulus,
}

impl fmt::Debug for HashOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HashOutput({},{} mod {})",
            self.first, self.second, self.modulus
        )
    }
}

/// Renders as `first,second`.
impl fmt::Display for HashOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.first, self.second)
    }
}

impl HashOutput {
    pub fn new(first: FieldElement, second: FieldElement) -> Result<HashOutput> {
        if !first.same_field(&second) {
            return Err(Error::ModulusMismatch);
        }
        let modulus = Arc::clone(first.modulus());
        Ok(HashOutput {
            first: first.into_value(),
            second: second.into_value(),
            modulus,
        })
    }

    /// Parses `first,second`; the pair must decode to an invertible map.
    pub fn parse(modulus: &Modulus, text: &str) -> Result<HashOutput> {
        let (first, second) = parse_pair(text)?;
        let out = HashOutput::new(modulus.element(first), modulus.element(second))?;
        AffineMap::from_output(&out)?;
        Ok(out)
    }

    pub fn first(&self) -> FieldElement {
        self.modulus.element(self.first.clone())
    }

    pub fn second(&self) -> FieldElement {
        self.modulus.element(self.second.clone())
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn to_hex_string(&self) -> String {
        format!("0x{:x},0x{:x}", self.first, self.second)
    }
}

fn parse_pair(text: &str) -> Result<(BigUint, BigUint)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected \"a,b\", got {text:?}")))?;
    Ok((
        crate::field::parse_integer(a)?,
        crate::field::parse_integer(b)?,
    ))
}

/// Convenience for `AffineMap::generator`.
pub fn generator(modulus: &Modulus, bit: bool) -> AffineMap {
    AffineMap::generator(modulus, bit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::field::PrimeModulus;
    use proptest::prelude::*;

    fn p101() -> Modulus {
        PrimeModulus::from_u64(101).unwrap()
    }

    fn map(m: &Modulus, r: u64, s: u64) -> AffineMap {
        AffineMap::from_values(m, r, s).unwrap()
    }

    /// Plain 2x2 integer matrix product, reduced at the end.
    fn matmul(a: [[u64; 2]; 2], b: [[u64; 2]; 2], p: u64) -> [[u64; 2]; 2] {
        let mut c = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = (a[i][0] * b[0][j] + a[i][1] * b[1][j]) % p;
            }
        }
        c
    }

    #[test]
    fn generators() {
        let m = p101();
        assert_eq!(generator(&m, false), map(&m, 2, 1));
        assert_eq!(generator(&m, true), map(&m, 3, 1));
        let m5 = PrimeModulus::from_u64(5).unwrap();
        assert_eq!(generator(&m5, false), map(&m5, 2, 1));
    }

    #[test]
    fn compose_examples() {
        let m = p101();
        let f0 = generator(&m, false);
        let f1 = generator(&m, true);
        let a = matmul([[2, 1], [0, 1]], [[3, 1], [0, 1]], 101);
        assert_eq!(a, [[6, 3], [0, 1]]);
        assert_eq!(f0.compose(&f1).unwrap(), map(&m, 6, 3));
        assert_eq!(f1.compose(&f0).unwrap(), map(&m, 6, 4));
        let x = map(&m, 45, 77);
        assert_eq!(AffineMap::identity(&m).compose(&x).unwrap(), x);
        let other = PrimeModulus::from_u64(103).unwrap();
        assert_eq!(
            f0.compose(&generator(&other, false)),
            Err(Error::ModulusMismatch)
        );
    }

    #[test]
    fn inverse_examples() {
        let m = p101();
        let a = map(&m, 6, 3);
        assert_eq!(a.inverse().unwrap(), map(&m, 17, 50));
        assert!(a.compose(&a.inverse().unwrap()).unwrap().is_identity());
        assert_eq!(
            AffineMap::identity(&m).inverse().unwrap(),
            AffineMap::identity(&m)
        );
        assert_eq!(map(&m, 2, 1).inverse().unwrap(), map(&m, 51, 50));
        assert_eq!(
            AffineMap::from_values(&m, 0u32, 1u32),
            Err(Error::NotInvertible)
        );
    }

    #[test]
    fn output_examples() {
        let m = p101();
        assert_eq!(map(&m, 6, 3).to_output().to_string(), "9,3");
        assert_eq!(AffineMap::identity(&m).to_output().to_string(), "1,0");
        assert_eq!(map(&m, 36, 27).to_output().to_string(), "63,27");

        let back = |t: &str| AffineMap::from_output(&HashOutput::parse(&m, t).unwrap()).unwrap();
        assert_eq!(back("9,3"), map(&m, 6, 3));
        assert_eq!(back("1,0"), AffineMap::identity(&m));
        assert_eq!(back("63,27"), map(&m, 36, 27));
        assert_eq!(HashOutput::parse(&m, "5,5"), Err(Error::InvalidHashOutput));
    }

    #[test]
    fn encoding_examples() {
        let m = p101();
        assert_eq!(map(&m, 6, 3).encode_bits(), bits("00001100000011"));
        assert_eq!(
            AffineMap::identity(&m).encode_bits(),
            bits("00000010000000")
        );
        assert!(matches!(
            AffineMap::decode_bits(&m, &bits("0000110")),
            Err(Error::Encoding(_))
        ));
        // 127 >= 101
        assert!(matches!(
            AffineMap::decode_bits(&m, &bits("11111110000000")),
            Err(Error::Encoding(_))
        ));
        assert!(matches!(
            AffineMap::decode_bits(&m, &bits("00000000000001")),
            Err(Error::Encoding(_))
        ));
    }

    #[test]
    fn non_commutative_for_larger_p() {
        for p in [7u64, 11, 101, 1009] {
            let m = PrimeModulus::from_u64(p).unwrap();
            let f0 = generator(&m, false);
            let f1 = generator(&m, true);
            assert_ne!(f0.compose(&f1).unwrap(), f1.compose(&f0).unwrap());
        }
    }

    fn arb_map() -> impl Strategy<Value = (u64, u64)> {
        (1u64..1009, 0u64..1009)
    }

    proptest! {
        #[test]
        fn compose_associative(a in arb_map(), b in arb_map(), c in arb_map()) {
            let m = PrimeModulus::from_u64(1009).unwrap();
            let (a, b, c) = (map(&m, a.0, a.1), map(&m, b.0, b.1), map(&m, c.0, c.1));
            prop_assert_eq!(
                a.compose(&b).unwrap().compose(&c).unwrap(),
                a.compose(&b.compose(&c).unwrap()).unwrap()
            );
        }

        #[test]
        fn compose_matches_matrix_product(a in arb_map(), b in arb_map()) {
            let m = PrimeModulus::from_u64(1009).unwrap();
            let prod = matmul([[a.0, a.1], [0, 1]], [[b.0, b.1], [0, 1]], 1009);
            let got = map(&m, a.0, a.1).compose(&map(&m, b.0, b.1)).unwrap();
            prop_assert_eq!(got, map(&m, prod[0][0], prod[0][1]));
        }

        #[test]
        fn two_sided_inverse(a in arb_map()) {
            let m = PrimeModulus::from_u64(1009).unwrap();
            let a = map(&m, a.0, a.1);
            let inv = a.inverse().unwrap();
            prop_assert!(a.compose(&inv).unwrap().is_identity());
            prop_assert!(inv.compose(&a).unwrap().is_identity());
        }

        #[test]
        fn linear_part_multiplicative(a in arb_map(), b in arb_map()) {
            let m = PrimeModulus::from_u64(1009).unwrap();
            let (x, y) = (map(&m, a.0, a.1), map(&m, b.0, b.1));
            prop_assert_eq!(x.compose(&y).unwrap().r(), &x.r() * &y.r());
        }

        #[test]
        fn output_and_encoding_round_trip(a in arb_map()) {
            let m = PrimeModulus::from_u64(1009).unwrap();
            let a = map(&m, a.0, a.1);
            prop_assert_eq!(AffineMap::from_output(&a.to_output()).unwrap(), a.clone());
            let enc = a.encode_bits();
            prop_assert_eq!(enc.len(), 20);
            prop_assert_eq!(AffineMap::decode_bits(&m, &enc).unwrap(), a);
        }

        #[test]
        fn apply_matches_composition(a in arb_map(), b in arb_map(), x in 0u64..1009) {
            let m = PrimeModulus::from_u64(1009).unwrap();
            let (f, g) = (map(&m, a.0, a.1), map(&m, b.0, b.1));
            let x = m.element(x);
            prop_assert_eq!(f.compose(&g).unwrap().apply(&x), f.apply(&g.apply(&x)));
        }
    }
}

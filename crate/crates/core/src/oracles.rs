//! Brute-force reference implementations.
//!
//! Nothing here is clever. `naive_hash` applies the generator functions one
//! at a time to two points, and the searches enumerate words in shortlex
//! order. The attack code never calls into this module; tests and the CLI
//! `selftest` command compare against it.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::affine::{AffineMap, HashOutput};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus};
use crate::params::HashParams;

/// Limits for an enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_length: usize,
    pub max_candidates: u64,
    pub time_limit: Duration,
}

impl SearchBudget {
    pub fn new(max_length: usize, max_candidates: u64, time_limit: Duration) -> Result<Self> {
        if max_length == 0 || max_candidates == 0 || time_limit.is_zero() {
            return Err(Error::InvalidParams(
                "search budget limits must all be positive".into(),
            ));
        }
        Ok(SearchBudget {
            max_length,
            max_candidates,
            time_limit,
        })
    }

    pub fn with_max_length(self, max_length: usize) -> Self {
        SearchBudget { max_length, ..self }
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_length: 24,
            max_candidates: 1 << 24,
            time_limit: Duration::from_secs(60),
        }
    }
}

fn apply_generator(bit: bool, x: &FieldElement) -> FieldElement {
    let m = x.modulus();
    let c = m.element(if bit { 3u32 } else { 2u32 });
    &(&c * x) + &m.one()
}

/// Evaluates `f_b1(f_b2(...f_bk(x)))` at `x = 1` and `x = 0`, which are
/// `r + s` and `s`.
pub fn naive_hash(m: &BitString, p: &Modulus) -> HashOutput {
    let mut at_zero = p.zero();
    let mut at_one = p.one();
    for bit in m.bits().iter().rev() {
        at_zero = apply_generator(*bit, &at_zero);
        at_one = apply_generator(*bit, &at_one);
    }
    HashOutput::new(at_one, at_zero).expect("same field")
}

/// The product map recovered from [`naive_hash`].
pub fn naive_product(m: &BitString, p: &Modulus) -> AffineMap {
    AffineMap::from_output(&naive_hash(m, p)).expect("products of generators are invertible")
}

/// `hatH` as the literal product of `C_i`, one factor at a time.
pub fn naive_hat_hash(m: &BitString, params: &HashParams) -> AffineMap {
    let p = params.modulus();
    let mut acc = AffineMap::identity(p);
    for (idx, &bit) in m.bits().iter().enumerate() {
        let i = idx + 1;
        let mut c = AffineMap::generator(p, bit);
        if i % params.t() == 0 {
            c = c.compose(params.g()).expect("same field");
        }
        acc = acc.compose(&c).expect("same field");
    }
    acc
}

/// Which function a collision search targets.
#[derive(Debug, Clone, Copy)]
pub enum CollisionTarget<'a> {
    H,
    HatH(&'a HashParams),
}

/// Restrictions on the words a collision search considers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WordFilter {
    /// Only words with as many zeros as ones.
    pub balanced_only: bool,
    /// Only pairs of equal length.
    pub same_length: bool,
}

/// Word number `index` among the `2^len` words of length `len`, in
/// lexicographic order.
fn word(index: u64, len: usize) -> BitString {
    (0..len).rev().map(|i| (index >> i) & 1 == 1).collect()
}

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Output(HashOutput),
    Map(AffineMap),
}

/// The first colliding pair in shortlex order: the second word is the
/// earliest one whose hash was already seen, paired with the first word
/// that produced it.
pub fn exhaustive_collision(
    p: &Modulus,
    target: CollisionTarget<'_>,
    filter: WordFilter,
    budget: &SearchBudget,
) -> Result<(BitString, BitString)> {
    exhaustive_collisions(p, target, filter, budget, 1).map(|mut v| v.remove(0))
}

/// Up to `limit` colliding pairs in shortlex order of their second word.
pub fn exhaustive_collisions(
    p: &Modulus,
    target: CollisionTarget<'_>,
    filter: WordFilter,
    budget: &SearchBudget,
    limit: usize,
) -> Result<Vec<(BitString, BitString)>> {
    let start = Instant::now();
    let mut seen: HashMap<Key, BitString> = HashMap::new();
    let mut found = Vec::new();
    let mut candidates = 0u64;
    let max_length = budget.max_length.min(63);
    for len in 0..=max_length {
        if filter.same_length {
            seen.clear();
        }
        if filter.balanced_only && len % 2 == 1 {
            continue;
        }
        for index in 0..(1u64 << len) {
            if filter.balanced_only && index.count_ones() as usize * 2 != len {
                continue;
            }
            candidates += 1;
            if candidates > budget.max_candidates || start.elapsed() > budget.time_limit {
                return finish(found, len.saturating_sub(1));
            }
            let w = word(index, len);
            let key = match target {
                CollisionTarget::H => Key::Output(naive_hash(&w, p)),
                CollisionTarget::HatH(params) => Key::Map(naive_hat_hash(&w, params)),
            };
            match seen.get(&key) {
                Some(first) => {
                    found.push((first.clone(), w));
                    if found.len() >= limit {
                        return Ok(found);
                    }
                }
                None => {
                    seen.insert(key, w);
                }
            }
        }
    }
    finish(found, max_length)
}

fn finish(
    found: Vec<(BitString, BitString)>,
    max_length: usize,
) -> Result<Vec<(BitString, BitString)>> {
    if found.is_empty() {
        Err(Error::NoneFound { max_length })
    } else {
        Ok(found)
    }
}

/// Shortest, lexicographically first word whose product map is `target`.
pub fn exhaustive_preimage(target: &AffineMap, budget: &SearchBudget) -> Result<BitString> {
    let p = target.modulus();
    let start = Instant::now();
    let mut candidates = 0u64;
    let max_length = budget.max_length.min(63);
    for len in 0..=max_length {
        for index in 0..(1u64 << len) {
            candidates += 1;
            if candidates > budget.max_candidates || start.elapsed() > budget.time_limit {
                return Err(Error::NoneFound {
                    max_length: len.saturating_sub(1),
                });
            }
            let w = word(index, len);
            if naive_product(&w, p) == *target {
                return Ok(w);
            }
        }
    }
    Err(Error::NoneFound { max_length })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::field::PrimeModulus;
    use crate::hashes::{hash_h, hash_hat_h};

    fn p101() -> Modulus {
        PrimeModulus::from_u64(101).unwrap()
    }

    fn budget(max_length: usize) -> SearchBudget {
        SearchBudget::default().with_max_length(max_length)
    }

    #[test]
    fn naive_examples() {
        let m = p101();
        assert_eq!(naive_hash(&bits("01"), &m).to_string(), "9,3");
        assert_eq!(naive_hash(&bits(""), &m).to_string(), "1,0");
        let m1009 = PrimeModulus::from_u64(1009).unwrap();
        let w = BitString::from_iter((0..64).map(|i| (i * 7 + 3) % 5 < 2));
        assert_eq!(naive_hash(&w, &m1009), hash_h(&w, &m1009));
    }

    #[test]
    fn no_balanced_four_bit_collision_mod_101() {
        let m = p101();
        let balanced = WordFilter {
            balanced_only: true,
            same_length: true,
        };
        assert_eq!(
            exhaustive_collision(&m, CollisionTarget::H, balanced, &budget(4)),
            Err(Error::NoneFound { max_length: 4 })
        );
        let mut s: Vec<u64> = (0..16u64)
            .filter(|i| i.count_ones() == 2)
            .map(|i| {
                use num_traits::ToPrimitive;
                crate::hashes::product_map(&word(i, 4), &m)
                    .s_value()
                    .to_u64()
                    .unwrap()
            })
            .collect();
        s.sort();
        assert_eq!(s, vec![19, 21, 22, 27, 28, 31]);
    }

    #[test]
    fn collisions_found_and_reverified() {
        let m5 = PrimeModulus::from_u64(5).unwrap();
        let (a, b) =
            exhaustive_collision(&m5, CollisionTarget::H, WordFilter::default(), &budget(8))
                .unwrap();
        assert_eq!((a.to_string(), b.to_string()), ("".into(), "0000".into()));
        assert_eq!(hash_h(&a, &m5), hash_h(&b, &m5));

        let same = WordFilter {
            same_length: true,
            ..WordFilter::default()
        };
        let (a, b) = exhaustive_collision(&m5, CollisionTarget::H, same, &budget(8)).unwrap();
        assert_eq!((a, b), (bits("0111"), bits("1000")));

        let m = p101();
        let balanced = WordFilter {
            balanced_only: true,
            same_length: true,
        };
        let (a, b) = exhaustive_collision(&m, CollisionTarget::H, balanced, &budget(10)).unwrap();
        assert_eq!((a, b), (bits("00101110"), bits("01010101")));

        let (a, b) = exhaustive_collision(&m, CollisionTarget::H, same, &budget(10)).unwrap();
        assert_eq!((a, b), (bits("0101100"), bits("1010001")));
    }

    #[test]
    fn hat_collisions_reverify() {
        let m = p101();
        let params = HashParams::for_modulus(m.clone())
            .unwrap()
            .with_t(3)
            .unwrap();
        let pairs = exhaustive_collisions(
            &m,
            CollisionTarget::HatH(&params),
            WordFilter::default(),
            &budget(12),
            20,
        )
        .unwrap();
        assert_eq!(pairs.len(), 20);
        for (a, b) in pairs {
            assert_ne!(a, b);
            assert_eq!(hash_hat_h(&a, &params), hash_hat_h(&b, &params));
        }
    }

    #[test]
    fn preimage_examples() {
        let m = p101();
        let map = |r: u32, s: u32| AffineMap::from_values(&m, r, s).unwrap();
        assert_eq!(
            exhaustive_preimage(&map(2, 1), &budget(4)).unwrap(),
            bits("0")
        );
        assert_eq!(
            exhaustive_preimage(&map(6, 3), &budget(4)).unwrap(),
            bits("01")
        );
        assert_eq!(
            exhaustive_preimage(&map(17, 50), &budget(1)),
            Err(Error::NoneFound { max_length: 1 })
        );
        assert!(exhaustive_preimage(&AffineMap::identity(&m), &budget(1))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn budget_validation() {
        assert!(SearchBudget::new(0, 1, Duration::from_secs(1)).is_err());
        assert!(SearchBudget::new(1, 1, Duration::ZERO).is_err());
        let tiny = SearchBudget::new(20, 3, Duration::from_secs(5)).unwrap();
        assert!(matches!(
            exhaustive_preimage(
                &AffineMap::from_values(&p101(), 17u32, 50u32).unwrap(),
                &tiny
            ),
            Err(Error::NoneFound { .. })
        ));
    }
}

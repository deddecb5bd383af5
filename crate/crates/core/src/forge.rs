//! Collisions for `hatH` and `hatH2` built from `H`-collisions.
//!
//! If `b'` is a word of length below `t` whose product is `g^-1`, then
//! inserting `b'` right after every trigger position (every multiple of `t`
//! in the output) makes each `g` cancel:
//! `hatH(aligned_insert(m, b')) = H-product(m)`. Two equal-length messages
//! with equal `H` products therefore give a `hatH` collision, and since
//! `hatH2` depends only on the `hatH` digest and the length, a `hatH2`
//! collision too.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::affine::AffineMap;
use crate::attack::{
    assemble_second_preimage, recover_exponents, second_preimage_traced, solve_subset_sum,
    swap_target, SolveStrategy, SolverConfig,
};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hashes::{hash_h, hash_hat_h, hash_hat_h2, product_map};
use crate::oracles::SearchBudget;
use crate::params::{parse_kv_text, HashParams};
use crate::transcript::Transcript;
use crate::FORMAT_VERSION;

/// A forged pair together with the messages it was built from.
#[derive(Debug, Clone)]
pub struct ForgeResult {
    pub params: HashParams,
    pub m: BitString,
    pub m_prime: BitString,
    pub b_prime: BitString,
    pub m_star: BitString,
    pub m_star_prime: BitString,
    /// Common `hatH` digest.
    pub digest: AffineMap,
    /// Common `hatH2` digest, once lifted.
    pub digest2: Option<AffineMap>,
    pub transcript: Transcript,
}

/// Outcome of re-hashing a forged pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForgeChecks {
    pub distinct: bool,
    pub equal_length: bool,
    pub hat_h_m_star: bool,
    pub hat_h_m_star_prime: bool,
    pub hat_h2_m_star: bool,
    pub hat_h2_m_star_prime: bool,
}

impl ForgeChecks {
    pub fn all_pass(&self) -> bool {
        self.distinct
            && self.equal_length
            && self.hat_h_m_star
            && self.hat_h_m_star_prime
            && self.hat_h2_m_star
            && self.hat_h2_m_star_prime
    }

    fn entries(&self) -> [(&'static str, bool); 6] {
        [
            ("distinct", self.distinct),
            ("equal_length", self.equal_length),
            ("hatH_m_star", self.hat_h_m_star),
            ("hatH_m_star_prime", self.hat_h_m_star_prime),
            ("hatH2_m_star", self.hat_h2_m_star),
            ("hatH2_m_star_prime", self.hat_h2_m_star_prime),
        ]
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

/// Re-hashes `m_star` and `m_star_prime` against the claimed digests.
pub fn check_pair(
    params: &HashParams,
    m_star: &BitString,
    m_star_prime: &BitString,
    digest: &AffineMap,
    digest2: &AffineMap,
) -> ForgeChecks {
    ForgeChecks {
        distinct: m_star != m_star_prime,
        equal_length: m_star.len() == m_star_prime.len(),
        hat_h_m_star: hash_hat_h(m_star, params) == *digest,
        hat_h_m_star_prime: hash_hat_h(m_star_prime, params) == *digest,
        hat_h2_m_star: hash_hat_h2(m_star, params) == *digest2,
        hat_h2_m_star_prime: hash_hat_h2(m_star_prime, params) == *digest2,
    }
}

impl ForgeResult {
    /// Re-evaluates every check from scratch. An unlifted result fails the
    /// `hatH2` checks.
    pub fn checks(&self) -> ForgeChecks {
        let digest2 = match &self.digest2 {
            Some(d) => d.clone(),
            None => {
                let mut c = check_pair(
                    &self.params,
                    &self.m_star,
                    &self.m_star_prime,
                    &self.digest,
                    &self.digest,
                );
                c.hat_h2_m_star = false;
                c.hat_h2_m_star_prime = false;
                return c;
            }
        };
        check_pair(
            &self.params,
            &self.m_star,
            &self.m_star_prime,
            &self.digest,
            &digest2,
        )
    }

    /// Text record readable by [`verify_record`], followed by the transcript
    /// stages.
    pub fn to_record(&self, with_timings: bool) -> String {
        let mut out = String::new();
        out.push_str(FORMAT_VERSION);
        out.push_str("\nkind=forge-result\n");
        out.push_str(&self.params.to_kv_text());
        for (key, bits) in [
            ("m", &self.m),
            ("m_prime", &self.m_prime),
            ("b_prime", &self.b_prime),
            ("m_star", &self.m_star),
            ("m_star_prime", &self.m_star_prime),
        ] {
            out.push_str(&format!("{key}={}\n", bits.to_len_hex()));
        }
        out.push_str(&format!("digest={}\n", self.digest));
        if let Some(d) = &self.digest2 {
            out.push_str(&format!("digest2={d}\n"));
        }
        let checks = self.checks();
        for (name, ok) in checks.entries() {
            out.push_str(&format!("check.{name}={}\n", verdict(ok)));
        }
        out.push_str(&format!(
            "verdict={}\n",
            if checks.all_pass() {
                "broken"
            } else {
                "FAILED"
            }
        ));
        let rendered = self.transcript.render(with_timings);
        for line in rendered.lines().filter(|l| l.starts_with("stage=")) {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// Parses a record written by [`ForgeResult::to_record`] and re-hashes the
/// pair. The claimed verdict lines are ignored.
pub fn verify_record(text: &str) -> Result<ForgeChecks> {
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some(v) if v == FORMAT_VERSION => {}
        other => {
            return Err(Error::Parse(format!(
                "expected {FORMAT_VERSION:?} header, found {other:?}"
            )))
        }
    }
    let body: Vec<&str> = lines.filter(|l| !l.starts_with("stage=")).collect();
    let kv = parse_kv_text(&body.join("\n"))?;
    let params = HashParams::from_kv(&kv)?;
    let field = |key: &str| {
        kv.get(key)
            .ok_or_else(|| Error::Parse(format!("record is missing {key}")))
    };
    let m_star = BitString::parse(field("m_star")?)?;
    let m_star_prime = BitString::parse(field("m_star_prime")?)?;
    let digest = AffineMap::parse(params.modulus(), field("digest")?)?;
    let digest2 = AffineMap::parse(params.modulus(), field("digest2")?)?;
    Ok(check_pair(
        &params,
        &m_star,
        &m_star_prime,
        &digest,
        &digest2,
    ))
}

/// Length of `aligned_insert(m, b', t)` for `|m| = m_len`, `|b'| = b_len`.
pub fn aligned_insert_len(m_len: usize, b_len: usize, t: usize) -> usize {
    if m_len < t {
        return m_len;
    }
    let chunks = 1 + (m_len - t) / (t - b_len);
    m_len + chunks * b_len
}

/// Splits `m` into `u1` of `t` bits and later chunks of `t - |b'|` bits,
/// and writes `b'` after every complete chunk.
pub fn aligned_insert(m: &BitString, b_prime: &BitString, t: usize) -> Result<BitString> {
    if b_prime.len() >= t {
        return Err(Error::InsertTooLong {
            len: b_prime.len(),
            t,
        });
    }
    if b_prime.is_empty() {
        return Err(Error::InvalidParams(
            "inserted word must be non-empty".into(),
        ));
    }
    let bits = m.bits();
    let mut out = BitString::with_capacity(aligned_insert_len(m.len(), b_prime.len(), t));
    let mut pos = 0;
    let mut chunk = t;
    while pos + chunk <= bits.len() {
        for &b in &bits[pos..pos + chunk] {
            out.push(b);
        }
        out.extend_from(b_prime);
        pos += chunk;
        chunk = t - b_prime.len();
    }
    for &b in &bits[pos..] {
        out.push(b);
    }
    Ok(out)
}

/// A word of length below `t` whose product map is `g^-1`.
///
/// Each length is first tried with the second-preimage pipeline; if that
/// fails, words are enumerated depth-first up to the budget.
pub fn find_g_inverse_preimage(
    g: &AffineMap,
    t: usize,
    budget: &SearchBudget,
) -> Result<BitString> {
    let target = g.inverse()?;
    let p = target.modulus();
    for len in 1..t {
        let Ok(split) = recover_exponents(&target.r(), len) else {
            continue;
        };
        let Ok(instance) = swap_target(&target, &split) else {
            continue;
        };
        let Ok(x) = solve_subset_sum(&instance, SolveStrategy::Auto, 0) else {
            continue;
        };
        if let Ok(word) = assemble_second_preimage(&split, &x) {
            if product_map(&word, p) == target {
                return Ok(word);
            }
        }
    }

    let start = Instant::now();
    let mut visited = 0u64;
    let max_len = (t - 1).min(budget.max_length);
    for len in 1..=max_len {
        let mut prefix = Vec::with_capacity(len);
        let found = dfs(
            &AffineMap::identity(p),
            &target,
            len,
            &mut prefix,
            &mut visited,
            budget,
            start,
        );
        match found {
            Some(true) => return Ok(BitString::from_bits(prefix)),
            Some(false) => {}
            None => break,
        }
    }
    Err(Error::NoInsertablePreimage { t })
}

/// `Some(true)` with the word left in `prefix`, `Some(false)` when the
/// subtree is exhausted, `None` when the budget ran out.
fn dfs(
    acc: &AffineMap,
    target: &AffineMap,
    remaining: usize,
    prefix: &mut Vec<bool>,
    visited: &mut u64,
    budget: &SearchBudget,
    start: Instant,
) -> Option<bool> {
    if remaining == 0 {
        return Some(acc == target);
    }
    for bit in [false, true] {
        *visited += 1;
        if *visited > budget.max_candidates || start.elapsed() > budget.time_limit {
            return None;
        }
        let mut next = acc.clone();
        next.push_generator(bit);
        prefix.push(bit);
        match dfs(&next, target, remaining - 1, prefix, visited, budget, start) {
            Some(false) => {
                prefix.pop();
            }
            other => return other,
        }
    }
    Some(false)
}

/// Turns an equal-length `H`-collision into a `hatH`-collision.
pub fn forge_hat_h_collision(
    m: &BitString,
    m_prime: &BitString,
    params: &HashParams,
    budget: &SearchBudget,
) -> Result<ForgeResult> {
    let b_prime = find_g_inverse_preimage(params.g(), params.t(), budget)?;
    forge_with_insert(m, m_prime, params, &b_prime, Transcript::new("forge"))
}

fn forge_with_insert(
    m: &BitString,
    m_prime: &BitString,
    params: &HashParams,
    b_prime: &BitString,
    mut transcript: Transcript,
) -> Result<ForgeResult> {
    let p = params.modulus();
    let product = product_map(m, p);
    if m == m_prime || m.len() != m_prime.len() || product != product_map(m_prime, p) {
        return Err(Error::NotACollision);
    }
    let (m_star, m_star_prime) = transcript.timed("insert", || {
        let pair = aligned_insert(m, b_prime, params.t())
            .and_then(|a| Ok((a, aligned_insert(m_prime, b_prime, params.t())?)));
        let fields = match &pair {
            Ok((a, _)) => vec![("len", a.len().to_string())],
            Err(e) => vec![("error", format!("{:?}", e.to_string()))],
        };
        (pair, fields)
    })?;
    let digest = hash_hat_h(&m_star, params);
    let ok = digest == product && hash_hat_h(&m_star_prime, params) == product;
    transcript.push(
        "verify_hatH",
        vec![("verdict", verdict(ok).to_string())],
        Duration::ZERO,
    );
    if !ok {
        return Err(Error::Verification(
            "inserted messages do not hash to the H product".into(),
        ));
    }
    Ok(ForgeResult {
        params: params.clone(),
        m: m.clone(),
        m_prime: m_prime.clone(),
        b_prime: b_prime.clone(),
        m_star,
        m_star_prime,
        digest,
        digest2: None,
        transcript,
    })
}

/// Fills in the common `hatH2` digest after re-verifying it.
pub fn lift_to_hat_h2(mut result: ForgeResult) -> Result<ForgeResult> {
    let d = hash_hat_h2(&result.m_star, &result.params);
    let ok = d == hash_hat_h2(&result.m_star_prime, &result.params);
    result.transcript.push(
        "verify_hatH2",
        vec![("verdict", verdict(ok).to_string())],
        Duration::ZERO,
    );
    if !ok {
        return Err(Error::Verification(
            "forged pair does not collide under hatH2".into(),
        ));
    }
    result.digest2 = Some(d);
    Ok(result)
}

/// Uniformly random message with `len / 2` ones.
pub fn random_balanced<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitString {
    let mut bits: Vec<bool> = (0..len).map(|i| i < len / 2).collect();
    bits.shuffle(rng);
    BitString::from_bits(bits)
}

#[derive(Debug, Clone, Copy)]
pub struct BreakOptions {
    pub seed: u64,
    pub strategy: SolveStrategy,
    pub restarts: usize,
    /// Fresh messages to try before giving up.
    pub attempts: usize,
    pub budget: SearchBudget,
}

impl Default for BreakOptions {
    fn default() -> Self {
        BreakOptions {
            seed: 0,
            strategy: SolveStrategy::Auto,
            restarts: SolverConfig::default().restarts,
            attempts: 8,
            budget: SearchBudget::default(),
        }
    }
}

/// Random message, second preimage, insertion and lift, all re-verified.
pub fn end_to_end_break(params: &HashParams, length: usize, seed: u64) -> Result<ForgeResult> {
    end_to_end_break_with(
        params,
        length,
        &BreakOptions {
            seed,
            ..BreakOptions::default()
        },
    )
}

pub fn end_to_end_break_with(
    params: &HashParams,
    length: usize,
    options: &BreakOptions,
) -> Result<ForgeResult> {
    if length < 2 {
        return Err(Error::InputTooShort);
    }
    let mut transcript = Transcript::new("forge");
    transcript.set("p", params.modulus());
    transcript.set("t", params.t());
    transcript.set("g", params.g());
    transcript.set("seed", options.seed);
    transcript.set("length", length);

    let b_prime = transcript.timed("g_inverse_preimage", || {
        let b = find_g_inverse_preimage(params.g(), params.t(), &options.budget);
        let fields = match &b {
            Ok(b) => vec![("len", b.len().to_string()), ("word", b.to_string())],
            Err(e) => vec![("error", format!("{:?}", e.to_string()))],
        };
        (b, fields)
    })?;

    let mut rng = ChaCha20Rng::seed_from_u64(options.seed);
    let mut last_err = Error::SolverGaveUp { attempts: 0 };
    for attempt in 0..options.attempts {
        let m = random_balanced(length, &mut rng);
        let config = SolverConfig {
            strategy: options.strategy,
            seed: rng.next_u64(),
            restarts: options.restarts,
        };
        transcript.push(
            "sample",
            vec![
                ("attempt", attempt.to_string()),
                ("m", m.to_len_hex()),
                ("solver_seed", config.seed.to_string()),
            ],
            Duration::ZERO,
        );
        let report = match second_preimage_traced(&hash_h(&m, params.modulus()), length, &config) {
            Ok(r) => r,
            Err(e @ (Error::Unsolvable | Error::SolverGaveUp { .. })) => {
                last_err = e;
                continue;
            }
            Err(e) => return Err(e),
        };
        transcript.absorb("attack", &report.transcript);
        if report.preimage == m {
            transcript.push("retry", vec![("reason", "same".into())], Duration::ZERO);
            last_err = Error::SolverGaveUp {
                attempts: attempt + 1,
            };
            continue;
        }
        let forged = forge_with_insert(&m, &report.preimage, params, &b_prime, transcript)?;
        return lift_to_hat_h2(forged);
    }
    Err(match last_err {
        Error::SolverGaveUp { .. } => Error::SolverGaveUp {
            attempts: options.attempts,
        },
        e => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::field::{Modulus, PrimeModulus};
    use crate::hashes::product_map;
    use proptest::prelude::*;

    fn p101() -> Modulus {
        PrimeModulus::from_u64(101).unwrap()
    }

    fn params(t: usize, r: u32, s: u32) -> HashParams {
        let m = p101();
        let g = AffineMap::from_values(&m, r, s).unwrap();
        HashParams::with_defaults(m, t, g).unwrap()
    }

    #[test]
    fn insert_examples() {
        assert_eq!(
            aligned_insert(&bits("0101"), &bits("0"), 2).unwrap(),
            bits("0100010")
        );
        assert_eq!(
            aligned_insert(&bits("01"), &bits("0"), 3).unwrap(),
            bits("01")
        );
        assert_eq!(
            aligned_insert(&bits("010"), &bits("1"), 3).unwrap(),
            bits("0101")
        );
        assert_eq!(
            aligned_insert(&bits("0101"), &bits("00"), 2),
            Err(Error::InsertTooLong { len: 2, t: 2 })
        );
    }

    #[test]
    fn g_inverse_examples() {
        let budget = SearchBudget::default();
        let m = p101();
        let g = |r: u32, s: u32| AffineMap::from_values(&m, r, s).unwrap();
        assert_eq!(
            find_g_inverse_preimage(&g(51, 50), 2, &budget).unwrap(),
            bits("0")
        );
        assert_eq!(
            find_g_inverse_preimage(&g(34, 67), 2, &budget).unwrap(),
            bits("1")
        );
        assert_eq!(
            find_g_inverse_preimage(&g(6, 3), 2, &budget),
            Err(Error::NoInsertablePreimage { t: 2 })
        );
        let word = bits("0110100");
        let target = product_map(&word, &m).inverse().unwrap();
        let found = find_g_inverse_preimage(&target, 8, &budget).unwrap();
        assert!(found.len() < 8);
        assert_eq!(product_map(&found, &m), product_map(&word, &m));
    }

    #[test]
    fn forge_from_known_collision() {
        let m = p101();
        let b = bits("011");
        let g = product_map(&b, &m).inverse().unwrap();
        let params = HashParams::with_defaults(m, 4, g).unwrap();
        let r = forge_hat_h_collision(
            &bits("00101110"),
            &bits("01010101"),
            &params,
            &SearchBudget::default(),
        )
        .unwrap();
        let r = lift_to_hat_h2(r).unwrap();
        assert!(r.checks().all_pass());
        assert_eq!(r.m_star.len(), aligned_insert_len(8, r.b_prime.len(), 4));
        let record = r.to_record(false);
        assert!(record.contains("verdict=broken"));
        assert!(verify_record(&record).unwrap().all_pass());
        let tampered = record.replace(
            &format!("m_star={}", r.m_star.to_len_hex()),
            &format!("m_star={}", r.m_prime.to_len_hex()),
        );
        assert!(!verify_record(&tampered).unwrap().all_pass());
    }

    #[test]
    fn forge_rejects_non_collisions() {
        let p = params(2, 51, 50);
        let budget = SearchBudget::default();
        assert_eq!(
            forge_hat_h_collision(&bits("0110"), &bits("0101"), &p, &budget).err(),
            Some(Error::NotACollision)
        );
        assert_eq!(
            forge_hat_h_collision(&bits("0110"), &bits("0110"), &p, &budget).err(),
            Some(Error::NotACollision)
        );
        assert_eq!(end_to_end_break(&p, 1, 0).err(), Some(Error::InputTooShort));
    }

    #[test]
    fn end_to_end_at_desk_scale() {
        let m = crate::presets::safe36();
        let g = product_map(&bits("10110"), &m).inverse().unwrap();
        let params = HashParams::with_defaults(m, 8, g).unwrap();
        let a = end_to_end_break(&params, 1440, 11).unwrap();
        assert!(a.checks().all_pass());
        assert_ne!(a.m, a.m_prime);
        let b = end_to_end_break(&params, 1440, 11).unwrap();
        assert_eq!(a.to_record(false), b.to_record(false));
    }

    proptest! {
        #[test]
        fn telescoping(
            m in proptest::collection::vec(any::<bool>(), 0..80),
            b in proptest::collection::vec(any::<bool>(), 1..6),
            extra in 1usize..6,
        ) {
            let p = p101();
            let b = BitString::from_bits(b);
            let t = b.len() + extra;
            let g = product_map(&b, &p).inverse().unwrap();
            prop_assume!(!g.is_identity());
            prop_assume!(g != AffineMap::generator(&p, false) && g != AffineMap::generator(&p, true));
            let params = HashParams::with_defaults(p.clone(), t, g).unwrap();
            let m = BitString::from_bits(m);
            let inserted = aligned_insert(&m, &b, t).unwrap();
            prop_assert_eq!(inserted.len(), aligned_insert_len(m.len(), b.len(), t));
            prop_assert_eq!(hash_hat_h(&inserted, &params), product_map(&m, &p));
        }
    }
}

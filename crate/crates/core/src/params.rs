//! Hash parameters and their flat `key=value` text form.
//!
//! Recognised keys: `p`, `t`, `g_r` + `g_s` or `g_word` or `g_inv_word`,
//! `c_rnd` (hex, or `len:hex`). `g_inv_word` sets `g` to the inverse of the
//! word's product. Unknown keys are kept for callers (the CLI stores `seed` and
//! `strategy` in the same file) and ignored here.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;

use crate::affine::AffineMap;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::field::Modulus;
use crate::hashes::product_map;

/// Period used when none is configured.
pub const DEFAULT_T: usize = 8;
/// Word whose product map is the default `g`.
pub const DEFAULT_G_WORD: &str = "0111001";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashParams {
    modulus: Modulus,
    t: usize,
    g: AffineMap,
    c_rnd: BitString,
}

impl HashParams {
    pub fn new(modulus: Modulus, t: usize, g: AffineMap, c_rnd: BitString) -> Result<HashParams> {
        if t < 2 {
            return Err(Error::InvalidParams(format!("t = {t} must exceed 1")));
        }
        if g.modulus() != &modulus {
            return Err(Error::ModulusMismatch);
        }
        let f0 = AffineMap::generator(&modulus, false);
        let f1 = AffineMap::generator(&modulus, true);
        if g.is_identity() || g == f0 || g == f1 {
            return Err(Error::InvalidParams(format!(
                "g = ({g}) must differ from the identity and both generators"
            )));
        }
        let width = 2 * modulus.bit_length();
        if c_rnd.len() != width {
            return Err(Error::InvalidParams(format!(
                "c_rnd has {} bits, expected {width}",
                c_rnd.len()
            )));
        }
        Ok(HashParams {
            modulus,
            t,
            g,
            c_rnd,
        })
    }

    /// Uses [`default_c_rnd`] for the XOR constant.
    pub fn with_defaults(modulus: Modulus, t: usize, g: AffineMap) -> Result<HashParams> {
        let c_rnd = default_c_rnd(&modulus);
        HashParams::new(modulus, t, g, c_rnd)
    }

    /// `t` = [`DEFAULT_T`], `g` = product map of [`DEFAULT_G_WORD`].
    pub fn for_modulus(modulus: Modulus) -> Result<HashParams> {
        let g = product_map(&crate::bits::bits(DEFAULT_G_WORD), &modulus);
        HashParams::with_defaults(modulus, DEFAULT_T, g)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn g(&self) -> &AffineMap {
        &self.g
    }

    pub fn c_rnd(&self) -> &BitString {
        &self.c_rnd
    }

    pub fn with_t(&self, t: usize) -> Result<HashParams> {
        HashParams::new(self.modulus.clone(), t, self.g.clone(), self.c_rnd.clone())
    }

    pub fn with_g(&self, g: AffineMap) -> Result<HashParams> {
        HashParams::new(self.modulus.clone(), self.t, g, self.c_rnd.clone())
    }

    /// Builds parameters from parsed `key=value` pairs.
    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<HashParams> {
        let p = kv
            .get("p")
            .ok_or_else(|| Error::InvalidParams("missing key p".into()))?;
        let modulus = crate::presets::modulus(p)?;
        let t = match kv.get("t") {
            Some(t) => t
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad t {t:?}")))?,
            None => DEFAULT_T,
        };
        let g = match (
            kv.get("g_word"),
            kv.get("g_inv_word"),
            kv.get("g_r"),
            kv.get("g_s"),
        ) {
            (Some(word), None, None, None) => product_map(&BitString::parse(word)?, &modulus),
            (None, Some(word), None, None) => {
                product_map(&BitString::parse(word)?, &modulus).inverse()?
            }
            (None, None, Some(r), Some(s)) => AffineMap::from_values(
                &modulus,
                crate::field::parse_integer(r)?,
                crate::field::parse_integer(s)?,
            )?,
            (None, None, None, None) => product_map(&crate::bits::bits(DEFAULT_G_WORD), &modulus),
            _ => {
                return Err(Error::InvalidParams(
                    "give exactly one of g_word, g_inv_word, or g_r with g_s".into(),
                ))
            }
        };
        let c_rnd = match kv.get("c_rnd") {
            Some(text) => parse_c_rnd(text, &modulus)?,
            None => default_c_rnd(&modulus),
        };
        HashParams::new(modulus, t, g, c_rnd)
    }

    pub fn from_kv_text(text: &str) -> Result<HashParams> {
        HashParams::from_kv(&parse_kv_text(text)?)
    }

    /// Flat text form accepted by [`HashParams::from_kv_text`].
    pub fn to_kv_text(&self) -> String {
        format!(
            "p={}\nt={}\ng_r={}\ng_s={}\nc_rnd={}\n",
            self.modulus,
            self.t,
            self.g.r_value(),
            self.g.s_value(),
            self.c_rnd.to_len_hex()
        )
    }
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_kv_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", n + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// `c_rnd` as hex (exactly `2 * bits` bits) or `len:hex`.
pub fn parse_c_rnd(text: &str, modulus: &Modulus) -> Result<BitString> {
    let width = 2 * modulus.bit_length();
    if text.contains(':') {
        BitString::parse(text)
    } else {
        BitString::from_hex(text, width)
    }
}

/// The first `2 * ceil(log2 p)` bits of the fractional part of `sqrt(2)`.
pub fn default_c_rnd(modulus: &Modulus) -> BitString {
    let k = 2 * modulus.bit_length() as u64;
    // floor(sqrt(2) * 2^k) = isqrt(2^(2k+1))
    let scaled = (BigUint::one() << (2 * k + 1)).sqrt();
    let frac = scaled - (BigUint::one() << k);
    (0..k).rev().map(|i| frac.bit(i)).collect()
}

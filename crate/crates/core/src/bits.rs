use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A message over the alphabet `{0, 1}`.
///
/// Text forms: plain ASCII `0`/`1`, or `len:hex` where the hex digits carry
/// the bits most-significant first and any padding bits after `len` are zero.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn with_capacity(n: usize) -> Self {
        BitString(Vec::with_capacity(n))
    }

    pub fn zeros(n: usize) -> Self {
        BitString(vec![false; n])
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = Vec::with_capacity(self.len() + other.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&other.0);
        BitString(out)
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len() != other.len() {
            return Err(Error::Encoding(format!(
                "xor of strings with lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(BitString(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn count_zeros(&self) -> usize {
        self.len() - self.count_ones()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    /// `<len>:<hex>` form.
    pub fn to_len_hex(&self) -> String {
        let mut hex = String::with_capacity(self.len().div_ceil(4) + 12);
        hex.push_str(&self.len().to_string());
        hex.push(':');
        for nibble in self.0.chunks(4) {
            let mut v = 0u8;
            for i in 0..4 {
                v <<= 1;
                if nibble.get(i).copied().unwrap_or(false) {
                    v |= 1;
                }
            }
            hex.push(char::from_digit(v as u32, 16).unwrap());
        }
        hex
    }

    pub fn parse_binary(text: &str) -> Result<BitString> {
        text.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }

    /// Parses exactly `len` bits from hex digits, most significant first.
    pub fn from_hex(hex: &str, len: usize) -> Result<BitString> {
        let hex = hex.trim();
        let hex = hex.strip_prefix("0x").unwrap_or(hex);
        if hex.len() * 4 < len {
            return Err(Error::Parse(format!(
                "{} hex digits cannot hold {len} bits",
                hex.len()
            )));
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("bad hex digit {c:?}")))?;
            for i in (0..4).rev() {
                bits.push((v >> i) & 1 == 1);
            }
        }
        if bits[len..].iter().any(|&b| b) || hex.len() != len.div_ceil(4) {
            return Err(Error::Parse(format!(
                "hex {hex:?} has data beyond declared length {len}"
            )));
        }
        bits.truncate(len);
        Ok(BitString(bits))
    }

    /// Accepts either plain binary or `len:hex`.
    pub fn parse(text: &str) -> Result<BitString> {
        let text = text.trim();
        match text.split_once(':') {
            Some((len, hex)) => {
                let len: usize = len
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad length prefix {len:?}")))?;
                BitString::from_hex(hex, len)
            }
            None => BitString::parse_binary(text),
        }
    }
}

impl FromStr for BitString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BitString::parse(s)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 128 {
            write!(f, "BitString(\"{self}\")")
        } else {
            write!(f, "BitString({})", self.to_len_hex())
        }
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString(bits)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitString(iter.into_iter().collect())
    }
}

/// Shorthand for tests and examples; panics on anything but `0`/`1`.
pub fn bits(text: &str) -> BitString {
    BitString::parse_binary(text).expect("binary literal")
}

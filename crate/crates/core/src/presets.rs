//! Named primes used by the tests, benches and CLI.

use crate::error::{Error, Result};
use crate::field::{Modulus, PrimeModulus};

/// 36-bit safe prime, the desk-scale attack size.
pub const SAFE_36: &str = "66300170879";
/// 64-bit safe prime.
pub const SAFE_64: &str = "11501876099328719999";
/// Largest prime below 2^32.
pub const PRIME_32: &str = "4294967291";
/// 512-bit safe prime, the recommended parameter size.
pub const SAFE_512: &str = "8755950420310589168509367876411249941279812071536972744064203537473783566032503685965042359910795031401617681061308712025758654258950639205996352777051679";

const NAMED: [(&str, &str); 6] = [
    ("p101", "101"),
    ("p1009", "1009"),
    ("prime32", PRIME_32),
    ("safe36", SAFE_36),
    ("safe64", SAFE_64),
    ("safe512", SAFE_512),
];

/// Looks up a named preset, falling back to parsing the text as a number.
pub fn modulus(name_or_number: &str) -> Result<Modulus> {
    let key = name_or_number.trim();
    match NAMED.iter().find(|(name, _)| *name == key) {
        Some((_, digits)) => PrimeModulus::parse(digits),
        None => PrimeModulus::parse(key).map_err(|e| match e {
            Error::Parse(_) => Error::Parse(format!(
                "{key:?} is neither a number nor a preset ({})",
                preset_names().join(", ")
            )),
            other => other,
        }),
    }
}

pub fn preset_names() -> Vec<&'static str> {
    NAMED.iter().map(|(n, _)| *n).collect()
}

pub fn safe36() -> Modulus {
    PrimeModulus::parse(SAFE_36).expect("preset is prime")
}

pub fn safe64() -> Modulus {
    PrimeModulus::parse(SAFE_64).expect("preset is prime")
}

pub fn safe512() -> Modulus {
    PrimeModulus::parse(SAFE_512).expect("preset is prime")
}

pub fn prime32() -> Modulus {
    PrimeModulus::parse(PRIME_32).expect("preset is prime")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::is_safe_prime;

    #[test]
    fn presets_are_what_they_claim() {
        for (name, digits) in NAMED {
            assert!(modulus(name).is_ok(), "{name}");
            if name.starts_with("safe") {
                assert!(
                    is_safe_prime(&crate::field::parse_integer(digits).unwrap()),
                    "{name}"
                );
            }
        }
        assert_eq!(safe36().bit_length(), 36);
        assert_eq!(safe512().bit_length(), 512);
        assert_eq!(prime32().bit_length(), 32);
        assert!(modulus("nope").is_err());
        assert_eq!(modulus("0x65").unwrap().to_u64(), Some(101));
    }
}

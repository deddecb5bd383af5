//! Affine-map Cayley hashes over prime fields, and the attacks that break
//! them.
//!
//! The hash `H` sends each bit to one of the maps `f0(x) = 2x + 1`,
//! `f1(x) = 3x + 1` over `F_p` and multiplies along the message; the digest
//! is `(r + s, s)` for the product `x -> r x + s`. `hatH` is a variant that
//! multiplies by a fixed `g` after every `t`-th factor, and `H2`/`hatH2`
//! append an XOR-masked copy of the digest before hashing again.
//!
//! The [`attack`] module recovers a second preimage for `H` from the digest
//! and the message length alone. The [`forge`] module turns those second
//! preimages into verified collisions for `hatH` and `hatH2`.
//!
//! ```
//! use cayley_affine::{bits, hash_h, PrimeModulus};
//!
//! let p = PrimeModulus::from_u64(101).unwrap();
//! assert_eq!(hash_h(&bits("01"), &p).to_string(), "9,3");
//! ```

pub mod affine;
pub mod attack;
pub mod bits;
pub mod error;
pub mod field;
pub mod forge;
pub mod hashes;
pub mod oracles;
pub mod params;
pub mod presets;
pub mod transcript;

pub use affine::{AffineMap, HashOutput};
pub use attack::{
    second_preimage, ExponentSplit, SolveStrategy, SubsetSumInstance, SubsetSumSolution,
};
pub use bits::{bits, BitString};
pub use error::{Error, Result};
pub use field::{FieldElement, Modulus, PrimeModulus};
pub use forge::{end_to_end_break, ForgeResult};
pub use hashes::{
    hash_h, hash_h2, hash_hat_h, hash_hat_h2, multiplication_count, product_map, OpCount,
};
pub use oracles::SearchBudget;
pub use params::HashParams;
pub use transcript::Transcript;

/// Header line of every transcript and forge record.
pub const FORMAT_VERSION: &str = "cayley-affine-lab/1";

//! Exact rational dynamics of the map `T(x) = ⌊x⌋·(1 + {x})`.
//!
//! For a reduced fraction `a/M ≥ 2` the *order* is the least `n ≥ 0` such
//! that `T^n(a/M)` is an integer. Whether every rational `x ≥ 2` has finite
//! order is open; this crate provides the machinery to study the question
//! computationally, with exact big-integer arithmetic throughout:
//!
//! * [`dynamics`] — the map itself, single-step denominator descent, orbit
//!   traces, and order computation (with a closed-form fast path for
//!   denominator 2).
//! * [`classes`] — for fixed `M` and `n`, the residue classes of numerators
//!   modulo `M^{n+1}` of exact order `n`, enumerated two independent ways,
//!   plus the counting recurrence `A(n,M)` and its prime-power closed form.
//! * [`density`] — exact partial sums of `Σ_n A(n,M)/φ(M^{n+1})` (which
//!   converges to 1) and empirical order histograms over numerator ranges.
//! * [`search`] — explicit witnesses of prescribed order, minimal-numerator
//!   tables, a resumable checkpointed scan for order-cap exceeders, and a
//!   one-shot cross-check driver.
//!
//! All quantities are exact: numerators are arbitrary-precision integers
//! and densities are reduced fractions. Floating point appears only in
//! display strings.

pub mod arith;
pub mod classes;
pub mod density;
pub mod dynamics;
pub mod search;

pub use arith::Rat;
pub use classes::ClassSet;
pub use density::DensityReport;
pub use dynamics::{OrbitTrace, OrderResult};
pub use search::{ScanCheckpoint, ScanParams, VerifyConfig, VerifyReport};

/// Errors for domain violations, budget refusals, and checkpoint handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("denominator must be nonzero")]
    ZeroDenominator,

    #[error("{0} is undefined for 0")]
    ZeroOperand(&'static str),

    #[error("valuation base must be at least 2, got {0}")]
    BadValuationBase(u64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("the map is defined for x >= 1, got {0}")]
    BelowOne(Rat),

    #[error("order is defined for x >= 2, got {0} (every x in [1,2) is a fixed point)")]
    BelowTwo(Rat),

    #[error("{0} is an integer; there is no fractional part to decompose")]
    IntegerInput(Rat),

    #[error("numerator must be odd and at least 5, got {0}")]
    BadHalfNumerator(String),

    #[error("iteration cap {cap} does not exceed the target order {n}")]
    CapTooSmall { cap: u64, n: u64 },

    #[error("enumeration needs {residues} residues, over the budget of {budget}")]
    BudgetExceeded { residues: String, budget: u64 },

    #[error("representative {a}/{m} exceeded the iteration cap {cap} during enumeration")]
    EnumerationCapExceeded { a: String, m: u64, cap: u64 },

    #[error("{a} and {m} are not coprime")]
    NotCoprime { a: String, m: u64 },

    #[error("numerator {a} is below 2*{m}; orders are classified for a >= 2M")]
    RepresentativeTooSmall { a: String, m: u64 },

    #[error("refusing to resume: {0}")]
    CheckpointMismatch(String),

    #[error("{0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Serde adapters rendering big integers as decimal strings, so JSON
/// consumers limited to 64-bit numbers never overflow.
pub(crate) mod dec {
    use num_bigint::BigUint;
    use serde::{de, Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        BigUint::from_str(&text).map_err(de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for item in v {
                seq.serialize_element(&item.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts
                .iter()
                .map(|t| BigUint::from_str(t).map_err(de::Error::custom))
                .collect()
        }
    }
}

//! Residue classes of numerators by exact order, for a fixed denominator.
//!
//! Fix `M > 1` and `n ≥ 1`. `R_{n,M}` is the set of residues `k` modulo
//! `M^{n+1}` with `gcd(k, M) = 1` such that every numerator `a ≥ 2M` in
//! class `k` gives `a/M` exact order `n`. Membership depends only on the
//! class, so orders for a fixed denominator are completely described by
//! these finite sets. Their cardinality `A(n,M) = #R_{n,M}` satisfies
//!
//! ```text
//! A(n,M) = φ(M) · Σ_{d|M} A(n-1,d) · (M/d)^{n-1}
//! ```
//!
//! anchored at `A(0,1) = 1`, `A(0,M) = 0` for `M > 1`, and `A(n,1) = 0`
//! for `n ≥ 1`; for prime powers it collapses to the closed form
//! `A(n,p^s) = C(n+s-2, s-1)·φ(p^s)^n`. Since `A(n,M) ≥ φ(M)^n > 0` for
//! `M > 1`, none of these sets is ever empty, even though counting starts
//! from degenerate conventions.
//!
//! This module enumerates `R_{n,M}` by two deliberately independent routes:
//!
//! * [`enumerate_bruteforce`] iterates orbits of one representative per
//!   candidate class and keeps the classes of order exactly `n`;
//! * [`enumerate_recursive`] descends along the one-step image: `k = qM+c`
//!   belongs to `R_{n,M}` iff, with `h = gcd(q,M)` and `N = M/h > 1`, the
//!   residue `(q/h)(M+c) mod N^n` belongs to `R_{n-1,N}`.
//!
//! Their agreement is the central cross-check of the whole crate.

use crate::arith::{divisors, gcd, is_prime, totient, u64_pow, Rat};
use crate::dynamics::{order, OrderResult};
use crate::{Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// The set `R_{n,M}` as sorted residues modulo `M^{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSet {
    pub n: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub modulus: u64,
    pub residues: Vec<u64>,
}

impl ClassSet {
    pub fn contains(&self, k: u64) -> bool {
        self.residues.binary_search(&k).is_ok()
    }

    pub fn cardinality(&self) -> u64 {
        self.residues.len() as u64
    }
}

/// Memoized evaluation of the counting recurrence. The recursion only ever
/// descends to divisors of the starting modulus, so the table stays small.
#[derive(Debug, Default)]
pub struct CountTable {
    memo: HashMap<(u64, u64), BigUint>,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `A(n, m)`, exact. Counts grow like `φ(m)^n`, hence the big result.
    pub fn count(&mut self, n: u64, m: u64) -> BigUint {
        assert!(m >= 1, "modulus must be positive");
        if let Some(v) = self.memo.get(&(n, m)) {
            return v.clone();
        }
        let result = if n == 0 {
            if m == 1 {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        } else if m == 1 {
            BigUint::zero()
        } else {
            let mut sum = BigUint::zero();
            for d in divisors(m).expect("m >= 1") {
                let sub = self.count(n - 1, d);
                if !sub.is_zero() {
                    sum += sub * u64_pow(m / d, n - 1);
                }
            }
            sum * totient(m).expect("m >= 1")
        };
        self.memo.insert((n, m), result.clone());
        result
    }
}

/// `A(n, m)` via the recurrence, with a fresh memo table.
pub fn count_recurrence(n: u64, m: u64) -> BigUint {
    CountTable::new().count(n, m)
}

/// Binomial coefficient `C(n, k)`, exact.
fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc = acc * BigUint::from(n - k + i) / BigUint::from(i);
    }
    acc
}

/// Closed form for prime powers: `A(n, p^s) = C(n+s-2, s-1) · φ(p^s)^n`.
pub fn count_prime_power(n: u64, p: u64, s: u64) -> Result<BigUint> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if s < 1 || n < 1 {
        return Err(Error::Domain(format!(
            "prime-power count needs s >= 1 and n >= 1, got s={s}, n={n}"
        )));
    }
    let phi = u64_pow(p, s - 1) * BigUint::from(p - 1);
    Ok(binomial(n + s - 2, s - 1) * crate::arith::big_pow(&phi, n))
}

fn check_enum_domain(n: u64, m: u64) -> Result<()> {
    if m < 2 || n < 1 {
        return Err(Error::Domain(format!(
            "class sets are defined for M >= 2 and n >= 1, got M={m}, n={n}"
        )));
    }
    Ok(())
}

/// `m^(n+1)` when it fits inside the residue budget; a refusal otherwise.
fn modulus_within_budget(n: u64, m: u64, budget: u64) -> Result<u64> {
    let modulus = u64_pow(m, n + 1);
    match modulus.to_u64() {
        Some(v) if v <= budget => Ok(v),
        _ => Err(Error::BudgetExceeded {
            residues: modulus.to_string(),
            budget,
        }),
    }
}

/// Enumerate `R_{n,M}` by brute force: for every residue `k` modulo
/// `M^{n+1}` coprime to `M`, run the orbit of the smallest representative
/// `a ≥ 2M` of the class and keep `k` iff the order is exactly `n`.
///
/// Any representative that exceeds `cap` is a hard error — it would
/// falsify the enumeration — so `cap` must comfortably exceed `n`.
pub fn enumerate_bruteforce(n: u64, m: u64, cap: u64, budget: u64) -> Result<ClassSet> {
    check_enum_domain(n, m)?;
    if cap <= n {
        return Err(Error::CapTooSmall { cap, n });
    }
    let modulus = modulus_within_budget(n, m, budget)?;
    let hits: Vec<Option<u64>> = (0..modulus)
        .into_par_iter()
        .map(|k| -> Result<Option<u64>> {
            if gcd(k, m) != 1 {
                return Ok(None);
            }
            // Smallest class member >= 2M: k itself, or one modulus up.
            let a = if k >= 2 * m { k } else { k + modulus };
            let x = Rat::from_reduced(BigUint::from(a), BigUint::from(m));
            match order(&x, cap)? {
                OrderResult::Finite(o) if o == n => Ok(Some(k)),
                OrderResult::Finite(_) => Ok(None),
                OrderResult::CapExceeded(_) => Err(Error::EnumerationCapExceeded {
                    a: a.to_string(),
                    m,
                    cap,
                }),
            }
        })
        .collect::<Result<_>>()?;
    let residues: Vec<u64> = hits.into_iter().flatten().collect();
    Ok(ClassSet {
        n,
        m,
        modulus,
        residues,
    })
}

fn coprime_residues(m: u64) -> Vec<u64> {
    (1..m).filter(|&c| gcd(c, m) == 1).collect()
}

fn enumerate_rec_inner(n: u64, m: u64, memo: &mut HashMap<(u64, u64), Vec<u64>>) {
    if memo.contains_key(&(n, m)) {
        return;
    }
    if n == 1 {
        memo.insert((n, m), coprime_residues(m));
        return;
    }
    for d in divisors(m).expect("m >= 2") {
        let sub_m = m / d;
        if sub_m > 1 {
            enumerate_rec_inner(n - 1, sub_m, memo);
        }
    }
    let q_bound = u64_pow(m, n).to_u64().expect("modulus passed budget check");
    let cs = coprime_residues(m);
    let mut out = Vec::new();
    for q in 0..q_bound {
        // gcd(0, M) = M, so q = 0 lands on N = 1 and is excluded here.
        let h = gcd(q, m);
        let sub_m = m / h;
        if sub_m == 1 {
            continue;
        }
        let sub_modulus = u64_pow(sub_m, n).to_u64().expect("bounded by q_bound");
        let sub = &memo[&(n - 1, sub_m)];
        let qh = q / h;
        for &c in &cs {
            let v = ((qh as u128 * (m + c) as u128) % sub_modulus as u128) as u64;
            if sub.binary_search(&v).is_ok() {
                out.push(q * m + c);
            }
        }
    }
    memo.insert((n, m), out);
}

/// Enumerate `R_{n,M}` by the one-step descent, never running an orbit:
/// the base case is `R_{1,M} = {k : 1 ≤ k < M, gcd(k,M) = 1}`, and
/// `k = qM + c` (with `gcd(c,M) = 1`) is kept for `n ≥ 2` iff, writing
/// `h = gcd(q,M)` and `N = M/h`, we have `N > 1` and
/// `(q/h)·(M+c) mod N^n ∈ R_{n-1,N}`. Sub-results are memoized per
/// divisor of `M`.
pub fn enumerate_recursive(n: u64, m: u64, budget: u64) -> Result<ClassSet> {
    check_enum_domain(n, m)?;
    let modulus = modulus_within_budget(n, m, budget)?;
    let mut memo = HashMap::new();
    enumerate_rec_inner(n, m, &mut memo);
    let residues = memo.remove(&(n, m)).expect("just computed");
    debug_assert!(residues.windows(2).all(|w| w[0] < w[1]));
    Ok(ClassSet {
        n,
        m,
        modulus,
        residues,
    })
}

/// True iff `a mod M^{n+1}` lies in `R_{n,M}`, i.e. iff `a/M` has exact
/// order `n`. Requires `gcd(a,M) = 1` and `a ≥ 2M`.
pub fn classify(a: &BigUint, m: u64, n: u64, budget: u64) -> Result<bool> {
    let m_big = BigUint::from(m);
    if !a.gcd(&m_big).is_one() {
        return Err(Error::NotCoprime {
            a: a.to_string(),
            m,
        });
    }
    if *a < BigUint::from(2 * m) {
        return Err(Error::RepresentativeTooSmall {
            a: a.to_string(),
            m,
        });
    }
    let set = enumerate_recursive(n, m, budget)?;
    let k = (a % BigUint::from(set.modulus))
        .to_u64()
        .expect("reduced below a u64 modulus");
    Ok(set.contains(k))
}

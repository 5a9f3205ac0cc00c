//! Density of finite-order numerators for a fixed denominator.
//!
//! Among integers coprime to `M`, the numerators of exact order `n` occupy
//! `A(n,M)` residue classes modulo `M^{n+1}`, so their relative natural
//! density is `A(n,M)/φ(M^{n+1})`. Summed over all `n` these densities
//! telescope to exactly 1 — finite-order numerators have full density —
//! and the partial sums quantify how fast. Everything here is exact
//! rational arithmetic; no assertion anywhere depends on floating point.
//!
//! For prime `p` the partial sums have the geometric closed form
//! `1 − ((p−1)/p)^N`, and for `M = 4` they telescope to
//! `1 − (N+2)/2^{N+1}`; the test suites pin both.
//!
//! One consequence worth recording even though nothing here computes it:
//! an infinite arithmetic progression `a + kd` of numerators has positive
//! relative density over its denominator, so no such progression can
//! consist entirely of cap-defying (order-unknown) fractions. Density-one
//! statements admit only finite spot checks, which is what this module
//! provides.

use crate::arith::{totient, u64_pow, Rat};
use crate::classes::CountTable;
use crate::dynamics::{order, OrderResult};
use crate::{Error, Result};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One predicted relative density: order `n` occurs with density `term`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityTerm {
    pub n: u64,
    pub term: Rat,
}

/// Observed order counts over a finite numerator range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    /// Numerators `a` with `2M ≤ a ≤ N_max` and `gcd(a, M) = 1` were scanned.
    #[serde(rename = "N_max")]
    pub n_max: u64,
    pub cap: u64,
    /// How many numerators in the range are coprime to `M`.
    #[serde(rename = "counted_B")]
    pub counted_b: u64,
    /// How many of those resolved to a finite order within the cap.
    pub counted_finite: u64,
    /// Numerators whose order did not resolve within the cap. Reported,
    /// never silently dropped.
    pub cap_exceeded: u64,
    pub per_order_counts: BTreeMap<u64, u64>,
}

/// Exact density terms and their partial sum, optionally with observed
/// counts alongside.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    #[serde(rename = "M")]
    pub m: u64,
    pub terms: Vec<DensityTerm>,
    pub partial_sum: Rat,
    pub empirical: Option<EmpiricalDensity>,
}

fn term_with(table: &mut CountTable, m: u64, n: u64) -> Rat {
    let count = table.count(n, m);
    let phi = u64_pow(m, n) * BigUint::from(totient(m).expect("m >= 1"));
    Rat::new(count, phi).expect("totient is positive")
}

/// Predicted relative density of order-`n` numerators: `A(n,M)/φ(M^{n+1})`.
pub fn term(m: u64, n: u64) -> Rat {
    assert!(m >= 1, "modulus must be positive");
    term_with(&mut CountTable::new(), m, n)
}

/// Exact `Σ_{n=0}^{N} A(n,M)/φ(M^{n+1})`. The `n = 0` term is 1 for
/// `M = 1` and 0 otherwise, by the counting conventions.
pub fn partial_sum(m: u64, n_terms: u64) -> Rat {
    assert!(m >= 1, "modulus must be positive");
    let mut table = CountTable::new();
    let mut sum = Rat::from_integer(BigUint::from(0u32));
    for n in 0..=n_terms {
        sum = sum.add(&term_with(&mut table, m, n));
    }
    sum
}

/// Terms `n = 0..=n_terms` together with their exact partial sum.
pub fn density_report(m: u64, n_terms: u64) -> DensityReport {
    assert!(m >= 1, "modulus must be positive");
    let mut table = CountTable::new();
    let mut terms = Vec::with_capacity(n_terms as usize + 1);
    let mut sum = Rat::from_integer(BigUint::from(0u32));
    for n in 0..=n_terms {
        let t = term_with(&mut table, m, n);
        sum = sum.add(&t);
        terms.push(DensityTerm { n, term: t });
    }
    DensityReport {
        m,
        terms,
        partial_sum: sum,
        empirical: None,
    }
}

#[derive(Default)]
struct BlockCounts {
    coprime: u64,
    exceeded: u64,
    hist: BTreeMap<u64, u64>,
}

fn count_block(m: u64, lo: u64, hi: u64, cap: u64) -> Result<BlockCounts> {
    let mut counts = BlockCounts::default();
    let m_big = BigUint::from(m);
    for a in lo..=hi {
        if crate::arith::gcd(a, m) != 1 {
            continue;
        }
        counts.coprime += 1;
        let x = Rat::from_reduced(BigUint::from(a), m_big.clone());
        match order(&x, cap)? {
            OrderResult::Finite(n) => *counts.hist.entry(n).or_insert(0) += 1,
            OrderResult::CapExceeded(_) => counts.exceeded += 1,
        }
    }
    Ok(counts)
}

/// Observed order histogram over `a ∈ [2M, N_max]` with `gcd(a,M) = 1`,
/// reported next to the exact predicted terms for every order that
/// occurred. The range is split into blocks counted independently; the
/// merge is plain addition, so the result does not depend on scheduling.
pub fn empirical_density(m: u64, n_max: u64, cap: u64) -> Result<DensityReport> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "empirical densities are measured for M >= 2, got M={m}"
        )));
    }
    const BLOCK: u64 = 1 << 16;
    let lo = 2 * m;
    let mut blocks = Vec::new();
    let mut start = lo;
    while start <= n_max {
        let end = n_max.min(start + BLOCK - 1);
        blocks.push((start, end));
        start = end + 1;
    }
    let partials: Vec<BlockCounts> = blocks
        .into_par_iter()
        .map(|(lo, hi)| count_block(m, lo, hi, cap))
        .collect::<Result<_>>()?;

    let mut merged = BlockCounts::default();
    for p in partials {
        merged.coprime += p.coprime;
        merged.exceeded += p.exceeded;
        for (n, c) in p.hist {
            *merged.hist.entry(n).or_insert(0) += c;
        }
    }

    let top_order = merged.hist.keys().next_back().copied().unwrap_or(0);
    let mut report = density_report(m, top_order);
    report.empirical = Some(EmpiricalDensity {
        n_max,
        cap,
        counted_b: merged.coprime,
        counted_finite: merged.hist.values().sum(),
        cap_exceeded: merged.exceeded,
        per_order_counts: merged.hist,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::divisors;

    fn rat(num: u64, den: u64) -> Rat {
        Rat::from_u64(num, den).unwrap()
    }

    fn pow2(e: u64) -> BigUint {
        BigUint::from(1u32) << e
    }

    #[test]
    fn term_examples() {
        assert_eq!(term(2, 3), rat(1, 8));
        assert_eq!(term(3, 1), rat(1, 3));
        assert_eq!(term(5, 2), rat(16, 100));
    }

    #[test]
    fn partial_sum_examples() {
        assert_eq!(partial_sum(1, 0), rat(1, 1));

        // Denominator 2: geometric, 1 - 2^-20.
        let expected = Rat::new(pow2(20) - 1u32, pow2(20)).unwrap();
        assert_eq!(partial_sum(2, 20), expected);

        // Denominator 3: 1 - (2/3)^10.
        let three_10 = u64_pow(3, 10);
        let expected = Rat::new(&three_10 - pow2(10), three_10).unwrap();
        assert_eq!(partial_sum(3, 10), expected);

        // Denominator 4: 1 - 14/2^13 at N = 12.
        let expected = Rat::new(pow2(13) - 14u32, pow2(13)).unwrap();
        assert_eq!(partial_sum(4, 12), expected);
    }

    #[test]
    fn partial_sums_increase_and_stay_below_one() {
        let one = rat(1, 1);
        for m in 2..=12u64 {
            let mut prev = partial_sum(m, 0);
            for n in 1..=12u64 {
                let cur = partial_sum(m, n);
                assert!(cur > prev, "not increasing at M={m}, N={n}");
                assert!(cur < one, "reached 1 at M={m}, N={n}");
                prev = cur;
            }
        }
    }

    #[test]
    fn prime_partial_sums_close_geometrically() {
        for p in [5u64, 7] {
            for n in 1..=30u64 {
                let p_n = u64_pow(p, n);
                let expected = Rat::new(&p_n - u64_pow(p - 1, n), p_n).unwrap();
                assert_eq!(partial_sum(p, n), expected, "closed form fails at p={p}, N={n}");
            }
        }
    }

    // With every sub-density at its limiting value 1, the self-consistency
    // identity 1 = φ(M)/M + (1/M)·Σ_{d|M, d<M} φ(d) must hold exactly; it
    // is the totient divisor sum in rational-arithmetic form.
    #[test]
    fn fixed_point_identity_replay() {
        for m in 2..=12u64 {
            let phi_m = totient(m).unwrap();
            let mut rhs = rat(phi_m, m);
            for d in divisors(m).unwrap() {
                if d < m {
                    rhs = rhs.add(&rat(totient(d).unwrap(), m));
                }
            }
            assert_eq!(rhs, rat(1, 1), "identity fails at M={m}");
        }
    }

    #[test]
    fn empirical_small_sample_matches_direct_enumeration() {
        // 48 odd numerators in [4, 100]; orders derived by direct iteration.
        let report = empirical_density(2, 100, 5).unwrap();
        let emp = report.empirical.as_ref().unwrap();
        assert_eq!(emp.counted_b, 48);

        let mut expected = BTreeMap::new();
        for a in (5u64..=99).step_by(2) {
            match order(&rat(a, 2), 5).unwrap() {
                OrderResult::Finite(n) => *expected.entry(n).or_insert(0u64) += 1,
                OrderResult::CapExceeded(_) => {}
            }
        }
        assert_eq!(emp.per_order_counts, expected);

        // Frozen histogram: v2(a-3) over odd a in [5, 99].
        let frozen: BTreeMap<u64, u64> =
            [(1, 24), (2, 12), (3, 6), (4, 3), (5, 2)].into_iter().collect();
        assert_eq!(emp.per_order_counts, frozen);
        assert_eq!(emp.counted_finite, 47);
        assert_eq!(emp.cap_exceeded, 1); // a = 67 has order 6
        assert_eq!(report.terms.last().unwrap().n, 5);
    }

    #[test]
    fn empirical_rejects_trivial_denominator() {
        assert!(empirical_density(1, 100, 5).is_err());
    }

    #[test]
    fn empirical_matches_geometric_for_denominator_two() {
        // Order-n numerators over 2 occupy one class modulo 2^(n+1), so
        // their observed fraction converges to 2^-n; the block-counting
        // argument bounds the error by ~2^(n+1)/N per side.
        let n_max = 1u64 << 20;
        let report = empirical_density(2, n_max, 30).unwrap();
        let emp = report.empirical.unwrap();
        for n in 1..=8u64 {
            let observed = rat(emp.per_order_counts[&n], emp.counted_b);
            let predicted = Rat::new(BigUint::from(1u32), pow2(n)).unwrap();
            let tolerance = Rat::new(pow2(n + 2), BigUint::from(n_max)).unwrap();
            assert!(
                observed.abs_diff(&predicted) <= tolerance,
                "order-{n} fraction {observed} drifts from 2^-{n}"
            );
        }
    }

    #[test]
    fn report_json_roundtrip() {
        let mut report = density_report(3, 4);
        report.empirical = Some(EmpiricalDensity {
            n_max: 100,
            cap: 5,
            counted_b: 10,
            counted_finite: 9,
            cap_exceeded: 1,
            per_order_counts: [(1u64, 5u64), (2, 4)].into_iter().collect(),
        });
        let text = serde_json::to_string(&report).unwrap();
        let back: DensityReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert!(text.contains("\"num\""));
        assert!(text.contains("\"den\""));
    }
}

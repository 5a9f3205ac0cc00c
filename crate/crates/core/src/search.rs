//! Witness construction, minimal-numerator search, and the conjecture scan.
//!
//! For every denominator `M ≥ 2` and target order `n ≥ 1` the numerator
//! `a = M + 1 + M^n(M-1)` is coprime to `M` and gives `a/M` order exactly
//! `n`, so every order occurs for every denominator. The smallest such
//! numerator, `μ(M,n)`, has no known description; [`mu_search`] tabulates
//! values by exhaustive scan, and the tables are data, nothing more.
//!
//! [`conjecture_scan`] sweeps numerator ranges looking for orbits that fail
//! to reach an integer within an iteration cap. An exceeder is recorded as
//! *interesting* — a capped iteration can never distinguish "large finite
//! order" from "infinite order", so the scan never claims the latter. Each
//! exceeder carries the denominator of its last iterate: an orbit that
//! truly never terminated would have an eventually constant denominator,
//! making that value the natural thing to log. Progress is checkpointed to
//! JSON and scans resume from the checkpoint deterministically.

use crate::arith::{big_pow, gcd, u64_pow, Rat};
use crate::classes::{count_prime_power, count_recurrence, enumerate_bruteforce, enumerate_recursive};
use crate::density::partial_sum;
use crate::dynamics::{orbit, order, order_half, OrderResult};
use crate::{dec, Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// `a = M + 1 + M^n(M-1)`: a numerator coprime to `M` whose fraction `a/M`
/// has order exactly `n`.
pub fn family_witness(m: u64, n: u64) -> BigUint {
    assert!(m >= 2 && n >= 1, "witnesses exist for M >= 2, n >= 1");
    BigUint::from(m + 1) + u64_pow(m, n) * BigUint::from(m - 1)
}

/// The smallest admissible numerator of a given order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuEntry {
    #[serde(rename = "M")]
    pub m: u64,
    pub n: u64,
    #[serde(with = "dec")]
    pub mu: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuOutcome {
    Found(MuEntry),
    NotFoundBelowLimit {
        #[serde(with = "dec")]
        limit: BigUint,
    },
}

/// Result of a μ scan. Numerators whose order did not resolve within the
/// cap are listed as incidents; they do not abort the search, since all
/// that matters for μ is that their order is not `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuSearchResult {
    pub outcome: MuOutcome,
    #[serde(with = "dec::vec")]
    pub cap_incidents: Vec<BigUint>,
}

/// Scan `a = 2M, 2M+1, … ≤ a_limit` over `gcd(a,M) = 1` for the first
/// numerator of order exactly `n`. The default limit is
/// [`family_witness`]`(M,n)`, below which a hit is guaranteed to exist.
pub fn mu_search(m: u64, n: u64, a_limit: Option<BigUint>, cap: u64) -> Result<MuSearchResult> {
    if m < 2 || n < 1 {
        return Err(Error::Domain(format!(
            "mu is defined for M >= 2 and n >= 1, got M={m}, n={n}"
        )));
    }
    if cap < n {
        return Err(Error::CapTooSmall { cap, n });
    }
    let limit = a_limit.unwrap_or_else(|| family_witness(m, n));
    let m_big = BigUint::from(m);
    let mut cap_incidents = Vec::new();
    let mut a = BigUint::from(2 * m);
    while a <= limit {
        if a.gcd(&m_big).is_one() {
            let x = Rat::from_reduced(a.clone(), m_big.clone());
            match order(&x, cap)? {
                OrderResult::Finite(k) if k == n => {
                    return Ok(MuSearchResult {
                        outcome: MuOutcome::Found(MuEntry { m, n, mu: a }),
                        cap_incidents,
                    });
                }
                OrderResult::Finite(_) => {}
                OrderResult::CapExceeded(_) => cap_incidents.push(a.clone()),
            }
        }
        a += 1u32;
    }
    Ok(MuSearchResult {
        outcome: MuOutcome::NotFoundBelowLimit { limit },
        cap_incidents,
    })
}

/// Current checkpoint schema; resumes refuse anything else.
pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

/// Numerators are checkpointed in blocks of this many consecutive values.
const SCAN_BLOCK: u64 = 10_000;

/// Scan parameters: denominators `M ∈ [m_lo, m_hi]`, numerators
/// `a ∈ [2M, a_hi]` with `gcd(a,M) = 1`, iteration cap `cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanParams {
    pub m_lo: u64,
    pub m_hi: u64,
    pub a_hi: u64,
    pub cap: u64,
}

/// A fraction whose orbit stayed non-integer for `iterations` steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exceeder {
    pub a: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub iterations: u64,
    /// Reduced denominator of the last iterate examined; always divides `M`.
    pub last_denominator: u64,
}

/// Persistent scan state. Serialized as pretty JSON, sorted maps and a
/// sorted exceeder list, so equal scans produce byte-identical files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCheckpoint {
    pub schema_version: u32,
    pub created_by: String,
    pub m_range: (u64, u64),
    pub cap: u64,
    /// Highest numerator already examined, per denominator.
    pub a_scanned_up_to: BTreeMap<u64, u64>,
    pub exceeders: Vec<Exceeder>,
}

impl ScanCheckpoint {
    fn fresh(params: &ScanParams) -> Self {
        ScanCheckpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            created_by: format!("tmap-core {}", env!("CARGO_PKG_VERSION")),
            m_range: (params.m_lo, params.m_hi),
            cap: params.cap,
            a_scanned_up_to: BTreeMap::new(),
            exceeders: Vec::new(),
        }
    }

    fn check_resumable(&self, params: &ScanParams) -> Result<()> {
        if self.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(Error::CheckpointMismatch(format!(
                "schema_version {} != {}",
                self.schema_version, CHECKPOINT_SCHEMA_VERSION
            )));
        }
        if self.m_range != (params.m_lo, params.m_hi) {
            return Err(Error::CheckpointMismatch(format!(
                "M range {:?} != requested ({}, {})",
                self.m_range, params.m_lo, params.m_hi
            )));
        }
        if self.cap != params.cap {
            return Err(Error::CheckpointMismatch(format!(
                "cap {} != requested {}",
                self.cap, params.cap
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }
}

fn load_checkpoint(path: &Path, params: &ScanParams) -> Result<ScanCheckpoint> {
    let text = fs::read_to_string(path)?;
    let ckpt: ScanCheckpoint = serde_json::from_str(&text)
        .map_err(|e| Error::CheckpointMismatch(format!("unreadable checkpoint: {e}")))?;
    ckpt.check_resumable(params)?;
    Ok(ckpt)
}

fn write_checkpoint(path: &Path, ckpt: &ScanCheckpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, ckpt.to_json())?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn scan_one(a: u64, m: u64, cap: u64) -> Result<Option<Exceeder>> {
    let x = Rat::from_reduced(BigUint::from(a), BigUint::from(m));
    match order(&x, cap)? {
        OrderResult::Finite(_) => Ok(None),
        OrderResult::CapExceeded(_) => {
            // Rare enough that re-deriving the trace for diagnostics is free.
            let trace = orbit(&x, cap)?;
            let last_denominator = trace
                .steps
                .last()
                .map(|s| s.new_den.to_u64().expect("divides M"))
                .unwrap_or(m);
            Ok(Some(Exceeder {
                a,
                m,
                iterations: cap,
                last_denominator,
            }))
        }
    }
}

/// Exhaustively compute orders for every admissible `a/M` in range,
/// recording every numerator that fails to resolve within the cap.
///
/// Progress persists to `checkpoint_path` after every block of 10,000
/// numerators and at completion. If the file already exists it must
/// carry the same schema, `M` range, and cap; the scan then continues
/// from the per-`M` watermarks. Two scans over the same parameters
/// write byte-identical checkpoints, interrupted or not.
pub fn conjecture_scan(params: &ScanParams, checkpoint_path: &Path) -> Result<ScanCheckpoint> {
    if params.m_lo < 2 || params.m_lo > params.m_hi {
        return Err(Error::Domain(format!(
            "scan needs 2 <= M_lo <= M_hi, got [{}, {}]",
            params.m_lo, params.m_hi
        )));
    }
    if params.cap == 0 {
        return Err(Error::Domain("scan needs cap >= 1".into()));
    }

    let mut ckpt = if checkpoint_path.exists() {
        load_checkpoint(checkpoint_path, params)?
    } else {
        ScanCheckpoint::fresh(params)
    };

    for m in params.m_lo..=params.m_hi {
        let resume_from = ckpt
            .a_scanned_up_to
            .get(&m)
            .map(|done| done + 1)
            .unwrap_or(2 * m)
            .max(2 * m);
        let mut start = resume_from;
        while start <= params.a_hi {
            let end = params.a_hi.min(start + SCAN_BLOCK - 1);
            let found: Vec<Option<Exceeder>> = (start..=end)
                .into_par_iter()
                .map(|a| -> Result<Option<Exceeder>> {
                    if gcd(a, m) != 1 {
                        return Ok(None);
                    }
                    scan_one(a, m, params.cap)
                })
                .collect::<Result<_>>()?;
            ckpt.exceeders.extend(found.into_iter().flatten());
            ckpt.exceeders.sort_by_key(|e| (e.m, e.a));
            ckpt.a_scanned_up_to.insert(m, end);
            write_checkpoint(checkpoint_path, &ckpt)?;
            start = end + 1;
        }
    }
    write_checkpoint(checkpoint_path, &ckpt)?;
    Ok(ckpt)
}

/// One cross-check outcome. `failures` holds one line per counterexample,
/// truncated to the first few; an empty list means the check passed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const MAX_REPORTED_FAILURES: usize = 8;

struct CheckBuilder {
    name: &'static str,
    cases: u64,
    failures: Vec<String>,
    dropped: u64,
}

impl CheckBuilder {
    fn new(name: &'static str) -> Self {
        CheckBuilder {
            name,
            cases: 0,
            failures: Vec::new(),
            dropped: 0,
        }
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            if self.failures.len() < MAX_REPORTED_FAILURES {
                self.failures.push(describe());
            } else {
                self.dropped += 1;
            }
        }
    }

    fn finish(mut self) -> CheckOutcome {
        if self.dropped > 0 {
            self.failures
                .push(format!("... and {} more failures", self.dropped));
        }
        CheckOutcome {
            name: self.name.to_string(),
            passed: self.failures.is_empty(),
            cases: self.cases,
            failures: self.failures,
        }
    }
}

/// A pinned expectation for `A(n, M)`, checked verbatim against the
/// recurrence. Useful for wiring external tables into `verify`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinnedCount {
    pub n: u64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(with = "dec")]
    pub expected: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEqualityCheck {
    pub m_max: u64,
    pub n_max: u64,
    pub modulus_bound: u64,
    pub cap: u64,
}

impl Default for ClassEqualityCheck {
    fn default() -> Self {
        ClassEqualityCheck {
            m_max: 6,
            n_max: 3,
            modulus_bound: 20_000,
            cap: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceClosedFormCheck {
    pub primes: Vec<u64>,
    pub s_max: u64,
    pub n_max: u64,
    pub pinned: Vec<PinnedCount>,
}

impl Default for RecurrenceClosedFormCheck {
    fn default() -> Self {
        RecurrenceClosedFormCheck {
            primes: vec![2, 3, 5, 7],
            s_max: 3,
            n_max: 6,
            pinned: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderHalfCheck {
    pub a_max: u64,
    pub cap: u64,
}

impl Default for OrderHalfCheck {
    fn default() -> Self {
        OrderHalfCheck { a_max: 4095, cap: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCheck {
    pub m_max: u64,
    pub n_max: u64,
    pub cap: u64,
}

impl Default for FamilyCheck {
    fn default() -> Self {
        FamilyCheck {
            m_max: 12,
            n_max: 6,
            cap: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialSumCheck {
    pub n_terms: u64,
}

impl Default for PartialSumCheck {
    fn default() -> Self {
        PartialSumCheck { n_terms: 20 }
    }
}

/// Which cross-checks [`verify_all`] runs. The default runs all of them
/// at modest ranges; an empty config runs nothing and reports nothing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub class_equality: Option<ClassEqualityCheck>,
    pub recurrence_closed_form: Option<RecurrenceClosedFormCheck>,
    pub order_half_agreement: Option<OrderHalfCheck>,
    pub family_orders: Option<FamilyCheck>,
    pub partial_sum_closed_forms: Option<PartialSumCheck>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            class_equality: Some(ClassEqualityCheck::default()),
            recurrence_closed_form: Some(RecurrenceClosedFormCheck::default()),
            order_half_agreement: Some(OrderHalfCheck::default()),
            family_orders: Some(FamilyCheck::default()),
            partial_sum_closed_forms: Some(PartialSumCheck::default()),
        }
    }
}

impl VerifyConfig {
    pub fn empty() -> Self {
        VerifyConfig {
            class_equality: None,
            recurrence_closed_form: None,
            order_half_agreement: None,
            family_orders: None,
            partial_sum_closed_forms: None,
        }
    }
}

fn check_class_equality(cfg: &ClassEqualityCheck) -> CheckOutcome {
    let mut check = CheckBuilder::new("class_enumeration_equality");
    for m in 2..=cfg.m_max {
        for n in 1..=cfg.n_max {
            let within = u64_pow(m, n + 1).to_u64().is_some_and(|v| v <= cfg.modulus_bound);
            if !within {
                continue;
            }
            match (
                enumerate_bruteforce(n, m, cfg.cap, cfg.modulus_bound),
                enumerate_recursive(n, m, cfg.modulus_bound),
            ) {
                (Ok(brute), Ok(rec)) => {
                    check.case(brute == rec, || {
                        format!(
                            "R({n},{m}): brute {:?} != recursive {:?}",
                            brute.residues, rec.residues
                        )
                    });
                }
                (b, r) => check.case(false, || {
                    format!("R({n},{m}): enumeration error: {:?} / {:?}", b.err(), r.err())
                }),
            }
        }
    }
    check.finish()
}

fn check_recurrence_closed_form(cfg: &RecurrenceClosedFormCheck) -> CheckOutcome {
    let mut check = CheckBuilder::new("recurrence_vs_closed_form");
    for &p in &cfg.primes {
        for s in 1..=cfg.s_max {
            for n in 1..=cfg.n_max {
                match count_prime_power(n, p, s) {
                    Ok(closed) => {
                        let rec = count_recurrence(n, u64_pow(p, s).to_u64().unwrap_or(u64::MAX));
                        check.case(rec == closed, || {
                            format!("A({n},{p}^{s}): recurrence {rec} != closed form {closed}")
                        });
                    }
                    Err(e) => check.case(false, || format!("A({n},{p}^{s}): {e}")),
                }
            }
        }
    }
    for pin in &cfg.pinned {
        let computed = count_recurrence(pin.n, pin.m);
        check.case(computed == pin.expected, || {
            format!(
                "A({},{}) = {} disagrees with pinned expectation {}",
                pin.n, pin.m, computed, pin.expected
            )
        });
    }
    check.finish()
}

fn check_order_half(cfg: &OrderHalfCheck) -> CheckOutcome {
    let mut check = CheckBuilder::new("order_half_vs_generic");
    let mut a = 5u64;
    while a <= cfg.a_max {
        let fast = order_half(&BigUint::from(a));
        let slow = order(
            &Rat::from_reduced(BigUint::from(a), BigUint::from(2u32)),
            cfg.cap,
        );
        match (fast, slow) {
            (Ok(f), Ok(OrderResult::Finite(s))) => {
                check.case(f == s, || format!("a={a}: closed form {f} != iterated {s}"));
            }
            (f, s) => check.case(false, || format!("a={a}: {f:?} vs {s:?}")),
        }
        a += 2;
    }
    check.finish()
}

fn check_family(cfg: &FamilyCheck) -> CheckOutcome {
    let mut check = CheckBuilder::new("family_witness_orders");
    for m in 2..=cfg.m_max {
        for n in 1..=cfg.n_max {
            let a = family_witness(m, n);
            let coprime = a.gcd(&BigUint::from(m)).is_one();
            if !coprime {
                check.case(false, || format!("witness({m},{n}) = {a} shares a factor with {m}"));
                continue;
            }
            let x = Rat::from_reduced(a.clone(), BigUint::from(m));
            match order(&x, cfg.cap) {
                Ok(OrderResult::Finite(k)) => {
                    check.case(k == n, || {
                        format!("witness({m},{n}) = {a}: order {k}, expected {n}")
                    });
                }
                other => check.case(false, || format!("witness({m},{n}) = {a}: {other:?}")),
            }
        }
    }
    check.finish()
}

fn check_partial_sums(cfg: &PartialSumCheck) -> CheckOutcome {
    let mut check = CheckBuilder::new("partial_sum_closed_forms");
    for n in 1..=cfg.n_terms {
        for p in [2u64, 3, 5, 7] {
            let p_n = u64_pow(p, n);
            let expected = Rat::new(&p_n - u64_pow(p - 1, n), p_n).expect("positive power");
            let got = partial_sum(p, n);
            check.case(got == expected, || {
                format!("P({p},{n}) = {got} != geometric form {expected}")
            });
        }
        let two = BigUint::from(2u32);
        let denom = big_pow(&two, n + 1);
        let expected = Rat::new(&denom - BigUint::from(n + 2), denom).expect("positive power");
        let got = partial_sum(4, n);
        check.case(got == expected, || {
            format!("P(4,{n}) = {got} != telescoped form {expected}")
        });
    }
    check.finish()
}

/// Run every configured cross-check. Failures are data in the report,
/// never errors.
pub fn verify_all(config: &VerifyConfig) -> VerifyReport {
    let mut checks = Vec::new();
    if let Some(cfg) = &config.class_equality {
        checks.push(check_class_equality(cfg));
    }
    if let Some(cfg) = &config.recurrence_closed_form {
        checks.push(check_recurrence_closed_form(cfg));
    }
    if let Some(cfg) = &config.order_half_agreement {
        checks.push(check_order_half(cfg));
    }
    if let Some(cfg) = &config.family_orders {
        checks.push(check_family(cfg));
    }
    if let Some(cfg) = &config.partial_sum_closed_forms {
        checks.push(check_partial_sums(cfg));
    }
    VerifyReport { checks }
}

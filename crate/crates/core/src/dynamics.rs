//! The map `T(x) = ⌊x⌋·(1 + {x})` on non-negative rationals.
//!
//! Writing `x = a/M` in lowest terms and `a = qM + r` with `0 ≤ r < M`,
//! one step of the map is
//!
//! ```text
//! T(a/M) = q·(M + r) / M
//! ```
//!
//! and, because `gcd(M + r, M) = gcd(r, M) = 1`, the reduced denominator of
//! the image is exactly `M / gcd(q, M)`. Denominators therefore never
//! increase along an orbit, while the values strictly increase until an
//! integer is reached (for non-integer `x ≥ 2`, `T(x) − x = {x}·(⌊x⌋−1) > 0`).
//!
//! The *order* of `x ≥ 2` is the least `n ≥ 0` with `T^n(x)` an integer.
//! Iteration alone can never certify that an order is infinite, so order
//! computation takes an explicit cap and reports [`OrderResult::CapExceeded`]
//! as an honest "unknown" — never as a claim of infinite order.

use crate::arith::{valuation, Rat};
use crate::{dec, Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// One application of the map to a non-integer `a/M`, fully decomposed:
/// `a = q·M + r`, `h = gcd(q, M)`, and the image `q(M+r)/M` whose reduced
/// denominator is `new_den = M/h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentStep {
    #[serde(with = "dec")]
    pub q: BigUint,
    #[serde(with = "dec")]
    pub r: BigUint,
    #[serde(with = "dec")]
    pub h: BigUint,
    #[serde(with = "dec")]
    pub new_den: BigUint,
    pub image: Rat,
}

/// Outcome of an order computation.
///
/// `Finite(n)` means `T^n(x)` is an integer and no earlier iterate is.
/// `CapExceeded(cap)` means the first `cap` iterates are all non-integers;
/// nothing more is claimed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderResult {
    Finite(u64),
    CapExceeded(u64),
}

impl OrderResult {
    pub fn finite(&self) -> Option<u64> {
        match self {
            OrderResult::Finite(n) => Some(*n),
            OrderResult::CapExceeded(_) => None,
        }
    }
}

/// An orbit prefix: every descent step up to the first integer iterate, or
/// up to the cap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub start: Rat,
    pub steps: Vec<DescentStep>,
    pub result: OrderResult,
}

/// Shared single-step kernel for non-integer input, in reduced form.
fn step_parts(x: &Rat) -> DescentStep {
    let (q, r) = x.floor_rem();
    debug_assert!(!r.is_zero());
    let h = q.gcd(x.den());
    let new_den = x.den() / &h;
    // gcd(M + r, M) = gcd(r, M) = 1, so cancellation removes exactly h.
    let num = (&q / &h) * (x.den() + &r);
    let image = Rat::from_reduced(num, new_den.clone());
    DescentStep {
        q,
        r,
        h,
        new_den,
        image,
    }
}

/// One application of the map. Defined for `x ≥ 1`; integers and the whole
/// interval `[1, 2)` are fixed.
pub fn t_step(x: &Rat) -> Result<Rat> {
    if !x.at_least(1) {
        return Err(Error::BelowOne(x.clone()));
    }
    if x.is_integer() {
        return Ok(x.clone());
    }
    let step = step_parts(x);
    debug_assert!(step.image >= *x);
    Ok(step.image)
}

/// Full single-step decomposition `(q, r, h, new_den, image)` of a
/// non-integer `x ≥ 1`.
pub fn descent_step(x: &Rat) -> Result<DescentStep> {
    if !x.at_least(1) {
        return Err(Error::BelowOne(x.clone()));
    }
    if x.is_integer() {
        return Err(Error::IntegerInput(x.clone()));
    }
    Ok(step_parts(x))
}

fn check_order_domain(x: &Rat) -> Result<()> {
    if !x.at_least(2) {
        return Err(Error::BelowTwo(x.clone()));
    }
    Ok(())
}

/// Least `n ≤ cap` with `T^n(x)` an integer, or `CapExceeded(cap)`.
/// Defined for `x ≥ 2`; returns `Finite(0)` exactly when `x` is an integer.
pub fn order(x: &Rat, cap: u64) -> Result<OrderResult> {
    check_order_domain(x)?;
    let mut cur = x.clone();
    let mut n = 0u64;
    while !cur.is_integer() {
        if n == cap {
            return Ok(OrderResult::CapExceeded(cap));
        }
        cur = step_parts(&cur).image;
        n += 1;
    }
    Ok(OrderResult::Finite(n))
}

/// Orbit of `x ≥ 2` with every step decomposed, up to the first integer or
/// the cap. The result field agrees with [`order`] at the same cap.
pub fn orbit(x: &Rat, cap: u64) -> Result<OrbitTrace> {
    check_order_domain(x)?;
    let mut steps = Vec::new();
    let mut cur = x.clone();
    let mut n = 0u64;
    let result = loop {
        if cur.is_integer() {
            break OrderResult::Finite(n);
        }
        if n == cap {
            break OrderResult::CapExceeded(cap);
        }
        let step = step_parts(&cur);
        debug_assert!(step.image > cur);
        debug_assert!(step.new_den <= *cur.den());
        cur = step.image.clone();
        steps.push(step);
        n += 1;
    };
    Ok(OrbitTrace {
        start: x.clone(),
        steps,
        result,
    })
}

/// Closed form for denominator 2: for odd `a ≥ 5`, the order of `a/2`
/// equals the 2-adic valuation of `a − 3`. Exercised against the generic
/// iteration in the test suites.
pub fn order_half(a: &BigUint) -> Result<u64> {
    if a.is_even() || *a < BigUint::from(5u32) {
        return Err(Error::BadHalfNumerator(a.to_string()));
    }
    valuation(2, &(a - BigUint::from(3u32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(a: u64, m: u64) -> Rat {
        Rat::from_u64(a, m).unwrap()
    }

    #[test]
    fn t_step_examples() {
        assert_eq!(t_step(&rat(7, 3)).unwrap(), rat(8, 3));
        assert_eq!(t_step(&rat(5, 2)).unwrap(), rat(3, 1));
        assert_eq!(t_step(&rat(3, 2)).unwrap(), rat(3, 2));
        // denominator drops 6 -> 3
        assert_eq!(t_step(&rat(13, 6)).unwrap(), rat(7, 3));
        assert!(matches!(t_step(&rat(1, 2)), Err(Error::BelowOne(_))));
    }

    #[test]
    fn descent_step_examples() {
        let s = descent_step(&rat(13, 6)).unwrap();
        assert_eq!(
            (s.q.to_string(), s.r.to_string(), s.h.to_string(), s.new_den.to_string()),
            ("2".into(), "1".into(), "2".into(), "3".into())
        );
        assert_eq!(s.image, rat(7, 3));

        let s = descent_step(&rat(7, 3)).unwrap();
        assert_eq!(s.h, BigUint::from(1u32));
        assert_eq!(s.image, rat(8, 3));

        let s = descent_step(&rat(9, 2)).unwrap();
        assert_eq!(s.q, BigUint::from(4u32));
        assert_eq!(s.new_den, BigUint::from(1u32));
        assert_eq!(s.image, rat(6, 1));

        assert!(matches!(descent_step(&rat(4, 1)), Err(Error::IntegerInput(_))));
    }

    #[test]
    fn order_examples() {
        assert_eq!(order(&rat(4, 1), 100).unwrap(), OrderResult::Finite(0));
        // 7/3 -> 8/3 -> 10/3 -> 4
        assert_eq!(order(&rat(7, 3), 100).unwrap(), OrderResult::Finite(3));
        // 11/2 -> 15/2 -> 21/2 -> 15, matching v_2(11-3) = 3
        assert_eq!(order(&rat(11, 2), 100).unwrap(), OrderResult::Finite(3));
        // 5/2 -> 3, matching v_2(2) = 1
        assert_eq!(order(&rat(5, 2), 100).unwrap(), OrderResult::Finite(1));
        assert!(matches!(order(&rat(3, 2), 100), Err(Error::BelowTwo(_))));
    }

    #[test]
    fn orbit_examples() {
        let t = orbit(&rat(7, 3), 10).unwrap();
        let values: Vec<Rat> = t.steps.iter().map(|s| s.image.clone()).collect();
        assert_eq!(values, vec![rat(8, 3), rat(10, 3), rat(4, 1)]);
        assert_eq!(t.result, OrderResult::Finite(3));

        let t = orbit(&rat(6, 1), 10).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.result, OrderResult::Finite(0));

        let t = orbit(&rat(17, 3), 2).unwrap();
        let values: Vec<Rat> = t.steps.iter().map(|s| s.image.clone()).collect();
        assert_eq!(values, vec![rat(25, 3), rat(32, 3)]);
        assert_eq!(t.result, OrderResult::CapExceeded(2));
    }

    #[test]
    fn order_half_examples() {
        assert_eq!(order_half(&BigUint::from(5u32)).unwrap(), 1);
        assert_eq!(order_half(&BigUint::from(11u32)).unwrap(), 3);
        // 7/2 -> 9/2 -> 6
        assert_eq!(order_half(&BigUint::from(7u32)).unwrap(), 2);
        assert!(order_half(&BigUint::from(6u32)).is_err());
        assert!(order_half(&BigUint::from(3u32)).is_err());
    }

    #[test]
    fn order_half_agrees_with_iteration() {
        for a in (5u64..=1u64 << 13).step_by(2) {
            let fast = order_half(&BigUint::from(a)).unwrap();
            let slow = order(&rat(a, 2), 64).unwrap();
            assert_eq!(slow, OrderResult::Finite(fast), "disagreement at {a}/2");
        }
    }

    #[test]
    fn trace_denominators_never_increase() {
        // 13/6 drops to denominator 3 on the first step and stays there
        // until the cap.
        let t = orbit(&rat(13, 6), 2).unwrap();
        let dens: Vec<u64> = t
            .steps
            .iter()
            .map(|s| u64::try_from(&s.new_den).unwrap())
            .collect();
        assert_eq!(dens, vec![3, 3]);

        // A long capped orbit with denominator 2 throughout: order of
        // (3 + 2^30)/2 is 30, so a cap of 12 leaves the denominator constant.
        let a = BigUint::from(3u32) + (BigUint::from(1u32) << 30);
        let x = Rat::new(a, BigUint::from(2u32)).unwrap();
        let t = orbit(&x, 12).unwrap();
        assert_eq!(t.result, OrderResult::CapExceeded(12));
        assert!(t.steps.iter().all(|s| s.new_den == BigUint::from(2u32)));
        let mut prev = x.den().clone();
        for s in &t.steps {
            assert!(s.new_den <= prev);
            prev = s.new_den.clone();
        }
    }

    proptest! {
        // T(x) > x for non-integer x >= 2, and T(x) = x on [1, 2).
        #[test]
        fn monotone_growth(a in 2u64..100_000, m in 2u64..500) {
            prop_assume!(a % m != 0);
            prop_assume!(a >= 2 * m);
            let x = rat(a, m);
            prop_assert!(t_step(&x).unwrap() > x);
        }

        #[test]
        fn fixed_interval(m in 2u64..1000, off in 1u64..1000) {
            let a = m + off % m; // a/m in [1, 2)
            let x = rat(a, m);
            prop_assert_eq!(t_step(&x).unwrap(), x);
        }

        // In reduced form the image numerator is below 2a.
        #[test]
        fn numerator_bound(a in 4u64..1_000_000, m in 2u64..1000) {
            prop_assume!(a >= m);
            let x = rat(a, m);
            let y = t_step(&x).unwrap();
            prop_assert!(*y.num() < BigUint::from(2 * a));
        }

        // Reduced denominator of T(a/M) is M / gcd(floor(a/M), M).
        #[test]
        fn denominator_descent(a in 4u64..20_000, m in 2u64..200) {
            prop_assume!(crate::arith::gcd(a, m) == 1);
            prop_assume!(a > m);
            let y = t_step(&rat(a, m)).unwrap();
            let expected = m / crate::arith::gcd(a / m, m);
            prop_assert_eq!(y.den(), &BigUint::from(expected));
        }
    }
}

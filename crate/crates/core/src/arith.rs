//! Integer utilities and exact reduced fractions.
//!
//! Moduli and residues in this crate are small enough for `u64`; numerators
//! along orbits are not, so fractions carry arbitrary-precision parts.

use crate::{Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Greatest common divisor with the convention `gcd(0, b) = b`.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Trial-division primality test. Every modulus in this crate is small,
/// so nothing fancier is warranted.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization `n = Π p_i^{e_i}` with ascending `p_i`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut factors = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0u32;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factors.push((n, 1));
    }
    factors
}

/// Euler's totient `φ(m)`, via factorization.
pub fn totient(m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::ZeroOperand("totient"));
    }
    let mut phi = m;
    for (p, _) in factorize(m) {
        phi = phi / p * (p - 1);
    }
    Ok(phi)
}

/// All positive divisors of `m`, ascending.
pub fn divisors(m: u64) -> Result<Vec<u64>> {
    if m == 0 {
        return Err(Error::ZeroOperand("divisor enumeration"));
    }
    let mut divs = vec![1u64];
    for (p, e) in factorize(m) {
        let prev = divs.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            divs.extend(prev.iter().map(|d| d * pk));
        }
    }
    divs.sort_unstable();
    Ok(divs)
}

/// `p`-adic valuation: the largest `e` with `p^e | m`.
///
/// `m = 0` is rejected (the valuation would be infinite), as is `p < 2`
/// (division by `p` would never terminate).
pub fn valuation(p: u64, m: &BigUint) -> Result<u64> {
    if p < 2 {
        return Err(Error::BadValuationBase(p));
    }
    if m.is_zero() {
        return Err(Error::ZeroOperand("valuation"));
    }
    let p = BigUint::from(p);
    let mut e = 0u64;
    let mut cur = m.clone();
    loop {
        let (q, r) = cur.div_rem(&p);
        if !r.is_zero() {
            return Ok(e);
        }
        e += 1;
        cur = q;
    }
}

/// `base^exp` for big bases with a 64-bit exponent.
pub fn big_pow(base: &BigUint, exp: u64) -> BigUint {
    Pow::pow(base, exp)
}

/// `m^exp` as a big integer.
pub fn u64_pow(m: u64, exp: u64) -> BigUint {
    big_pow(&BigUint::from(m), exp)
}

/// A non-negative rational in lowest terms. The denominator is always at
/// least 1 and `gcd(num, den) = 1`; both are enforced at construction, so
/// everything downstream may assume reduced form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rat {
    num: BigUint,
    den: BigUint,
}

impl Rat {
    /// Reduced fraction `num/den`. Rejects a zero denominator.
    pub fn new(num: BigUint, den: BigUint) -> Result<Rat> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let g = num.gcd(&den);
        let rat = Rat {
            num: &num / &g,
            den: &den / &g,
        };
        debug_assert!(rat.num.gcd(&rat.den).is_one());
        debug_assert!(!rat.den.is_zero());
        Ok(rat)
    }

    /// Construct from parts already known to be coprime.
    pub(crate) fn from_reduced(num: BigUint, den: BigUint) -> Rat {
        debug_assert!(!den.is_zero());
        debug_assert!(num.gcd(&den).is_one());
        Rat { num, den }
    }

    pub fn from_integer(n: BigUint) -> Rat {
        Rat {
            num: n,
            den: BigUint::one(),
        }
    }

    pub fn from_u64(num: u64, den: u64) -> Result<Rat> {
        Rat::new(BigUint::from(num), BigUint::from(den))
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn den(&self) -> &BigUint {
        &self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    /// Quotient and remainder of the numerator by the denominator, i.e.
    /// `self = q + r/den` with `0 <= r < den`.
    pub fn floor_rem(&self) -> (BigUint, BigUint) {
        self.num.div_rem(&self.den)
    }

    /// True iff `self >= n`.
    pub fn at_least(&self, n: u64) -> bool {
        self.num >= &self.den * n
    }

    pub fn add(&self, other: &Rat) -> Rat {
        let num = &self.num * &other.den + &other.num * &self.den;
        let den = &self.den * &other.den;
        Rat::new(num, den).expect("nonzero denominators")
    }

    pub fn mul(&self, other: &Rat) -> Rat {
        let num = &self.num * &other.num;
        let den = &self.den * &other.den;
        Rat::new(num, den).expect("nonzero denominators")
    }

    /// `|self - other|` exactly.
    pub fn abs_diff(&self, other: &Rat) -> Rat {
        let left = &self.num * &other.den;
        let right = &other.num * &self.den;
        let num = if left >= right {
            left - right
        } else {
            right - left
        };
        Rat::new(num, &self.den * &other.den).expect("nonzero denominators")
    }

    /// Decimal approximation with `sig` significant digits, computed by
    /// exact long division; used only for display.
    pub fn to_decimal(&self, sig: u32) -> String {
        let sig = sig.max(1) as i64;
        if self.num.is_zero() {
            return "0".to_string();
        }
        let ten = BigUint::from(10u32);
        // First guess for the count of digits left of the point; refined below.
        let mut exp = self.num.to_string().len() as i64 - self.den.to_string().len() as i64;
        loop {
            let shift = sig - exp;
            let (scaled_num, scaled_den) = if shift >= 0 {
                (&self.num * big_pow(&ten, shift as u64), self.den.clone())
            } else {
                (self.num.clone(), &self.den * big_pow(&ten, (-shift) as u64))
            };
            let (q, r) = scaled_num.div_rem(&scaled_den);
            let rounded = if &r * 2u32 >= scaled_den {
                q + BigUint::one()
            } else {
                q
            };
            let digits = rounded.to_string();
            if digits.len() as i64 != sig {
                exp += digits.len() as i64 - sig;
                continue;
            }
            return format_digits(&digits, exp);
        }
    }
}

fn format_digits(digits: &str, exp: i64) -> String {
    let n = digits.len() as i64;
    if exp > 0 && exp <= n {
        if exp == n {
            digits.to_string()
        } else {
            format!("{}.{}", &digits[..exp as usize], &digits[exp as usize..])
        }
    } else if exp > n && exp <= n + 6 {
        format!("{}{}", digits, "0".repeat((exp - n) as usize))
    } else if exp <= 0 && exp > -6 {
        format!("0.{}{}", "0".repeat((-exp) as usize), digits)
    } else {
        format!("{}.{}e{}", &digits[..1], &digits[1..], exp - 1)
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

// JSON shape: {"num": "...", "den": "...", "display": "..."} with decimal
// strings so that 64-bit JSON consumers never overflow. `display` is a
// 12-significant-digit rendering and is ignored when reading back.
impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rat", 3)?;
        st.serialize_field("num", &self.num.to_string())?;
        st.serialize_field("den", &self.den.to_string())?;
        st.serialize_field("display", &self.to_decimal(12))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        struct RatVisitor;

        impl<'de> Visitor<'de> for RatVisitor {
            type Value = Rat;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map with decimal-string fields `num` and `den`")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<Rat, A::Error> {
                let mut num: Option<String> = None;
                let mut den: Option<String> = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "num" => num = Some(map.next_value()?),
                        "den" => den = Some(map.next_value()?),
                        _ => {
                            let _: de::IgnoredAny = map.next_value()?;
                        }
                    }
                }
                let num = num.ok_or_else(|| de::Error::missing_field("num"))?;
                let den = den.ok_or_else(|| de::Error::missing_field("den"))?;
                let num = BigUint::from_str(&num).map_err(de::Error::custom)?;
                let den = BigUint::from_str(&den).map_err(de::Error::custom)?;
                Rat::new(num, den).map_err(de::Error::custom)
            }
        }

        d.deserialize_struct("Rat", &["num", "den", "display"], RatVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn gcd_conventions() {
        assert_eq!(gcd(0, 6), 6);
        assert_eq!(gcd(8, 6), 2);
        assert_eq!(gcd(7, 3), 1);
        assert_eq!(gcd(0, 0), 0);
    }

    #[test]
    fn totient_small_values() {
        assert_eq!(totient(1).unwrap(), 1);
        assert_eq!(totient(12).unwrap(), 4);
        assert_eq!(totient(9).unwrap(), 6);
        assert!(matches!(totient(0), Err(Error::ZeroOperand(_))));
    }

    #[test]
    fn divisors_ascending() {
        assert_eq!(divisors(1).unwrap(), vec![1]);
        assert_eq!(divisors(6).unwrap(), vec![1, 2, 3, 6]);
        assert_eq!(divisors(8).unwrap(), vec![1, 2, 4, 8]);
        assert!(divisors(0).is_err());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(2, &big(6)).unwrap(), 1);
        assert_eq!(valuation(2, &big(8)).unwrap(), 3);
        assert_eq!(valuation(3, &big(10)).unwrap(), 0);
        assert!(valuation(2, &BigUint::zero()).is_err());
        assert!(matches!(valuation(1, &big(5)), Err(Error::BadValuationBase(1))));
    }

    #[test]
    fn rat_reduces_on_construction() {
        let r = Rat::from_u64(14, 6).unwrap();
        assert_eq!((r.num().to_string(), r.den().to_string()), ("7".into(), "3".into()));
        let r = Rat::from_u64(4, 1).unwrap();
        assert!(r.is_integer());
        let r = Rat::from_u64(0, 5).unwrap();
        assert_eq!(r, Rat::from_integer(BigUint::zero()));
        assert!(matches!(Rat::from_u64(3, 0), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn rat_ordering_and_arith() {
        let a = Rat::from_u64(7, 3).unwrap();
        let b = Rat::from_u64(8, 3).unwrap();
        assert!(a < b);
        assert_eq!(a.add(&b), Rat::from_u64(5, 1).unwrap());
        assert_eq!(a.mul(&b), Rat::from_u64(56, 9).unwrap());
        assert_eq!(a.abs_diff(&b), Rat::from_u64(1, 3).unwrap());
        assert_eq!(b.abs_diff(&a), Rat::from_u64(1, 3).unwrap());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rat::from_u64(1, 8).unwrap().to_decimal(12), "0.125000000000");
        assert_eq!(Rat::from_u64(1, 1).unwrap().to_decimal(12), "1.00000000000");
        assert_eq!(Rat::from_u64(2, 3).unwrap().to_decimal(6), "0.666667");
        assert_eq!(Rat::from_u64(999996, 1).unwrap().to_decimal(5), "1000000");
        assert_eq!(Rat::from_u64(0, 7).unwrap().to_decimal(12), "0");
        assert_eq!(Rat::from_u64(1, 10_000_000).unwrap().to_decimal(3), "1.00e-7");
    }

    #[test]
    fn totient_divisor_sum_identity() {
        // Σ_{d|M} φ(d) = M
        for m in 1..=10_000u64 {
            let sum: u64 = divisors(m).unwrap().iter().map(|&d| totient(d).unwrap()).sum();
            assert_eq!(sum, m, "divisor-sum identity fails at {m}");
        }
    }

    proptest! {
        #[test]
        fn totient_multiplicative(a in 1u64..=1_000_000, b in 1u64..=1_000_000) {
            prop_assume!(gcd(a, b) == 1);
            prop_assert_eq!(totient(a * b).unwrap(), totient(a).unwrap() * totient(b).unwrap());
        }

        #[test]
        fn valuation_recovers_exponent(p in prop::sample::select(vec![2u64, 3, 5, 7, 11]),
                                       e in 0u64..12,
                                       u in 1u64..10_000) {
            prop_assume!(u % p != 0);
            let m = u64_pow(p, e) * big(u);
            prop_assert_eq!(valuation(p, &m).unwrap(), e);
        }

        #[test]
        fn rat_always_reduced(num in 0u64..1_000_000, den in 1u64..1_000_000) {
            let r = Rat::from_u64(num, den).unwrap();
            prop_assert_eq!(r.num().gcd(r.den()), BigUint::one());
            prop_assert!(!r.den().is_zero());
        }

        #[test]
        fn rat_json_roundtrip(num in 0u64..1_000_000, den in 1u64..1_000_000) {
            let r = Rat::from_u64(num, den).unwrap();
            let text = serde_json::to_string(&r).unwrap();
            let back: Rat = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}

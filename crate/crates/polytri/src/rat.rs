//! Exact rational scalars and their text renderings.
//!
//! Everything in this crate computes over arbitrary-precision rationals;
//! floating point never enters any geometric predicate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// `n` as an exact rational.
pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"` (arbitrary precision). Returns `None` on malformed
/// input or a zero denominator.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(n))
        }
    }
}

/// Renders as `"p/q"`, or `"p"` for integers. Inverse of [`parse_rat`].
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact decimal rendering with `sig` significant digits, round half to even.
/// Used only at the final write of plotting output.
pub fn format_decimal(r: &Rat, sig: usize) -> String {
    assert!(sig > 0);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Decimal exponent e: largest e with 10^e <= a.
    let ten = BigInt::from(10);
    let mut e: i64 = 0;
    {
        let int_part = a.numer() / a.denom();
        if !int_part.is_zero() {
            e = int_part.to_string().len() as i64 - 1;
        } else {
            let mut scaled = a.clone();
            loop {
                scaled *= BigRational::from_integer(ten.clone());
                e -= 1;
                if scaled.numer() / scaled.denom() >= BigInt::one() {
                    break;
                }
            }
        }
    }
    let k = sig as i64 - 1 - e;
    // m = round_half_even(a * 10^k)
    let scaled = if k >= 0 {
        a * BigRational::from_integer(ten.pow(k as u32))
    } else {
        a / BigRational::from_integer(ten.pow((-k) as u32))
    };
    let m = round_half_even(&scaled);
    let digits = m.to_string();
    let mut out = if k <= 0 {
        let mut s = digits;
        s.push_str(&"0".repeat((-k) as usize));
        s
    } else {
        let k = k as usize;
        if digits.len() > k {
            let (int, frac) = digits.split_at(digits.len() - k);
            format!("{int}.{frac}")
        } else {
            format!("0.{}{}", "0".repeat(k - digits.len()), digits)
        }
    };
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    if neg {
        format!("-{out}")
    } else {
        out
    }
}

fn round_half_even(r: &Rat) -> BigInt {
    let (n, d) = (r.numer(), r.denom());
    let t = n / d;
    let rem = n - &t * d;
    let twice = &rem * BigInt::from(2);
    match twice.cmp(d) {
        std::cmp::Ordering::Less => t,
        std::cmp::Ordering::Greater => t + 1,
        std::cmp::Ordering::Equal => {
            if (&t % BigInt::from(2)).is_zero() {
                t
            } else {
                t + 1
            }
        }
    }
}

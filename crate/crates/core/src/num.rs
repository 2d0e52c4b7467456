//! Exact rational scalars and the mixed rational/real value type used in reports.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Exact arbitrary-precision rational, the scalar type of every exact path.
pub type Rat = num_rational::BigRational;

/// Shorthand for small rational literals.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for integer rationals.
pub fn rint(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Shapley weight `k!(t-k)!/(t+1)!` for a coalition of size `k` among `t`
/// non-explained features.
pub fn shapley_weight(k: usize, t: usize) -> Rat {
    Rat::new(factorial(k) * factorial(t - k), factorial(t + 1))
}

/// A score that is exact where the model class allows it and a float where
/// it does not (logistic models).
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Rational(Rat),
    Real(f64),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match self {
            Value::Rational(r) => rat_to_f64(r),
            Value::Real(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match self {
            Value::Rational(r) => Some(r),
            Value::Real(_) => None,
        }
    }
}

impl From<Rat> for Value {
    fn from(r: Rat) -> Self {
        Value::Rational(r)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(r) => write!(f, "{}", r),
            Value::Real(x) => write!(f, "{}", x),
        }
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out-of-range numerator or denominator; fall back on a scaled quotient.
        let scaled = r * Rat::from_integer(BigInt::from(1u64 << 60));
        scaled.to_f64().map(|x| x / (1u64 << 60) as f64).unwrap_or(f64::NAN)
    })
}

/// Render a rational as a decimal string with `digits` fractional digits,
/// rounding half away from zero. Presentation only; exact values travel as
/// numerator/denominator pairs.
pub fn decimal_string(r: &Rat, digits: usize) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let abs = r.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    // round(|r| * 10^digits)
    let scaled = (abs * Rat::from_integer(scale.clone()) + rat(1, 2)).floor();
    let scaled = scaled.to_integer();
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    if digits == 0 {
        format!("{}{}", sign, int_part)
    } else {
        format!("{}{}.{:0>width$}", sign, int_part, frac_part.to_string(), width = digits)
    }
}

/// Parse a rational from `a/b`, a decimal like `0.25` or `1e-9`, or an integer.
pub fn parse_rational(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some(pos) = s.find(['e', 'E']) {
        let mantissa = parse_rational(&s[..pos])?;
        let exp: i32 = s[pos + 1..].parse().ok()?;
        let scale = Rat::from_integer(BigInt::from(10u32).pow(exp.unsigned_abs()));
        return Some(if exp >= 0 { mantissa * scale } else { mantissa / scale });
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().ok()? };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_num: BigInt = frac.parse().ok()?;
        let abs = Rat::new(int.abs() * &scale + frac_num, scale);
        return Some(if negative { -abs } else { abs });
    }
    let int: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(int))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/10").unwrap(), rat(3, 10));
        assert_eq!(parse_rational("0.3").unwrap(), rat(3, 10));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("7").unwrap(), rint(7));
        assert_eq!(parse_rational("-2/4").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&rat(1, 3), 6), "0.333333");
        assert_eq!(decimal_string(&rat(-1, 2), 3), "-0.500");
        assert_eq!(decimal_string(&rat(2, 3), 2), "0.67");
        assert_eq!(decimal_string(&rint(5), 0), "5");
        assert_eq!(decimal_string(&rat(1, 200), 2), "0.01");
    }

    #[test]
    fn shapley_weights_sum_to_one_over_subsets() {
        // sum_k C(t,k) * w(k,t) = t+1 choices of insertion position... equals 1
        for t in 0..6usize {
            let total: Rat = (0..=t).map(|k| shapley_weight(k, t) * Rat::from_integer(binomial(t, k))).sum();
            assert_eq!(total, rint(1) * rat(1, (t + 1) as i64) * rint((t + 1) as i64));
        }
    }

    #[test]
    fn binomial_table() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(5, 6), BigInt::zero());
        assert_eq!(binomial(0, 0), BigInt::one());
    }
}

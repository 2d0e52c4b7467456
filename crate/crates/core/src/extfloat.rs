//! Double-double arithmetic (~106-bit significand) with conservative error
//! tracking.
//!
//! The gadget constructions compare transcendental sums against thresholds
//! whose gaps are ~2^-(n+3); plain f64 would pass here, but the contract is
//! that every such comparison carries an explicit interval and refuses to
//! answer when the interval straddles the boundary. `Dd` supplies the extra
//! precision, `Audited` the interval.

use crate::num::{rat_to_f64, Rat};
use num_traits::ToPrimitive;

/// Unevaluated sum of two doubles, |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn from_i64(x: i64) -> Dd {
        // i64 may exceed 2^53; split into two exactly representable halves.
        let hi = (x >> 27) as f64 * (1u64 << 27) as f64;
        let lo = (x & ((1 << 27) - 1)) as f64;
        Dd::add(Dd::from_f64(hi), Dd::from_f64(lo))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn add(a: Dd, b: Dd) -> Dd {
        let (s1, s2) = two_sum(a.hi, b.hi);
        let (t1, t2) = two_sum(a.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    pub fn sub(a: Dd, b: Dd) -> Dd {
        Dd::add(a, b.neg())
    }

    pub fn mul(a: Dd, b: Dd) -> Dd {
        let (p1, p2) = two_prod(a.hi, b.hi);
        let p2 = p2 + a.hi * b.lo + a.lo * b.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn div(a: Dd, b: Dd) -> Dd {
        let q1 = a.hi / b.hi;
        let r = Dd::sub(a, Dd::mul(Dd::from_f64(q1), b));
        let q2 = r.hi / b.hi;
        let r = Dd::sub(r, Dd::mul(Dd::from_f64(q2), b));
        let q3 = r.hi / b.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    pub fn scale_pow2(self, k: i32) -> Dd {
        // Exact as long as nothing over/underflows; underflow loss is covered
        // by the caller's error bound.
        let f = pow2(k);
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    /// exp with ~1e-30 relative accuracy; underflows to 0, saturates to
    /// infinity past the f64 range.
    pub fn exp(self) -> Dd {
        if self.hi > 709.7 {
            return Dd { hi: f64::INFINITY, lo: 0.0 };
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = Dd::sub(self, Dd::mul(Dd::from_f64(k), LN2));
        // Taylor sum of e^r for |r| <= ln2/2; terms decay below 2^-120 well
        // before the iteration cap.
        let mut sum = Dd::ONE;
        let mut term = Dd::ONE;
        for i in 1..=26 {
            term = Dd::mul(term, r);
            term = Dd::div(term, Dd::from_f64(i as f64));
            sum = Dd::add(sum, term);
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        sum.scale_pow2(k as i32)
    }

    /// Logistic function 1/(1+e^-x), evaluated on the non-overflowing branch.
    pub fn sigmoid(self) -> Dd {
        if self.hi >= 0.0 {
            let e = self.neg().exp();
            Dd::div(Dd::ONE, Dd::add(Dd::ONE, e))
        } else {
            let e = self.exp();
            Dd::div(e, Dd::add(Dd::ONE, e))
        }
    }

    /// Closest double-double to a rational, with the conversion error bound.
    pub fn from_rat(r: &Rat) -> (Dd, f64) {
        let hi = rat_to_f64(r);
        if !hi.is_finite() {
            return (Dd::from_f64(hi), 0.0);
        }
        let rem = r - Rat::from_float(hi).expect("finite");
        let lo = rem.to_f64().unwrap_or(0.0);
        let rem2 = rem - Rat::from_float(lo).expect("finite");
        let err = rem2.to_f64().map(f64::abs).unwrap_or(0.0) + 1e-300;
        (Dd { hi, lo }, err)
    }
}

/// ln(1+t) by alternating series; requires |t| <= 1/2.
pub fn dd_ln1p_small(t: Dd) -> Dd {
    assert!(t.hi.abs() <= 0.5 + 1e-12, "series form needs |t| <= 1/2");
    let mut power = t;
    let mut sum = t;
    for k in 2..=140 {
        power = Dd::mul(power, t);
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let term = Dd::div(power, Dd::from_f64(sign * k as f64));
        sum = Dd::add(sum, term);
        if power.hi.abs() < 1e-35 {
            break;
        }
    }
    sum
}

fn pow2(k: i32) -> f64 {
    if (-1022..=1023).contains(&k) {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        2f64.powi(k)
    }
}

/// Relative rounding slack of one double-double operation on a result of
/// magnitude |x|, padded with a tiny absolute floor for denormal results.
fn dd_eps(x: Dd) -> f64 {
    x.hi.abs() * 1e-31 + 1e-300
}

/// A double-double value together with a conservative bound on its distance
/// from the exact real it approximates.
#[derive(Debug, Clone, Copy)]
pub struct Audited {
    pub val: Dd,
    pub err: f64,
}

impl Audited {
    pub fn exact(val: Dd) -> Audited {
        Audited { val, err: 0.0 }
    }

    pub fn from_rat(r: &Rat) -> Audited {
        let (val, err) = Dd::from_rat(r);
        Audited { val, err }
    }

    pub fn add(a: Audited, b: Audited) -> Audited {
        let val = Dd::add(a.val, b.val);
        Audited { val, err: a.err + b.err + dd_eps(val) }
    }

    pub fn sub(a: Audited, b: Audited) -> Audited {
        Audited::add(a, Audited { val: b.val.neg(), err: b.err })
    }

    pub fn mul(a: Audited, b: Audited) -> Audited {
        let val = Dd::mul(a.val, b.val);
        let err = a.err * b.val.to_f64().abs() + b.err * a.val.to_f64().abs() + a.err * b.err + dd_eps(val);
        Audited { val, err }
    }

    pub fn div(a: Audited, b: Audited) -> Audited {
        let bm = b.val.to_f64().abs();
        assert!(b.err < bm / 2.0, "divisor interval contains values too close to zero");
        let val = Dd::div(a.val, b.val);
        let err = (a.err + val.to_f64().abs() * b.err) / (bm - b.err) + dd_eps(val);
        Audited { val, err }
    }

    /// sigma(x) with first-order error propagation (|sigma'| <= 1/4) plus the
    /// evaluation error of the double-double sigmoid itself.
    pub fn sigmoid(self) -> Audited {
        let val = self.val.sigmoid();
        let err = self.err / 4.0 + val.to_f64().abs() * 1e-29 + 1e-300;
        Audited { val, err }
    }

    pub fn lower(&self) -> f64 {
        self.val.to_f64() - self.err
    }

    pub fn upper(&self) -> f64 {
        self.val.to_f64() + self.err
    }

    /// Strictly-above / strictly-below comparison against an exact rational
    /// threshold; `None` when the interval straddles it.
    pub fn compare_threshold(&self, threshold: &Rat) -> Option<std::cmp::Ordering> {
        let t = Audited::from_rat(threshold);
        let lo = self.lower() - (t.err + t.val.lo.abs() * 0.0);
        let hi = self.upper() + t.err;
        let tv = t.val.to_f64();
        if lo - tv > t.val.lo.abs() + f64::EPSILON * tv.abs() {
            Some(std::cmp::Ordering::Greater)
        } else if tv - hi > t.val.lo.abs() + f64::EPSILON * tv.abs() {
            Some(std::cmp::Ordering::Less)
        } else {
            // Fall back on exact interval endpoints before giving up.
            let lo_rat = Rat::from_float(self.lower())?;
            let hi_rat = Rat::from_float(self.upper())?;
            if lo_rat > *threshold {
                Some(std::cmp::Ordering::Greater)
            } else if hi_rat < *threshold {
                Some(std::cmp::Ordering::Less)
            } else {
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::parse_rational;
    use num_traits::Signed;

    fn dd_to_rat(x: Dd) -> Rat {
        Rat::from_float(x.hi).unwrap() + Rat::from_float(x.lo).unwrap()
    }

    fn assert_close(got: Dd, want_decimal: &str, tol: &str) {
        let want = parse_rational(want_decimal).unwrap();
        let tol = parse_rational(tol).unwrap();
        let diff = (dd_to_rat(got) - want).abs();
        assert!(diff < tol, "got {:?}, diff {}", got, crate::num::rat_to_f64(&diff));
    }

    #[test]
    fn ln2_constant_is_consistent() {
        // exp(ln2) must give 2 to double-double accuracy.
        assert_close(LN2.exp(), "2", "1e-29");
    }

    #[test]
    fn exp_reference_values() {
        // Reference digits from a 50-digit evaluation.
        assert_close(Dd::ONE.exp(), "2.7182818284590452353602874713526624977572470937", "1e-29");
        assert_close(Dd::from_f64(0.5).exp(), "1.6487212707001281468486507878141635716537761007", "1e-29");
        assert_close(Dd::from_f64(-3.0).exp(), "0.049787068367863942979342415650061776631699592188", "1e-30");
        assert_close(
            Dd::from_f64(10.0).exp(),
            "22026.465794806716516957900645284244366353512618556",
            "1e-25",
        );
    }

    #[test]
    fn sigmoid_reference_values() {
        assert_close(Dd::ZERO.sigmoid(), "0.5", "1e-30");
        assert_close(Dd::from_f64(1.0).sigmoid(), "0.731058578630004879251159241821836274365144640165", "1e-29");
        assert_close(Dd::from_f64(-7.5).sigmoid(), "0.00055277863692359951607895859756054642356661087801", "1e-31");
        // Deep underflow saturates cleanly.
        assert_eq!(Dd::from_f64(-100000.0).sigmoid(), Dd::ZERO);
        assert_eq!(Dd::from_f64(100000.0).sigmoid(), Dd::ONE);
    }

    #[test]
    fn ln1p_series() {
        assert_close(dd_ln1p_small(Dd::from_f64(0.5)), "0.405465108108164381978013115464349136572", "1e-30");
        assert_close(dd_ln1p_small(Dd::from_f64(-0.25)), "-0.2876820724517809274392190059938274315035", "1e-30");
        assert_eq!(dd_ln1p_small(Dd::ZERO), Dd::ZERO);
    }

    #[test]
    fn arithmetic_identities() {
        let a = Dd::div(Dd::ONE, Dd::from_f64(3.0));
        let three_a = Dd::add(Dd::add(a, a), a);
        assert_close(three_a, "1", "1e-31");
        let b = Dd::mul(a, Dd::from_f64(3.0));
        assert_close(b, "1", "1e-31");
        assert_eq!(Dd::from_i64((1 << 60) + 12345).to_f64(), ((1u64 << 60) + 12345) as f64);
    }

    #[test]
    fn audit_intervals_contain_truth() {
        let third = Audited::from_rat(&crate::num::rat(1, 3));
        let mut sum = Audited::exact(Dd::ZERO);
        for _ in 0..3000 {
            sum = Audited::add(sum, third);
        }
        let truth = 1000.0;
        assert!(sum.lower() <= truth && truth <= sum.upper());
        assert!(sum.err < 1e-24);
    }

    #[test]
    fn threshold_comparison() {
        let x = Audited { val: Dd::from_f64(0.5000001), err: 1e-12 };
        let half = crate::num::rat(1, 2);
        assert_eq!(x.compare_threshold(&half), Some(std::cmp::Ordering::Greater));
        let y = Audited { val: Dd::from_f64(0.5), err: 1e-3 };
        assert_eq!(y.compare_threshold(&half), None);
    }
}

//! Brute-force SHAP oracles: the permutation-average definition and the
//! cardinality-grouped subset form. They use different formulas on purpose;
//! their agreement is itself one of the checked properties.

use crate::error::{Error, Result};
use crate::num::{rat_to_f64, shapley_weight, Rat};
use itertools::Itertools;
use num_traits::Zero;

/// Minimal scalar abstraction so the same enumeration serves exact rational
/// models and real-valued (logistic / naive-Bayes) paths.
pub trait ShapScalar: Clone {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn from_rat(r: &Rat) -> Self;
}

impl ShapScalar for Rat {
    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
}

impl ShapScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }
}

fn memoized<S: ShapScalar>(
    cache: &mut [Option<S>],
    mask: u64,
    v: &mut dyn FnMut(u64) -> Result<S>,
) -> Result<S> {
    if let Some(x) = &cache[mask as usize] {
        return Ok(x.clone());
    }
    let x = v(mask)?;
    cache[mask as usize] = Some(x.clone());
    Ok(x)
}

/// Average of the feature's marginal contribution over all n! arrival orders.
pub fn shap_brute_permutation<S: ShapScalar>(
    n: usize,
    feature: usize,
    cap: usize,
    v: &mut dyn FnMut(u64) -> Result<S>,
) -> Result<S> {
    assert!(feature < n);
    if n > cap {
        return Err(Error::CapacityExceeded { what: "permutation brute force".into(), n, cap });
    }
    let mut cache: Vec<Option<S>> = vec![None; 1 << n];
    let mut acc = S::zero();
    for perm in (0..n).permutations(n) {
        let mut mask = 0u64;
        for &f in &perm {
            if f == feature {
                let with = memoized(&mut cache, mask | (1 << f), v)?;
                let without = memoized(&mut cache, mask, v)?;
                acc = acc.add(&with.sub(&without));
                break;
            }
            mask |= 1 << f;
        }
    }
    let inv_fact = Rat::new(1.into(), crate::num::factorial(n));
    Ok(acc.mul(&S::from_rat(&inv_fact)))
}

/// Same score through the subset form: sum over coalitions S of
/// |S|!(n-1-|S|)!/n! times the feature's contribution to S.
pub fn shap_brute_subset<S: ShapScalar>(
    n: usize,
    feature: usize,
    cap: usize,
    v: &mut dyn FnMut(u64) -> Result<S>,
) -> Result<S> {
    assert!(feature < n);
    if n > cap {
        return Err(Error::CapacityExceeded { what: "subset brute force".into(), n, cap });
    }
    let others: Vec<usize> = (0..n).filter(|&i| i != feature).collect();
    let t = others.len();
    let mut acc = S::zero();
    for bits in 0u64..(1u64 << t) {
        let mut mask = 0u64;
        for (j, &f) in others.iter().enumerate() {
            if bits >> j & 1 == 1 {
                mask |= 1 << f;
            }
        }
        let k = mask.count_ones() as usize;
        let with = v(mask | (1 << feature))?;
        let without = v(mask)?;
        let w = S::from_rat(&shapley_weight(k, t));
        acc = acc.add(&w.mul(&with.sub(&without)));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, rint};

    /// v for F = X_0 XOR X_1 under the uniform distribution at instance (1,1).
    fn xor_value(mask: u64) -> Result<Rat> {
        Ok(match mask & 3 {
            0b00 => rat(1, 2), // E[xor]
            0b01 => rat(1, 2), // E[xor | x0=1]
            0b10 => rat(1, 2), // E[xor | x1=1]
            _ => rint(0),      // xor(1,1)
        })
    }

    #[test]
    fn xor_scores_minus_quarter() {
        let s = shap_brute_permutation(2, 0, 8, &mut xor_value).unwrap();
        assert_eq!(s, rat(-1, 4));
        let s2 = shap_brute_subset(2, 0, 20, &mut xor_value).unwrap();
        assert_eq!(s2, rat(-1, 4));
    }

    #[test]
    fn constant_scores_zero() {
        let mut v = |_mask: u64| Ok(rat(7, 3));
        assert_eq!(shap_brute_permutation(3, 1, 8, &mut v).unwrap(), rint(0));
        assert_eq!(shap_brute_subset(3, 1, 20, &mut v).unwrap(), rint(0));
    }

    #[test]
    fn caps_enforced() {
        let mut v = |_mask: u64| Ok(rint(0));
        assert!(shap_brute_permutation(9, 0, 8, &mut v).is_err());
        assert!(shap_brute_subset(21, 0, 20, &mut v).is_err());
    }
}

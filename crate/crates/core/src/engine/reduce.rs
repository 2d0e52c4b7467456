//! The expectation-oracle reduction: n+1 shifted-distribution probes per
//! restricted function, one exact interpolation, and the cardinality-weighted
//! recombination.

use super::CountingOracle;
use crate::error::{Error, Result};
use crate::linalg::{newton_interpolate, poly_eval};
use crate::num::{rint, shapley_weight, Rat};
use num_traits::{One, Zero};

/// The cardinality sums v_k = sum_{|S|=k} E[G | e_S], k = 0..t.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetValueVector {
    pub values: Vec<Rat>,
}

impl SubsetValueVector {
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }
}

fn shifted(probs: &[Rat], z: &Rat) -> Vec<Rat> {
    let one_plus = Rat::one() + z;
    probs.iter().map(|p| (p + z) / &one_plus).collect()
}

/// Recover v_0..v_t for a function with per-feature instance-value
/// probabilities `probs` (all strictly positive), given an oracle for its
/// expectation at arbitrary probabilities.
///
/// Probes at z = 1..=t+1 give (1+z)^t E_z[G] = sum_k v_k z^k; the probe
/// matrix is Vandermonde, solved here by Newton interpolation. A final probe
/// at z = t+2 must reproduce the oracle exactly or the call fails.
pub fn collect_vk(
    g: &mut dyn FnMut(&[Rat]) -> Result<Rat>,
    probs: &[Rat],
) -> Result<SubsetValueVector> {
    let t = probs.len();
    for (i, p) in probs.iter().enumerate() {
        if p.is_zero() {
            return Err(Error::ZeroInstanceProbability { feature: i });
        }
    }
    let zs: Vec<Rat> = (1..=t as i64 + 1).map(rint).collect();
    let mut rhs = Vec::with_capacity(t + 1);
    for z in &zs {
        let e = g(&shifted(probs, z))?;
        let scale = (Rat::one() + z).pow(t as i32);
        rhs.push(scale * e);
    }
    let values = newton_interpolate(&zs, &rhs);

    let fresh = rint(t as i64 + 2);
    let e = g(&shifted(probs, &fresh))?;
    let expected = (Rat::one() + &fresh).pow(t as i32) * e;
    if poly_eval(&values, &fresh) != expected {
        return Err(Error::InterpolationSelfCheck);
    }
    Ok(SubsetValueVector { values })
}

/// Exact SHAP score of one feature at the (implicit all-ones) instance, in
/// instance-indicator space: probs[i] = Pr(X_i = explained value).
///
/// Uses 2(t+2) oracle calls: t+2 per restriction of the explained feature.
pub fn shap_reduction_feature(
    oracle: &CountingOracle<'_>,
    probs: &[Rat],
    feature: usize,
) -> Result<Rat> {
    let n = probs.len();
    assert!(feature < n);
    let others: Vec<usize> = (0..n).filter(|&i| i != feature).collect();
    let other_probs: Vec<Rat> = others.iter().map(|&i| probs[i].clone()).collect();
    let t = others.len();

    let restricted = |pin: Rat| -> Result<SubsetValueVector> {
        let mut g = |shifted_others: &[Rat]| -> Result<Rat> {
            let mut full = vec![Rat::zero(); n];
            full[feature] = pin.clone();
            for (j, &i) in others.iter().enumerate() {
                full[i] = shifted_others[j].clone();
            }
            oracle.expectation(&full)
        };
        collect_vk(&mut g, &other_probs)
    };

    let v0 = restricted(Rat::zero())?;
    let v1 = restricted(Rat::one())?;

    let gap = Rat::one() - &probs[feature];
    let mut score = Rat::zero();
    for k in 0..=t {
        let d_k = &gap * (&v1.values[k] - &v0.values[k]);
        score += shapley_weight(k, t) * d_k;
    }
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ModelIndicatorOracle;
    use crate::model::{Instance, LinearModel, Model};
    use crate::num::{rat, rint};
    use crate::Caps;

    #[test]
    fn vk_endpoints_for_conjunction() {
        // G = X_1 and X_2 with p = (1/2, 1/2): v_0 = 1/4, v_1 = 1, v_2 = 1.
        let caps = Caps::default();
        let model = Model::Ddnnf(crate::model::conjunction_circuit(2, &[0, 1]));
        let instance = Instance::all_ones(2);
        let oracle = ModelIndicatorOracle::new(&model, &instance, &caps);
        let mut g = |probs: &[Rat]| oracle.expectation_at(probs);
        let vk = collect_vk(&mut g, &[rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(vk.values, vec![rat(1, 4), rint(1), rint(1)]);
    }

    #[test]
    fn zero_probability_rejected() {
        let mut g = |_: &[Rat]| Ok(rint(1));
        assert!(matches!(
            collect_vk(&mut g, &[rint(0)]),
            Err(Error::ZeroInstanceProbability { feature: 0 })
        ));
    }

    #[test]
    fn self_check_catches_a_lying_oracle() {
        // Not of the (1+z)^t-polynomial form: the self-check must trip.
        let mut calls = 0usize;
        let mut g = |_probs: &[Rat]| {
            calls += 1;
            Ok(rint(calls as i64 * calls as i64 * calls as i64))
        };
        let r = collect_vk(&mut g, &[rat(1, 2), rat(1, 2), rat(1, 2)]);
        assert!(matches!(r, Err(Error::InterpolationSelfCheck)));
    }

    #[test]
    fn single_feature_closed_form() {
        // F = X_0, p_0 = 3/10: score = 1 - p_0 = 7/10.
        let caps = Caps::default();
        let model = Model::Linear(LinearModel::binary(rint(0), vec![rint(1)]));
        let instance = Instance::all_ones(1);
        let oracle = ModelIndicatorOracle::new(&model, &instance, &caps);
        let counting = CountingOracle::new(&oracle);
        let s = shap_reduction_feature(&counting, &[rat(3, 10)], 0).unwrap();
        assert_eq!(s, rat(7, 10));
        assert_eq!(counting.count(), 4); // 2 * (t + 2) with t = 0
    }
}

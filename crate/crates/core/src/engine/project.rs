//! Projection of multi-valued features onto binary indicators of the
//! explained instance, and the oracle transfer that answers projected
//! expectation queries with a single multi-valued expectation call.

use super::BinaryExpectationOracle;
use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::model::{Instance, Model};
use crate::num::Rat;
use crate::Caps;
use num_traits::{One, Zero};

/// Shared state of one projected SHAP computation: the original model and
/// distribution, the explained instance, and which features survive the
/// deterministic-feature strip.
pub struct ProjectionContext<'a> {
    model: &'a Model,
    dist: &'a ProductDistribution,
    instance: &'a Instance,
    caps: &'a Caps,
    /// Features with Pr(X_i = x*_i) strictly inside (0,1).
    active: Vec<usize>,
    /// Pr(X_i = x*_i) for every original feature.
    p_star: Vec<Rat>,
}

impl<'a> ProjectionContext<'a> {
    pub fn new(model: &'a Model, dist: &'a ProductDistribution, instance: &'a Instance, caps: &'a Caps) -> Result<Self> {
        model.check_signature(dist)?;
        model.signature().validate_instance(instance)?;
        let sig = model.signature();
        let n = sig.feature_count();
        let mut p_star = Vec::with_capacity(n);
        let mut active = Vec::new();
        for i in 0..n {
            let p = dist.prob_of_value(i, instance.values[i], sig);
            if p.is_zero() {
                return Err(Error::ZeroInstanceProbability { feature: i });
            }
            if !p.is_one() {
                active.push(i);
            }
            p_star.push(p);
        }
        Ok(ProjectionContext { model, dist, instance, caps, active, p_star })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Indicator-space probabilities of the active features.
    pub fn active_probs(&self) -> Vec<Rat> {
        self.active.iter().map(|&i| self.p_star[i].clone()).collect()
    }

    /// The Appendix-style transfer: given indicator probabilities q over the
    /// active features, build per-feature constants w_i and the reweighted
    /// multi-valued distribution p', such that
    /// E_projected[F_projected] = Z * W * E_p'[F].
    ///
    /// Returns (w per active feature, Z, W, p'). q_i in {0,1} pins the
    /// feature, the limit of the general formula.
    pub fn transfer_parts(&self, q: &[Rat]) -> Result<(Vec<Rat>, Rat, Rat, ProductDistribution)> {
        assert_eq!(q.len(), self.active.len());
        let sig = self.model.signature();
        let mut rows: Vec<Vec<Rat>> = self.dist.probs().to_vec();
        let mut w_out = Vec::with_capacity(q.len());
        let mut z = Rat::one();
        let mut w_prod = Rat::one();
        for (a, qa) in self.active.iter().zip(q) {
            let i = *a;
            if qa < &Rat::zero() || qa > &Rat::one() {
                return Err(Error::InvalidDistribution("indicator probability outside [0,1]".into()));
            }
            let star = sig
                .value_index(i, self.instance.values[i])
                .expect("instance validated at construction");
            let p_star = &self.p_star[i];
            let rest = Rat::one() - p_star; // sum of the non-instance values, > 0 for active features
            let row = &mut rows[i];
            if qa.is_one() {
                for (j, p) in row.iter_mut().enumerate() {
                    *p = if j == star { Rat::one() } else { Rat::zero() };
                }
                w_out.push(Rat::zero());
                // phi_i = q_i * W_i = 1 exactly in this limit
            } else if qa.is_zero() {
                for (j, p) in row.iter_mut().enumerate() {
                    *p = if j == star { Rat::zero() } else { &*p / &rest };
                }
                w_out.push(Rat::zero()); // w_i diverges; recorded as unused
            } else {
                let w = (Rat::one() - qa) / qa;
                let mut w_i = Rat::one();
                for (j, p) in row.iter().enumerate() {
                    if j != star {
                        w_i += p * &w / &rest;
                    }
                }
                for (j, p) in row.iter_mut().enumerate() {
                    *p = if j == star { Rat::one() / &w_i } else { &*p * &w / (&w_i * &rest) };
                }
                z *= qa;
                w_prod *= &w_i;
                w_out.push(w);
            }
        }
        let dist = ProductDistribution::new(rows)?;
        Ok((w_out, z, w_prod, dist))
    }
}

impl BinaryExpectationOracle for ProjectionContext<'_> {
    fn expectation(&self, q: &[Rat]) -> Result<Rat> {
        let (_, z, w, dist) = self.transfer_parts(q)?;
        let e = self.model.expectation_rational(&dist, self.caps)?;
        Ok(z * w * e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearModel, Signature};
    use crate::num::{rat, rint};

    fn ternary_model() -> Model {
        // Linear over domains {1,2,3} x {0,1}.
        let sig = Signature::new(vec![3, 2]).unwrap();
        Model::Linear(LinearModel::new(rint(1), vec![rint(2), rint(-1)], sig).unwrap())
    }

    fn ternary_dist() -> ProductDistribution {
        ProductDistribution::new(vec![
            vec![rat(1, 2), rat(1, 3), rat(1, 6)],
            vec![rat(2, 5), rat(3, 5)],
        ])
        .unwrap()
    }

    #[test]
    fn identity_transfer_recovers_original_expectation() {
        let model = ternary_model();
        let dist = ternary_dist();
        let instance = Instance::new(vec![1, 1]);
        let caps = Caps::default();
        let ctx = ProjectionContext::new(&model, &dist, &instance, &caps).unwrap();
        // q = Pr_projected(X_i = 1) reproduces E[F].
        let e = ctx.expectation(&ctx.active_probs()).unwrap();
        assert_eq!(e, model.expectation_rational(&dist, &caps).unwrap());
    }

    #[test]
    fn pinned_transfer_matches_conditioning() {
        let model = ternary_model();
        let dist = ternary_dist();
        let instance = Instance::new(vec![1, 1]);
        let caps = Caps::default();
        let ctx = ProjectionContext::new(&model, &dist, &instance, &caps).unwrap();
        // q = (1, p_2): pin X_1 = 1.
        let e = ctx.expectation(&[rint(1), rat(3, 5)]).unwrap();
        let conditioned = dist.condition(0, 1).unwrap();
        assert_eq!(e, model.expectation_rational(&conditioned, &caps).unwrap());
        // q = (0, p_2): condition on X_1 != 1.
        let e0 = ctx.expectation(&[rint(0), rat(3, 5)]).unwrap();
        // E[F | X_1 != 1] = 1 + 2*E[X_1 | X_1!=1] - 1*E[X_2]
        // E[X_1 | X_1 != 1] = (2*(1/3) + 3*(1/6)) / (1/2)
        let want = rint(1) + rint(2) * (rint(2) * rat(1, 3) + rint(3) * rat(1, 6)) / rat(1, 2) - rat(3, 5);
        assert_eq!(e0, want);
    }

    #[test]
    fn zero_instance_probability_is_an_error() {
        let model = ternary_model();
        let dist = ProductDistribution::new(vec![
            vec![Rat::zero(), rat(1, 2), rat(1, 2)],
            vec![rat(2, 5), rat(3, 5)],
        ])
        .unwrap();
        let instance = Instance::new(vec![1, 1]);
        let caps = Caps::default();
        assert!(matches!(
            ProjectionContext::new(&model, &dist, &instance, &caps),
            Err(Error::ZeroInstanceProbability { feature: 0 })
        ));
    }
}

//! Linear regression models over numeric-coded discrete features.

use super::{Instance, Signature};
use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::num::Rat;
use num_traits::Zero;

#[derive(Debug, Clone)]
pub struct LinearModel {
    bias: Rat,
    weights: Vec<Rat>,
    signature: Signature,
}

impl LinearModel {
    pub fn new(bias: Rat, weights: Vec<Rat>, signature: Signature) -> Result<Self> {
        if weights.len() != signature.feature_count() {
            return Err(Error::InvalidModel(format!(
                "{} weights for {} features",
                weights.len(),
                signature.feature_count()
            )));
        }
        Ok(LinearModel { bias, weights, signature })
    }

    pub fn binary(bias: Rat, weights: Vec<Rat>) -> Self {
        let signature = Signature::binary(weights.len());
        LinearModel { bias, weights, signature }
    }

    /// A constant prediction over `n` features.
    pub fn constant(value: Rat, n: usize) -> Self {
        LinearModel::binary(value, vec![Rat::zero(); n])
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn bias(&self) -> &Rat {
        &self.bias
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn evaluate(&self, x: &Instance) -> Rat {
        let mut acc = self.bias.clone();
        for (w, &v) in self.weights.iter().zip(&x.values) {
            acc += w * Rat::from_integer(v.into());
        }
        acc
    }

    /// Mean imputation: E[F] = bias + sum_i w_i E[X_i].
    pub fn expectation(&self, dist: &ProductDistribution) -> Rat {
        let mut acc = self.bias.clone();
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * dist.feature_mean(i, &self.signature);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, rint};

    #[test]
    fn identity_weight_evaluates_to_first_coordinate() {
        let m = LinearModel::binary(Rat::zero(), vec![rint(1), rint(0)]);
        assert_eq!(m.evaluate(&Instance::new(vec![1, 1])), rint(1));
        assert_eq!(m.evaluate(&Instance::new(vec![0, 1])), rint(0));
    }

    #[test]
    fn expectation_is_mean_substitution() {
        let m = LinearModel::binary(rat(1, 2), vec![rint(2), rint(-3)]);
        let dist = ProductDistribution::binary(vec![rat(1, 4), rat(1, 3)]).unwrap();
        // 1/2 + 2*(1/4) - 3*(1/3) = 0
        assert_eq!(m.expectation(&dist), rint(0));
    }
}

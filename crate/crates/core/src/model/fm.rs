//! Degree-2 factorization machines: linear terms plus factorized pairwise
//! interactions <v_i, v_j> x_i x_j.

use super::{Instance, Signature};
use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::num::Rat;
use num_traits::Zero;

#[derive(Debug, Clone)]
pub struct FactorizationMachine {
    bias: Rat,
    weights: Vec<Rat>,
    factors: Vec<Vec<Rat>>,
    signature: Signature,
}

impl FactorizationMachine {
    pub fn new(bias: Rat, weights: Vec<Rat>, factors: Vec<Vec<Rat>>, signature: Signature) -> Result<Self> {
        let n = signature.feature_count();
        if weights.len() != n || factors.len() != n {
            return Err(Error::InvalidModel("weight/factor count must equal feature count".into()));
        }
        let k = factors.first().map(|f| f.len()).unwrap_or(1);
        if k == 0 || factors.iter().any(|f| f.len() != k) {
            return Err(Error::InvalidModel("factor vectors must share a fixed dimension k >= 1".into()));
        }
        Ok(FactorizationMachine { bias, weights, factors, signature })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn factor_dim(&self) -> usize {
        self.factors[0].len()
    }

    fn interaction(&self, i: usize, j: usize) -> Rat {
        self.factors[i]
            .iter()
            .zip(&self.factors[j])
            .map(|(a, b)| a * b)
            .fold(Rat::zero(), |acc, t| acc + t)
    }

    pub fn evaluate(&self, x: &Instance) -> Rat {
        let xv: Vec<Rat> = x.values.iter().map(|&v| Rat::from_integer(v.into())).collect();
        let mut acc = self.bias.clone();
        for (w, v) in self.weights.iter().zip(&xv) {
            acc += w * v;
        }
        for i in 0..xv.len() {
            for j in i + 1..xv.len() {
                acc += self.interaction(i, j) * &xv[i] * &xv[j];
            }
        }
        acc
    }

    /// Independence gives E[X_i X_j] = E[X_i] E[X_j] for i != j, so the
    /// expectation is the model evaluated on feature means, pairwise-only.
    pub fn expectation(&self, dist: &ProductDistribution) -> Rat {
        let means: Vec<Rat> = (0..self.weights.len()).map(|i| dist.feature_mean(i, &self.signature)).collect();
        let mut acc = self.bias.clone();
        for (w, m) in self.weights.iter().zip(&means) {
            acc += w * m;
        }
        for i in 0..means.len() {
            for j in i + 1..means.len() {
                acc += self.interaction(i, j) * &means[i] * &means[j];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, rint};
    use crate::Caps;

    #[test]
    fn expectation_matches_enumeration() {
        let fm = FactorizationMachine::new(
            rat(1, 2),
            vec![rint(1), rint(-2), rint(3)],
            vec![vec![rint(1), rint(0)], vec![rint(2), rint(1)], vec![rint(-1), rint(1)]],
            Signature::binary(3),
        )
        .unwrap();
        let dist = ProductDistribution::binary(vec![rat(1, 2), rat(1, 3), rat(1, 5)]).unwrap();
        let direct = fm.expectation(&dist);
        let brute = crate::model::brute_force_expectation(&crate::model::Model::Fm(fm), &dist, &Caps::default())
            .unwrap();
        assert_eq!(Some(&direct), brute.as_rational());
    }
}

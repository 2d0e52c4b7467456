//! Logistic regression over binary features. Exact expectations are #P-hard
//! for this class, so the only oracle is an audited enumeration.

use super::{Instance, Signature};
use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::extfloat::{Audited, Dd};
use crate::Caps;

/// F(x) = sigma(w_0 + sum_i w_i x_i), weights kept in double-double precision.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    weights: Vec<Dd>,
    signature: Signature,
}

impl LogisticModel {
    /// `weights[0]` is the bias w_0; `weights[1..]` are per-feature weights.
    pub fn new(weights: Vec<Dd>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidModel("logistic model needs at least the bias weight".into()));
        }
        if weights.iter().any(|w| !w.hi.is_finite() || !w.lo.is_finite()) {
            return Err(Error::InvalidModel("logistic weights must be finite".into()));
        }
        let signature = Signature::binary(weights.len() - 1);
        Ok(LogisticModel { weights, signature })
    }

    pub fn from_f64(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights.into_iter().map(Dd::from_f64).collect())
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn weights(&self) -> &[Dd] {
        &self.weights
    }

    fn dot(&self, x: &Instance) -> Dd {
        let mut acc = self.weights[0];
        for (w, &v) in self.weights[1..].iter().zip(&x.values) {
            if v == 1 {
                acc = Dd::add(acc, *w);
            }
        }
        acc
    }

    pub fn evaluate(&self, x: &Instance) -> f64 {
        self.dot(x).sigmoid().to_f64()
    }

    pub fn evaluate_dd(&self, x: &Instance) -> Dd {
        self.dot(x).sigmoid()
    }

    /// E[F] by explicit enumeration of all 2^n instances, with an interval
    /// bound on the accumulated floating-point error.
    pub fn expectation_audited(&self, dist: &ProductDistribution, caps: &Caps) -> Result<Audited> {
        if dist.domain_sizes() != self.signature.domain_sizes() {
            return Err(Error::SignatureMismatch("logistic model expects a binary distribution of matching arity".into()));
        }
        let n = self.signature.feature_count();
        let cap = caps.brute_force_features;
        if n > cap {
            return Err(Error::HardClassCapacity { class: "logistic".into(), n, cap });
        }
        let p1: Vec<Audited> = (0..n)
            .map(|i| Audited::from_rat(&dist.prob_of_value(i, 1, &self.signature)))
            .collect();
        let p0: Vec<Audited> = (0..n)
            .map(|i| Audited::from_rat(&dist.prob_of_value(i, 0, &self.signature)))
            .collect();

        let mut acc = Audited::exact(Dd::ZERO);
        let mut stack_x = vec![0i64; n];
        // Depth-first product of per-feature probabilities; 2^n leaf visits.
        fn rec(
            model: &LogisticModel,
            depth: usize,
            prob: Audited,
            x: &mut Vec<i64>,
            p1: &[Audited],
            p0: &[Audited],
            acc: &mut Audited,
        ) {
            if prob.val.hi == 0.0 && prob.err == 0.0 {
                return;
            }
            if depth == x.len() {
                let f = Audited {
                    val: model.dot(&Instance::new(x.clone())).sigmoid(),
                    err: 1e-29,
                };
                *acc = Audited::add(*acc, Audited::mul(prob, f));
                return;
            }
            x[depth] = 1;
            rec(model, depth + 1, Audited::mul(prob, p1[depth]), x, p1, p0, acc);
            x[depth] = 0;
            rec(model, depth + 1, Audited::mul(prob, p0[depth]), x, p1, p0, acc);
        }
        rec(self, 0, Audited::exact(Dd::ONE), &mut stack_x, &p1, &p0, &mut acc);
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn single_weight_expectation() {
        // F = sigma(x1), uniform: E = (sigma(0) + sigma(1)) / 2
        let m = LogisticModel::from_f64(vec![0.0, 1.0]).unwrap();
        let dist = ProductDistribution::binary(vec![rat(1, 2)]).unwrap();
        let e = m.expectation_audited(&dist, &Caps::default()).unwrap();
        let want = 0.5 * (0.5 + 1.0 / (1.0 + (-1.0f64).exp()));
        assert!((e.val.to_f64() - want).abs() < 1e-15);
        assert!(e.err < 1e-25);
        assert!(e.lower() <= want && want <= e.upper());
    }

    #[test]
    fn cap_is_enforced_and_names_the_class() {
        let m = LogisticModel::from_f64(vec![0.0; 41]).unwrap();
        let dist = ProductDistribution::binary(vec![rat(1, 2); 40]).unwrap();
        let err = m.expectation_audited(&dist, &Caps::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("#P-hard"), "message was: {msg}");
        assert!(msg.contains("logistic"));
    }
}

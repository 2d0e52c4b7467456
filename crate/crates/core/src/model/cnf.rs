//! CNF formulas over binary features. Expectation here is weighted model
//! counting, #P-hard even for monotone 2CNF, so only the capped enumeration
//! is offered.

use super::{Instance, Signature};
use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::num::Rat;
use crate::Caps;
use num_traits::{One, Zero};

/// Clauses of nonzero signed literals; literal k (1-based) is X_{k-1},
/// negative for the complement.
#[derive(Debug, Clone)]
pub struct CnfFormula {
    clauses: Vec<Vec<i64>>,
    signature: Signature,
}

impl CnfFormula {
    pub fn new(n_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        for clause in &clauses {
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > n_vars {
                    return Err(Error::InvalidModel(format!("literal {} out of range for {} variables", lit, n_vars)));
                }
            }
        }
        Ok(CnfFormula { clauses, signature: Signature::binary(n_vars) })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    pub fn evaluate_bool(&self, x: &Instance) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let v = x.values[(lit.unsigned_abs() - 1) as usize] == 1;
                if lit > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }

    pub fn evaluate(&self, x: &Instance) -> Rat {
        if self.evaluate_bool(x) {
            Rat::one()
        } else {
            Rat::zero()
        }
    }

    /// Exact weighted model count by enumeration; exponential, capped.
    pub fn expectation(&self, dist: &ProductDistribution, caps: &Caps) -> Result<Rat> {
        let n = self.signature.feature_count();
        let cap = caps.brute_force_features;
        if n > cap {
            return Err(Error::HardClassCapacity { class: "CNF".into(), n, cap });
        }
        let p1: Vec<Rat> = (0..n).map(|i| dist.prob_of_value(i, 1, &self.signature)).collect();
        let mut acc = Rat::zero();
        for bits in 0u64..(1u64 << n) {
            let x = Instance::new((0..n).map(|i| ((bits >> i) & 1) as i64).collect());
            if !self.evaluate_bool(&x) {
                continue;
            }
            let mut pr = Rat::one();
            for (i, p) in p1.iter().enumerate() {
                pr *= if (bits >> i) & 1 == 1 { p.clone() } else { Rat::one() - p };
            }
            acc += pr;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn monotone_2cnf_expectation() {
        // (x1 or x2) under p = 1/2 each: 3/4.
        let f = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        let dist = ProductDistribution::binary(vec![rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(f.expectation(&dist, &Caps::default()).unwrap(), rat(3, 4));
    }

    #[test]
    fn empty_cnf_is_true() {
        let f = CnfFormula::new(2, vec![]).unwrap();
        assert_eq!(f.evaluate(&Instance::new(vec![0, 0])), Rat::one());
    }
}

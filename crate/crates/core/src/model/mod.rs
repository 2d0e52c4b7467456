//! Model intermediate representation, evaluation, and per-class expectation
//! oracles under fully-factorized distributions.

mod cnf;
mod ddnnf;
mod ensemble;
mod fm;
mod linear;
mod logistic;
mod tree;

pub use cnf::CnfFormula;
pub use ddnnf::{conjunction_circuit, DdnnfCircuit, DdnnfNode};
pub use ensemble::EnsembleModel;
pub use fm::FactorizationMachine;
pub use linear::LinearModel;
pub use logistic::LogisticModel;
pub use tree::{two_level_binary_tree, TreeModel};

use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::extfloat::Audited;
use crate::num::{Rat, Value};
use crate::Caps;
use num_traits::Zero;

/// Per-feature finite domains. A feature of size 2 takes values {0, 1};
/// larger domains take values {1, ..., m}. Value 1 exists in every domain and
/// is the default explained value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    domain_sizes: Vec<u32>,
}

impl Signature {
    pub fn new(domain_sizes: Vec<u32>) -> Result<Self> {
        if domain_sizes.iter().any(|&m| m < 2) {
            return Err(Error::InvalidModel("every feature domain needs at least two values".into()));
        }
        Ok(Signature { domain_sizes })
    }

    pub fn binary(n: usize) -> Self {
        Signature { domain_sizes: vec![2; n] }
    }

    pub fn feature_count(&self) -> usize {
        self.domain_sizes.len()
    }

    pub fn domain_size(&self, feature: usize) -> u32 {
        self.domain_sizes[feature]
    }

    pub fn domain_sizes(&self) -> &[u32] {
        &self.domain_sizes
    }

    pub fn is_all_binary(&self) -> bool {
        self.domain_sizes.iter().all(|&m| m == 2)
    }

    /// The ordered value list of a feature's domain.
    pub fn values(&self, feature: usize) -> Vec<i64> {
        let m = self.domain_sizes[feature] as i64;
        if m == 2 {
            vec![0, 1]
        } else {
            (1..=m).collect()
        }
    }

    /// Index of `value` within the feature's domain ordering.
    pub fn value_index(&self, feature: usize, value: i64) -> Option<usize> {
        let m = self.domain_sizes[feature] as i64;
        if m == 2 {
            match value {
                0 => Some(0),
                1 => Some(1),
                _ => None,
            }
        } else if (1..=m).contains(&value) {
            Some((value - 1) as usize)
        } else {
            None
        }
    }

    pub fn validate_instance(&self, x: &Instance) -> Result<()> {
        if x.values.len() != self.feature_count() {
            return Err(Error::InvalidInstance(format!(
                "instance has {} values, model has {} features",
                x.values.len(),
                self.feature_count()
            )));
        }
        for (i, &v) in x.values.iter().enumerate() {
            if self.value_index(i, v).is_none() {
                return Err(Error::InvalidInstance(format!(
                    "feature {} cannot take value {} (domain size {})",
                    i, v, self.domain_sizes[i]
                )));
            }
        }
        Ok(())
    }

    /// Every instance of the domain, in lexicographic order.
    pub fn all_instances(&self) -> Vec<Instance> {
        let mut out = vec![Instance { values: Vec::new() }];
        for i in 0..self.feature_count() {
            let vals = self.values(i);
            out = out
                .into_iter()
                .flat_map(|base| {
                    vals.iter().map(move |&v| {
                        let mut next = base.values.clone();
                        next.push(v);
                        Instance { values: next }
                    })
                })
                .collect();
        }
        out
    }
}

/// A complete assignment of feature values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub values: Vec<i64>,
}

impl Instance {
    pub fn new(values: Vec<i64>) -> Self {
        Instance { values }
    }

    /// The default explained instance e = (1, ..., 1).
    pub fn all_ones(n: usize) -> Self {
        Instance { values: vec![1; n] }
    }
}

/// Tagged predictive function.
#[derive(Debug, Clone)]
pub enum Model {
    Linear(LinearModel),
    Tree(TreeModel),
    Ensemble(EnsembleModel),
    Fm(FactorizationMachine),
    Ddnnf(DdnnfCircuit),
    Logistic(LogisticModel),
    Cnf(CnfFormula),
}

impl Model {
    pub fn signature(&self) -> &Signature {
        match self {
            Model::Linear(m) => m.signature(),
            Model::Tree(m) => m.signature(),
            Model::Ensemble(m) => m.signature(),
            Model::Fm(m) => m.signature(),
            Model::Ddnnf(m) => m.signature(),
            Model::Logistic(m) => m.signature(),
            Model::Cnf(m) => m.signature(),
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Tree(_) => "tree",
            Model::Ensemble(_) => "ensemble",
            Model::Fm(_) => "factorization machine",
            Model::Ddnnf(_) => "d-DNNF",
            Model::Logistic(_) => "logistic",
            Model::Cnf(_) => "CNF",
        }
    }

    /// Whether the model's outputs are exact rationals.
    pub fn is_rational(&self) -> bool {
        !matches!(self, Model::Logistic(_))
    }

    /// Whether the per-class expectation oracle runs in polynomial time, which
    /// is what the SHAP reduction needs to be worth taking.
    pub fn has_tractable_expectation(&self) -> bool {
        !matches!(self, Model::Logistic(_) | Model::Cnf(_))
    }

    pub fn evaluate(&self, x: &Instance) -> Result<Value> {
        self.signature().validate_instance(x)?;
        Ok(match self {
            Model::Linear(m) => Value::Rational(m.evaluate(x)),
            Model::Tree(m) => Value::Rational(m.evaluate(x)),
            Model::Ensemble(m) => Value::Rational(m.evaluate(x)),
            Model::Fm(m) => Value::Rational(m.evaluate(x)),
            Model::Ddnnf(m) => Value::Rational(m.evaluate(x)),
            Model::Logistic(m) => Value::Real(m.evaluate(x)),
            Model::Cnf(m) => Value::Rational(m.evaluate(x)),
        })
    }

    /// Rational-valued evaluation; errors for logistic models.
    pub fn evaluate_rational(&self, x: &Instance) -> Result<Rat> {
        match self.evaluate(x)? {
            Value::Rational(r) => Ok(r),
            Value::Real(_) => Err(Error::InvalidModel(
                "logistic models are real-valued; exact rational output is unavailable".into(),
            )),
        }
    }

    /// E[F] under a fully-factorized distribution.
    ///
    /// Linear, tree, ensemble, factorization-machine and d-DNNF expectations
    /// are exact and polynomial-time. Logistic and CNF go through an explicit
    /// exponential enumeration, capped by `caps.brute_force_features`.
    pub fn expectation(&self, dist: &ProductDistribution, caps: &Caps) -> Result<Value> {
        self.check_signature(dist)?;
        match self {
            Model::Linear(m) => Ok(Value::Rational(m.expectation(dist))),
            Model::Tree(m) => Ok(Value::Rational(m.expectation(dist))),
            Model::Ensemble(m) => Ok(Value::Rational(m.expectation(dist))),
            Model::Fm(m) => Ok(Value::Rational(m.expectation(dist))),
            Model::Ddnnf(m) => Ok(Value::Rational(m.expectation(dist).0)),
            Model::Logistic(m) => Ok(Value::Real(m.expectation_audited(dist, caps)?.val.to_f64())),
            Model::Cnf(m) => Ok(Value::Rational(m.expectation(dist, caps)?)),
        }
    }

    pub fn expectation_rational(&self, dist: &ProductDistribution, caps: &Caps) -> Result<Rat> {
        match self.expectation(dist, caps)? {
            Value::Rational(r) => Ok(r),
            Value::Real(_) => Err(Error::InvalidModel("expected a rational-valued model".into())),
        }
    }

    pub fn check_signature(&self, dist: &ProductDistribution) -> Result<()> {
        if dist.domain_sizes() != self.signature().domain_sizes() {
            return Err(Error::SignatureMismatch(format!(
                "model domains {:?} vs distribution domains {:?}",
                self.signature().domain_sizes(),
                dist.domain_sizes()
            )));
        }
        Ok(())
    }
}

/// Reference expectation by full enumeration of the instance space. This is
/// the independent oracle the per-class expectations are tested against, and
/// the only available route for logistic and CNF models.
pub fn brute_force_expectation(model: &Model, dist: &ProductDistribution, caps: &Caps) -> Result<Value> {
    model.check_signature(dist)?;
    let n = model.signature().feature_count();
    let cap = caps.brute_force_features;
    if n > cap {
        return Err(if model.has_tractable_expectation() {
            Error::CapacityExceeded { what: "brute-force expectation".into(), n, cap }
        } else {
            Error::HardClassCapacity { class: model.class_name().into(), n, cap }
        });
    }
    if model.is_rational() {
        let mut acc = Rat::zero();
        for x in model.signature().all_instances() {
            let pr = dist.instance_probability(&x);
            if pr.is_zero() {
                continue;
            }
            acc += model.evaluate_rational(&x)? * pr;
        }
        Ok(Value::Rational(acc))
    } else {
        let m = match model {
            Model::Logistic(m) => m,
            _ => unreachable!(),
        };
        Ok(Value::Real(m.expectation_audited(dist, caps)?.val.to_f64()))
    }
}

/// Audited enumeration for logistic models, shared with the gadget module.
pub fn logistic_expectation_audited(
    model: &LogisticModel,
    dist: &ProductDistribution,
    caps: &Caps,
) -> Result<Audited> {
    model.expectation_audited(dist, caps)
}

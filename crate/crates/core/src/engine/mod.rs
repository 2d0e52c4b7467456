//! SHAP engines: the oracle reduction for fully-factorized distributions and
//! the brute-force reference paths, all emitting checked `ShapReport`s.

mod brute;
mod project;
mod reduce;

pub use brute::{shap_brute_permutation, shap_brute_subset, ShapScalar};
pub use project::ProjectionContext;
pub use reduce::{collect_vk, shap_reduction_feature, SubsetValueVector};

use crate::dist::{conditional_expectation, Distribution, EventMask, ProductDistribution};
use crate::error::{Error, Result};
use crate::model::{Instance, Model};
use crate::num::{Rat, Value};
use crate::Caps;
use num_traits::Zero;
use std::sync::atomic::{AtomicU64, Ordering};

/// E[F] under an arbitrary binary product distribution, the oracle interface
/// the reduction consumes. Probabilities arrive in instance-indicator space:
/// probs[i] = Pr(feature i takes its explained value).
pub trait BinaryExpectationOracle: Sync {
    fn expectation(&self, probs: &[Rat]) -> Result<Rat>;
}

/// Oracle wrapper that counts calls, for the cost accounting assertions.
pub struct CountingOracle<'a> {
    inner: &'a dyn BinaryExpectationOracle,
    calls: AtomicU64,
}

impl<'a> CountingOracle<'a> {
    pub fn new(inner: &'a dyn BinaryExpectationOracle) -> Self {
        CountingOracle { inner, calls: AtomicU64::new(0) }
    }

    pub fn count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn expectation(&self, probs: &[Rat]) -> Result<Rat> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.expectation(probs)
    }
}

/// Indicator-space oracle over an all-binary model: q_i is the probability of
/// feature i equalling the explained instance's value.
pub struct ModelIndicatorOracle<'a> {
    model: &'a Model,
    instance: &'a Instance,
    caps: &'a Caps,
}

impl<'a> ModelIndicatorOracle<'a> {
    pub fn new(model: &'a Model, instance: &'a Instance, caps: &'a Caps) -> Self {
        assert!(model.signature().is_all_binary());
        ModelIndicatorOracle { model, instance, caps }
    }

    pub fn expectation_at(&self, probs: &[Rat]) -> Result<Rat> {
        let p1: Vec<Rat> = probs
            .iter()
            .zip(&self.instance.values)
            .map(|(q, &star)| if star == 1 { q.clone() } else { Rat::from_integer(1.into()) - q })
            .collect();
        let dist = ProductDistribution::binary(p1)?;
        if self.model.has_tractable_expectation() {
            self.model.expectation_rational(&dist, self.caps)
        } else {
            match crate::model::brute_force_expectation(self.model, &dist, self.caps)? {
                Value::Rational(r) => Ok(r),
                Value::Real(_) => Err(Error::InvalidModel("real-valued model in a rational oracle".into())),
            }
        }
    }
}

impl BinaryExpectationOracle for ModelIndicatorOracle<'_> {
    fn expectation(&self, probs: &[Rat]) -> Result<Rat> {
        self.expectation_at(probs)
    }
}

/// Which engine produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnginePath {
    Reduction,
    PermutationBrute,
    SubsetBrute,
    EmpiricalDirect,
    EmpiricalPp2cnf,
}

impl std::fmt::Display for EnginePath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EnginePath::Reduction => "reduction",
            EnginePath::PermutationBrute => "permutation-brute",
            EnginePath::SubsetBrute => "subset-brute",
            EnginePath::EmpiricalDirect => "empirical-direct",
            EnginePath::EmpiricalPp2cnf => "empirical-pp2cnf",
        };
        f.write_str(s)
    }
}

/// Per-feature exact SHAP scores with provenance.
#[derive(Debug, Clone)]
pub struct ShapReport {
    pub scores: Vec<Value>,
    pub engine: EnginePath,
    pub oracle_calls: u64,
    pub instance: Instance,
}

impl ShapReport {
    pub fn rational_scores(&self) -> Option<Vec<&Rat>> {
        self.scores.iter().map(|s| s.as_rational()).collect()
    }

    /// Every report must satisfy sum_i score_i = v(full) - v(empty); exact for
    /// rational scores, 1e-9 for real-valued ones.
    pub fn verify_sum_rule(&self, v_full: &Value, v_empty: &Value) -> Result<()> {
        match self.rational_scores() {
            Some(scores) => {
                let got: Rat = scores.into_iter().cloned().sum();
                let expected = match (v_full.as_rational(), v_empty.as_rational()) {
                    (Some(a), Some(b)) => a - b,
                    _ => return Err(Error::InvalidModel("mixed rational/real sum-rule check".into())),
                };
                if got != expected {
                    return Err(Error::SumRule { got: got.to_string(), expected: expected.to_string() });
                }
            }
            None => {
                let got: f64 = self.scores.iter().map(|s| s.as_f64()).sum();
                let expected = v_full.as_f64() - v_empty.as_f64();
                if (got - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
                    return Err(Error::SumRule { got: got.to_string(), expected: expected.to_string() });
                }
            }
        }
        Ok(())
    }
}

/// Engine selection as exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Auto,
    Reduction,
    Brute,
}

/// SHAP scores for every feature of the model at `instance` under `dist`.
pub fn shap_all(
    model: &Model,
    dist: &Distribution,
    instance: &Instance,
    choice: EngineChoice,
    caps: &Caps,
) -> Result<ShapReport> {
    model.signature().validate_instance(instance)?;
    match dist {
        Distribution::Product(pd) => match choice {
            EngineChoice::Auto => {
                if model.has_tractable_expectation() {
                    reduction_report(model, pd, instance, caps)
                } else {
                    brute_report(model, dist, instance, EnginePath::SubsetBrute, caps)
                }
            }
            EngineChoice::Reduction => reduction_report(model, pd, instance, caps),
            EngineChoice::Brute => brute_report(model, dist, instance, EnginePath::SubsetBrute, caps),
        },
        Distribution::Empirical(data) => match choice {
            EngineChoice::Auto => crate::empirical_shap::report_direct(data, model, instance, caps),
            EngineChoice::Reduction => crate::empirical_shap::report_via_pp2cnf(data, model, instance, caps),
            EngineChoice::Brute => brute_report(model, dist, instance, EnginePath::SubsetBrute, caps),
        },
        Distribution::Nbn(_) => match choice {
            EngineChoice::Auto | EngineChoice::Brute => {
                brute_report(model, dist, instance, EnginePath::SubsetBrute, caps)
            }
            EngineChoice::Reduction => Err(Error::InvalidDistribution(
                "the oracle reduction requires a fully-factorized distribution; \
                 SHAP under naive Bayes distributions is NP-hard even for single-feature models"
                    .into(),
            )),
        },
    }
}

/// The polynomial-time path: expectation-oracle reduction, via the identity
/// oracle for all-binary signatures and the projection transfer otherwise.
pub fn reduction_report(
    model: &Model,
    dist: &ProductDistribution,
    instance: &Instance,
    caps: &Caps,
) -> Result<ShapReport> {
    if !model.has_tractable_expectation() {
        return Err(Error::HardClassCapacity {
            class: model.class_name().into(),
            n: model.signature().feature_count(),
            cap: caps.brute_force_features,
        });
    }
    let n = model.signature().feature_count();
    if model.signature().is_all_binary() {
        let sig = model.signature();
        let probs: Vec<Rat> = (0..n).map(|i| dist.prob_of_value(i, instance.values[i], sig)).collect();
        if let Some(i) = probs.iter().position(|p| p.is_zero()) {
            return Err(Error::ZeroInstanceProbability { feature: i });
        }
        let oracle = ModelIndicatorOracle::new(model, instance, caps);
        let counting = CountingOracle::new(&oracle);
        let mut scores = Vec::with_capacity(n);
        for f in 0..n {
            scores.push(Value::Rational(shap_reduction_feature(&counting, &probs, f)?));
        }
        let v_empty = Value::Rational(counting.expectation(&probs)?);
        let v_full = model.evaluate(instance)?;
        let report = ShapReport {
            scores,
            engine: EnginePath::Reduction,
            oracle_calls: counting.count(),
            instance: instance.clone(),
        };
        report.verify_sum_rule(&v_full, &v_empty)?;
        Ok(report)
    } else {
        let ctx = ProjectionContext::new(model, dist, instance, caps)?;
        let counting = CountingOracle::new(&ctx);
        let probs = ctx.active_probs();
        let mut scores = vec![Value::Rational(<Rat as Zero>::zero()); n];
        for (idx, &f) in ctx.active().iter().enumerate() {
            scores[f] = Value::Rational(shap_reduction_feature(&counting, &probs, idx)?);
        }
        let v_empty = Value::Rational(counting.expectation(&probs)?);
        let v_full = model.evaluate(instance)?;
        let report = ShapReport {
            scores,
            engine: EnginePath::Reduction,
            oracle_calls: counting.count(),
            instance: instance.clone(),
        };
        report.verify_sum_rule(&v_full, &v_empty)?;
        Ok(report)
    }
}

/// Brute-force report over any distribution, rational when the model allows
/// it, floating otherwise.
pub fn brute_report(
    model: &Model,
    dist: &Distribution,
    instance: &Instance,
    path: EnginePath,
    caps: &Caps,
) -> Result<ShapReport> {
    let n = model.signature().feature_count();
    if dist.feature_count() != n {
        return Err(Error::SignatureMismatch(format!(
            "distribution over {} features, model over {}",
            dist.feature_count(),
            n
        )));
    }
    let calls = AtomicU64::new(0);
    let rational = model.is_rational() && !matches!(dist, Distribution::Nbn(_));
    let full_mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    let report = if rational {
        let mut v = |mask: u64| -> Result<Rat> {
            calls.fetch_add(1, Ordering::Relaxed);
            let mask = EventMask::of_instance_subset(mask, instance);
            match conditional_expectation(model, dist, &mask, caps)? {
                Value::Rational(r) => Ok(r),
                Value::Real(_) => Err(Error::InvalidModel("expected rational conditional expectation".into())),
            }
        };
        let mut scores = Vec::with_capacity(n);
        for f in 0..n {
            let s = match path {
                EnginePath::PermutationBrute => {
                    shap_brute_permutation(n, f, caps.permutation_features, &mut v)?
                }
                _ => shap_brute_subset(n, f, caps.subset_features, &mut v)?,
            };
            scores.push(Value::Rational(s));
        }
        let v_full = Value::Rational(v(full_mask)?);
        let v_empty = Value::Rational(v(0)?);
        let report = ShapReport {
            scores,
            engine: path,
            oracle_calls: calls.load(Ordering::Relaxed),
            instance: instance.clone(),
        };
        report.verify_sum_rule(&v_full, &v_empty)?;
        report
    } else {
        let mut v = |mask: u64| -> Result<f64> {
            calls.fetch_add(1, Ordering::Relaxed);
            let mask = EventMask::of_instance_subset(mask, instance);
            Ok(conditional_expectation(model, dist, &mask, caps)?.as_f64())
        };
        let mut scores = Vec::with_capacity(n);
        for f in 0..n {
            let s = match path {
                EnginePath::PermutationBrute => {
                    shap_brute_permutation(n, f, caps.permutation_features, &mut v)?
                }
                _ => shap_brute_subset(n, f, caps.subset_features, &mut v)?,
            };
            scores.push(Value::Real(s));
        }
        let v_full = Value::Real(v(full_mask)?);
        let v_empty = Value::Real(v(0)?);
        let report = ShapReport {
            scores,
            engine: path,
            oracle_calls: calls.load(Ordering::Relaxed),
            instance: instance.clone(),
        };
        report.verify_sum_rule(&v_full, &v_empty)?;
        report
    };
    Ok(report)
}

/// One feature's score through the chosen engine.
pub fn shap_feature(
    model: &Model,
    dist: &Distribution,
    instance: &Instance,
    feature: usize,
    choice: EngineChoice,
    caps: &Caps,
) -> Result<Value> {
    let report = shap_all(model, dist, instance, choice, caps)?;
    report
        .scores
        .into_iter()
        .nth(feature)
        .ok_or_else(|| Error::InvalidInstance(format!("feature {} out of range", feature)))
}

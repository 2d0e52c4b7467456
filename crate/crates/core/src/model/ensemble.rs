//! Additive tree ensembles.

use super::{Instance, Signature, TreeModel};
use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::num::Rat;
use num_traits::Zero;

#[derive(Debug, Clone)]
pub struct EnsembleModel {
    members: Vec<(Rat, TreeModel)>,
}

impl EnsembleModel {
    pub fn new(members: Vec<(Rat, TreeModel)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidModel("an ensemble needs at least one member".into()))?;
        let sig = first.1.signature().clone();
        if members.iter().any(|(_, t)| *t.signature() != sig) {
            return Err(Error::SignatureMismatch("ensemble members disagree on feature domains".into()));
        }
        Ok(EnsembleModel { members })
    }

    pub fn signature(&self) -> &Signature {
        self.members[0].1.signature()
    }

    pub fn members(&self) -> &[(Rat, TreeModel)] {
        &self.members
    }

    pub fn evaluate(&self, x: &Instance) -> Rat {
        self.members.iter().map(|(c, t)| c * t.evaluate(x)).fold(Rat::zero(), |a, b| a + b)
    }

    /// Linearity of expectation over the additive mixture.
    pub fn expectation(&self, dist: &ProductDistribution) -> Rat {
        self.members.iter().map(|(c, t)| c * t.expectation(dist)).fold(Rat::zero(), |a, b| a + b)
    }
}

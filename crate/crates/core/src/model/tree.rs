//! Decision/regression trees in the parallel-array layout {v, a, b, t, r, d}.

use super::{Instance, Signature};
use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::num::Rat;
use num_traits::Zero;

/// Node arrays, 0-indexed with the root at position 0. `value[j]` is `Some`
/// exactly at leaves; `left`/`right`/`threshold`/`feature` are meaningful only
/// at internal nodes; `cover[j]` is how many data samples fall in node j.
#[derive(Debug, Clone)]
pub struct TreeModel {
    value: Vec<Option<Rat>>,
    left: Vec<usize>,
    right: Vec<usize>,
    threshold: Vec<Rat>,
    feature: Vec<usize>,
    cover: Vec<Rat>,
    signature: Signature,
}

impl TreeModel {
    pub fn new(
        value: Vec<Option<Rat>>,
        left: Vec<usize>,
        right: Vec<usize>,
        threshold: Vec<Rat>,
        feature: Vec<usize>,
        cover: Vec<Rat>,
        signature: Signature,
    ) -> Result<Self> {
        let n = value.len();
        if n == 0 {
            return Err(Error::InvalidModel("tree has no nodes".into()));
        }
        for arr in [left.len(), right.len(), threshold.len(), feature.len(), cover.len()] {
            if arr != n {
                return Err(Error::InvalidModel("tree node arrays have unequal lengths".into()));
            }
        }
        let tree = TreeModel { value, left, right, threshold, feature, cover, signature };
        tree.validate_shape()?;
        Ok(tree)
    }

    fn validate_shape(&self) -> Result<()> {
        let n = self.value.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        let mut visited = 0usize;
        while let Some(j) = stack.pop() {
            if j >= n {
                return Err(Error::InvalidModel(format!("child index {} out of range", j)));
            }
            if seen[j] {
                return Err(Error::InvalidModel(format!("node {} reachable twice; tree must be acyclic with one parent per node", j)));
            }
            seen[j] = true;
            visited += 1;
            if self.value[j].is_none() {
                if self.feature[j] >= self.signature.feature_count() {
                    return Err(Error::InvalidModel(format!("node {} splits on unknown feature {}", j, self.feature[j])));
                }
                stack.push(self.left[j]);
                stack.push(self.right[j]);
            }
        }
        if visited != n {
            return Err(Error::InvalidModel("unreachable nodes present; a tree has a single root at index 0".into()));
        }
        Ok(())
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn node_count(&self) -> usize {
        self.value.len()
    }

    pub fn is_leaf(&self, j: usize) -> bool {
        self.value[j].is_some()
    }

    pub fn leaf_value(&self, j: usize) -> Option<&Rat> {
        self.value[j].as_ref()
    }

    pub fn children(&self, j: usize) -> (usize, usize) {
        (self.left[j], self.right[j])
    }

    pub fn split(&self, j: usize) -> (usize, &Rat) {
        (self.feature[j], &self.threshold[j])
    }

    pub fn cover(&self, j: usize) -> &Rat {
        &self.cover[j]
    }

    pub fn with_covers(&self, cover: Vec<Rat>) -> Result<TreeModel> {
        if cover.len() != self.value.len() {
            return Err(Error::InvalidModel("cover vector length mismatch".into()));
        }
        let mut t = self.clone();
        t.cover = cover;
        Ok(t)
    }

    pub fn arrays(&self) -> (&[Option<Rat>], &[usize], &[usize], &[Rat], &[usize], &[Rat]) {
        (&self.value, &self.left, &self.right, &self.threshold, &self.feature, &self.cover)
    }

    /// Split rule: go left when x_{d_j} <= t_j, ties included.
    pub fn evaluate(&self, x: &Instance) -> Rat {
        let mut j = 0usize;
        loop {
            match &self.value[j] {
                Some(v) => return v.clone(),
                None => {
                    let xv = Rat::from_integer(x.values[self.feature[j]].into());
                    j = if xv <= self.threshold[j] { self.left[j] } else { self.right[j] };
                }
            }
        }
    }

    /// Root-to-leaf paths are mutually exclusive events, so E[F] is the sum
    /// over leaves of leaf value times path probability.
    pub fn expectation(&self, dist: &ProductDistribution) -> Rat {
        let allowed: Vec<Vec<i64>> = (0..self.signature.feature_count())
            .map(|i| self.signature.values(i))
            .collect();
        self.expectation_rec(0, &allowed, dist)
    }

    fn expectation_rec(&self, j: usize, allowed: &[Vec<i64>], dist: &ProductDistribution) -> Rat {
        match &self.value[j] {
            Some(v) => {
                let mut pr = Rat::from_integer(1.into());
                for (i, vals) in allowed.iter().enumerate() {
                    let mass: Rat = vals
                        .iter()
                        .map(|&val| dist.prob_of_value(i, val, &self.signature))
                        .sum();
                    if mass.is_zero() {
                        return Rat::zero();
                    }
                    pr *= mass;
                }
                v.clone() * pr
            }
            None => {
                let f = self.feature[j];
                let t = &self.threshold[j];
                let mut left_allowed = allowed.to_vec();
                let mut right_allowed = allowed.to_vec();
                left_allowed[f].retain(|&v| Rat::from_integer(v.into()) <= *t);
                right_allowed[f].retain(|&v| Rat::from_integer(v.into()) > *t);
                let mut acc = Rat::zero();
                if !left_allowed[f].is_empty() {
                    acc += self.expectation_rec(self.left[j], &left_allowed, dist);
                }
                if !right_allowed[f].is_empty() {
                    acc += self.expectation_rec(self.right[j], &right_allowed, dist);
                }
                acc
            }
        }
    }
}

/// The two-feature tree used throughout the cover-averaging audit: root splits
/// on X_1, both children split on X_2, four leaves in (0,0),(0,1),(1,0),(1,1)
/// order, covers taken from the six-row dataset.
pub fn two_level_binary_tree(leaf_values: [Rat; 4], covers: [Rat; 7]) -> TreeModel {
    let half = crate::num::rat(1, 2);
    TreeModel::new(
        vec![
            None,
            None,
            None,
            Some(leaf_values[0].clone()),
            Some(leaf_values[1].clone()),
            Some(leaf_values[2].clone()),
            Some(leaf_values[3].clone()),
        ],
        vec![1, 3, 5, 0, 0, 0, 0],
        vec![2, 4, 6, 0, 0, 0, 0],
        vec![half.clone(), half.clone(), half, Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()],
        vec![0, 1, 1, 0, 0, 0, 0],
        covers.to_vec(),
        Signature::binary(2),
    )
    .expect("fixed shape is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, rint};

    fn appendix_tree() -> TreeModel {
        // Leaves F(0,0)=0, F(0,1)=1, F(1,0)=2, F(1,1)=3; covers from the
        // dataset {(0,0)x2, (0,1)x1, (1,0)x1, (1,1)x2}.
        two_level_binary_tree(
            [rint(0), rint(1), rint(2), rint(3)],
            [rint(6), rint(3), rint(3), rint(2), rint(1), rint(1), rint(2)],
        )
    }

    #[test]
    fn evaluates_by_path() {
        let t = appendix_tree();
        assert_eq!(t.evaluate(&Instance::new(vec![0, 0])), rint(0));
        assert_eq!(t.evaluate(&Instance::new(vec![0, 1])), rint(1));
        assert_eq!(t.evaluate(&Instance::new(vec![1, 0])), rint(2));
        assert_eq!(t.evaluate(&Instance::new(vec![1, 1])), rint(3));
    }

    #[test]
    fn expectation_matches_enumeration() {
        let t = appendix_tree();
        let dist = ProductDistribution::binary(vec![rat(1, 3), rat(2, 5)]).unwrap();
        let mut expect = Rat::zero();
        for (x1, x2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let p1 = if x1 == 1 { rat(1, 3) } else { rat(2, 3) };
            let p2 = if x2 == 1 { rat(2, 5) } else { rat(3, 5) };
            expect += t.evaluate(&Instance::new(vec![x1, x2])) * p1 * p2;
        }
        assert_eq!(t.expectation(&dist), expect);
    }

    #[test]
    fn rejects_cyclic_arrays() {
        let bad = TreeModel::new(
            vec![None, Some(rint(1))],
            vec![0, 0],
            vec![1, 0],
            vec![rat(1, 2), Rat::zero()],
            vec![0, 0],
            vec![rint(1), rint(1)],
            Signature::binary(1),
        );
        assert!(bad.is_err());
    }
}

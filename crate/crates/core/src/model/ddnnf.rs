//! d-DNNF circuits: decomposable AND gates, deterministic OR gates, and the
//! one-pass weighted model count that makes their expectations linear in the
//! circuit size.

use super::{Instance, Signature};
use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::num::Rat;
use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DdnnfNode {
    /// (variable index, phase): true phase tests X_i = 1.
    Literal(usize, bool),
    True,
    False,
    And(Vec<usize>),
    Or { children: Vec<usize>, decision: Option<usize> },
}

/// Circuit over binary features, nodes in topological order (children before
/// parents), the last interesting node designated as root.
#[derive(Debug, Clone)]
pub struct DdnnfCircuit {
    nodes: Vec<DdnnfNode>,
    root: usize,
    /// Per-node variable scope as a bitset.
    scopes: Vec<Vec<u64>>,
    edge_count: usize,
    /// True when OR determinism had to be taken on faith because the input
    /// carried no decision-variable annotations.
    pub determinism_trusted: bool,
    signature: Signature,
}

fn bitset_new(n: usize) -> Vec<u64> {
    vec![0u64; n.div_ceil(64)]
}

fn bitset_set(b: &mut [u64], i: usize) {
    b[i / 64] |= 1u64 << (i % 64);
}

fn bitset_or(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x |= y;
    }
}

fn bitset_intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

impl DdnnfCircuit {
    pub fn new(n_vars: usize, nodes: Vec<DdnnfNode>, root: usize) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::InvalidModel("d-DNNF root index out of range".into()));
        }
        let mut scopes: Vec<Vec<u64>> = Vec::with_capacity(nodes.len());
        let mut edge_count = 0usize;
        let mut has_unannotated_or = false;
        for (idx, node) in nodes.iter().enumerate() {
            let mut scope = bitset_new(n_vars);
            match node {
                DdnnfNode::Literal(var, _) => {
                    if *var >= n_vars {
                        return Err(Error::InvalidModel(format!("literal on unknown variable {}", var)));
                    }
                    bitset_set(&mut scope, *var);
                }
                DdnnfNode::True | DdnnfNode::False => {}
                DdnnfNode::And(children) => {
                    edge_count += children.len();
                    for &c in children {
                        if c >= idx {
                            return Err(Error::InvalidModel("nodes must be topologically ordered".into()));
                        }
                        if bitset_intersects(&scope, &scopes[c]) {
                            return Err(Error::InvalidModel(format!(
                                "AND node {} is not decomposable: children share variables",
                                idx
                            )));
                        }
                        bitset_or(&mut scope, &scopes[c]);
                    }
                }
                DdnnfNode::Or { children, decision } => {
                    edge_count += children.len();
                    for &c in children {
                        if c >= idx {
                            return Err(Error::InvalidModel("nodes must be topologically ordered".into()));
                        }
                        bitset_or(&mut scope, &scopes[c]);
                    }
                    if decision.is_none() && children.len() > 1 {
                        has_unannotated_or = true;
                    }
                    if let Some(d) = decision {
                        if *d >= n_vars {
                            return Err(Error::InvalidModel(format!("decision variable {} out of range", d)));
                        }
                    }
                }
            }
            scopes.push(scope);
        }
        Ok(DdnnfCircuit {
            nodes,
            root,
            scopes,
            edge_count,
            determinism_trusted: has_unannotated_or,
            signature: Signature::binary(n_vars),
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn n_vars(&self) -> usize {
        self.signature.feature_count()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[DdnnfNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    fn eval_bools(&self, x: &Instance) -> Vec<bool> {
        let mut vals = vec![false; self.nodes.len()];
        for (idx, node) in self.nodes.iter().enumerate() {
            vals[idx] = match node {
                DdnnfNode::Literal(var, phase) => (x.values[*var] == 1) == *phase,
                DdnnfNode::True => true,
                DdnnfNode::False => false,
                DdnnfNode::And(children) => children.iter().all(|&c| vals[c]),
                DdnnfNode::Or { children, .. } => children.iter().any(|&c| vals[c]),
            };
        }
        vals
    }

    pub fn evaluate(&self, x: &Instance) -> Rat {
        if self.eval_bools(x)[self.root] {
            Rat::one()
        } else {
            Rat::zero()
        }
    }

    /// One bottom-up pass computing E[circuit] when Pr(X_i = 1) = p_i.
    ///
    /// Per node we carry the integer E[node] * prod_{i in scope} den(p_i); OR
    /// gates pad children up to the union scope, the root divides once. Each
    /// edge is visited exactly once; the visit count is returned for the cost
    /// assertion.
    pub fn expectation_binary(&self, probs: &[Rat]) -> (Rat, usize) {
        assert_eq!(probs.len(), self.n_vars());
        let nums: Vec<BigInt> = probs.iter().map(|p| p.numer().clone()).collect();
        let dens: Vec<BigInt> = probs.iter().map(|p| p.denom().clone()).collect();

        let mut vals: Vec<BigInt> = Vec::with_capacity(self.nodes.len());
        let mut edges_visited = 0usize;
        for (idx, node) in self.nodes.iter().enumerate() {
            let v = match node {
                DdnnfNode::Literal(var, phase) => {
                    if *phase {
                        nums[*var].clone()
                    } else {
                        &dens[*var] - &nums[*var]
                    }
                }
                DdnnfNode::True => BigInt::one(),
                DdnnfNode::False => BigInt::zero(),
                DdnnfNode::And(children) => {
                    edges_visited += children.len();
                    let mut acc = BigInt::one();
                    for &c in children {
                        acc *= &vals[c];
                    }
                    acc
                }
                DdnnfNode::Or { children, .. } => {
                    edges_visited += children.len();
                    let mut acc = BigInt::zero();
                    for &c in children {
                        let mut term = vals[c].clone();
                        // Pad the child up to the OR scope with missing denominators.
                        for w in 0..self.scopes[idx].len() {
                            let mut missing = self.scopes[idx][w] & !self.scopes[c][w];
                            while missing != 0 {
                                let bit = missing.trailing_zeros() as usize;
                                let var = w * 64 + bit;
                                if !dens[var].is_one() {
                                    term *= &dens[var];
                                }
                                missing &= missing - 1;
                            }
                        }
                        acc += term;
                    }
                    acc
                }
            };
            vals.push(v);
        }

        let mut den = BigInt::one();
        for w in 0..self.scopes[self.root].len() {
            let mut bits = self.scopes[self.root][w];
            while bits != 0 {
                let bit = bits.trailing_zeros() as usize;
                den *= &dens[w * 64 + bit];
                bits &= bits - 1;
            }
        }
        (Rat::new(vals[self.root].clone(), den), edges_visited)
    }

    pub fn expectation(&self, dist: &ProductDistribution) -> (Rat, usize) {
        let probs: Vec<Rat> = (0..self.n_vars()).map(|i| dist.prob_of_value(i, 1, &self.signature)).collect();
        self.expectation_binary(&probs)
    }

    /// Exhaustively check that every OR gate has mutually exclusive children.
    /// Exponential in the variable count; meant for n <= `cap`.
    pub fn verify_determinism(&self, cap: usize) -> Result<bool> {
        let n = self.n_vars();
        if n > cap {
            return Err(Error::CapacityExceeded { what: "determinism verification".into(), n, cap });
        }
        for bits in 0u64..(1u64 << n) {
            let x = Instance::new((0..n).map(|i| ((bits >> i) & 1) as i64).collect());
            let vals = self.eval_bools(&x);
            for (idx, node) in self.nodes.iter().enumerate() {
                if let DdnnfNode::Or { children, .. } = node {
                    if children.iter().filter(|&&c| vals[c]).count() > 1 {
                        let _ = idx;
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// The conjunction X_1 AND X_2 ... AND X_k over n variables.
pub fn conjunction_circuit(n_vars: usize, conjuncts: &[usize]) -> DdnnfCircuit {
    let mut nodes: Vec<DdnnfNode> = conjuncts.iter().map(|&v| DdnnfNode::Literal(v, true)).collect();
    let children: Vec<usize> = (0..conjuncts.len()).collect();
    nodes.push(DdnnfNode::And(children));
    let root = nodes.len() - 1;
    DdnnfCircuit::new(n_vars, nodes, root).expect("conjunction is decomposable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn conjunction_under_fair_coins() {
        let c = conjunction_circuit(2, &[0, 1]);
        let (e, edges) = c.expectation_binary(&[rat(1, 2), rat(1, 2)]);
        assert_eq!(e, rat(1, 4));
        assert_eq!(edges, c.edge_count());
        assert_eq!(c.evaluate(&Instance::new(vec![1, 0])), rat(0, 1));
        assert_eq!(c.evaluate(&Instance::new(vec![1, 1])), rat(1, 1));
    }

    #[test]
    fn xor_circuit_expectation() {
        // (x0 and not x1) or (not x0 and x1), decision on x0: deterministic.
        let nodes = vec![
            DdnnfNode::Literal(0, true),
            DdnnfNode::Literal(1, false),
            DdnnfNode::Literal(0, false),
            DdnnfNode::Literal(1, true),
            DdnnfNode::And(vec![0, 1]),
            DdnnfNode::And(vec![2, 3]),
            DdnnfNode::Or { children: vec![4, 5], decision: Some(0) },
        ];
        let c = DdnnfCircuit::new(2, nodes, 6).unwrap();
        assert!(!c.determinism_trusted);
        assert!(c.verify_determinism(20).unwrap());
        let (e, _) = c.expectation_binary(&[rat(1, 3), rat(1, 4)]);
        // P(x0)P(!x1) + P(!x0)P(x1) = 1/3*3/4 + 2/3*1/4
        assert_eq!(e, rat(5, 12));
    }

    #[test]
    fn rejects_overlapping_and() {
        let nodes = vec![
            DdnnfNode::Literal(0, true),
            DdnnfNode::Literal(0, false),
            DdnnfNode::And(vec![0, 1]),
        ];
        assert!(DdnnfCircuit::new(1, nodes, 2).is_err());
    }

    #[test]
    fn catches_nondeterministic_or() {
        let nodes = vec![
            DdnnfNode::Literal(0, true),
            DdnnfNode::True,
            DdnnfNode::Or { children: vec![0, 1], decision: None },
        ];
        let c = DdnnfCircuit::new(1, nodes, 2).unwrap();
        assert!(c.determinism_trusted);
        assert!(!c.verify_determinism(20).unwrap());
    }
}

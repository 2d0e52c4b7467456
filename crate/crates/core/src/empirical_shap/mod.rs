//! SHAP over empirical distributions and both directions of the reduction
//! between empirical SHAP and PP2CNF expectations under quasi-symmetric
//! distributions.

mod forward;
mod reverse;

pub use forward::{report_direct, report_via_pp2cnf, shap_direct_feature, shap_via_pp2cnf_feature};
pub use reverse::{pp2cnf_expectation_via_shap, pp2cnf_expectation_via_shap_traced, ReverseTrace};

use crate::dist::EmpiricalDataset;
use crate::error::{Error, Result};
use crate::num::{binomial, Rat};
use crate::Caps;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeSet;

/// A 0/1 matrix with rows stored as bitmasks over up to 32 columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    pub rows: Vec<u32>,
    pub cols: usize,
}

impl BitMatrix {
    pub fn new(rows: Vec<u32>, cols: usize) -> Self {
        assert!(cols <= 32);
        BitMatrix { rows, cols }
    }

    /// Expand a dataset's row multiplicities into one bitmask per outcome.
    pub fn from_dataset(data: &EmpiricalDataset) -> Result<Self> {
        let n = data.feature_count();
        if n > 32 {
            return Err(Error::CapacityExceeded { what: "bit-matrix construction".into(), n, cap: 32 });
        }
        let mut rows = Vec::new();
        for (row, &count) in data.rows().iter().zip(data.counts()) {
            let mask = row.iter().enumerate().fold(0u32, |m, (j, &v)| m | ((v as u32) << j));
            for _ in 0..count {
                rows.push(mask);
            }
        }
        Ok(BitMatrix { rows, cols: n })
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut rows = vec![0u32; self.cols];
        for (i, &r) in self.rows.iter().enumerate() {
            for (j, out) in rows.iter_mut().enumerate() {
                *out |= ((r >> j) & 1) << i;
            }
        }
        BitMatrix { rows, cols: self.rows.len() }
    }
}

/// Positive partitioned 2CNF over U_1..U_m, V_1..V_n: one clause (U_i or V_j)
/// per zero entry of the defining matrix. Indices are 0-based internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pp2Cnf {
    m: usize,
    n: usize,
    clauses: BTreeSet<(usize, usize)>,
}

impl Pp2Cnf {
    pub fn new(m: usize, n: usize, clauses: Vec<(usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in clauses {
            if i >= m || j >= n {
                return Err(Error::parse(format!("clause ({}, {}) out of range for {} x {}", i + 1, j + 1, m, n)));
            }
            if !set.insert((i, j)) {
                return Err(Error::parse(format!("duplicate clause ({}, {})", i + 1, j + 1)));
            }
        }
        Ok(Pp2Cnf { m, n, clauses: set })
    }

    pub fn u_count(&self) -> usize {
        self.m
    }

    pub fn v_count(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.clauses.iter().copied()
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    /// The defining matrix: zeros exactly at clause positions.
    pub fn to_matrix(&self) -> Result<BitMatrix> {
        if self.n > 32 {
            return Err(Error::CapacityExceeded { what: "PP2CNF matrix".into(), n: self.n, cap: 32 });
        }
        let full = if self.n == 32 { u32::MAX } else { (1u32 << self.n) - 1 };
        let mut rows = vec![full; self.m];
        for &(i, j) in &self.clauses {
            rows[i] &= !(1u32 << j);
        }
        Ok(BitMatrix { rows, cols: self.n })
    }
}

/// One clause per zero entry of the (multiplicity-expanded) dataset matrix.
pub fn build_pp2cnf(data: &EmpiricalDataset) -> Result<Pp2Cnf> {
    let mat = BitMatrix::from_dataset(data)?;
    Ok(pp2cnf_of_matrix(&mat))
}

pub fn pp2cnf_of_matrix(mat: &BitMatrix) -> Pp2Cnf {
    let mut clauses = BTreeSet::new();
    for (i, &row) in mat.rows.iter().enumerate() {
        for j in 0..mat.cols {
            if row >> j & 1 == 0 {
                clauses.insert((i, j));
            }
        }
    }
    Pp2Cnf { m: mat.row_count(), n: mat.cols, clauses }
}

/// Quasi-symmetric probabilities: every U gets p except the pinned ones (=1),
/// every V gets q except the pinned ones (=1).
#[derive(Debug, Clone)]
pub struct QuasiSymmetricAssignment {
    pub p: Rat,
    pub q: Rat,
    pub pinned_u: BTreeSet<usize>,
    pub pinned_v: BTreeSet<usize>,
}

impl QuasiSymmetricAssignment {
    pub fn symmetric(p: Rat, q: Rat) -> Self {
        QuasiSymmetricAssignment { p, q, pinned_u: BTreeSet::new(), pinned_v: BTreeSet::new() }
    }

    fn validate(&self) -> Result<()> {
        for x in [&self.p, &self.q] {
            if x < &Rat::zero() || x > &Rat::one() {
                return Err(Error::InvalidDistribution("PP2CNF probabilities must be in [0,1]".into()));
            }
        }
        Ok(())
    }
}

/// The quantities g(S) and a_{lk} of a 0/1 matrix: a_{lk} counts column
/// subsets S of size k whose all-ones row set g(S) has size l.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetPolynomial {
    pub rows: usize,
    pub cols: usize,
    /// a[l][k], l = 0..rows, k = 0..cols.
    pub a: Vec<Vec<BigInt>>,
}

impl SubsetPolynomial {
    pub fn of_matrix(mat: &BitMatrix, cap: usize) -> Result<Self> {
        let n = mat.cols;
        if n > cap {
            return Err(Error::CapacityExceeded { what: "subset-polynomial enumeration".into(), n, cap });
        }
        let m = mat.row_count();
        let mut a = vec![vec![BigInt::zero(); n + 1]; m + 1];
        for s in 0u32..(1u32 << n) {
            let k = s.count_ones() as usize;
            let l = mat.rows.iter().filter(|&&r| r & s == s).count();
            a[l][k] += 1;
        }
        Ok(SubsetPolynomial { rows: m, cols: n, a })
    }

    /// Coefficients b_{lk} of Q(u,v) = P(1+u, v).
    pub fn q_grid(&self) -> Vec<Vec<BigInt>> {
        let mut b = vec![vec![BigInt::zero(); self.cols + 1]; self.rows + 1];
        for lp in 0..=self.rows {
            for k in 0..=self.cols {
                if self.a[lp][k].is_zero() {
                    continue;
                }
                for (l, row) in b.iter_mut().enumerate().take(lp + 1) {
                    row[k] += binomial(lp, l) * &self.a[lp][k];
                }
            }
        }
        b
    }

    /// v_k = sum_{l >= 1} a_{lk} / l.
    pub fn v_values(&self) -> Vec<Rat> {
        (0..=self.cols)
            .map(|k| {
                (1..=self.rows)
                    .map(|l| Rat::new(self.a[l][k].clone(), BigInt::from(l)))
                    .fold(Rat::zero(), |acc, t| acc + t)
            })
            .collect()
    }

    pub fn eval_p(&self, u: &Rat, v: &Rat) -> Rat {
        let mut acc = Rat::zero();
        let mut u_pow = Rat::one();
        for l in 0..=self.rows {
            let mut v_pow = Rat::one();
            for k in 0..=self.cols {
                if !self.a[l][k].is_zero() {
                    acc += Rat::from_integer(self.a[l][k].clone()) * &u_pow * &v_pow;
                }
                v_pow *= v;
            }
            u_pow *= u;
        }
        acc
    }
}

/// Cardinality-summed conditional expectations of the dataset and its
/// polynomial grid, as named in the public API.
pub fn subset_polynomial(data: &EmpiricalDataset, caps: &Caps) -> Result<SubsetPolynomial> {
    let mat = BitMatrix::from_dataset(data)?;
    SubsetPolynomial::of_matrix(&mat, caps.subset_polynomial_cols)
}

enum Folded {
    Decided(Rat),
    Reduced { mat: BitMatrix, p: Rat, q: Rat },
}

/// Remove pinned variables (their clauses are satisfied), then dispatch the
/// degenerate probability edges.
fn fold_assignment(phi: &Pp2Cnf, asg: &QuasiSymmetricAssignment) -> Result<Folded> {
    asg.validate()?;
    for &i in &asg.pinned_u {
        if i >= phi.m {
            return Err(Error::InvalidDistribution(format!("pinned U index {} out of range", i + 1)));
        }
    }
    for &j in &asg.pinned_v {
        if j >= phi.n {
            return Err(Error::InvalidDistribution(format!("pinned V index {} out of range", j + 1)));
        }
    }
    let keep_rows: Vec<usize> = (0..phi.m).filter(|i| !asg.pinned_u.contains(i)).collect();
    let keep_cols: Vec<usize> = (0..phi.n).filter(|j| !asg.pinned_v.contains(j)).collect();
    let clauses: Vec<(usize, usize)> = phi
        .clauses
        .iter()
        .filter(|(i, j)| !asg.pinned_u.contains(i) && !asg.pinned_v.contains(j))
        .copied()
        .collect();

    if clauses.is_empty() {
        return Ok(Folded::Decided(Rat::one()));
    }
    if asg.p.is_one() || asg.q.is_one() {
        // Every remaining clause still holds a probability-1 literal.
        return Ok(Folded::Decided(Rat::one()));
    }
    if asg.p.is_zero() {
        let forced: BTreeSet<usize> = clauses.iter().map(|&(_, j)| j).collect();
        return Ok(Folded::Decided(asg.q.clone().pow(forced.len() as i32)));
    }
    if asg.q.is_zero() {
        let forced: BTreeSet<usize> = clauses.iter().map(|&(i, _)| i).collect();
        return Ok(Folded::Decided(asg.p.clone().pow(forced.len() as i32)));
    }

    if keep_cols.len() > 32 {
        return Err(Error::CapacityExceeded { what: "PP2CNF folding".into(), n: keep_cols.len(), cap: 32 });
    }
    let col_pos: std::collections::BTreeMap<usize, usize> =
        keep_cols.iter().enumerate().map(|(pos, &j)| (j, pos)).collect();
    let row_pos: std::collections::BTreeMap<usize, usize> =
        keep_rows.iter().enumerate().map(|(pos, &i)| (i, pos)).collect();
    let full = if keep_cols.len() == 32 { u32::MAX } else { (1u32 << keep_cols.len()) - 1 };
    let mut rows = vec![full; keep_rows.len()];
    for (i, j) in clauses {
        rows[row_pos[&i]] &= !(1u32 << col_pos[&j]);
    }
    Ok(Folded::Reduced { mat: BitMatrix::new(rows, keep_cols.len()), p: asg.p.clone(), q: asg.q.clone() })
}

/// E[Phi] under a quasi-symmetric assignment, through the subset polynomial
/// of the folded matrix: E = p^m q^n Q((1-p)/p, (1-q)/q) with Q = P(1+u, v).
///
/// The enumeration runs over the smaller dimension of the folded matrix
/// (clauses are symmetric under transposition with p and q swapped).
pub fn pp2cnf_expectation(phi: &Pp2Cnf, asg: &QuasiSymmetricAssignment, caps: &Caps) -> Result<Rat> {
    match fold_assignment(phi, asg)? {
        Folded::Decided(e) => Ok(e),
        Folded::Reduced { mat, p, q } => {
            let (mat, p, q) = if mat.cols > mat.row_count() {
                (mat.transpose(), q, p)
            } else {
                (mat, p, q)
            };
            let poly = SubsetPolynomial::of_matrix(&mat, caps.subset_polynomial_cols)?;
            Ok(expectation_from_poly(&poly, &p, &q))
        }
    }
}

/// E = p^m q^n P(1/p, (1-q)/q).
pub(crate) fn expectation_from_poly(poly: &SubsetPolynomial, p: &Rat, q: &Rat) -> Rat {
    let inv_p = Rat::one() / p;
    let v = (Rat::one() - q) / q;
    let scale = p.clone().pow(poly.rows as i32) * q.clone().pow(poly.cols as i32);
    scale * poly.eval_p(&inv_p, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, rint};

    fn identity_2x2() -> EmpiricalDataset {
        EmpiricalDataset::unweighted(vec![vec![1, 0], vec![0, 1]]).unwrap()
    }

    #[test]
    fn pp2cnf_construction() {
        // All-ones matrix: no clauses.
        let all_ones = EmpiricalDataset::unweighted(vec![vec![1, 1]]).unwrap();
        assert_eq!(build_pp2cnf(&all_ones).unwrap().clause_count(), 0);
        // 1x1 zero matrix: single clause (U_1 or V_1).
        let zero = EmpiricalDataset::unweighted(vec![vec![0]]).unwrap();
        let phi = build_pp2cnf(&zero).unwrap();
        assert_eq!(phi.clauses().collect::<Vec<_>>(), vec![(0, 0)]);
        // 2x2 identity: clauses at the off-diagonal zeros.
        let phi = build_pp2cnf(&identity_2x2()).unwrap();
        assert_eq!(phi.clauses().collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn multiplicities_expand_to_rows() {
        let data = EmpiricalDataset::new(vec!["a".into()], vec![vec![0]], vec![3]).unwrap();
        let phi = build_pp2cnf(&data).unwrap();
        assert_eq!(phi.u_count(), 3);
        assert_eq!(phi.clause_count(), 3);
    }

    #[test]
    fn subset_polynomial_counts() {
        let caps = Caps::default();
        // All-ones 2x2: every S matches both rows.
        let ones = EmpiricalDataset::unweighted(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let poly = subset_polynomial(&ones, &caps).unwrap();
        assert_eq!(poly.a[2][0], BigInt::from(1));
        assert_eq!(poly.a[2][1], BigInt::from(2));
        assert_eq!(poly.a[2][2], BigInt::from(1));
        assert_eq!(poly.a[1][1], BigInt::zero());
        // 2x2 identity: a_{2,0} = 1 (empty S), a_{1,1} = 2, a_{0,2} = 1.
        let poly = subset_polynomial(&identity_2x2(), &caps).unwrap();
        assert_eq!(poly.a[2][0], BigInt::from(1));
        assert_eq!(poly.a[1][1], BigInt::from(2));
        assert_eq!(poly.a[0][2], BigInt::from(1));
        // Total count is 2^n.
        let total: BigInt = poly.a.iter().flatten().sum();
        assert_eq!(total, BigInt::from(4));
    }

    #[test]
    fn single_clause_expectation() {
        let zero = EmpiricalDataset::unweighted(vec![vec![0]]).unwrap();
        let phi = build_pp2cnf(&zero).unwrap();
        let caps = Caps::default();
        let e = pp2cnf_expectation(&phi, &QuasiSymmetricAssignment::symmetric(rat(1, 2), rat(1, 2)), &caps).unwrap();
        assert_eq!(e, rat(3, 4));
        // Empty formula.
        let empty = Pp2Cnf::new(2, 2, vec![]).unwrap();
        let e = pp2cnf_expectation(&empty, &QuasiSymmetricAssignment::symmetric(rat(1, 3), rat(1, 7)), &caps).unwrap();
        assert_eq!(e, rint(1));
    }

    /// Brute-force E[Phi] by enumerating all 2^(m+n) assignments.
    pub(crate) fn brute_expectation(phi: &Pp2Cnf, asg: &QuasiSymmetricAssignment) -> Rat {
        let m = phi.u_count();
        let n = phi.v_count();
        assert!(m + n <= 20);
        let mut acc = Rat::zero();
        for bits in 0u64..(1u64 << (m + n)) {
            let u = |i: usize| bits >> i & 1 == 1;
            let v = |j: usize| bits >> (m + j) & 1 == 1;
            if phi.clauses().any(|(i, j)| !u(i) && !v(j)) {
                continue;
            }
            let mut pr = Rat::one();
            for i in 0..m {
                let pi = if asg.pinned_u.contains(&i) { Rat::one() } else { asg.p.clone() };
                pr *= if u(i) { pi } else { Rat::one() - pi };
            }
            for j in 0..n {
                let qj = if asg.pinned_v.contains(&j) { Rat::one() } else { asg.q.clone() };
                pr *= if v(j) { qj } else { Rat::one() - qj };
            }
            acc += pr;
        }
        acc
    }

    #[test]
    fn expectation_matches_brute_force_with_pins() {
        let caps = Caps::default();
        let phi = build_pp2cnf(&identity_2x2()).unwrap();
        let asg = QuasiSymmetricAssignment {
            p: rat(1, 3),
            q: rat(2, 7),
            pinned_u: [0].into_iter().collect(),
            pinned_v: BTreeSet::new(),
        };
        assert_eq!(pp2cnf_expectation(&phi, &asg, &caps).unwrap(), brute_expectation(&phi, &asg));
        // 2x2 identity at p=q=1/2 against all 16 assignments.
        let sym = QuasiSymmetricAssignment::symmetric(rat(1, 2), rat(1, 2));
        assert_eq!(pp2cnf_expectation(&phi, &sym, &caps).unwrap(), brute_expectation(&phi, &sym));
    }

    #[test]
    fn degenerate_probabilities() {
        let caps = Caps::default();
        let phi = build_pp2cnf(&identity_2x2()).unwrap();
        // p = 1 satisfies every clause.
        let e = pp2cnf_expectation(&phi, &QuasiSymmetricAssignment::symmetric(rint(1), rat(1, 2)), &caps).unwrap();
        assert_eq!(e, rint(1));
        // p = 0 forces the clause columns.
        let asg = QuasiSymmetricAssignment::symmetric(rint(0), rat(1, 2));
        assert_eq!(pp2cnf_expectation(&phi, &asg, &caps).unwrap(), brute_expectation(&phi, &asg));
    }

    #[test]
    fn q_grid_matches_pair_enumeration() {
        // Independent computation of Q's coefficients: count (T, S) pairs
        // with T x S all ones.
        let mat = BitMatrix::from_dataset(&identity_2x2()).unwrap();
        let poly = SubsetPolynomial::of_matrix(&mat, 24).unwrap();
        let b = poly.q_grid();
        let m = mat.row_count();
        let n = mat.cols;
        let mut want = vec![vec![BigInt::zero(); n + 1]; m + 1];
        for t in 0u32..(1 << m) {
            for s in 0u32..(1 << n) {
                let ok = (0..m).all(|i| t >> i & 1 == 0 || (0..n).all(|j| s >> j & 1 == 0 || mat.get(i, j)));
                if ok {
                    want[t.count_ones() as usize][s.count_ones() as usize] += 1;
                }
            }
        }
        assert_eq!(b, want);
    }
}

//! The reverse reduction: PP2CNF expectations under symmetric assignments
//! computed from an empirical-SHAP oracle, through row (Gamma) and column
//! (Delta) matrix extensions and two exact linear systems.

use super::{BitMatrix, Pp2Cnf, QuasiSymmetricAssignment};
use crate::dist::EmpiricalDataset;
use crate::error::{Error, Result};
use crate::linalg::solve_exact;
use crate::num::{binomial, shapley_weight, Rat};
use crate::Caps;
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Intermediates of one reverse run, inspectable in verbose mode.
#[derive(Debug, Clone)]
pub struct ReverseTrace {
    /// Raw SHAP oracle answers, indexed [gamma-1][delta].
    pub shap_answers: Vec<Vec<Rat>>,
    /// V^(Gamma,Delta) recovered from the oracle, same indexing.
    pub v_extended: Vec<Vec<Rat>>,
    /// v_k^(Gamma) after the Delta solve, indexed [gamma-1][k].
    pub v_gamma: Vec<Vec<Rat>>,
    /// Recovered coefficient grid a[l][k] of the original matrix.
    pub a_grid: Vec<Vec<Rat>>,
    /// SHAP oracle invocations.
    pub oracle_calls: u64,
}

pub fn pp2cnf_expectation_via_shap(phi: &Pp2Cnf, asg: &QuasiSymmetricAssignment, caps: &Caps) -> Result<Rat> {
    pp2cnf_expectation_via_shap_traced(phi, asg, caps).map(|(e, _)| e)
}

/// E[Phi] under a quasi-symmetric assignment using only the direct empirical
/// SHAP implementation as an oracle.
///
/// Pinned variables fold into the matrix first. Each extended matrix gets an
/// extra indicator column whose SHAP score encodes the Shapley-weighted sum
/// V of its cardinality values; the Delta system (binomial times reciprocal-
/// binomial, nonsingular) then isolates the v_k, and the Gamma system (a
/// Cauchy matrix) isolates the coefficient grid, from which the expectation
/// is a polynomial evaluation.
pub fn pp2cnf_expectation_via_shap_traced(
    phi: &Pp2Cnf,
    asg: &QuasiSymmetricAssignment,
    caps: &Caps,
) -> Result<(Rat, ReverseTrace)> {
    let folded = super::fold_assignment(phi, asg)?;
    let (mat, p, q) = match folded {
        super::Folded::Decided(e) => {
            return Ok((
                e,
                ReverseTrace {
                    shap_answers: vec![],
                    v_extended: vec![],
                    v_gamma: vec![],
                    a_grid: vec![],
                    oracle_calls: 0,
                },
            ))
        }
        super::Folded::Reduced { mat, p, q } => (mat, p, q),
    };
    let m = mat.row_count();
    let n = mat.cols;
    let cap = caps.reverse_reduction_dim;
    if m > cap || n > cap {
        return Err(Error::CapacityExceeded { what: "reverse PP2CNF reduction".into(), n: m.max(n), cap });
    }

    let two_n = 2 * n;
    // Shapley weights over 2n non-indicator columns, and the correction sums
    // sum_k w_k C(n1, k) for first-row support n1.
    let w2n: Vec<Rat> = (0..=two_n).map(|k| shapley_weight(k, two_n)).collect();

    let mut shap_answers = Vec::with_capacity(m + 1);
    let mut v_extended = Vec::with_capacity(m + 1);
    let mut oracle_calls = 0u64;
    for gamma in 1..=m + 1 {
        let mut shap_row = Vec::with_capacity(n + 1);
        let mut v_row = Vec::with_capacity(n + 1);
        for delta in 0..=n {
            let data = extended_dataset(&mat, gamma, delta);
            // F returns the indicator column (the last feature).
            let (rows, _) = data.group_distinct();
            let y: Vec<Rat> = rows.iter().map(|r| Rat::from_integer((*r.last().unwrap() as i64).into())).collect();
            let feature = two_n; // the indicator column X_0 sits last
            let instance = crate::model::Instance::all_ones(two_n + 1);
            let s = super::shap_direct_feature(&data, &y, feature, &instance, caps)?;
            oracle_calls += 1;

            // First row of the extended matrix has support n + delta among the
            // 2n non-indicator columns.
            let n1 = n + delta;
            let correction: Rat = (0..=n1).map(|k| &w2n[k] * Rat::from_integer(binomial(n1, k))).sum();
            v_row.push(correction - &s);
            shap_row.push(s);
        }
        shap_answers.push(shap_row);
        v_extended.push(v_row);
    }

    // Delta system: (2n+1) V^(Gamma,Delta) = sum_k A_{Delta,k} v_k^(Gamma),
    // A_{Delta,k} = sum_q C(Delta,q)/C(2n,k+q).
    let mut a_sys = vec![vec![Rat::zero(); n + 1]; n + 1];
    for (delta, row) in a_sys.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            let mut acc = Rat::zero();
            for qq in 0..=delta {
                acc += Rat::new(binomial(delta, qq), binomial(two_n, k + qq));
            }
            *cell = acc;
        }
    }
    let scale = Rat::from_integer(BigInt::from(two_n as u32 + 1));
    let mut v_gamma = Vec::with_capacity(m + 1);
    for v_row in &v_extended {
        let rhs: Vec<Rat> = v_row.iter().map(|v| &scale * v).collect();
        v_gamma.push(solve_exact(&a_sys, &rhs)?);
    }

    // Gamma system per k: v_k^(Gamma) = sum_{l=0..m} a_{lk} / (l + Gamma),
    // a Cauchy matrix in (Gamma, l).
    let cauchy: Vec<Vec<Rat>> = (1..=m + 1)
        .map(|gamma| (0..=m).map(|l| Rat::new(BigInt::one(), BigInt::from(l + gamma))).collect())
        .collect();
    let mut a_grid = vec![vec![Rat::zero(); n + 1]; m + 1];
    for k in 0..=n {
        let rhs: Vec<Rat> = v_gamma.iter().map(|row| row[k].clone()).collect();
        let col = solve_exact(&cauchy, &rhs)?;
        for (l, val) in col.into_iter().enumerate() {
            a_grid[l][k] = val;
        }
    }

    // E = p^m q^n sum_{l,k} a_{lk} (1/p)^l ((1-q)/q)^k.
    let inv_p = Rat::one() / &p;
    let vv = (Rat::one() - &q) / &q;
    let mut acc = Rat::zero();
    let mut u_pow = Rat::one();
    for row in a_grid.iter() {
        let mut v_pow = Rat::one();
        for cell in row.iter() {
            if !cell.is_zero() {
                acc += cell * &u_pow * &v_pow;
            }
            v_pow *= &vv;
        }
        u_pow *= &inv_p;
    }
    let e = p.pow(m as i32) * q.pow(n as i32) * acc;
    let trace = ReverseTrace { shap_answers, v_extended, v_gamma, a_grid, oracle_calls };
    Ok((e, trace))
}

/// The matrix extended with `gamma` all-ones rows on top, `delta` one-columns
/// plus n-delta zero-columns on the right, and a trailing indicator column
/// set only in the first row.
fn extended_dataset(mat: &BitMatrix, gamma: usize, delta: usize) -> EmpiricalDataset {
    let n = mat.cols;
    let width = 2 * n + 1;
    let names: Vec<String> = (0..width).map(|j| format!("c{}", j)).collect();
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(gamma + mat.row_count());
    let make_row = |base: u32, indicator: u8| -> Vec<u8> {
        let mut row = Vec::with_capacity(width);
        for j in 0..n {
            row.push((base >> j & 1) as u8);
        }
        for j in 0..n {
            row.push(if j < delta { 1 } else { 0 });
        }
        row.push(indicator);
        row
    };
    let all_ones = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for g in 0..gamma {
        rows.push(make_row(all_ones, if g == 0 { 1 } else { 0 }));
    }
    for &r in &mat.rows {
        rows.push(make_row(r, 0));
    }
    EmpiricalDataset::new(names, rows, vec![1; gamma + mat.row_count()]).expect("constructed rows are valid")
}

#[cfg(test)]
mod tests {
    use super::super::{build_pp2cnf, pp2cnf_expectation};
    use super::*;
    use crate::num::{rat, rint};

    #[test]
    fn single_clause_reverse() {
        let data = EmpiricalDataset::unweighted(vec![vec![0]]).unwrap();
        let phi = build_pp2cnf(&data).unwrap();
        let caps = Caps::default();
        let asg = QuasiSymmetricAssignment::symmetric(rat(1, 2), rat(1, 2));
        let e = pp2cnf_expectation_via_shap(&phi, &asg, &caps).unwrap();
        assert_eq!(e, rat(3, 4));
    }

    #[test]
    fn empty_formula_reverse() {
        let phi = Pp2Cnf::new(2, 3, vec![]).unwrap();
        let caps = Caps::default();
        let asg = QuasiSymmetricAssignment::symmetric(rat(2, 5), rat(1, 3));
        assert_eq!(pp2cnf_expectation_via_shap(&phi, &asg, &caps).unwrap(), rint(1));
    }

    #[test]
    fn reverse_matches_direct_on_identity() {
        let data = EmpiricalDataset::unweighted(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let phi = build_pp2cnf(&data).unwrap();
        let caps = Caps::default();
        for (p, q) in [(rat(1, 2), rat(1, 2)), (rat(1, 3), rat(2, 7)), (rat(5, 6), rat(1, 4))] {
            let asg = QuasiSymmetricAssignment::symmetric(p, q);
            let direct = pp2cnf_expectation(&phi, &asg, &caps).unwrap();
            let (via, trace) = pp2cnf_expectation_via_shap_traced(&phi, &asg, &caps).unwrap();
            assert_eq!(via, direct);
            assert_eq!(trace.oracle_calls, 3 * 3);
            // Recovered grid must be the subset-polynomial grid.
            let mat = BitMatrix::from_dataset(&data).unwrap();
            let poly = super::super::SubsetPolynomial::of_matrix(&mat, 24).unwrap();
            for l in 0..=2 {
                for k in 0..=2 {
                    assert_eq!(trace.a_grid[l][k], Rat::from_integer(poly.a[l][k].clone()));
                }
            }
        }
    }
}

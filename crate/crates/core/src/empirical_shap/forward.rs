//! Empirical-distribution SHAP: the direct subset-enumeration path and the
//! polynomial pipeline that answers the same question through a PP2CNF
//! expectation oracle.

use super::{pp2cnf_of_matrix, BitMatrix, QuasiSymmetricAssignment, SubsetPolynomial};
use crate::dist::EmpiricalDataset;
use crate::engine::{EnginePath, ShapReport};
use crate::error::{Error, Result};
use crate::linalg::grid_interpolate;
use crate::model::{Instance, Model};
use crate::num::{binomial, rint, shapley_weight, Rat, Value};
use crate::Caps;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::sync::atomic::{AtomicU64, Ordering};

/// Distinct rows of the dataset with the explained instance folded in: a row
/// mask has bit j set iff the row agrees with the instance at feature j.
struct NormalizedData {
    masks: Vec<u32>,
    mults: Vec<u64>,
    n: usize,
    total: u64,
}

fn normalize(data: &EmpiricalDataset, instance: &Instance) -> Result<NormalizedData> {
    let n = data.feature_count();
    if n > 32 {
        return Err(Error::CapacityExceeded { what: "empirical SHAP".into(), n, cap: 32 });
    }
    if instance.values.len() != n || instance.values.iter().any(|v| !(*v == 0 || *v == 1)) {
        return Err(Error::InvalidInstance("explained instance must be binary and match the data arity".into()));
    }
    let (rows, mults) = data.group_distinct();
    let masks = rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(0u32, |m, (j, &v)| if v as i64 == instance.values[j] { m | (1 << j) } else { m })
        })
        .collect();
    Ok(NormalizedData { masks, mults, n, total: data.total_weight() })
}

/// Exact Shap_{F}(feature) over the empirical distribution, where F takes the
/// value y_r on the r-th distinct row (and 0 off the data support).
///
/// F is decomposed into row indicators, each scored by the cardinality-
/// weighted subset sum, and recombined linearly.
pub fn shap_direct_feature(
    data: &EmpiricalDataset,
    y: &[Rat],
    feature: usize,
    instance: &Instance,
    caps: &Caps,
) -> Result<Rat> {
    let (score, _) = shap_direct_feature_counted(data, y, feature, instance, caps)?;
    Ok(score)
}

fn shap_direct_feature_counted(
    data: &EmpiricalDataset,
    y: &[Rat],
    feature: usize,
    instance: &Instance,
    caps: &Caps,
) -> Result<(Rat, u64)> {
    let norm = normalize(data, instance)?;
    let n = norm.n;
    if feature >= n {
        return Err(Error::InvalidInstance(format!("feature {} out of range", feature)));
    }
    if y.len() != norm.masks.len() {
        return Err(Error::InvalidInstance("one y value per distinct row required".into()));
    }
    let cap = caps.subset_features;
    if n > cap {
        return Err(Error::CapacityExceeded { what: "empirical direct SHAP".into(), n, cap });
    }

    // Weight of rows matching the instance on each subset.
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut match_weight = vec![0u64; (full as usize) + 1];
    for (mask, mult) in norm.masks.iter().zip(&norm.mults) {
        // Rows match instance on T iff T is a subset of the agreement mask.
        // Accumulate over all subsets of `mask` via the standard superset walk.
        let m = *mask;
        let mut t = m;
        loop {
            match_weight[t as usize] += mult;
            if t == 0 {
                break;
            }
            t = (t - 1) & m;
        }
    }

    let others: Vec<usize> = (0..n).filter(|&j| j != feature).collect();
    let t_count = others.len();
    let mut evals = 0u64;
    let mut total = Rat::zero();
    for (r, yr) in y.iter().enumerate() {
        if yr.is_zero() {
            continue;
        }
        let rmask = norm.masks[r];
        let mult = Rat::from_integer(norm.mults[r].into());
        // v_r(T) = mult(r) * [T subset of rmask] / match_weight(T), 0-convention.
        let mut v_r = |t: u32| -> Rat {
            evals += 1;
            if t & !rmask != 0 {
                return Rat::zero();
            }
            let w = match_weight[t as usize];
            debug_assert!(w > 0);
            &mult / Rat::from_integer(w.into())
        };
        let mut score = Rat::zero();
        for bits in 0u32..(1u32 << t_count) {
            let mut t = 0u32;
            for (idx, &j) in others.iter().enumerate() {
                if bits >> idx & 1 == 1 {
                    t |= 1 << j;
                }
            }
            let k = t.count_ones() as usize;
            let diff = v_r(t | (1 << feature)) - v_r(t);
            if !diff.is_zero() {
                score += shapley_weight(k, t_count) * diff;
            }
        }
        total += yr * score;
    }
    Ok((total, evals))
}

fn model_y_values(data: &EmpiricalDataset, model: &Model) -> Result<Vec<Rat>> {
    if model.signature().feature_count() != data.feature_count() || !model.signature().is_all_binary() {
        return Err(Error::SignatureMismatch("empirical SHAP requires a binary model of matching arity".into()));
    }
    let (rows, _) = data.group_distinct();
    rows.iter()
        .map(|row| model.evaluate_rational(&Instance::new(row.iter().map(|&v| v as i64).collect())))
        .collect()
}

fn finish_report(
    data: &EmpiricalDataset,
    y: &[Rat],
    instance: &Instance,
    scores: Vec<Value>,
    engine: EnginePath,
    oracle_calls: u64,
) -> Result<ShapReport> {
    let norm = normalize(data, instance)?;
    let full: u32 = if norm.n == 32 { u32::MAX } else { (1u32 << norm.n) - 1 };
    // v(empty) = E[F]; v(full) = E[F | X = x*] with the zero convention.
    let m = Rat::from_integer(norm.total.into());
    let mut v_empty = Rat::zero();
    let mut full_weight = 0u64;
    let mut full_value = Rat::zero();
    for ((mask, mult), yr) in norm.masks.iter().zip(&norm.mults).zip(y) {
        v_empty += yr * Rat::from_integer((*mult).into());
        if *mask == full {
            full_weight += mult;
            full_value = yr.clone();
        }
    }
    v_empty /= m;
    let v_full = if full_weight > 0 { full_value } else { Rat::zero() };
    let report = ShapReport { scores, engine, oracle_calls, instance: instance.clone() };
    report.verify_sum_rule(&Value::Rational(v_full), &Value::Rational(v_empty))?;
    Ok(report)
}

/// Full per-feature report through the direct path.
pub fn report_direct(data: &EmpiricalDataset, model: &Model, instance: &Instance, caps: &Caps) -> Result<ShapReport> {
    let y = model_y_values(data, model)?;
    let n = data.feature_count();
    let mut scores = Vec::with_capacity(n);
    let mut calls = 0u64;
    for f in 0..n {
        let (s, e) = shap_direct_feature_counted(data, &y, f, instance, caps)?;
        scores.push(Value::Rational(s));
        calls += e;
    }
    finish_report(data, &y, instance, scores, EnginePath::EmpiricalDirect, calls)
}

/// Full per-feature report through the PP2CNF pipeline, one rerun per feature.
pub fn report_via_pp2cnf(data: &EmpiricalDataset, model: &Model, instance: &Instance, caps: &Caps) -> Result<ShapReport> {
    let y = model_y_values(data, model)?;
    let n = data.feature_count();
    let calls = AtomicU64::new(0);
    let mut scores = Vec::with_capacity(n);
    for f in 0..n {
        let s = shap_via_pp2cnf_feature(data, &y, f, instance, caps, &calls)?;
        scores.push(Value::Rational(s));
    }
    finish_report(data, &y, instance, scores, EnginePath::EmpiricalPp2cnf, calls.load(Ordering::Relaxed))
}

/// Shap_F(feature) computed through quasi-symmetric expectations of the
/// dataset's PP2CNF.
///
/// Per distinct row r: restrict columns to the row's support J1 (the good-
/// matrix step), recover the coefficient grid of Q from expectations on a
/// (rows+1) x (|J1|+1) probe grid, shift to the P grid, and read off the
/// cardinality sums; the row-restricted run handles the S-with-feature sums.
pub fn shap_via_pp2cnf_feature(
    data: &EmpiricalDataset,
    y: &[Rat],
    feature: usize,
    instance: &Instance,
    caps: &Caps,
    oracle_calls: &AtomicU64,
) -> Result<Rat> {
    let norm = normalize(data, instance)?;
    let n = norm.n;
    if feature >= n {
        return Err(Error::InvalidInstance(format!("feature {} out of range", feature)));
    }
    if y.len() != norm.masks.len() {
        return Err(Error::InvalidInstance("one y value per distinct row required".into()));
    }

    // Expanded (multiplicity-unrolled) normalized matrix and its PP2CNF.
    let mut expanded: Vec<u32> = Vec::new();
    for (mask, mult) in norm.masks.iter().zip(&norm.mults) {
        for _ in 0..*mult {
            expanded.push(*mask);
        }
    }
    let mat = BitMatrix::new(expanded.clone(), n);
    let phi = pp2cnf_of_matrix(&mat);

    let others: Vec<usize> = (0..n).filter(|&j| j != feature).collect();
    let t_count = others.len();

    // Rows whose feature column agrees with the instance, for the S-union-f sums.
    let rows_with_feature: Vec<usize> =
        (0..expanded.len()).filter(|&i| expanded[i] >> feature & 1 == 1).collect();

    let mut total = Rat::zero();
    for (r, yr) in y.iter().enumerate() {
        if yr.is_zero() {
            continue;
        }
        let rmask = norm.masks[r];
        let j1: Vec<usize> = others.iter().copied().filter(|&j| rmask >> j & 1 == 1).collect();

        // T2: all rows, columns J1.
        let t2 = vk_via_probes(&phi, expanded.len(), None, &j1, caps, oracle_calls)?;
        // T1: rows with the feature set, columns J1; zero when the row itself
        // lacks the feature (conditioning excludes it entirely).
        let t1 = if rmask >> feature & 1 == 1 {
            Some(vk_via_probes(&phi, expanded.len(), Some(&rows_with_feature), &j1, caps, oracle_calls)?)
        } else {
            None
        };

        let mult = Rat::from_integer(norm.mults[r].into());
        let mut score = Rat::zero();
        for k in 0..=t_count {
            let a = t1.as_ref().and_then(|v| v.get(k)).cloned().unwrap_or_else(Rat::zero);
            let b = t2.get(k).cloned().unwrap_or_else(Rat::zero);
            if a != b {
                score += shapley_weight(k, t_count) * (a - b);
            }
        }
        total += yr * &mult * score;
    }
    Ok(total)
}

/// The cardinality sums v_k of the sub-matrix (rows `keep_rows` or all,
/// columns `cols`), recovered purely from quasi-symmetric expectations of the
/// full PP2CNF with everything else pinned to probability 1.
fn vk_via_probes(
    phi: &super::Pp2Cnf,
    total_rows: usize,
    keep_rows: Option<&[usize]>,
    cols: &[usize],
    caps: &Caps,
    oracle_calls: &AtomicU64,
) -> Result<Vec<Rat>> {
    let m_r = keep_rows.map(|k| k.len()).unwrap_or(total_rows);
    let n1 = cols.len();
    let pinned_u: std::collections::BTreeSet<usize> = match keep_rows {
        Some(keep) => {
            let keep: std::collections::BTreeSet<usize> = keep.iter().copied().collect();
            (0..total_rows).filter(|i| !keep.contains(i)).collect()
        }
        None => Default::default(),
    };
    let col_set: std::collections::BTreeSet<usize> = cols.iter().copied().collect();
    let pinned_v: std::collections::BTreeSet<usize> = (0..phi.v_count()).filter(|j| !col_set.contains(j)).collect();

    // Probe grid u_a = a+1, v_b = b+1; p = 1/(1+u), q = 1/(1+v).
    let us: Vec<Rat> = (1..=m_r as i64 + 1).map(rint).collect();
    let vs: Vec<Rat> = (1..=n1 as i64 + 1).map(rint).collect();
    let mut q_vals = vec![vec![Rat::zero(); n1 + 1]; m_r + 1];
    for (ai, u) in us.iter().enumerate() {
        for (bi, v) in vs.iter().enumerate() {
            let asg = QuasiSymmetricAssignment {
                p: Rat::one() / (Rat::one() + u),
                q: Rat::one() / (Rat::one() + v),
                pinned_u: pinned_u.clone(),
                pinned_v: pinned_v.clone(),
            };
            oracle_calls.fetch_add(1, Ordering::Relaxed);
            let e = super::pp2cnf_expectation(phi, &asg, caps)?;
            q_vals[ai][bi] = (Rat::one() + u).pow(m_r as i32) * (Rat::one() + v).pow(n1 as i32) * e;
        }
    }
    let b_grid = grid_interpolate(&us, &vs, &q_vals);

    // a_{lk} = sum_{l' >= l} C(l', l) (-1)^{l'-l} b_{l'k}, then v_k = sum_{l>=1} a_{lk}/l.
    let mut v_out = Vec::with_capacity(n1 + 1);
    for k in 0..=n1 {
        let mut vk = Rat::zero();
        for l in 1..=m_r {
            let mut a_lk = Rat::zero();
            for lp in l..=m_r {
                let sign = if (lp - l) % 2 == 0 { 1 } else { -1 };
                a_lk += Rat::from_integer(binomial(lp, l) * BigInt::from(sign)) * &b_grid[lp][k];
            }
            vk += a_lk / rint(l as i64);
        }
        v_out.push(vk);
    }
    Ok(v_out)
}

/// v_k of a matrix by direct enumeration; this is the good-matrix formula and
/// is only valid when the matrix's first row dominates every other row.
pub fn vk_good_matrix(mat: &BitMatrix, caps: &Caps) -> Result<Vec<Rat>> {
    let poly = SubsetPolynomial::of_matrix(mat, caps.subset_polynomial_cols)?;
    Ok(poly.v_values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::audit_example_dataset;
    use crate::model::LinearModel;

    fn ones(n: usize) -> Instance {
        Instance::all_ones(n)
    }

    #[test]
    fn single_row_dataset_scores_zero() {
        let data = EmpiricalDataset::unweighted(vec![vec![1, 1, 1]]).unwrap();
        let y = vec![rint(5)];
        let caps = Caps::default();
        for f in 0..3 {
            assert_eq!(shap_direct_feature(&data, &y, f, &ones(3), &caps).unwrap(), rint(0));
        }
    }

    #[test]
    fn sum_rule_on_audit_dataset() {
        let data = audit_example_dataset();
        let model = Model::Linear(LinearModel::binary(rint(0), vec![rint(2), rint(3)]));
        let caps = Caps::default();
        let report = report_direct(&data, &model, &ones(2), &caps).unwrap();
        let total: Rat = report.rational_scores().unwrap().into_iter().cloned().sum();
        // F(1,1) - E[F]: E = (2*0 + 1*3 + 1*2 + 2*5)/6 = 15/6
        assert_eq!(total, rint(5) - crate::num::rat(15, 6));
    }

    #[test]
    fn pipeline_vk_matches_enumeration() {
        let data = audit_example_dataset();
        let caps = Caps::default();
        let norm_mat = BitMatrix::from_dataset(&data).unwrap();
        let phi = pp2cnf_of_matrix(&norm_mat);
        let calls = AtomicU64::new(0);
        // All rows, both columns.
        let via = vk_via_probes(&phi, 6, None, &[0, 1], &caps, &calls).unwrap();
        let direct = vk_good_matrix(&norm_mat, &caps).unwrap();
        assert_eq!(via, direct);
        assert!(calls.load(Ordering::Relaxed) > 0);
    }

    #[test]
    fn pipeline_equals_direct_on_audit_dataset() {
        let data = audit_example_dataset();
        let model = Model::Linear(LinearModel::binary(rint(1), vec![rint(-2), rint(7)]));
        let caps = Caps::default();
        let a = report_direct(&data, &model, &ones(2), &caps).unwrap();
        let b = report_via_pp2cnf(&data, &model, &ones(2), &caps).unwrap();
        assert_eq!(a.rational_scores().unwrap(), b.rational_scores().unwrap());
    }
}

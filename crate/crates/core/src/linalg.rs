//! Exact polynomial interpolation and dense linear solving over the rationals.
//!
//! Interpolation goes through Newton divided differences rather than a
//! Vandermonde inversion; the two are algebraically identical and the Newton
//! table is O(n^2) with no pivot bookkeeping.

use crate::error::{Error, Result};
use crate::num::Rat;
use num_traits::Zero;

/// Interpolate the unique polynomial of degree < `xs.len()` through the given
/// points and return its power-basis coefficients `c[0] + c[1] x + ...`.
///
/// The probe points must be pairwise distinct.
pub fn newton_interpolate(xs: &[Rat], ys: &[Rat]) -> Vec<Rat> {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let n = xs.len();

    // Divided-difference table, updated in place.
    let mut dd: Vec<Rat> = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = &dd[i] - &dd[i - 1];
            let den = &xs[i] - &xs[i - j];
            debug_assert!(!den.is_zero(), "probe points must be distinct");
            dd[i] = num / den;
        }
    }

    // Expand the Newton form into the power basis: maintain the running
    // product basis(x) = prod_{j<i} (x - x_j) as coefficients.
    let mut coeffs = vec![Rat::zero(); n];
    let mut basis = vec![Rat::zero(); n];
    basis[0] = Rat::from_integer(1.into());
    let mut basis_len = 1usize;
    for (i, c) in dd.iter().enumerate() {
        for (k, b) in basis.iter().take(basis_len).enumerate() {
            coeffs[k] += c * b;
        }
        if i + 1 < n {
            // basis *= (x - xs[i]): new_b[k] = b[k-1] - xs[i] * b[k]
            basis[basis_len] = basis[basis_len - 1].clone();
            for k in (1..basis_len).rev() {
                basis[k] = basis[k - 1].clone() - &xs[i] * &basis[k];
            }
            basis[0] = -(&xs[i] * &basis[0]);
            basis_len += 1;
        }
    }
    coeffs
}

/// Evaluate a power-basis polynomial by Horner's rule.
pub fn poly_eval(coeffs: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Solve the square system `a · x = b` exactly by Gaussian elimination with
/// partial pivoting. Errors if the matrix is singular, which doubles as the
/// runtime non-singularity assertion for the reduction systems.
pub fn solve_exact(a: &[Vec<Rat>], b: &[Rat]) -> Result<Vec<Rat>> {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n));
    assert_eq!(b.len(), n);

    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut rhs: Vec<Rat> = b.to_vec();

    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::SingularSystem)?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            if m[row][col].is_zero() {
                continue;
            }
            let factor = &m[row][col] / &m[col][col];
            for k in col..n {
                let t = &factor * &m[col][k];
                m[row][k] -= t;
            }
            let t = &factor * &rhs[col];
            rhs[row] -= t;
        }
    }

    let mut x = vec![Rat::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for col in row + 1..n {
            acc -= &m[row][col] * &x[col];
        }
        x[row] = acc / &m[row][row];
    }
    Ok(x)
}

/// Interpolate a bivariate polynomial `sum b[l][k] u^l v^k` of degree
/// (`us.len()-1`, `vs.len()-1`) from its values on the probe grid
/// `vals[i][j] = Q(us[i], vs[j])`.
///
/// The grid system is the Kronecker product of two Vandermonde matrices, so
/// it splits into one interpolation per row followed by one per column.
pub fn grid_interpolate(us: &[Rat], vs: &[Rat], vals: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let nu = us.len();
    let nv = vs.len();
    assert_eq!(vals.len(), nu);
    assert!(vals.iter().all(|row| row.len() == nv));

    // First pass: for each fixed u_i, coefficients in v.
    let row_coeffs: Vec<Vec<Rat>> = vals.iter().map(|row| newton_interpolate(vs, row)).collect();

    // Second pass: for each v-power k, coefficients in u.
    let mut out = vec![vec![Rat::zero(); nv]; nu];
    for k in 0..nv {
        let column: Vec<Rat> = row_coeffs.iter().map(|rc| rc[k].clone()).collect();
        let cu = newton_interpolate(us, &column);
        for (l, c) in cu.into_iter().enumerate() {
            out[l][k] = c;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, rint};

    #[test]
    fn interpolates_power_basis() {
        // p(x) = 2 - x + 3x^2
        let p = |x: &Rat| rint(2) - x + rint(3) * x * x;
        let xs: Vec<Rat> = (1..=3).map(rint).collect();
        let ys: Vec<Rat> = xs.iter().map(p).collect();
        let c = newton_interpolate(&xs, &ys);
        assert_eq!(c, vec![rint(2), rint(-1), rint(3)]);
        assert_eq!(poly_eval(&c, &rat(7, 2)), p(&rat(7, 2)));
    }

    #[test]
    fn interpolates_degree_zero() {
        let c = newton_interpolate(&[rint(1)], &[rat(5, 7)]);
        assert_eq!(c, vec![rat(5, 7)]);
    }

    #[test]
    fn solves_small_system() {
        let a = vec![vec![rint(2), rint(1)], vec![rint(1), rint(3)]];
        let b = vec![rint(5), rint(10)];
        let x = solve_exact(&a, &b).unwrap();
        assert_eq!(x, vec![rint(1), rint(3)]);
    }

    #[test]
    fn rejects_singular() {
        let a = vec![vec![rint(1), rint(2)], vec![rint(2), rint(4)]];
        let b = vec![rint(1), rint(2)];
        assert!(matches!(solve_exact(&a, &b), Err(Error::SingularSystem)));
    }

    #[test]
    fn grid_recovers_bivariate() {
        // q(u,v) = 1 + 2uv + u^2 v
        let q = |u: &Rat, v: &Rat| rint(1) + rint(2) * u * v + u * u * v;
        let us: Vec<Rat> = (1..=3).map(rint).collect();
        let vs: Vec<Rat> = (1..=2).map(rint).collect();
        let vals: Vec<Vec<Rat>> = us.iter().map(|u| vs.iter().map(|v| q(u, v)).collect()).collect();
        let b = grid_interpolate(&us, &vs, &vals);
        assert_eq!(b[0][0], rint(1));
        assert_eq!(b[1][1], rint(2));
        assert_eq!(b[2][1], rint(1));
        assert_eq!(b[1][0], rint(0));
    }
}

//! Exact dense linear algebra over [`Rational`].

#![allow(clippy::needless_range_loop)]

use num_traits::Zero;

use crate::rational::Rational;

/// Solves `a · x = rhs` by Gauss-Jordan elimination. Returns `None` when `a`
/// is singular. `a` must be square with `rhs.len()` rows.
pub fn solve(mut a: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rhs.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = a[col][col].recip();
        for c in col..n {
            a[col][c] = &a[col][c] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] -= delta;
        }
    }
    Some(rhs)
}

/// Finds some solution of a possibly rectangular system `a · x = rhs`, with
/// every free variable set to zero. Returns `None` when the system is
/// inconsistent.
pub fn solve_any(mut a: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let rows = rhs.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        rhs.swap(r, p);
        let inv = a[r][col].recip();
        for c in col..cols {
            a[r][c] = &a[r][c] * &inv;
        }
        rhs[r] = &rhs[r] * &inv;
        for i in 0..rows {
            if i == r || a[i][col].is_zero() {
                continue;
            }
            let factor = a[i][col].clone();
            for c in col..cols {
                let delta = &factor * &a[r][c];
                a[i][c] -= delta;
            }
            let delta = &factor * &rhs[r];
            rhs[i] -= delta;
        }
        pivots.push(col);
        r += 1;
        if r == rows {
            break;
        }
    }
    if rhs[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = rhs[i].clone();
    }
    Some(x)
}

/// Determinant by fraction-exact elimination.
pub fn determinant(mut a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    let mut det = Rational::from_integer(1.into());
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &a[col][col];
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

//! Minimal dense LU routines with partial pivoting, enough for stationary
//! solves and determinants of row-stochastic matrices up to 2^N states.
//! Pivot selection breaks ties on the lowest row index so every result is
//! deterministic.

/// Factors `a` (row-major, n x n) in place. Returns the row permutation's
/// sign, or `None` when an exactly zero pivot makes the matrix singular.
fn lu_factor(a: &mut [f64], n: usize) -> Option<f64> {
    let mut sign = 1.0;
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = row;
            }
        }
        if pivot_abs == 0.0 {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            sign = -sign;
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            a[row * n + col] = factor;
            for k in col + 1..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
        }
    }
    Some(sign)
}

/// Determinant of a row-major n x n matrix; 0.0 when exactly singular.
pub(crate) fn determinant(mut a: Vec<f64>, n: usize) -> f64 {
    match lu_factor(&mut a, n) {
        None => 0.0,
        Some(sign) => {
            let mut det = sign;
            for i in 0..n {
                det *= a[i * n + i];
            }
            det
        }
    }
}

/// Determinant split into sign and ln|det| so ratios of determinants stay
/// finite when the raw values under- or overflow.
pub(crate) fn sign_log_determinant(mut a: Vec<f64>, n: usize) -> (f64, f64) {
    match lu_factor(&mut a, n) {
        None => (0.0, f64::NEG_INFINITY),
        Some(mut sign) => {
            let mut log = 0.0;
            for i in 0..n {
                let d = a[i * n + i];
                if d < 0.0 {
                    sign = -sign;
                }
                log += d.abs().ln();
            }
            (sign, log)
        }
    }
}

/// Solves `A x = b` for square row-major `A`. The factorization destroys the
/// inputs; returns `None` on an exactly singular pivot.
pub(crate) fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    // Factor with the permutation applied to b alongside.
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = row;
            }
        }
        if pivot_abs == 0.0 {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor != 0.0 {
                for k in col + 1..n {
                    a[row * n + k] -= factor * a[col * n + k];
                }
                b[row] -= factor * b[col];
            }
            a[row * n + col] = 0.0;
        }
    }
    for col in (0..n).rev() {
        let mut x = b[col];
        for k in col + 1..n {
            x -= a[col * n + k] * b[k];
        }
        b[col] = x / a[col * n + col];
    }
    Some(b)
}

//! Thomas algorithm for tridiagonal systems.

/// Solves `A x = rhs` in place, where `A` has sub-diagonal `lower`, diagonal
/// `diag` and super-diagonal `upper` (all of length `n`; `lower[0]` and
/// `upper[n - 1]` are ignored).
///
/// No pivoting: the caller guarantees diagonal dominance, which holds for
/// every `I - dt * A` built from a sign-patterned diffusion operator.
/// `scratch` must have length `n`.
pub fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n && scratch.len() == n);
    if n == 0 {
        return;
    }
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

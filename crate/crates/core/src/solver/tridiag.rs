use crate::error::{Result, YamabeError};
use crate::scalar::Real;

/// Thomas algorithm for `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
/// `a[0]` and `c[n-1]` are ignored. Fails on a vanishing pivot; the systems
/// built by the stepper are diagonally dominant, so this signals a broken
/// assembly rather than bad luck.
pub fn solve_tridiagonal<T: Real>(a: &[T], b: &[T], c: &[T], d: &[T]) -> Result<Vec<T>> {
    let n = b.len();
    assert!(a.len() == n && c.len() == n && d.len() == n, "band lengths differ");
    let tiny = T::epsilon() * T::lit(1e-3);
    let mut cp = vec![T::zero(); n];
    let mut dp = vec![T::zero(); n];
    let mut pivot = b[0];
    if !(pivot.abs() > tiny) {
        return Err(YamabeError::SingularSystem { row: 0 });
    }
    cp[0] = c[0] / pivot;
    dp[0] = d[0] / pivot;
    for i in 1..n {
        pivot = b[i] - a[i] * cp[i - 1];
        if !(pivot.abs() > tiny * b[i].abs().max(T::one())) {
            return Err(YamabeError::SingularSystem { row: i });
        }
        cp[i] = if i + 1 < n { c[i] / pivot } else { T::zero() };
        dp[i] = (d[i] - a[i] * dp[i - 1]) / pivot;
    }
    let mut x = dp;
    for i in (0..n - 1).rev() {
        x[i] = x[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_poisson_rows() {
        // -x_{i-1} + 2 x_i - x_{i+1} = 0 with x_0 = 0, x_4 = 4
        let a = [0.0, -1.0, -1.0, -1.0, 0.0];
        let b = [1.0, 2.0, 2.0, 2.0, 1.0];
        let c = [0.0, -1.0, -1.0, -1.0, 0.0];
        let d = [0.0, 0.0, 0.0, 0.0, 4.0];
        let x = solve_tridiagonal(&a, &b, &c, &d).unwrap();
        for (i, v) in x.iter().enumerate() {
            assert!((v - i as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_pivot() {
        let a = [0.0, 1.0];
        let b = [1.0, 1.0];
        let c = [1.0, 0.0];
        let d = [1.0, 1.0];
        assert_eq!(
            solve_tridiagonal(&a, &b, &c, &d),
            Err(YamabeError::SingularSystem { row: 1 })
        );
    }
}

//! Dense complex matrix exponential by scaling and squaring.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Norm to which the matrix is scaled before the Taylor polynomial.
const SCALED_NORM: f64 = 1.0;
/// Taylor degree; the truncated tail at unit norm is below 3e-15.
const DEGREE: usize = 16;

/// Maximum absolute column sum.
pub fn norm_1(a: &Array2<Complex64>) -> f64 {
    a.columns().into_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// exp(A) for a square complex matrix. The degree-16 Taylor polynomial of
/// A/2ˢ (with ‖A/2ˢ‖₁ ≤ 1) is evaluated by Paterson-Stockmeyer in powers of
/// (A/2ˢ)⁴, then squared s times.
pub fn expm(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let (n, m) = a.dim();
    if n != m {
        return Err(Error::MatrixExponential(format!("matrix is {n}x{m}, not square")));
    }
    let norm = norm_1(a);
    if !norm.is_finite() {
        return Err(Error::MatrixExponential("matrix has non-finite entries".into()));
    }
    let squarings = if norm > SCALED_NORM { (norm / SCALED_NORM).log2().ceil() as i32 } else { 0 };
    if squarings > 60 {
        return Err(Error::MatrixExponential(format!("norm {norm:.3e} needs too many squarings")));
    }
    let b = a.mapv(|z| z / 2f64.powi(squarings));

    let mut coef = [1.0; DEGREE + 1];
    for k in 1..=DEGREE {
        coef[k] = coef[k - 1] / k as f64;
    }
    let b2 = b.dot(&b);
    let b3 = b2.dot(&b);
    let b4 = b2.dot(&b2);
    let block = |i: usize| -> Array2<Complex64> {
        let c = &coef[4 * i..4 * i + 4];
        let mut out = &b * c[1] + &b2 * c[2] + &b3 * c[3];
        out.diag_mut().iter_mut().for_each(|z| *z += c[0]);
        out
    };
    // p = B0 + B⁴(B1 + B⁴(B2 + B⁴(B3 + c16 B⁴)))
    let mut r = &b4 * coef[16] + block(3);
    for i in (0..3).rev() {
        r = b4.dot(&r) + block(i);
    }
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::MatrixExponential("result has non-finite entries".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rotation() {
        let mut a = Array2::<Complex64>::zeros((3, 3));
        a[[0, 0]] = Complex64::new(0.5, 0.0);
        a[[1, 1]] = Complex64::new(0.0, 7.0);
        a[[2, 2]] = Complex64::new(-3.0, 1.0);
        let e = expm(&a).unwrap();
        for i in 0..3 {
            assert!((e[[i, i]] - a[[i, i]].exp()).norm() < 1e-13 * a[[i, i]].exp().norm().max(1.0));
        }
        // exp([[0, θ], [−θ, 0]]) is a rotation by θ
        let theta = 5.3;
        let mut r = Array2::<Complex64>::zeros((2, 2));
        r[[0, 1]] = Complex64::new(theta, 0.0);
        r[[1, 0]] = Complex64::new(-theta, 0.0);
        let e = expm(&r).unwrap();
        assert!((e[[0, 0]].re - theta.cos()).abs() < 1e-13);
        assert!((e[[0, 1]].re - theta.sin()).abs() < 1e-13);
    }

    #[test]
    fn nilpotent_is_exact() {
        let mut a = Array2::<Complex64>::zeros((3, 3));
        a[[0, 1]] = Complex64::new(2.0, 0.0);
        a[[1, 2]] = Complex64::new(0.0, 3.0);
        let e = expm(&a).unwrap();
        assert!((e[[0, 2]] - Complex64::new(0.0, 3.0)).norm() < 1e-13);
        assert!((e[[0, 1]] - Complex64::new(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(expm(&Array2::<Complex64>::zeros((2, 3))).is_err());
        let mut a = Array2::<Complex64>::zeros((2, 2));
        a[[0, 0]] = Complex64::new(f64::NAN, 0.0);
        assert!(expm(&a).is_err());
    }
}

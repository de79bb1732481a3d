//! Piecewise-polynomial interpolation helpers.

/// Locates the interval [xs[i], xs[i+1]] containing `x` (clamped to the ends).
pub(crate) fn locate(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    if x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    }
}

/// Cubic Hermite interpolation on [0, h] from end values and slopes.
pub(crate) fn cubic_hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, s: f64) -> f64 {
    let t = s / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Quintic Hermite segment through (value, first, second derivative) at both
/// ends; returns the value and its first three derivatives at offset `s`.
pub(crate) fn quintic_hermite(left: [f64; 3], right: [f64; 3], h: f64, s: f64) -> [f64; 4] {
    let dy = right[0] - left[0];
    let d0 = h * left[1];
    let d1 = h * right[1];
    let s0 = h * h * left[2];
    let s1 = h * h * right[2];
    let c = [
        left[0],
        d0,
        0.5 * s0,
        10.0 * dy - 6.0 * d0 - 4.0 * d1 - 1.5 * s0 + 0.5 * s1,
        -15.0 * dy + 8.0 * d0 + 7.0 * d1 + 1.5 * s0 - s1,
        6.0 * dy - 3.0 * d0 - 3.0 * d1 - 0.5 * s0 + 0.5 * s1,
    ];
    let t = s / h;
    let p = ((((c[5] * t + c[4]) * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
    let p1 = (((5.0 * c[5] * t + 4.0 * c[4]) * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
    let p2 = ((20.0 * c[5] * t + 12.0 * c[4]) * t + 6.0 * c[3]) * t + 2.0 * c[2];
    let p3 = (60.0 * c[5] * t + 24.0 * c[4]) * t + 6.0 * c[3];
    [p, p1 / h, p2 / (h * h), p3 / (h * h * h)]
}

/// Natural cubic spline through (xs, ys); returns first and second
/// derivatives of the spline at the nodes.
pub(crate) fn natural_spline_derivatives(xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len();
    let mut m = vec![0.0; n];
    if n > 2 {
        // tridiagonal system for interior second derivatives (Thomas algorithm)
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 1..n - 1 {
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            upper[i] = h[i];
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
        }
        for i in 2..n - 1 {
            let w = h[i - 1] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (1..n - 1).rev() {
            let next = if i + 1 < n - 1 { m[i + 1] } else { 0.0 };
            m[i] = (rhs[i] - upper[i] * next) / diag[i];
        }
    }
    let mut d = vec![0.0; n];
    for i in 0..n - 1 {
        let h = xs[i + 1] - xs[i];
        d[i] = (ys[i + 1] - ys[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
    }
    let h = xs[n - 1] - xs[n - 2];
    d[n - 1] = (ys[n - 1] - ys[n - 2]) / h + h * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
    (d, m)
}

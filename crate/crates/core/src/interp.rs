//! Small interpolation and finite-difference kernels.

/// Lagrange weights of a `width`-point stencil for resampling a uniform grid.
///
/// Samples outside `0..n` are treated as zero, so the stencil never shifts
/// near the edges.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub start: isize,
    pub weights: Vec<f64>,
}

/// Stencil that evaluates at fractional index `s` (grid units).
pub(crate) fn lagrange_stencil(s: f64, width: usize, n: usize) -> Option<Stencil> {
    let half = (width / 2) as f64;
    if !s.is_finite() || s < -half || s > (n - 1) as f64 + half {
        return None;
    }
    let base = s.floor();
    let frac = s - base;
    let start = base as isize - (width as isize - 1) / 2;
    if frac == 0.0 {
        let mut weights = vec![0.0; width];
        weights[(width - 1) / 2] = 1.0;
        return Some(Stencil { start, weights });
    }
    let nodes: Vec<f64> = (0..width).map(|j| (start + j as isize) as f64 - s).collect();
    let mut weights = vec![0.0; width];
    for j in 0..width {
        let mut w = 1.0;
        for k in 0..width {
            if k != j {
                w *= (0.0 - nodes[k]) / (nodes[j] - nodes[k]);
            }
        }
        weights[j] = w;
    }
    Some(Stencil { start, weights })
}

/// Finite-difference weights (Fornberg) for derivatives `0..=order` at `x0`.
///
/// Returns `w[d][j]`, the weight of sample `j` in the `d`-th derivative.
pub(crate) fn fornberg(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Index window of `len` points around `i` kept inside `0..n`.
pub(crate) fn window(i: usize, len: usize, n: usize) -> std::ops::Range<usize> {
    let len = len.min(n);
    let start = i.saturating_sub(len / 2).min(n - len);
    start..start + len
}

/// Quintic Hermite interpolation on one interval from values and two derivatives.
///
/// Returns the value and first derivative at `t`.
pub(crate) fn quintic_hermite(t0: f64, t1: f64, left: [f64; 3], right: [f64; 3], t: f64) -> (f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let b = [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
    ];
    let db = [
        -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
        1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
        s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
        1.5 * s2 - 4.0 * s3 + 2.5 * s4,
        -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
        30.0 * s2 - 60.0 * s3 + 30.0 * s4,
    ];
    let coef = [left[0], h * left[1], h * h * left[2], h * h * right[2], h * right[1], right[0]];
    let value: f64 = coef.iter().zip(&b).map(|(c, b)| c * b).sum();
    let deriv: f64 = coef.iter().zip(&db).map(|(c, b)| c * b).sum::<f64>() / h;
    (value, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_exact_on_polynomials() {
        let n = 40;
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64;
                1.0 + 0.1 * x - 0.01 * x * x + 1e-4 * x.powi(5)
            })
            .collect();
        let st = lagrange_stencil(17.3, 10, n).unwrap();
        let v: f64 = st.weights.iter().enumerate().map(|(j, w)| w * f[(st.start + j as isize) as usize]).sum();
        let x = 17.3f64;
        assert!((v - (1.0 + 0.1 * x - 0.01 * x * x + 1e-4 * x.powi(5))).abs() < 1e-9);
        assert!(lagrange_stencil(-6.0, 10, n).is_none());
        assert!(lagrange_stencil(46.0, 10, n).is_none());
    }

    #[test]
    fn fornberg_central_second_derivative() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg(0.0, &xs, 2);
        let expect = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[2].iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let w = fornberg(0.0, &xs, 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[1].iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn quintic_hermite_exact_on_quintics() {
        let p = |t: f64| {
            [2.0 - t + 0.5 * t.powi(3) - 0.2 * t.powi(5), -1.0 + 1.5 * t * t - t.powi(4), 3.0 * t - 4.0 * t.powi(3)]
        };
        let (t0, t1) = (0.3, 1.1);
        for &t in &[0.3, 0.5, 0.77, 1.1] {
            let (v, d) = quintic_hermite(t0, t1, p(t0), p(t1), t);
            assert!((v - p(t)[0]).abs() < 1e-13);
            assert!((d - p(t)[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn window_clamps() {
        assert_eq!(window(0, 5, 10), 0..5);
        assert_eq!(window(9, 5, 10), 5..10);
        assert_eq!(window(5, 5, 10), 3..8);
    }
}

//! Product integration against the Abel kernel `d^β`, β ∈ (-1, 0], where `d`
//! is the distance from the singular endpoint.
//!
//! The integrand is replaced by its piecewise-linear interpolant on the nodes
//! and integrated against the kernel exactly, cell by cell.

/// `∫_0^L d^β v(d) dd` with `v` piecewise linear through `(d[j], v[j])`.
///
/// `d` must start at 0 and increase strictly.
pub(crate) fn abel_integral(d: &[f64], v: &[f64], beta: f64) -> f64 {
    debug_assert_eq!(d.len(), v.len());
    debug_assert!(beta > -1.0);
    let e1 = beta + 1.0;
    let e2 = beta + 2.0;
    let mut sum = 0.0;
    let mut p1_lo = d[0].powf(e1);
    let mut p2_lo = d[0].powf(e2);
    for j in 0..d.len() - 1 {
        let (d0, d1) = (d[j], d[j + 1]);
        let p1_hi = d1.powf(e1);
        let p2_hi = d1.powf(e2);
        // ∫ d^β dd and ∫ d^β (d - d0) dd over the cell
        let m0 = (p1_hi - p1_lo) / e1;
        let m1 = (p2_hi - p2_lo) / e2 - d0 * m0;
        let slope = (v[j + 1] - v[j]) / (d1 - d0);
        sum += v[j] * m0 + slope * m1;
        p1_lo = p1_hi;
        p2_lo = p2_hi;
    }
    sum
}

/// `∫_0^L d^β v'(d) dd` with `v` piecewise linear, i.e. `v'` constant per cell.
pub(crate) fn abel_slope_integral(d: &[f64], v: &[f64], beta: f64) -> f64 {
    debug_assert_eq!(d.len(), v.len());
    let e1 = beta + 1.0;
    let mut sum = 0.0;
    let mut p_lo = d[0].powf(e1);
    for j in 0..d.len() - 1 {
        let p_hi = d[j + 1].powf(e1);
        let slope = (v[j + 1] - v[j]) / (d[j + 1] - d[j]);
        sum += slope * (p_hi - p_lo) / e1;
        p_lo = p_hi;
    }
    sum
}

/// Distances `0 = d_0 < … < d_m = len`, clustered toward 0 as `(j/m)^grading`.
pub(crate) fn graded_distances(len: f64, m: usize, grading: f64) -> Vec<f64> {
    (0..=m)
        .map(|j| {
            if j == m {
                len
            } else {
                len * (j as f64 / m as f64).powf(grading)
            }
        })
        .collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss–Legendre rule: `panels` equal panels of `order` points each.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let c = lo + h * (k as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            sum += wi * f(c + 0.5 * h * xi);
        }
    }
    0.5 * h * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn abel_integral_is_exact_for_linear_data() {
        // ∫_0^2 d^{-1/2} (1 + 3d) dd = 2√2 + 3 * (2/3) 2^{3/2}
        let d = graded_distances(2.0, 7, 2.0);
        let v: Vec<f64> = d.iter().map(|d| 1.0 + 3.0 * d).collect();
        let exact = 2.0 * 2f64.sqrt() + 2.0 * 2f64.powf(1.5);
        assert!((abel_integral(&d, &v, -0.5) - exact).abs() < 1e-13);
        // ∫_0^2 d^{-1/2} * 3 dd = 6√2
        assert!((abel_slope_integral(&d, &v, -0.5) - 6.0 * 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn composite_rule() {
        let got = integrate(|t| t.sin(), 0.0, std::f64::consts::PI, 4, 8);
        assert!((got - 2.0).abs() < 1e-13);
    }
}

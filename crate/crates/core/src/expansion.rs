//! Truncated moment expansions of the left and right Riemann–Liouville
//! derivatives.
//!
//! With `s = t - a` the left derivative is approximated by
//!
//! ```text
//! A s^{-α} x(t) + B s^{1-α} ẋ(t) - Σ_{p=2}^{K} C_p s^{1-p-α} V_p(t)
//! ```
//!
//! where the moments `V_p(t) = (1-p) ∫_a^t (τ-a)^{p-2} x(τ) dτ` solve
//! `V̇_p = (1-p)(t-a)^{p-2} x`, `V_p(a) = 0`. The right derivative is the mirror
//! image with `σ = b - t` and moments `W_p` that vanish at `b`.
//!
//! The truncation order is called `K` throughout.

use crate::error::{domain, Result};
use crate::fracops::{gamma, gamma_signed, GridFn, Order, Signal};

/// Coefficients `A(α, K)`, `B(α, K)` and `C(α, p)` for `p = 2..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoeffs {
    order: Order,
    k: usize,
    a: f64,
    b: f64,
    c: Vec<f64>,
    inv_gamma_one_minus: f64,
}

impl ExpansionCoeffs {
    pub fn new(order: Order, k: usize) -> Result<Self> {
        if k < 2 {
            return domain(format!("truncation order must be at least 2, got {k}"));
        }
        let alpha = order.alpha();
        let g_alpha = gamma(alpha)?;
        let g_alpha_m1 = gamma_signed(alpha - 1.0)?;
        let g_1ma = gamma(1.0 - alpha)?;
        let g_2ma = gamma(2.0 - alpha)?;

        // ratio[p] = Γ(p - 1 + α) / (p - 1)!, built by recurrence from ratio[1] = Γ(α)
        let mut ratio = vec![0.0; k + 1];
        ratio[1] = g_alpha;
        for p in 1..k {
            ratio[p + 1] = ratio[p] * (p as f64 - 1.0 + alpha) / p as f64;
        }

        let sum_a: f64 = (2..=k).map(|p| ratio[p] / g_alpha).sum();
        // Γ(p - 1 + α) / p! = ratio[p] / p
        let sum_b: f64 = (1..=k).map(|p| ratio[p] / (p as f64 * g_alpha_m1)).sum();
        let c = (2..=k).map(|p| ratio[p] / (g_2ma * g_alpha_m1)).collect();

        Ok(Self {
            order,
            k,
            a: (1.0 + sum_a) / g_1ma,
            b: (1.0 + sum_b) / g_2ma,
            c,
            inv_gamma_one_minus: 1.0 / g_1ma,
        })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// Truncation order `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `C(α, p)` for `2 <= p <= K`.
    pub fn c(&self, p: usize) -> f64 {
        assert!((2..=self.k).contains(&p), "p = {p} outside 2..={}", self.k);
        self.c[p - 2]
    }

    /// All `C(α, p)`, `p = 2..=K`.
    pub fn c_all(&self) -> &[f64] {
        &self.c
    }

    /// Number of auxiliary moments, `K - 1`.
    pub fn n_aux(&self) -> usize {
        self.k - 1
    }

    /// `A s^{-α} x - Σ C_p s^{1-p-α} m_p`: every term of the expansion except
    /// the one in `ẋ`. `moments` holds `m_2..m_K` (the `V_p` or `W_p`).
    pub fn memory_term(&self, s: f64, x: f64, moments: &[f64]) -> f64 {
        let alpha = self.order.alpha();
        let mut acc = self.a * s.powf(-alpha) * x;
        let mut pow = s.powf(-1.0 - alpha); // s^{1-p-α} at p = 2
        for (c, m) in self.c.iter().zip(moments) {
            acc -= c * pow * m;
            pow /= s;
        }
        acc
    }

    /// `B s^{1-α}`, the weight of `ẋ`.
    pub fn slope_weight(&self, s: f64) -> f64 {
        self.b * s.powf(1.0 - self.order.alpha())
    }

    /// `(1-p) s^{p-2} x` for `p = 2..=K`, the moment rates.
    pub fn moment_rates(&self, s: f64, x: f64, out: &mut [f64]) {
        let mut pow = 1.0;
        for (p, o) in (2..=self.k).zip(out.iter_mut()) {
            *o = (1.0 - p as f64) * pow * x;
            pow *= s;
        }
    }

    /// Correction turning a Riemann–Liouville value into a Caputo value:
    /// `x(a) s^{-α} / Γ(1-α)`.
    pub fn caputo_shift(&self, s: f64, x_end: f64) -> f64 {
        x_end * s.powf(-self.order.alpha()) * self.inv_gamma_one_minus
    }
}

/// See [`ExpansionCoeffs::new`].
pub fn coeffs(order: Order, k: usize) -> Result<ExpansionCoeffs> {
    ExpansionCoeffs::new(order, k)
}

/// Auxiliary moments at one point: `V_2..V_K` (left) or `W_2..W_K` (right).
#[derive(Debug, Clone, PartialEq)]
pub struct AuxState {
    pub moments: Vec<f64>,
}

/// Default number of RK4 steps for closure inputs.
pub const DEFAULT_AUX_STEPS: usize = 2000;

/// Integration nodes from the memory endpoint (distance 0) to distance `len`.
fn aux_nodes<S: Signal + ?Sized>(x: &S, len: f64, steps: usize, to_time: impl Fn(f64) -> f64) -> Vec<f64> {
    match x.nodes() {
        Some(nodes) => {
            let tol = 1e-12 * (1.0 + len);
            let origin = to_time(0.0);
            let mut d: Vec<f64> = nodes
                .iter()
                .map(|&g| (g - origin).abs())
                .filter(|&d| d > tol && d < len - tol)
                .collect();
            d.push(0.0);
            d.push(len);
            d.sort_by(f64::total_cmp);
            d
        }
        None => (0..=steps)
            .map(|i| if i == steps { len } else { len * i as f64 / steps as f64 })
            .collect(),
    }
}

/// Moments at distance `len` from the memory endpoint by classical RK4 on
/// `m_p' = (1-p) d^{p-2} x(to_time(d))`, `m_p(0) = 0`.
fn integrate_moments<S: Signal + ?Sized>(
    x: &S,
    k: usize,
    len: f64,
    steps: usize,
    to_time: impl Fn(f64) -> f64 + Copy,
) -> Vec<f64> {
    let d = aux_nodes(x, len, steps, to_time);
    let mut m = vec![0.0; k - 1];
    let rate = |dist: f64, p: usize| (1.0 - p as f64) * dist.powi(p as i32 - 2) * x.value(to_time(dist));
    for w in d.windows(2) {
        let (d0, d1) = (w[0], w[1]);
        let h = d1 - d0;
        let mid = d0 + 0.5 * h;
        // the right-hand side does not depend on the moments, so the four
        // RK4 stages collapse to Simpson weights
        for (i, mp) in m.iter_mut().enumerate() {
            let p = i + 2;
            *mp += h / 6.0 * (rate(d0, p) + 4.0 * rate(mid, p) + rate(d1, p));
        }
    }
    m
}

/// `V_2(t)..V_K(t)` for the left expansion from `a`.
pub fn aux_left<S: Signal + ?Sized>(x: &S, k: usize, a: f64, t: f64, steps: usize) -> Result<AuxState> {
    if !(t > a) {
        return domain(format!("left moments need t > a (t = {t}, a = {a})"));
    }
    Ok(AuxState {
        moments: integrate_moments(x, k, t - a, steps, move |d| a + d),
    })
}

/// `W_2(t)..W_K(t)` for the right expansion ending at `b`.
pub fn aux_right<S: Signal + ?Sized>(x: &S, k: usize, b: f64, t: f64, steps: usize) -> Result<AuxState> {
    if !(t < b) {
        return domain(format!("right moments need t < b (t = {t}, b = {b})"));
    }
    Ok(AuxState {
        moments: integrate_moments(x, k, b - t, steps, move |d| b - d),
    })
}

/// Expansion of the left Riemann–Liouville derivative at `t > a`.
pub fn approx_left_rl<S: Signal + ?Sized>(x: &S, coeffs: &ExpansionCoeffs, a: f64, t: f64) -> Result<f64> {
    approx_left_rl_with(x, coeffs, a, t, DEFAULT_AUX_STEPS)
}

pub fn approx_left_rl_with<S: Signal + ?Sized>(
    x: &S,
    coeffs: &ExpansionCoeffs,
    a: f64,
    t: f64,
    steps: usize,
) -> Result<f64> {
    let aux = aux_left(x, coeffs.k(), a, t, steps)?;
    let s = t - a;
    let hi = x.nodes().map(|n| n[n.len() - 1]).unwrap_or(t);
    Ok(coeffs.memory_term(s, x.value(t), &aux.moments) + coeffs.slope_weight(s) * x.slope(t, a, hi.max(t)))
}

/// Expansion of the right Riemann–Liouville derivative at `t < b`.
///
/// The moment terms enter with a minus sign, exactly mirroring the left
/// expansion under `τ ↦ a + b - τ`.
pub fn approx_right_rl<S: Signal + ?Sized>(x: &S, coeffs: &ExpansionCoeffs, b: f64, t: f64) -> Result<f64> {
    approx_right_rl_with(x, coeffs, b, t, DEFAULT_AUX_STEPS)
}

pub fn approx_right_rl_with<S: Signal + ?Sized>(
    x: &S,
    coeffs: &ExpansionCoeffs,
    b: f64,
    t: f64,
    steps: usize,
) -> Result<f64> {
    let aux = aux_right(x, coeffs.k(), b, t, steps)?;
    let sigma = b - t;
    let lo = x.nodes().map(|n| n[0]).unwrap_or(t);
    Ok(coeffs.memory_term(sigma, x.value(t), &aux.moments) - coeffs.slope_weight(sigma) * x.slope(t, lo.min(t), b))
}

/// Expansion of the left Caputo derivative: the left RL expansion minus
/// `x(a)(t-a)^{-α}/Γ(1-α)`.
pub fn approx_caputo_left<S: Signal + ?Sized>(x: &S, coeffs: &ExpansionCoeffs, a: f64, t: f64) -> Result<f64> {
    let rl = approx_left_rl(x, coeffs, a, t)?;
    Ok(rl - coeffs.caputo_shift(t - a, x.value(a)))
}

/// Moments `V_p` along a whole grid function, one [`GridFn`] per `p`.
pub fn aux_left_path(x: &GridFn, k: usize) -> Result<Vec<GridFn>> {
    let g = x.grid();
    let mut out = vec![vec![0.0; g.len()]; k - 1];
    let a = g[0];
    for (i, w) in g.windows(2).enumerate() {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        let mid = t0 + 0.5 * h;
        for (j, col) in out.iter_mut().enumerate() {
            let p = (j + 2) as i32;
            let r = |t: f64| (1.0 - p as f64) * (t - a).powi(p - 2) * x.eval(t);
            col[i + 1] = col[i] + h / 6.0 * (r(t0) + 4.0 * r(mid) + r(t1));
        }
    }
    out.into_iter().map(|v| GridFn::new(g.to_vec(), v)).collect()
}

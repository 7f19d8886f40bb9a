//! Boundary value problems for the two solution routes.
//!
//! Route A (fractional conditions first): state `[x, V_2..V_K, λ, W_2..W_K]`.
//! The left expansion replaces the Caputo derivative in the state equation and
//! the mirrored right expansion replaces `ₜD_T^α λ` in the costate equation:
//!
//! ```text
//! (M + N B s^{1-α}) ẋ = f - N (A s^{-α} x - Σ C_p s^{1-p-α} V_p - x_a s^{-α}/Γ(1-α))
//! (M + N B σ^{1-α}) λ̇ = N (A σ^{-α} λ - Σ C_p σ^{1-p-α} W_p) - ∂H/∂x
//! V̇_p = (1-p) s^{p-2} x,    Ẇ_p = -(1-p) σ^{p-2} λ
//! ```
//!
//! with `s = t - a`, `σ = T - t`.
//!
//! Route B (approximate first): the expanded dynamics define a classical
//! problem in `(x, V_2..V_K)` with costates `(λ_1, λ_2..λ_K)`; its
//! Hamiltonian is `L + λ_1 ẋ + Σ λ_p V̇_p` and the control solves the
//! original stationary condition with `λ = λ_1 / (M + N B s^{1-α})`.
//!
//! For `N = 0` the moment states are dropped and both routes reduce to the
//! same classical Hamiltonian system.

use std::sync::Arc;

use crate::error::{Error, Result, SolveError};
use crate::expansion::ExpansionCoeffs;
use crate::model::{FocpSpec, TerminalMode};

use super::bvp::{BvpProblem, Horizon};

/// Relative offset of the integration ends from the singular points.
pub const END_OFFSET: f64 = 1e-6;
/// Mesh clustering exponent for problems with fractional terms.
pub const GRADING: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// Fractional necessary conditions, then expansion (route A).
    Fractional,
    /// Expansion of the problem, then classical conditions (route B).
    Approximate,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Fractional => "fractional",
            Route::Approximate => "approximate",
        }
    }
}

/// Extra condition that fixes a free terminal time in route A.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeTimeCondition {
    /// `λ(T) = 0`, from continuity of `λ`.
    CostateVanishes,
    /// `[L + M λ ẋ + ∂φ/∂t]_{t=T} = 0`, the Hamiltonian transversality
    /// condition after `ₜI_T^{1-α} λ(T) = 0`.
    Transversality,
}

impl FreeTimeCondition {
    /// `CostateVanishes` for fractional problems with fixed `x(T)`, otherwise
    /// `Transversality`.
    pub fn default_for(spec: &FocpSpec) -> Self {
        if spec.n_coef != 0.0 && matches!(spec.terminal, TerminalMode::FreeTimeFixedState { .. }) {
            FreeTimeCondition::CostateVanishes
        } else {
            FreeTimeCondition::Transversality
        }
    }
}

type Outputs = Arc<dyn Fn(f64, &[f64], f64) -> Result<(f64, f64), SolveError> + Send + Sync>;

/// An assembled route: the BVP plus the map from states to `(u, λ)`.
#[derive(Clone)]
pub struct Assembled {
    pub route: Route,
    pub bvp: BvpProblem,
    /// Truncation order `K`.
    pub k: usize,
    /// Moment states per side: `K - 1`, or 0 when `N = 0`.
    pub n_aux: usize,
    outputs: Outputs,
}

impl std::fmt::Debug for Assembled {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Assembled")
            .field("route", &self.route)
            .field("k", &self.k)
            .field("n_aux", &self.n_aux)
            .field("bvp", &self.bvp)
            .finish()
    }
}

impl Assembled {
    /// Control and costate at `(t, y)` for horizon `T`.
    pub fn outputs(&self, t: f64, y: &[f64], t_final: f64) -> Result<(f64, f64), SolveError> {
        (self.outputs)(t, y, t_final)
    }

    /// Index of `x`, the first moment, the costate and its first moment.
    pub fn layout(&self) -> Layout {
        Layout::new(self.n_aux)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_aux: usize,
}

impl Layout {
    fn new(n_aux: usize) -> Self {
        Self { n_aux }
    }
    pub const X: usize = 0;
    pub fn v(self, p: usize) -> usize {
        p - 1
    }
    pub fn lambda(self) -> usize {
        1 + self.n_aux
    }
    pub fn w(self, p: usize) -> usize {
        self.n_aux + p
    }
    pub fn dim(self) -> usize {
        2 + 2 * self.n_aux
    }
}

/// Shared pieces of both assemblies.
struct Common {
    spec: FocpSpec,
    coeffs: ExpansionCoeffs,
    n_aux: usize,
    fractional: bool,
}

impl Common {
    fn new(spec: &FocpSpec, k: usize) -> Result<Self> {
        spec.validate()?;
        if !spec.is_standard() {
            return Err(Error::Assembly(
                "solving problems whose cost starts after the memory is not supported".into(),
            ));
        }
        let coeffs = ExpansionCoeffs::new(spec.order, k)?;
        let fractional = spec.n_coef != 0.0;
        if !fractional && spec.m_coef == 0.0 {
            return Err(Error::Assembly("M = N = 0".into()));
        }
        if matches!(
            spec.terminal,
            TerminalMode::FixedTimeStateLowerBound { .. } | TerminalMode::FixedStateTimeUpperBound { .. }
        ) {
            return Err(Error::Assembly(format!(
                "terminal mode {} is evaluated by the conditions module but not solved",
                spec.terminal.name()
            )));
        }
        let c = Self {
            spec: spec.clone(),
            coeffs,
            n_aux: if fractional { k - 1 } else { 0 },
            fractional,
        };
        c.check_denominator()?;
        Ok(c)
    }

    /// `M + N B d^{1-α}` at distance `d` from the memory endpoint.
    fn denominator(&self, d: f64) -> f64 {
        if self.fractional {
            self.spec.m_coef + self.spec.n_coef * self.coeffs.slope_weight(d)
        } else {
            self.spec.m_coef
        }
    }

    /// The denominator vanishes at `d* = (-M / (N B))^{1/(1-α)}` when that is
    /// positive; reject it inside a fixed horizon.
    fn check_denominator(&self) -> Result<()> {
        if !self.fractional {
            return Ok(());
        }
        let ratio = -self.spec.m_coef / (self.spec.n_coef * self.coeffs.b());
        if ratio > 0.0 {
            let d_star = ratio.powf(1.0 / (1.0 - self.spec.order.alpha()));
            if let Some(t_final) = self.spec.terminal.fixed_time() {
                if d_star <= t_final - self.spec.a {
                    return Err(Error::Assembly(format!(
                        "denominator M + N B (t - a)^(1-alpha) vanishes at t = {}",
                        self.spec.a + d_star
                    )));
                }
            }
        }
        Ok(())
    }

    fn checked_denominator(&self, d: f64, t: f64) -> Result<f64, SolveError> {
        let den = self.denominator(d);
        if den.abs() < 1e-14 || !den.is_finite() {
            Err(SolveError::VanishingDenominator { t })
        } else {
            Ok(den)
        }
    }

    /// `(ẋ, den)` from the expanded state equation with costate value `lambda`.
    fn state_rate(&self, t: f64, x: f64, v: &[f64], u: f64) -> Result<(f64, f64), SolveError> {
        let spec = &self.spec;
        let s = t - spec.a;
        let den = self.checked_denominator(s, t)?;
        let f = spec.dynamics.eval(t, x, u);
        let memory = if self.fractional {
            spec.n_coef * (self.coeffs.memory_term(s, x, v) - self.coeffs.caputo_shift(s, spec.x_start))
        } else {
            0.0
        };
        Ok(((f - memory) / den, den))
    }

    fn horizon(&self, t_guess: f64) -> Horizon {
        match self.spec.terminal.fixed_time() {
            Some(t) => Horizon::Fixed(t),
            None => Horizon::Free { guess: t_guess },
        }
    }

    fn bvp(&self, dim: usize, t_guess: f64, rhs: impl Fn(f64, &[f64], f64, &mut [f64]) -> Result<(), SolveError> + Send + Sync + 'static, boundary: impl Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync + 'static) -> BvpProblem {
        let mut p = BvpProblem::new(dim, self.spec.a, self.horizon(t_guess), rhs, boundary);
        p.initial_guess[0] = self.spec.x_start;
        // x(a) and the moments V_p(a) are known exactly
        p.pinned = (0..=self.n_aux).collect();
        if self.fractional {
            p.end_offset = END_OFFSET;
            p.grading = GRADING;
        }
        p
    }

    /// Time of the right integration end for horizon `T`.
    fn t_end(&self, t_final: f64) -> f64 {
        let eps = if self.fractional { END_OFFSET } else { 0.0 };
        self.spec.a + (1.0 - eps) * (t_final - self.spec.a)
    }
}

/// Route A: fractional necessary conditions with both derivatives expanded.
pub fn assemble_route_a(spec: &FocpSpec, k: usize, t_guess: f64, free_time: FreeTimeCondition) -> Result<Assembled> {
    let c = Arc::new(Common::new(spec, k)?);
    let na = c.n_aux;
    let lay = Layout::new(na);
    if spec.m_coef == 0.0
        && matches!(
            spec.terminal,
            TerminalMode::FixedTimeFreeState { .. } | TerminalMode::FreeTimeFreeState | TerminalMode::Curve(_)
        )
    {
        return Err(Error::Assembly(
            "with M = 0 the condition on lambda(T) degenerates; use route B".into(),
        ));
    }

    let rc = Arc::clone(&c);
    let rhs = move |t: f64, y: &[f64], t_final: f64, dy: &mut [f64]| -> Result<(), SolveError> {
        let spec = &rc.spec;
        let (x, lambda) = (y[0], y[lay.lambda()]);
        let u = spec.stationary_control(t, x, lambda)?;
        let (dx, _) = rc.state_rate(t, x, &y[1..1 + na], u)?;
        dy[0] = dx;
        let h_x = spec.hamiltonian().dx(t, x, u, lambda);
        if rc.fractional {
            let (s, sigma) = (t - spec.a, t_final - t);
            rc.coeffs.moment_rates(s, x, &mut dy[1..1 + na]);
            let den = rc.checked_denominator(sigma, t)?;
            let memory = rc.coeffs.memory_term(sigma, lambda, &y[lay.w(2)..]);
            dy[lay.lambda()] = (spec.n_coef * memory - h_x) / den;
            rc.coeffs.moment_rates(sigma, lambda, &mut dy[lay.w(2)..]);
            for w in &mut dy[lay.w(2)..] {
                *w = -*w;
            }
        } else {
            dy[lay.lambda()] = -h_x / spec.m_coef;
        }
        Ok(())
    };

    let bc = Arc::clone(&c);
    let boundary = move |y0: &[f64], y1: &[f64], t_final: f64| -> Vec<f64> {
        let spec = &bc.spec;
        let mut r = Vec::with_capacity(lay.dim() + 1);
        r.push(y0[0] - spec.x_start);
        r.extend_from_slice(&y0[1..1 + na]);
        r.extend_from_slice(&y1[lay.w(2)..]);
        let t_end = bc.t_end(t_final);
        let (x, lambda) = (y1[0], y1[lay.lambda()]);
        let phi = &spec.terminal_cost;
        let x_cond = spec.m_coef * lambda - phi.dx(t_final, x);
        // L + M λ ẋ + φ_t at the end of the integration interval
        let h_cond = || match spec.stationary_control(t_end, x, lambda) {
            Ok(u) => match bc.state_rate(t_end, x, &y1[1..1 + na], u) {
                Ok((dx, _)) => spec.lagrangian.eval(t_end, x, u) + spec.m_coef * lambda * dx + phi.dt(t_final, x),
                Err(_) => f64::NAN,
            },
            Err(_) => f64::NAN,
        };
        match &spec.terminal {
            TerminalMode::FixedBoth { x_final, .. } => r.push(x - x_final),
            TerminalMode::FixedTimeFreeState { .. } => r.push(x_cond),
            TerminalMode::FreeTimeFixedState { x_final } => {
                r.push(x - x_final);
                r.push(match free_time {
                    FreeTimeCondition::CostateVanishes => lambda,
                    FreeTimeCondition::Transversality => h_cond(),
                });
            }
            TerminalMode::FreeTimeFreeState => {
                r.push(x_cond);
                r.push(h_cond());
            }
            TerminalMode::Curve(curve) => {
                r.push(x - curve.eval(t_final));
                r.push(h_cond() - curve.slope(t_final) * x_cond);
            }
            TerminalMode::FixedTimeStateLowerBound { .. } | TerminalMode::FixedStateTimeUpperBound { .. } => {
                unreachable!("rejected during assembly")
            }
        }
        r
    };

    let oc = Arc::clone(&c);
    let outputs: Outputs = Arc::new(move |t, y, _| {
        let lambda = y[lay.lambda()];
        Ok((oc.spec.stationary_control(t, y[0], lambda)?, lambda))
    });
    Ok(Assembled {
        route: Route::Fractional,
        bvp: c.bvp(lay.dim(), t_guess, rhs, boundary),
        k,
        n_aux: na,
        outputs,
    })
}

/// Route B: classical conditions of the expanded problem.
pub fn assemble_route_b(spec: &FocpSpec, k: usize, t_guess: f64) -> Result<Assembled> {
    let c = Arc::new(Common::new(spec, k)?);
    let na = c.n_aux;
    let lay = Layout::new(na);

    // (u, λ_eff, ẋ) at a state
    let eval = {
        let c = Arc::clone(&c);
        move |t: f64, y: &[f64]| -> Result<(f64, f64, f64), SolveError> {
            let s = t - c.spec.a;
            let den = c.checked_denominator(s, t)?;
            let lambda = y[lay.lambda()] / den;
            let u = c.spec.stationary_control(t, y[0], lambda)?;
            let (dx, _) = c.state_rate(t, y[0], &y[1..1 + na], u)?;
            Ok((u, lambda, dx))
        }
    };
    let eval = Arc::new(eval);

    let rc = Arc::clone(&c);
    let re = Arc::clone(&eval);
    let rhs = move |t: f64, y: &[f64], _t_final: f64, dy: &mut [f64]| -> Result<(), SolveError> {
        let spec = &rc.spec;
        let x = y[0];
        let (u, lambda, dx) = re(t, y)?;
        dy[0] = dx;
        let mut h_x = spec.hamiltonian().dx(t, x, u, lambda);
        if rc.fractional {
            let s = t - spec.a;
            let alpha = spec.order.alpha();
            rc.coeffs.moment_rates(s, x, &mut dy[1..1 + na]);
            h_x -= lambda * spec.n_coef * rc.coeffs.a() * s.powf(-alpha);
            // Σ λ_p (1-p) s^{p-2}: the moment rates with x replaced by 1
            let mut pow = 1.0;
            for (p, lp) in (2..).zip(&y[lay.w(2)..]) {
                h_x += lp * (1.0 - p as f64) * pow;
                pow *= s;
            }
            let mut pow = s.powf(-1.0 - alpha);
            for (c_p, out) in rc.coeffs.c_all().iter().zip(&mut dy[lay.w(2)..]) {
                *out = -lambda * spec.n_coef * c_p * pow;
                pow /= s;
            }
        }
        dy[lay.lambda()] = -h_x;
        Ok(())
    };

    let bc = Arc::clone(&c);
    let be = Arc::clone(&eval);
    let boundary = move |y0: &[f64], y1: &[f64], t_final: f64| -> Vec<f64> {
        let spec = &bc.spec;
        let mut r = Vec::with_capacity(lay.dim() + 1);
        r.push(y0[0] - spec.x_start);
        r.extend_from_slice(&y0[1..1 + na]);
        r.extend_from_slice(&y1[lay.w(2)..]);
        let t_end = bc.t_end(t_final);
        let (x, lambda1) = (y1[0], y1[lay.lambda()]);
        let phi = &spec.terminal_cost;
        // classical Hamiltonian L + λ_1 ẋ + Σ λ_p V̇_p, plus φ_t
        let h_cond = || match be(t_end, y1) {
            Ok((u, _, dx)) => {
                let s = t_end - spec.a;
                let mut h = spec.lagrangian.eval(t_end, x, u) + lambda1 * dx + phi.dt(t_final, x);
                let mut pow = 1.0;
                for (p, lp) in (2..).zip(&y1[lay.w(2)..]) {
                    h += lp * (1.0 - p as f64) * pow * x;
                    pow *= s;
                }
                h
            }
            Err(_) => f64::NAN,
        };
        let x_cond = lambda1 - phi.dx(t_final, x);
        match &spec.terminal {
            TerminalMode::FixedBoth { x_final, .. } => r.push(x - x_final),
            TerminalMode::FixedTimeFreeState { .. } => r.push(x_cond),
            TerminalMode::FreeTimeFixedState { x_final } => {
                r.push(x - x_final);
                r.push(h_cond());
            }
            TerminalMode::FreeTimeFreeState => {
                r.push(x_cond);
                r.push(h_cond());
            }
            TerminalMode::Curve(curve) => {
                r.push(x - curve.eval(t_final));
                r.push(h_cond() - curve.slope(t_final) * x_cond);
            }
            TerminalMode::FixedTimeStateLowerBound { .. } | TerminalMode::FixedStateTimeUpperBound { .. } => {
                unreachable!("rejected during assembly")
            }
        }
        r
    };

    let oe = Arc::clone(&eval);
    let outputs: Outputs = Arc::new(move |t, y, _| {
        let (u, lambda, _) = oe(t, y)?;
        Ok((u, lambda))
    });
    Ok(Assembled {
        route: Route::Approximate,
        bvp: c.bvp(lay.dim(), t_guess, rhs, boundary),
        k,
        n_aux: na,
        outputs,
    })
}

/// Assembles `route` with its default free-time condition.
pub fn assemble(spec: &FocpSpec, route: Route, k: usize, t_guess: f64) -> Result<Assembled> {
    match route {
        Route::Fractional => assemble_route_a(spec, k, t_guess, FreeTimeCondition::default_for(spec)),
        Route::Approximate => assemble_route_b(spec, k, t_guess),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::Order;
    use crate::problems::{classical_toy, example41, example42};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn half() -> Order {
        Order::new(0.5).unwrap()
    }

    #[test]
    fn dimensions_follow_truncation_order() {
        let spec = example41(half()).unwrap();
        let a2 = assemble_route_a(&spec, 2, 1.0, FreeTimeCondition::CostateVanishes).unwrap();
        assert_eq!(a2.bvp.dim, 4);
        assert_eq!(a2.bvp.n_unknowns(), 4);
        let a3 = assemble(&spec, Route::Fractional, 3, 1.0).unwrap();
        assert_eq!(a3.bvp.dim, 6);
        let b3 = assemble(&spec, Route::Approximate, 3, 1.0).unwrap();
        assert_eq!(b3.bvp.dim, 6);
        let free = assemble(&example42(half()), Route::Fractional, 2, 1.0).unwrap();
        assert_eq!(free.bvp.n_unknowns(), 5);
    }

    #[test]
    fn example_boundary_set() {
        // {x(0) = 0, V_2(0) = 0, W_2(1) = 0, x(1) = 2/Γ(3.5)}
        let spec = example41(half()).unwrap();
        let a = assemble(&spec, Route::Fractional, 2, 1.0).unwrap();
        let y0 = [0.1, 0.2, 0.3, 0.4];
        let y1 = [0.5, 0.6, 0.7, 0.8];
        let r = (a.bvp.boundary)(&y0, &y1, 1.0);
        let x_final = 2.0 / crate::fracops::gamma(3.5).unwrap();
        assert_eq!(r, vec![0.1, 0.2, 0.8, 0.5 - x_final]);
    }

    #[test]
    fn free_time_example_adds_vanishing_costate() {
        let a = assemble(&example42(half()), Route::Fractional, 2, 1.0).unwrap();
        let r = (a.bvp.boundary)(&[0.0; 4], &[1.0, 0.0, 0.25, 0.0], 1.3);
        assert_eq!(r.len(), 5);
        assert_eq!(r[4], 0.25);
    }

    #[test]
    fn route_b_matches_closed_form_system() {
        // K = 2: ẋ = 2φ0 λ1 + φ1 x + φ2 V2 + φ3, λ̇1 = -φ1 λ1 + λ2, λ̇2 = -φ2 λ1
        let spec = example41(half()).unwrap();
        let b = assemble(&spec, Route::Approximate, 2, 1.0).unwrap();
        let c = ExpansionCoeffs::new(half(), 2).unwrap();
        let (aa, bb, c2) = (c.a(), c.b(), c.c(2));
        for &t in &[0.05, 0.3, 0.8] {
            let y = [0.2, -0.1, 0.7, 0.3];
            let mut dy = [0.0; 4];
            (b.bvp.rhs)(t, &y, 1.0, &mut dy).unwrap();
            let den = 1.0 + bb * t.powf(0.5);
            let phi0 = -1.0 / (4.0 * t * t * den * den);
            let phi1 = (2.5 - aa * t.powf(0.5)) / (t * den);
            let phi2 = c2 * t.powf(-1.5) / den;
            let phi3 = t * t / den;
            let dx = 2.0 * phi0 * y[2] + phi1 * y[0] + phi2 * y[1] + phi3;
            assert!((dy[0] - dx).abs() < 1e-12 * dx.abs().max(1.0), "t={t}");
            assert!((dy[1] + y[0]).abs() < 1e-15);
            let dl1 = -phi1 * y[2] + y[3];
            assert!((dy[2] - dl1).abs() < 1e-12 * dl1.abs().max(1.0));
            assert!((dy[3] + phi2 * y[2]).abs() < 1e-12);
            assert!(phi0 < 0.0);
        }
    }

    #[test]
    fn route_a_matches_closed_form_system() {
        let spec = example41(half()).unwrap();
        let a = assemble(&spec, Route::Fractional, 2, 1.0).unwrap();
        let c = ExpansionCoeffs::new(half(), 2).unwrap();
        let (aa, bb, c2) = (c.a(), c.b(), c.c(2));
        let (t, y) = (0.4, [0.2, -0.1, 0.7, 0.3]);
        let mut dy = [0.0; 4];
        (a.bvp.rhs)(t, &y, 1.0, &mut dy).unwrap();
        let dx = ((2.5 / t - aa * t.powf(-0.5)) * y[0] + c2 * t.powf(-1.5) * y[1] - y[2] / (2.0 * t * t) + t * t)
            / (1.0 + bb * t.powf(0.5));
        assert!((dy[0] - dx).abs() < 1e-12);
        let s = 1.0 - t;
        let dl = ((aa * s.powf(-0.5) - 2.5 / t) * y[2] - c2 * s.powf(-1.5) * y[3]) / (1.0 + bb * s.powf(0.5));
        assert!((dy[2] - dl).abs() < 1e-12);
        assert!((dy[3] - y[2]).abs() < 1e-15);
    }

    #[test]
    fn routes_coincide_without_fractional_term() {
        let spec = classical_toy();
        let a = assemble(&spec, Route::Fractional, 4, 1.0).unwrap();
        let b = assemble(&spec, Route::Approximate, 4, 1.0).unwrap();
        assert_eq!(a.bvp.dim, 2);
        assert_eq!(b.bvp.dim, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let t = rng.gen_range(0.0..1.0);
            let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let (mut da, mut db) = ([0.0; 2], [0.0; 2]);
            (a.bvp.rhs)(t, &y, 1.0, &mut da).unwrap();
            (b.bvp.rhs)(t, &y, 1.0, &mut db).unwrap();
            assert_eq!(da, db);
            assert_eq!((a.bvp.boundary)(&y, &y, 1.3), (b.bvp.boundary)(&y, &y, 1.3));
        }
    }

    #[test]
    fn vanishing_denominator_is_an_assembly_error() {
        let mut spec = example41(half()).unwrap();
        spec.m_coef = -0.1;
        let err = assemble(&spec, Route::Approximate, 2, 1.0).unwrap_err();
        assert!(matches!(err, Error::Assembly(_)), "{err}");
    }

    #[test]
    fn inequality_modes_are_not_solved() {
        let spec = example41(half())
            .unwrap()
            .terminal(TerminalMode::FixedTimeStateLowerBound { t_final: 1.0, bound: 0.0 });
        assert!(matches!(assemble(&spec, Route::Fractional, 2, 1.0), Err(Error::Assembly(_))));
    }
}

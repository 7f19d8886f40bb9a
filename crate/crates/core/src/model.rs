//! Problem statement of a scalar fractional optimal control problem
//!
//! ```text
//! minimize   J = ∫_A^T L(t, x, u) dt + φ(T, x(T))
//! subject to M ẋ + N ᶜD^α x = f(t, x, u),   x(A) = x_A
//! ```
//!
//! where the Caputo derivative has memory starting at `a <= A`.

use std::fmt;
use std::sync::Arc;

use crate::error::{usage, Result, SolveError};
use crate::fracops::{caputo_left, GridFn, Order};

type Fn3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Central-difference step for argument `v`.
fn step(v: f64) -> f64 {
    1e-6 * v.abs().max(1.0)
}

/// A function `g(t, x, u)` with optional analytic partials in `x` and `u`.
///
/// Missing partials fall back to central differences.
#[derive(Clone)]
pub struct Integrand {
    g: Fn3,
    gx: Option<Fn3>,
    gu: Option<Fn3>,
}

impl Integrand {
    pub fn new(g: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            g: Arc::new(g),
            gx: None,
            gu: None,
        }
    }

    pub fn with_partials(
        self,
        gx: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        gu: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            gx: Some(Arc::new(gx)),
            gu: Some(Arc::new(gu)),
            ..self
        }
    }

    pub fn zero() -> Self {
        Self::new(|_, _, _| 0.0).with_partials(|_, _, _| 0.0, |_, _, _| 0.0)
    }

    pub fn has_partials(&self) -> bool {
        self.gx.is_some() && self.gu.is_some()
    }

    pub fn eval(&self, t: f64, x: f64, u: f64) -> f64 {
        (self.g)(t, x, u)
    }

    pub fn dx(&self, t: f64, x: f64, u: f64) -> f64 {
        match &self.gx {
            Some(gx) => gx(t, x, u),
            None => {
                let h = step(x);
                (self.eval(t, x + h, u) - self.eval(t, x - h, u)) / (2.0 * h)
            }
        }
    }

    pub fn du(&self, t: f64, x: f64, u: f64) -> f64 {
        match &self.gu {
            Some(gu) => gu(t, x, u),
            None => {
                let h = step(u);
                (self.eval(t, x, u + h) - self.eval(t, x, u - h)) / (2.0 * h)
            }
        }
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("analytic_partials", &self.has_partials())
            .finish()
    }
}

/// Terminal cost `φ(t, x)` with optional analytic partials.
#[derive(Clone)]
pub struct TerminalCost {
    phi: Fn2,
    phi_t: Option<Fn2>,
    phi_x: Option<Fn2>,
}

impl TerminalCost {
    pub fn new(phi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            phi: Arc::new(phi),
            phi_t: None,
            phi_x: None,
        }
    }

    pub fn with_partials(
        self,
        phi_t: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        phi_x: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            phi_t: Some(Arc::new(phi_t)),
            phi_x: Some(Arc::new(phi_x)),
            ..self
        }
    }

    pub fn zero() -> Self {
        Self::new(|_, _| 0.0).with_partials(|_, _| 0.0, |_, _| 0.0)
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        (self.phi)(t, x)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        match &self.phi_t {
            Some(p) => p(t, x),
            None => {
                let h = step(t);
                (self.eval(t + h, x) - self.eval(t - h, x)) / (2.0 * h)
            }
        }
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        match &self.phi_x {
            Some(p) => p(t, x),
            None => {
                let h = step(x);
                (self.eval(t, x + h) - self.eval(t, x - h)) / (2.0 * h)
            }
        }
    }
}

impl fmt::Debug for TerminalCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TerminalCost")
    }
}

/// Terminal curve `x(T) = γ(T)`.
#[derive(Clone)]
pub struct Curve {
    gamma: Fn1,
    slope: Option<Fn1>,
}

impl Curve {
    pub fn new(gamma: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            gamma: Arc::new(gamma),
            slope: None,
        }
    }

    pub fn with_slope(self, slope: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            slope: Some(Arc::new(slope)),
            ..self
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.gamma)(t)
    }

    pub fn slope(&self, t: f64) -> f64 {
        match &self.slope {
            Some(s) => s(t),
            None => {
                let h = step(t);
                (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
            }
        }
    }
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Curve")
    }
}

/// What is prescribed at the terminal point.
#[derive(Debug, Clone)]
pub enum TerminalMode {
    FreeTimeFreeState,
    FixedTimeFreeState { t_final: f64 },
    FreeTimeFixedState { x_final: f64 },
    FixedBoth { t_final: f64, x_final: f64 },
    /// `x(T) = γ(T)` with `T` free.
    Curve(Curve),
    /// `T` fixed and `x(T) >= bound`.
    FixedTimeStateLowerBound { t_final: f64, bound: f64 },
    /// `x(T)` fixed and `T <= bound`.
    FixedStateTimeUpperBound { x_final: f64, bound: f64 },
}

impl TerminalMode {
    pub fn fixed_time(&self) -> Option<f64> {
        match *self {
            Self::FixedTimeFreeState { t_final }
            | Self::FixedBoth { t_final, .. }
            | Self::FixedTimeStateLowerBound { t_final, .. } => Some(t_final),
            _ => None,
        }
    }

    pub fn fixed_state(&self) -> Option<f64> {
        match *self {
            Self::FreeTimeFixedState { x_final }
            | Self::FixedBoth { x_final, .. }
            | Self::FixedStateTimeUpperBound { x_final, .. } => Some(x_final),
            _ => None,
        }
    }

    pub fn is_free_time(&self) -> bool {
        self.fixed_time().is_none()
    }

    /// Short machine-readable name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::FreeTimeFreeState => "free_time_free_state",
            Self::FixedTimeFreeState { .. } => "fixed_time_free_state",
            Self::FreeTimeFixedState { .. } => "free_time_fixed_state",
            Self::FixedBoth { .. } => "fixed_both",
            Self::Curve(_) => "curve",
            Self::FixedTimeStateLowerBound { .. } => "fixed_time_state_lower_bound",
            Self::FixedStateTimeUpperBound { .. } => "fixed_state_time_upper_bound",
        }
    }

    pub fn same_kind(&self, other: &TerminalMode) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    fn validate(&self) -> Result<()> {
        let finite = match *self {
            Self::FreeTimeFreeState | Self::Curve(_) => true,
            Self::FixedTimeFreeState { t_final } => t_final.is_finite(),
            Self::FreeTimeFixedState { x_final } => x_final.is_finite(),
            Self::FixedBoth { t_final, x_final } => t_final.is_finite() && x_final.is_finite(),
            Self::FixedTimeStateLowerBound { t_final, bound } => t_final.is_finite() && bound.is_finite(),
            Self::FixedStateTimeUpperBound { x_final, bound } => x_final.is_finite() && bound.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            usage("terminal data must be finite")
        }
    }
}

/// Closed-form solution `u(t, x, λ)` of the stationary condition `∂H/∂u = 0`.
pub type ControlLaw = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// A fractional optimal control problem.
#[derive(Clone)]
pub struct FocpSpec {
    /// Start of the Caputo memory.
    pub a: f64,
    /// Lower limit of the cost integral, where the initial value is imposed.
    pub a_cost: f64,
    pub x_start: f64,
    /// Optional value of `x(a)` when `a < a_cost`.
    pub x_fixed_at_a: Option<f64>,
    pub order: Order,
    pub m_coef: f64,
    pub n_coef: f64,
    pub lagrangian: Integrand,
    pub dynamics: Integrand,
    pub terminal_cost: TerminalCost,
    pub terminal: TerminalMode,
    pub control: Option<ControlLaw>,
}

impl fmt::Debug for FocpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FocpSpec")
            .field("a", &self.a)
            .field("a_cost", &self.a_cost)
            .field("x_start", &self.x_start)
            .field("x_fixed_at_a", &self.x_fixed_at_a)
            .field("order", &self.order)
            .field("m_coef", &self.m_coef)
            .field("n_coef", &self.n_coef)
            .field("terminal", &self.terminal)
            .field("control", &self.control.is_some())
            .finish()
    }
}

impl FocpSpec {
    /// A problem with `a = A = 0`, `x(0) = x_start`, no terminal cost and a
    /// free terminal point.
    pub fn new(order: Order, m_coef: f64, n_coef: f64, lagrangian: Integrand, dynamics: Integrand) -> Self {
        Self {
            a: 0.0,
            a_cost: 0.0,
            x_start: 0.0,
            x_fixed_at_a: None,
            order,
            m_coef,
            n_coef,
            lagrangian,
            dynamics,
            terminal_cost: TerminalCost::zero(),
            terminal: TerminalMode::FreeTimeFreeState,
            control: None,
        }
    }

    pub fn start(mut self, a: f64, x_start: f64) -> Self {
        self.a = a;
        self.a_cost = a;
        self.x_start = x_start;
        self
    }

    /// Cost integral starting at `a_cost > a`, with `x(a_cost) = x_start`.
    pub fn delayed_cost(mut self, a_cost: f64, x_start: f64) -> Self {
        self.a_cost = a_cost;
        self.x_start = x_start;
        self
    }

    pub fn fix_at_memory_start(mut self, x_a: f64) -> Self {
        self.x_fixed_at_a = Some(x_a);
        self
    }

    pub fn terminal(mut self, mode: TerminalMode) -> Self {
        self.terminal = mode;
        self
    }

    pub fn terminal_cost(mut self, phi: TerminalCost) -> Self {
        self.terminal_cost = phi;
        self
    }

    pub fn control_law(mut self, law: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.control = Some(Arc::new(law));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_coef == 0.0 && self.n_coef == 0.0 {
            return usage("(m_coef, n_coef) must not both vanish");
        }
        if !(self.a <= self.a_cost) {
            return usage(format!("need a <= a_cost, got a = {}, a_cost = {}", self.a, self.a_cost));
        }
        if !(self.m_coef.is_finite() && self.n_coef.is_finite() && self.x_start.is_finite()) {
            return usage("coefficients and initial value must be finite");
        }
        self.terminal.validate()
    }

    /// True for the setting where cost and memory start together.
    pub fn is_standard(&self) -> bool {
        self.a == self.a_cost
    }

    pub fn hamiltonian(&self) -> Hamiltonian {
        make_hamiltonian(self)
    }

    /// `u` solving `∂H/∂u(t, x, u, λ) = 0`.
    ///
    /// Uses the closed form when the problem supplies one, otherwise a
    /// bracketing root search on `∂H/∂u`.
    pub fn stationary_control(&self, t: f64, x: f64, lambda: f64) -> Result<f64, SolveError> {
        let u = match &self.control {
            Some(law) => law(t, x, lambda),
            None => {
                let h = self.hamiltonian();
                root_in_u(|u| h.du(t, x, u, lambda)).ok_or(SolveError::Stationarity { t })?
            }
        };
        if u.is_finite() {
            Ok(u)
        } else {
            Err(SolveError::Stationarity { t })
        }
    }
}

/// Root of a scalar function by bracket expansion from 0 and bisection.
fn root_in_u(g: impl Fn(f64) -> f64) -> Option<f64> {
    let g0 = g(0.0);
    if g0 == 0.0 {
        return Some(0.0);
    }
    let mut width = 1.0;
    let (mut lo, mut hi) = loop {
        let (gl, gh) = (g(-width), g(width));
        if gl.signum() != g0.signum() {
            break (-width, 0.0);
        }
        if gh.signum() != g0.signum() {
            break (0.0, width);
        }
        width *= 2.0;
        if width > 1e12 {
            return None;
        }
    };
    let g_lo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == g_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * mid.abs().max(1.0) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `H(t, x, u, λ) = L(t, x, u) + λ f(t, x, u)` and its partials.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    lagrangian: Integrand,
    dynamics: Integrand,
}

impl Hamiltonian {
    pub fn eval(&self, t: f64, x: f64, u: f64, lambda: f64) -> f64 {
        self.lagrangian.eval(t, x, u) + lambda * self.dynamics.eval(t, x, u)
    }

    pub fn dx(&self, t: f64, x: f64, u: f64, lambda: f64) -> f64 {
        self.lagrangian.dx(t, x, u) + lambda * self.dynamics.dx(t, x, u)
    }

    pub fn du(&self, t: f64, x: f64, u: f64, lambda: f64) -> f64 {
        self.lagrangian.du(t, x, u) + lambda * self.dynamics.du(t, x, u)
    }

    /// Equals `f(t, x, u)`.
    pub fn dlambda(&self, t: f64, x: f64, u: f64, _lambda: f64) -> f64 {
        self.dynamics.eval(t, x, u)
    }
}

pub fn make_hamiltonian(spec: &FocpSpec) -> Hamiltonian {
    Hamiltonian {
        lagrangian: spec.lagrangian.clone(),
        dynamics: spec.dynamics.clone(),
    }
}

/// Max-norm violation of the dynamics at the interior grid points in
/// `(a_cost, last]`, plus the initial-value mismatch `|x(a_cost) - x_start|`.
///
/// The grid must reach back to the memory start `a`.
pub fn admissible(spec: &FocpSpec, x: &GridFn, u: &GridFn) -> Result<f64> {
    if !x.same_grid(u) {
        return usage("x and u must share one grid");
    }
    spec.validate()?;
    let dx = x.derivative();
    let g = x.grid();
    let last = g.len() - 1;
    let mut worst = 0.0f64;
    for i in 1..last {
        let t = g[i];
        if t <= spec.a_cost {
            continue;
        }
        let frac = if spec.n_coef != 0.0 {
            spec.n_coef * caputo_left(x, spec.order, spec.a, t)?
        } else {
            0.0
        };
        let r = spec.m_coef * dx.values()[i] + frac - spec.dynamics.eval(t, x.values()[i], u.values()[i]);
        worst = worst.max(r.abs());
    }
    Ok(worst + (x.eval(spec.a_cost) - spec.x_start).abs())
}

/// `∫_{a_cost}^T L dt + φ(T, x(T))` by the trapezoid rule on the grid.
pub fn cost(spec: &FocpSpec, x: &GridFn, u: &GridFn, t_final: f64) -> Result<f64> {
    if !x.same_grid(u) {
        return usage("x and u must share one grid");
    }
    let g = x.grid();
    let tol = 1e-12 * (1.0 + t_final.abs());
    if t_final < g[0] - tol || t_final > x.last() + tol || t_final <= spec.a_cost {
        return usage(format!(
            "terminal time {t_final} is outside the grid [{}, {}] or before the cost start",
            g[0],
            x.last()
        ));
    }
    let l = |t: f64| spec.lagrangian.eval(t, x.eval(t), u.eval(t));
    // trapezoid on the nodes inside (a_cost, T) plus the two end pieces
    let mut knots = vec![spec.a_cost];
    knots.extend(g.iter().copied().filter(|&t| t > spec.a_cost + tol && t < t_final - tol));
    knots.push(t_final);
    let integral: f64 = knots.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (l(w[0]) + l(w[1]))).sum();
    Ok(integral + spec.terminal_cost.eval(t_final, x.eval(t_final)))
}

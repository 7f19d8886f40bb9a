//! Catalog of quadratic problem forms and the built-in problems.
//!
//! ```text
//! L(t, x, u) = (lt·t·u + lu·u + lx·x + l0)² + ru·u² + rx·x² + c0
//! f(t, x, u) = fu·u + fx·x + ft2·t² + f0
//! φ(t, x)    = px·x + pxx·x² + pt·t
//! ```
//!
//! Every form in the catalog has analytic partials and a closed-form
//! stationary control.

use crate::error::Result;
use crate::fracops::{gamma, Order};
use crate::model::{FocpSpec, Integrand, TerminalCost, TerminalMode};

/// Coefficients of the quadratic catalog. All default to zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Quadratic {
    pub lt: f64,
    pub lu: f64,
    pub lx: f64,
    pub l0: f64,
    pub ru: f64,
    pub rx: f64,
    pub c0: f64,
    pub fu: f64,
    pub fx: f64,
    pub ft2: f64,
    pub f0: f64,
    pub px: f64,
    pub pxx: f64,
    pub pt: f64,
}

impl Quadratic {
    /// Names accepted by [`Quadratic::set`].
    pub const KEYS: [&'static str; 14] = [
        "lt", "lu", "lx", "l0", "ru", "rx", "c0", "fu", "fx", "ft2", "f0", "px", "pxx", "pt",
    ];

    /// Sets a coefficient by name; returns false for unknown names.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "lt" => &mut self.lt,
            "lu" => &mut self.lu,
            "lx" => &mut self.lx,
            "l0" => &mut self.l0,
            "ru" => &mut self.ru,
            "rx" => &mut self.rx,
            "c0" => &mut self.c0,
            "fu" => &mut self.fu,
            "fx" => &mut self.fx,
            "ft2" => &mut self.ft2,
            "f0" => &mut self.f0,
            "px" => &mut self.px,
            "pxx" => &mut self.pxx,
            "pt" => &mut self.pt,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "lt" => self.lt,
            "lu" => self.lu,
            "lx" => self.lx,
            "l0" => self.l0,
            "ru" => self.ru,
            "rx" => self.rx,
            "c0" => self.c0,
            "fu" => self.fu,
            "fx" => self.fx,
            "ft2" => self.ft2,
            "f0" => self.f0,
            "px" => self.px,
            "pxx" => self.pxx,
            "pt" => self.pt,
            _ => return None,
        })
    }

    pub fn lagrangian(&self) -> Integrand {
        let q = *self;
        let inner = move |t: f64, x: f64, u: f64| (q.lt * t + q.lu) * u + q.lx * x + q.l0;
        Integrand::new(move |t, x, u| inner(t, x, u).powi(2) + q.ru * u * u + q.rx * x * x + q.c0).with_partials(
            move |t, x, u| 2.0 * inner(t, x, u) * q.lx + 2.0 * q.rx * x,
            move |t, x, u| 2.0 * inner(t, x, u) * (q.lt * t + q.lu) + 2.0 * q.ru * u,
        )
    }

    pub fn dynamics(&self) -> Integrand {
        let q = *self;
        Integrand::new(move |t, x, u| q.fu * u + q.fx * x + q.ft2 * t * t + q.f0)
            .with_partials(move |_, _, _| q.fx, move |_, _, _| q.fu)
    }

    pub fn terminal_cost(&self) -> TerminalCost {
        let q = *self;
        TerminalCost::new(move |t, x| q.px * x + q.pxx * x * x + q.pt * t)
            .with_partials(move |_, _| q.pt, move |_, x| q.px + 2.0 * q.pxx * x)
    }

    /// `u` with `∂H/∂u = 0`; non-finite where `∂²H/∂u²` vanishes.
    pub fn control(&self, t: f64, x: f64, lambda: f64) -> f64 {
        let c = self.lt * t + self.lu;
        -(2.0 * c * (self.lx * x + self.l0) + lambda * self.fu) / (2.0 * (c * c + self.ru))
    }

    /// Problem with memory and cost both starting at `a`.
    pub fn spec(&self, order: Order, m_coef: f64, n_coef: f64, a: f64, x_start: f64, mode: TerminalMode) -> FocpSpec {
        let q = *self;
        FocpSpec::new(order, m_coef, n_coef, self.lagrangian(), self.dynamics())
            .start(a, x_start)
            .terminal(mode)
            .terminal_cost(self.terminal_cost())
            .control_law(move |t, x, l| q.control(t, x, l))
    }
}

/// Coefficients of `L = (t u - (α + 2) x)²`, `f = u + t²`.
pub fn example_coefficients(alpha: f64) -> Quadratic {
    Quadratic {
        lt: 1.0,
        lx: -(alpha + 2.0),
        fu: 1.0,
        ft2: 1.0,
        ..Quadratic::default()
    }
}

/// Fixed-time example: `ẋ + ᶜD^α x = u + t²` on `[0, 1]`,
/// `x(0) = 0`, `x(1) = 2/Γ(3 + α)`.
pub fn example41(order: Order) -> Result<FocpSpec> {
    let alpha = order.alpha();
    let x_final = 2.0 / gamma(3.0 + alpha)?;
    Ok(example_coefficients(alpha).spec(
        order,
        1.0,
        1.0,
        0.0,
        0.0,
        TerminalMode::FixedBoth { t_final: 1.0, x_final },
    ))
}

/// Exact optimal state and control of [`example41`].
pub fn example41_exact(order: Order) -> Result<(impl Fn(f64) -> f64 + Clone, impl Fn(f64) -> f64 + Clone)> {
    let alpha = order.alpha();
    let gx = gamma(alpha + 3.0)?;
    let gu = gamma(alpha + 2.0)?;
    Ok((
        move |t: f64| 2.0 * t.powf(alpha + 2.0) / gx,
        move |t: f64| 2.0 * t.powf(alpha + 1.0) / gu,
    ))
}

/// Free-time example: same cost and dynamics, `x(0) = 0`, `x(T) = 1`.
pub fn example42(order: Order) -> FocpSpec {
    example_coefficients(order.alpha()).spec(
        order,
        1.0,
        1.0,
        0.0,
        0.0,
        TerminalMode::FreeTimeFixedState { x_final: 1.0 },
    )
}

/// Coefficients of `L = 1 + u²`, `f = u`.
pub fn classical_toy_coefficients() -> Quadratic {
    Quadratic {
        ru: 1.0,
        c0: 1.0,
        fu: 1.0,
        ..Quadratic::default()
    }
}

/// Integer-order free-time problem `min ∫_0^T 1 + u² dt`, `ẋ = u`,
/// `x(0) = 0`, `x(T) = 1`, with optimum `T = 1`, `u ≡ 1`, `λ ≡ -2`, `J = 2`.
pub fn classical_toy() -> FocpSpec {
    let order = Order::new(0.5).expect("valid order");
    classical_toy_coefficients().spec(order, 1.0, 0.0, 0.0, 0.0, TerminalMode::FreeTimeFixedState { x_final: 1.0 })
}

/// Names of the built-in problems.
pub const BUILTINS: [&str; 3] = ["example41", "example42", "classical_toy"];

/// Built-in problem by name.
pub fn builtin(name: &str, order: Order) -> Option<Result<FocpSpec>> {
    match name {
        "example41" => Some(example41(order)),
        "example42" => Some(Ok(example42(order))),
        "classical_toy" => Some(Ok(classical_toy())),
        _ => None,
    }
}

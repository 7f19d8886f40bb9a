//! Residuals of the fractional optimality conditions on a discrete candidate
//! `(x, u, λ, T)`, and a sampled sufficiency certificate.
//!
//! With `H = L + λ f` the conditions checked are
//!
//! ```text
//! M λ̇ - N ₜD_T^α λ + ∂H/∂x = 0          costate equation
//! M ẋ + N ᶜₐD_t^α x - ∂H/∂λ = 0          state equation
//! ∂H/∂u = 0                              stationarity
//! ```
//!
//! plus the terminal conditions built from
//!
//! ```text
//! H_T = [H - N λ ᶜD^α x + N ẋ ₜI_T^{1-α} λ + ∂φ/∂t]_{t=T}
//! X_T = [M λ + N ₜI_T^{1-α} λ - ∂φ/∂x]_{t=T}
//! ```
//!
//! The fractional operators are the quadrature oracles of [`crate::fracops`],
//! applied to the piecewise-linear interpolants of the candidate.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, Result};
use crate::fracops::{caputo_left, rl_derivative_right, rl_integral_right, GridFn, Quadrature};
use crate::model::{FocpSpec, TerminalMode};

/// A discrete candidate solution. All three functions share one grid, which
/// ends at `t_final`.
#[derive(Debug, Clone)]
pub struct CandidateTriplet {
    pub x: GridFn,
    pub u: GridFn,
    pub lambda: GridFn,
    pub t_final: f64,
}

impl CandidateTriplet {
    pub fn new(x: GridFn, u: GridFn, lambda: GridFn, t_final: f64) -> Result<Self> {
        if !x.same_grid(&u) || !x.same_grid(&lambda) {
            return usage("x, u and lambda must share one grid");
        }
        if (x.last() - t_final).abs() > 1e-9 * (1.0 + t_final.abs()) {
            return usage(format!("grid ends at {} but T = {t_final}", x.last()));
        }
        Ok(Self { x, u, lambda, t_final })
    }

    pub fn grid(&self) -> &[f64] {
        self.x.grid()
    }
}

/// One terminal condition, signed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransversalityTerm {
    /// Must vanish.
    Equality(f64),
    /// Feasible when `<= 0`.
    UpperSlack(f64),
    /// Feasible when `>= 0`.
    LowerSlack(f64),
    /// Complementarity product; must vanish.
    Complementarity(f64),
}

impl TransversalityTerm {
    pub fn value(self) -> f64 {
        match self {
            Self::Equality(v) | Self::UpperSlack(v) | Self::LowerSlack(v) | Self::Complementarity(v) => v,
        }
    }

    /// Non-negative amount by which the condition fails.
    pub fn violation(self) -> f64 {
        match self {
            Self::Equality(v) | Self::Complementarity(v) => v.abs(),
            Self::UpperSlack(v) => v.max(0.0),
            Self::LowerSlack(v) => (-v).max(0.0),
        }
    }
}

/// Max-norm residuals of the necessary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionsReport {
    pub hamiltonian_state_residual: f64,
    pub hamiltonian_costate_residual: f64,
    pub stationarity_residual: f64,
    pub transversality: Vec<TransversalityTerm>,
    /// `violation()` of each entry of `transversality`.
    pub transversality_residuals: Vec<f64>,
    /// Costate identity on `[a, A]`; only for delayed-cost problems.
    pub extra_interval_residual: Option<f64>,
}

impl ConditionsReport {
    fn new(state: f64, costate: f64, stationarity: f64, terms: Vec<TransversalityTerm>, extra: Option<f64>) -> Self {
        Self {
            hamiltonian_state_residual: state,
            hamiltonian_costate_residual: costate,
            stationarity_residual: stationarity,
            transversality_residuals: terms.iter().map(|t| t.violation()).collect(),
            transversality: terms,
            extra_interval_residual: extra,
        }
    }

    /// Largest residual of any kind.
    pub fn max_residual(&self) -> f64 {
        self.transversality_residuals
            .iter()
            .chain(self.extra_interval_residual.iter())
            .fold(
                self.hamiltonian_state_residual
                    .max(self.hamiltonian_costate_residual)
                    .max(self.stationarity_residual),
                |m, &v| m.max(v),
            )
    }

    pub fn passes(&self, thresholds: &Thresholds) -> bool {
        self.max_residual() <= thresholds.residual
    }
}

impl fmt::Display for ConditionsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "state_residual={:.6e}", self.hamiltonian_state_residual)?;
        writeln!(f, "costate_residual={:.6e}", self.hamiltonian_costate_residual)?;
        writeln!(f, "stationarity_residual={:.6e}", self.stationarity_residual)?;
        let terms: Vec<String> = self
            .transversality
            .iter()
            .map(|t| {
                let kind = match t {
                    TransversalityTerm::Equality(_) => "eq",
                    TransversalityTerm::UpperSlack(_) => "le0",
                    TransversalityTerm::LowerSlack(_) => "ge0",
                    TransversalityTerm::Complementarity(_) => "comp",
                };
                format!("{kind}:{:.6e}", t.value())
            })
            .collect();
        writeln!(f, "transversality={}", terms.join(","))?;
        if let Some(e) = self.extra_interval_residual {
            writeln!(f, "extra_interval_residual={e:.6e}")?;
        }
        write!(f, "max_residual={:.6e}", self.max_residual())
    }
}

/// Acceptance thresholds for residuals and sampled hypothesis checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Max-norm bound on every necessary-condition residual.
    pub residual: f64,
    /// Relative slack allowed in midpoint convexity and linearity tests.
    pub convexity: f64,
    /// `λ >= -sign` counts as non-negative.
    pub sign: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            residual: 1e-2,
            convexity: 1e-9,
            sign: 1e-9,
        }
    }
}

/// Terminal quantities `H_T` and `X_T`.
struct Terminal {
    h: f64,
    x: f64,
    x_final: f64,
}

fn terminal_values(spec: &FocpSpec, cand: &CandidateTriplet) -> Result<Terminal> {
    let t = cand.t_final;
    let (x, u, l) = (cand.x.last_value(), cand.u.last_value(), cand.lambda.last_value());
    let ham = spec.hamiltonian();
    let (mut h, mut xt) = (
        ham.eval(t, x, u, l) + spec.terminal_cost.dt(t, x),
        spec.m_coef * l - spec.terminal_cost.dx(t, x),
    );
    if spec.n_coef != 0.0 {
        let n = spec.n_coef;
        let q = Quadrature::default();
        let int_l = q.rl_integral_right_closed(&cand.lambda, spec.order.complement(), t, t)?;
        let cd = caputo_left(&cand.x, spec.order, spec.a, t)?;
        h += -n * l * cd + n * cand.x.slope_at(t) * int_l;
        xt += n * int_l;
    }
    Ok(Terminal { h, x: xt, x_final: x })
}

/// Terminal conditions for `mode`, which must be the variant of `spec.terminal`.
pub fn transversality(spec: &FocpSpec, cand: &CandidateTriplet, mode: &TerminalMode) -> Result<Vec<TransversalityTerm>> {
    if !mode.same_kind(&spec.terminal) {
        return usage(format!(
            "terminal mode {} does not match the problem's {}",
            mode.name(),
            spec.terminal.name()
        ));
    }
    let tv = terminal_values(spec, cand)?;
    use TransversalityTerm::*;
    Ok(match mode {
        TerminalMode::FreeTimeFreeState => vec![Equality(tv.h), Equality(tv.x)],
        TerminalMode::FixedTimeFreeState { .. } => vec![Equality(tv.x)],
        TerminalMode::FreeTimeFixedState { .. } => vec![Equality(tv.h)],
        TerminalMode::FixedBoth { .. } => vec![],
        TerminalMode::Curve(curve) => vec![Equality(tv.h - curve.slope(cand.t_final) * tv.x)],
        TerminalMode::FixedTimeStateLowerBound { bound, .. } => {
            let gap = tv.x_final - bound;
            // an inactive bound leaves δx_T two-sided, so X_T itself must vanish
            let comp = if gap > 1e-9 * (1.0 + bound.abs()) { tv.x.abs() } else { gap * tv.x };
            vec![UpperSlack(tv.x), Complementarity(comp)]
        }
        TerminalMode::FixedStateTimeUpperBound { bound, .. } => {
            let gap = cand.t_final - bound;
            let comp = if gap < -1e-9 * (1.0 + bound.abs()) { tv.h.abs() } else { gap * tv.h };
            vec![LowerSlack(tv.h), Complementarity(comp)]
        }
    })
}

/// Max residuals of the state, costate and stationarity equations at the
/// interior grid points with `t > from`.
fn equation_residuals(spec: &FocpSpec, cand: &CandidateTriplet, from: f64) -> Result<(f64, f64, f64)> {
    let ham = spec.hamiltonian();
    let g = cand.grid();
    let (xs, us, ls) = (cand.x.values(), cand.u.values(), cand.lambda.values());
    let (dx, dl) = (cand.x.derivative(), cand.lambda.derivative());
    let t_final = cand.t_final;
    let (mut state, mut costate, mut stat) = (0.0f64, 0.0f64, 0.0f64);
    for i in 1..g.len() - 1 {
        let t = g[i];
        if t <= from {
            continue;
        }
        let (x, u, l) = (xs[i], us[i], ls[i]);
        let (mut s, mut c) = (
            spec.m_coef * dx.values()[i] - ham.dlambda(t, x, u, l),
            spec.m_coef * dl.values()[i] + ham.dx(t, x, u, l),
        );
        if spec.n_coef != 0.0 {
            s += spec.n_coef * caputo_left(&cand.x, spec.order, spec.a, t)?;
            c -= spec.n_coef * rl_derivative_right(&cand.lambda, spec.order, t_final, t)?;
        }
        state = state.max(s.abs());
        costate = costate.max(c.abs());
        stat = stat.max(ham.du(t, x, u, l).abs());
    }
    Ok((state, costate, stat))
}

/// Residuals of the necessary conditions for a problem whose cost and memory
/// start together.
pub fn necessary_residuals(spec: &FocpSpec, cand: &CandidateTriplet) -> Result<ConditionsReport> {
    spec.validate()?;
    if !spec.is_standard() {
        return usage("the cost starts after the memory; use generalized_residuals");
    }
    let (state, costate, stat) = equation_residuals(spec, cand, spec.a)?;
    let terms = transversality(spec, cand, &spec.terminal)?;
    Ok(ConditionsReport::new(state, costate, stat, terms, None))
}

/// `(t, |ₜD_T^α λ - ₜD_A^α λ|)` at the interior grid points of `(a, A)`.
pub fn extra_interval_profile(spec: &FocpSpec, cand: &CandidateTriplet) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for &t in cand.grid() {
        if t > spec.a && t < spec.a_cost {
            let to_t = rl_derivative_right(&cand.lambda, spec.order, cand.t_final, t)?;
            let to_a = rl_derivative_right(&cand.lambda, spec.order, spec.a_cost, t)?;
            out.push((t, (to_t - to_a).abs()));
        }
    }
    Ok(out)
}

/// Residuals of the conditions for a cost starting at `A > a`; the
/// candidate lives on `[a, T]`.
pub fn generalized_residuals(spec: &FocpSpec, cand: &CandidateTriplet) -> Result<ConditionsReport> {
    spec.validate()?;
    if spec.is_standard() {
        return usage("the cost and the memory start together; use necessary_residuals");
    }
    if (cand.x.first() - spec.a).abs() > 1e-12 * (1.0 + spec.a.abs()) {
        return usage(format!("candidate must start at a = {}, got {}", spec.a, cand.x.first()));
    }
    let (state, costate, stat) = equation_residuals(spec, cand, spec.a_cost)?;
    let extra = extra_interval_profile(spec, cand)?
        .into_iter()
        .fold(0.0f64, |m, (_, r)| m.max(r));
    let mut terms = transversality(spec, cand, &spec.terminal)?;
    if spec.x_fixed_at_a.is_none() {
        let c = spec.order.complement();
        let at_a = rl_integral_right(&cand.lambda, c, cand.t_final, spec.a)?
            - rl_integral_right(&cand.lambda, c, spec.a_cost, spec.a)?;
        terms.push(TransversalityTerm::Equality(spec.n_coef * at_a));
    }
    Ok(ConditionsReport::new(state, costate, stat, terms, Some(extra)))
}

/// Outcome of [`certify_sufficient`].
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub certified: bool,
    /// One line per hypothesis, failures first named by what failed.
    pub report: String,
}

/// Settings for [`certify_sufficient_with`].
#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 0x5eed,
            thresholds: Thresholds::default(),
        }
    }
}

/// Checks the hypotheses of the sufficiency theorem on `samples` random
/// midpoint triples.
pub fn certify_sufficient(spec: &FocpSpec, cand: &CandidateTriplet, samples: usize) -> Result<Certificate> {
    certify_sufficient_with(
        spec,
        cand,
        &CertifyOptions {
            samples,
            ..CertifyOptions::default()
        },
    )
}

fn span(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 1.0 + (hi - lo);
    (lo - pad, hi + pad)
}

/// Direction of a midpoint test.
#[derive(Clone, Copy)]
enum Dir {
    X,
    U,
    Joint,
}

pub fn certify_sufficient_with(spec: &FocpSpec, cand: &CandidateTriplet, opts: &CertifyOptions) -> Result<Certificate> {
    if spec.terminal.fixed_time().is_none() {
        return usage("the sufficiency certificate needs a fixed terminal time");
    }
    let residuals = necessary_residuals(spec, cand)?;
    let tol = opts.thresholds.convexity;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (t0, t1) = (spec.a_cost, cand.t_final);
    let (xr, ur) = (span(cand.x.values()), span(cand.u.values()));

    // worst midpoint excess g(mid) - mean, scaled, for each direction
    let mut l_excess = [0.0f64; 3];
    let mut f_excess = [0.0f64; 3];
    let mut f_nonlinear = 0.0f64;
    let mut phi_excess = 0.0f64;
    for k in 0..opts.samples {
        let dir = [Dir::X, Dir::U, Dir::Joint][k % 3];
        let t = rng.gen_range(t0..=t1);
        let (x1, u1) = (rng.gen_range(xr.0..xr.1), rng.gen_range(ur.0..ur.1));
        let (mut x2, mut u2) = (rng.gen_range(xr.0..xr.1), rng.gen_range(ur.0..ur.1));
        match dir {
            Dir::X => u2 = u1,
            Dir::U => x2 = x1,
            Dir::Joint => {}
        }
        let (xm, um) = (0.5 * (x1 + x2), 0.5 * (u1 + u2));
        let excess = |g: &dyn Fn(f64, f64) -> f64| {
            let (g1, g2) = (g(x1, u1), g(x2, u2));
            (g(xm, um) - 0.5 * (g1 + g2)) / (1.0 + g1.abs() + g2.abs())
        };
        let l = excess(&|x, u| spec.lagrangian.eval(t, x, u));
        let f = excess(&|x, u| spec.dynamics.eval(t, x, u));
        l_excess[dir as usize] = l_excess[dir as usize].max(l);
        f_excess[dir as usize] = f_excess[dir as usize].max(f);
        f_nonlinear = f_nonlinear.max(f.abs());
        let p = excess(&|x, _| spec.terminal_cost.eval(t1, x));
        phi_excess = phi_excess.max(p);
    }

    let mut lines = Vec::new();
    let mut ok = true;
    let mut check = |pass: bool, good: String, bad: String| {
        ok &= pass;
        lines.push(if pass { format!("ok: {good}") } else { format!("FAILED: {bad}") });
    };
    let residual_ok = residuals.passes(&opts.thresholds);
    check(
        residual_ok,
        format!("necessary residuals <= {:.1e}", opts.thresholds.residual),
        format!(
            "necessary residuals exceed {:.1e} (max {:.3e})",
            opts.thresholds.residual,
            residuals.max_residual()
        ),
    );
    let which = |e: &[f64; 3]| {
        if e[Dir::X as usize] > tol {
            "x"
        } else if e[Dir::U as usize] > tol {
            "u"
        } else {
            "(x, u)"
        }
    };
    let l_ok = l_excess.iter().all(|&e| e <= tol);
    check(l_ok, "L convex in (x, u)".into(), format!("L is not convex in {}", which(&l_excess)));
    let f_ok = f_excess.iter().all(|&e| e <= tol);
    check(f_ok, "f convex in (x, u)".into(), format!("f is not convex in {}", which(&f_excess)));
    check(phi_excess <= tol, "phi convex in x".into(), "phi is not convex in x".into());

    let lambda_min = cand.lambda.values().iter().copied().fold(f64::INFINITY, f64::min);
    let f_linear = f_nonlinear <= tol;
    check(
        lambda_min >= -opts.thresholds.sign || f_linear,
        if f_linear {
            "f linear in (x, u)".into()
        } else {
            "lambda >= 0".into()
        },
        format!("lambda takes negative values (min {lambda_min:.3e}) and f is not linear"),
    );
    Ok(Certificate {
        certified: ok,
        report: lines.join("\n"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{gamma, Order};
    use crate::model::{Curve, Integrand};
    use crate::problems::{classical_toy, example41, example41_exact, example_coefficients};

    fn half() -> Order {
        Order::new(0.5).unwrap()
    }

    fn exact41(n: usize, du: f64) -> CandidateTriplet {
        let (x, u) = example41_exact(half()).unwrap();
        CandidateTriplet::new(
            GridFn::uniform(0.0, 1.0, n, x).unwrap(),
            GridFn::uniform(0.0, 1.0, n, move |t| u(t) + du).unwrap(),
            GridFn::uniform(0.0, 1.0, n, |_| 0.0).unwrap(),
            1.0,
        )
        .unwrap()
    }

    fn toy_candidate(t_final: f64, lambda: f64) -> CandidateTriplet {
        CandidateTriplet::new(
            GridFn::uniform(0.0, t_final, 100, |t| t).unwrap(),
            GridFn::uniform(0.0, t_final, 100, |_| 1.0).unwrap(),
            GridFn::uniform(0.0, t_final, 100, move |_| lambda).unwrap(),
            t_final,
        )
        .unwrap()
    }

    #[test]
    fn exact_triplet_of_example_satisfies_conditions() {
        let spec = example41(half()).unwrap();
        let r = necessary_residuals(&spec, &exact41(2048, 0.0)).unwrap();
        assert!(r.max_residual() <= 5e-3, "{r}");
        assert!(r.transversality.is_empty());
    }

    #[test]
    fn residuals_shrink_under_refinement() {
        let spec = example41(half()).unwrap();
        let coarse = necessary_residuals(&spec, &exact41(256, 0.0)).unwrap();
        let fine = necessary_residuals(&spec, &exact41(512, 0.0)).unwrap();
        assert!(fine.hamiltonian_state_residual < coarse.hamiltonian_state_residual);
    }

    #[test]
    fn perturbed_control_breaks_stationarity() {
        let spec = example41(half()).unwrap();
        let r = necessary_residuals(&spec, &exact41(512, 0.1)).unwrap();
        assert!(r.stationarity_residual >= 0.01);
    }

    #[test]
    fn classical_toy_reduces_to_textbook_conditions() {
        let spec = classical_toy();
        let r = necessary_residuals(&spec, &toy_candidate(1.0, -2.0)).unwrap();
        assert!(r.max_residual() <= 1e-6, "{r}");
        assert_eq!(r.transversality.len(), 1);
    }

    #[test]
    fn classical_free_state_transversality_is_lambda_at_t() {
        let spec = crate::problems::classical_toy_coefficients().spec(
            half(),
            1.0,
            0.0,
            0.0,
            0.0,
            TerminalMode::FixedTimeFreeState { t_final: 1.0 },
        );
        let terms = transversality(&spec, &toy_candidate(1.0, -0.75), &spec.terminal).unwrap();
        assert_eq!(terms, vec![TransversalityTerm::Equality(-0.75)]);
    }

    #[test]
    fn mode_must_match() {
        let spec = classical_toy();
        let err = transversality(&spec, &toy_candidate(1.0, -2.0), &TerminalMode::FreeTimeFreeState);
        assert!(err.is_err());
    }

    #[test]
    fn fixed_both_has_no_terms() {
        let spec = example41(half()).unwrap();
        assert!(transversality(&spec, &exact41(64, 0.0), &spec.terminal).unwrap().is_empty());
    }

    #[test]
    fn curve_couples_slope() {
        // L = 1 + u², ẋ = u, x(T) = γ(T) = T; on the candidate H_T = 1 + 1 + λ, X_T = λ
        let spec = crate::problems::classical_toy()
            .terminal(TerminalMode::Curve(Curve::new(|t| t).with_slope(|_| 1.0)));
        let terms = transversality(&spec, &toy_candidate(1.0, -0.5), &spec.terminal).unwrap();
        assert_eq!(terms.len(), 1);
        assert!((terms[0].value() - ((2.0 - 0.5) - (-0.5))).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_complementarity() {
        let mode = |bound| TerminalMode::FixedTimeStateLowerBound { t_final: 1.0, bound };
        let q = crate::problems::classical_toy_coefficients();
        // x(1) = 1
        let inactive = q.spec(half(), 1.0, 0.0, 0.0, 0.0, mode(0.5));
        let terms = transversality(&inactive, &toy_candidate(1.0, -0.3), &inactive.terminal).unwrap();
        assert_eq!(terms[0], TransversalityTerm::UpperSlack(-0.3));
        assert_eq!(terms[0].violation(), 0.0);
        assert_eq!(terms[1], TransversalityTerm::Complementarity(0.3));
        assert_eq!(terms[1].violation(), 0.3);

        let active = q.spec(half(), 1.0, 0.0, 0.0, 0.0, mode(1.0));
        let terms = transversality(&active, &toy_candidate(1.0, -0.3), &active.terminal).unwrap();
        assert_eq!(terms[1].violation(), 0.0);
        let terms = transversality(&active, &toy_candidate(1.0, 0.4), &active.terminal).unwrap();
        assert!((terms[0].violation() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn upper_time_bound_complementarity() {
        let q = crate::problems::classical_toy_coefficients();
        let mode = |bound| TerminalMode::FixedStateTimeUpperBound { x_final: 1.0, bound };
        // H_T = 1 + 1 + λ
        let slack = q.spec(half(), 1.0, 0.0, 0.0, 0.0, mode(2.0));
        let terms = transversality(&slack, &toy_candidate(1.0, -1.0), &slack.terminal).unwrap();
        assert_eq!(terms, vec![TransversalityTerm::LowerSlack(1.0), TransversalityTerm::Complementarity(1.0)]);
        let tight = q.spec(half(), 1.0, 0.0, 0.0, 0.0, mode(1.0));
        let terms = transversality(&tight, &toy_candidate(1.0, -1.0), &tight.terminal).unwrap();
        assert_eq!(terms[0].violation(), 0.0);
        assert_eq!(terms[1].violation(), 0.0);
    }

    fn delayed(fixed_at_a: bool) -> FocpSpec {
        let spec = example_coefficients(0.5)
            .spec(half(), 1.0, 1.0, 0.0, 0.0, TerminalMode::FixedTimeFreeState { t_final: 1.0 })
            .delayed_cost(0.4, 0.1);
        if fixed_at_a {
            spec.fix_at_memory_start(0.0)
        } else {
            spec
        }
    }

    fn on_grid(lambda: impl Fn(f64) -> f64) -> CandidateTriplet {
        let n = 400;
        CandidateTriplet::new(
            GridFn::uniform(0.0, 1.0, n, |t| t * t).unwrap(),
            GridFn::uniform(0.0, 1.0, n, |t| 2.0 * t).unwrap(),
            GridFn::uniform(0.0, 1.0, n, lambda).unwrap(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn generalized_with_zero_costate() {
        let r = generalized_residuals(&delayed(false), &on_grid(|_| 0.0)).unwrap();
        assert_eq!(r.extra_interval_residual, Some(0.0));
        assert_eq!(r.transversality.len(), 2);
        assert_eq!(r.transversality[1].violation(), 0.0);
        let r = generalized_residuals(&delayed(true), &on_grid(|_| 0.0)).unwrap();
        assert_eq!(r.transversality.len(), 1);
    }

    #[test]
    fn generalized_constant_costate_matches_closed_form() {
        let spec = delayed(false);
        let profile = extra_interval_profile(&spec, &on_grid(|_| 1.0)).unwrap();
        assert!(!profile.is_empty());
        let g = gamma(0.5).unwrap();
        for (t, r) in profile {
            let exact = ((1.0 - t).powf(-0.5) - (0.4 - t).powf(-0.5)).abs() / g;
            assert!((r - exact).abs() <= 1e-4 * exact.max(1.0), "t={t}: {r} vs {exact}");
        }
    }

    #[test]
    fn setting_is_checked() {
        assert!(necessary_residuals(&delayed(false), &on_grid(|_| 0.0)).is_err());
        let spec = example41(half()).unwrap();
        assert!(generalized_residuals(&spec, &exact41(64, 0.0)).is_err());
    }

    #[test]
    fn example_is_certified() {
        let spec = example41(half()).unwrap();
        let c = certify_sufficient(&spec, &exact41(2048, 0.0), 1000).unwrap();
        assert!(c.certified, "{}", c.report);
    }

    #[test]
    fn concave_lagrangian_is_rejected() {
        let mut spec = example41(half()).unwrap();
        spec.lagrangian = Integrand::new(|_, x, _| -x * x);
        let c = certify_sufficient(&spec, &exact41(256, 0.0), 300).unwrap();
        assert!(!c.certified);
        assert!(c.report.contains("L is not convex in x"), "{}", c.report);
    }

    #[test]
    fn negative_costate_with_nonlinear_dynamics_is_rejected() {
        let mut spec = example41(half()).unwrap();
        spec.dynamics = Integrand::new(|t, x, u| u + t * t + 1e-3 * x * x);
        let mut cand = exact41(256, 0.0);
        cand.lambda = GridFn::uniform(0.0, 1.0, 256, |t| if t > 0.5 { -1.0 } else { 0.0 }).unwrap();
        let c = certify_sufficient(&spec, &cand, 300).unwrap();
        assert!(!c.certified);
        assert!(c.report.contains("lambda takes negative values"), "{}", c.report);
    }

    #[test]
    fn certificate_requires_residuals_and_fixed_time() {
        let spec = example41(half()).unwrap();
        let c = certify_sufficient(&spec, &exact41(256, 0.5), 100).unwrap();
        assert!(!c.certified);
        assert!(certify_sufficient(&classical_toy(), &toy_candidate(1.0, -2.0), 10).is_err());
    }
}

//! Indirect solution of fractional optimal control problems.
//!
//! Both routes end in a two-point boundary value problem solved by shooting
//! (see [`bvp`]). The report grid is the integration mesh with its end nodes
//! moved onto `a` and `T`.

mod assemble;
pub mod bvp;

pub use assemble::{
    assemble, assemble_route_a, assemble_route_b, Assembled, FreeTimeCondition, Layout, Route, END_OFFSET, GRADING,
};
pub use bvp::{solve_bvp, solve_bvp_with, BvpOptions, BvpProblem, BvpSolution, Horizon};

use crate::error::{usage, Result};
use crate::fracops::GridFn;
use crate::model::{cost, FocpSpec, TerminalMode};

/// Tunables of [`solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub route: Route,
    /// Truncation order `K` of the expansions.
    pub k: usize,
    pub mesh: usize,
    pub tol: f64,
    /// Initial horizon for free-time problems.
    pub t_guess: f64,
    /// Route A free-time condition; `None` picks [`FreeTimeCondition::default_for`].
    pub free_time: Option<FreeTimeCondition>,
    pub max_iter: usize,
    pub segments: usize,
}

impl SolveOptions {
    pub fn new(route: Route, k: usize, mesh: usize, tol: f64) -> Self {
        Self {
            route,
            k,
            mesh,
            tol,
            t_guess: 1.0,
            free_time: None,
            max_iter: 50,
            segments: 4,
        }
    }

    pub fn t_guess(mut self, t_guess: f64) -> Self {
        self.t_guess = t_guess;
        self
    }
}

/// A converged solution.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub route: Route,
    pub k: usize,
    pub mesh: usize,
    pub x: GridFn,
    pub u: GridFn,
    pub lambda: GridFn,
    /// `V_2..V_K`; empty without a fractional term.
    pub aux_v: Vec<GridFn>,
    /// `W_2..W_K` (route A) or `λ_2..λ_K` (route B).
    pub aux_w: Vec<GridFn>,
    pub t_final: f64,
    /// Cost `J` of `(x, u)`.
    pub cost: f64,
    pub newton_iters: usize,
    pub boundary_residual_norm: f64,
    pub residual_history: Vec<f64>,
    pub multiple_shooting: bool,
    pub error_vs_reference: Option<f64>,
}

impl SolveReport {
    /// Stores the max-norm distance of `x` to `reference`.
    pub fn with_reference(mut self, reference: impl Fn(f64) -> f64) -> Self {
        self.error_vs_reference = Some(error_vs_reference(&self, reference));
        self
    }
}

/// `max_i |x(t_i) - reference(t_i)|` over the report grid.
pub fn error_vs_reference(report: &SolveReport, reference: impl Fn(f64) -> f64) -> f64 {
    report
        .x
        .grid()
        .iter()
        .zip(report.x.values())
        .map(|(&t, &x)| (x - reference(t)).abs())
        .fold(0.0, f64::max)
}

/// Solves `spec` by `route` with default options.
pub fn solve(spec: &FocpSpec, route: Route, k: usize, mesh: usize, tol: f64) -> Result<SolveReport> {
    solve_with(spec, &SolveOptions::new(route, k, mesh, tol))
}

/// Free-time solve starting from horizon `t_guess`.
pub fn solve_free_time(spec: &FocpSpec, route: Route, k: usize, mesh: usize, tol: f64, t_guess: f64) -> Result<SolveReport> {
    if !spec.terminal.is_free_time() {
        return usage(format!("terminal mode {} has a fixed horizon", spec.terminal.name()));
    }
    if !(t_guess > spec.a) {
        return usage(format!("horizon guess {t_guess} must exceed the start {}", spec.a));
    }
    solve_with(spec, &SolveOptions::new(route, k, mesh, tol).t_guess(t_guess))
}

pub fn solve_with(spec: &FocpSpec, opts: &SolveOptions) -> Result<SolveReport> {
    let assembled = match (opts.route, opts.free_time) {
        (Route::Fractional, Some(cond)) => assemble_route_a(spec, opts.k, opts.t_guess, cond)?,
        _ => assemble(spec, opts.route, opts.k, opts.t_guess)?,
    };
    let bopts = BvpOptions {
        mesh: opts.mesh,
        tol: opts.tol,
        max_iter: opts.max_iter,
        segments: opts.segments,
    };
    let sol = solve_bvp_with(&assembled.bvp, &bopts)?;
    report(spec, &assembled, sol, opts.mesh)
}

fn report(spec: &FocpSpec, asm: &Assembled, sol: BvpSolution, mesh: usize) -> Result<SolveReport> {
    let lay = asm.layout();
    let n = sol.t.len();
    let (mut us, mut ls) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for (&t, y) in sol.t.iter().zip(&sol.y) {
        let (u, l) = asm.outputs(t, y, sol.t_final)?;
        us.push(u);
        ls.push(l);
    }
    let mut grid = sol.t.clone();
    grid[0] = spec.a;
    grid[n - 1] = sol.t_final;
    let column = |i: usize| GridFn::new(grid.clone(), sol.y.iter().map(|y| y[i]).collect());
    let x = column(Layout::X)?;
    let u = GridFn::new(grid.clone(), us)?;
    let lambda = GridFn::new(grid.clone(), ls)?;
    let aux_v = (2..2 + lay.n_aux).map(|p| column(lay.v(p))).collect::<Result<Vec<_>>>()?;
    let aux_w = (2..2 + lay.n_aux).map(|p| column(lay.w(p))).collect::<Result<Vec<_>>>()?;
    let j = cost(spec, &x, &u, sol.t_final)?;
    Ok(SolveReport {
        route: asm.route,
        k: asm.k,
        mesh,
        x,
        u,
        lambda,
        aux_v,
        aux_w,
        t_final: sol.t_final,
        cost: j,
        newton_iters: sol.iterations,
        boundary_residual_norm: sol.residual_norm,
        residual_history: sol.residual_history,
        multiple_shooting: sol.multiple_shooting,
        error_vs_reference: None,
    })
}

/// `spec` with its free horizon frozen at `t_final`.
pub fn fix_horizon(spec: &FocpSpec, t_final: f64) -> Result<FocpSpec> {
    let mode = match &spec.terminal {
        TerminalMode::FreeTimeFixedState { x_final } => TerminalMode::FixedBoth {
            t_final,
            x_final: *x_final,
        },
        TerminalMode::FreeTimeFreeState => TerminalMode::FixedTimeFreeState { t_final },
        TerminalMode::Curve(c) => TerminalMode::FixedBoth {
            t_final,
            x_final: c.eval(t_final),
        },
        other => return usage(format!("terminal mode {} has no free horizon", other.name())),
    };
    Ok(spec.clone().terminal(mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{approx_caputo_left, ExpansionCoeffs};
    use crate::fracops::{caputo_left, Order};
    use crate::model::admissible;
    use crate::problems::{classical_toy, example41, example41_exact, example42};

    fn half() -> Order {
        Order::new(0.5).unwrap()
    }

    #[test]
    fn classical_toy_free_time() {
        for route in [Route::Fractional, Route::Approximate] {
            let r = solve_free_time(&classical_toy(), route, 2, 200, 1e-10, 0.7).unwrap();
            assert!((r.t_final - 1.0).abs() < 1e-6, "{}", r.t_final);
            assert!((r.cost - 2.0).abs() < 1e-6, "{}", r.cost);
            assert!(r.u.values().iter().all(|u| (u - 1.0).abs() < 1e-6));
            assert!(r.lambda.values().iter().all(|l| (l + 2.0).abs() < 1e-6));
            assert!(r.aux_v.is_empty());
        }
    }

    #[test]
    fn example41_error_drops_with_order() {
        let (exact, _) = example41_exact(half()).unwrap();
        let spec = example41(half()).unwrap();
        for route in [Route::Fractional, Route::Approximate] {
            let e: Vec<f64> = [2, 3]
                .iter()
                .map(|&k| {
                    let r = solve(&spec, route, k, 2000, 1e-10).unwrap();
                    assert!(r.boundary_residual_norm <= 1e-8);
                    assert_eq!(r.aux_v.len(), k - 1);
                    error_vs_reference(&r, &exact)
                })
                .collect();
            assert!(e[1] < e[0] && e[1] <= 0.1, "{route:?}: {e:?}");
        }
    }

    #[test]
    fn example42_routes_agree() {
        let spec = example42(half());
        let a = solve_free_time(&spec, Route::Fractional, 2, 1000, 1e-10, 1.0).unwrap();
        let b = solve_free_time(&spec, Route::Approximate, 2, 1000, 1e-10, 1.0).unwrap();
        assert!((a.t_final - b.t_final).abs() / a.t_final <= 0.05, "{} {}", a.t_final, b.t_final);
        // λ ≡ 0 on both routes, so T comes from x(T) = 1 alone
        assert!((a.t_final - 1.29).abs() < 0.01, "{}", a.t_final);
        assert!(a.lambda.max_abs() < 1e-12 && b.lambda.max_abs() < 1e-12);
        let s_grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let dx = s_grid
            .iter()
            .map(|s| (a.x.eval(s * a.t_final) - b.x.eval(s * b.t_final)).abs())
            .fold(0.0, f64::max);
        assert!(dx <= 0.05, "{dx}");
    }

    #[test]
    fn converged_solutions_are_admissible() {
        // the dynamics residual is bounded by the truncation error of the expansion
        let spec = example41(half()).unwrap();
        let r = solve(&spec, Route::Approximate, 3, 1000, 1e-10).unwrap();
        let coeffs = ExpansionCoeffs::new(half(), 3).unwrap();
        let budget = r
            .x
            .grid()
            .iter()
            .skip(1)
            .step_by(50)
            .map(|&t| {
                let exact = caputo_left(&r.x, half(), 0.0, t).unwrap();
                (exact - approx_caputo_left(&r.x, &coeffs, 0.0, t).unwrap()).abs()
            })
            .fold(0.0, f64::max);
        let res = admissible(&spec, &r.x, &r.u).unwrap();
        assert!(res <= 10.0 * budget, "{res} {budget}");

        let toy = solve_free_time(&classical_toy(), Route::Fractional, 2, 200, 1e-10, 1.0).unwrap();
        assert!(admissible(&classical_toy(), &toy.x, &toy.u).unwrap() < 1e-8);
    }

    #[test]
    fn reference_error_properties() {
        let r = solve(&classical_toy().terminal(TerminalMode::FixedBoth { t_final: 1.0, x_final: 1.0 }), Route::Fractional, 2, 64, 1e-12).unwrap();
        assert!(error_vs_reference(&r, |t| t) < 1e-12);
        let r = r.with_reference(|t| t + 0.25);
        assert!((r.error_vs_reference.unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fixing_the_horizon() {
        let fixed = fix_horizon(&classical_toy(), 2.0).unwrap();
        assert_eq!(fixed.terminal.fixed_time(), Some(2.0));
        assert!(fix_horizon(&fixed, 1.0).is_err());
        assert!(solve_free_time(&fixed, Route::Fractional, 2, 64, 1e-8, 1.0).is_err());
        assert!(solve_free_time(&classical_toy(), Route::Fractional, 2, 64, 1e-8, -1.0).is_err());
    }
}

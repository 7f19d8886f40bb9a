//! Two-point boundary value problems by shooting.
//!
//! The system `ẏ = F(t, y, T)` is integrated with fixed-step RK4 on a mesh
//! over `[t0 + εΔ, T - εΔ]`, `Δ = T - t0`. The unknowns are the full state at
//! the left end, plus `T` when the horizon is free; the boundary residual must
//! supply one equation per unknown. Components listed as pinned keep their
//! initial value and Newton works on the rest in the least-squares sense. Newton with a forward-difference Jacobian
//! and Armijo backtracking drives the residual to zero; if it stalls, the
//! interval is split into segments and the same Newton runs on the multiple
//! shooting system.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SolveError};

/// `F(t, y, T, dy)`: writes `dy/dt` into `dy`.
pub type Rhs = Arc<dyn Fn(f64, &[f64], f64, &mut [f64]) -> Result<(), SolveError> + Send + Sync>;
/// `r(y_start, y_end, T)`.
pub type Boundary = Arc<dyn Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Fixed(f64),
    Free { guess: f64 },
}

impl Horizon {
    pub fn is_free(self) -> bool {
        matches!(self, Horizon::Free { .. })
    }

    pub fn initial(self) -> f64 {
        match self {
            Horizon::Fixed(t) | Horizon::Free { guess: t } => t,
        }
    }
}

#[derive(Clone)]
pub struct BvpProblem {
    pub dim: usize,
    pub t_start: f64,
    pub horizon: Horizon,
    pub rhs: Rhs,
    pub boundary: Boundary,
    /// Starting value of `y(t_start)` for Newton.
    pub initial_guess: Vec<f64>,
    /// Relative distance `ε` of both integration ends from `t_start` and `T`.
    pub end_offset: f64,
    /// Exponent `q` of the mesh map `r^q / (r^q + (1-r)^q)`; 1 is uniform.
    pub grading: f64,
    /// Components of `y(t_start)` held at their `initial_guess` value.
    pub pinned: Vec<usize>,
}

impl fmt::Debug for BvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BvpProblem")
            .field("dim", &self.dim)
            .field("t_start", &self.t_start)
            .field("horizon", &self.horizon)
            .field("end_offset", &self.end_offset)
            .field("grading", &self.grading)
            .finish()
    }
}

impl BvpProblem {
    pub fn new(
        dim: usize,
        t_start: f64,
        horizon: Horizon,
        rhs: impl Fn(f64, &[f64], f64, &mut [f64]) -> Result<(), SolveError> + Send + Sync + 'static,
        boundary: impl Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            t_start,
            horizon,
            rhs: Arc::new(rhs),
            boundary: Arc::new(boundary),
            initial_guess: vec![0.0; dim],
            end_offset: 0.0,
            grading: 1.0,
            pinned: Vec::new(),
        }
    }

    /// Number of shooting unknowns: `dim`, plus one for a free horizon.
    pub fn n_unknowns(&self) -> usize {
        self.dim + usize::from(self.horizon.is_free())
    }

    /// Mesh nodes for horizon `t_final`.
    pub fn nodes(&self, mesh: usize, t_final: f64) -> Vec<f64> {
        let span = t_final - self.t_start;
        let eps = self.end_offset;
        let q = self.grading;
        (0..=mesh)
            .map(|j| {
                let r = j as f64 / mesh as f64;
                let g = if q == 1.0 {
                    r
                } else {
                    let (a, b) = (r.powf(q), (1.0 - r).powf(q));
                    a / (a + b)
                };
                self.t_start + span * (eps + (1.0 - 2.0 * eps) * g)
            })
            .collect()
    }

    fn split(&self, z: &[f64]) -> Result<(f64, usize), SolveError> {
        let t_final = match self.horizon {
            Horizon::Fixed(t) => t,
            Horizon::Free { .. } => z[z.len() - 1],
        };
        if !(t_final > self.t_start) || !t_final.is_finite() {
            return Err(SolveError::Horizon { t_final });
        }
        Ok((t_final, self.dim))
    }
}

/// Tunables of [`solve_bvp_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpOptions {
    pub mesh: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Segments of the multiple-shooting fallback; 0 or 1 disables it.
    pub segments: usize,
}

impl BvpOptions {
    pub fn new(mesh: usize, tol: f64) -> Self {
        Self {
            mesh,
            tol,
            max_iter: 50,
            segments: 4,
        }
    }
}

/// Converged trajectory.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub t: Vec<f64>,
    /// State at every node of `t`.
    pub y: Vec<Vec<f64>>,
    pub t_final: f64,
    pub iterations: usize,
    /// Max norm of the boundary (and continuity) residual.
    pub residual_norm: f64,
    pub residual_history: Vec<f64>,
    pub multiple_shooting: bool,
}

/// RK4 over `nodes`; returns the end state and, if asked, every node state.
fn integrate(
    p: &BvpProblem,
    nodes: &[f64],
    y0: &[f64],
    t_final: f64,
    keep: bool,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), SolveError> {
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut path = Vec::with_capacity(if keep { nodes.len() } else { 0 });
    if keep {
        path.push(y.clone());
    }
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for w in nodes.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        (p.rhs)(t, &y, t_final, &mut k1)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        (p.rhs)(t + 0.5 * h, &tmp, t_final, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        (p.rhs)(t + 0.5 * h, &tmp, t_final, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        (p.rhs)(t + h, &tmp, t_final, &mut k4)?;
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite { t: w[1] });
        }
        if keep {
            path.push(y.clone());
        }
    }
    Ok((y, path))
}

/// Single-shooting residual at unknowns `z`.
pub fn shooting_residual(p: &BvpProblem, mesh: usize, z: &[f64]) -> Result<Vec<f64>, SolveError> {
    let (t_final, dim) = p.split(z)?;
    let nodes = p.nodes(mesh, t_final);
    let (end, _) = integrate(p, &nodes, &z[..dim], t_final, false)?;
    Ok((p.boundary)(&z[..dim], &end, t_final))
}

/// Forward-difference Jacobian of `f` at `z`, given `f(z) = r`.
/// Columns listed in `skip` are left zero.
fn fd_jacobian(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>, SolveError>,
    z: &[f64],
    r: &[f64],
    skip: &[usize],
) -> Result<DMatrix<f64>, SolveError> {
    let (m, n) = (r.len(), z.len());
    let mut jac = DMatrix::zeros(m, n);
    let mut zp = z.to_vec();
    for j in (0..n).filter(|j| !skip.contains(j)) {
        let h = 1e-7 * z[j].abs().max(1.0);
        zp[j] = z[j] + h;
        let rp = f(&zp)?;
        zp[j] = z[j];
        for i in 0..m {
            jac[(i, j)] = (rp[i] - r[i]) / h;
        }
    }
    Ok(jac)
}

/// Jacobian of the single-shooting residual by forward differences.
pub fn shooting_jacobian(p: &BvpProblem, mesh: usize, z: &[f64]) -> Result<DMatrix<f64>, SolveError> {
    let f = |z: &[f64]| shooting_residual(p, mesh, z);
    let r = f(z)?;
    fd_jacobian(&f, z, &r, &p.pinned)
}

/// Newton step `-J⁻¹ r`, with columns equilibrated before the LU solve.
/// A singular `J` falls back to the minimum-norm least-squares step.
fn newton_step(jac: DMatrix<f64>, r: &[f64]) -> Result<Vec<f64>, SolveError> {
    let n = jac.ncols();
    if jac.nrows() != n {
        return Err(SolveError::SingularJacobian);
    }
    let mut jac = jac;
    let mut scale = vec![1.0; n];
    for j in 0..n {
        let s = jac.column(j).amax();
        if !s.is_finite() {
            return Err(SolveError::SingularJacobian);
        }
        if s == 0.0 {
            continue;
        }
        scale[j] = s;
        jac.column_mut(j).scale_mut(1.0 / s);
    }
    let rhs = -DVector::from_column_slice(r);
    let sol = match jac.clone().lu().solve(&rhs) {
        Some(s) if s.iter().all(|v| v.is_finite()) => s,
        _ => {
            let svd = jac.svd(true, true);
            let cut = 1e-12 * svd.singular_values.max();
            svd.solve(&rhs, cut).map_err(|_| SolveError::SingularJacobian)?
        }
    };
    if sol.iter().any(|v| !v.is_finite()) || sol.iter().all(|&v| v == 0.0) {
        return Err(SolveError::SingularJacobian);
    }
    Ok(sol.iter().zip(&scale).map(|(v, s)| v / s).collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct NewtonRun {
    z: Vec<f64>,
    iterations: usize,
    history: Vec<f64>,
    converged: bool,
    failure: Option<SolveError>,
}

fn newton(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>, SolveError>,
    z0: Vec<f64>,
    pinned: &[usize],
    tol: f64,
    max_iter: usize,
) -> NewtonRun {
    let mut run = NewtonRun {
        z: z0,
        iterations: 0,
        history: Vec::new(),
        converged: false,
        failure: None,
    };
    let mut r = match f(&run.z) {
        Ok(r) => r,
        Err(e) => {
            run.failure = Some(e);
            return run;
        }
    };
    loop {
        let norm = max_abs(&r);
        run.history.push(norm);
        if norm <= tol {
            run.converged = true;
            return run;
        }
        if run.iterations >= max_iter {
            return run;
        }
        run.iterations += 1;
        let step = match fd_jacobian(f, &run.z, &r, pinned).and_then(|jac| newton_step(jac, &r)) {
            Ok(s) => s,
            Err(e) => {
                run.failure = Some(e);
                return run;
            }
        };
        let base = norm2(&r);
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= 1.0 / 1024.0 {
            let trial: Vec<f64> = run.z.iter().zip(&step).map(|(z, d)| z + lambda * d).collect();
            if let Ok(rt) = f(&trial) {
                if norm2(&rt) <= (1.0 - 1e-4 * lambda) * base {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((z, rt)) => {
                run.z = z;
                r = rt;
            }
            None => return run,
        }
    }
}

/// Boundaries of `segments` index ranges over `0..=mesh`.
fn segment_bounds(mesh: usize, segments: usize) -> Vec<usize> {
    (0..=segments).map(|i| i * mesh / segments).collect()
}

fn multiple_shooting_residual(p: &BvpProblem, mesh: usize, bounds: &[usize], z: &[f64]) -> Result<Vec<f64>, SolveError> {
    let t_final = match p.horizon {
        Horizon::Fixed(t) => t,
        Horizon::Free { .. } => z[z.len() - 1],
    };
    if !(t_final > p.t_start) || !t_final.is_finite() {
        return Err(SolveError::Horizon { t_final });
    }
    let nodes = p.nodes(mesh, t_final);
    let d = p.dim;
    let segs = bounds.len() - 1;
    let mut ends = Vec::with_capacity(segs);
    for s in 0..segs {
        let (end, _) = integrate(p, &nodes[bounds[s]..=bounds[s + 1]], &z[s * d..(s + 1) * d], t_final, false)?;
        ends.push(end);
    }
    let mut r = (p.boundary)(&z[..d], &ends[segs - 1], t_final);
    for s in 0..segs - 1 {
        r.extend(ends[s].iter().zip(&z[(s + 1) * d..(s + 2) * d]).map(|(e, y)| e - y));
    }
    Ok(r)
}

/// See [`solve_bvp_with`]; at most 50 Newton iterations, 4 fallback segments.
pub fn solve_bvp(p: &BvpProblem, mesh: usize, tol: f64) -> Result<BvpSolution> {
    solve_bvp_with(p, &BvpOptions::new(mesh, tol))
}

pub fn solve_bvp_with(p: &BvpProblem, opts: &BvpOptions) -> Result<BvpSolution> {
    let mesh = opts.mesh;
    if mesh < 32 {
        return crate::error::usage(format!("mesh must be at least 32, got {mesh}"));
    }
    if !(opts.tol > 0.0) {
        return crate::error::usage("tolerance must be positive");
    }
    if p.initial_guess.len() != p.dim {
        return crate::error::usage("initial guess length must equal dim");
    }
    let mut z0 = p.initial_guess.clone();
    if let Horizon::Free { guess } = p.horizon {
        if !(guess > p.t_start) {
            return Err(SolveError::Horizon { t_final: guess }.into());
        }
        z0.push(guess);
    }
    let probe = shooting_residual(p, mesh, &z0);
    if let Ok(r) = &probe {
        if r.len() != p.n_unknowns() {
            return crate::error::usage(format!(
                "boundary residual has {} entries for {} unknowns",
                r.len(),
                p.n_unknowns()
            ));
        }
    }

    let single = |z: &[f64]| shooting_residual(p, mesh, z);
    // predictor for a free horizon: fit T with the starting state held fixed
    let (mut pre_history, mut pre_iters) = (Vec::new(), 0);
    if p.horizon.is_free() {
        let frozen: Vec<usize> = (0..p.dim).collect();
        let pre = newton(&single, z0.clone(), &frozen, opts.tol, opts.max_iter);
        if pre.history.len() > 1 && pre.history.last() < pre.history.first() {
            z0 = pre.z;
            pre_history = pre.history;
            pre_history.pop();
            pre_iters = pre.iterations;
        }
    }
    let mut run = newton(&single, z0.clone(), &p.pinned, opts.tol, opts.max_iter);
    pre_history.append(&mut run.history);
    run.history = pre_history;
    run.iterations += pre_iters;
    if run.converged {
        let (t_final, d) = p.split(&run.z)?;
        let nodes = p.nodes(mesh, t_final);
        let (_, y) = integrate(p, &nodes, &run.z[..d], t_final, true)?;
        return Ok(BvpSolution {
            t: nodes,
            y,
            t_final,
            iterations: run.iterations,
            residual_norm: *run.history.last().unwrap_or(&f64::NAN),
            residual_history: run.history,
            multiple_shooting: false,
        });
    }
    if opts.segments < 2 {
        return Err(failure(run).into());
    }

    // multiple shooting, started from the single-shooting iterate where possible
    let segs = opts.segments;
    let bounds = segment_bounds(mesh, segs);
    let d = p.dim;
    let free = p.horizon.is_free();
    let t_guess = if free { run.z[d] } else { p.horizon.initial() };
    let mut zm = Vec::with_capacity(segs * d + usize::from(free));
    let seeded = p
        .split(&run.z)
        .ok()
        .and_then(|(t, _)| integrate(p, &p.nodes(mesh, t), &run.z[..d], t, true).ok());
    for s in 0..segs {
        match &seeded {
            Some((_, path)) => zm.extend_from_slice(&path[bounds[s]]),
            None => zm.extend_from_slice(if s == 0 { &run.z[..d] } else { &p.initial_guess }),
        }
    }
    if free {
        zm.push(t_guess);
    }
    let multi = |z: &[f64]| multiple_shooting_residual(p, mesh, &bounds, z);
    let mrun = newton(&multi, zm, &p.pinned, opts.tol, opts.max_iter);
    if !mrun.converged {
        let mut combined = run.history.clone();
        combined.extend(&mrun.history);
        let best = if mrun.history.last().unwrap_or(&f64::INFINITY) < run.history.last().unwrap_or(&f64::INFINITY) {
            mrun.z.clone()
        } else {
            run.z.clone()
        };
        return Err(match (run.failure, mrun.failure) {
            (_, Some(e @ (SolveError::Stationarity { .. } | SolveError::VanishingDenominator { .. }))) => e,
            _ => SolveError::NoConvergence {
                iterations: run.iterations + mrun.iterations,
                last_iterate: best,
                residual_history: combined,
            },
        }
        .into());
    }
    let t_final = if free { mrun.z[segs * d] } else { p.horizon.initial() };
    let nodes = p.nodes(mesh, t_final);
    let mut y = Vec::with_capacity(nodes.len());
    for s in 0..segs {
        let (_, path) = integrate(p, &nodes[bounds[s]..=bounds[s + 1]], &mrun.z[s * d..(s + 1) * d], t_final, true)?;
        let skip = usize::from(s > 0);
        y.extend(path.into_iter().skip(skip));
    }
    let mut history = run.history;
    history.extend(&mrun.history);
    Ok(BvpSolution {
        t: nodes,
        y,
        t_final,
        iterations: run.iterations + mrun.iterations,
        residual_norm: *mrun.history.last().unwrap_or(&f64::NAN),
        residual_history: history,
        multiple_shooting: true,
    })
}

fn failure(run: NewtonRun) -> SolveError {
    match run.failure {
        Some(e @ (SolveError::Stationarity { .. } | SolveError::VanishingDenominator { .. })) => e,
        _ => SolveError::NoConvergence {
            iterations: run.iterations,
            last_iterate: run.z,
            residual_history: run.history,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ÿ = y, y(0) = 0, y(1) = 1.
    fn sinh_problem() -> BvpProblem {
        BvpProblem::new(
            2,
            0.0,
            Horizon::Fixed(1.0),
            |_, y, _, dy| {
                dy[0] = y[1];
                dy[1] = y[0];
                Ok(())
            },
            |y0, y1, _| vec![y0[0], y1[0] - 1.0],
        )
    }

    #[test]
    fn linear_problem() {
        let sol = solve_bvp(&sinh_problem(), 200, 1e-10).unwrap();
        assert!((sol.y[0][1] - 0.850_918_128_239_321_55).abs() < 1e-9);
        assert!(sol.residual_norm <= 1e-10);
        assert!(!sol.multiple_shooting);
    }

    #[test]
    fn jacobian_matches_directional_derivatives() {
        let p = sinh_problem();
        let z = [0.3, 0.7];
        let jac = shooting_jacobian(&p, 100, &z).unwrap();
        // exact: y1(1) = y0 cosh 1 + y0' sinh 1
        let exact = [1f64.cosh(), 1f64.sinh()];
        for (j, e) in exact.iter().enumerate() {
            assert!((jac[(1, j)] - e).abs() <= 1e-4 * e.abs());
            assert!((jac[(0, j)] - if j == 0 { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
    }

    #[test]
    fn free_horizon() {
        // ẋ = 1, x(0) = 0, x(T) = 2 gives T = 2
        let mut p = BvpProblem::new(
            1,
            0.0,
            Horizon::Free { guess: 1.0 },
            |_, _, _, dy| {
                dy[0] = 1.0;
                Ok(())
            },
            |y0, y1, _| vec![y0[0], y1[0] - 2.0],
        );
        p.end_offset = 0.0;
        let sol = solve_bvp(&p, 40, 1e-12).unwrap();
        assert!((sol.t_final - 2.0).abs() < 1e-10);
        assert_eq!(*sol.t.last().unwrap(), 2.0);
    }

    #[test]
    fn graded_mesh_is_symmetric_and_offset() {
        let mut p = sinh_problem();
        p.grading = 3.0;
        p.end_offset = 1e-6;
        let t = p.nodes(64, 2.0);
        assert!((t[0] - 2e-6).abs() < 1e-18);
        assert!((t[64] - (2.0 - 2e-6)).abs() < 1e-15);
        assert!((t[32] - 1.0).abs() < 1e-15);
        assert!(t[1] - t[0] < t[33] - t[32]);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn multiple_shooting_rescues_unstable_shooting() {
        // ÿ = 2500 y: growth e^50 swamps single shooting in rounding error
        let p = BvpProblem::new(
            2,
            0.0,
            Horizon::Fixed(1.0),
            |_, y, _, dy| {
                dy[0] = y[1];
                dy[1] = 2500.0 * y[0];
                Ok(())
            },
            |y0, y1, _| vec![y0[0] - 1.0, y1[0] - 1.0],
        );
        let sol = solve_bvp(&p, 2000, 1e-9).unwrap();
        assert!(sol.multiple_shooting);
        // y = cosh(50 (t - 1/2)) / cosh(25)
        let exact_mid = 1.0 / 25f64.cosh();
        assert!((sol.y[1000][0] - exact_mid).abs() < 1e-9);
        assert_eq!(sol.y.len(), sol.t.len());
    }

    #[test]
    fn non_convergence_carries_history() {
        // boundary residual with no root
        let p = BvpProblem::new(
            1,
            0.0,
            Horizon::Fixed(1.0),
            |_, _, _, dy| {
                dy[0] = 0.0;
                Ok(())
            },
            |y0, _, _| vec![y0[0] * y0[0] + 1.0],
        );
        let err = solve_bvp(&p, 32, 1e-10).unwrap_err();
        match err {
            crate::Error::Solve(SolveError::NoConvergence { residual_history, .. }) => {
                assert!(!residual_history.is_empty())
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arguments_are_checked() {
        assert!(solve_bvp(&sinh_problem(), 8, 1e-8).is_err());
        assert!(solve_bvp(&sinh_problem(), 64, 0.0).is_err());
    }
}

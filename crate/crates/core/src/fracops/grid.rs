use crate::error::{usage, Result};

/// Samples of a scalar function on a strictly increasing grid.
///
/// Between samples the function is taken to be piecewise linear; outside the
/// grid the end cells are extended linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return usage("a grid function needs at least two samples");
        }
        if grid.len() != values.len() {
            return usage(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return usage("grid must be strictly increasing");
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return usage("grid function contains non-finite entries");
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` on `grid`.
    pub fn sample(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    /// `n + 1` equally spaced samples of `f` on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 || !(hi > lo) {
            return usage("uniform grid needs n >= 1 and hi > lo");
        }
        let h = (hi - lo) / n as f64;
        let grid = (0..=n)
            .map(|i| if i == n { hi } else { lo + h * i as f64 })
            .collect();
        Self::sample(grid, f)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.grid[0]
    }

    pub fn last(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    pub fn last_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn same_grid(&self, other: &GridFn) -> bool {
        self.grid == other.grid
    }

    /// Index `i` of the cell `[grid[i], grid[i+1]]` containing `t` (clamped to the end cells).
    fn cell(&self, t: f64) -> usize {
        let n = self.grid.len();
        match self.grid.partition_point(|&g| g <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Linear interpolation (linear extrapolation outside the grid).
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.cell(t);
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Derivative samples: three-point central differences in the interior and
    /// second-order one-sided differences at both ends (non-uniform spacing aware).
    pub fn derivative(&self) -> GridFn {
        let g = &self.grid;
        let v = &self.values;
        let n = g.len();
        let mut d = vec![0.0; n];
        if n == 2 {
            let s = (v[1] - v[0]) / (g[1] - g[0]);
            d.fill(s);
        } else {
            for i in 1..n - 1 {
                d[i] = three_point(g[i - 1], g[i], g[i + 1], v[i - 1], v[i], v[i + 1], g[i]);
            }
            d[0] = three_point(g[0], g[1], g[2], v[0], v[1], v[2], g[0]);
            d[n - 1] = three_point(
                g[n - 3],
                g[n - 2],
                g[n - 1],
                v[n - 3],
                v[n - 2],
                v[n - 1],
                g[n - 1],
            );
        }
        GridFn {
            grid: g.clone(),
            values: d,
        }
    }

    /// Derivative at an arbitrary point, using the three-point stencil of the
    /// nearest grid cell.
    pub fn slope_at(&self, t: f64) -> f64 {
        let g = &self.grid;
        let v = &self.values;
        let n = g.len();
        if n == 2 {
            return (v[1] - v[0]) / (g[1] - g[0]);
        }
        let i = self.cell(t);
        let nearest = if t - g[i] <= g[i + 1] - t { i } else { i + 1 };
        let j = nearest.clamp(1, n - 2);
        three_point(g[j - 1], g[j], g[j + 1], v[j - 1], v[j], v[j + 1], t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Derivative at `t` of the quadratic through three points.
fn three_point(t0: f64, t1: f64, t2: f64, v0: f64, v1: f64, v2: f64, t: f64) -> f64 {
    let l0 = ((t - t1) + (t - t2)) / ((t0 - t1) * (t0 - t2));
    let l1 = ((t - t0) + (t - t2)) / ((t1 - t0) * (t1 - t2));
    let l2 = ((t - t0) + (t - t1)) / ((t2 - t0) * (t2 - t1));
    v0 * l0 + v1 * l1 + v2 * l2
}

/// Anything the fractional operators can be applied to.
///
/// Plain closures use a graded quadrature mesh chosen by the operator; grid
/// functions supply their own nodes, so the operators are exact for their
/// piecewise-linear interpolant.
pub trait Signal {
    fn value(&self, t: f64) -> f64;

    /// First derivative at `t`; `lo..=hi` is the interval on which the signal
    /// may be evaluated.
    fn slope(&self, t: f64, lo: f64, hi: f64) -> f64 {
        let h = 1e-6 * t.abs().max(1.0);
        if t - h >= lo && t + h <= hi {
            (self.value(t + h) - self.value(t - h)) / (2.0 * h)
        } else if t + 2.0 * h <= hi {
            (-3.0 * self.value(t) + 4.0 * self.value(t + h) - self.value(t + 2.0 * h)) / (2.0 * h)
        } else {
            (3.0 * self.value(t) - 4.0 * self.value(t - h) + self.value(t - 2.0 * h)) / (2.0 * h)
        }
    }

    /// Native sample points, if the signal is a discretization.
    fn nodes(&self) -> Option<&[f64]> {
        None
    }
}

impl<F: Fn(f64) -> f64> Signal for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

impl Signal for GridFn {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }

    fn slope(&self, t: f64, _lo: f64, _hi: f64) -> f64 {
        self.slope_at(t)
    }

    fn nodes(&self) -> Option<&[f64]> {
        Some(&self.grid)
    }
}

/// A closure paired with its analytic derivative.
pub struct Smooth<F, D> {
    pub f: F,
    pub df: D,
}

impl<F: Fn(f64) -> f64, D: Fn(f64) -> f64> Signal for Smooth<F, D> {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn slope(&self, t: f64, _lo: f64, _hi: f64) -> f64 {
        (self.df)(t)
    }
}

//! Explicit upwind finite differences for the terminal-value problem
//! `u_t + ½σ²u_xx + b̃u_x + f₁(t, x, u) = 0`, `u(T, ·) = g`.

use std::io::Write;
use std::path::Path;

use crate::error::{invalid, FbsdeError, Result};
use crate::estimators::ValueProvider;
use crate::interp::GridInterpolant;
use crate::model::{transformed_drift, CoefficientModel};

/// Safety factor applied to the explicit stability bound.
pub const CFL_SAFETY: f64 = 0.9;
/// Upper bound on the number of stored time levels.
pub const MAX_STORED_LEVELS: usize = 1000;
/// Time samples used when [`PdeGrid::auto`] estimates coefficient maxima.
const AUTO_TIME_SAMPLES: usize = 2001;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    /// Every `store_stride`-th level (counted back from `t_max`) is kept, plus `t_min`.
    pub store_stride: usize,
}

impl PdeGrid {
    pub fn new(
        x_min: f64,
        x_max: f64,
        n_x: usize,
        t_min: f64,
        t_max: f64,
        n_t: usize,
    ) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(invalid(
                "x_max",
                x_max,
                format!("must exceed x_min = {x_min}"),
            ));
        }
        if n_x < 3 {
            return Err(invalid("n_x", n_x as f64, "must be at least 3"));
        }
        if n_t < 1 {
            return Err(invalid("n_t", 0.0, "must be at least 1"));
        }
        if !(t_min < t_max) {
            return Err(invalid(
                "t_min",
                t_min,
                format!("must be below t_max = {t_max}"),
            ));
        }
        Ok(PdeGrid {
            x_min,
            x_max,
            n_x,
            t_min,
            t_max,
            n_t,
            store_stride: (n_t + 1).div_ceil(MAX_STORED_LEVELS).max(1),
        })
    }

    /// Grid with spacing `dx` covering `[x_lo, x_hi]` over `[t_min, T]`.
    ///
    /// The first registered jump of `g` falls halfway between two nodes, and
    /// `n_t` is the smallest count passing [`cfl_check`].
    pub fn auto(
        model: &CoefficientModel,
        x_lo: f64,
        x_hi: f64,
        dx: f64,
        t_min: f64,
    ) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(invalid("dx", dx, "must be positive"));
        }
        if !(x_lo < x_hi) {
            return Err(invalid(
                "x_max",
                x_hi,
                format!("must exceed x_min = {x_lo}"),
            ));
        }
        let t_max = model.horizon_t;
        let anchor = model.jumps().first().copied().unwrap_or(x_lo) - 0.5 * dx;
        let x_min = anchor - ((anchor - x_lo) / dx).ceil() * dx;
        let n_x = ((x_hi - x_min) / dx).ceil() as usize + 1;
        let x_max = x_min + (n_x - 1) as f64 * dx;

        let tm = transformed_drift(model);
        let (mut s2, mut bb) = (0.0f64, 0.0f64);
        for i in 0..AUTO_TIME_SAMPLES {
            let t = t_min + (t_max - t_min) * i as f64 / (AUTO_TIME_SAMPLES - 1) as f64;
            for j in 0..n_x {
                let x = x_min + j as f64 * dx;
                s2 = s2.max(tm.sigma(t, x).powi(2));
                bb = bb.max(tm.b(t, x).abs());
            }
        }
        let span = t_max - t_min;
        let mut n_t = match admissible_dt(s2, bb, dx) {
            Some(dt) => ((span / dt).ceil() as usize).max(1),
            None => 1,
        };
        loop {
            let grid = PdeGrid::new(x_min, x_max, n_x.max(3), t_min, t_max, n_t)?;
            let report = cfl_check(model, &grid);
            if report.ok {
                return Ok(grid);
            }
            n_t = ((span / report.max_dt).ceil() as usize).max(n_t + 1);
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / self.n_t as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        if j + 1 == self.n_x {
            self.x_max
        } else {
            self.x_min + j as f64 * self.dx()
        }
    }

    pub fn t(&self, m: usize) -> f64 {
        if m == self.n_t {
            self.t_max
        } else {
            self.t_min + m as f64 * self.dt()
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|j| self.x(j)).collect()
    }

    fn is_stored(&self, m: usize) -> bool {
        m == 0 || (self.n_t - m).is_multiple_of(self.store_stride)
    }
}

fn admissible_dt(max_sigma2: f64, max_drift: f64, dx: f64) -> Option<f64> {
    let denom = max_sigma2 + dx * max_drift;
    (denom > 0.0).then(|| CFL_SAFETY * dx * dx / denom)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CflReport {
    pub ok: bool,
    pub dt: f64,
    /// Largest admissible step; infinite when σ and b̃ vanish on the grid.
    pub max_dt: f64,
    pub max_sigma2: f64,
    pub max_drift: f64,
}

/// `dt ≤ 0.9·dx²/(max σ² + dx·max|b̃|)` over every node and level where
/// coefficients are evaluated.
pub fn cfl_check(model: &CoefficientModel, grid: &PdeGrid) -> CflReport {
    let tm = transformed_drift(model);
    let xs = grid.xs();
    let (mut s2, mut bb) = (0.0f64, 0.0f64);
    for m in 1..=grid.n_t {
        let t = grid.t(m);
        for &x in &xs {
            s2 = s2.max(tm.sigma(t, x).powi(2));
            bb = bb.max(tm.b(t, x).abs());
        }
    }
    let dt = grid.dt();
    let max_dt = admissible_dt(s2, bb, grid.dx()).unwrap_or(f64::INFINITY);
    CflReport {
        ok: dt > 0.0 && dt <= max_dt,
        dt,
        max_dt,
        max_sigma2: s2,
        max_drift: bb,
    }
}

#[derive(Clone, Debug)]
pub struct PdeSolution {
    pub grid: PdeGrid,
    table: GridInterpolant,
    /// Smallest and largest value over every computed level.
    pub value_range: (f64, f64),
}

impl PdeSolution {
    pub fn table(&self) -> &GridInterpolant {
        &self.table
    }

    pub fn u(&self, t: f64, x: f64) -> f64 {
        self.table.u(t, x)
    }

    pub fn ux(&self, t: f64, x: f64) -> f64 {
        self.table.ux(t, x)
    }

    pub fn provider(&self) -> ValueProvider {
        ValueProvider::from_interpolant(self.table.clone())
    }

    /// `t,x,u,ux` rows for every stored level, `t` outer.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "t,x,u,ux")?;
        let xs = self.table.xs();
        for (level, (t, row)) in self
            .table
            .times()
            .iter()
            .zip(self.table.values())
            .enumerate()
        {
            for (j, (x, u)) in xs.iter().zip(row).enumerate() {
                let ux = self.table.node_derivative(level, j);
                writeln!(out, "{t:.16e},{x:.16e},{u:.16e},{ux:.16e}")?;
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut f)?;
        f.flush()
    }
}

/// Backward explicit stepping; the z-linear driver term is absorbed into the drift first.
pub fn solve_fd(model: &CoefficientModel, grid: &PdeGrid) -> Result<PdeSolution> {
    let report = cfl_check(model, grid);
    if !report.ok {
        return Err(FbsdeError::Cfl {
            dt: report.dt,
            max_dt: report.max_dt,
        });
    }
    let tm = transformed_drift(model);
    let n = grid.n_x;
    let dx = grid.dx();
    let dt = grid.dt();
    let inv_dx = 1.0 / dx;
    let inv_dx2 = inv_dx * inv_dx;
    let xs = grid.xs();
    let with_driver = tm.has_driver();

    let mut u: Vec<f64> = xs.iter().map(|&x| tm.g(x)).collect();
    if let Some(j) = u.iter().position(|v| !v.is_finite()) {
        return Err(FbsdeError::NonFinitePde {
            level: grid.n_t,
            node: j,
        });
    }
    let mut lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut stored_t = vec![grid.t_max];
    let mut stored = vec![u.clone()];
    let mut next = vec![0.0; n];

    for m in (0..grid.n_t).rev() {
        let t1 = grid.t(m + 1);
        for j in 0..n {
            let x = xs[j];
            let uj = u[j];
            let s = tm.sigma(t1, x);
            let b = tm.b(t1, x);
            let d2 = if j == 0 || j + 1 == n {
                0.0
            } else {
                (u[j + 1] - 2.0 * uj + u[j - 1]) * inv_dx2
            };
            let d1 = if b > 0.0 && j + 1 < n {
                (u[j + 1] - uj) * inv_dx
            } else if b < 0.0 && j > 0 {
                (uj - u[j - 1]) * inv_dx
            } else {
                0.0
            };
            let f = if with_driver { tm.f1(t1, x, uj) } else { 0.0 };
            let v = uj + dt * (0.5 * s * s * d2 + b * d1 + f);
            if !v.is_finite() {
                return Err(FbsdeError::NonFinitePde { level: m, node: j });
            }
            next[j] = v;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        std::mem::swap(&mut u, &mut next);
        if grid.is_stored(m) {
            stored_t.push(grid.t(m));
            stored.push(u.clone());
        }
    }
    stored_t.reverse();
    stored.reverse();
    Ok(PdeSolution {
        grid: *grid,
        table: GridInterpolant::new(stored_t, xs, stored)?,
        value_range: (lo, hi),
    })
}

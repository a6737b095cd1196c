//! Tabulated `u(t, x)`: nearest level in t, linear in x, centered differences for `u_x`.

use crate::error::{FbsdeError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GridInterpolant {
    times: Vec<f64>,
    xs: Vec<f64>,
    /// `values[level][node]`
    values: Vec<Vec<f64>>,
}

impl GridInterpolant {
    pub fn new(times: Vec<f64>, xs: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || xs.len() < 2 {
            return Err(FbsdeError::InvalidInput(
                "interpolant needs at least one level and two nodes".into(),
            ));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) || !xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(FbsdeError::InvalidInput(
                "interpolant axes must be strictly increasing".into(),
            ));
        }
        if values.len() != times.len() || values.iter().any(|row| row.len() != xs.len()) {
            return Err(FbsdeError::InvalidInput(
                "interpolant value table has the wrong shape".into(),
            ));
        }
        Ok(GridInterpolant { times, xs, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn nearest_level(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&s| s < t);
        if i == 0 {
            0
        } else if i == self.times.len() || t - self.times[i - 1] <= self.times[i] - t {
            i - 1
        } else {
            i
        }
    }

    /// Left node of the cell holding `x` and the linear weight of the right node.
    fn cell(&self, x: f64) -> (usize, f64) {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return (0, 0.0);
        }
        if x >= self.xs[n - 1] {
            return (n - 2, 1.0);
        }
        let j = self.xs.partition_point(|&s| s <= x) - 1;
        let w = (x - self.xs[j]) / (self.xs[j + 1] - self.xs[j]);
        (j, w)
    }

    pub fn u(&self, t: f64, x: f64) -> f64 {
        let row = &self.values[self.nearest_level(t)];
        let (j, w) = self.cell(x);
        (1.0 - w) * row[j] + w * row[j + 1]
    }

    /// Centered difference at node `j`, one-sided at the two ends.
    pub fn node_derivative(&self, level: usize, j: usize) -> f64 {
        let row = &self.values[level];
        let xs = &self.xs;
        let n = xs.len();
        if j == 0 {
            (row[1] - row[0]) / (xs[1] - xs[0])
        } else if j == n - 1 {
            (row[n - 1] - row[n - 2]) / (xs[n - 1] - xs[n - 2])
        } else {
            (row[j + 1] - row[j - 1]) / (xs[j + 1] - xs[j - 1])
        }
    }

    pub fn ux(&self, t: f64, x: f64) -> f64 {
        let level = self.nearest_level(t);
        let (j, w) = self.cell(x);
        (1.0 - w) * self.node_derivative(level, j) + w * self.node_derivative(level, j + 1)
    }
}

//! Cubic smoothing splines with not-a-knot end conditions.
//!
//! Each coordinate is fitted independently. The fitted values `v` at the
//! knots minimize
//!
//! ```text
//! |y - v|^2 + lambda * integral(f''(t)^2 dt)
//! ```
//!
//! over the space of not-a-knot cubic interpolants `f` of `v`. That space
//! contains every cubic polynomial, so `lambda = 0` reproduces the data (and
//! any cubic through four knots exactly), while `lambda -> inf` tends to the
//! least-squares line. Beyond the last knot the curve continues along its
//! end tangent at constant velocity.

use nalgebra::{DMatrix, DVector};

use super::TrackPoint;
use crate::error::{Error, Result};

/// Slack when checking `t` against the domain start.
const DOMAIN_EPS: f64 = 1e-9;

/// A planar curve `t -> (x(t), y(t))` made of two cubic splines on shared knots.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricCurve {
    knots: Vec<f64>,
    x: Coordinate,
    y: Coordinate,
}

#[derive(Debug, Clone, PartialEq)]
struct Coordinate {
    values: Vec<f64>,
    second: Vec<f64>,
}

impl ParametricCurve {
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().expect("at least two knots"))
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Fitted positions at the knots.
    pub fn fitted(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.values.iter().copied().zip(self.y.values.iter().copied())
    }

    /// Position at `t`; constant-velocity continuation past the last knot.
    pub fn position(&self, t: f64) -> Result<(f64, f64)> {
        let (t_min, t_max) = self.domain();
        if !(t >= t_min - DOMAIN_EPS) {
            return Err(Error::OutOfDomain { t, t_min });
        }
        if t > t_max {
            let (x0, y0) = self.eval_inside(t_max);
            let (vx, vy) = self.velocity_inside(t_max);
            let dt = t - t_max;
            return Ok((x0 + vx * dt, y0 + vy * dt));
        }
        Ok(self.eval_inside(t.max(t_min)))
    }

    /// Velocity vector at `t`; constant past the last knot.
    pub fn velocity(&self, t: f64) -> Result<(f64, f64)> {
        let (t_min, t_max) = self.domain();
        if !(t >= t_min - DOMAIN_EPS) {
            return Err(Error::OutOfDomain { t, t_min });
        }
        Ok(self.velocity_inside(t.clamp(t_min, t_max)))
    }

    /// Sum of squared Euclidean residuals against `points`.
    pub fn residual_sum_of_squares(&self, points: &[TrackPoint]) -> f64 {
        points
            .iter()
            .map(|p| {
                let (x, y) = self.eval_inside(p.t.clamp(self.knots[0], *self.knots.last().unwrap()));
                (x - p.x).powi(2) + (y - p.y).powi(2)
            })
            .sum()
    }

    /// `integral |c''(t)|^2 dt` over the knot span, evaluated exactly.
    pub fn curvature_integral(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.knots.len() - 1 {
            let h = self.knots[i + 1] - self.knots[i];
            for c in [&self.x, &self.y] {
                let (a, b) = (c.second[i], c.second[i + 1]);
                total += h / 3.0 * (a * a + a * b + b * b);
            }
        }
        total
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.knots.len();
        match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    fn eval_inside(&self, t: f64) -> (f64, f64) {
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        let f = |c: &Coordinate| {
            a * c.values[i]
                + b * c.values[i + 1]
                + ((a * a * a - a) * c.second[i] + (b * b * b - b) * c.second[i + 1]) * h * h / 6.0
        };
        (f(&self.x), f(&self.y))
    }

    fn velocity_inside(&self, t: f64) -> (f64, f64) {
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        let f = |c: &Coordinate| {
            (c.values[i + 1] - c.values[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * c.second[i]
                + (3.0 * b * b - 1.0) / 6.0 * h * c.second[i + 1]
        };
        (f(&self.x), f(&self.y))
    }
}

/// Fits a cubic smoothing spline through `points` (strictly increasing `t`).
pub fn fit_smoothing_spline(points: &[TrackPoint], smoothing: f64) -> Result<ParametricCurve> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "spline fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if !(smoothing >= 0.0) || !smoothing.is_finite() {
        return Err(Error::InvalidInput(format!(
            "smoothing must be a finite nonnegative number, got {smoothing}"
        )));
    }
    for w in points.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::InvalidInput(format!(
                "knot times must be strictly increasing ({} then {})",
                w[0].t, w[1].t
            )));
        }
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("non-finite track point".into()));
    }

    let knots: Vec<f64> = points.iter().map(|p| p.t).collect();
    let second_of_values = second_derivative_operator(&knots);
    let xs = DVector::from_iterator(points.len(), points.iter().map(|p| p.x));
    let ys = DVector::from_iterator(points.len(), points.iter().map(|p| p.y));

    let (xs, ys) = if smoothing > 0.0 {
        let gram = curvature_gram(&knots);
        let penalty = second_of_values.transpose() * gram * &second_of_values;
        let system = DMatrix::identity(knots.len(), knots.len()) + penalty * smoothing;
        let lu = system.lu();
        let solve = |rhs: &DVector<f64>| {
            lu.solve(rhs)
                .expect("identity plus a positive semidefinite penalty is invertible")
        };
        (solve(&xs), solve(&ys))
    } else {
        (xs, ys)
    };

    let coordinate = |values: DVector<f64>| Coordinate {
        second: (&second_of_values * &values).iter().copied().collect(),
        values: values.iter().copied().collect(),
    };
    Ok(ParametricCurve {
        knots,
        x: coordinate(xs),
        y: coordinate(ys),
    })
}

/// Linear map from knot values to the knot second derivatives of the
/// not-a-knot interpolant.
fn second_derivative_operator(knots: &[f64]) -> DMatrix<f64> {
    let n = knots.len();
    if n == 2 {
        return DMatrix::zeros(2, 2);
    }
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let mut lhs = DMatrix::zeros(n, n);
    let mut rhs = DMatrix::zeros(n, n);

    for i in 1..n - 1 {
        lhs[(i, i - 1)] = h[i - 1];
        lhs[(i, i)] = 2.0 * (h[i - 1] + h[i]);
        lhs[(i, i + 1)] = h[i];
        rhs[(i, i - 1)] = 6.0 / h[i - 1];
        rhs[(i, i)] = -6.0 / h[i - 1] - 6.0 / h[i];
        rhs[(i, i + 1)] = 6.0 / h[i];
    }
    if n == 3 {
        // Single interior knot: the interpolant is one parabola.
        lhs[(0, 0)] = 1.0;
        lhs[(0, 1)] = -1.0;
        lhs[(2, 1)] = 1.0;
        lhs[(2, 2)] = -1.0;
    } else {
        // Third derivative continuous across the first and last interior knots.
        lhs[(0, 0)] = -h[1];
        lhs[(0, 1)] = h[0] + h[1];
        lhs[(0, 2)] = -h[0];
        lhs[(n - 1, n - 3)] = -h[n - 2];
        lhs[(n - 1, n - 2)] = h[n - 3] + h[n - 2];
        lhs[(n - 1, n - 1)] = -h[n - 3];
    }
    lhs.lu()
        .solve(&rhs)
        .expect("not-a-knot system is nonsingular for strictly increasing knots")
}

/// Gram matrix of the piecewise-linear second derivative:
/// `integral f''^2 = M^T G M`.
fn curvature_gram(knots: &[f64]) -> DMatrix<f64> {
    let n = knots.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        let h = knots[i + 1] - knots[i];
        g[(i, i)] += h / 3.0;
        g[(i + 1, i + 1)] += h / 3.0;
        g[(i, i + 1)] += h / 6.0;
        g[(i + 1, i)] += h / 6.0;
    }
    g
}

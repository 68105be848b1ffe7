//! Piecewise-linear functions of the first coordinate on `[0, 1]`.
//!
//! Hat sums, one-dimensional bumps and all dictionary elements are piecewise
//! linear, so sup norms, `L^2` norms and integrals of differences can be
//! computed exactly from merged breakpoint lists. The error evaluation for
//! the uniform and `L^2` solution maps routes through this module whenever
//! both sides are piecewise linear.

/// Piecewise-linear function given by breakpoints `xs` (strictly increasing,
/// spanning `[0, 1]`) and values `ys`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pwl {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Pwl {
    /// The zero function on `[0, 1]`.
    pub fn zero() -> Self {
        Pwl { xs: vec![0.0, 1.0], ys: vec![0.0, 0.0] }
    }

    /// Builds from breakpoints; `xs` must start at 0, end at 1 and increase.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2);
        assert_eq!(xs[0], 0.0);
        assert_eq!(*xs.last().unwrap(), 1.0);
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "breakpoints must increase");
        Pwl { xs, ys }
    }

    /// Samples `f` at `0`, `1` and every interior kink.
    pub fn from_kinks(kinks: &[f64], f: impl Fn(f64) -> f64) -> Self {
        let mut xs = vec![0.0, 1.0];
        xs.extend(kinks.iter().copied().filter(|x| *x > 0.0 && *x < 1.0));
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Pwl { xs, ys }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= *self.xs.last().unwrap() {
            return *self.ys.last().unwrap();
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.ys[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Exact `int_0^1 f(x) dx` (trapezoid rule is exact for PL functions).
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.xs.len() {
            acc += 0.5 * (self.ys[i - 1] + self.ys[i]) * (self.xs[i] - self.xs[i - 1]);
        }
        acc
    }

    fn merged_breakpoints(&self, other: &Pwl) -> Vec<f64> {
        let mut xs: Vec<f64> = self.xs.iter().chain(other.xs.iter()).copied().collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        xs
    }

    /// Exact `sup_{x in [0,1]} |f(x) - g(x)|`: the difference is piecewise
    /// linear on the merged breakpoints, so the sup sits on a breakpoint.
    pub fn sup_abs_diff(&self, other: &Pwl) -> f64 {
        self.merged_breakpoints(other)
            .into_iter()
            .map(|x| (self.eval(x) - other.eval(x)).abs())
            .fold(0.0, f64::max)
    }


    /// Exact `int_0^1 (f - g)^2 dx` via per-interval quadratic integration.
    pub fn l2_diff_sq(&self, other: &Pwl) -> f64 {
        let xs = self.merged_breakpoints(other);
        let mut acc = 0.0;
        for w in xs.windows(2) {
            let a = self.eval(w[0]) - other.eval(w[0]);
            let b = self.eval(w[1]) - other.eval(w[1]);
            acc += (w[1] - w[0]) * (a * a + a * b + b * b) / 3.0;
        }
        acc
    }

    pub fn l2_diff(&self, other: &Pwl) -> f64 {
        self.l2_diff_sq(other).sqrt()
    }
}

//! Piecewise-constant functions on the line.
//!
//! A `Piecewise<T>` holds strictly increasing breakpoints `b_0 < ... < b_n`
//! and values `v_0, ..., v_{n-1}`, with `v_i` taken on `[b_i, b_{i+1})`. The
//! function is `T::default()` (zero) outside the span, except that evaluating
//! exactly at the right end returns the last value, so a coefficient defined
//! up to its window edge stays usable there.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise<T> {
    breakpoints: Vec<f64>,
    values: Vec<T>,
}

pub type PiecewiseC = Piecewise<Complex64>;
pub type PiecewiseR = Piecewise<f64>;

impl<T: Copy + Default + PartialEq> Piecewise<T> {
    pub fn new(breakpoints: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if breakpoints.is_empty() && values.is_empty() {
            return Ok(Self { breakpoints, values });
        }
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(CoreError::Invalid(format!(
                "piecewise function needs n+1 breakpoints for n values, got {} and {}",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(CoreError::Invalid("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::Invalid(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn empty() -> Self {
        Self { breakpoints: Vec::new(), values: Vec::new() }
    }

    pub fn constant(lo: f64, hi: f64, value: T) -> Result<Self> {
        Self::new(vec![lo, hi], vec![value])
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        if self.is_empty() {
            None
        } else {
            Some((self.breakpoints[0], *self.breakpoints.last().unwrap()))
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Value at `t`; zero outside the span, last value at the right edge.
    pub fn eval(&self, t: f64) -> T {
        match self.span() {
            None => T::default(),
            Some((lo, hi)) => {
                if t < lo || t > hi {
                    T::default()
                } else if t == hi {
                    *self.values.last().unwrap()
                } else {
                    let i = self.breakpoints.partition_point(|b| *b <= t) - 1;
                    self.values[i]
                }
            }
        }
    }

    /// Shift the graph right by `dx`.
    pub fn translate(&self, dx: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().map(|b| b + dx).collect(),
            values: self.values.clone(),
        }
    }

    /// Breakpoints of `self` that fall strictly inside `(lo, hi)`.
    pub fn interior_breakpoints(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints
            .iter()
            .copied()
            .filter(move |b| *b > lo && *b < hi)
    }

    /// Rebuild the function on `[lo, hi]` from an evaluation rule applied to
    /// cell midpoints of the merged breakpoint set.
    pub fn rebuild_on(lo: f64, hi: f64, mut cuts: Vec<f64>, f: impl Fn(f64) -> T) -> Result<Self> {
        cuts.push(lo);
        cuts.push(hi);
        cuts.retain(|c| *c >= lo && *c <= hi);
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        let values: Vec<T> = cuts
            .windows(2)
            .map(|w| f(0.5 * (w[0] + w[1])))
            .collect();
        let mut out = Self::new(cuts, values)?;
        out.coalesce();
        Ok(out)
    }

    /// Merge adjacent cells with identical values.
    pub fn coalesce(&mut self) {
        if self.values.len() < 2 {
            return;
        }
        let mut bps = vec![self.breakpoints[0]];
        let mut vals = vec![self.values[0]];
        for i in 1..self.values.len() {
            if self.values[i] == *vals.last().unwrap() {
                continue;
            }
            bps.push(self.breakpoints[i]);
            vals.push(self.values[i]);
        }
        bps.push(*self.breakpoints.last().unwrap());
        self.breakpoints = bps;
        self.values = vals;
    }
}

impl PiecewiseC {
    /// Exact integral over `[lo, hi]` (pieces outside the span count as 0).
    pub fn integral(&self, lo: f64, hi: f64) -> Complex64 {
        let mut sum = Complex64::default();
        for (i, v) in self.values.iter().enumerate() {
            let a = self.breakpoints[i].max(lo);
            let b = self.breakpoints[i + 1].min(hi);
            if b > a {
                sum += v * (b - a);
            }
        }
        sum
    }

    /// Exact integral of `|f|` over `[lo, hi]`.
    pub fn abs_integral(&self, lo: f64, hi: f64) -> f64 {
        let mut sum = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let a = self.breakpoints[i].max(lo);
            let b = self.breakpoints[i + 1].min(hi);
            if b > a {
                sum += v.norm() * (b - a);
            }
        }
        sum
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Pad the span out to `[lo, hi]` with zero-valued cells, then add `w`
    /// everywhere on `[lo, hi]`.
    pub fn padded_offset(&self, lo: f64, hi: f64, w: Complex64) -> Result<Self> {
        let cuts: Vec<f64> = self.interior_breakpoints(lo, hi).collect();
        let base = self.clone();
        Self::rebuild_on(lo, hi, cuts, move |t| base.eval(t) + w)
    }
}

//! The continuum half: `-(a u')' + u mu = z u` on the line, with `a`
//! piecewise constant and bounded away from zero and `mu` a local measure in
//! the atoms + piecewise-constant-density model.
//!
//! Between atoms the equation is a constant-coefficient system solved by an
//! exact 2x2 exponential; an atom of weight `gamma` inserts the jump
//! `(au')(x+) = (au')(x-) + gamma u(x)` while `u` stays continuous. States are
//! `(u(t), (au')(t+))` with the right-limit convention throughout, and the
//! spectral parameter is folded in by replacing `mu` with `mu - z lambda`.

pub mod bounds;
pub mod gordon;
pub mod measure;
pub mod oracle;
pub mod transfer;

pub use bounds::{disk_radius, envelopes, perturbation_bound, EnvelopeReport};
pub use gordon::{
    gordon_defect, gordon_defect_parts, growth_scan, periodize, three_block_gap,
    PeriodizeDiagnostics, SlGrowthRow,
};
pub use measure::LocalMeasure;
pub use transfer::{propagate, transfer};

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::piecewise::PiecewiseC;

/// Coefficient pair for the operator: piecewise-constant `a` (nonzero on its
/// span) and a local measure `mu`. The usable window is the intersection of
/// the `a`-span with the measure's support window.
#[derive(Debug, Clone)]
pub struct SLCoeff {
    a: PiecewiseC,
    norm_a: f64,
    norm_ainv: f64,
    mu: LocalMeasure,
}

impl SLCoeff {
    pub fn new(a: PiecewiseC, mu: LocalMeasure) -> Result<Self> {
        let (alo, ahi) = a
            .span()
            .ok_or_else(|| CoreError::Invalid("empty a-coefficient".into()))?;
        let (mlo, mhi) = mu.support_window();
        if alo.max(mlo) >= ahi.min(mhi) {
            return Err(CoreError::InvalidInterval(
                "a-span and measure window do not overlap".into(),
            ));
        }
        let min_abs = a.min_abs();
        if !(min_abs > 0.0) {
            return Err(CoreError::Invalid("a must be bounded away from zero".into()));
        }
        Ok(Self { norm_a: a.max_abs(), norm_ainv: 1.0 / min_abs, a, mu })
    }

    /// Constant `a = 1` with the given measure.
    pub fn unit_a(mu: LocalMeasure) -> Result<Self> {
        let w = mu.support_window();
        Self::new(PiecewiseC::constant(w.0, w.1, Complex64::new(1.0, 0.0))?, mu)
    }

    pub fn a(&self) -> &PiecewiseC {
        &self.a
    }

    pub fn mu(&self) -> &LocalMeasure {
        &self.mu
    }

    pub fn norm_a(&self) -> f64 {
        self.norm_a
    }

    pub fn norm_ainv(&self) -> f64 {
        self.norm_ainv
    }

    pub fn window(&self) -> (f64, f64) {
        let (alo, ahi) = self.a.span().unwrap();
        let (mlo, mhi) = self.mu.support_window();
        (alo.max(mlo), ahi.min(mhi))
    }

    pub(crate) fn check_window(&self, lo: f64, hi: f64) -> Result<()> {
        let (wlo, whi) = self.window();
        if lo < wlo - 1e-12 || hi > whi + 1e-12 {
            return Err(CoreError::TimeOutOfWindow {
                t: if lo < wlo - 1e-12 { lo } else { hi },
                lo: wlo,
                hi: whi,
            });
        }
        Ok(())
    }

    /// The measure with the spectral parameter folded in: `mu - z lambda`.
    pub fn shifted_measure(&self, z: Complex64) -> Result<LocalMeasure> {
        self.mu.with_density_offset(-z)
    }
}

/// Continuum solution state `(u(t), (au')(t+))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CState {
    pub u: Complex64,
    pub au_prime: Complex64,
    pub t: f64,
}

impl CState {
    pub fn new(u: Complex64, au_prime: Complex64, t: f64) -> Self {
        Self { u, au_prime, t }
    }

    pub fn norm(&self) -> f64 {
        (self.u.norm_sqr() + self.au_prime.norm_sqr()).sqrt()
    }
}

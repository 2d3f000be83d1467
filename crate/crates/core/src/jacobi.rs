//! The discrete half: transfer matrices for the three-term difference
//! equation
//!
//! ```text
//! a(n+1) u(n+1) + b(n) u(n) + a(n) u(n-1) - z u(n) = 0,
//! ```
//!
//! the three-block lower bound for periodic coefficients, the perturbation
//! inequality comparing two coefficient sets with shared initial data, the
//! near-periodicity defect, and the eigenvalue-free disk radius that a
//! sufficiently fast defect decay certifies.
//!
//! States are the vectors `(u(n+1), a(n+1) u(n))`; all state norms are
//! Euclidean.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::gronwall::{discrete_bound, DiscreteGronwallInput};
use crate::mat2c::Mat2C;

/// Jacobi coefficient pair `(a, b)` on an integer window, with sup-norm
/// metadata. The stored norms may exceed the window suprema (a generator can
/// supply its analytic norms) but must never undercut them.
#[derive(Debug, Clone)]
pub struct CoeffSeq {
    n_lo: i64,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    norm_a: f64,
    norm_ainv: f64,
    norm_b: f64,
}

impl CoeffSeq {
    /// Coefficients over `[n_lo, n_lo + len - 1]`; norms default to the
    /// window suprema.
    pub fn new(n_lo: i64, a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(CoreError::Invalid(format!(
                "a and b must be nonempty and of equal length, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        for v in a.iter().chain(b.iter()) {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(CoreError::Invalid("non-finite coefficient".into()));
            }
        }
        let min_a = a.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if min_a <= 0.0 {
            return Err(CoreError::Invalid("a(n) must be nonzero".into()));
        }
        let norm_a = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let norm_b = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(Self { n_lo, a, b, norm_a, norm_ainv: 1.0 / min_a, norm_b })
    }

    /// Replace the norm metadata with analytically known values. Each value
    /// must dominate the corresponding window supremum.
    pub fn with_norms(mut self, norm_a: f64, norm_ainv: f64, norm_b: f64) -> Result<Self> {
        if norm_a < self.norm_a || norm_ainv < self.norm_ainv || norm_b < self.norm_b {
            return Err(CoreError::Domain(format!(
                "supplied norms ({norm_a}, {norm_ainv}, {norm_b}) do not dominate the window \
                 suprema ({}, {}, {})",
                self.norm_a, self.norm_ainv, self.norm_b
            )));
        }
        self.norm_a = norm_a;
        self.norm_ainv = norm_ainv;
        self.norm_b = norm_b;
        Ok(self)
    }

    pub fn window(&self) -> (i64, i64) {
        (self.n_lo, self.n_lo + self.a.len() as i64 - 1)
    }

    pub fn a(&self, n: i64) -> Result<Complex64> {
        self.fetch(&self.a, n)
    }

    pub fn b(&self, n: i64) -> Result<Complex64> {
        self.fetch(&self.b, n)
    }

    fn fetch(&self, v: &[Complex64], n: i64) -> Result<Complex64> {
        let (lo, hi) = self.window();
        if n < lo || n > hi {
            return Err(CoreError::WindowOutOfRange { index: n, lo, hi });
        }
        Ok(v[(n - lo) as usize])
    }

    pub fn norm_a(&self) -> f64 {
        self.norm_a
    }

    pub fn norm_ainv(&self) -> f64 {
        self.norm_ainv
    }

    pub fn norm_b(&self) -> f64 {
        self.norm_b
    }

    /// The `p`-periodic sequence matching `self` on the block `k = 1..=p`
    /// (i.e. `a` on `2..=p+1`, `b` on `1..=p`), tiled over the same window.
    /// Norm metadata carries over: the periodized values are a subset of the
    /// window values.
    pub fn periodized(&self, p: i64) -> Result<CoeffSeq> {
        if p < 1 {
            return Err(CoreError::Domain(format!("period {p} must be positive")));
        }
        let (lo, hi) = self.window();
        let wrap = |n: i64, base: i64| -> i64 { (n - base).rem_euclid(p) + base };
        let mut a = Vec::with_capacity(self.a.len());
        let mut b = Vec::with_capacity(self.b.len());
        for n in lo..=hi {
            a.push(self.a(wrap(n, 2))?);
            b.push(self.b(wrap(n, 1))?);
        }
        CoeffSeq {
            n_lo: lo,
            a,
            b,
            norm_a: self.norm_a,
            norm_ainv: self.norm_ainv,
            norm_b: self.norm_b,
        }
        .validated()
    }

    fn validated(self) -> Result<CoeffSeq> {
        // re-run the constructor checks after manual assembly
        let norms = (self.norm_a, self.norm_ainv, self.norm_b);
        CoeffSeq::new(self.n_lo, self.a, self.b)?.with_norms(norms.0, norms.1, norms.2)
    }

    /// Exact `p`-periodicity of the pairs `(a(n+1), b(n))` over the window
    /// `[-p+1, 2p+1]`.
    fn check_periodic(&self, p: i64) -> Result<()> {
        for n in (-p + 1)..=(p + 1) {
            if self.a(n)? != self.a(n + p)? {
                return Err(CoreError::NonPeriodicInput {
                    period: p.to_string(),
                    detail: format!("a({n}) != a({})", n + p),
                });
            }
        }
        for n in (-p + 1)..=p {
            if self.b(n)? != self.b(n + p)? {
                return Err(CoreError::NonPeriodicInput {
                    period: p.to_string(),
                    detail: format!("b({n}) != b({})", n + p),
                });
            }
        }
        Ok(())
    }
}

/// Solution state at integer index `n`: the vector `(u(n+1), a(n+1) u(n))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State2 {
    pub top: Complex64,
    pub bottom: Complex64,
    pub index: i64,
}

impl State2 {
    pub fn new(top: Complex64, bottom: Complex64, index: i64) -> Self {
        Self { top, bottom, index }
    }

    pub fn norm(&self) -> f64 {
        (self.top.norm_sqr() + self.bottom.norm_sqr()).sqrt()
    }
}

/// Defect decay certificate: trial periods, measured defects, the target
/// exponential rate and the disk radius it buys.
#[derive(Debug, Clone)]
pub struct GordonCertificate {
    pub periods: Vec<i64>,
    pub defects: Vec<f64>,
    pub rate_target: f64,
    pub disk_radius: f64,
}

impl GordonCertificate {
    pub fn new(periods: Vec<i64>, defects: Vec<f64>, rate_target: f64, disk_radius: f64) -> Result<Self> {
        if periods.len() != defects.len() {
            return Err(CoreError::Invalid("periods/defects length mismatch".into()));
        }
        if periods.windows(2).any(|w| w[0] >= w[1]) || periods.first().is_some_and(|p| *p < 1) {
            return Err(CoreError::Invalid(
                "periods must be strictly increasing positive integers".into(),
            ));
        }
        if defects.iter().any(|d| *d < 0.0) || disk_radius < 0.0 {
            return Err(CoreError::Invalid("defects and radius must be nonnegative".into()));
        }
        Ok(Self { periods, defects, rate_target, disk_radius })
    }

    /// `exp(C p_m) d_m` per period, in log space to survive huge periods:
    /// returns `ln` of the scaled defect (`-inf` for defect 0).
    pub fn scaled_defects_ln(&self) -> Vec<f64> {
        self.periods
            .iter()
            .zip(&self.defects)
            .map(|(p, d)| self.rate_target * *p as f64 + d.ln())
            .collect()
    }
}

/// One-step transfer matrix: maps the state at `n` to the state at `n + 1`.
pub fn transfer_step(coeffs: &CoeffSeq, z: Complex64, n: i64) -> Result<Mat2C> {
    let a2 = coeffs.a(n + 2)?;
    let b1 = coeffs.b(n + 1)?;
    Ok(Mat2C::new(
        (z - b1) / a2,
        -Complex64::new(1.0, 0.0) / a2,
        a2,
        Complex64::default(),
    ))
}

/// Transfer matrix from index `n` to index `m` (the composition of the single
/// steps for `m > n`, the identity for `m = n`, and the reversed product of
/// adjugate inverses for `m < n`).
pub fn transfer(coeffs: &CoeffSeq, z: Complex64, m: i64, n: i64) -> Result<Mat2C> {
    let mut t = Mat2C::identity();
    if m > n {
        for k in n..m {
            t = transfer_step(coeffs, z, k)? * t;
        }
    } else {
        for k in m..n {
            t = t * transfer_step(coeffs, z, k)?.adjugate();
        }
    }
    Ok(t)
}

/// Propagate an initial state through the difference equation itself (not via
/// transfer-matrix products) and return the states over the inclusive index
/// interval `range`.
pub fn propagate(
    coeffs: &CoeffSeq,
    z: Complex64,
    init: &State2,
    range: (i64, i64),
) -> Result<Vec<State2>> {
    let (lo, hi) = range;
    if lo > hi {
        return Err(CoreError::Invalid(format!("empty state range [{lo}, {hi}]")));
    }
    let n0 = init.index;
    let u_lo = lo.min(n0);
    let u_hi = hi.max(n0) + 1;
    let len = (u_hi - u_lo + 1) as usize;
    let mut u = vec![Complex64::default(); len];
    let at = |n: i64| (n - u_lo) as usize;
    u[at(n0 + 1)] = init.top;
    u[at(n0)] = init.bottom / coeffs.a(n0 + 1)?;
    for n in (n0 + 1)..u_hi {
        // forward: u(n+1) = ((z - b(n)) u(n) - a(n) u(n-1)) / a(n+1)
        u[at(n + 1)] =
            ((z - coeffs.b(n)?) * u[at(n)] - coeffs.a(n)? * u[at(n - 1)]) / coeffs.a(n + 1)?;
    }
    for n in ((u_lo + 1)..=n0).rev() {
        // backward: u(n-1) = ((z - b(n)) u(n) - a(n+1) u(n+1)) / a(n)
        u[at(n - 1)] =
            ((z - coeffs.b(n)?) * u[at(n)] - coeffs.a(n + 1)? * u[at(n + 1)]) / coeffs.a(n)?;
    }
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    for n in lo..=hi {
        out.push(State2::new(u[at(n + 1)], coeffs.a(n + 1)? * u[at(n)], n));
    }
    Ok(out)
}

/// Log-scaled transfer-matrix propagation: returns `ln ||state(n)||` at each
/// requested checkpoint, with periodic renormalization so that exponential
/// growth over long windows cannot overflow.
fn checkpoint_log_norms(
    coeffs: &CoeffSeq,
    z: Complex64,
    init: &State2,
    checkpoints: &[i64],
) -> Result<Vec<f64>> {
    let mut out = vec![0.0f64; checkpoints.len()];
    for forward in [true, false] {
        let mut targets: Vec<(usize, i64)> = checkpoints
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, n)| if forward { *n >= init.index } else { *n < init.index })
            .collect();
        targets.sort_by_key(|(_, n)| if forward { *n } else { -*n });
        let mut v = (init.top, init.bottom);
        let mut log_scale = 0.0f64;
        let mut pos = init.index;
        for (slot, target) in targets {
            while pos != target {
                if forward {
                    v = transfer_step(coeffs, z, pos)?.apply(v);
                    pos += 1;
                } else {
                    v = transfer_step(coeffs, z, pos - 1)?.adjugate().apply(v);
                    pos -= 1;
                }
                let m = (v.0.norm_sqr() + v.1.norm_sqr()).sqrt();
                if !(1e-100..=1e100).contains(&m) && m > 0.0 {
                    log_scale += m.ln();
                    v = (v.0 / m, v.1 / m);
                }
            }
            out[slot] = log_scale + (v.0.norm_sqr() + v.1.norm_sqr()).sqrt().ln();
        }
    }
    Ok(out)
}

/// Three-block checkpoint ratio: for `p`-periodic coefficients the state of
/// any solution at one of the indices `-p`, `p`, `2p` has norm at least half
/// the norm of the state at 0 (Cayley-Hamilton for the determinant-one
/// monodromy matrix). Returns
/// `max ||state(n)|| / ||state(0)||` over the three checkpoints (possibly
/// `+inf` for strongly hyperbolic periods).
pub fn three_block_gap(coeffs: &CoeffSeq, z: Complex64, p: i64, init: &State2) -> Result<f64> {
    if p < 1 {
        return Err(CoreError::Domain(format!("period {p} must be positive")));
    }
    if init.index != 0 {
        return Err(CoreError::MismatchedInitialState(
            "three-block initial state sits at index 0".into(),
        ));
    }
    if init.norm() == 0.0 {
        return Err(CoreError::ZeroInitialState);
    }
    coeffs.check_periodic(p)?;
    let logs = checkpoint_log_norms(coeffs, z, init, &[-p, p, 2 * p])?;
    let best = logs.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok((best - init.norm().ln()).exp())
}

/// Both sides of the perturbation inequality at index `n`, for two coefficient
/// sets sharing the initial state (at index 0). The left side is the norm of
/// the state difference; the right side is the Gronwall product-sum over the
/// step matrices `A(k)` (determinant one) and the coefficient-difference
/// matrices `B(k)` applied to the reference-solution states, with the index
/// shift flipped for `n < 0`.
pub fn perturbation_bound(
    coeffs: &CoeffSeq,
    coeffs_tilde: &CoeffSeq,
    z: Complex64,
    init: &State2,
    n: i64,
) -> Result<(f64, f64)> {
    if init.index != 0 {
        return Err(CoreError::MismatchedInitialState(
            "shared initial state must sit at index 0".into(),
        ));
    }
    let range = (n.min(0), n.max(0));
    let states = propagate(coeffs, z, init, range)?;
    let states_t = propagate(coeffs_tilde, z, init, range)?;
    let state_at = |list: &[State2], k: i64| -> State2 { list[(k - range.0) as usize] };

    let diff_norm = |k: i64| -> f64 {
        let s = state_at(&states, k);
        let t = state_at(&states_t, k);
        ((s.top - t.top).norm_sqr() + (s.bottom - t.bottom).norm_sqr()).sqrt()
    };
    let lhs = diff_norm(n);

    let step_matrix = |k: i64| -> Result<Mat2C> { transfer_step(coeffs, z, k - 1) };
    let diff_matrix = |k: i64| -> Result<Mat2C> {
        let a1 = coeffs.a(k + 1)?;
        let at1 = coeffs_tilde.a(k + 1)?;
        let b = coeffs.b(k)?;
        let bt = coeffs_tilde.b(k)?;
        let one = Complex64::new(1.0, 0.0);
        Ok(Mat2C::new(
            (z - b) / a1 - (z - bt) / at1,
            -one / a1 + one / at1,
            a1 - at1,
            Complex64::default(),
        ))
    };

    let steps = n.unsigned_abs() as usize;
    let mut alphas = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps);
    let mut xs = Vec::with_capacity(steps + 1);
    xs.push(0.0);
    if n >= 0 {
        // k walks 1..=n; the reference state in the k-th term is the tilde
        // state at index k-1 and the running difference ends at index k.
        for k in 1..=n {
            alphas.push(step_matrix(k)?.norm2());
            betas.push(diff_matrix(k)?.norm2() * state_at(&states_t, k - 1).norm());
            xs.push(diff_norm(k));
        }
    } else {
        // k walks 0 down to n+1; reference states sit at index k.
        for k in (n + 1..=0).rev() {
            alphas.push(step_matrix(k)?.norm2());
            betas.push(diff_matrix(k)?.norm2() * state_at(&states_t, k).norm());
            xs.push(diff_norm(k - 1));
        }
    }
    let input = DiscreteGronwallInput::new(alphas, betas, xs)?;
    let rhs = discrete_bound(&input, steps)?;
    Ok((lhs, rhs))
}

/// Radius of the eigenvalue-free disk certified by rate `C`: the largest `r`
/// with `norm_ainv (r + norm_b) + norm_ainv + norm_a <= exp(C/2)`, clamped at
/// zero. An empty disk is a valid (if useless) certificate.
pub fn disk_radius(norm_a: f64, norm_ainv: f64, norm_b: f64, c: f64) -> Result<f64> {
    if !(norm_a > 0.0) || !(norm_ainv > 0.0) {
        return Err(CoreError::Domain("coefficient norms must be positive".into()));
    }
    if !(norm_b >= 0.0) {
        return Err(CoreError::Domain("norm_b must be nonnegative".into()));
    }
    if !(c > 0.0) {
        return Err(CoreError::Domain("rate C must be positive".into()));
    }
    if norm_a * norm_ainv < 1.0 - 1e-12 {
        return Err(CoreError::Domain(
            "norm_a * norm_ainv must be at least 1".into(),
        ));
    }
    Ok((((c / 2.0).exp() - norm_ainv - norm_a) / norm_ainv - norm_b).max(0.0))
}

/// Near-periodicity defect at period `p`:
/// `max_{k=-p+1..p} (|a(k+1) - a(k+1+p)| + |b(k) - b(k+p)|)`.
pub fn gordon_defect(coeffs: &CoeffSeq, p: i64) -> Result<f64> {
    if p < 1 {
        return Err(CoreError::Domain(format!("period {p} must be positive")));
    }
    let mut d = 0.0f64;
    for k in (-p + 1)..=p {
        let da = (coeffs.a(k + 1)? - coeffs.a(k + 1 + p)?).norm();
        let db = (coeffs.b(k)? - coeffs.b(k + p)?).norm();
        d = d.max(da + db);
    }
    Ok(d)
}

/// Per-period decay rates `C_m = -ln(d_{p_m}) / p_m` (`+inf` when the defect
/// vanishes). The defect condition holds at rate `C` exactly when the running
/// tail minimum of these values stays above `C`; see [`tail_min`].
pub fn gordon_rate(coeffs: &CoeffSeq, periods: &[i64]) -> Result<Vec<f64>> {
    check_periods(periods)?;
    periods
        .iter()
        .map(|p| {
            let d = gordon_defect(coeffs, *p)?;
            Ok(if d == 0.0 { f64::INFINITY } else { -d.ln() / *p as f64 })
        })
        .collect()
}

/// Running minimum from the tail: `out[m] = min(rates[m..])`.
pub fn tail_min(rates: &[f64]) -> Vec<f64> {
    let mut out = rates.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].min(out[i + 1]);
    }
    out
}

fn check_periods(periods: &[i64]) -> Result<()> {
    if periods.is_empty() {
        return Err(CoreError::Invalid("empty period list".into()));
    }
    if periods[0] < 1 || periods.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::Invalid(
            "periods must be strictly increasing positive integers".into(),
        ));
    }
    Ok(())
}

/// One row of a growth scan at a fixed spectral point.
#[derive(Debug, Clone)]
pub struct GrowthRow {
    pub period: i64,
    pub defect: f64,
    /// Checkpoint ratio of the periodized solution (at least 1/2).
    pub periodic_checkpoint: f64,
    /// Rigorous bound on the state difference between the true and the
    /// periodized solution over the three-block window: the a-priori growth
    /// estimate `rho^{2p} kappa 2p d_p` evaluated in log space, where `rho`
    /// bounds the step-matrix norms and `kappa` the coefficient-difference
    /// matrices per unit defect.
    pub error_bound: f64,
    /// Measured checkpoint ratio of the true solution.
    pub true_checkpoint: f64,
    /// `error_bound < 1/4`, which pins the true checkpoint ratio above 1/4.
    pub certified: bool,
}

/// Scan the growth bookkeeping at each trial period: the periodized solution's
/// checkpoint ratio, the approximation error bound, and the true solution's
/// measured checkpoint ratio, all from the normalized initial state `(1, 0)`
/// at index 0.
pub fn growth_scan(coeffs: &CoeffSeq, z: Complex64, periods: &[i64]) -> Result<Vec<GrowthRow>> {
    check_periods(periods)?;
    let (lo, hi) = coeffs.window();
    let p_max = *periods.last().unwrap();
    if lo > -p_max || hi < 2 * p_max + 1 {
        return Err(CoreError::WindowOutOfRange {
            index: -p_max,
            lo,
            hi,
        });
    }
    let init = State2::new(Complex64::new(1.0, 0.0), Complex64::default(), 0);
    let rho = coeffs.norm_ainv() * (z.norm() + coeffs.norm_b()) + coeffs.norm_ainv() + coeffs.norm_a();
    let kappa = coeffs.norm_ainv() * coeffs.norm_ainv() * (z.norm() + coeffs.norm_b() + 1.0) + 1.0;
    let mut rows = Vec::with_capacity(periods.len());
    for &p in periods {
        let defect = gordon_defect(coeffs, p)?;
        let checkpoints = [-p, p, 2 * p];
        let true_logs = checkpoint_log_norms(coeffs, z, &init, &checkpoints)?;
        let true_checkpoint = true_logs.into_iter().fold(f64::NEG_INFINITY, f64::max).exp();
        let periodized = coeffs.periodized(p)?;
        let periodic_checkpoint = three_block_gap(&periodized, z, p, &init)?;
        let (error_bound, certified) = if defect == 0.0 {
            (0.0, true)
        } else {
            let ln_bound = 2.0 * p as f64 * rho.ln() + kappa.ln() + (2.0 * p as f64).ln() + defect.ln();
            (ln_bound.exp(), ln_bound < 0.25f64.ln())
        };
        rows.push(GrowthRow {
            period: p,
            defect,
            periodic_checkpoint,
            error_bound,
            true_checkpoint,
            certified,
        });
    }
    Ok(rows)
}

//! Quasiperiodic coefficient construction: continued fractions with exact
//! integer arithmetic, Hoelder samplers on the torus, and sampled Jacobi
//! coefficients whose near-periodicity defects decay with the quality of the
//! rational approximation.
//!
//! A frequency is never held as a float. Torus points `alpha n mod 1` are
//! evaluated from the deepest stored convergent, and the substitution error is
//! bracketed with exact rational arithmetic before any sampling happens.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{CoreError, Result};
use crate::jacobi::{self, CoeffSeq, GordonCertificate};

/// Bit budget for continued-fraction denominators; construction stops with an
/// error once a denominator would exceed it.
pub const FREQ_BIT_BUDGET: u64 = 1 << 20;

/// Maximum supported continued-fraction depth.
pub const MAX_DEPTH: usize = 8;

/// An irrational (or rational, when the expansion terminates) frequency in
/// `(0, 1)`, stored as partial quotients `a_1, a_2, ...` together with the
/// exact convergents `p_m / q_m`.
#[derive(Debug, Clone)]
pub struct Frequency {
    partial_quotients: Vec<BigUint>,
    convergents: Vec<(BigUint, BigUint)>,
    exact: bool,
    /// The next partial quotient `a_{depth+1}` when it is known analytically
    /// (generator rules, periodic expansions); sharpens the error bound of
    /// the deepest convergent to `1/(q_d q_{d+1})` without materializing the
    /// full next convergent in the main list.
    tail_quotient: Option<BigUint>,
}

impl Frequency {
    /// Frequency `[0; a_1, a_2, ...]` from explicit partial quotients. Set
    /// `exact` when the expansion is complete (rational frequency).
    pub fn from_partial_quotients(quotients: Vec<BigUint>, exact: bool) -> Result<Self> {
        if quotients.is_empty() {
            return Err(CoreError::Invalid("need at least one partial quotient".into()));
        }
        if quotients.iter().any(|a| a.is_zero()) {
            return Err(CoreError::Invalid("partial quotients must be positive".into()));
        }
        let mut convergents = Vec::with_capacity(quotients.len());
        let (mut p_prev, mut p) = (BigUint::one(), BigUint::zero()); // p_{-1}, p_0
        let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one()); // q_{-1}, q_0
        for (i, a) in quotients.iter().enumerate() {
            let p_next = a * &p + &p_prev;
            let q_next = a * &q + &q_prev;
            if q_next.bits() > FREQ_BIT_BUDGET {
                return Err(CoreError::DepthOverflow {
                    depth: i + 1,
                    detail: format!("denominator needs {} bits", q_next.bits()),
                });
            }
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            convergents.push((p.clone(), q.clone()));
        }
        Ok(Self { partial_quotients: quotients, convergents, exact, tail_quotient: None })
    }

    /// Attach the analytically known next partial quotient.
    pub fn with_tail_quotient(mut self, a_next: BigUint) -> Result<Self> {
        if a_next.is_zero() {
            return Err(CoreError::Invalid("partial quotients must be positive".into()));
        }
        self.tail_quotient = Some(a_next);
        Ok(self)
    }

    /// The Liouville-type frequency generated by the rule
    /// `a_{m+1} = max(1, ceil(m^{q_m}))` (so `a_1 = 1`), which forces
    /// `|alpha - p_m/q_m| < 1/(q_m q_{m+1}) <= m^{-q_m}` for every `m >= 1`.
    pub fn liouville(depth: usize) -> Result<Self> {
        Self::liouville_seeded(depth, 1)
    }

    /// Same rule with an explicit first quotient `a_1`.
    pub fn liouville_seeded(depth: usize, a1: u64) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(CoreError::Domain(format!(
                "depth {depth} outside 1..={MAX_DEPTH}"
            )));
        }
        if a1 == 0 {
            return Err(CoreError::Domain("seed quotient must be positive".into()));
        }
        // rule quotient max(1, ceil(m^{q_m})), guarded by the bit budget
        // before the power is materialized
        let rule = |m: usize, q_m: &BigUint| -> Result<BigUint> {
            if m <= 1 {
                return Ok(BigUint::one());
            }
            let needed_bits =
                (q_m.to_f64().unwrap_or(f64::INFINITY) * (m as f64).log2()).ceil();
            if !needed_bits.is_finite() || needed_bits > FREQ_BIT_BUDGET as f64 {
                return Err(CoreError::DepthOverflow {
                    depth: m + 1,
                    detail: format!("quotient m^q_m needs about {needed_bits:.0} bits"),
                });
            }
            let exp = q_m.to_u32().ok_or_else(|| CoreError::DepthOverflow {
                depth: m + 1,
                detail: "denominator exceeds the exponent range".into(),
            })?;
            Ok(BigUint::from(m).pow(exp).max(BigUint::one()))
        };
        let mut quotients: Vec<BigUint> = vec![BigUint::from(a1)];
        let mut q_prev = BigUint::one(); // q_0
        let mut q = BigUint::from(a1); // q_1
        for m in 1..depth {
            let a_next = rule(m, &q)?;
            let q_next = &a_next * &q + &q_prev;
            if q_next.bits() > FREQ_BIT_BUDGET {
                return Err(CoreError::DepthOverflow {
                    depth: m + 1,
                    detail: format!("denominator needs {} bits", q_next.bits()),
                });
            }
            quotients.push(a_next);
            q_prev = std::mem::replace(&mut q, q_next);
        }
        let freq = Self::from_partial_quotients(quotients, false)?;
        // the rule also pins a_{depth+1}; keep it for the tail error bound
        // when it fits the budget
        match rule(depth, &q) {
            Ok(tail) => freq.with_tail_quotient(tail),
            Err(_) => Ok(freq),
        }
    }

    /// The golden-mean frequency `[0; 1, 1, 1, ...]` truncated at `depth`.
    pub fn golden_mean(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(CoreError::Domain("depth must be positive".into()));
        }
        Self::from_partial_quotients(vec![BigUint::one(); depth], false)?
            .with_tail_quotient(BigUint::one())
    }

    /// Exact rational frequency `p/q` in `(0, 1)`.
    pub fn from_rational(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 || p >= q {
            return Err(CoreError::Domain(format!("need 0 < p/q < 1, got {p}/{q}")));
        }
        let mut quotients = Vec::new();
        let (mut num, mut den) = (q, p); // alpha = [0; a_1, ...]: a_1 = floor(q/p)
        while den != 0 {
            quotients.push(BigUint::from(num / den));
            let r = num % den;
            num = den;
            den = r;
        }
        // canonical form: a last quotient of 1 folds into its predecessor
        if quotients.len() > 1 && quotients.last() == Some(&BigUint::one()) {
            quotients.pop();
            let last = quotients.last_mut().unwrap();
            *last += BigUint::one();
        }
        Self::from_partial_quotients(quotients, true)
    }

    pub fn depth(&self) -> usize {
        self.convergents.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn partial_quotients(&self) -> &[BigUint] {
        &self.partial_quotients
    }

    /// `(p_m, q_m)`, 1-based.
    pub fn convergent(&self, m: usize) -> Result<(&BigUint, &BigUint)> {
        self.convergents
            .get(m - 1)
            .map(|(p, q)| (p, q))
            .ok_or_else(|| CoreError::Invalid(format!("no convergent at depth {m}")))
    }

    /// Denominator `q_m` as `i64`, when it fits.
    pub fn denominator_i64(&self, m: usize) -> Result<i64> {
        let (_, q) = self.convergent(m)?;
        q.to_i64().ok_or_else(|| CoreError::PrecisionBudget(format!(
            "q_{m} does not fit in an i64 window index"
        )))
    }

    /// Exact rational upper bound `num/den` for `|alpha - p_m/q_m|`: zero for
    /// a terminated expansion at its last convergent, `1/(q_m q_{m+1})` when
    /// the next denominator is available (stored or reconstructible from the
    /// tail quotient), `1/q_m^2` otherwise.
    pub fn approx_error_upper(&self, m: usize) -> Result<(BigUint, BigUint)> {
        let (_, q) = self.convergent(m)?;
        if self.exact && m == self.depth() {
            return Ok((BigUint::zero(), BigUint::one()));
        }
        if m < self.depth() {
            let (_, q_next) = self.convergent(m + 1)?;
            return Ok((BigUint::one(), q * q_next));
        }
        if let Some(tail) = &self.tail_quotient {
            let q_prev = if m >= 2 {
                self.convergent(m - 1)?.1.clone()
            } else {
                BigUint::one()
            };
            return Ok((BigUint::one(), q * (tail * q + q_prev)));
        }
        Ok((BigUint::one(), q * q))
    }

    /// Upper bound for `dist(alpha q_m, Z)`, from
    /// `dist(alpha q_m, Z) <= q_m |alpha - p_m/q_m|`, rounded upward.
    pub fn torus_dist_upper(&self, m: usize) -> Result<f64> {
        let (num, den) = self.approx_error_upper(m)?;
        let (_, q) = self.convergent(m)?;
        let val = (q * &num).to_f64().unwrap_or(f64::INFINITY)
            / den.to_f64().unwrap_or(f64::INFINITY);
        Ok(val * (1.0 + 1e-12))
    }

    /// Check that sampling `alpha n` from the deepest convergent keeps the
    /// substitution error below `1e-18` over `|n| <= max_abs_n`; errors with
    /// the budget shortfall otherwise.
    pub fn ensure_sampling_precision(&self, max_abs_n: u64) -> Result<()> {
        let m = self.depth();
        let (num, den) = self.approx_error_upper(m)?;
        // require num * max_abs_n * 1e18 < den, exactly
        let lhs = num * BigUint::from(max_abs_n.max(1)) * BigUint::from(10u8).pow(18);
        if lhs < den {
            Ok(())
        } else {
            Err(CoreError::PrecisionBudget(format!(
                "convergent {m} leaves more than 1e-18 torus error over |n| <= {max_abs_n}"
            )))
        }
    }

    /// Torus point `frac(n p_M / q_M)` from the deepest convergent, exact in
    /// integer arithmetic with a u128 fast path.
    pub fn torus_position(&self, n: i64) -> f64 {
        let (p, q) = &self.convergents[self.depth() - 1];
        if let (Some(pu), Some(qu)) = (p.to_u64(), q.to_u64()) {
            if let Some(nach) = (n.unsigned_abs() as u128).checked_mul(pu as u128) {
                let qm = qu as u128;
                let mut r = (nach % qm) as i128;
                if n < 0 {
                    r = -r;
                }
                let r = r.rem_euclid(qm as i128) as u128;
                return r as f64 / qm as f64;
            }
        }
        let q_int = BigInt::from(q.clone());
        let mut r = (BigInt::from(n) * BigInt::from(p.clone())) % &q_int;
        if r.sign() == num_bigint::Sign::Minus {
            r += &q_int;
        }
        r.to_f64().unwrap_or(0.0) / q_int.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// A Hoelder-continuous function on the torus with the metadata the estimates
/// consume: exponent, constant, a sup bound, and a positive lower bound on the
/// modulus (needed when the sampler feeds the off-diagonal coefficient).
#[derive(Debug, Clone)]
pub struct TorusSampler {
    kind: SamplerKind,
    pub holder_beta: f64,
    pub holder_const: f64,
    pub sup_bound: f64,
    pub inf_modulus: f64,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    /// `c_0 + sum_k (c_k cos(2 pi k x) + s_k sin(2 pi k x))`
    Trig {
        constant: Complex64,
        harmonics: Vec<(u32, Complex64, Complex64)>,
    },
    /// `offset + scale * dist(x, Z)^beta`
    DistPow {
        offset: Complex64,
        scale: Complex64,
        beta: f64,
    },
}

impl TorusSampler {
    /// Trigonometric polynomial; Lipschitz (`beta = 1`). The oscillation of
    /// the harmonic `c cos(2 pi k x) + s sin(2 pi k x)` is bounded by its
    /// exact phasor amplitude `sup_theta |c cos theta + s sin theta|`, so a
    /// pure `e^{2 pi i k x}` term contributes amplitude `1`, not `2`.
    pub fn trig(constant: Complex64, harmonics: Vec<(u32, Complex64, Complex64)>) -> Result<Self> {
        if harmonics.iter().any(|(k, _, _)| *k == 0) {
            return Err(CoreError::Invalid("harmonic index must be positive".into()));
        }
        let amp = |c: &Complex64, s: &Complex64| -> f64 {
            let half_sum = (c.norm_sqr() + s.norm_sqr()) / 2.0;
            let half_diff = (c.norm_sqr() - s.norm_sqr()) / 2.0;
            let cross = (c.conj() * s).re;
            (half_sum + (half_diff * half_diff + cross * cross).sqrt()).sqrt()
        };
        let osc: f64 = harmonics.iter().map(|(_, c, s)| amp(c, s)).sum();
        let lip: f64 = harmonics
            .iter()
            .map(|(k, c, s)| std::f64::consts::TAU * *k as f64 * amp(c, s))
            .sum();
        Ok(Self {
            kind: SamplerKind::Trig { constant, harmonics },
            holder_beta: 1.0,
            holder_const: lip,
            sup_bound: constant.norm() + osc,
            inf_modulus: (constant.norm() - osc).max(0.0),
        })
    }

    /// `offset + scale * dist(x, Z)^beta` with a genuine Hoelder exponent
    /// `beta` in `(0, 1]`.
    pub fn dist_pow(offset: Complex64, scale: Complex64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(CoreError::Domain(format!("beta = {beta} outside (0, 1]")));
        }
        let amp = scale.norm() * 0.5f64.powf(beta);
        Ok(Self {
            kind: SamplerKind::DistPow { offset, scale, beta },
            holder_beta: beta,
            holder_const: scale.norm(),
            sup_bound: offset.norm() + amp,
            inf_modulus: (offset.norm() - amp).max(0.0),
        })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match &self.kind {
            SamplerKind::Trig { constant, harmonics } => {
                let mut v = *constant;
                for (k, c, s) in harmonics {
                    let arg = std::f64::consts::TAU * *k as f64 * x;
                    v += c * arg.cos() + s * arg.sin();
                }
                v
            }
            SamplerKind::DistPow { offset, scale, beta } => {
                let d = x.rem_euclid(1.0);
                let d = d.min(1.0 - d);
                offset + scale * d.powf(*beta)
            }
        }
    }
}

/// Sample Jacobi coefficients `a(n) = a_sampler(alpha n)`,
/// `b(n) = b_sampler(alpha n)` over the window, with norms taken from the
/// sampler metadata.
pub fn sample_coeffs(
    a_sampler: &TorusSampler,
    b_sampler: &TorusSampler,
    freq: &Frequency,
    window: (i64, i64),
) -> Result<CoeffSeq> {
    let (lo, hi) = window;
    if lo > hi {
        return Err(CoreError::Invalid(format!("empty window [{lo}, {hi}]")));
    }
    if a_sampler.inf_modulus <= 0.0 {
        return Err(CoreError::Domain(
            "a-sampler must be bounded away from zero on the torus".into(),
        ));
    }
    let max_abs_n = lo.unsigned_abs().max(hi.unsigned_abs());
    freq.ensure_sampling_precision(max_abs_n)?;
    let mut a = Vec::with_capacity((hi - lo + 1) as usize);
    let mut b = Vec::with_capacity((hi - lo + 1) as usize);
    for n in lo..=hi {
        let x = freq.torus_position(n);
        a.push(a_sampler.eval(x));
        b.push(b_sampler.eval(x));
    }
    CoeffSeq::new(lo, a, b)?.with_norms(
        a_sampler.sup_bound,
        1.0 / a_sampler.inf_modulus,
        b_sampler.sup_bound,
    )
}

/// End-to-end certificate for the quasiperiodic example: sample over
/// `[-q_P, 2 q_P + 1]` for `P = period_depth`, measure the defect at the
/// convergent denominators `q_1 .. q_P`, and attach the disk radius bought by
/// rate `C`. Sampling always uses the deepest stored convergent; a frequency
/// may carry far more depth than the scanned periods so badly approximable
/// frequencies still clear the precision budget.
pub fn example_certificate(
    a_sampler: &TorusSampler,
    b_sampler: &TorusSampler,
    freq: &Frequency,
    c: f64,
    period_depth: usize,
) -> Result<GordonCertificate> {
    if period_depth == 0 || period_depth > freq.depth() {
        return Err(CoreError::Domain(format!(
            "period depth {period_depth} outside 1..={}",
            freq.depth()
        )));
    }
    let mut periods = Vec::with_capacity(period_depth);
    for m in 1..=period_depth {
        let q = freq.denominator_i64(m)?;
        periods.push(q);
    }
    let q_max = *periods.last().unwrap();
    let coeffs = sample_coeffs(a_sampler, b_sampler, freq, (-q_max, 2 * q_max + 1))?;
    let defects = periods
        .iter()
        .map(|p| jacobi::gordon_defect(&coeffs, *p))
        .collect::<Result<Vec<_>>>()?;
    let radius = jacobi::disk_radius(
        a_sampler.sup_bound,
        1.0 / a_sampler.inf_modulus,
        b_sampler.sup_bound,
        c,
    )?;
    GordonCertificate::new(periods, defects, c, radius)
}

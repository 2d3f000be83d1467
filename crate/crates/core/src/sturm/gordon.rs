//! Periodization, the continuum three-block bound, the near-periodicity
//! defect, and the growth scan for the continuum operator.
//!
//! Periodization is the plain periodic extension of the restriction of
//! `(a, mu)` to the half-open block `(0, p]`, tiled over `[-p, 2p]`; the
//! uniform norm of the result is measured, never assumed. The defect at
//! period `p` is the `L1` distance between `a` and its `p`-shift on `(-p, p)`
//! plus the test-function distance between `mu` and its `p`-shift, the latter
//! evaluated through the window-norm surrogate.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::piecewise::PiecewiseC;

use super::bounds::{energy_rate, l1_diff, perturbation_bound};
use super::measure::LocalMeasure;
use super::transfer::checkpoint_log_norms;
use super::{CState, SLCoeff};

#[derive(Debug, Clone, Copy)]
pub struct PeriodizeDiagnostics {
    /// Measured uniform local norm of the periodized measure.
    pub realized_unif_norm: f64,
    /// The window `[alpha, p - alpha]` on which the output provably agrees
    /// with the input.
    pub agreement_window: (f64, f64),
}

fn wrap_into_block(x: f64, p: f64) -> f64 {
    let w = x - p * (x / p).floor();
    if w == 0.0 {
        p
    } else {
        w
    }
}

/// Plain periodic extension of `(a, mu)` restricted to `(0, p]`, tiled over
/// `[-p, 2p]`. Requires `0 < alpha <= p/2`; the output agrees with the input
/// on `[alpha, p - alpha]` (in fact on all of `(0, p]`).
pub fn periodize(coeff: &SLCoeff, p: f64, alpha: f64) -> Result<(SLCoeff, PeriodizeDiagnostics)> {
    if !(p > 0.0) || !(alpha > 0.0) || alpha > p / 2.0 {
        return Err(CoreError::Domain(format!(
            "need 0 < alpha <= p/2, got alpha = {alpha}, p = {p}"
        )));
    }
    coeff.check_window(-p, 2.0 * p)?;

    // a: tile by evaluating at block-wrapped midpoints
    let mut a_cuts: Vec<f64> = Vec::new();
    for shift in [-p, 0.0, p] {
        a_cuts.extend(
            coeff
                .a()
                .interior_breakpoints(0.0, p)
                .map(|b| b + shift),
        );
        a_cuts.push(shift);
    }
    let a_src = coeff.a().clone();
    let a_tiled = PiecewiseC::rebuild_on(-p, 2.0 * p, a_cuts, |t| {
        a_src.eval(wrap_into_block(t, p) - 0.5 * 1e-12) // stay inside the block cell
    })?;
    // the tiny inward nudge above only matters at exact breakpoints, which
    // rebuild_on never samples (it evaluates midpoints); keep values verbatim
    let a_tiled = {
        let a_src = coeff.a().clone();
        PiecewiseC::rebuild_on(-p, 2.0 * p, a_tiled.breakpoints().to_vec(), |t| {
            a_src.eval(wrap_into_block(t, p))
        })?
    };

    // mu: atoms of the block (0, p] copied into each tile, density tiled like a
    let block_atoms: Vec<(f64, Complex64)> = coeff
        .mu()
        .atoms()
        .iter()
        .filter(|(q, _)| *q > 0.0 && *q <= p)
        .cloned()
        .collect();
    let mut atoms: Vec<(f64, Complex64)> = Vec::with_capacity(3 * block_atoms.len());
    for shift in [-p, 0.0, p] {
        atoms.extend(block_atoms.iter().map(|(q, w)| (q + shift, *w)));
    }
    atoms.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut d_cuts: Vec<f64> = Vec::new();
    for shift in [-p, 0.0, p] {
        d_cuts.extend(
            coeff
                .mu()
                .density()
                .interior_breakpoints(0.0, p)
                .map(|b| b + shift),
        );
        d_cuts.push(shift);
    }
    let d_src = coeff.mu().density().clone();
    let density = PiecewiseC::rebuild_on(-p, 2.0 * p, d_cuts, |t| d_src.eval(wrap_into_block(t, p)))?;
    let mu = LocalMeasure::new(atoms, density, (-p, 2.0 * p))?;
    let realized_unif_norm = mu.unif_norm();
    let out = SLCoeff::new(a_tiled, mu)?;
    Ok((
        out,
        PeriodizeDiagnostics { realized_unif_norm, agreement_window: (alpha, p - alpha) },
    ))
}

/// Structural `p`-periodicity check on `[-p, 2p]`: the `a`-values and the
/// measure must be invariant under the `p`-shift up to tiling roundoff
/// (`1e-9` on positions, `1e-12` relative on values).
fn check_periodic(coeff: &SLCoeff, p: f64) -> Result<()> {
    let err = |detail: String| CoreError::NonPeriodicInput { period: format!("{p}"), detail };
    // translate(-p) carries the value at t + p to t, so both graphs are
    // defined on the compared range [-p, p]
    let a_dist = l1_diff(coeff.a(), &coeff.a().translate(-p), -p, p);
    if a_dist > 1e-12 * (1.0 + coeff.norm_a()) * 2.0 * p {
        return Err(err(format!("a differs from its shift by {a_dist} in L1")));
    }
    let mu = coeff.mu();
    let shifted = mu.translate(-p); // value at t is mu at t + p
    let d_dist = l1_diff(mu.density(), shifted.density(), -p, p);
    if d_dist > 1e-12 * (1.0 + mu.density().max_abs()) * 2.0 * p {
        return Err(err(format!("density differs from its shift by {d_dist} in L1")));
    }
    let in_range =
        |q: f64| -> bool { (-p..p).contains(&q) };
    let scale: f64 = mu.atoms().iter().map(|(_, w)| w.norm()).fold(1.0, f64::max);
    for (q, w) in mu.atoms().iter().filter(|(q, _)| in_range(*q)) {
        let partner = mu
            .atoms()
            .iter()
            .find(|(q2, _)| (q2 - (q + p)).abs() <= 1e-9);
        match partner {
            Some((_, w2)) if (w - w2).norm() <= 1e-12 * scale => {}
            _ => return Err(err(format!("atom at {q} has no p-shifted partner"))),
        }
    }
    Ok(())
}

/// Continuum three-block checkpoint ratio: for `p`-periodic coefficients the
/// state of any solution at one of `-p`, `p`, `2p` has norm at least half the
/// initial norm (Cayley-Hamilton applied to the determinant-one monodromy
/// matrix, exactly as in the discrete case). The checkpoint set deliberately
/// excludes 0, where the ratio would be trivially 1.
pub fn three_block_gap(coeff: &SLCoeff, z: Complex64, p: f64, init: &CState) -> Result<f64> {
    if !(p > 0.0) {
        return Err(CoreError::Domain(format!("period {p} must be positive")));
    }
    if init.t != 0.0 {
        return Err(CoreError::MismatchedInitialState(
            "three-block initial state sits at t = 0".into(),
        ));
    }
    if init.norm() == 0.0 {
        return Err(CoreError::ZeroInitialState);
    }
    coeff.check_window(-p, 2.0 * p)?;
    check_periodic(coeff, p)?;
    let logs = checkpoint_log_norms(coeff, z, init, &[-p, p, 2.0 * p])?;
    let best = logs.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok((best - init.norm().ln()).exp())
}

/// The two components of the defect at period `p`: the `L1` distance
/// `int_{-p}^{p} |a(t) - a(t+p)| dt` and the window-norm surrogate distance
/// between `mu` and `mu(. + p)` over `[-p, p]`.
pub fn gordon_defect_parts(coeff: &SLCoeff, p: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0) {
        return Err(CoreError::Domain(format!(
            "period {p} below the unit test-function scale"
        )));
    }
    coeff.check_window(-p, 2.0 * p)?;
    let l1 = l1_diff(coeff.a(), &coeff.a().translate(-p), -p, p);
    let nu = coeff.mu().sub(&coeff.mu().translate(-p))?;
    let meas = nu.interval_norm_upper(-p, p)?;
    Ok((l1, meas))
}

/// Total defect at period `p` (sum of the two parts).
pub fn gordon_defect(coeff: &SLCoeff, p: f64) -> Result<f64> {
    let (l1, meas) = gordon_defect_parts(coeff, p)?;
    Ok(l1 + meas)
}

/// One row of the continuum growth scan.
#[derive(Debug, Clone)]
pub struct SlGrowthRow {
    pub period: f64,
    /// Shift defect at this period (the decay-condition quantity).
    pub defect: f64,
    /// Distance ingredients between the input and its periodization over the
    /// scan window.
    pub l1_to_periodized: f64,
    pub measure_to_periodized: f64,
    /// Three-block checkpoint ratio of the periodized solution (>= 1/2).
    pub periodic_checkpoint: f64,
    /// Rigorous bound on `|u - u_m|` at the checkpoints.
    pub u_error_bound: f64,
    /// Measured `max |u - u_m|` over the checkpoints.
    pub u_diff_max: f64,
    /// Measured checkpoint ratio of the true solution.
    pub true_checkpoint: f64,
    /// Set when `u_error_bound < 1/4`.
    pub certified: bool,
}

/// Growth bookkeeping per period: periodize, bound the solution difference by
/// the perturbation inequality with measured envelope constants, and record
/// the measured checkpoint ratios of both solutions. Scan periods must be
/// integers at least 2 (the perturbation window is integer-anchored).
pub fn growth_scan(coeff: &SLCoeff, z: Complex64, periods: &[f64]) -> Result<Vec<SlGrowthRow>> {
    if periods.is_empty() {
        return Err(CoreError::Invalid("empty period list".into()));
    }
    if periods.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::Invalid("periods must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(periods.len());
    let one = Complex64::new(1.0, 0.0);
    let init = CState::new(one, Complex64::default(), 0.0);
    for &p in periods {
        if p < 2.0 || p.fract() != 0.0 {
            return Err(CoreError::Domain(format!(
                "scan period {p} must be an integer >= 2"
            )));
        }
        coeff.check_window(-p, 2.0 * p)?;
        let defect = gordon_defect(coeff, p)?;
        let (periodized, _diag) = periodize(coeff, p, 1.0)?;

        // fold z into both systems and compare solutions of H u = 0
        let coeff_z = SLCoeff::new(coeff.a().clone(), coeff.shifted_measure(z)?)?;
        let periodized_z = SLCoeff::new(periodized.a().clone(), periodized.shifted_measure(z)?)?;

        let l1_to_periodized = l1_diff(coeff.a(), periodized.a(), -p, 2.0 * p);
        let nu = periodized_z.mu().sub(coeff_z.mu())?;
        let measure_to_periodized = nu.interval_norm_upper(-p, 2.0 * p)?;

        let rate = energy_rate(&periodized_z).max(energy_rate(&coeff_z));
        let checkpoints = [-p, p, 2.0 * p];
        let (u_error_bound, u_diff_max) = if l1_to_periodized == 0.0 && nu.is_zero() {
            (0.0, 0.0)
        } else if rate == 0.0 {
            (f64::INFINITY, f64::NAN)
        } else {
            let omega = rate * (1.0 + 1e-12);
            let c_env = periodized_z.norm_ainv().max(1.0)
                * (energy_rate(&periodized_z) / 2.0).exp()
                * (1.0 + 1e-12);
            let (alpha, beta) = (-(p as i64), 2 * p as i64);
            let mut bound = 0.0f64;
            let mut diff = 0.0f64;
            for t in checkpoints {
                let (lhs, rhs) = perturbation_bound(
                    &periodized_z,
                    &coeff_z,
                    (alpha, beta),
                    t,
                    (c_env, omega),
                )?;
                bound = bound.max(rhs);
                diff = diff.max(lhs);
            }
            (bound, diff)
        };

        let periodic_checkpoint = three_block_gap(&periodized, z, p, &init)?;
        let true_logs = checkpoint_log_norms(coeff, z, &init, &checkpoints)?;
        let true_checkpoint = true_logs.into_iter().fold(f64::NEG_INFINITY, f64::max).exp();

        rows.push(SlGrowthRow {
            period: p,
            defect,
            l1_to_periodized,
            measure_to_periodized,
            periodic_checkpoint,
            u_error_bound,
            u_diff_max,
            true_checkpoint,
            certified: u_error_bound < 0.25,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sturm::transfer::tests::random_coeff;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Tile a random block over [-p, 2p] by periodizing it.
    fn random_periodic_coeff(rng: &mut StdRng, p: f64) -> SLCoeff {
        let base = random_coeff(rng, -p - 0.5, 2.0 * p + 0.5, 6, 3);
        periodize(&base, p, p / 4.0).unwrap().0
    }

    #[test]
    fn periodize_periodic_input_is_identity_on_content() {
        let mut rng = StdRng::seed_from_u64(301);
        let coeff = random_periodic_coeff(&mut rng, 2.0);
        let (again, diag) = periodize(&coeff, 2.0, 0.5).unwrap();
        assert!(l1_diff(coeff.a(), again.a(), -2.0, 4.0) < 1e-12);
        assert!(l1_diff(coeff.mu().density(), again.mu().density(), -2.0, 4.0) < 1e-12);
        assert_eq!(coeff.mu().atoms().len(), again.mu().atoms().len());
        for (x, y) in coeff.mu().atoms().iter().zip(again.mu().atoms()) {
            assert!((x.0 - y.0).abs() < 1e-9);
            assert!((x.1 - y.1).norm() < 1e-12);
        }
        assert_eq!(diag.agreement_window, (0.5, 1.5));
    }

    #[test]
    fn periodize_relocates_origin_atom_to_period_end() {
        // an atom at 0 falls outside the block (0, p]; its periodic
        // representative is the one at p, so a genuinely periodic input with
        // atoms at multiples of p survives tiling unchanged
        let p = 2.0;
        let atoms: Vec<(f64, Complex64)> = (-1..=2)
            .map(|k| (k as f64 * p, c(1.0, 0.0)))
            .collect();
        let mu = LocalMeasure::from_atoms(atoms.clone(), (-p, 2.0 * p)).unwrap();
        let coeff = SLCoeff::unit_a(mu).unwrap();
        let (out, _) = periodize(&coeff, p, 0.5).unwrap();
        let got: Vec<f64> = out.mu().atoms().iter().map(|(q, _)| *q).collect();
        assert_eq!(got.len(), 3);
        for (q, expect) in got.iter().zip([-p, 0.0, p].iter()) {
            // block representative is p, tiled to p + {-2p, -p, 0}
            assert!((q - (expect + p)).abs() < 1e-12, "{got:?}");
        }
        // the original atoms at -p and 0 are recovered as tile images
        assert!(out.mu().atoms().iter().any(|(q, _)| (*q - 0.0).abs() < 1e-12));
    }

    #[test]
    fn periodize_density_unif_norm_at_most_doubled() {
        let mut rng = StdRng::seed_from_u64(307);
        for _ in 0..50 {
            let base = random_coeff(&mut rng, -4.5, 8.5, 5, 0);
            let (out, diag) = periodize(&base, 4.0, 1.0).unwrap();
            let original = base.mu().unif_norm();
            assert!(
                diag.realized_unif_norm <= 2.0 * original + 1e-12,
                "unif {} vs original {original}",
                diag.realized_unif_norm
            );
            let _ = out;
        }
    }

    #[test]
    fn three_block_cosh_case() {
        // a = 1, mu = 0, z = -1: u = cosh from (1, 0)
        let p = 1.5;
        let mu = LocalMeasure::zero((-p, 2.0 * p)).unwrap();
        let coeff = SLCoeff::unit_a(mu).unwrap();
        let init = CState::new(c(1.0, 0.0), c(0.0, 0.0), 0.0);
        let r = three_block_gap(&coeff, c(-1.0, 0.0), p, &init).unwrap();
        assert!(r >= p.cosh());
        assert!(r >= 0.5 - 1e-10);
    }

    #[test]
    fn three_block_random_periodic() {
        let mut rng = StdRng::seed_from_u64(311);
        for _ in 0..500 {
            let p = rng.random_range(1.0..5.0);
            let coeff = random_periodic_coeff(&mut rng, p);
            let z = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let init = CState::new(
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                0.0,
            );
            if init.norm() < 1e-3 {
                continue;
            }
            let r = three_block_gap(&coeff, z, p, &init).unwrap();
            assert!(r >= 0.5 - 1e-10, "ratio {r} at p = {p}");
        }
    }

    #[test]
    fn three_block_guards() {
        let mu = LocalMeasure::zero((-2.0, 4.0)).unwrap();
        let coeff = SLCoeff::unit_a(mu).unwrap();
        let zero = CState::new(c(0.0, 0.0), c(0.0, 0.0), 0.0);
        assert!(matches!(
            three_block_gap(&coeff, c(0.0, 0.0), 2.0, &zero),
            Err(CoreError::ZeroInitialState)
        ));
        let mut rng = StdRng::seed_from_u64(313);
        let aperiodic = random_coeff(&mut rng, -2.0, 4.0, 5, 2);
        let init = CState::new(c(1.0, 0.0), c(0.0, 0.0), 0.0);
        assert!(matches!(
            three_block_gap(&aperiodic, c(0.0, 0.0), 2.0, &init),
            Err(CoreError::NonPeriodicInput { .. })
        ));
    }

    #[test]
    fn defect_zero_for_periodic() {
        let mut rng = StdRng::seed_from_u64(317);
        let coeff = random_periodic_coeff(&mut rng, 2.0);
        let (l1, meas) = gordon_defect_parts(&coeff, 2.0).unwrap();
        assert!(l1 < 1e-12, "l1 {l1}");
        assert!(meas < 1e-10, "meas {meas}");
    }

    #[test]
    fn defect_single_atom_scales_linearly() {
        let p = 2.0;
        for eps in [1e-3, 1e-2] {
            let mu = LocalMeasure::from_atoms(vec![(0.5, c(eps, 0.0))], (-p, 2.0 * p)).unwrap();
            let coeff = SLCoeff::unit_a(mu).unwrap();
            let (l1, meas) = gordon_defect_parts(&coeff, p).unwrap();
            assert_eq!(l1, 0.0);
            // the atom and its shift image sit in disjoint unit windows, so
            // the surrogate sees a single eps-atom: J at the centered window
            // is eps (with the sliding-grid padding on top)
            assert!((meas - eps).abs() <= 0.05 * eps, "meas {meas} vs eps {eps}");
        }
    }

    #[test]
    fn defect_a_shift_is_rectangle_area() {
        let p = 2.0;
        let a = PiecewiseC::new(
            vec![-p, 0.3, 0.8, 2.0 * p],
            vec![c(1.0, 0.0), c(1.0 + 0.05, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let mu = LocalMeasure::zero((-p, 2.0 * p)).unwrap();
        let coeff = SLCoeff::new(a, mu).unwrap();
        let (l1, _) = gordon_defect_parts(&coeff, p).unwrap();
        // the bump of height 0.05 and width 0.5 appears twice in the shift
        // difference (once against each unperturbed copy)
        assert!((l1 - 2.0 * 0.05 * 0.5).abs() < 1e-12, "l1 {l1}");
    }

    #[test]
    fn growth_scan_periodic_certifies() {
        let mut rng = StdRng::seed_from_u64(331);
        let base = random_coeff(&mut rng, -4.5, 8.6, 5, 2);
        let (coeff, _) = periodize(&base, 4.0, 1.0).unwrap();
        let rows = growth_scan(&coeff, c(0.02, 0.01), &[4.0]).unwrap();
        let row = &rows[0];
        assert!(row.certified, "error bound {}", row.u_error_bound);
        assert!(row.periodic_checkpoint >= 0.5 - 1e-10);
        assert!(row.true_checkpoint >= 0.25);
    }

    #[test]
    fn growth_scan_declines_on_large_defects() {
        let mut rng = StdRng::seed_from_u64(337);
        let coeff = random_coeff(&mut rng, -16.5, 33.0, 8, 4);
        let rows = growth_scan(&coeff, c(0.05, 0.0), &[2.0, 4.0, 8.0, 16.0]).unwrap();
        for row in rows {
            assert!(!row.certified, "period {} certified unexpectedly", row.period);
        }
    }
}

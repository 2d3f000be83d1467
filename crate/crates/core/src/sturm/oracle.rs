//! Reference computations used by the test suite. Nothing here is on any
//! production path: the window-norm brute force builds explicit admissible
//! test functions and maximizes over them, and the Runge-Kutta integrator
//! cross-checks the closed-form propagators on atom-free coefficients.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

use super::measure::LocalMeasure;
use super::{CState, SLCoeff};

/// Evaluate `int u dmu` for a real piecewise-linear `u` given by node times
/// and node values (atoms evaluate `u` at their position, density pieces get
/// the exact trapezoid integral).
fn integrate_against(mu: &LocalMeasure, nodes: &[(f64, f64)]) -> Complex64 {
    let u_at = |t: f64| -> f64 {
        match nodes.binary_search_by(|(s, _)| s.partial_cmp(&t).unwrap()) {
            Ok(i) => nodes[i].1,
            Err(0) => 0.0,
            Err(i) if i == nodes.len() => 0.0,
            Err(i) => {
                let (t0, v0) = nodes[i - 1];
                let (t1, v1) = nodes[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    };
    let mut total = Complex64::default();
    for (p, w) in mu.atoms() {
        total += w * u_at(*p);
    }
    for w in nodes.windows(2) {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        // density is constant between consecutive nodes by construction
        let rho = mu.density().eval(0.5 * (t0 + t1));
        total += rho * (0.5 * (v0 + v1) * (t1 - t0));
    }
    total
}

/// For one projection angle, build the optimal admissible test function
/// (slopes `-sign(Re(e^{-i theta} phi) - median)`, balanced to close at the
/// window ends) and return `|int u dmu|`.
fn directional_value(mu: &LocalMeasure, x: f64, theta: f64) -> Result<f64> {
    let (lo, hi) = (x - 1.0, x + 1.0);
    let segments = mu.phi_segments(lo, hi)?;
    if segments.is_empty() {
        return Ok(0.0);
    }
    let w = Complex64::from_polar(1.0, -theta);
    let median = super::measure::weighted_median(&segments, |z| (w * z).re);

    // cell cuts: segment boundaries plus the crossing of each sloped segment
    // with the median level
    let mut cuts: Vec<f64> = vec![lo, hi];
    for s in &segments {
        cuts.push(s.t0);
        let g0 = (w * s.v0).re - median;
        let slope = (w * s.slope).re;
        if slope != 0.0 {
            let tau = -g0 / slope;
            if tau > 0.0 && tau < s.len() {
                cuts.push(s.t0 + tau);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    let g_at = |t: f64| -> f64 {
        let seg = segments
            .iter()
            .find(|s| t >= s.t0 && t < s.t1)
            .unwrap_or(segments.last().unwrap());
        (w * (seg.v0 + seg.slope * (t - seg.t0))).re - median
    };

    let n = cuts.len() - 1;
    let mut slopes = vec![0.0f64; n];
    let scale = segments
        .iter()
        .flat_map(|s| [s.v0.norm(), s.v1().norm()])
        .fold(1.0f64, f64::max);
    let tol = 1e-11 * scale;
    for (i, slope) in slopes.iter_mut().enumerate() {
        let g = g_at(0.5 * (cuts[i] + cuts[i + 1]));
        *slope = if g > tol {
            -1.0
        } else if g < -tol {
            1.0
        } else {
            0.0
        };
    }
    // balance so the test function closes at the right end
    let imbalance: f64 = slopes
        .iter()
        .enumerate()
        .map(|(i, s)| s * (cuts[i + 1] - cuts[i]))
        .sum();
    if imbalance != 0.0 {
        let level_len: f64 = (0..n)
            .filter(|i| slopes[*i] == 0.0)
            .map(|i| cuts[i + 1] - cuts[i])
            .sum();
        if level_len > 0.0 {
            let fix = -imbalance / level_len;
            for s in slopes.iter_mut() {
                if *s == 0.0 {
                    *s = fix.clamp(-1.0, 1.0);
                }
            }
        } else {
            // no level cells: spread the (tiny) residual slope uniformly
            let total: f64 = hi - lo;
            for s in slopes.iter_mut() {
                *s = (*s - imbalance / total).clamp(-1.0, 1.0);
            }
        }
    }
    let mut nodes = Vec::with_capacity(cuts.len());
    let mut v = 0.0f64;
    nodes.push((cuts[0], 0.0));
    for i in 0..n {
        v += slopes[i].clamp(-1.0, 1.0) * (cuts[i + 1] - cuts[i]);
        nodes.push((cuts[i + 1], v));
    }
    // admissibility: close the loop exactly
    let drift = nodes.last().unwrap().1;
    if drift.abs() > 0.0 {
        let total = hi - lo;
        for (t, val) in nodes.iter_mut() {
            *val -= drift * (*t - lo) / total;
        }
    }
    Ok(integrate_against(mu, &nodes).norm())
}

/// Brute-force lower-sup of the test-function norm
/// `sup { |int u dmu| : supp u in [x-1, x+1], |u'| <= 1 }` by sweeping the
/// projection angle and building the optimal test function for each angle.
pub fn measure_norm_bruteforce(mu: &LocalMeasure, x: f64, angles: usize) -> Result<f64> {
    let mut best = 0.0f64;
    let mut best_theta = 0.0f64;
    for k in 0..angles {
        let theta = std::f64::consts::PI * k as f64 / angles as f64;
        let v = directional_value(mu, x, theta)?;
        if v > best {
            best = v;
            best_theta = theta;
        }
    }
    // golden-section refinement around the best angle
    let half = std::f64::consts::PI / angles as f64;
    let (mut a, mut b) = (best_theta - half, best_theta + half);
    const PHI_INV: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - PHI_INV * (b - a);
    let mut x2 = a + PHI_INV * (b - a);
    let mut f1 = directional_value(mu, x, x1)?;
    let mut f2 = directional_value(mu, x, x2)?;
    for _ in 0..40 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - PHI_INV * (b - a);
            f1 = directional_value(mu, x, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + PHI_INV * (b - a);
            f2 = directional_value(mu, x, x2)?;
        }
        best = best.max(f1).max(f2);
    }
    Ok(best)
}

/// Fixed-step RK4 for the atom-free system `u' = (au')/a`,
/// `(au')' = (rho - z) u`, integrating piece by piece so every step sees
/// smooth coefficients. Step size is at most `h`.
pub fn rk4_state(coeff: &SLCoeff, z: Complex64, init: &CState, t_end: f64, h: f64) -> Result<CState> {
    if !coeff.mu().atoms().is_empty() {
        return Err(CoreError::Invalid(
            "the RK4 oracle only handles atom-free measures".into(),
        ));
    }
    if !(h > 0.0) {
        return Err(CoreError::Domain("step must be positive".into()));
    }
    coeff.check_window(init.t.min(t_end), init.t.max(t_end))?;
    let dir = if t_end >= init.t { 1.0 } else { -1.0 };
    let mut cuts: Vec<f64> = coeff
        .a()
        .interior_breakpoints(init.t.min(t_end), init.t.max(t_end))
        .chain(
            coeff
                .mu()
                .density()
                .interior_breakpoints(init.t.min(t_end), init.t.max(t_end)),
        )
        .collect();
    cuts.push(init.t);
    cuts.push(t_end);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    if dir < 0.0 {
        cuts.reverse();
    }
    let mut state = (init.u, init.au_prime);
    for wpair in cuts.windows(2) {
        let (from, to) = (wpair[0], wpair[1]);
        let len = (to - from).abs();
        if len == 0.0 {
            continue;
        }
        let mid = 0.5 * (from + to);
        let a_val = coeff.a().eval(mid);
        let wcoef = coeff.mu().density().eval(mid) - z;
        let steps = (len / h).ceil() as usize;
        let dt = (to - from) / steps as f64;
        let f = |y: (Complex64, Complex64)| -> (Complex64, Complex64) {
            (y.1 / a_val, wcoef * y.0)
        };
        for _ in 0..steps {
            let k1 = f(state);
            let y2 = (state.0 + k1.0 * (dt / 2.0), state.1 + k1.1 * (dt / 2.0));
            let k2 = f(y2);
            let y3 = (state.0 + k2.0 * (dt / 2.0), state.1 + k2.1 * (dt / 2.0));
            let k3 = f(y3);
            let y4 = (state.0 + k3.0 * dt, state.1 + k3.1 * dt);
            let k4 = f(y4);
            state = (
                state.0 + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (dt / 6.0),
                state.1 + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (dt / 6.0),
            );
        }
    }
    Ok(CState::new(state.0, state.1, t_end))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::PiecewiseC;
    use crate::sturm::transfer::propagate;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bruteforce_single_atom_window_norm() {
        // a unit atom centered in the window: the optimal hat of height 1/2
        // gives exactly 1/2... the optimal admissible function is the hat of
        // slope 1 peaking at the atom, value min(d_left, d_right)
        let mu = LocalMeasure::from_atoms(vec![(0.25, c(1.0, 0.0))], (-2.0, 2.0)).unwrap();
        let v = measure_norm_bruteforce(&mu, 0.0, 64).unwrap();
        assert!((v - 0.75).abs() < 1e-9, "v = {v}");
    }

    #[test]
    fn bruteforce_respects_sandwich_on_small_measures() {
        let mut rng = StdRng::seed_from_u64(401);
        for trial in 0..60 {
            let n_atoms = rng.random_range(0..4usize);
            let complexify = trial % 2 == 0;
            let mut pos: Vec<f64> = (0..n_atoms).map(|_| rng.random_range(-1.2..1.2)).collect();
            pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pos.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let atoms: Vec<(f64, Complex64)> = pos
                .into_iter()
                .map(|p| {
                    let im = if complexify { rng.random_range(-1.0..1.0) } else { 0.0 };
                    (p, c(rng.random_range(-1.0..1.0), im))
                })
                .collect();
            let mut bps: Vec<f64> = (0..3).map(|_| rng.random_range(-1.4..1.4)).collect();
            bps.push(-1.5);
            bps.push(1.5);
            bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
            bps.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let vals: Vec<Complex64> = (0..bps.len() - 1)
                .map(|_| {
                    let im = if complexify { rng.random_range(-0.8..0.8) } else { 0.0 };
                    c(rng.random_range(-0.8..0.8), im)
                })
                .collect();
            let density = PiecewiseC::new(bps, vals).unwrap();
            let mu = LocalMeasure::new(atoms, density, (-1.5, 1.5)).unwrap();
            let (j, _) = mu.wasser_norm(0.0).unwrap();
            let brute = measure_norm_bruteforce(&mu, 0.0, 256).unwrap();
            assert!(
                brute >= j / 2.0 - 1e-6 && brute <= j + 1e-6,
                "trial {trial}: brute {brute} outside [{}, {}]",
                j / 2.0,
                j
            );
        }
    }

    #[test]
    fn rk4_matches_closed_form_exponential() {
        let d = PiecewiseC::constant(-2.0, 2.0, c(1.0, 0.0)).unwrap();
        let mu = LocalMeasure::from_density(d, (-2.0, 2.0)).unwrap();
        let coeff = SLCoeff::unit_a(mu).unwrap();
        let init = CState::new(c(1.0, 0.0), c(1.0, 0.0), 0.0);
        let rk = rk4_state(&coeff, c(0.0, 0.0), &init, 1.0, 1e-3).unwrap();
        assert!((rk.u - c(1f64.exp(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn rk4_cross_validates_exact_propagator() {
        let mut rng = StdRng::seed_from_u64(409);
        for _ in 0..5 {
            let coeff = crate::sturm::transfer::tests::random_coeff(&mut rng, 0.0, 3.0, 3, 0);
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let init = CState::new(c(0.7, -0.1), c(0.2, 0.4), 0.0);
            let exact = propagate(&coeff, z, &init, &[3.0]).unwrap()[0];
            let rk = rk4_state(&coeff, z, &init, 3.0, 1e-4).unwrap();
            let err = ((exact.u - rk.u).norm_sqr() + (exact.au_prime - rk.au_prime).norm_sqr())
                .sqrt();
            assert!(err <= 1e-6, "deviation {err}");
        }
    }
}

//! Exact propagators for the measure Sturm-Liouville equation.
//!
//! On a cell where `a = A` and the shifted density is `w = rho - z`, the state
//! `(u, au')` satisfies a constant linear system whose exponential is
//!
//! ```text
//! [[cosh(m dt),            dt sinhc(m dt) / A],
//!  [w dt sinhc(m dt),      cosh(m dt)        ]],   m = sqrt(w / A),
//! ```
//!
//! with the principal square root and `sinhc(x) = sinh(x)/x` continued through
//! zero by its power series. The determinant is identically one. Atoms insert
//! the unimodular jump `[[1, 0], [gamma, 1]]`; an interval `(s, t]` of
//! propagation picks up exactly the atoms in `(s, t]`, matching the
//! right-limit state convention.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::mat2c::Mat2C;

use super::{CState, SLCoeff};

/// `sinh(x)/x` with a series fallback near zero.
pub(crate) fn sinhc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        Complex64::new(1.0, 0.0) + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// Exact cell propagator over a step `dt >= 0`.
pub(crate) fn cell_propagator(a_val: Complex64, w: Complex64, dt: f64) -> Mat2C {
    let m = (w / a_val).sqrt();
    let arg = m * dt;
    let ch = arg.cosh();
    let sc = sinhc(arg) * dt;
    Mat2C::new(ch, sc / a_val, w * sc, ch)
}

pub(crate) fn atom_jump(gamma: Complex64) -> Mat2C {
    Mat2C::new(
        Complex64::new(1.0, 0.0),
        Complex64::default(),
        gamma,
        Complex64::new(1.0, 0.0),
    )
}

/// Event times needed to propagate across `(s, t]` for `s < t`: interior
/// breakpoints of `a` and the density, plus atoms in `(s, t]`. Returns the
/// sorted times paired with the atom weight applied on arrival.
fn events(coeff: &SLCoeff, z_shifted_atoms: &[(f64, Complex64)], s: f64, t: f64) -> Vec<(f64, Option<Complex64>)> {
    let mut times: Vec<f64> = coeff.a().interior_breakpoints(s, t).collect();
    times.extend(coeff.mu().density().interior_breakpoints(s, t));
    times.extend(
        z_shifted_atoms
            .iter()
            .map(|(p, _)| *p)
            .filter(|p| *p > s && *p < t),
    );
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    times.push(t);
    times
        .into_iter()
        .map(|time| {
            let w = z_shifted_atoms
                .iter()
                .find(|(p, _)| *p == time)
                .map(|(_, w)| *w);
            (time, w)
        })
        .collect()
}

fn forward_transfer(coeff: &SLCoeff, z: Complex64, s: f64, t: f64) -> Result<Mat2C> {
    let atoms = coeff.mu().atoms().to_vec();
    let mut m = Mat2C::identity();
    let mut cur = s;
    for (time, atom) in events(coeff, &atoms, s, t) {
        if time > cur {
            let mid = 0.5 * (cur + time);
            let a_val = coeff.a().eval(mid);
            let w = coeff.mu().density().eval(mid) - z;
            m = cell_propagator(a_val, w, time - cur) * m;
            cur = time;
        }
        if let Some(gamma) = atom {
            m = atom_jump(gamma) * m;
        }
    }
    Ok(m)
}

/// Transfer matrix mapping the state at `s` to the state at `t` (adjugate of
/// the forward matrix when `t < s`).
pub fn transfer(coeff: &SLCoeff, z: Complex64, t: f64, s: f64) -> Result<Mat2C> {
    coeff.check_window(s.min(t), s.max(t))?;
    if t == s {
        return Ok(Mat2C::identity());
    }
    if t > s {
        forward_transfer(coeff, z, s, t)
    } else {
        Ok(forward_transfer(coeff, z, t, s)?.adjugate())
    }
}

/// Propagate an initial state to each (sorted) target time by stepping event
/// by event, so each returned state is produced by state-vector recursion
/// rather than by a single accumulated matrix.
pub fn propagate(
    coeff: &SLCoeff,
    z: Complex64,
    init: &CState,
    targets: &[f64],
) -> Result<Vec<CState>> {
    if targets.windows(2).any(|w| w[0] > w[1]) {
        return Err(CoreError::Invalid("targets must be sorted ascending".into()));
    }
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let lo = targets[0].min(init.t);
    let hi = targets[targets.len() - 1].max(init.t);
    coeff.check_window(lo, hi)?;

    let atoms = coeff.mu().atoms().to_vec();
    let mut out = vec![*init; targets.len()];

    // forward sweep
    let mut v = (init.u, init.au_prime);
    let mut cur = init.t;
    for (i, &target) in targets.iter().enumerate() {
        if target < init.t {
            continue;
        }
        if target > cur {
            for (time, atom) in events(coeff, &atoms, cur, target) {
                if time > cur {
                    let mid = 0.5 * (cur + time);
                    let a_val = coeff.a().eval(mid);
                    let w = coeff.mu().density().eval(mid) - z;
                    v = cell_propagator(a_val, w, time - cur).apply(v);
                    cur = time;
                }
                if let Some(gamma) = atom {
                    v = atom_jump(gamma).apply(v);
                }
            }
        }
        out[i] = CState::new(v.0, v.1, target);
    }

    // backward sweep: the events partition (target, cur]; undo the atom at
    // each event's time, then the cell below it, using adjugate inverses
    let mut v = (init.u, init.au_prime);
    let mut cur = init.t;
    for (i, &target) in targets.iter().enumerate().rev() {
        if target >= init.t {
            continue;
        }
        if target < cur {
            let evs = events(coeff, &atoms, target, cur);
            for k in (0..evs.len()).rev() {
                let (time, atom) = evs[k];
                if let Some(gamma) = atom {
                    v = atom_jump(gamma).adjugate().apply(v);
                }
                let lower = if k > 0 { evs[k - 1].0 } else { target };
                if time > lower {
                    let mid = 0.5 * (lower + time);
                    let a_val = coeff.a().eval(mid);
                    let w = coeff.mu().density().eval(mid) - z;
                    v = cell_propagator(a_val, w, time - lower).adjugate().apply(v);
                }
            }
            cur = target;
        }
        out[i] = CState::new(v.0, v.1, target);
    }
    Ok(out)
}

/// Log-scaled state norms at the requested checkpoint times (renormalizing
/// whenever the running state leaves `[1e-100, 1e100]` so growth over long
/// windows cannot overflow). Returns `ln ||state(t)||` per checkpoint.
pub(crate) fn checkpoint_log_norms(
    coeff: &SLCoeff,
    z: Complex64,
    init: &CState,
    checkpoints: &[f64],
) -> Result<Vec<f64>> {
    let atoms = coeff.mu().atoms().to_vec();
    let mut out = vec![0.0f64; checkpoints.len()];
    for forward in [true, false] {
        let mut targets: Vec<(usize, f64)> = checkpoints
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, t)| if forward { *t >= init.t } else { *t < init.t })
            .collect();
        targets.sort_by(|x, y| {
            if forward {
                x.1.partial_cmp(&y.1).unwrap()
            } else {
                y.1.partial_cmp(&x.1).unwrap()
            }
        });
        let mut v = (init.u, init.au_prime);
        let mut log_scale = 0.0f64;
        let mut cur = init.t;
        let renorm = |v: &mut (Complex64, Complex64), log_scale: &mut f64| {
            let n = (v.0.norm_sqr() + v.1.norm_sqr()).sqrt();
            if !(1e-100..=1e100).contains(&n) && n > 0.0 {
                *log_scale += n.ln();
                v.0 /= n;
                v.1 /= n;
            }
        };
        for (slot, target) in targets {
            let (lo, hi) = (target.min(cur), target.max(cur));
            if hi > lo {
                let evs = events(coeff, &atoms, lo, hi);
                if forward {
                    let mut pos = lo;
                    for (time, atom) in evs {
                        if time > pos {
                            let mid = 0.5 * (pos + time);
                            let m = cell_propagator(
                                coeff.a().eval(mid),
                                coeff.mu().density().eval(mid) - z,
                                time - pos,
                            );
                            v = m.apply(v);
                            pos = time;
                        }
                        if let Some(gamma) = atom {
                            v = atom_jump(gamma).apply(v);
                        }
                        renorm(&mut v, &mut log_scale);
                    }
                } else {
                    for k in (0..evs.len()).rev() {
                        let (time, atom) = evs[k];
                        if let Some(gamma) = atom {
                            v = atom_jump(gamma).adjugate().apply(v);
                        }
                        let lower = if k > 0 { evs[k - 1].0 } else { lo };
                        if time > lower {
                            let mid = 0.5 * (lower + time);
                            let m = cell_propagator(
                                coeff.a().eval(mid),
                                coeff.mu().density().eval(mid) - z,
                                time - lower,
                            );
                            v = m.adjugate().apply(v);
                        }
                        renorm(&mut v, &mut log_scale);
                    }
                }
            }
            cur = target;
            out[slot] = log_scale + (v.0.norm_sqr() + v.1.norm_sqr()).sqrt().ln();
        }
    }
    Ok(out)
}

/// Rigorous upper bound for `sup |u|` over `[lo, hi]`: per cell, the
/// propagated entries satisfy
/// `|u(t0 + dt)| <= |u0| cosh(|m| dt) + |au'0| dt sinhc(|m| dt) / |A|`,
/// which is monotone in `dt`; atoms do not change `u`.
pub fn sup_u_bound(coeff: &SLCoeff, z: Complex64, init: &CState, lo: f64, hi: f64) -> Result<f64> {
    coeff.check_window(lo.min(init.t), hi.max(init.t))?;
    let targets: Vec<f64> = {
        let mut ts: Vec<f64> = coeff
            .a()
            .interior_breakpoints(lo, hi)
            .chain(coeff.mu().density().interior_breakpoints(lo, hi))
            .chain(
                coeff
                    .mu()
                    .atoms()
                    .iter()
                    .map(|(p, _)| *p)
                    .filter(|p| *p > lo && *p < hi),
            )
            .collect();
        ts.push(lo);
        ts.push(hi);
        ts.push(init.t.clamp(lo, hi));
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        ts
    };
    let states = propagate(coeff, z, init, &targets)?;
    let mut best = 0.0f64;
    for (k, st) in states.iter().enumerate() {
        best = best.max(st.u.norm());
        if k + 1 < states.len() {
            let dt = states[k + 1].t - st.t;
            let mid = 0.5 * (st.t + states[k + 1].t);
            let a_val = coeff.a().eval(mid);
            let m_abs = ((coeff.mu().density().eval(mid) - z) / a_val).sqrt().norm();
            let arg = m_abs * dt;
            let grow = st.u.norm() * arg.cosh()
                + st.au_prime.norm() * dt * (sinhc(arg.into())).norm() / a_val.norm();
            best = best.max(grow);
        }
    }
    Ok(best)
}

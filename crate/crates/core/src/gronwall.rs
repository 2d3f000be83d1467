//! Discrete and measure-driven Gronwall bounds.
//!
//! The discrete lemma turns `x_{n+1} <= alpha_n x_n + beta_n` (with
//! `alpha >= 1`, `beta >= 0`, `x_0 = 0`) into the product-sum bound
//! `x_n <= prod alpha * sum beta`. The continuous lemma bounds any `u` with
//! `u(t) <= alpha(t) + int_{[0,t)} u dmu` by
//! `alpha(t) + int_{[0,t)} alpha(s) exp(mu((s,t))) dmu(s)`; for the atom plus
//! piecewise-constant-density measure model the right-hand side evaluates in
//! closed form, so the bound dominates without quadrature error. Interval
//! endpoint semantics are exactly `[0, t)` outside and `(s, t)` inside the
//! exponent.

use crate::error::{CoreError, Result};
use crate::piecewise::PiecewiseR;
use crate::sturm::measure::LocalMeasure;

/// Validated hypothesis data for the discrete inequality.
#[derive(Debug, Clone)]
pub struct DiscreteGronwallInput {
    alphas: Vec<f64>,
    betas: Vec<f64>,
    xs: Vec<f64>,
}

impl DiscreteGronwallInput {
    /// Checks `alpha_k >= 1`, `beta_k >= 0`, `x_0 = 0` and the recurrence
    /// inequality itself (with 1e-9 relative slack for inputs produced by
    /// floating-point propagation).
    pub fn new(alphas: Vec<f64>, betas: Vec<f64>, xs: Vec<f64>) -> Result<Self> {
        if alphas.len() != betas.len() || xs.len() != alphas.len() + 1 {
            return Err(CoreError::Invalid(format!(
                "need n alphas, n betas and n+1 xs, got {}, {}, {}",
                alphas.len(),
                betas.len(),
                xs.len()
            )));
        }
        if xs[0] != 0.0 {
            return Err(CoreError::Domain("x_0 must be 0".into()));
        }
        if let Some(a) = alphas.iter().find(|a| !(**a >= 1.0)) {
            return Err(CoreError::Domain(format!("alpha = {a} < 1")));
        }
        if let Some(b) = betas.iter().find(|b| !(**b >= 0.0)) {
            return Err(CoreError::Domain(format!("beta = {b} < 0")));
        }
        if let Some(x) = xs.iter().find(|x| !(**x >= 0.0)) {
            return Err(CoreError::Domain(format!("x = {x} < 0")));
        }
        for k in 0..alphas.len() {
            let rhs = alphas[k] * xs[k] + betas[k];
            if xs[k + 1] > rhs + 1e-9 * rhs.abs() {
                return Err(CoreError::Domain(format!(
                    "recurrence violated at step {k}: {} > {rhs}",
                    xs[k + 1]
                )));
            }
        }
        Ok(Self { alphas, betas, xs })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn x(&self, n: usize) -> f64 {
        self.xs[n]
    }
}

/// `prod_{k<n} alpha_k * sum_{k<n} beta_k`; dominates `x_n` for every
/// validated input. `n = 0` returns 0 (empty product times empty sum).
pub fn discrete_bound(input: &DiscreteGronwallInput, n: usize) -> Result<f64> {
    if n > input.len() {
        return Err(CoreError::Invalid(format!(
            "index {n} exceeds the {} provided steps",
            input.len()
        )));
    }
    let prod: f64 = input.alphas[..n].iter().product();
    let sum: f64 = input.betas[..n].iter().sum();
    Ok(prod * sum)
}

/// Closed-form evaluation of
/// `alpha(t) + int_{[0,t)} alpha(s) exp(mu((s,t))) dmu(s)` for a nonnegative
/// measure in the atom + piecewise-constant-density model.
pub fn continuous_bound(alpha: &PiecewiseR, mu: &LocalMeasure, t: f64) -> Result<f64> {
    if !mu.is_nonnegative() {
        return Err(CoreError::NegativeMeasure(
            "continuous Gronwall bound needs a nonnegative measure".into(),
        ));
    }
    if !(t >= 0.0) {
        return Err(CoreError::Domain(format!("t = {t} must be nonnegative")));
    }
    let alpha_at = |s: f64| -> Result<f64> {
        let v = alpha.eval(s);
        if v < 0.0 {
            return Err(CoreError::Domain(format!("alpha({s}) = {v} < 0")));
        }
        Ok(v)
    };
    let mut total = alpha_at(t)?;

    // mu((s, t)) for s < t, split into a density part (linear in s on each
    // cell) and the atoms strictly inside.
    let open_mass = |s: f64| -> f64 { mu.tv_open(s, t) };

    // Atom contributions over [0, t): the atom at s = 0 is included, one at
    // s = t is not.
    for (p, w) in mu.atoms() {
        if *p >= 0.0 && *p < t {
            total += alpha_at(*p)? * open_mass(*p).exp() * w.norm();
        }
    }

    // Density contributions: on a cell [u, v) with constant density rho and
    // constant alpha, mu((s,t)) = m(u) - rho (s - u), so the integral is
    // alpha * exp(m(u)) * (1 - exp(-rho (v - u))).
    let mut cuts: Vec<f64> = vec![0.0, t];
    cuts.extend(mu.density().interior_breakpoints(0.0, t));
    cuts.extend(mu.atoms().iter().map(|(p, _)| *p).filter(|p| *p > 0.0 && *p < t));
    cuts.extend(alpha.interior_breakpoints(0.0, t));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let mid = 0.5 * (u + v);
        let rho = mu.density().eval(mid).norm();
        if rho == 0.0 {
            continue;
        }
        let a = alpha_at(mid)?;
        let m_u = open_mass(u);
        total += a * m_u.exp() * (1.0 - (-rho * (v - u)).exp());
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::PiecewiseC;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn constant_alpha(v: f64, hi: f64) -> PiecewiseR {
        PiecewiseR::constant(0.0, hi, v).unwrap()
    }

    #[test]
    fn discrete_ones() {
        let input = DiscreteGronwallInput::new(
            vec![1.0; 5],
            vec![1.0; 5],
            vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        )
        .unwrap();
        assert_eq!(discrete_bound(&input, 5).unwrap(), 5.0);
    }

    #[test]
    fn discrete_doubling() {
        // equality case x_{n+1} = 2 x_n + 1 gives x_4 = 15 <= 16 * 4
        let xs = vec![0.0, 1.0, 3.0, 7.0, 15.0];
        let input = DiscreteGronwallInput::new(vec![2.0; 4], vec![1.0; 4], xs).unwrap();
        assert_eq!(discrete_bound(&input, 4).unwrap(), 64.0);
        assert!(input.x(4) <= 64.0);
    }

    #[test]
    fn discrete_empty_case() {
        let input = DiscreteGronwallInput::new(vec![], vec![], vec![0.0]).unwrap();
        assert_eq!(discrete_bound(&input, 0).unwrap(), 0.0);
    }

    #[test]
    fn discrete_rejects_bad_hypotheses() {
        assert!(DiscreteGronwallInput::new(vec![0.5], vec![0.0], vec![0.0, 0.0]).is_err());
        assert!(DiscreteGronwallInput::new(vec![1.0], vec![-0.1], vec![0.0, 0.0]).is_err());
        assert!(DiscreteGronwallInput::new(vec![1.0], vec![0.0], vec![0.1, 0.0]).is_err());
        // recurrence violated: x_1 = 2 > 1*0 + 1
        assert!(DiscreteGronwallInput::new(vec![1.0], vec![1.0], vec![0.0, 2.0]).is_err());
    }

    #[test]
    fn discrete_random_admissible_dominated() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(1..20usize);
            let alphas: Vec<f64> = (0..n).map(|_| 1.0 + rng.random_range(0.0..1.5)).collect();
            let betas: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
            let mut xs = vec![0.0];
            for k in 0..n {
                let slack: f64 = rng.random_range(0.0..1.0);
                xs.push(slack * (alphas[k] * xs[k] + betas[k]));
            }
            let input = DiscreteGronwallInput::new(alphas, betas, xs).unwrap();
            let bound = discrete_bound(&input, n).unwrap();
            assert!(input.x(n) <= bound + 1e-12);
        }
    }

    #[test]
    fn continuous_zero_measure() {
        let mu = LocalMeasure::zero((0.0, 5.0)).unwrap();
        let alpha = constant_alpha(3.0, 5.0);
        assert_eq!(continuous_bound(&alpha, &mu, 2.0).unwrap(), 3.0);
    }

    #[test]
    fn continuous_lebesgue_exponential() {
        // alpha = A, mu = lambda on [0, T]: bound(t) = A e^t exactly
        let d = PiecewiseC::constant(0.0, 6.0, Complex64::from(1.0)).unwrap();
        let mu = LocalMeasure::from_density(d, (0.0, 6.0)).unwrap();
        let alpha = constant_alpha(2.5, 6.0);
        for t in [0.0, 0.5, 1.0, 3.0] {
            let b = continuous_bound(&alpha, &mu, t).unwrap();
            assert!((b - 2.5 * t.exp()).abs() < 1e-12 * t.exp(), "t={t}: {b}");
        }
    }

    #[test]
    fn continuous_single_atom() {
        // one atom of weight w strictly before t: exponent mu((s0,t)) = 0
        let mu = LocalMeasure::from_atoms(vec![(1.0, Complex64::from(0.75))], (0.0, 4.0)).unwrap();
        let alpha = constant_alpha(2.0, 4.0);
        let b = continuous_bound(&alpha, &mu, 3.0).unwrap();
        assert!((b - 2.0 * (1.0 + 0.75)).abs() < 1e-14);
    }

    #[test]
    fn continuous_atom_at_endpoints() {
        // atom at s = 0 is inside [0, t); atom at s = t is excluded; and an
        // atom at t never enters the exponent mu((s,t)).
        let mu = LocalMeasure::from_atoms(
            vec![(0.0, Complex64::from(0.5)), (2.0, Complex64::from(9.0))],
            (0.0, 4.0),
        )
        .unwrap();
        let alpha = constant_alpha(1.0, 4.0);
        let b = continuous_bound(&alpha, &mu, 2.0).unwrap();
        assert!((b - (1.0 + 0.5)).abs() < 1e-14, "b = {b}");
    }

    #[test]
    fn continuous_rejects_negative() {
        let mu =
            LocalMeasure::from_atoms(vec![(1.0, Complex64::from(-1.0))], (0.0, 2.0)).unwrap();
        let alpha = constant_alpha(1.0, 2.0);
        assert!(matches!(
            continuous_bound(&alpha, &mu, 1.5),
            Err(CoreError::NegativeMeasure(_))
        ));
    }

    /// Exact solution of the equality case
    /// `u(t) = alpha(t) + int_{[0,t)} u dmu` for constant alpha, evolved
    /// breakpoint by breakpoint; used as the independent oracle.
    pub(crate) fn equality_solution(
        alpha: f64,
        mu: &LocalMeasure,
        t_end: f64,
        probes: &[f64],
    ) -> Vec<(f64, f64)> {
        // U(t) = int_{[0,t)} u dmu, u(t) = alpha + U(t)
        let mut cuts: Vec<f64> = vec![0.0, t_end];
        cuts.extend(mu.density().interior_breakpoints(0.0, t_end));
        cuts.extend(
            mu.atoms()
                .iter()
                .map(|(p, _)| *p)
                .filter(|p| *p > 0.0 && *p < t_end),
        );
        cuts.extend(probes.iter().copied().filter(|p| *p > 0.0 && *p < t_end));
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut out = Vec::new();
        let mut u_acc = 0.0f64; // U(cur), exclusive of any atom at cur
        let mut cur = 0.0f64;
        let atom_at = |p: f64| -> f64 {
            mu.atoms()
                .iter()
                .find(|(q, _)| *q == p)
                .map(|(_, w)| w.norm())
                .unwrap_or(0.0)
        };
        out.push((0.0, alpha));
        // atom at 0 enters U(t) for t > 0
        u_acc += (alpha + u_acc) * atom_at(0.0);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let rho = mu.density().eval(0.5 * (a + b)).norm();
            // U' = rho (alpha + U) on (a, b)
            let grow = (rho * (b - a)).exp();
            u_acc = (u_acc + alpha) * grow - alpha;
            cur = b;
            out.push((cur, alpha + u_acc));
            if cur < t_end {
                u_acc += (alpha + u_acc) * atom_at(cur);
            }
        }
        let _ = cur;
        out
    }

    #[test]
    fn continuous_dominates_equality_solution() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..100 {
            let t_end = rng.random_range(1.0..4.0);
            let mut atoms = Vec::new();
            let mut pos = 0.0;
            if rng.random_bool(0.5) {
                atoms.push((0.0, Complex64::from(rng.random_range(0.0..0.8))));
            }
            for _ in 0..rng.random_range(0..3) {
                pos += rng.random_range(0.3..1.2);
                if pos < t_end {
                    atoms.push((pos, Complex64::from(rng.random_range(0.0..0.8))));
                }
            }
            let bp1 = rng.random_range(0.2..t_end);
            let d = PiecewiseC::new(
                vec![0.0, bp1, t_end],
                vec![
                    Complex64::from(rng.random_range(0.0..1.0)),
                    Complex64::from(rng.random_range(0.0..1.0)),
                ],
            )
            .unwrap();
            let mu = LocalMeasure::new(atoms, d, (0.0, t_end)).unwrap();
            let alpha = rng.random_range(0.1..2.0);
            let alpha_fn = constant_alpha(alpha, t_end);
            for (t, u) in equality_solution(alpha, &mu, t_end, &[]) {
                let bound = continuous_bound(&alpha_fn, &mu, t).unwrap();
                assert!(
                    u <= bound * (1.0 + 1e-12) + 1e-12,
                    "u({t}) = {u} > bound {bound}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn discrete_bound_monotone_in_n(
            alphas in proptest::collection::vec(1.0f64..2.0, 1..10),
            betas in proptest::collection::vec(0.0f64..2.0, 10),
        ) {
            let n = alphas.len();
            let betas = betas[..n].to_vec();
            let mut xs = vec![0.0];
            for k in 0..n {
                xs.push(alphas[k] * xs[k] + betas[k]);
            }
            let input = DiscreteGronwallInput::new(alphas, betas, xs).unwrap();
            let mut prev = 0.0;
            for k in 0..=n {
                let b = discrete_bound(&input, k).unwrap();
                prop_assert!(b + 1e-12 >= prev);
                prop_assert!(input.x(k) <= b + 1e-9 * b.max(1.0));
                prev = b;
            }
        }
    }
}

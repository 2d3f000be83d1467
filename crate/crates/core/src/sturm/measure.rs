//! Local measures: atoms plus a piecewise-constant density.
//!
//! This model is closed under translation, restriction, subtraction and
//! periodic tiling, and every quantity the estimates need comes out in closed
//! form: the primitive `phi(t)` is piecewise linear with jumps, the uniform
//! local norm is a finite sliding-window maximum, and the Wasserstein-type
//! window norm reduces to an `L1` median problem for `phi`.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::piecewise::PiecewiseC;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMeasure {
    atoms: Vec<(f64, Complex64)>,
    density: PiecewiseC,
    support_window: (f64, f64),
}

/// One linear piece of `phi` on `[t0, t1)`: value `v0 + slope (t - t0)`.
#[derive(Debug, Clone, Copy)]
pub struct PhiSegment {
    pub t0: f64,
    pub t1: f64,
    pub v0: Complex64,
    pub slope: Complex64,
}

impl PhiSegment {
    pub fn len(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn v1(&self) -> Complex64 {
        self.v0 + self.slope * self.len()
    }
}

impl LocalMeasure {
    pub fn new(
        atoms: Vec<(f64, Complex64)>,
        density: PiecewiseC,
        support_window: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = support_window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CoreError::InvalidInterval(format!(
                "support window [{lo}, {hi}]"
            )));
        }
        for w in atoms.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(CoreError::Invalid(
                    "atom positions must be strictly increasing".into(),
                ));
            }
        }
        for (p, w) in &atoms {
            if !p.is_finite() || !w.re.is_finite() || !w.im.is_finite() {
                return Err(CoreError::Invalid("non-finite atom".into()));
            }
            if *p < lo || *p > hi {
                return Err(CoreError::Invalid(format!(
                    "atom at {p} outside support window [{lo}, {hi}]"
                )));
            }
        }
        if let Some((dlo, dhi)) = density.span() {
            if dlo < lo - 1e-12 || dhi > hi + 1e-12 {
                return Err(CoreError::Invalid(
                    "density span exceeds support window".into(),
                ));
            }
        }
        Ok(Self { atoms, density, support_window })
    }

    pub fn zero(support_window: (f64, f64)) -> Result<Self> {
        Self::new(Vec::new(), PiecewiseC::empty(), support_window)
    }

    pub fn from_atoms(atoms: Vec<(f64, Complex64)>, window: (f64, f64)) -> Result<Self> {
        Self::new(atoms, PiecewiseC::empty(), window)
    }

    pub fn from_density(density: PiecewiseC, window: (f64, f64)) -> Result<Self> {
        Self::new(Vec::new(), density, window)
    }

    pub fn atoms(&self) -> &[(f64, Complex64)] {
        &self.atoms
    }

    pub fn density(&self) -> &PiecewiseC {
        &self.density
    }

    pub fn support_window(&self) -> (f64, f64) {
        self.support_window
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.values().iter().all(|v| *v == Complex64::default())
    }

    /// All measures here are complex; `true` means every atom weight and
    /// density value is real, which unlocks the exact median path below.
    pub fn is_real(&self) -> bool {
        self.atoms.iter().all(|(_, w)| w.im == 0.0)
            && self.density.values().iter().all(|v| v.im == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.is_real()
            && self.atoms.iter().all(|(_, w)| w.re >= 0.0)
            && self.density.values().iter().all(|v| v.re >= 0.0)
    }

    /// Signed mass of the half-open interval `(x, y]`.
    pub fn mass_halfopen(&self, x: f64, y: f64) -> Complex64 {
        if y <= x {
            return Complex64::default();
        }
        let mut m = self.density.integral(x, y);
        for (p, w) in &self.atoms {
            if *p > x && *p <= y {
                m += w;
            }
        }
        m
    }

    /// Total variation of the half-open interval `(x, y]`.
    pub fn tv_halfopen(&self, x: f64, y: f64) -> f64 {
        if y <= x {
            return 0.0;
        }
        let mut m = self.density.abs_integral(x, y);
        for (p, w) in &self.atoms {
            if *p > x && *p <= y {
                m += w.norm();
            }
        }
        m
    }

    /// Total variation of the open interval `(x, y)`.
    pub fn tv_open(&self, x: f64, y: f64) -> f64 {
        if y <= x {
            return 0.0;
        }
        let mut m = self.density.abs_integral(x, y);
        for (p, w) in &self.atoms {
            if *p > x && *p < y {
                m += w.norm();
            }
        }
        m
    }

    /// The primitive `phi(t)`: mass of `(0, t]` for `t >= 0`, minus the mass
    /// of `(t, 0]` for `t < 0`. Right-continuous, `phi(0) = 0`.
    pub fn phi(&self, t: f64) -> Result<Complex64> {
        let (lo, hi) = self.support_window;
        if t < lo || t > hi {
            return Err(CoreError::TimeOutOfWindow { t, lo, hi });
        }
        Ok(if t >= 0.0 {
            self.mass_halfopen(0.0, t)
        } else {
            -self.mass_halfopen(t, 0.0)
        })
    }

    /// `sup_x |mu|((x, x+1])`, evaluated exactly: between the critical window
    /// positions (atom positions and density breakpoints, each also shifted by
    /// -1) the sliding total variation is linear, so the supremum is attained
    /// at a critical position or as a left limit there.
    pub fn unif_norm(&self) -> f64 {
        let mut events: Vec<f64> = Vec::new();
        for (p, _) in &self.atoms {
            events.push(*p - 1.0);
            events.push(*p);
        }
        for b in self.density.breakpoints() {
            events.push(*b - 1.0);
            events.push(*b);
        }
        if events.is_empty() {
            return 0.0;
        }
        events.sort_by(|x, y| x.partial_cmp(y).unwrap());
        events.dedup();
        let mut best = 0.0f64;
        for x in events {
            best = best.max(self.tv_halfopen(x, x + 1.0));
            // left limit: atoms in [x, x+1) instead of (x, x+1]
            let mut leftlim = self.density.abs_integral(x, x + 1.0);
            for (p, w) in &self.atoms {
                if *p >= x && *p < x + 1.0 {
                    leftlim += w.norm();
                }
            }
            best = best.max(leftlim);
        }
        best
    }

    /// Piecewise-linear representation of `phi` on `[lo, hi]`, anchored at the
    /// true `phi(lo)` so the returned values agree with [`Self::phi`].
    pub fn phi_segments(&self, lo: f64, hi: f64) -> Result<Vec<PhiSegment>> {
        let mut events: Vec<f64> = self
            .atoms
            .iter()
            .map(|(p, _)| *p)
            .filter(|p| *p > lo && *p < hi)
            .collect();
        events.extend(self.density.interior_breakpoints(lo, hi));
        events.sort_by(|x, y| x.partial_cmp(y).unwrap());
        events.dedup();
        events.push(hi);

        let mut segments = Vec::with_capacity(events.len());
        let mut cur = lo;
        let mut v = self.phi(lo)?;
        for e in events {
            if e > cur {
                let slope = self.density.eval(0.5 * (cur + e));
                segments.push(PhiSegment { t0: cur, t1: e, v0: v, slope });
                v += slope * (e - cur);
            }
            if let Ok(i) = self
                .atoms
                .binary_search_by(|(p, _)| p.partial_cmp(&e).unwrap())
            {
                if e < hi {
                    v += self.atoms[i].1;
                }
            }
            cur = e;
        }
        Ok(segments)
    }

    /// `J = min_c int_{x-1}^{x+1} |phi - c|` together with the minimizing
    /// constant. Real measures use the exact weighted median of the segment
    /// values; complex ones start from coordinatewise medians and refine each
    /// coordinate by golden-section inside the bounding box of `phi`.
    pub fn wasser_norm(&self, x: f64) -> Result<(f64, Complex64)> {
        let (lo, hi) = self.support_window;
        if x - 1.0 < lo - 1e-12 || x + 1.0 > hi + 1e-12 {
            return Err(CoreError::TimeOutOfWindow { t: x, lo: lo + 1.0, hi: hi - 1.0 });
        }
        let segments = self.phi_segments(x - 1.0, x + 1.0)?;
        if segments.is_empty() {
            return Ok((0.0, Complex64::default()));
        }
        if self.is_real() && self.phi(x - 1.0)?.im == 0.0 {
            let c = weighted_median(&segments, |z| z.re);
            let c = Complex64::from(c);
            return Ok((abs_integral(&segments, c), c));
        }
        let cr = weighted_median(&segments, |z| z.re);
        let ci = weighted_median(&segments, |z| z.im);
        let (re_lo, re_hi) = value_range(&segments, |z| z.re);
        let (im_lo, im_hi) = value_range(&segments, |z| z.im);
        let mut c = Complex64::new(cr, ci);
        for _ in 0..4 {
            let r = golden_min(re_lo, re_hi, |t| {
                abs_integral(&segments, Complex64::new(t, c.im))
            });
            c.re = r;
            let i = golden_min(im_lo, im_hi, |t| {
                abs_integral(&segments, Complex64::new(c.re, t))
            });
            c.im = i;
        }
        Ok((abs_integral(&segments, c), c))
    }

    /// Upper bound for the test-function norm of the measure over `[lo, hi]`
    /// (support of the test function inside `[lo, hi]`, diameter at most 2,
    /// derivative at most 1): the window norm is dominated by
    /// `sup_x J(x)` over `x` in `[lo+1, hi-1]`, which is maximized over the
    /// critical positions plus a uniform grid and padded by the Lipschitz
    /// modulus of `x -> J(x)`.
    pub fn interval_norm_upper(&self, lo: f64, hi: f64) -> Result<f64> {
        if hi - lo < 2.0 - 1e-12 {
            return Err(CoreError::InvalidInterval(format!(
                "interval [{lo}, {hi}] shorter than a unit test-function window"
            )));
        }
        let (xlo, xhi) = (lo + 1.0, hi - 1.0);
        let mut xs: Vec<f64> = vec![xlo, xhi];
        for (p, _) in &self.atoms {
            for cand in [*p - 1.0, *p, *p + 1.0] {
                if cand >= xlo && cand <= xhi {
                    xs.push(cand);
                }
            }
        }
        for b in self.density.breakpoints() {
            for cand in [*b - 1.0, *b, *b + 1.0] {
                if cand >= xlo && cand <= xhi {
                    xs.push(cand);
                }
            }
        }
        let h = 1.0 / 64.0;
        let mut x = xlo + h;
        while x < xhi {
            xs.push(x);
            x += h;
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let mut best = 0.0f64;
        for &x in &xs {
            best = best.max(self.wasser_norm(x)?.0);
        }
        let max_gap = xs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max);
        let segs = self.phi_segments(lo, hi)?;
        let sup_phi = segs
            .iter()
            .flat_map(|s| [s.v0.norm(), s.v1().norm()])
            .fold(0.0f64, f64::max);
        Ok(best + 2.5 * sup_phi * (max_gap / 2.0))
    }

    /// Difference measure on the intersection of the two windows.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        let lo = self.support_window.0.max(other.support_window.0);
        let hi = self.support_window.1.min(other.support_window.1);
        if lo >= hi {
            return Err(CoreError::InvalidInterval(
                "measure windows do not overlap".into(),
            ));
        }
        let mut atoms: Vec<(f64, Complex64)> = Vec::new();
        let mut positions: Vec<f64> = self
            .atoms
            .iter()
            .chain(other.atoms.iter())
            .map(|(p, _)| *p)
            .filter(|p| *p >= lo && *p <= hi)
            .collect();
        positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
        positions.dedup();
        for p in positions {
            let w = self.atom_weight_at(p) - other.atom_weight_at(p);
            if w != Complex64::default() {
                atoms.push((p, w));
            }
        }
        let mut cuts: Vec<f64> = self.density.interior_breakpoints(lo, hi).collect();
        cuts.extend(other.density.interior_breakpoints(lo, hi));
        let (d1, d2) = (self.density.clone(), other.density.clone());
        let density = PiecewiseC::rebuild_on(lo, hi, cuts, move |t| d1.eval(t) - d2.eval(t))?;
        Self::new(atoms, density, (lo, hi))
    }

    fn atom_weight_at(&self, p: f64) -> Complex64 {
        match self
            .atoms
            .binary_search_by(|(q, _)| q.partial_cmp(&p).unwrap())
        {
            Ok(i) => self.atoms[i].1,
            Err(_) => Complex64::default(),
        }
    }

    /// Move all mass right by `dx` (so `translate(-p)` realizes the shifted
    /// measure `B -> mu(B + p)`).
    pub fn translate(&self, dx: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|(p, w)| (p + dx, *w)).collect(),
            density: self.density.translate(dx),
            support_window: (self.support_window.0 + dx, self.support_window.1 + dx),
        }
    }

    /// Restriction to the half-open block `(lo, hi]`, reported on the window
    /// `[lo, hi]`.
    pub fn restrict_block(&self, lo: f64, hi: f64) -> Result<Self> {
        let atoms: Vec<(f64, Complex64)> = self
            .atoms
            .iter()
            .filter(|(p, _)| *p > lo && *p <= hi)
            .cloned()
            .collect();
        let cuts: Vec<f64> = self.density.interior_breakpoints(lo, hi).collect();
        let d = self.density.clone();
        let density = PiecewiseC::rebuild_on(lo, hi, cuts, move |t| d.eval(t))?;
        Self::new(atoms, density, (lo, hi))
    }

    /// Add `w` to the density across the whole support window (used to fold a
    /// spectral parameter `z` into the measure as `mu - z lambda`).
    pub fn with_density_offset(&self, w: Complex64) -> Result<Self> {
        if w == Complex64::default() {
            return Ok(self.clone());
        }
        let (lo, hi) = self.support_window;
        let density = self.density.padded_offset(lo, hi, w)?;
        Self::new(self.atoms.clone(), density, self.support_window)
    }
}

fn abs_integral(segments: &[PhiSegment], c: Complex64) -> f64 {
    segments
        .iter()
        .map(|s| segment_abs_integral(s, c))
        .sum()
}

/// Exact `int_0^L |A + B tau| d tau` with `A = v0 - c`, `B = slope`.
fn segment_abs_integral(seg: &PhiSegment, c: Complex64) -> f64 {
    let a = seg.v0 - c;
    let b = seg.slope;
    let l = seg.len();
    if l <= 0.0 {
        return 0.0;
    }
    let p = b.norm_sqr();
    if p == 0.0 {
        return a.norm() * l;
    }
    let q = 2.0 * (a.re * b.re + a.im * b.im);
    let r = a.norm_sqr();
    let disc = (4.0 * p * r - q * q).max(0.0);
    if disc <= 1e-300 {
        // phi passes through c: |A + B tau| = |B| |tau - tau0|
        let tau0 = -q / (2.0 * p);
        let babs = p.sqrt();
        return babs
            * if tau0 <= 0.0 {
                l * l / 2.0 - tau0 * l
            } else if tau0 >= l {
                tau0 * l - l * l / 2.0
            } else {
                (tau0 * tau0 + (l - tau0) * (l - tau0)) / 2.0
            };
    }
    let sq = disc.sqrt();
    let anti = |tau: f64| -> f64 {
        let u = 2.0 * p * tau + q;
        let s = (p * tau * tau + q * tau + r).max(0.0).sqrt();
        u * s / (4.0 * p) + disc / (8.0 * p * p.sqrt()) * (u / sq).asinh()
    };
    anti(l) - anti(0.0)
}

/// Weighted median of the pushforward of Lebesgue measure on the window under
/// a real coordinate of `phi`. Constant segments contribute point masses,
/// sloped ones uniform distributions between their endpoint values.
pub(crate) fn weighted_median(segments: &[PhiSegment], coord: impl Fn(Complex64) -> f64) -> f64 {
    enum Item {
        Point { v: f64, mass: f64 },
        Uniform { lo: f64, hi: f64, mass: f64 },
    }
    let mut items = Vec::with_capacity(segments.len());
    let mut candidates = Vec::new();
    let mut total = 0.0;
    for s in segments {
        let l = s.len();
        if l <= 0.0 {
            continue;
        }
        total += l;
        let v0 = coord(s.v0);
        let v1 = coord(s.v1());
        if v0 == v1 {
            items.push(Item::Point { v: v0, mass: l });
            candidates.push(v0);
        } else {
            items.push(Item::Uniform { lo: v0.min(v1), hi: v0.max(v1), mass: l });
            candidates.push(v0);
            candidates.push(v1);
        }
    }
    if candidates.is_empty() {
        return 0.0;
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();
    let cdf = |c: f64| -> f64 {
        items
            .iter()
            .map(|it| match it {
                Item::Point { v, mass } => {
                    if *v <= c {
                        *mass
                    } else {
                        0.0
                    }
                }
                Item::Uniform { lo, hi, mass } => {
                    mass * ((c - lo) / (hi - lo)).clamp(0.0, 1.0)
                }
            })
            .sum()
    };
    let half = total / 2.0;
    let mut prev = candidates[0];
    for &cand in &candidates {
        let f = cdf(cand);
        if f >= half {
            if cand == prev {
                return cand;
            }
            // linear part on (prev, cand): solve for the crossing, excluding
            // any point mass sitting exactly at cand
            let jump: f64 = items
                .iter()
                .map(|it| match it {
                    Item::Point { v, mass } if *v == cand => *mass,
                    _ => 0.0,
                })
                .sum();
            let f_before = f - jump;
            let f_prev = cdf(prev);
            if f_before >= half && f_before > f_prev {
                let slope = (f_before - f_prev) / (cand - prev);
                return prev + (half - f_prev) / slope;
            }
            return cand;
        }
        prev = cand;
    }
    *candidates.last().unwrap()
}

fn value_range(segments: &[PhiSegment], coord: impl Fn(Complex64) -> f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in segments {
        for v in [coord(s.v0), coord(s.v1())] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    const PHI_INV: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - PHI_INV * (hi - lo);
    let mut x2 = lo + PHI_INV * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..70 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - PHI_INV * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + PHI_INV * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

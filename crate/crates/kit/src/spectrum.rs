//! Eigenvalues of finite Dirichlet truncations, used to cross-check the
//! eigenvalue-free disk certificates against something computable.
//!
//! The `N x N` truncation of the doubly infinite operator over indices
//! `0..N-1` is complex tridiagonal (not Hermitian in general). Eigenvalues
//! come from an explicit single-shift QR iteration on the Hessenberg matrix
//! with Wilkinson shifts and deflation; eigenvectors from inverse iteration
//! with a pivoted tridiagonal solve, which also yields a residual per
//! eigenvalue.

use gordon_core::jacobi::CoeffSeq;
use num_complex::Complex64;

use crate::KitError;

#[derive(Debug, Clone, Copy)]
pub struct Eig {
    pub value: Complex64,
    /// `||T v - lambda v||_2 / ||T||_inf` for the inverse-iteration vector.
    pub residual: f64,
    pub converged: bool,
    /// Squared-modulus mass of the eigenvector in the outer 10% of indices.
    pub edge_mass: f64,
}

/// Maximum truncation size accepted.
pub const MAX_TRUNCATION: usize = 512;

struct Dense {
    n: usize,
    data: Vec<Complex64>,
}

impl Dense {
    fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::default(); n * n] }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// The complex Givens pair `(c, s)` with `c` real, `c^2 + |s|^2 = 1`, such
/// that `[[c, s], [-conj(s), c]] (f, g)^T = (r, 0)^T`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let fn_ = f.norm();
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::default());
    }
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let rho = (fn_ * fn_ + gn * gn).sqrt();
    (fn_ / rho, (f / fn_) * g.conj() / rho)
}

/// Eigenvalues of the tridiagonal truncation: diagonal `b(0..n)`,
/// off-diagonals `a(1..n-1)` symmetric placement.
fn hessenberg_qr_eigenvalues(
    diag: &[Complex64],
    off: &[Complex64],
) -> (Vec<Complex64>, bool) {
    let n = diag.len();
    let mut h = Dense::zeros(n);
    for i in 0..n {
        *h.at_mut(i, i) = diag[i];
        if i + 1 < n {
            *h.at_mut(i, i + 1) = off[i];
            *h.at_mut(i + 1, i) = off[i];
        }
    }
    let mut eigen = Vec::with_capacity(n);
    let mut m = n;
    let mut iter = 0usize;
    let mut all_converged = true;
    let negligible = |h: &Dense, k: usize| -> bool {
        h.at(k, k - 1).norm() <= 1e-15 * (h.at(k - 1, k - 1).norm() + h.at(k, k).norm()) + 1e-300
    };
    while m > 0 {
        if m == 1 {
            eigen.push(h.at(0, 0));
            m = 0;
            continue;
        }
        if negligible(&h, m - 1) {
            eigen.push(h.at(m - 1, m - 1));
            m -= 1;
            iter = 0;
            continue;
        }
        if iter > 80 {
            // give up on this block: report the diagonal as-is
            for i in (0..m).rev() {
                eigen.push(h.at(i, i));
            }
            all_converged = false;
            m = 0;
            continue;
        }
        // active block [l, m)
        let mut l = m - 1;
        while l > 0 && !negligible(&h, l) {
            l -= 1;
        }
        if l > 0 {
            *h.at_mut(l, l - 1) = Complex64::default();
        }
        // Wilkinson shift: trailing 2x2 eigenvalue nearest h[m-1][m-1]
        let (p, q, r, s) = (
            h.at(m - 2, m - 2),
            h.at(m - 2, m - 1),
            h.at(m - 1, m - 2),
            h.at(m - 1, m - 1),
        );
        let tr = p + s;
        let disc = ((p - s) * (p - s) + q * r * 4.0).sqrt();
        let (e1, e2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
        let mut sigma = if (e1 - s).norm() <= (e2 - s).norm() { e1 } else { e2 };
        if iter > 0 && iter.is_multiple_of(12) {
            // exceptional shift to break rare cycling
            sigma += Complex64::new(h.at(m - 1, m - 2).norm(), 0.0);
        }
        // explicit shifted QR sweep on [l, m): H <- R Q + sigma I
        for i in l..m {
            *h.at_mut(i, i) -= sigma;
        }
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(m - l - 1);
        for i in l..m - 1 {
            let (c, sgiv) = givens(h.at(i, i), h.at(i + 1, i));
            rots.push((c, sgiv));
            for j in i..m {
                let x = h.at(i, j);
                let y = h.at(i + 1, j);
                *h.at_mut(i, j) = x * c + sgiv * y;
                *h.at_mut(i + 1, j) = -sgiv.conj() * x + y * c;
            }
        }
        for (i, (c, sgiv)) in rots.iter().enumerate() {
            let col = l + i;
            for row in l..(col + 2).min(m) {
                let x = h.at(row, col);
                let y = h.at(row, col + 1);
                *h.at_mut(row, col) = x * *c + y * sgiv.conj();
                *h.at_mut(row, col + 1) = -x * *sgiv + y * *c;
            }
        }
        for i in l..m {
            *h.at_mut(i, i) += sigma;
        }
        iter += 1;
    }
    (eigen, all_converged)
}

/// Pivoted solve of `(T - lambda) x = rhs` for tridiagonal `T`.
fn tridiag_shifted_solve(
    diag: &[Complex64],
    off: &[Complex64],
    lambda: Complex64,
    rhs: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    let mut dl: Vec<Complex64> = (0..n.saturating_sub(1)).map(|i| off[i]).collect();
    let mut d: Vec<Complex64> = diag.iter().map(|v| v - lambda).collect();
    let mut du: Vec<Complex64> = (0..n.saturating_sub(1)).map(|i| off[i]).collect();
    let mut du2: Vec<Complex64> = vec![Complex64::default(); n.saturating_sub(2)];
    let mut x = rhs.to_vec();
    let tiny = Complex64::new(1e-290, 0.0);
    for i in 0..n.saturating_sub(1) {
        if dl[i].norm() > d[i].norm() {
            // swap rows i and i+1
            std::mem::swap(&mut d[i], &mut dl[i]); // d[i] <-> subdiag entry
            std::mem::swap(&mut du[i], &mut d[i + 1]);
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = Complex64::default();
            }
            x.swap(i, i + 1);
        }
        let mut pivot = d[i];
        if pivot.norm() == 0.0 {
            pivot = tiny;
        }
        let factor = dl[i] / pivot;
        d[i + 1] -= factor * du[i];
        if i + 1 < n - 1 {
            du[i + 1] -= factor * du2.get(i).copied().unwrap_or_default();
        }
        let xi = x[i];
        x[i + 1] -= factor * xi;
        d[i] = pivot;
    }
    // back substitution
    for i in (0..n).rev() {
        let mut acc = x[i];
        if i + 1 < n {
            acc -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= du2[i] * x[i + 2];
        }
        let mut pivot = d[i];
        if pivot.norm() == 0.0 {
            pivot = tiny;
        }
        x[i] = acc / pivot;
    }
    x
}

/// Eigenvalues (with residuals and edge-mass statistics) of the `n x n`
/// Dirichlet truncation over indices `0..n-1`.
pub fn truncated_spectrum(coeffs: &CoeffSeq, n: usize) -> Result<Vec<Eig>, KitError> {
    if n == 0 || n > MAX_TRUNCATION {
        return Err(KitError::Semantic {
            field: "n".into(),
            msg: format!("truncation size must be in 1..={MAX_TRUNCATION}"),
        });
    }
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n as i64 {
        diag.push(coeffs.b(i)?);
        if i + 1 < n as i64 {
            off.push(coeffs.a(i + 1)?);
        }
    }
    if n == 1 {
        return Ok(vec![Eig { value: diag[0], residual: 0.0, converged: true, edge_mass: 1.0 }]);
    }
    let (mut values, _qr_ok) = hessenberg_qr_eigenvalues(&diag, &off);
    values.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });

    let norm_inf: f64 = (0..n)
        .map(|i| {
            diag[i].norm()
                + if i > 0 { off[i - 1].norm() } else { 0.0 }
                + if i < n - 1 { off[i].norm() } else { 0.0 }
        })
        .fold(0.0, f64::max);

    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let mut acc = diag[i] * x[i];
                if i > 0 {
                    acc += off[i - 1] * x[i - 1];
                }
                if i < n - 1 {
                    acc += off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    };

    let edge = (n as f64 * 0.1).ceil() as usize;
    let out = values
        .into_iter()
        .map(|lambda| {
            // inverse iteration from a deterministic seed
            let mut v: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(1.0, ((i * 37 + 11) % 97) as f64 / 97.0))
                .collect();
            let mut residual = f64::INFINITY;
            for _ in 0..4 {
                let w = tridiag_shifted_solve(&diag, &off, lambda, &v);
                let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if !norm.is_finite() || norm == 0.0 {
                    break;
                }
                v = w.into_iter().map(|c| c / norm).collect();
                let hv = apply(&v);
                residual = hv
                    .iter()
                    .zip(&v)
                    .map(|(hv_i, v_i)| (hv_i - lambda * v_i).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
                    / norm_inf.max(1e-300);
                if residual <= 1e-10 {
                    break;
                }
            }
            let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            let edge_mass = if total > 0.0 {
                let outer: f64 = v[..edge]
                    .iter()
                    .chain(v[n - edge..].iter())
                    .map(|c| c.norm_sqr())
                    .sum();
                (outer / total).min(1.0)
            } else {
                1.0
            };
            Eig { value: lambda, residual, converged: residual <= 1e-8, edge_mass }
        })
        .collect();
    Ok(out)
}

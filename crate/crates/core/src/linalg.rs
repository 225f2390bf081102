//! Eigendecomposition of the real-symmetric step Hamiltonians.
//!
//! Piecewise-constant fields make every time step an exact matrix exponential
//! exp(-i dt H) with H = H0 + u H1 real symmetric. The tridiagonal case gets a
//! dedicated implicit-shift QL solver working directly on the two bands; the
//! banded case is promoted to dense and handed to nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix stored as its two bands.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `offdiag[i]` couples rows i and i+1; length is `diag.len() - 1`.
    pub offdiag: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Self {
        assert_eq!(offdiag.len() + 1, diag.len());
        Self { diag, offdiag }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.offdiag[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.offdiag[i];
            }
            y[i] = acc;
        }
    }

    /// Full eigendecomposition by the implicit-shift QL sweep (EISPACK tql2).
    /// QL favors matrices graded upward, which is exactly the shape of
    /// H0 + u H1 here: smallest energies sit in the top-left corner.
    pub fn eigendecomposition(&self) -> Result<EigenDecomp> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = vec![0.0f64; n];
        e[..n - 1].copy_from_slice(&self.offdiag);
        let mut z = vec![0.0f64; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }

        for l in 0..n {
            let mut iter = 0usize;
            loop {
                let mut m = l;
                while m < n - 1 {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 50 {
                    return Err(Error::EigenFailure { iterations: iter });
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let mut s = 1.0f64;
                let mut c = 1.0f64;
                let mut p = 0.0f64;
                let mut underflow = false;
                for i in (l..m).rev() {
                    let mut f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for row in z.chunks_exact_mut(n) {
                        f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }

        sort_columns_ascending(&mut d, &mut z, n);
        Ok(EigenDecomp {
            eigenvalues: d,
            vectors: z,
            n,
        })
    }
}

/// Eigendecomposition of a real symmetric matrix: H = V diag(λ) Vᵀ.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Row-major n×n; column j holds the eigenvector for `eigenvalues[j]`.
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl EigenDecomp {
    /// In-place ψ ← V exp(-i λ dt) Vᵀ ψ. Negative `dt` gives the adjoint step.
    pub fn apply_exp(&self, dt: f64, psi: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(psi.len(), n);
        let mut a = vec![Complex64::ZERO; n];
        for (k, row) in self.vectors.chunks_exact(n).enumerate() {
            let pk = psi[k];
            for (aj, vkj) in a.iter_mut().zip(row) {
                *aj += pk * *vkj;
            }
        }
        for (aj, lam) in a.iter_mut().zip(&self.eigenvalues) {
            *aj *= Complex64::from_polar(1.0, -lam * dt);
        }
        for (pk, row) in psi.iter_mut().zip(self.vectors.chunks_exact(n)) {
            *pk = row.iter().zip(&a).map(|(vkj, aj)| aj * *vkj).sum();
        }
    }
}

fn sort_columns_ascending(d: &mut [f64], z: &mut [f64], n: usize) {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let sorted_d: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    d.copy_from_slice(&sorted_d);
    let old = z.to_vec();
    for row in 0..n {
        for (new_col, &old_col) in order.iter().enumerate() {
            z[row * n + new_col] = old[row * n + old_col];
        }
    }
}

/// Dense symmetric eigendecomposition, used for banded couplings.
pub fn dense_sym_eigendecomposition(h: &DMatrix<f64>) -> EigenDecomp {
    let n = h.nrows();
    let se = h.clone().symmetric_eigen();
    let mut d: Vec<f64> = se.eigenvalues.iter().copied().collect();
    let mut z = vec![0.0f64; n * n];
    for row in 0..n {
        for col in 0..n {
            z[row * n + col] = se.eigenvectors[(row, col)];
        }
    }
    sort_columns_ascending(&mut d, &mut z, n);
    EigenDecomp {
        eigenvalues: d,
        vectors: z,
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(dec: &EigenDecomp) -> DMatrix<f64> {
        let n = dec.n;
        let v = DMatrix::from_fn(n, n, |r, c| dec.vectors[r * n + c]);
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            dec.eigenvalues.clone(),
        ));
        &v * lam * v.transpose()
    }

    fn random_tridiag(n: usize, rng: &mut ChaCha8Rng, graded: bool) -> SymTridiag {
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                if graded {
                    ((i + 1) * (i + 1)) as f64
                } else {
                    rng.random_range(-2.0..2.0)
                }
            })
            .collect();
        let offdiag: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.5..1.5)).collect();
        SymTridiag::new(diag, offdiag)
    }

    #[test]
    fn ql_reconstructs_the_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, graded) in &[(2, false), (5, false), (30, true), (50, true), (64, false)] {
            let t = random_tridiag(n, &mut rng, graded);
            let dec = t.eigendecomposition().unwrap();
            let h = reconstruct(&dec);
            for r in 0..n {
                for c in 0..n {
                    let expect = if r == c {
                        t.diag[r]
                    } else if r.abs_diff(c) == 1 {
                        t.offdiag[r.min(c)]
                    } else {
                        0.0
                    };
                    assert_relative_eq!(h[(r, c)], expect, epsilon = 1e-9 * (1.0 + expect.abs()));
                }
            }
        }
    }

    #[test]
    fn ql_matches_nalgebra_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[3usize, 10, 40] {
            let t = random_tridiag(n, &mut rng, n == 40);
            let dec = t.eigendecomposition().unwrap();
            let mut dense = DMatrix::zeros(n, n);
            for i in 0..n {
                dense[(i, i)] = t.diag[i];
                if i + 1 < n {
                    dense[(i, i + 1)] = t.offdiag[i];
                    dense[(i + 1, i)] = t.offdiag[i];
                }
            }
            let mut reference: Vec<f64> =
                dense.symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (mine, theirs) in dec.eigenvalues.iter().zip(&reference) {
                assert_relative_eq!(mine, theirs, epsilon = 1e-9 * (1.0 + theirs.abs()));
            }
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_tridiag(50, &mut rng, true);
        let dec = t.eigendecomposition().unwrap();
        let n = dec.n;
        let v = DMatrix::from_fn(n, n, |r, c| dec.vectors[r * n + c]);
        let gram = v.transpose() * &v;
        for r in 0..n {
            for c in 0..n {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((gram[(r, c)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exp_step_is_unitary_and_correct_for_diagonal() {
        // diagonal hamiltonian: exp step must be a pure phase per component
        let t = SymTridiag::new(vec![1.0, 4.0, 9.0], vec![0.0, 0.0]);
        let dec = t.eigendecomposition().unwrap();
        let mut psi = vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::ZERO,
        ];
        let dt = 0.37;
        dec.apply_exp(dt, &mut psi);
        let expect0 = Complex64::new(0.6, 0.0) * Complex64::from_polar(1.0, -1.0 * dt);
        let expect1 = Complex64::new(0.0, 0.8) * Complex64::from_polar(1.0, -4.0 * dt);
        assert!((psi[0] - expect0).norm() < 1e-14);
        assert!((psi[1] - expect1).norm() < 1e-14);
        assert!(psi[2].norm() < 1e-14);
    }

    #[test]
    fn forward_then_adjoint_restores_the_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let t = random_tridiag(20, &mut rng, true);
        let dec = t.eigendecomposition().unwrap();
        let mut psi: Vec<Complex64> = (0..20)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|c| *c /= norm);
        let original = psi.clone();
        dec.apply_exp(0.05, &mut psi);
        let after: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>();
        assert!((after - 1.0).abs() < 1e-13);
        dec.apply_exp(-0.05, &mut psi);
        for (a, b) in psi.iter().zip(&original) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn dense_path_agrees_with_ql_on_tridiagonal_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let t = random_tridiag(16, &mut rng, false);
        let n = t.dim();
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = t.diag[i];
            if i + 1 < n {
                dense[(i, i + 1)] = t.offdiag[i];
                dense[(i + 1, i)] = t.offdiag[i];
            }
        }
        let a = t.eigendecomposition().unwrap();
        let b = dense_sym_eigendecomposition(&dense);
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert_relative_eq!(x, y, epsilon = 1e-10 * (1.0 + y.abs()));
        }
    }
}

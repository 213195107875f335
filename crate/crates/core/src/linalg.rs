//! Small dense linear algebra: LU solve, matrix exponential, and a cyclic
//! Jacobi eigensolver for complex Hermitian matrices. Sized for the 10x10
//! moment generator and density matrices up to a few hundred rows; nothing
//! here is tuned for large systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
}

impl DMat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.n_cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n_cols)
            .map(|j| (0..self.n_rows).map(|i| self[(i, j)].abs()).sum())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for DMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n_cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Solve A x = b by LU decomposition with partial pivoting.
pub fn lu_solve(a: &DMat, b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(a.n_rows, a.n_cols);
    assert_eq!(a.n_rows, b.len());
    let n = a.n_rows;
    let mut lu = a.clone();
    let mut x: Vec<f64> = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        // Pivot selection.
        let (pivot_row, pivot_val) = (col..n)
            .map(|r| (r, lu[(r, col)].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if pivot_val == 0.0 || !pivot_val.is_finite() {
            return Err(Error::SingularSystem(col));
        }
        if pivot_row != col {
            for j in 0..n {
                lu.data.swap(col * n + j, pivot_row * n + j);
            }
            perm.swap(col, pivot_row);
            x.swap(col, pivot_row);
        }
        let inv = 1.0 / lu[(col, col)];
        for r in (col + 1)..n {
            let factor = lu[(r, col)] * inv;
            lu[(r, col)] = factor;
            for j in (col + 1)..n {
                let v = lu[(col, j)];
                lu[(r, j)] -= factor * v;
            }
            x[r] -= factor * x[col];
        }
    }
    // Back substitution.
    for col in (0..n).rev() {
        x[col] /= lu[(col, col)];
        for r in 0..col {
            x[r] -= lu[(r, col)] * x[col];
        }
    }
    Ok(x)
}

/// Matrix exponential by scaling and squaring with a diagonal Pade(13)
/// approximant. Adequate for the modest norms of the moment generator.
pub fn expm(a: &DMat) -> DMat {
    assert_eq!(a.n_rows, a.n_cols);
    let n = a.n_rows;
    const THETA_13: f64 = 4.0;
    let norm = a.norm_one();
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a_scaled = a.scale(0.5f64.powi(s));

    // Pade(13) coefficients.
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];

    let a2 = a_scaled.matmul(&a_scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let ident = DMat::identity(n);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let inner_u = a6.scale(B[13]).add(&a4.scale(B[11])).add(&a2.scale(B[9]));
    let u = a_scaled.matmul(
        &a6.matmul(&inner_u)
            .add(&a6.scale(B[7]))
            .add(&a4.scale(B[5]))
            .add(&a2.scale(B[3]))
            .add(&ident.scale(B[1])),
    );
    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let inner_v = a6.scale(B[12]).add(&a4.scale(B[10])).add(&a2.scale(B[8]));
    let v = a6
        .matmul(&inner_v)
        .add(&a6.scale(B[6]))
        .add(&a4.scale(B[4]))
        .add(&a2.scale(B[2]))
        .add(&ident.scale(B[0]));

    // (V - U) R = (V + U), solved column by column.
    let v_minus_u = v.add(&u.scale(-1.0));
    let v_plus_u = v.add(&u);
    let mut r = DMat::zeros(n, n);
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| v_plus_u[(i, j)]).collect();
        let sol = lu_solve(&v_minus_u, &col).expect("Pade denominator is nonsingular");
        for i in 0..n {
            r[(i, j)] = sol[i];
        }
    }
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

/// Eigenvalues of a complex Hermitian matrix (row-major, side `n`) by cyclic
/// Jacobi rotations. Returns eigenvalues sorted ascending.
pub fn hermitian_eigenvalues(matrix: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let idx = |i: usize, j: usize| i * n + j;

    let off_diag_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[idx(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };

    let diag_scale: f64 = (0..n).map(|i| a[idx(i, i)].re.abs()).fold(1e-300, f64::max);
    let tol = 1e-14 * diag_scale.max(off_diag_norm(&a));

    for _sweep in 0..60 {
        if off_diag_norm(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.norm() <= tol / (n as f64) {
                    continue;
                }
                let app = a[idx(p, p)].re;
                let aqq = a[idx(q, q)].re;
                // Unitary 2x2 rotation diagonalizing the (p,q) block:
                // columns (c, -s e^{-i phi}; s e^{i phi}, c) with
                // phi = arg(a_pq), standard real-Jacobi angle on |a_pq|.
                let phi = apq.arg();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let e_ip = Complex64::from_polar(1.0, phi);

                // A <- R^dagger A R acting on rows/cols p and q, with
                // R[p,p]=c, R[q,q]=c, R[p,q]=-s*conj(e_ip)... written out:
                // new col_p = c*col_p - s*conj(e_ip)*col_q
                // new col_q = s*e_ip*col_p + c*col_q
                for i in 0..n {
                    let aip = a[idx(i, p)];
                    let aiq = a[idx(i, q)];
                    a[idx(i, p)] = c * aip - s * e_ip.conj() * aiq;
                    a[idx(i, q)] = s * e_ip * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[idx(p, j)];
                    let aqj = a[idx(q, j)];
                    a[idx(p, j)] = c * apj - s * e_ip * aqj;
                    a[idx(q, j)] = s * e_ip.conj() * apj + c * aqj;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)].re).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lu_solves_known_system() {
        let mut a = DMat::zeros(3, 3);
        let entries = [[2.0, 1.0, -1.0], [-3.0, -1.0, 2.0], [-2.0, 1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = entries[i][j];
            }
        }
        let x = lu_solve(&a, &[8.0, -11.0, -3.0]).unwrap();
        for (got, want) in x.iter().zip(&[2.0, 3.0, -1.0]) {
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn lu_detects_singular() {
        let mut a = DMat::zeros(2, 2);
        a[(0, 0)] = 1.0;
        a[(0, 1)] = 2.0;
        a[(1, 0)] = 2.0;
        a[(1, 1)] = 4.0;
        assert!(matches!(
            lu_solve(&a, &[1.0, 2.0]),
            Err(Error::SingularSystem(_))
        ));
    }

    #[test]
    fn expm_of_diagonal_and_rotation() {
        let mut d = DMat::zeros(2, 2);
        d[(0, 0)] = 1.0;
        d[(1, 1)] = -2.0;
        let e = expm(&d);
        assert_relative_eq!(e[(0, 0)], 1f64.exp(), max_relative = 1e-13);
        assert_relative_eq!(e[(1, 1)], (-2f64).exp(), max_relative = 1e-13);
        assert!(e[(0, 1)].abs() < 1e-15);

        // Generator of a rotation: expm([[0,-w],[w,0]] t) is a rotation matrix.
        let w = 5.3;
        let mut r = DMat::zeros(2, 2);
        r[(0, 1)] = -w;
        r[(1, 0)] = w;
        let e = expm(&r);
        assert_relative_eq!(e[(0, 0)], w.cos(), max_relative = 1e-12);
        assert_relative_eq!(e[(1, 0)], w.sin(), max_relative = 1e-12);
    }

    #[test]
    fn expm_matches_series_for_random_matrix() {
        // Deterministic pseudo-random 5x5 with moderate norm; compare against
        // a long Taylor series on a halved argument, squared once.
        let n = 5;
        let mut state = 0x2545f4914f6cdd1du64;
        let mut rand = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = DMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = 2.0 * rand();
            }
        }
        let half = a.scale(0.5);
        let mut series = DMat::identity(n);
        let mut term = DMat::identity(n);
        for k in 1..40 {
            term = term.matmul(&half).scale(1.0 / k as f64);
            series = series.add(&term);
        }
        let expected = series.matmul(&series);
        let got = expm(&a);
        for i in 0..n {
            for j in 0..n {
                assert_relative_eq!(
                    got[(i, j)],
                    expected[(i, j)],
                    max_relative = 1e-9,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn jacobi_eigenvalues_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(2.0, 0.0),
        ];
        let e = hermitian_eigenvalues(&m, 2);
        assert_relative_eq!(e[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(e[1], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn jacobi_preserves_trace_rank3() {
        // Hermitian 3x3 with known characteristic polynomial checks:
        // trace and sum of pairwise products are invariant.
        let m = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.25),
            Complex64::new(0.0, -0.7),
            Complex64::new(0.5, -0.25),
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.0, 0.7),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.5, 0.0),
        ];
        let e = hermitian_eigenvalues(&m, 3);
        let trace: f64 = e.iter().sum();
        assert_relative_eq!(trace, -0.5, max_relative = 1e-10);
        // Frobenius norm^2 equals sum of squared eigenvalues for Hermitian.
        let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        let sq: f64 = e.iter().map(|x| x * x).sum();
        assert_relative_eq!(frob, sq, max_relative = 1e-10);
    }
}

//! Truncated Fock-space Lindblad oracle.
//!
//! Evolves the full two-mode density matrix of the linearized master
//! equation and extracts second moments, providing ground truth for the
//! covariance engine at small occupancy. The generator is assembled as a
//! sparse matrix acting on the row-major vectorized density matrix; mode
//! ordering is photon (x) phonon, index = n_photon * dim_b + m_phonon.

use num_complex::Complex64;

use crate::covariance::MomentState;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::params::ReducedParams;

mod sparse {
    use num_complex::Complex64;
    use rayon::prelude::*;

    /// Compressed sparse row complex matrix.
    #[derive(Debug, Clone)]
    pub struct CsMat {
        pub n_rows: usize,
        pub n_cols: usize,
        pub indptr: Vec<usize>,
        pub indices: Vec<usize>,
        pub values: Vec<Complex64>,
    }

    impl CsMat {
        pub fn from_triplets(
            n_rows: usize,
            n_cols: usize,
            mut triplets: Vec<(usize, usize, Complex64)>,
        ) -> Self {
            triplets.sort_unstable_by_key(|t| (t.0, t.1));
            let mut row_counts = vec![0usize; n_rows + 1];
            let mut indices = Vec::with_capacity(triplets.len());
            let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
            let mut last: Option<(usize, usize)> = None;
            for &(r, c, v) in triplets.iter() {
                debug_assert!(r < n_rows && c < n_cols);
                if last == Some((r, c)) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    row_counts[r + 1] += 1;
                    last = Some((r, c));
                }
            }
            let mut indptr = row_counts;
            for r in 0..n_rows {
                indptr[r + 1] += indptr[r];
            }
            // Drop exact zeros produced by cancellation.
            let mut mat = Self {
                n_rows,
                n_cols,
                indptr,
                indices,
                values,
            };
            mat.prune();
            mat
        }

        fn prune(&mut self) {
            let mut indptr = vec![0usize; self.n_rows + 1];
            let mut indices = Vec::with_capacity(self.indices.len());
            let mut values = Vec::with_capacity(self.values.len());
            for r in 0..self.n_rows {
                for k in self.indptr[r]..self.indptr[r + 1] {
                    if self.values[k].norm_sqr() > 0.0 {
                        indices.push(self.indices[k]);
                        values.push(self.values[k]);
                    }
                }
                indptr[r + 1] = indices.len();
            }
            self.indptr = indptr;
            self.indices = indices;
            self.values = values;
        }

        pub fn nnz(&self) -> usize {
            self.values.len()
        }

        pub fn transpose(&self) -> Self {
            let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(self.nnz());
            for r in 0..self.n_rows {
                for k in self.indptr[r]..self.indptr[r + 1] {
                    triplets.push((self.indices[k], r, self.values[k]));
                }
            }
            Self::from_triplets(self.n_cols, self.n_rows, triplets)
        }

        pub fn adjoint(&self) -> Self {
            let mut t = self.transpose();
            for v in t.values.iter_mut() {
                *v = v.conj();
            }
            t
        }

        pub fn scale(&self, s: Complex64) -> Self {
            let mut out = self.clone();
            for v in out.values.iter_mut() {
                *v *= s;
            }
            out
        }

        pub fn add(&self, other: &Self) -> Self {
            assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
            let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
            for m in [self, other] {
                for r in 0..m.n_rows {
                    for k in m.indptr[r]..m.indptr[r + 1] {
                        triplets.push((r, m.indices[k], m.values[k]));
                    }
                }
            }
            Self::from_triplets(self.n_rows, self.n_cols, triplets)
        }

        pub fn matmul(&self, other: &Self) -> Self {
            assert_eq!(self.n_cols, other.n_rows);
            let mut triplets = Vec::new();
            for r in 0..self.n_rows {
                for k in self.indptr[r]..self.indptr[r + 1] {
                    let mid = self.indices[k];
                    let a = self.values[k];
                    for k2 in other.indptr[mid]..other.indptr[mid + 1] {
                        triplets.push((r, other.indices[k2], a * other.values[k2]));
                    }
                }
            }
            Self::from_triplets(self.n_rows, other.n_cols, triplets)
        }

        /// Kronecker product: result[(i*pB + j), (k*qB + l)] = A[i,k] B[j,l].
        pub fn kron(&self, other: &Self) -> Self {
            let n_rows = self.n_rows * other.n_rows;
            let n_cols = self.n_cols * other.n_cols;
            let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
            for ra in 0..self.n_rows {
                for ka in self.indptr[ra]..self.indptr[ra + 1] {
                    let (ca, va) = (self.indices[ka], self.values[ka]);
                    for rb in 0..other.n_rows {
                        for kb in other.indptr[rb]..other.indptr[rb + 1] {
                            let (cb, vb) = (other.indices[kb], other.values[kb]);
                            triplets.push((
                                ra * other.n_rows + rb,
                                ca * other.n_cols + cb,
                                va * vb,
                            ));
                        }
                    }
                }
            }
            Self::from_triplets(n_rows, n_cols, triplets)
        }

        pub fn matvec(&self, x: &[Complex64], out: &mut [Complex64]) {
            assert_eq!(x.len(), self.n_cols);
            assert_eq!(out.len(), self.n_rows);
            const CHUNK: usize = 2048;
            out.par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(chunk_idx, chunk)| {
                    let base = chunk_idx * CHUNK;
                    for (off, slot) in chunk.iter_mut().enumerate() {
                        let r = base + off;
                        let mut acc = Complex64::ZERO;
                        for k in self.indptr[r]..self.indptr[r + 1] {
                            acc += self.values[k] * x[self.indices[k]];
                        }
                        *slot = acc;
                    }
                });
        }

        pub fn identity(n: usize) -> Self {
            let triplets: Vec<(usize, usize, Complex64)> =
                (0..n).map(|i| (i, i, Complex64::ONE)).collect();
            Self::from_triplets(n, n, triplets)
        }
    }
}

use sparse::CsMat;

/// Truncation of the two-mode Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    /// Photon levels retained (cutoff).
    pub dim_a: usize,
    /// Phonon levels retained (cutoff).
    pub dim_b: usize,
    /// Upper bound on dim_a * dim_b.
    pub budget: usize,
}

impl FockConfig {
    pub const DEFAULT_BUDGET: usize = 4096;

    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::with_budget(dim_a, dim_b, Self::DEFAULT_BUDGET)
    }

    pub fn with_budget(dim_a: usize, dim_b: usize, budget: usize) -> Result<Self> {
        if dim_a < 2 || dim_b < 2 {
            return Err(Error::InvalidInput(format!(
                "Fock cutoffs must be >= 2, got ({dim_a}, {dim_b})"
            )));
        }
        let dim = dim_a * dim_b;
        if dim > budget {
            return Err(Error::BudgetExceeded { dim, budget });
        }
        Ok(Self {
            dim_a,
            dim_b,
            budget,
        })
    }

    /// Hilbert-space dimension dim_a * dim_b.
    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    fn index(&self, n: usize, m: usize) -> usize {
        n * self.dim_b + m
    }
}

/// The mode operators on the truncated space, plus the six moment operators.
pub struct FockOperators {
    pub cfg: FockConfig,
    pub a: CsMat,
    pub b: CsMat,
    pub n_a: CsMat,
    pub n_b: CsMat,
    pub adag_b: CsMat,
    pub a_b: CsMat,
    pub a_sq: CsMat,
    pub b_sq: CsMat,
}

impl FockOperators {
    pub fn new(cfg: FockConfig) -> Self {
        let d = cfg.dim();
        let mut ta = Vec::new();
        let mut tb = Vec::new();
        for n in 0..cfg.dim_a {
            for m in 0..cfg.dim_b {
                if n >= 1 {
                    ta.push((
                        cfg.index(n - 1, m),
                        cfg.index(n, m),
                        Complex64::new((n as f64).sqrt(), 0.0),
                    ));
                }
                if m >= 1 {
                    tb.push((
                        cfg.index(n, m - 1),
                        cfg.index(n, m),
                        Complex64::new((m as f64).sqrt(), 0.0),
                    ));
                }
            }
        }
        let a = CsMat::from_triplets(d, d, ta);
        let b = CsMat::from_triplets(d, d, tb);
        let a_dag = a.adjoint();
        let b_dag = b.adjoint();
        let n_a = a_dag.matmul(&a);
        let n_b = b_dag.matmul(&b);
        let adag_b = a_dag.matmul(&b);
        let a_b = a.matmul(&b);
        let a_sq = a.matmul(&a);
        let b_sq = b.matmul(&b);
        Self {
            cfg,
            a,
            b,
            n_a,
            n_b,
            adag_b,
            a_b,
            a_sq,
            b_sq,
        }
    }

    /// tr(rho O) for a row-major dense rho.
    fn trace_against(&self, op: &CsMat, rho: &[Complex64]) -> Complex64 {
        let d = self.cfg.dim();
        let mut acc = Complex64::ZERO;
        for r in 0..op.n_rows {
            for k in op.indptr[r]..op.indptr[r + 1] {
                let c = op.indices[k];
                // tr(rho O) = sum_{c,r} rho[c,r] O[r,c]
                acc += rho[c * d + r] * op.values[k];
            }
        }
        acc
    }
}

/// Dense two-mode density matrix on the truncated Fock space (row-major,
/// photon (x) phonon ordering).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub cfg: FockConfig,
    pub entries: Vec<Complex64>,
    trace: f64,
}

impl DensityMatrix {
    /// Both modes in vacuum.
    pub fn vacuum(cfg: FockConfig) -> Self {
        Self::thermal(cfg, 0.0, 0.0)
    }

    /// Product of thermal states with mean occupancies (n_a_bar, n_b_bar),
    /// normalized over the truncated space.
    pub fn thermal(cfg: FockConfig, n_a_bar: f64, n_b_bar: f64) -> Self {
        let d = cfg.dim();
        let mut entries = vec![Complex64::ZERO; d * d];
        let weight = |n_bar: f64, k: usize| -> f64 {
            if n_bar <= 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            let q = n_bar / (n_bar + 1.0);
            q.powi(k as i32)
        };
        let mut total = 0.0;
        for n in 0..cfg.dim_a {
            for m in 0..cfg.dim_b {
                total += weight(n_a_bar, n) * weight(n_b_bar, m);
            }
        }
        for n in 0..cfg.dim_a {
            for m in 0..cfg.dim_b {
                let idx = cfg.index(n, m);
                entries[idx * d + idx] =
                    Complex64::new(weight(n_a_bar, n) * weight(n_b_bar, m) / total, 0.0);
            }
        }
        Self {
            cfg,
            entries,
            trace: 1.0,
        }
    }

    /// Product of truncated coherent states |alpha> (x) |beta>.
    pub fn coherent(cfg: FockConfig, alpha: Complex64, beta: Complex64) -> Self {
        let amp = |z: Complex64, dim: usize| -> Vec<Complex64> {
            let mut c = Vec::with_capacity(dim);
            let mut cur = Complex64::ONE;
            c.push(cur);
            for k in 1..dim {
                cur *= z / Complex64::new((k as f64).sqrt(), 0.0);
                c.push(cur);
            }
            let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            c.iter().map(|v| v / norm).collect()
        };
        let ca = amp(alpha, cfg.dim_a);
        let cb = amp(beta, cfg.dim_b);
        let d = cfg.dim();
        let mut psi = vec![Complex64::ZERO; d];
        for n in 0..cfg.dim_a {
            for m in 0..cfg.dim_b {
                psi[cfg.index(n, m)] = ca[n] * cb[m];
            }
        }
        let mut entries = vec![Complex64::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = psi[i] * psi[j].conj();
            }
        }
        Self {
            cfg,
            entries,
            trace: 1.0,
        }
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    fn compute_trace(&self) -> Complex64 {
        let d = self.cfg.dim();
        (0..d).map(|i| self.entries[i * d + i]).sum()
    }

    /// Largest |rho - rho^dagger| entry.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.cfg.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let delta = (self.entries[i * d + j] - self.entries[j * d + i].conj()).norm();
                worst = worst.max(delta);
            }
        }
        worst
    }

    /// Total population of the highest photon level and highest phonon level.
    pub fn top_level_leakage(&self) -> (f64, f64) {
        let d = self.cfg.dim();
        let mut leak_a = 0.0;
        let mut leak_b = 0.0;
        for m in 0..self.cfg.dim_b {
            let idx = self.cfg.index(self.cfg.dim_a - 1, m);
            leak_a += self.entries[idx * d + idx].re;
        }
        for n in 0..self.cfg.dim_a {
            let idx = self.cfg.index(n, self.cfg.dim_b - 1);
            leak_b += self.entries[idx * d + idx].re;
        }
        (leak_a, leak_b)
    }

    /// Smallest eigenvalue (full Hermitian eigensolve; O(dim^3), test usage).
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.entries, self.cfg.dim())[0]
    }

    /// Hermiticity, normalization, and truncation health in one call.
    pub fn health_check(&self) -> Result<()> {
        if self.hermiticity_error() > 1e-10 {
            return Err(Error::Physicality(format!(
                "density matrix non-Hermitian by {:e}",
                self.hermiticity_error()
            )));
        }
        let tr = self.compute_trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-10 {
            return Err(Error::Physicality(format!("trace {} far from 1", tr)));
        }
        let (leak_a, leak_b) = self.top_level_leakage();
        if leak_a > 1e-4 || leak_b > 1e-4 {
            return Err(Error::Truncation { leak_a, leak_b });
        }
        Ok(())
    }
}

/// Sparse Lindblad superoperator acting on the vectorized density matrix.
pub struct LindbladGenerator {
    pub cfg: FockConfig,
    matrix: CsMat,
}

impl LindbladGenerator {
    /// d(vec rho)/dt = L vec(rho).
    pub fn apply(&self, rho_vec: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::ZERO; rho_vec.len()];
        self.matrix.matvec(rho_vec, &mut out);
        out
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }
}

/// Assemble -i[H_L, .] plus the three dissipators (kappa on a, gamma(n_th+1)
/// on b, gamma n_th on b') as one sparse matrix on vec(rho).
pub fn build_generator(rp: &ReducedParams, cfg: FockConfig) -> Result<LindbladGenerator> {
    // Re-validate the budget in case cfg was built by hand.
    if cfg.dim() > cfg.budget {
        return Err(Error::BudgetExceeded {
            dim: cfg.dim(),
            budget: cfg.budget,
        });
    }
    let ops = FockOperators::new(cfg);
    let d = cfg.dim();
    let ident = CsMat::identity(d);
    let g = Complex64::new(rp.g_eff, 0.0);

    // H = -Delta' a'a + b'b + (G a' + G* a)(b + b').
    let a_dag = ops.a.adjoint();
    let b_dag = ops.b.adjoint();
    let field = a_dag.scale(g).add(&ops.a.scale(g.conj()));
    let position = ops.b.add(&b_dag);
    let h = ops
        .n_a
        .scale(Complex64::new(-rp.detuning, 0.0))
        .add(&ops.n_b)
        .add(&field.matmul(&position));

    let minus_i = -Complex64::i();
    let mut gen = h
        .kron(&ident)
        .scale(minus_i)
        .add(&ident.kron(&h.transpose()).scale(-minus_i));

    // Dissipator Gamma (c rho c' - {c'c, rho}/2) vectorizes to
    // Gamma (kron(c, conj(c)) - kron(c'c, I)/2 - kron(I, (c'c)^T)/2).
    let mut add_dissipator = |c: &CsMat, rate: f64| {
        if rate == 0.0 {
            return;
        }
        let c_dag = c.adjoint();
        let cdc = c_dag.matmul(c);
        let jump = c.kron(&c_dag.transpose());
        let anti = cdc
            .kron(&ident)
            .add(&ident.kron(&cdc.transpose()))
            .scale(Complex64::new(-0.5, 0.0));
        gen = gen.add(&jump.add(&anti).scale(Complex64::new(rate, 0.0)));
    };

    add_dissipator(&ops.a, rp.kappa);
    add_dissipator(&ops.b, rp.gamma * (rp.n_th + 1.0));
    let b_dag_op = ops.b.adjoint();
    add_dissipator(&b_dag_op, rp.gamma * rp.n_th);

    Ok(LindbladGenerator { cfg, matrix: gen })
}

/// Result of a fixed-step master-equation integration.
pub struct RhoEvolution {
    /// Snapshot times.
    pub times: Vec<f64>,
    /// Density-matrix snapshots (including t = 0 and t = t_final).
    pub snapshots: Vec<DensityMatrix>,
    /// Accumulated |trace - 1| removed by renormalization.
    pub trace_correction: f64,
}

impl RhoEvolution {
    /// Moment-state series extracted from the snapshots.
    pub fn moments(&self) -> Vec<MomentState> {
        self.snapshots.iter().map(moments_from_rho).collect()
    }
}

/// Fixed-step RK4 on the vectorized master equation, storing roughly
/// `n_snapshots` evenly spaced snapshots. `dt` must satisfy
/// dt <= 0.01/max(1, kappa); it is rounded down to land on t_final exactly.
pub fn evolve_rho(
    rho0: &DensityMatrix,
    generator: &LindbladGenerator,
    rp: &ReducedParams,
    t_final: f64,
    dt: f64,
    n_snapshots: usize,
) -> Result<RhoEvolution> {
    rho0.health_check()?;
    if !(t_final > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidInput("t_final and dt must be > 0".into()));
    }
    let dt_cap = 0.01 / rp.kappa.max(1.0);
    if dt > dt_cap * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "dt = {dt} exceeds the stability cap 0.01/max(1, kappa) = {dt_cap}"
        )));
    }
    if rho0.cfg != generator.cfg {
        return Err(Error::InvalidInput(
            "rho0 and generator use different cutoffs".into(),
        ));
    }

    let steps = (t_final / dt).ceil() as usize;
    let dt = t_final / steps as f64;
    let stride = (steps / n_snapshots.max(1)).max(1);

    let d2 = rho0.entries.len();
    let mut y = rho0.entries.clone();
    let mut times = vec![0.0];
    let mut snapshots = vec![rho0.clone()];
    let mut trace_correction = 0.0;

    let trace_of = |v: &[Complex64]| -> Complex64 {
        let d = generator.cfg.dim();
        (0..d).map(|i| v[i * d + i]).sum()
    };

    for step in 1..=steps {
        let k1 = generator.apply(&y);
        let mut tmp = vec![Complex64::ZERO; d2];
        for i in 0..d2 {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        let k2 = generator.apply(&tmp);
        for i in 0..d2 {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        let k3 = generator.apply(&tmp);
        for i in 0..d2 {
            tmp[i] = y[i] + dt * k3[i];
        }
        let k4 = generator.apply(&tmp);
        let trace_before = trace_of(&y).re;
        for i in 0..d2 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let trace_after = trace_of(&y).re;
        let drift = (trace_after - trace_before).abs();
        if drift > 1e-6 {
            return Err(Error::StepTooLarge { drift });
        }
        if (trace_after - 1.0).abs() > 1e-10 {
            let scale = Complex64::new(1.0 / trace_after, 0.0);
            for v in y.iter_mut() {
                *v *= scale;
            }
            trace_correction += (trace_after - 1.0).abs();
        }

        if step.is_multiple_of(stride) || step == steps {
            let snap = DensityMatrix {
                cfg: generator.cfg,
                entries: y.clone(),
                trace: 1.0,
            };
            snap.health_check()?;
            times.push(step as f64 * dt);
            snapshots.push(snap);
        }
    }

    Ok(RhoEvolution {
        times,
        snapshots,
        trace_correction,
    })
}

/// Second moments of a density matrix, by tracing against the six operator
/// matrices. Raw (not mean-subtracted) expectation values.
pub fn moments_from_rho(rho: &DensityMatrix) -> MomentState {
    let ops = FockOperators::new(rho.cfg);
    moments_with_ops(&ops, &rho.entries)
}

/// Moment extraction reusing a prebuilt operator set.
pub fn moments_with_ops(ops: &FockOperators, rho_vec: &[Complex64]) -> MomentState {
    MomentState {
        n_a: ops.trace_against(&ops.n_a, rho_vec).re,
        n_b: ops.trace_against(&ops.n_b, rho_vec).re,
        adag_b: ops.trace_against(&ops.adag_b, rho_vec),
        a_b: ops.trace_against(&ops.a_b, rho_vec),
        a_sq: ops.trace_against(&ops.a_sq, rho_vec),
        b_sq: ops.trace_against(&ops.b_sq, rho_vec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::moment_derivatives;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn small_cfg() -> FockConfig {
        FockConfig::new(6, 8).unwrap()
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            FockConfig::new(70, 70),
            Err(Error::BudgetExceeded {
                dim: 4900,
                budget: 4096
            })
        ));
        assert!(FockConfig::with_budget(70, 70, 5000).is_ok());
        assert!(matches!(FockConfig::new(1, 8), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn ladder_operators_have_correct_matrix_elements() {
        let cfg = small_cfg();
        let ops = FockOperators::new(cfg);
        // Number operators must be diagonal with the Fock indices.
        let d = cfg.dim();
        let mut rho_fock = vec![Complex64::ZERO; d * d];
        let idx = 3 * cfg.dim_b + 5; // |3 photons, 5 phonons>
        rho_fock[idx * d + idx] = Complex64::ONE;
        let m_fock = moments_with_ops(&ops, &rho_fock);
        assert_relative_eq!(m_fock.n_a, 3.0, max_relative = 1e-14);
        assert_relative_eq!(m_fock.n_b, 5.0, max_relative = 1e-14);
        let rho = DensityMatrix::thermal(cfg, 0.0, 1.0);
        let m = moments_from_rho(&rho);
        assert!(m.n_b > 0.9 && m.n_b < 1.0);
        assert_eq!(m.n_a, 0.0);
        // Vacuum has all-zero moments.
        let vac = DensityMatrix::vacuum(cfg);
        let mv = moments_from_rho(&vac);
        assert_eq!(mv.to_vector(), [0.0; 10]);
    }

    #[test]
    fn thermal_occupancy_tail_within_bound() {
        let cfg = FockConfig::new(4, 16).unwrap();
        let rho = DensityMatrix::thermal(cfg, 0.0, 1.0);
        // Top-level population bound (the geometric tail itself).
        let (_, leak_b) = rho.top_level_leakage();
        assert!(leak_b < 1e-4, "top-level population {leak_b}");
        // Renormalization over 16 levels shifts the occupancy by 2.44e-4.
        let m = moments_from_rho(&rho);
        assert_abs_diff_eq!(m.n_b, 1.0, epsilon = 5e-4);
        assert_abs_diff_eq!(m.n_b, 0.99975586, epsilon = 1e-6);
    }

    #[test]
    fn coherent_state_moments_are_gaussian() {
        let cfg = FockConfig::new(12, 12).unwrap();
        let alpha = Complex64::new(0.8, 0.3);
        let beta = Complex64::new(-0.4, 0.6);
        let rho = DensityMatrix::coherent(cfg, alpha, beta);
        rho.health_check().unwrap();
        let m = moments_from_rho(&rho);
        assert_relative_eq!(m.n_a, alpha.norm_sqr(), max_relative = 1e-8);
        assert_relative_eq!(m.n_b, beta.norm_sqr(), max_relative = 1e-8);
        assert_relative_eq!(m.a_sq.re, (alpha * alpha).re, max_relative = 1e-8);
        assert_relative_eq!(m.a_sq.im, (alpha * alpha).im, max_relative = 1e-8);
        assert_relative_eq!(m.a_b.re, (alpha * beta).re, max_relative = 1e-8);
        assert_relative_eq!(m.adag_b.re, (alpha.conj() * beta).re, max_relative = 1e-8);
        assert_relative_eq!(m.adag_b.im, (alpha.conj() * beta).im, max_relative = 1e-8);
    }

    #[test]
    fn generator_annihilates_free_vacuum() {
        let rp = ReducedParams::new(0.05, 1e-3, 0.0, -1.0, 0.0).unwrap();
        let cfg = small_cfg();
        let gen = build_generator(&rp, cfg).unwrap();
        let vac = DensityMatrix::vacuum(cfg);
        let tangent = gen.apply(&vac.entries);
        let worst = tangent.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-14, "vacuum not a fixed point: {worst}");
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let rp = ReducedParams::new(0.3, 1e-3, 0.08, -1.0, 0.7).unwrap();
        let cfg = small_cfg();
        let d = cfg.dim();
        let gen = build_generator(&rp, cfg).unwrap();
        // A made-up Hermitian trace-1 matrix with wide support.
        let mut rho = DensityMatrix::thermal(cfg, 0.4, 1.2);
        for i in 0..d {
            for j in (i + 1)..d {
                let v = Complex64::new(
                    0.001 / (1.0 + (i + j) as f64),
                    0.0005 / (1.0 + (2 * i + j) as f64),
                );
                rho.entries[i * d + j] += v;
                rho.entries[j * d + i] += v.conj();
            }
        }
        let tangent = gen.apply(&rho.entries);
        let trace: Complex64 = (0..d).map(|i| tangent[i * d + i]).sum();
        assert!(trace.norm() < 1e-12, "tangent trace {trace}");
        let mut herm_err = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                herm_err = herm_err.max((tangent[i * d + j] - tangent[j * d + i].conj()).norm());
            }
        }
        assert!(herm_err < 1e-12, "tangent breaks Hermiticity by {herm_err}");
    }

    #[test]
    fn oracle_generator_matches_moment_equations() {
        // The central identity: d<O>/dt from the Lindblad generator equals
        // the covariance right-hand sides, on correlated Gaussian states
        // produced by the oracle itself. n_th is kept small enough that the
        // 15x15 truncation tail sits far below the 1e-8 comparison floor.
        let rp = ReducedParams::new(0.05, 1e-3, 0.05, -1.0, 0.3).unwrap();
        let cfg = FockConfig::new(15, 15).unwrap();
        let gen = build_generator(&rp, cfg).unwrap();
        let ops = FockOperators::new(cfg);
        let rho0 = DensityMatrix::thermal(cfg, 0.0, rp.n_th);
        let run = evolve_rho(&rho0, &gen, &rp, 9.0, 0.01, 3).unwrap();
        assert!(run.snapshots.len() >= 3);
        for snap in run.snapshots.iter().skip(1) {
            let m = moments_with_ops(&ops, &snap.entries);
            let from_cov = moment_derivatives(&m, &rp).to_vector();
            let tangent = gen.apply(&snap.entries);
            let from_oracle = MomentState {
                n_a: ops.trace_against(&ops.n_a, &tangent).re,
                n_b: ops.trace_against(&ops.n_b, &tangent).re,
                adag_b: ops.trace_against(&ops.adag_b, &tangent),
                a_b: ops.trace_against(&ops.a_b, &tangent),
                a_sq: ops.trace_against(&ops.a_sq, &tangent),
                b_sq: ops.trace_against(&ops.b_sq, &tangent),
            }
            .to_vector();
            for i in 0..10 {
                assert_abs_diff_eq!(from_cov[i], from_oracle[i], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn free_thermal_state_is_stationary() {
        let rp = ReducedParams::new(0.05, 1e-2, 0.0, -1.0, 0.8).unwrap();
        let cfg = FockConfig::new(4, 14).unwrap();
        let gen = build_generator(&rp, cfg).unwrap();
        let rho0 = DensityMatrix::thermal(cfg, 0.0, rp.n_th);
        let run = evolve_rho(&rho0, &gen, &rp, 20.0, 0.01, 4).unwrap();
        let m0 = moments_from_rho(&run.snapshots[0]);
        for snap in &run.snapshots {
            let m = moments_from_rho(snap);
            assert_abs_diff_eq!(m.n_b, m0.n_b, epsilon = 1e-8);
            assert_abs_diff_eq!(m.n_a, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn evolution_stays_physical() {
        let rp = ReducedParams::new(0.05, 1e-3, 0.05, -1.0, 1.0).unwrap();
        let cfg = FockConfig::new(8, 14).unwrap();
        let gen = build_generator(&rp, cfg).unwrap();
        let rho0 = DensityMatrix::thermal(cfg, 0.0, rp.n_th);
        let run = evolve_rho(&rho0, &gen, &rp, 15.0, 0.01, 3).unwrap();
        for snap in &run.snapshots {
            assert!(snap.hermiticity_error() < 1e-10);
            assert!(snap.min_eigenvalue() > -1e-8);
        }
        assert!(run.trace_correction < 1e-6);
    }

    #[test]
    fn dissipation_pulse_empties_cavity() {
        // Swap some excitation into the cavity, then slam kappa up so the
        // pulse area reaches 10: photons must drop below 1% of pre-pulse.
        let rp = ReducedParams::new(0.05, 1e-3, 0.1, -1.0, 1.0).unwrap();
        let cfg = FockConfig::new(14, 18).unwrap();
        let gen_base = build_generator(&rp, cfg).unwrap();
        let rho0 = DensityMatrix::thermal(cfg, 0.0, rp.n_th);
        // Evolve to (roughly) the first Rabi minimum.
        let t_swap = crate::modulation::pulse_times(&rp, 1).unwrap()[0];
        let run = evolve_rho(&rho0, &gen_base, &rp, t_swap, 0.01, 1).unwrap();
        let swapped = run.snapshots.last().unwrap();
        let n_a_pre = moments_from_rho(swapped).n_a;
        assert!(n_a_pre > 0.1, "no excitation swapped into the cavity");
        // kappa_pulse = 20 for duration 0.5: area 10.
        let pulsed = rp.with_kappa(20.0);
        let gen_pulse = build_generator(&pulsed, cfg).unwrap();
        let run2 = evolve_rho(swapped, &gen_pulse, &pulsed, 0.5, 0.0005, 1).unwrap();
        let n_a_post = moments_from_rho(run2.snapshots.last().unwrap()).n_a;
        assert!(
            n_a_post < 0.01 * n_a_pre,
            "pulse left {n_a_post} of {n_a_pre} photons"
        );
    }

    #[test]
    fn step_cap_is_enforced() {
        let rp = ReducedParams::new(0.05, 1e-3, 0.0, -1.0, 0.5).unwrap();
        let cfg = small_cfg();
        let gen = build_generator(&rp, cfg).unwrap();
        let rho0 = DensityMatrix::vacuum(cfg);
        let r = evolve_rho(&rho0, &gen, &rp, 1.0, 0.5, 1);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }
}

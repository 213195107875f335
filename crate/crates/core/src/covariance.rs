//! Exact second-moment dynamics of the linearized system.
//!
//! The six moments `<a'a>`, `<b'b>`, `<a'b>`, `<ab>`, `<aa>`, `<bb>` close under the
//! linearized master equation, so this module evolves them directly: no
//! Fock-space cutoff, valid at any occupancy. Stored as 2 real + 4 complex
//! quantities, the system becomes a 10-component real linear ODE
//! x' = M x + c whose generator is assembled once per parameter set.
//!
//! Two independent backends integrate the same generator: an adaptive
//! Dormand-Prince 5(4) pair and an exact matrix-exponential propagator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm, lu_solve, DMat};
use crate::params::{stability_check, ReducedParams};

/// The six second-order moments of the displaced-frame fluctuation operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    /// Photon occupancy `<a1' a1>`.
    pub n_a: f64,
    /// Phonon occupancy `<b1' b1>`.
    pub n_b: f64,
    /// Cross moment `<a1' b1>`.
    pub adag_b: Complex64,
    /// Cross moment `<a1 b1>`.
    pub a_b: Complex64,
    /// Optical squeezing moment `<a1^2>`.
    pub a_sq: Complex64,
    /// Mechanical squeezing moment `<b1^2>`.
    pub b_sq: Complex64,
}

impl MomentState {
    /// Both modes in vacuum.
    pub fn vacuum() -> Self {
        Self::thermal(0.0)
    }

    /// Optical vacuum, mechanical mode thermal at `n_b` quanta; the standard
    /// initial condition for cooling runs.
    pub fn thermal(n_b: f64) -> Self {
        Self {
            n_a: 0.0,
            n_b,
            adag_b: Complex64::ZERO,
            a_b: Complex64::ZERO,
            a_sq: Complex64::ZERO,
            b_sq: Complex64::ZERO,
        }
    }

    pub(crate) fn to_vector(self) -> [f64; 10] {
        [
            self.n_a,
            self.n_b,
            self.adag_b.re,
            self.adag_b.im,
            self.a_b.re,
            self.a_b.im,
            self.a_sq.re,
            self.a_sq.im,
            self.b_sq.re,
            self.b_sq.im,
        ]
    }

    pub(crate) fn from_vector(v: &[f64; 10]) -> Self {
        Self {
            n_a: v[0],
            n_b: v[1],
            adag_b: Complex64::new(v[2], v[3]),
            a_b: Complex64::new(v[4], v[5]),
            a_sq: Complex64::new(v[6], v[7]),
            b_sq: Complex64::new(v[8], v[9]),
        }
    }

    /// 4x4 quadrature covariance matrix (vacuum normalized to the identity),
    /// ordering (x_a, p_a, x_b, p_b).
    pub fn covariance_matrix(&self) -> [[f64; 4]; 4] {
        let a = block_single(self.n_a, self.a_sq);
        let b = block_single(self.n_b, self.b_sq);
        let v = self.a_b;
        let u = self.adag_b;
        let c = [
            [2.0 * (v.re + u.re), 2.0 * (v.im + u.im)],
            [2.0 * (v.im - u.im), 2.0 * (u.re - v.re)],
        ];
        [
            [a[0][0], a[0][1], c[0][0], c[0][1]],
            [a[1][0], a[1][1], c[1][0], c[1][1]],
            [c[0][0], c[1][0], b[0][0], b[0][1]],
            [c[0][1], c[1][1], b[1][0], b[1][1]],
        ]
    }

    /// Symplectic eigenvalues (nu_minus, nu_plus) of the covariance matrix.
    /// Physical Gaussian states satisfy nu >= 1.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let s = self.covariance_matrix();
        let det_a = det2(s[0][0], s[0][1], s[1][0], s[1][1]);
        let det_b = det2(s[2][2], s[2][3], s[3][2], s[3][3]);
        let det_c = det2(s[0][2], s[0][3], s[1][2], s[1][3]);
        let delta = det_a + det_b + 2.0 * det_c;
        let det_s = det4(&s);
        let disc = (delta * delta - 4.0 * det_s).max(0.0).sqrt();
        let nu_plus_sq = 0.5 * (delta + disc);
        let nu_minus_sq = 0.5 * (delta - disc);
        (nu_minus_sq.max(0.0).sqrt(), nu_plus_sq.max(0.0).sqrt())
    }

    /// Occupancies non-negative (within integrator slack) and Heisenberg
    /// bound satisfied by the symplectic spectrum.
    pub fn check_physical(&self) -> Result<()> {
        const SLACK: f64 = 1e-9;
        if self.n_a < -SLACK || self.n_b < -SLACK {
            return Err(Error::Physicality(format!(
                "negative occupancy n_a = {}, n_b = {}",
                self.n_a, self.n_b
            )));
        }
        let (nu_min, _) = self.symplectic_eigenvalues();
        if nu_min < 1.0 - 1e-6 {
            return Err(Error::Physicality(format!(
                "symplectic eigenvalue {nu_min} below Heisenberg bound"
            )));
        }
        Ok(())
    }
}

fn block_single(n: f64, sq: Complex64) -> [[f64; 2]; 2] {
    [
        [2.0 * sq.re + 2.0 * n + 1.0, 2.0 * sq.im],
        [2.0 * sq.im, -2.0 * sq.re + 2.0 * n + 1.0],
    ]
}

fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a * d - b * c
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut det = 0.0;
    for j in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for (mi, row) in m.iter().enumerate().skip(1) {
            let mut mj = 0;
            for (cj, &v) in row.iter().enumerate() {
                if cj == j {
                    continue;
                }
                minor[mi - 1][mj] = v;
                mj += 1;
            }
        }
        let det3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
            - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
            + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
        det += if j % 2 == 0 { 1.0 } else { -1.0 } * m[0][j] * det3;
    }
    det
}

/// Right-hand sides of the six moment equations, with complex coupling G.
fn derivatives_complex(
    state: &MomentState,
    kappa: f64,
    gamma: f64,
    detuning: f64,
    n_th: f64,
    g: Complex64,
) -> MomentState {
    let i = Complex64::i();
    let u = state.adag_b;
    let v = state.a_b;
    let w = state.a_sq;
    let z = state.b_sq;
    let p = state.n_a;
    let q = state.n_b;
    let half_width = (kappa + gamma) / 2.0;

    let d_p = -(i * (g * u - (g * u).conj() + g * v.conj() - (g * v.conj()).conj())).re - kappa * p;
    let d_q = -(i * (-g * u + (g * u).conj() + g * v.conj() - (g * v.conj()).conj())).re
        - gamma * q
        + gamma * n_th;
    let d_u = (Complex64::new(-half_width, -(detuning + 1.0))) * u
        - i * (g.conj() * p - g.conj() * q + g * w.conj() - g.conj() * z);
    let d_v = (Complex64::new(-half_width, detuning - 1.0)) * v
        - i * (g * p + g * q + g + g.conj() * w + g * z);
    let d_w = (Complex64::new(-kappa, 2.0 * detuning)) * w - 2.0 * i * g * (v + u.conj());
    let d_z = (Complex64::new(-gamma, -2.0)) * z - 2.0 * i * (g.conj() * v + g * u);

    MomentState {
        n_a: d_p,
        n_b: d_q,
        adag_b: d_u,
        a_b: d_v,
        a_sq: d_w,
        b_sq: d_z,
    }
}

/// Time derivative of the moment state under the linearized master equation,
/// including the thermal drive gamma*n_th and the quantum-backaction source
/// term -iG in `d<a1 b1>/dt`.
pub fn moment_derivatives(state: &MomentState, rp: &ReducedParams) -> MomentState {
    derivatives_complex(
        state,
        rp.kappa,
        rp.gamma,
        rp.detuning,
        rp.n_th,
        Complex64::new(rp.g_eff, 0.0),
    )
}

/// The assembled linear system x' = M x + c over the 10 real components.
#[derive(Debug, Clone)]
pub struct MomentGenerator {
    pub(crate) matrix: DMat,
    pub(crate) drive: [f64; 10],
}

impl MomentGenerator {
    pub fn new(rp: &ReducedParams) -> Self {
        Self::with_complex_coupling(rp, Complex64::new(rp.g_eff, 0.0))
    }

    /// Assembly with an explicitly complex G. The physics is invariant under
    /// the phase of G (a rotation of a1 absorbs it); this entry point exists
    /// to verify that invariance.
    pub fn with_complex_coupling(rp: &ReducedParams, g: Complex64) -> Self {
        let rhs = |v: &[f64; 10]| -> [f64; 10] {
            derivatives_complex(
                &MomentState::from_vector(v),
                rp.kappa,
                rp.gamma,
                rp.detuning,
                rp.n_th,
                g,
            )
            .to_vector()
        };
        let drive = rhs(&[0.0; 10]);
        let mut matrix = DMat::zeros(10, 10);
        for j in 0..10 {
            let mut e = [0.0; 10];
            e[j] = 1.0;
            let col = rhs(&e);
            for i in 0..10 {
                matrix[(i, j)] = col[i] - drive[i];
            }
        }
        Self { matrix, drive }
    }

    pub(crate) fn apply(&self, x: &[f64; 10]) -> [f64; 10] {
        let mut out = self.drive;
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.matrix.data[i * 10..(i + 1) * 10];
            *slot += row.iter().zip(x).map(|(m, v)| m * v).sum::<f64>();
        }
        out
    }
}

/// A sampled moment-state history.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample times, starting at 0, in units of 1/omega_m.
    pub times: Vec<f64>,
    /// Moment state at each sample time.
    pub states: Vec<MomentState>,
    /// Parameter snapshot the trajectory was produced with.
    pub params: ReducedParams,
}

impl Trajectory {
    /// Phonon occupancy series.
    pub fn n_b(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.n_b).collect()
    }

    /// Photon occupancy series.
    pub fn n_a(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.n_a).collect()
    }

    /// Smallest symplectic eigenvalue over the whole trajectory.
    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.symplectic_eigenvalues().0)
            .fold(f64::INFINITY, f64::min)
    }

    /// First time n_b falls to or below `threshold`, linearly interpolated
    /// between samples. None if it never does.
    pub fn first_crossing(&self, threshold: f64) -> Option<f64> {
        if self.states.first()?.n_b <= threshold {
            return Some(self.times[0]);
        }
        for k in 1..self.states.len() {
            let (prev, cur) = (self.states[k - 1].n_b, self.states[k].n_b);
            if cur <= threshold {
                let frac = (prev - threshold) / (prev - cur);
                return Some(self.times[k - 1] + frac * (self.times[k] - self.times[k - 1]));
            }
        }
        None
    }

    /// First time after which n_b never exceeds `threshold` again within the
    /// sampled horizon; distinguishes settling below a level from a
    /// transient poke during a Rabi dip.
    pub fn settled_crossing(&self, threshold: f64) -> Option<f64> {
        let last_above = self.states.iter().rposition(|s| s.n_b > threshold);
        match last_above {
            None => Some(self.times[0]),
            Some(k) if k + 1 >= self.states.len() => None,
            Some(k) => {
                let (prev, cur) = (self.states[k].n_b, self.states[k + 1].n_b);
                let frac = (prev - threshold) / (prev - cur);
                Some(self.times[k] + frac * (self.times[k + 1] - self.times[k]))
            }
        }
    }

    /// Time and value of the lowest n_b sample in the window (t_lo, t_hi].
    pub fn min_in_window(&self, t_lo: f64, t_hi: f64) -> Option<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.states)
            .filter(|(t, _)| **t > t_lo && **t <= t_hi)
            .map(|(t, s)| (*t, s.n_b))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }
}

/// Integration controls for [`evolve_with`].
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Hard cap on the internal step size.
    pub dt_max: f64,
    /// Number of uniform sample intervals in the output grid.
    pub n_samples: usize,
    /// Proceed even when the stability condition fails (short-time studies).
    pub allow_unstable: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt_max: 0.05,
            n_samples: 2000,
            allow_unstable: false,
        }
    }
}

/// Integrate the moment equations from `initial` to `t_final` with the
/// adaptive RK5(4) backend; output on a uniform grid of 2000 intervals.
pub fn evolve(
    initial: &MomentState,
    rp: &ReducedParams,
    t_final: f64,
    dt_max: f64,
) -> Result<Trajectory> {
    evolve_with(
        initial,
        rp,
        t_final,
        &EvolveOptions {
            dt_max,
            ..Default::default()
        },
    )
}

/// [`evolve`] with full control over sampling and stability handling.
pub fn evolve_with(
    initial: &MomentState,
    rp: &ReducedParams,
    t_final: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !opts.allow_unstable && !stability_check(rp)? {
        return Err(Error::UnstableParams);
    }
    let times = sample_grid(t_final, opts.n_samples)?;
    let segment = Segment {
        start: 0.0,
        generator: MomentGenerator::new(rp),
        rate_scale: rp.kappa.max(rp.detuning.abs()),
    };
    let states = integrate_piecewise(initial.to_vector(), &[segment], &times, opts.dt_max)?;
    Ok(Trajectory {
        times,
        states,
        params: *rp,
    })
}

pub(crate) fn sample_grid(t_final: f64, n_samples: usize) -> Result<Vec<f64>> {
    if !(t_final > 0.0) {
        return Err(Error::InvalidInput(format!(
            "t_final must be > 0, got {t_final}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be >= 1".into()));
    }
    Ok((0..=n_samples)
        .map(|i| t_final * i as f64 / n_samples as f64)
        .collect())
}

/// One stretch of constant parameters inside a piecewise integration.
pub(crate) struct Segment {
    /// Activation time; the first segment must start at 0.
    pub start: f64,
    pub generator: MomentGenerator,
    /// Fastest rate in play during this stretch, for the resolution cap.
    pub rate_scale: f64,
}

/// Dormand-Prince 5(4) with FSAL over a piecewise-constant generator list.
/// `segments[i]` becomes active at its start time; the first must start at 0.
/// Steps are forced to land exactly on segment edges and sample times, and
/// the per-segment rate scale caps the step at 0.05 of the fastest period
/// so Rabi fringes and pulse transients stay resolved.
pub(crate) fn integrate_piecewise(
    initial: [f64; 10],
    segments: &[Segment],
    sample_times: &[f64],
    dt_max: f64,
) -> Result<Vec<MomentState>> {
    const DT_FLOOR: f64 = 1e-12;
    assert!(!segments.is_empty() && segments[0].start == 0.0);

    let seg_cap = |seg: &Segment| dt_max.min(0.05 / seg.rate_scale.max(1.0));

    // Edge list: all segment starts beyond t = 0.
    let edges: Vec<f64> = segments[1..].iter().map(|s| s.start).collect();

    let mut out = Vec::with_capacity(sample_times.len());
    let mut t = 0.0;
    let mut y = initial;
    let mut cap = seg_cap(&segments[0]);
    let mut h_ctrl = cap;
    let mut seg_idx = 0usize;
    let mut k1 = segments[0].generator.apply(&y);

    let snap = |x: f64| 1e-12 * (1.0 + x.abs());
    let next_edge = |from: usize, t: f64| -> (usize, f64) {
        let mut idx = from;
        while idx < edges.len() && edges[idx] <= t + snap(edges[idx]) {
            idx += 1;
        }
        (
            idx,
            if idx < edges.len() {
                edges[idx]
            } else {
                f64::INFINITY
            },
        )
    };
    let mut edge_cursor = 0usize;

    for &ts in sample_times {
        while ts - t > snap(ts) {
            // Active segment for the step starting at t.
            while seg_idx + 1 < segments.len()
                && segments[seg_idx + 1].start <= t + snap(segments[seg_idx + 1].start)
            {
                seg_idx += 1;
                k1 = segments[seg_idx].generator.apply(&y);
                cap = seg_cap(&segments[seg_idx]);
                h_ctrl = h_ctrl.min(cap);
            }
            let (cursor, edge) = next_edge(edge_cursor, t);
            edge_cursor = cursor;
            let gen = &segments[seg_idx].generator;

            // Never integrate across a kappa edge or past the sample time;
            // leftover slivers below the snap scale are flushed directly.
            let target = ts.min(edge);
            if target - t <= snap(target) {
                t = target;
                continue;
            }
            let mut h_try = h_ctrl.min(cap).min(target - t);
            let truncated = h_try < h_ctrl.min(cap);
            loop {
                if h_try < DT_FLOOR {
                    return Err(Error::StepUnderflow { t, dt: h_try });
                }
                let (y_new, err, k_last) = dopri5_step(gen, &y, &k1, h_try);
                if err <= 1.0 {
                    t += h_try;
                    y = y_new;
                    k1 = k_last;
                    let grow = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
                    // A boundary-shortened step must not collapse the
                    // controller's step size for the segment that follows.
                    h_ctrl = if truncated {
                        h_ctrl.max(h_try * grow)
                    } else {
                        h_try * grow
                    };
                    break;
                }
                let shrink = 0.9 * err.powf(-0.2);
                h_try *= shrink.clamp(0.1, 0.9);
            }
        }
        t = ts;
        let state = MomentState::from_vector(&y);
        state.check_physical().map_err(|e| match e {
            Error::Physicality(msg) => Error::Physicality(format!("at t = {t}: {msg}")),
            other => other,
        })?;
        out.push(state);
    }
    Ok(out)
}

/// One Dormand-Prince step; returns (y_new, scaled error norm, k7 for FSAL).
fn dopri5_step(
    gen: &MomentGenerator,
    y: &[f64; 10],
    k1: &[f64; 10],
    h: f64,
) -> ([f64; 10], f64, [f64; 10]) {
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;
    const RTOL: f64 = 1e-9;
    const ATOL: f64 = 1e-12;

    let stage = |coeffs: &[(f64, &[f64; 10])]| -> [f64; 10] {
        let mut s = *y;
        for i in 0..10 {
            let mut acc = 0.0;
            for (c, k) in coeffs {
                acc += c * k[i];
            }
            s[i] += h * acc;
        }
        s
    };

    let k2 = gen.apply(&stage(&[(A21, k1)]));
    let k3 = gen.apply(&stage(&[(A31, k1), (A32, &k2)]));
    let k4 = gen.apply(&stage(&[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = gen.apply(&stage(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = gen.apply(&stage(&[
        (A61, k1),
        (A62, &k2),
        (A63, &k3),
        (A64, &k4),
        (A65, &k5),
    ]));
    let y_new = stage(&[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = gen.apply(&y_new);

    let mut err_sq = 0.0;
    for i in 0..10 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = ATOL + RTOL * y[i].abs().max(y_new[i].abs());
        err_sq += (e / sc) * (e / sc);
    }
    (y_new, (err_sq / 10.0).sqrt(), k7)
}

/// Steady state of the moment equations by dense LU solve of M x = -c.
pub fn steady_state_moments(rp: &ReducedParams) -> Result<MomentState> {
    if !stability_check(rp)? {
        return Err(Error::UnstableParams);
    }
    let gen = MomentGenerator::new(rp);
    let b: Vec<f64> = gen.drive.iter().map(|v| -v).collect();
    let x = lu_solve(&gen.matrix, &b)?;
    // Residual guard: || M x + c || must sit at rounding level.
    let xv: [f64; 10] = x.clone().try_into().unwrap();
    let resid = gen.apply(&xv);
    let rnorm: f64 = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
    let bnorm: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rnorm > 1e-10 * bnorm.max(1e-300) {
        return Err(Error::NoConvergence(format!(
            "steady-state residual {rnorm:e} exceeds 1e-10 * {bnorm:e}"
        )));
    }
    Ok(MomentState::from_vector(&xv))
}

/// Propagate with the exact matrix exponential of the augmented system;
/// second backend cross-validating the adaptive integrator.
pub fn evolve_expm(
    initial: &MomentState,
    rp: &ReducedParams,
    t_final: f64,
    n_samples: usize,
) -> Result<Trajectory> {
    if !stability_check(rp)? {
        return Err(Error::UnstableParams);
    }
    let gen = MomentGenerator::new(rp);
    let times = sample_grid(t_final, n_samples)?;
    let dt = t_final / n_samples as f64;

    // Augmented 11x11 block [[M, c], [0, 0]]: its exponential carries both
    // the homogeneous propagator and the accumulated drive response.
    let mut aug = DMat::zeros(11, 11);
    for i in 0..10 {
        for j in 0..10 {
            aug[(i, j)] = gen.matrix[(i, j)] * dt;
        }
        aug[(i, 10)] = gen.drive[i] * dt;
    }
    let prop = expm(&aug);

    let mut states = Vec::with_capacity(times.len());
    let mut y = initial.to_vector();
    states.push(*initial);
    for _ in 1..times.len() {
        let mut next = [0.0; 10];
        for i in 0..10 {
            let mut acc = prop[(i, 10)];
            for j in 0..10 {
                acc += prop[(i, j)] * y[j];
            }
            next[i] = acc;
        }
        y = next;
        states.push(MomentState::from_vector(&y));
    }
    Ok(Trajectory {
        times,
        states,
        params: *rp,
    })
}

/// The four printed closed forms of the steady-state phonon occupancy,
/// all stated at Delta' = -omega_m.
#[derive(Debug, Clone, Copy)]
pub struct NstdLimits {
    /// Full expression, valid beyond the resolved-sideband regime.
    pub full: f64,
    /// Resolved-sideband reduction.
    pub resolved: f64,
    /// Weak-coupling form gamma n_th/(Gamma+gamma) + kappa^2/(16 omega_m^2).
    pub weak: f64,
    /// Strong-coupling form gamma n_th/(kappa+gamma) + |G|^2/(2(omega_m^2-4|G|^2)).
    pub strong: f64,
}

/// Closed-form steady-state cooling limits. Assumes Delta' = -omega_m and
/// cooperativity >> 1; `rp.detuning` is not consulted.
pub fn nstd_closed_form(rp: &ReducedParams) -> Result<NstdLimits> {
    let g2 = rp.g_eff * rp.g_eff;
    let k2 = rp.kappa * rp.kappa;
    if g2 == 0.0 {
        return Err(Error::DomainError("closed forms require g_eff > 0".into()));
    }
    if 16.0 * g2 >= 4.0 + k2 {
        return Err(Error::DomainError(format!(
            "16|G|^2 = {} at or beyond the pole 4 omega_m^2 + kappa^2 = {}",
            16.0 * g2,
            4.0 + k2
        )));
    }
    if 4.0 * g2 >= 1.0 {
        return Err(Error::DomainError(
            "4|G|^2 >= omega_m^2: resolved/strong forms hit their pole".into(),
        ));
    }
    let classical = (4.0 * g2 + k2) / (4.0 * g2 * (rp.kappa + rp.gamma)) * rp.gamma * rp.n_th;
    let full_quantum =
        (4.0 * (k2 + 8.0 * g2) + k2 * (k2 - 8.0 * g2)) / (16.0 * (4.0 + k2 - 16.0 * g2));
    let resolved_quantum = (k2 + 8.0 * g2) / (16.0 * (1.0 - 4.0 * g2));
    let big_gamma = 4.0 * g2 / rp.kappa;
    let weak = rp.gamma * rp.n_th / (big_gamma + rp.gamma) + k2 / 16.0;
    let strong = rp.gamma * rp.n_th / (rp.kappa + rp.gamma) + g2 / (2.0 * (1.0 - 4.0 * g2));
    Ok(NstdLimits {
        full: classical + full_quantum,
        resolved: classical + resolved_quantum,
        weak,
        strong,
    })
}

/// Hybridized normal-mode frequencies omega_pm = sqrt(omega_m^2 +- 2|G| omega_m).
pub fn normal_mode_freqs(rp: &ReducedParams) -> Result<(f64, f64)> {
    if 2.0 * rp.g_eff > 1.0 {
        return Err(Error::DomainError(format!(
            "2|G| = {} > omega_m: omega_minus is imaginary",
            2.0 * rp.g_eff
        )));
    }
    let plus = (1.0 + 2.0 * rp.g_eff).sqrt();
    let minus = (1.0 - 2.0 * rp.g_eff).sqrt();
    Ok((plus, minus))
}

/// Weak-coupling analytic phonon trajectory
/// n_th (gamma + Gamma e^{-Gamma t})/(gamma + Gamma) + kappa^2/(16)(1 - e^{-Gamma t}).
pub fn nb_weak_analytic(t: f64, rp: &ReducedParams) -> f64 {
    let big_gamma = 4.0 * rp.g_eff * rp.g_eff / rp.kappa;
    let decay = (-big_gamma * t).exp();
    rp.n_th * (rp.gamma + big_gamma * decay) / (rp.gamma + big_gamma)
        + rp.kappa * rp.kappa / 16.0 * (1.0 - decay)
}

/// Strong-coupling analytic phonon trajectory: Rabi fringes at
/// omega_plus - omega_minus under an envelope decaying at (kappa+gamma)/2,
/// plus the quantum-backaction part. Approximate; validated numerically.
pub fn nb_strong_analytic(t: f64, rp: &ReducedParams) -> Result<f64> {
    let (w_plus, w_minus) = normal_mode_freqs(rp)?;
    let g2 = rp.g_eff * rp.g_eff;
    if 4.0 * g2 >= 1.0 {
        return Err(Error::DomainError(
            "backaction term pole at 2|G| = omega_m".into(),
        ));
    }
    let width = rp.kappa + rp.gamma;
    let env = (-width * t / 2.0).exp();
    let beat = ((w_plus - w_minus) * t).cos();
    let n1 = rp.n_th * (rp.gamma + 0.5 * env * (rp.kappa - rp.gamma + width * beat)) / width;
    let n2 = g2 * (1.0 - env * ((w_plus + w_minus) * t).cos() * beat) / (2.0 * (1.0 - 4.0 * g2));
    Ok(n1 + n2)
}

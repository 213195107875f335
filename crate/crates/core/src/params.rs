//! Physical parameters, unit reduction, and the classical working point.
//!
//! This is the only module that touches SI units. Everything downstream
//! (spectra, covariance, modulation, lindblad) works in units of the
//! mechanical frequency, `omega_m = 1`.

use num_complex::Complex64;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};

/// Full SI-unit description of a driven cavity optomechanical system.
///
/// All rates and frequencies are angular (rad/s). `kappa_0 + kappa_ex` is the
/// only decay rate downstream modules ever see.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// Mechanical angular frequency (rad/s).
    pub omega_m: f64,
    /// Cavity angular frequency (rad/s).
    pub omega_c: f64,
    /// Drive laser angular frequency (rad/s).
    pub omega_in: f64,
    /// Intrinsic cavity decay rate (rad/s).
    pub kappa_0: f64,
    /// External (input-coupling) cavity decay rate (rad/s).
    pub kappa_ex: f64,
    /// Mechanical damping rate (rad/s).
    pub gamma: f64,
    /// Single-photon optomechanical coupling strength (rad/s).
    pub g: f64,
    /// Effective mass of the mechanical mode (kg).
    pub m_eff: f64,
    /// Input laser power (W).
    pub power: f64,
    /// Drive phase (rad).
    pub phase: f64,
    /// Bath temperature (K).
    pub temperature: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("omega_m", self.omega_m),
            ("omega_c", self.omega_c),
            ("omega_in", self.omega_in),
            ("kappa_0", self.kappa_0),
            ("kappa_ex", self.kappa_ex),
            ("gamma", self.gamma),
            ("m_eff", self.m_eff),
        ];
        for (name, v) in positives {
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be > 0, got {v}")));
            }
        }
        // g = 0 and P = 0 are legitimate degenerate drives.
        for (name, v) in [("g", self.g), ("power", self.power)] {
            if !(v >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidInput("phase must be finite".into()));
        }
        Ok(())
    }

    /// Total cavity decay rate `kappa_0 + kappa_ex` (rad/s).
    pub fn kappa_total(&self) -> f64 {
        self.kappa_0 + self.kappa_ex
    }

    /// Bare input-cavity detuning `omega_in - omega_c` (rad/s).
    pub fn detuning_bare(&self) -> f64 {
        self.omega_in - self.omega_c
    }

    /// Drive strength of this parameter set.
    pub fn drive(&self) -> Complex64 {
        drive_amplitude(self.power, self.omega_in, self.kappa_ex, self.phase)
    }

    /// Thermal phonon occupancy of the mechanical bath.
    pub fn n_th(&self) -> f64 {
        thermal_occupancy(self.omega_m, self.temperature)
    }

    /// Zero-point fluctuation of the mechanical mode (m).
    pub fn x_zpf(&self) -> f64 {
        zero_point_fluctuation(self.m_eff, self.omega_m)
    }

    /// Dimensionless reduction at the system's unique stable working point.
    ///
    /// Fails with [`Error::InvalidInput`] when the classical response is
    /// bistable; pick a branch explicitly with [`Self::reduced_at`] in that
    /// case.
    pub fn to_reduced(&self) -> Result<ReducedParams> {
        let fps = classical_steady_state(self)?;
        let stable: Vec<&ClassicalFixedPoint> = fps.iter().filter(|fp| fp.stable).collect();
        match stable.len() {
            1 => self.reduced_at(stable[0]),
            n => Err(Error::InvalidInput(format!(
                "{n} stable classical branches coexist; select one with reduced_at"
            ))),
        }
    }

    /// Dimensionless reduction at a given classical fixed point.
    pub fn reduced_at(&self, fp: &ClassicalFixedPoint) -> Result<ReducedParams> {
        ReducedParams::new(
            self.kappa_total() / self.omega_m,
            self.gamma / self.omega_m,
            (fp.alpha * self.g).norm() / self.omega_m,
            fp.detuning_eff / self.omega_m,
            self.n_th(),
        )
    }
}

/// Dimensionless system parameters in units of the mechanical frequency.
///
/// `detuning` is the effective detuning Delta' (already containing the static
/// mechanical displacement shift); it is a free knob here, matching how all
/// closed-form results are stated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    /// Total cavity decay rate, kappa/omega_m.
    pub kappa: f64,
    /// Mechanical damping rate, gamma/omega_m.
    pub gamma: f64,
    /// Field-enhanced coupling |G|/omega_m.
    pub g_eff: f64,
    /// Effective detuning Delta'/omega_m.
    pub detuning: f64,
    /// Thermal phonon occupancy of the mechanical bath.
    pub n_th: f64,
}

impl ReducedParams {
    pub fn new(kappa: f64, gamma: f64, g_eff: f64, detuning: f64, n_th: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kappa must be > 0, got {kappa}"
            )));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidInput(format!(
                "gamma must be > 0, got {gamma}"
            )));
        }
        if !(g_eff >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "g_eff must be >= 0, got {g_eff}"
            )));
        }
        if !(n_th >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "n_th must be >= 0, got {n_th}"
            )));
        }
        if !detuning.is_finite() {
            return Err(Error::InvalidInput("detuning must be finite".into()));
        }
        Ok(Self {
            kappa,
            gamma,
            g_eff,
            detuning,
            n_th,
        })
    }

    /// Same parameters with a different cavity decay rate (used by the
    /// dissipation-modulation engine).
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }
}

/// A self-consistent solution of the classical steady-state equations.
#[derive(Debug, Clone)]
pub struct ClassicalFixedPoint {
    /// Steady cavity amplitude (dimensionless).
    pub alpha: Complex64,
    /// Steady mechanical amplitude (dimensionless).
    pub beta: Complex64,
    /// Effective detuning Delta' = Delta - g(beta + beta*) (rad/s).
    pub detuning_eff: f64,
    /// Slope-criterion stability of this branch of the intensity cubic.
    pub stable: bool,
    /// Number of coexisting fixed points at these parameters (1 or 3).
    pub branch_count: usize,
}

/// Bose-Einstein occupancy of a mode at `omega_m` in a bath at `temperature`.
///
/// Evaluates `1/expm1(hbar*omega/kB*T)`, which stays accurate deep in the
/// classical regime `hbar*omega << kB*T`. Returns 0 at T = 0.
pub fn thermal_occupancy(omega_m: f64, temperature: f64) -> f64 {
    assert!(omega_m > 0.0, "omega_m must be > 0");
    assert!(temperature >= 0.0, "temperature must be >= 0");
    if temperature == 0.0 {
        return 0.0;
    }
    let x = HBAR * omega_m / (K_B * temperature);
    1.0 / x.exp_m1()
}

/// Drive strength Omega with |Omega| = sqrt(kappa_ex * P / (hbar * omega_in))
/// and arg(Omega) = phase.
pub fn drive_amplitude(power: f64, omega_in: f64, kappa_ex: f64, phase: f64) -> Complex64 {
    assert!(power >= 0.0, "power must be >= 0");
    assert!(kappa_ex > 0.0, "kappa_ex must be > 0");
    assert!(omega_in > 0.0, "omega_in must be > 0");
    let magnitude = (kappa_ex * power / (HBAR * omega_in)).sqrt();
    Complex64::from_polar(magnitude, phase)
}

/// Zero-point fluctuation sqrt(hbar / (2 m_eff omega_m)) in metres.
pub fn zero_point_fluctuation(m_eff: f64, omega_m: f64) -> f64 {
    assert!(m_eff > 0.0, "m_eff must be > 0");
    assert!(omega_m > 0.0, "omega_m must be > 0");
    (HBAR / (2.0 * m_eff * omega_m)).sqrt()
}

/// Cooperativity C = 4 g_eff^2 / (gamma kappa).
pub fn cooperativity(rp: &ReducedParams) -> f64 {
    4.0 * rp.g_eff * rp.g_eff / (rp.gamma * rp.kappa)
}

/// Stability of the linearized dynamics on the red side.
///
/// True iff |G|^2 < -(4 Delta'^2 + kappa^2) omega_m / (16 Delta'), strictly.
/// The bound is only stated for red detuning; Delta' >= 0 is rejected.
pub fn stability_check(rp: &ReducedParams) -> Result<bool> {
    if rp.detuning >= 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "stability bound is stated for red detuning only (detuning = {})",
            rp.detuning
        )));
    }
    let d = rp.detuning;
    let bound = -(4.0 * d * d + rp.kappa * rp.kappa) / (16.0 * d);
    Ok(rp.g_eff * rp.g_eff < bound)
}

/// All self-consistent classical fixed points of the driven system.
///
/// The two steady-state conditions reduce to a real cubic in the intracavity
/// intensity |alpha|^2; every real root is polished by Newton iteration and
/// mapped back to (alpha, beta, Delta'). In the bistable regime all three
/// branches are returned with the middle-intensity branch flagged unstable by
/// the slope criterion.
pub fn classical_steady_state(params: &PhysicalParams) -> Result<Vec<ClassicalFixedPoint>> {
    params.validate()?;
    let omega = params.drive();
    let omega_sq = omega.norm_sqr();
    let kappa = params.kappa_total();
    let delta = params.detuning_bare();
    let g = params.g;
    let wm = params.omega_m;
    let gm = params.gamma;

    // Delta'(I) = Delta + eta * I with I = |alpha|^2.
    let eta = 2.0 * g * g * wm / (wm * wm + gm * gm / 4.0);

    // F(I) = I * ((Delta + eta I)^2 + kappa^2/4) - |Omega|^2 = 0
    let a3 = eta * eta;
    let a2 = 2.0 * delta * eta;
    let a1 = delta * delta + kappa * kappa / 4.0;
    let a0 = -omega_sq;

    let f = |i: f64| ((a3 * i + a2) * i + a1) * i + a0;
    let df = |i: f64| (3.0 * a3 * i + 2.0 * a2) * i + a1;

    // When the nonlinear shift is negligible at the linear root's scale the
    // cubic coefficients are degenerate; solving it as a line avoids the
    // ill-conditioned normalization by a3.
    let i_lin = omega_sq / a1;
    let nonlinear_negligible =
        a3 * i_lin.powi(3) + a2.abs() * i_lin.powi(2) <= 1e-14 * (a1 * i_lin).max(omega_sq);
    let mut roots = if omega_sq == 0.0 {
        vec![0.0]
    } else if a3 == 0.0 || nonlinear_negligible {
        vec![i_lin]
    } else {
        real_cubic_roots(a3, a2, a1, a0)
    };

    // Newton polish in intensity space.
    let scale = omega_sq.max(1.0);
    for root in roots.iter_mut() {
        let mut i = root.max(0.0);
        let mut converged = false;
        for _ in 0..100 {
            let fi = f(i);
            if fi.abs() <= 1e-14 * scale {
                converged = true;
                break;
            }
            let dfi = df(i);
            if dfi == 0.0 {
                break;
            }
            let step = fi / dfi;
            i -= step;
            if step.abs() <= 1e-15 * i.abs().max(1e-300) {
                converged = true;
                break;
            }
        }
        if !converged && f(i).abs() > 1e-10 * scale {
            return Err(Error::NoConvergence(format!(
                "Newton polish stalled at I = {i} with residual {}",
                f(i)
            )));
        }
        *root = i;
    }

    // Deduplicate near-coincident roots and drop unphysical negatives.
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    roots.retain(|&i| i >= -1e-12);

    let branch_count = roots.len();
    let mut out = Vec::with_capacity(branch_count);
    for &i in &roots {
        let i = i.max(0.0);
        let det_eff = delta + eta * i;
        let alpha = -Complex64::i() * omega / Complex64::new(kappa / 2.0, -det_eff);
        let beta = -Complex64::i() * g * alpha.norm_sqr() / Complex64::new(gm / 2.0, wm);
        // Slope criterion: branches where the intensity response folds back
        // (dF/dI < 0) are unstable. For 3 branches this is the middle one.
        let stable = df(i) > 0.0;
        out.push(ClassicalFixedPoint {
            alpha,
            beta,
            detuning_eff: det_eff,
            stable,
            branch_count,
        });
    }

    // Residual check on the original steady-state equations.
    let tol = 1e-10 * omega.norm().max(1.0);
    for fp in &out {
        let r_alpha =
            Complex64::new(-kappa / 2.0, fp.detuning_eff) * fp.alpha - Complex64::i() * omega;
        let r_beta =
            Complex64::new(-gm / 2.0, -wm) * fp.beta - Complex64::i() * g * fp.alpha.norm_sqr();
        if r_alpha.norm() > tol || r_beta.norm() > tol {
            return Err(Error::NoConvergence(format!(
                "fixed-point residuals {:e}, {:e} exceed tolerance {:e}",
                r_alpha.norm(),
                r_beta.norm(),
                tol
            )));
        }
    }

    Ok(out)
}

/// Real roots of a3 x^3 + a2 x^2 + a1 x + a0 with a3 != 0.
fn real_cubic_roots(a3: f64, a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    // Depressed form t^3 + p t + q with x = t - b/3.
    let b = a2 / a3;
    let c = a1 / a3;
    let d = a0 / a3;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let shift = -b / 3.0;

    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    if disc > 0.0 {
        // One real root (Cardano, written to avoid cancellation).
        let s = disc.sqrt();
        let u = cbrt(-q / 2.0 + s);
        let v = cbrt(-q / 2.0 - s);
        vec![u + v + shift]
    } else if disc == 0.0 {
        if q == 0.0 {
            vec![shift]
        } else {
            let u = cbrt(-q / 2.0);
            vec![2.0 * u + shift, -u + shift]
        }
    } else {
        // Three real roots: trigonometric method.
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos();
        (0..3)
            .map(|k| 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
            .collect()
    }
}

fn cbrt(x: f64) -> f64 {
    x.signum() * x.abs().cbrt()
}

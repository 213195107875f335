//! Quantum-noise (perturbative) treatment: cavity response, optical force
//! spectrum, phonon scattering rates, self-energy, mechanical spectrum, and
//! the closed-form cooling limits.
//!
//! Everything is expressed in units of the mechanical frequency. The force
//! spectrum drops the 1/x_zpf^2 prefactor; the SI wrapper in [`crate::params`]
//! carries the conversion factors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ReducedParams;

/// Cavity response chi(omega) = 1 / (-i (omega + Delta') + kappa/2).
pub fn cavity_response(omega: f64, rp: &ReducedParams) -> Complex64 {
    1.0 / Complex64::new(rp.kappa / 2.0, -(omega + rp.detuning))
}

/// Optical force spectral density kappa |G chi(omega)|^2, in units of
/// |G|^2 / (x_zpf^2 omega_m) with the 1/x_zpf^2 factor dropped.
pub fn force_spectrum(omega: f64, rp: &ReducedParams) -> f64 {
    let g2 = rp.g_eff * rp.g_eff;
    let d = omega + rp.detuning;
    g2 * rp.kappa / (d * d + rp.kappa * rp.kappa / 4.0)
}

/// Optomechanical self energy Sigma(omega) = -i |G|^2 [chi(omega) - chi*(-omega)].
pub fn self_energy(omega: f64, rp: &ReducedParams) -> Complex64 {
    let g2 = rp.g_eff * rp.g_eff;
    -Complex64::i() * g2 * (cavity_response(omega, rp) - cavity_response(-omega, rp).conj())
}

/// Phonon absorption/emission rates and the derived optical spring and damping.
#[derive(Debug, Clone, Copy)]
pub struct CoolingRates {
    /// Anti-Stokes (phonon absorption) rate A-.
    pub a_minus: f64,
    /// Stokes (phonon emission) rate A+.
    pub a_plus: f64,
    /// Optical damping Gamma_opt = -2 Im Sigma(omega_m).
    pub gamma_opt: f64,
    /// Optical spring shift delta_omega_m = Re Sigma(omega_m).
    pub spring_shift: f64,
}

/// Scattering rates A-+ = |G|^2 kappa / ((omega_m +- Delta')^2 + kappa^2/4)
/// together with the self-energy evaluated at the mechanical frequency.
pub fn scattering_rates(rp: &ReducedParams) -> CoolingRates {
    let g2 = rp.g_eff * rp.g_eff;
    let lorentz = |x: f64| g2 * rp.kappa / (x * x + rp.kappa * rp.kappa / 4.0);
    let sigma = self_energy(1.0, rp);
    CoolingRates {
        a_minus: lorentz(1.0 + rp.detuning),
        a_plus: lorentz(1.0 - rp.detuning),
        gamma_opt: -2.0 * sigma.im,
        spring_shift: sigma.re,
    }
}

/// Mechanical spectral density
/// S_bb(omega) = (gamma n_th + kappa |G chi(-omega)|^2)
///             / |i omega - i (omega_m + Sigma(omega)) - gamma/2|^2.
///
/// The underlying derivation drops counter-rotating mechanical terms, so the
/// expression is accurate for |omega - omega_m| up to a few kappa.
pub fn mechanical_spectrum(omega: f64, rp: &ReducedParams) -> f64 {
    let g2 = rp.g_eff * rp.g_eff;
    let numerator = rp.gamma * rp.n_th + rp.kappa * g2 * cavity_response(-omega, rp).norm_sqr();
    let sigma = self_energy(omega, rp);
    let denom = Complex64::new(sigma.im - rp.gamma / 2.0, omega - 1.0 - sigma.re);
    numerator / denom.norm_sqr()
}

/// Steady-state cooling limit of the perturbative treatment.
#[derive(Debug, Clone, Copy)]
pub struct CoolingLimit {
    /// Full limit n_f = (gamma n_th + A+) / Gamma_opt.
    pub n_f: f64,
    /// Classical part gamma n_th / Gamma_opt.
    pub n_classical: f64,
    /// Quantum backaction part A+ / Gamma_opt.
    pub n_quantum: f64,
    /// The same quantum part in its simplified algebraic form
    /// (4 (omega_m + Delta')^2 + kappa^2) / (-16 omega_m Delta').
    pub n_quantum_simplified: f64,
}

/// Cooling limit of the quantum-noise approach; requires net optical damping.
pub fn cooling_limit(rp: &ReducedParams) -> Result<CoolingLimit> {
    let rates = scattering_rates(rp);
    if rates.gamma_opt <= 0.0 {
        return Err(Error::HeatingRegime);
    }
    let d = rp.detuning;
    let simplified = (4.0 * (1.0 + d) * (1.0 + d) + rp.kappa * rp.kappa) / (-16.0 * d);
    Ok(CoolingLimit {
        n_f: (rp.gamma * rp.n_th + rates.a_plus) / rates.gamma_opt,
        n_classical: rp.gamma * rp.n_th / rates.gamma_opt,
        n_quantum: rates.a_plus / rates.gamma_opt,
        n_quantum_simplified: simplified,
    })
}

/// Global minimum of the quantum backaction limit over detuning.
#[derive(Debug, Clone, Copy)]
pub struct MinQuantumLimit {
    /// n_min = (sqrt(1 + kappa^2 / 4 omega_m^2) - 1) / 2.
    pub n_min: f64,
    /// Optimal detuning Delta' = -sqrt(omega_m^2 + kappa^2/4).
    pub detuning_opt: f64,
}

/// Minimal quantum cooling limit, attained at Delta' = -sqrt(omega_m^2 + kappa^2/4).
pub fn min_quantum_limit(kappa: f64) -> MinQuantumLimit {
    assert!(kappa > 0.0, "kappa must be > 0");
    let s = (1.0 + kappa * kappa / 4.0).sqrt();
    MinQuantumLimit {
        n_min: 0.5 * (s - 1.0),
        detuning_opt: -s,
    }
}

/// What a [`SpectrumSeries`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Force,
    Mechanical,
    SelfEnergy,
}

/// Samples of a spectral quantity.
#[derive(Debug, Clone)]
pub enum SpectrumValues {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// A spectral quantity sampled on a strictly increasing frequency grid
/// (units of omega_m).
#[derive(Debug, Clone)]
pub struct SpectrumSeries {
    pub omegas: Vec<f64>,
    pub values: SpectrumValues,
    pub kind: SpectrumKind,
}

impl SpectrumSeries {
    /// Sample the optical force spectrum on `omegas`.
    pub fn force(omegas: Vec<f64>, rp: &ReducedParams) -> Result<Self> {
        check_grid(&omegas)?;
        let values = omegas.iter().map(|&w| force_spectrum(w, rp)).collect();
        Ok(Self {
            omegas,
            values: SpectrumValues::Real(values),
            kind: SpectrumKind::Force,
        })
    }

    /// Sample the mechanical spectrum on `omegas`.
    pub fn mechanical(omegas: Vec<f64>, rp: &ReducedParams) -> Result<Self> {
        check_grid(&omegas)?;
        let values = omegas.iter().map(|&w| mechanical_spectrum(w, rp)).collect();
        Ok(Self {
            omegas,
            values: SpectrumValues::Real(values),
            kind: SpectrumKind::Mechanical,
        })
    }

    /// Sample the complex self-energy on `omegas`.
    pub fn self_energy(omegas: Vec<f64>, rp: &ReducedParams) -> Result<Self> {
        check_grid(&omegas)?;
        let values = omegas.iter().map(|&w| self_energy(w, rp)).collect();
        Ok(Self {
            omegas,
            values: SpectrumValues::Complex(values),
            kind: SpectrumKind::SelfEnergy,
        })
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

fn check_grid(omegas: &[f64]) -> Result<()> {
    if omegas.is_empty() {
        return Err(Error::InvalidInput("frequency grid is empty".into()));
    }
    if omegas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Uniform grid of `n` points from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && max > min);
    (0..n)
        .map(|i| min + (max - min) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Default spectral grid: 2001 points spanning [-2, 2] * max(1, |Delta'|).
pub fn default_grid(rp: &ReducedParams) -> Vec<f64> {
    let span = 2.0 * rp.detuning.abs().max(1.0);
    linear_grid(-span, span, 2001)
}

/// Default grid with a dense window resolving the mechanical peak.
pub fn default_grid_with_mechanical_window(rp: &ReducedParams) -> Vec<f64> {
    let rates = scattering_rates(rp);
    let width = (rp.gamma + rates.gamma_opt.abs()).max(1e-9);
    let center = 1.0 + rates.spring_shift;
    let mut grid = default_grid(rp);
    grid.extend(linear_grid(
        center - 10.0 * width,
        center + 10.0 * width,
        2001,
    ));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn rp(kappa: f64, g_eff: f64, detuning: f64) -> ReducedParams {
        ReducedParams::new(kappa, 1e-5, g_eff, detuning, 1e3).unwrap()
    }

    #[test]
    fn cavity_response_peak_and_hwhm() {
        let p = rp(0.5, 0.01, -1.0);
        let peak = cavity_response(-p.detuning, &p);
        assert_relative_eq!(peak.re, 2.0 / p.kappa, max_relative = 1e-14);
        assert_abs_diff_eq!(peak.im, 0.0);
        let half = cavity_response(-p.detuning + p.kappa / 2.0, &p).norm_sqr();
        assert_relative_eq!(half, 0.5 * peak.norm_sqr(), max_relative = 1e-12);
    }

    #[test]
    fn cavity_response_complex_value() {
        // kappa = 0.5, Delta' = -1, omega = 0: chi = 1/(0.25 + i).
        let p = rp(0.5, 0.01, -1.0);
        let chi = cavity_response(0.0, &p);
        let expected = 1.0 / Complex64::new(0.25, 1.0);
        assert_relative_eq!(chi.re, expected.re, max_relative = 1e-14);
        assert_relative_eq!(chi.im, expected.im, max_relative = 1e-14);
    }

    #[test]
    fn force_spectrum_peak_value() {
        let p = rp(0.5, 0.02, -1.0);
        let peak = force_spectrum(-p.detuning, &p);
        assert_relative_eq!(
            peak,
            4.0 * p.g_eff * p.g_eff / p.kappa,
            max_relative = 1e-14
        );
    }

    #[test]
    fn force_spectrum_red_detuned_asymmetry() {
        // Red solid curve of the normalized force-spectrum plot:
        // anti-Stokes sideband (omega = +omega_m) dominates.
        let p = rp(0.5, 0.02, -1.0);
        assert!(force_spectrum(1.0, &p) > force_spectrum(-1.0, &p));
        // On resonance the spectrum is symmetric: no net cooling.
        let p0 = rp(0.5, 0.02, 0.0);
        assert_relative_eq!(
            force_spectrum(1.0, &p0),
            force_spectrum(-1.0, &p0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn scattering_rates_resolved_sideband_limit() {
        let p = rp(0.01, 0.002, -1.0);
        let r = scattering_rates(&p);
        // At Delta' = -omega_m the absorption rate is exactly 4|G|^2/kappa.
        assert_relative_eq!(
            r.a_minus,
            4.0 * p.g_eff * p.g_eff / p.kappa,
            max_relative = 1e-14
        );
        // Emission ratio tends to kappa^2/16 for kappa << omega_m.
        let ratio = r.a_plus / r.a_minus;
        let expected = p.kappa * p.kappa / 16.0;
        assert_relative_eq!(ratio, expected, max_relative = 1e-3);
    }

    #[test]
    fn scattering_rates_symmetric_at_zero_detuning() {
        let p = rp(0.3, 0.01, 0.0);
        let r = scattering_rates(&p);
        assert_relative_eq!(r.a_minus, r.a_plus, max_relative = 1e-14);
        assert_abs_diff_eq!(r.gamma_opt, 0.0, epsilon = 1e-18);
    }

    #[test]
    fn scattering_rates_vanish_without_coupling() {
        let p = rp(0.3, 0.0, -1.0);
        let r = scattering_rates(&p);
        assert_eq!(r.a_minus, 0.0);
        assert_eq!(r.a_plus, 0.0);
        assert_eq!(r.gamma_opt, 0.0);
        assert_eq!(r.spring_shift, 0.0);
        assert_eq!(self_energy(0.7, &p), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn self_energy_matches_explicit_bracketed_forms() {
        // delta_omega_m and Gamma_opt written out with the two explicit
        // Lorentzian brackets, compared against Re/Im of Sigma(omega_m).
        for &(kappa, g, d) in &[
            (0.05, 0.01, -1.0),
            (0.5, 0.03, -0.7),
            (2.0, 0.1, -2.3),
            (0.2, 0.05, -1.2),
        ] {
            let p = rp(kappa, g, d);
            let g2 = g * g;
            let chi_p = 1.0 / Complex64::new(kappa / 2.0, -(1.0 + d));
            let chi_m = 1.0 / Complex64::new(kappa / 2.0, -(1.0 - d));
            let spring = g2 * (chi_p.im - chi_m.im);
            let damping = 2.0 * g2 * (chi_p.re - chi_m.re);
            let r = scattering_rates(&p);
            assert_relative_eq!(r.spring_shift, spring, max_relative = 1e-12);
            assert_relative_eq!(r.gamma_opt, damping, max_relative = 1e-12);
        }
    }

    #[test]
    fn damping_equals_rate_difference() {
        // Gamma_opt = A- - A+ is an algebraic identity of the two routes.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rand = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10_000 {
            let kappa = 0.01 + 10.0 * rand();
            let g = 0.5 * rand();
            let d = -3.0 + 6.0 * rand();
            let p = ReducedParams::new(kappa, 1e-5, g, d, 0.0).unwrap();
            let r = scattering_rates(&p);
            let diff = r.a_minus - r.a_plus;
            let scale = r.a_minus.abs().max(r.a_plus.abs()).max(1e-300);
            assert!(
                (r.gamma_opt - diff).abs() <= 1e-12 * scale,
                "identity violated at kappa={kappa} g={g} d={d}: {} vs {}",
                r.gamma_opt,
                diff
            );
        }
    }

    #[test]
    fn gamma_opt_sign_follows_detuning() {
        for &d in &[-2.0, -1.0, -0.3] {
            assert!(scattering_rates(&rp(0.4, 0.05, d)).gamma_opt > 0.0);
        }
        for &d in &[0.3, 1.0, 2.0] {
            assert!(scattering_rates(&rp(0.4, 0.05, d)).gamma_opt < 0.0);
        }
    }

    #[test]
    fn mechanical_spectrum_bare_lorentzian() {
        // g = 0: Lorentzian at omega_m, HWHM gamma/2, area 2 pi n_th.
        let p = ReducedParams::new(0.05, 1e-4, 0.0, -1.0, 50.0).unwrap();
        let peak = mechanical_spectrum(1.0, &p);
        assert_relative_eq!(
            peak,
            p.gamma * p.n_th / (p.gamma * p.gamma / 4.0),
            max_relative = 1e-12
        );
        let half = mechanical_spectrum(1.0 + p.gamma / 2.0, &p);
        assert_relative_eq!(half, peak / 2.0, max_relative = 1e-9);
        // Quadrature over +-300 half-widths captures all but ~0.1%.
        let k = 300.0;
        let grid = linear_grid(1.0 - k * p.gamma, 1.0 + k * p.gamma, 60_001);
        let dw = grid[1] - grid[0];
        let area: f64 = grid
            .iter()
            .map(|&w| mechanical_spectrum(w, &p))
            .sum::<f64>()
            * dw;
        let n_b = area / (2.0 * std::f64::consts::PI);
        assert_relative_eq!(n_b, p.n_th, max_relative = 5e-3);
    }

    /// Peak position and FWHM of the mechanical spectrum by dense sampling
    /// with parabolic/linear refinement.
    fn fit_mechanical_peak(p: &ReducedParams) -> (f64, f64) {
        let r = scattering_rates(p);
        let width = p.gamma + r.gamma_opt;
        let center = 1.0 + r.spring_shift;
        let grid = linear_grid(center - 6.0 * width, center + 6.0 * width, 48_001);
        let vals: Vec<f64> = grid.iter().map(|&w| mechanical_spectrum(w, p)).collect();
        let (imax, &peak) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let dw = grid[1] - grid[0];
        let denom = vals[imax - 1] - 2.0 * vals[imax] + vals[imax + 1];
        let w_peak = grid[imax] + 0.5 * dw * (vals[imax - 1] - vals[imax + 1]) / denom;
        let half = peak / 2.0;
        let left = vals.iter().position(|&v| v >= half).unwrap();
        let right = vals.len() - 1 - vals.iter().rev().position(|&v| v >= half).unwrap();
        let interp = |i: usize, j: usize| grid[i] + dw * (half - vals[i]) / (vals[j] - vals[i]);
        let fwhm = interp(right, right + 1) - interp(left, left - 1);
        (w_peak, fwhm)
    }

    #[test]
    fn mechanical_spectrum_shift_and_broadening() {
        // Deep in the weak-coupling regime the peak sits at
        // omega_m + delta_omega_m with FWHM gamma + Gamma_opt, both to 1%.
        let p = ReducedParams::new(0.05, 1e-5, 0.002, -1.0, 1e3).unwrap();
        let r = scattering_rates(&p);
        let width = p.gamma + r.gamma_opt;
        let (w_peak, fwhm) = fit_mechanical_peak(&p);
        assert_abs_diff_eq!(w_peak - 1.0, r.spring_shift, epsilon = 0.01 * width);
        assert!(
            (w_peak - 1.0) * r.spring_shift > 0.0,
            "shift direction disagrees"
        );
        assert_relative_eq!(fwhm, width, max_relative = 0.01);

        // At g_eff = 0.01 the slope of Re Sigma across the line rescales the
        // frequency axis by 1/(1 - dSigma_R/domega): the naive width reading
        // is ~20% light. Check the corrected prediction instead.
        let p2 = ReducedParams::new(0.05, 1e-5, 0.01, -1.0, 1e3).unwrap();
        let r2 = scattering_rates(&p2);
        let width2 = p2.gamma + r2.gamma_opt;
        let slope = {
            let h = 1e-7;
            (self_energy(1.0 + h, &p2).re - self_energy(1.0 - h, &p2).re) / (2.0 * h)
        };
        let (w_peak2, fwhm2) = fit_mechanical_peak(&p2);
        assert_relative_eq!(fwhm2, width2 / (1.0 - slope), max_relative = 0.05);
        assert_abs_diff_eq!(w_peak2 - 1.0, r2.spring_shift, epsilon = 0.01 * width2);
    }

    #[test]
    fn spectra_nonnegative_everywhere() {
        let p = ReducedParams::new(0.4, 1e-4, 0.07, -1.3, 10.0).unwrap();
        for &w in default_grid(&p).iter() {
            assert!(force_spectrum(w, &p) >= 0.0);
            assert!(mechanical_spectrum(w, &p) >= 0.0);
        }
    }

    #[test]
    fn cooling_limit_identity_and_resolved_value() {
        // Both algebraic forms of the quantum limit agree.
        let mut state = 0x853c49e6748fea9bu64;
        let mut rand = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let kappa = 0.01 + 5.0 * rand();
            let g = 1e-3 + 0.1 * rand();
            let d = -3.0 + 2.9 * rand();
            let p = ReducedParams::new(kappa, 1e-5, g, d, 0.0).unwrap();
            let lim = cooling_limit(&p).unwrap();
            assert_relative_eq!(
                lim.n_quantum,
                lim.n_quantum_simplified,
                max_relative = 1e-10
            );
        }
        // Resolved sideband: kappa = 0.05, Delta' = -1 gives kappa^2/16.
        let p = ReducedParams::new(0.05, 1e-5, 0.01, -1.0, 0.0).unwrap();
        let lim = cooling_limit(&p).unwrap();
        assert_relative_eq!(lim.n_quantum, 1.5625e-4, max_relative = 1e-10);
        // n_th = 0 makes the full limit purely quantum.
        assert_relative_eq!(lim.n_f, lim.n_quantum, max_relative = 1e-14);
    }

    #[test]
    fn cooling_limit_heating_regime_errors() {
        let blue = ReducedParams::new(0.5, 1e-5, 0.05, 0.8, 10.0).unwrap();
        assert!(matches!(cooling_limit(&blue), Err(Error::HeatingRegime)));
        let zero = ReducedParams::new(0.5, 1e-5, 0.05, 0.0, 10.0).unwrap();
        assert!(matches!(cooling_limit(&zero), Err(Error::HeatingRegime)));
    }

    #[test]
    fn min_quantum_limit_values() {
        // Unresolved showcase: kappa = 10 omega_m.
        let m = min_quantum_limit(10.0);
        assert_relative_eq!(m.n_min, 0.5 * (26f64.sqrt() - 1.0), max_relative = 1e-14);
        assert_abs_diff_eq!(m.n_min, 2.0495, epsilon = 1e-4);
        assert_relative_eq!(m.detuning_opt, -26f64.sqrt(), max_relative = 1e-14);
        // Resolved limit: n_min -> kappa^2/16.
        let s = min_quantum_limit(1e-3);
        assert_relative_eq!(s.n_min, 1e-6 / 16.0, max_relative = 1e-6);
    }

    #[test]
    fn min_quantum_limit_matches_grid_search() {
        for &kappa in &[0.05, 0.5, 2.0, 10.0] {
            let m = min_quantum_limit(kappa);
            let span_lo = -3.0 * kappa.max(1.0);
            let grid = linear_grid(span_lo, -0.05, 40_001);
            let mut best = (f64::INFINITY, 0.0);
            for &d in &grid {
                let p = ReducedParams::new(kappa, 1e-5, 0.01, d, 0.0).unwrap();
                if let Ok(lim) = cooling_limit(&p) {
                    if lim.n_quantum < best.0 {
                        best = (lim.n_quantum, d);
                    }
                }
            }
            let spacing = grid[1] - grid[0];
            assert!(
                (best.1 - m.detuning_opt).abs() <= spacing,
                "kappa={kappa}: argmin {} vs {}",
                best.1,
                m.detuning_opt
            );
            assert_relative_eq!(best.0, m.n_min, max_relative = 1e-4);
        }
    }

    #[test]
    fn grids_are_strictly_increasing() {
        let p = ReducedParams::new(0.05, 1e-5, 0.01, -1.0, 1e3).unwrap();
        for grid in [default_grid(&p), default_grid_with_mechanical_window(&p)] {
            assert!(grid.windows(2).all(|w| w[1] > w[0]));
        }
        assert_eq!(default_grid(&p).len(), 2001);
        let wide = ReducedParams::new(10.0, 1e-5, 0.01, -2.5, 1e3).unwrap();
        let g = default_grid(&wide);
        assert_relative_eq!(g[0], -5.0, max_relative = 1e-14);
        assert_relative_eq!(*g.last().unwrap(), 5.0, max_relative = 1e-14);
    }

    #[test]
    fn series_constructors_validate_and_tag() {
        let p = ReducedParams::new(0.5, 1e-4, 0.02, -1.0, 10.0).unwrap();
        let s = SpectrumSeries::force(default_grid(&p), &p).unwrap();
        assert_eq!(s.kind, SpectrumKind::Force);
        assert_eq!(s.len(), 2001);
        match &s.values {
            SpectrumValues::Real(v) => assert!(v.iter().all(|&x| x >= 0.0)),
            _ => panic!("force spectrum must be real"),
        }
        let bad = SpectrumSeries::mechanical(vec![0.0, 0.0, 1.0], &p);
        assert!(matches!(bad, Err(Error::InvalidInput(_))));
        let se = SpectrumSeries::self_energy(vec![-1.0, 0.0, 1.0], &p).unwrap();
        assert_eq!(se.kind, SpectrumKind::SelfEnergy);
    }
}

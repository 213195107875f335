//! Dissipation-modulated cooling: kappa(t) pulse trains, time-dependent
//! covariance integration, the instantaneous-state cooling limits, and the
//! frequency-matching condition.
//!
//! A dissipation pulse fired at a Rabi minimum dumps the photons that just
//! swapped out of the mechanical mode, halting the reversible oscillation
//! before the energy swaps back. Pulses are rectangular; height and width
//! default to kappa_pulse = 20 kappa_base with kappa_pulse * duration = 10,
//! both overridable.

use crate::covariance::{
    integrate_piecewise, normal_mode_freqs, sample_grid, MomentGenerator, MomentState, Segment,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::params::{stability_check, ReducedParams};

/// Default pulse height relative to the base decay rate.
pub const DEFAULT_PULSE_FACTOR: f64 = 20.0;
/// Default pulse area: kappa_pulse * duration, fixing photon survival e^{-10}.
pub const DEFAULT_PULSE_AREA: f64 = 10.0;

/// One rectangular dissipation pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    /// Pulse start time (1/omega_m units).
    pub t_start: f64,
    /// Pulse length.
    pub duration: f64,
    /// Elevated decay rate during the pulse (omega_m units).
    pub kappa_pulse: f64,
}

impl Pulse {
    pub fn end(&self) -> f64 {
        self.t_start + self.duration
    }
}

/// How the schedule was constructed; `Off` guarantees the degenerate
/// schedule reproduces the unmodulated integrator path exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    Off,
    Single,
    Periodic,
}

/// Piecewise-constant kappa(t): the base rate outside pulses, elevated inside.
/// Right-continuous at every edge.
#[derive(Debug, Clone)]
pub struct ModulationSchedule {
    kappa_base: f64,
    pulses: Vec<Pulse>,
    mode: ScheduleMode,
}

impl ModulationSchedule {
    /// No modulation at all.
    pub fn off(kappa_base: f64) -> Self {
        Self {
            kappa_base,
            pulses: Vec::new(),
            mode: ScheduleMode::Off,
        }
    }

    /// Validated schedule from an explicit pulse list.
    pub fn new(kappa_base: f64, mut pulses: Vec<Pulse>, mode: ScheduleMode) -> Result<Self> {
        if !(kappa_base > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kappa_base must be > 0, got {kappa_base}"
            )));
        }
        pulses.sort_by(|a, b| a.t_start.partial_cmp(&b.t_start).unwrap());
        for p in &pulses {
            if !(p.t_start >= 0.0) || !(p.duration > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "pulse at t = {} with duration {} is malformed",
                    p.t_start, p.duration
                )));
            }
            if p.kappa_pulse <= kappa_base {
                return Err(Error::InvalidInput(format!(
                    "kappa_pulse = {} must exceed kappa_base = {kappa_base}",
                    p.kappa_pulse
                )));
            }
        }
        if pulses.windows(2).any(|w| w[1].t_start < w[0].end()) {
            return Err(Error::InvalidInput("pulses overlap".into()));
        }
        if pulses.is_empty() && mode != ScheduleMode::Off {
            return Err(Error::InvalidInput(
                "non-off schedule with no pulses".into(),
            ));
        }
        Ok(Self {
            kappa_base,
            pulses,
            mode,
        })
    }

    /// Single pulse at the first Rabi minimum pi/(omega_plus - omega_minus),
    /// with the default height and area unless overridden.
    pub fn single_pulse(
        rp: &ReducedParams,
        kappa_pulse: Option<f64>,
        duration: Option<f64>,
    ) -> Result<Self> {
        let t0 = pulse_times(rp, 1)?[0];
        let height = kappa_pulse.unwrap_or(DEFAULT_PULSE_FACTOR * rp.kappa);
        let width = duration.unwrap_or(DEFAULT_PULSE_AREA / height);
        Self::new(
            rp.kappa,
            vec![Pulse {
                t_start: t0,
                duration: width,
                kappa_pulse: height,
            }],
            ScheduleMode::Single,
        )
    }

    /// Periodic train: the first pulse sits at pi/(omega_plus - omega_minus);
    /// each later pulse follows one full inter-pulse spacing after the
    /// previous pulse *ends*, restarting the Rabi phase clock at each pulse.
    pub fn periodic(
        rp: &ReducedParams,
        n_pulses: usize,
        kappa_pulse: Option<f64>,
        duration: Option<f64>,
    ) -> Result<Self> {
        if n_pulses == 0 {
            return Err(Error::InvalidInput(
                "periodic schedule needs n_pulses >= 1".into(),
            ));
        }
        let spacing = pulse_times(rp, 1)?[0];
        let height = kappa_pulse.unwrap_or(DEFAULT_PULSE_FACTOR * rp.kappa);
        let width = duration.unwrap_or(DEFAULT_PULSE_AREA / height);
        let mut pulses = Vec::with_capacity(n_pulses);
        let mut t = spacing;
        for _ in 0..n_pulses {
            pulses.push(Pulse {
                t_start: t,
                duration: width,
                kappa_pulse: height,
            });
            t += width + spacing;
        }
        Self::new(rp.kappa, pulses, ScheduleMode::Periodic)
    }

    pub fn kappa_base(&self) -> f64 {
        self.kappa_base
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    /// kappa at time `t` (right-continuous piecewise constant).
    pub fn kappa_at(&self, t: f64) -> f64 {
        for p in &self.pulses {
            if t >= p.t_start && t < p.end() {
                return p.kappa_pulse;
            }
        }
        self.kappa_base
    }

    /// Every kappa discontinuity in increasing order.
    fn edges(&self) -> Vec<f64> {
        let mut e = Vec::with_capacity(2 * self.pulses.len());
        for p in &self.pulses {
            e.push(p.t_start);
            e.push(p.end());
        }
        e
    }
}

/// Build a schedule whose pulses sit on the *integrated* phonon minima:
/// starting from `initial`, each inter-pulse stretch is evolved at the base
/// rate, the minimum of n_b inside (0.5, 1.5) beat spacings is located, the
/// pulse is placed there, and the post-pulse state seeds the next stretch.
///
/// The rotating-wave instants (k+1) pi/(omega_plus - omega_minus) of
/// [`pulse_times`] run a few percent early: the coherence build-up after
/// each photon dump delays the true minimum, and firing on the formula time
/// strands the tail of the swap in the mechanical mode.
pub fn schedule_at_minima(
    initial: &MomentState,
    rp: &ReducedParams,
    n_pulses: usize,
    kappa_pulse: Option<f64>,
    duration: Option<f64>,
) -> Result<ModulationSchedule> {
    if n_pulses == 0 {
        return Err(Error::InvalidInput("n_pulses must be >= 1".into()));
    }
    let spacing = pulse_times(rp, 1)?[0];
    let height = kappa_pulse.unwrap_or(DEFAULT_PULSE_FACTOR * rp.kappa);
    let width = duration.unwrap_or(DEFAULT_PULSE_AREA / height);

    let mut pulses = Vec::with_capacity(n_pulses);
    let mut state = *initial;
    let mut t_abs = 0.0;
    for _ in 0..n_pulses {
        // Fine scan of the next beat for the true minimum.
        let horizon = 1.5 * spacing;
        let n_scan = (horizon * 200.0).ceil() as usize;
        let scan = crate::covariance::evolve_with(
            &state,
            rp,
            horizon,
            &crate::covariance::EvolveOptions {
                dt_max: 0.01,
                n_samples: n_scan,
                allow_unstable: false,
            },
        )?;
        let (tau, _) = scan
            .min_in_window(0.5 * spacing, horizon)
            .ok_or_else(|| Error::InvalidInput("empty minimum-scan window".into()))?;
        let pulse = Pulse {
            t_start: t_abs + tau,
            duration: width,
            kappa_pulse: height,
        };
        // Step the state through this stretch including the pulse itself.
        let local = ModulationSchedule::new(
            rp.kappa,
            vec![Pulse {
                t_start: tau,
                ..pulse
            }],
            ScheduleMode::Single,
        )?;
        let seg = evolve_modulated_with(&state, rp, &local, tau + width, 0.01, 400)?;
        state = *seg.states.last().unwrap();
        t_abs += tau + width;
        pulses.push(pulse);
    }
    let mode = if n_pulses == 1 {
        ScheduleMode::Single
    } else {
        ScheduleMode::Periodic
    };
    ModulationSchedule::new(rp.kappa, pulses, mode)
}

/// Ideal pulse instants t_k = (k+1) pi/(omega_plus - omega_minus),
/// k = 0..n-1: the Rabi minima of the unmodulated strong-coupling evolution.
/// For small G the first pulse approaches pi/(2|G|).
pub fn pulse_times(rp: &ReducedParams, n_pulses: usize) -> Result<Vec<f64>> {
    if n_pulses == 0 {
        return Err(Error::InvalidInput("n_pulses must be >= 1".into()));
    }
    let (w_plus, w_minus) = normal_mode_freqs(rp)?;
    if w_plus == w_minus {
        return Err(Error::DomainError(
            "zero coupling: Rabi minima never occur".into(),
        ));
    }
    let spacing = std::f64::consts::PI / (w_plus - w_minus);
    Ok((1..=n_pulses).map(|k| k as f64 * spacing).collect())
}

/// Integrate the covariance equations with kappa replaced by the schedule's
/// kappa(t). Integration restarts cleanly at every kappa edge. With an `Off`
/// schedule this follows the exact same code path as [`crate::covariance::evolve`].
pub fn evolve_modulated(
    initial: &MomentState,
    rp: &ReducedParams,
    schedule: &ModulationSchedule,
    t_final: f64,
) -> Result<Trajectory> {
    evolve_modulated_with(initial, rp, schedule, t_final, 0.05, 2000)
}

/// [`evolve_modulated`] with explicit step cap and sample count.
pub fn evolve_modulated_with(
    initial: &MomentState,
    rp: &ReducedParams,
    schedule: &ModulationSchedule,
    t_final: f64,
    dt_max: f64,
    n_samples: usize,
) -> Result<Trajectory> {
    // Stability is assessed at the base rate; pulses only add dissipation.
    if !stability_check(&rp.with_kappa(schedule.kappa_base()))? {
        return Err(Error::UnstableParams);
    }
    let times = sample_grid(t_final, n_samples)?;

    // Build one generator per constant-kappa segment.
    let mut edge_times: Vec<f64> = schedule
        .edges()
        .into_iter()
        .filter(|&e| e < t_final)
        .collect();
    edge_times.insert(0, 0.0);
    let segments: Vec<Segment> = edge_times
        .iter()
        .map(|&t_edge| {
            let kappa_here = schedule.kappa_at(t_edge);
            Segment {
                start: t_edge,
                generator: MomentGenerator::new(&rp.with_kappa(kappa_here)),
                rate_scale: kappa_here.max(rp.detuning.abs()),
            }
        })
        .collect();

    let states = integrate_piecewise(initial.to_vector(), &segments, &times, dt_max)?;
    Ok(Trajectory {
        times,
        states,
        params: *rp,
    })
}

/// Instantaneous-state cooling limit
/// pi gamma n_th / (4|G|) + pi^2 |G|^4 / ((omega_m^2-|G|^2)(omega_m^2-4|G|^2)).
///
/// The quantum part is O(G^4): periodic re-initialization removes the
/// second-order backaction term that limits the steady-state scheme.
pub fn nins_limit(rp: &ReducedParams) -> Result<f64> {
    let g = rp.g_eff;
    if !(g > 0.0) {
        return Err(Error::DomainError(
            "instantaneous limit requires g_eff > 0".into(),
        ));
    }
    if 2.0 * g >= 1.0 {
        return Err(Error::DomainError(format!(
            "pole at 2|G| = omega_m (g_eff = {g})"
        )));
    }
    let g2 = g * g;
    let classical = std::f64::consts::PI * rp.gamma * rp.n_th / (4.0 * g);
    let quantum = std::f64::consts::PI.powi(2) * g2 * g2 / ((1.0 - g2) * (1.0 - 4.0 * g2));
    Ok(classical + quantum)
}

/// Coupling that satisfies the frequency-matching condition
/// (omega_plus + omega_minus)/(omega_plus - omega_minus) = k exactly:
/// g_eff = k/(k^2+1) in omega_m units.
pub fn matched_params(k: u32) -> Result<f64> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::InvalidK(k));
    }
    let kf = k as f64;
    Ok(kf / (kf * kf + 1.0))
}

/// Optimized instantaneous-state cooling limit at a frequency-matched point:
/// (pi kappa/(4|G|)) [gamma n_th/kappa + |G|^2/(2(omega_m^2 - 4|G|^2))],
/// a pi kappa/(4|G|)-fold reduction of both steady-state terms.
pub fn ninsmat_limit(rp: &ReducedParams) -> Result<f64> {
    let g = rp.g_eff;
    if !(g > 0.0) {
        return Err(Error::DomainError(
            "matched limit requires g_eff > 0".into(),
        ));
    }
    if 2.0 * g >= 1.0 {
        return Err(Error::DomainError(format!(
            "pole at 2|G| = omega_m (g_eff = {g})"
        )));
    }
    let reduction = std::f64::consts::PI * rp.kappa / (4.0 * g);
    let bracket = rp.gamma * rp.n_th / rp.kappa + g * g / (2.0 * (1.0 - 4.0 * g * g));
    Ok(reduction * bracket)
}

/// First-crossing comparison of a modulated and a reference trajectory
/// against a shared threshold.
#[derive(Debug, Clone, Copy)]
pub struct SpeedupReport {
    /// First crossing time of the modulated trajectory (NaN if never).
    pub t_modulated: f64,
    /// First crossing time of the reference trajectory (NaN if never).
    pub t_reference: f64,
    /// t_reference / t_modulated; 1 when both cross at the same instant,
    /// NaN when either never crosses.
    pub ratio: f64,
}

/// Measure how much sooner `modulated` reaches `threshold` than `reference`.
pub fn speedup_metric(
    modulated: &Trajectory,
    reference: &Trajectory,
    threshold: f64,
) -> SpeedupReport {
    let t_modulated = modulated.first_crossing(threshold).unwrap_or(f64::NAN);
    let t_reference = reference.first_crossing(threshold).unwrap_or(f64::NAN);
    let ratio = if t_modulated.is_nan() || t_reference.is_nan() {
        f64::NAN
    } else if t_modulated == t_reference {
        1.0
    } else {
        t_reference / t_modulated
    };
    SpeedupReport {
        t_modulated,
        t_reference,
        ratio,
    }
}

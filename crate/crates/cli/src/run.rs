//! Mode implementations: each builds a [`Table`] from the resolved
//! configuration; `main` owns I/O and exit codes.

use rayon::prelude::*;
use serde_json::Value;

use optocool::covariance::{
    evolve_expm, evolve_with, nstd_closed_form, steady_state_moments, EvolveOptions, MomentState,
};
use optocool::lindblad::{
    build_generator, evolve_rho, moments_from_rho, DensityMatrix, FockConfig,
};
use optocool::modulation::{
    evolve_modulated_with, nins_limit, ninsmat_limit, schedule_at_minima, ModulationSchedule,
    Pulse, ScheduleMode,
};
use optocool::params::{cooperativity, stability_check};
use optocool::spectra::{
    cooling_limit, default_grid, linear_grid, min_quantum_limit, scattering_rates, SpectrumSeries,
    SpectrumValues,
};
use optocool::{PhysicalParams, ReducedParams};

use crate::config::{apply_axis, parse_sweep_axis, Config, ConfigError};
use crate::output::{fmt_f64, num, Table};

pub enum CliError {
    Config(String),
    Engine(optocool::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use optocool::Error::*;
        match self {
            CliError::Config(_) => 2,
            CliError::Engine(e) => match e {
                InvalidInput(_) => 2,
                UnsupportedRegime(_) | UnstableParams | HeatingRegime | DomainError(_)
                | InvalidK(_) => 3,
                NoConvergence(_)
                | StepUnderflow { .. }
                | SingularSystem(_)
                | StepTooLarge { .. }
                | Physicality(_) => 4,
                BudgetExceeded { .. } | Truncation { .. } => 5,
            },
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Config(msg) => format!("config error: {msg}"),
            CliError::Engine(e) => e.to_string(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<optocool::Error> for CliError {
    fn from(e: optocool::Error) -> Self {
        CliError::Engine(e)
    }
}

fn base_meta(mode: &str, rp: &ReducedParams, si: &Option<PhysicalParams>) -> Vec<(String, String)> {
    let mut meta = vec![
        ("tool".to_string(), "optocool".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("mode".to_string(), mode.to_string()),
        ("kappa".to_string(), fmt_f64(rp.kappa)),
        ("gamma".to_string(), fmt_f64(rp.gamma)),
        ("g_eff".to_string(), fmt_f64(rp.g_eff)),
        ("detuning".to_string(), fmt_f64(rp.detuning)),
        ("n_th".to_string(), fmt_f64(rp.n_th)),
    ];
    if let Some(p) = si {
        meta.extend([
            ("si_omega_m".to_string(), fmt_f64(p.omega_m)),
            ("si_omega_c".to_string(), fmt_f64(p.omega_c)),
            ("si_omega_in".to_string(), fmt_f64(p.omega_in)),
            ("si_kappa_0".to_string(), fmt_f64(p.kappa_0)),
            ("si_kappa_ex".to_string(), fmt_f64(p.kappa_ex)),
            ("si_gamma".to_string(), fmt_f64(p.gamma)),
            ("si_g".to_string(), fmt_f64(p.g)),
            ("si_m_eff".to_string(), fmt_f64(p.m_eff)),
            ("si_power".to_string(), fmt_f64(p.power)),
            ("si_phase".to_string(), fmt_f64(p.phase)),
            ("si_temperature".to_string(), fmt_f64(p.temperature)),
        ]);
    }
    meta
}

/// The limits table shared by `limits` and `sweep`: (name, value) pairs in a
/// fixed order; out-of-domain entries are NaN.
fn limits_row(rp: &ReducedParams) -> Vec<(&'static str, Value)> {
    let rates = scattering_rates(rp);
    let stable = stability_check(rp).ok();
    let lim = cooling_limit(rp).ok();
    let min_q = min_quantum_limit(rp.kappa);
    let nstd = nstd_closed_form(rp).ok();
    let n_ins = nins_limit(rp).ok();
    let n_ins_opt = ninsmat_limit(rp).ok();
    let steady = steady_state_moments(rp).ok();
    vec![
        ("cooperativity", num(cooperativity(rp))),
        ("stable", stable.map(Value::Bool).unwrap_or(Value::Null)),
        ("gamma_opt", num(rates.gamma_opt)),
        ("spring_shift", num(rates.spring_shift)),
        ("a_minus", num(rates.a_minus)),
        ("a_plus", num(rates.a_plus)),
        ("n_f", num(lim.map(|l| l.n_f).unwrap_or(f64::NAN))),
        (
            "n_f_classical",
            num(lim.map(|l| l.n_classical).unwrap_or(f64::NAN)),
        ),
        (
            "n_f_quantum",
            num(lim.map(|l| l.n_quantum).unwrap_or(f64::NAN)),
        ),
        ("n_f_min_quantum", num(min_q.n_min)),
        ("detuning_opt", num(min_q.detuning_opt)),
        ("nstd_full", num(nstd.map(|n| n.full).unwrap_or(f64::NAN))),
        (
            "nstd_resolved",
            num(nstd.map(|n| n.resolved).unwrap_or(f64::NAN)),
        ),
        ("nstd_weak", num(nstd.map(|n| n.weak).unwrap_or(f64::NAN))),
        (
            "nstd_strong",
            num(nstd.map(|n| n.strong).unwrap_or(f64::NAN)),
        ),
        ("n_ins", num(n_ins.unwrap_or(f64::NAN))),
        ("n_ins_opt", num(n_ins_opt.unwrap_or(f64::NAN))),
        ("steady_n_b", num(steady.map(|s| s.n_b).unwrap_or(f64::NAN))),
        ("steady_n_a", num(steady.map(|s| s.n_a).unwrap_or(f64::NAN))),
    ]
}

pub fn run_limits(config: &Config) -> Result<Table, CliError> {
    let (rp, si) = config.resolve_system()?;
    let mut table = Table::new(base_meta("limits", &rp, &si), &["quantity", "value"]);
    for (name, value) in limits_row(&rp) {
        table.push_row(vec![Value::String(name.to_string()), value]);
    }
    Ok(table)
}

pub fn run_spectrum(config: &Config) -> Result<Table, CliError> {
    let (rp, si) = config.resolve_system()?;
    let kind = config.get_str("kind")?.unwrap_or("force");
    let grid = match (
        config.get_f64("omega_min")?,
        config.get_f64("omega_max")?,
        config.get_usize("points")?,
    ) {
        (None, None, None) => default_grid(&rp),
        (Some(lo), Some(hi), points) => {
            if !(hi > lo) {
                return Err(CliError::Config("omega_max must exceed omega_min".into()));
            }
            linear_grid(lo, hi, points.unwrap_or(2001))
        }
        _ => {
            return Err(CliError::Config(
                "grid override needs both omega_min and omega_max".into(),
            ))
        }
    };
    let mut meta = base_meta("spectrum", &rp, &si);
    meta.push(("kind".to_string(), kind.to_string()));
    let series = match kind {
        "force" => SpectrumSeries::force(grid, &rp)?,
        "mechanical" => SpectrumSeries::mechanical(grid, &rp)?,
        "self_energy" => SpectrumSeries::self_energy(grid, &rp)?,
        other => {
            return Err(CliError::Config(format!(
                "kind '{other}' is not one of force|mechanical|self_energy"
            )))
        }
    };
    let table = match &series.values {
        SpectrumValues::Real(values) => {
            let mut t = Table::new(meta, &["omega", "value"]);
            for (w, v) in series.omegas.iter().zip(values) {
                t.push_row(vec![num(*w), num(*v)]);
            }
            t
        }
        SpectrumValues::Complex(values) => {
            let mut t = Table::new(meta, &["omega", "re", "im"]);
            for (w, v) in series.omegas.iter().zip(values) {
                t.push_row(vec![num(*w), num(v.re), num(v.im)]);
            }
            t
        }
    };
    Ok(table)
}

const TRAJECTORY_COLUMNS: &[&str] = &[
    "t",
    "n_a",
    "n_b",
    "re_adag_b",
    "im_adag_b",
    "re_a_b",
    "im_a_b",
    "re_a_sq",
    "im_a_sq",
    "re_b_sq",
    "im_b_sq",
];

fn state_cells(t: f64, s: &MomentState) -> Vec<Value> {
    vec![
        num(t),
        num(s.n_a),
        num(s.n_b),
        num(s.adag_b.re),
        num(s.adag_b.im),
        num(s.a_b.re),
        num(s.a_b.im),
        num(s.a_sq.re),
        num(s.a_sq.im),
        num(s.b_sq.re),
        num(s.b_sq.im),
    ]
}

fn initial_state(config: &Config, rp: &ReducedParams) -> Result<MomentState, CliError> {
    let n_b0 = config.get_f64("initial_n_b")?.unwrap_or(rp.n_th);
    if n_b0 < 0.0 {
        return Err(CliError::Config(format!(
            "initial_n_b must be >= 0, got {n_b0}"
        )));
    }
    Ok(MomentState::thermal(n_b0))
}

pub fn run_evolve(config: &Config) -> Result<Table, CliError> {
    let (rp, si) = config.resolve_system()?;
    let t_final = config.require_f64("t_final")?;
    let dt_max = config.get_f64("dt_max")?.unwrap_or(0.05);
    let samples = config.get_usize("samples")?.unwrap_or(2000);
    let backend = config.get_str("backend")?.unwrap_or("rk45");
    let allow_unstable = matches!(config.get_str("allow_unstable")?, Some("true"));
    if allow_unstable {
        eprintln!("optocool: warning: integrating past the stability check (allow_unstable)");
    }
    let initial = initial_state(config, &rp)?;
    let traj = match backend {
        "rk45" => evolve_with(
            &initial,
            &rp,
            t_final,
            &EvolveOptions {
                dt_max,
                n_samples: samples,
                allow_unstable,
            },
        )?,
        "expm" => evolve_expm(&initial, &rp, t_final, samples)?,
        other => {
            return Err(CliError::Config(format!(
                "backend '{other}' is not rk45|expm"
            )))
        }
    };
    let mut meta = base_meta("evolve", &rp, &si);
    meta.extend([
        ("t_final".to_string(), fmt_f64(t_final)),
        ("samples".to_string(), samples.to_string()),
        ("backend".to_string(), backend.to_string()),
        ("initial_n_b".to_string(), fmt_f64(initial.n_b)),
    ]);
    let mut table = Table::new(meta, TRAJECTORY_COLUMNS);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        table.push_row(state_cells(*t, s));
    }
    Ok(table)
}

fn build_schedule(
    config: &Config,
    rp: &ReducedParams,
    initial: &MomentState,
) -> Result<ModulationSchedule, CliError> {
    // Explicit pulse records win over any generated schedule.
    let records = config.pulse_records()?;
    if !records.is_empty() {
        let pulses = records
            .into_iter()
            .map(|(t_start, duration, kappa_pulse)| Pulse {
                t_start,
                duration,
                kappa_pulse,
            })
            .collect();
        let mode = if config.get_str("schedule")?.unwrap_or("periodic") == "single" {
            ScheduleMode::Single
        } else {
            ScheduleMode::Periodic
        };
        return Ok(ModulationSchedule::new(rp.kappa, pulses, mode)?);
    }

    let schedule_kind = config.get_str("schedule")?.unwrap_or("single");
    let kappa_pulse = config.get_f64("kappa_pulse")?;
    let duration = config.get_f64("pulse_duration")?;
    let timing = config.get_str("pulse_timing")?.unwrap_or("minima");
    if schedule_kind == "off" {
        return Ok(ModulationSchedule::off(rp.kappa));
    }
    let n_pulses = match schedule_kind {
        "single" => 1,
        "periodic" => config.get_usize("n_pulses")?.unwrap_or(8),
        other => {
            return Err(CliError::Config(format!(
                "schedule '{other}' is not off|single|periodic"
            )))
        }
    };
    match timing {
        "minima" => Ok(schedule_at_minima(
            initial,
            rp,
            n_pulses,
            kappa_pulse,
            duration,
        )?),
        "formula" if n_pulses == 1 => {
            Ok(ModulationSchedule::single_pulse(rp, kappa_pulse, duration)?)
        }
        "formula" => Ok(ModulationSchedule::periodic(
            rp,
            n_pulses,
            kappa_pulse,
            duration,
        )?),
        other => Err(CliError::Config(format!(
            "pulse_timing '{other}' is not minima|formula"
        ))),
    }
}

pub fn run_modulate(config: &Config) -> Result<Table, CliError> {
    let (rp, si) = config.resolve_system()?;
    let t_final = config.require_f64("t_final")?;
    let dt_max = config.get_f64("dt_max")?.unwrap_or(0.02);
    let samples = config.get_usize("samples")?.unwrap_or(2000);
    let initial = initial_state(config, &rp)?;
    let schedule = build_schedule(config, &rp, &initial)?;
    let traj = evolve_modulated_with(&initial, &rp, &schedule, t_final, dt_max, samples)?;

    let mut meta = base_meta("modulate", &rp, &si);
    meta.extend([
        ("t_final".to_string(), fmt_f64(t_final)),
        ("samples".to_string(), samples.to_string()),
        (
            "schedule".to_string(),
            format!("{:?}", schedule.mode()).to_lowercase(),
        ),
        ("n_pulses".to_string(), schedule.pulses().len().to_string()),
    ]);
    for (k, p) in schedule.pulses().iter().enumerate() {
        meta.push((
            format!("pulse_{k}"),
            format!(
                "{},{},{}",
                fmt_f64(p.t_start),
                fmt_f64(p.duration),
                fmt_f64(p.kappa_pulse)
            ),
        ));
    }

    let mut columns: Vec<&str> = TRAJECTORY_COLUMNS.to_vec();
    columns.push("kappa");
    let mut table = Table::new(meta, &columns);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = state_cells(*t, s);
        row.push(num(schedule.kappa_at(*t)));
        table.push_row(row);
    }
    Ok(table)
}

pub fn run_oracle(config: &Config) -> Result<Table, CliError> {
    let (rp, si) = config.resolve_system()?;
    let t_final = config.require_f64("t_final")?;
    let dim_a = config.get_usize("dim_a")?.unwrap_or(10);
    let dim_b = config.get_usize("dim_b")?.unwrap_or(20);
    let budget = config
        .get_usize("budget")?
        .unwrap_or(FockConfig::DEFAULT_BUDGET);
    let dt_default = 0.01 / rp.kappa.max(1.0);
    let dt = config.get_f64("dt")?.unwrap_or(dt_default);
    let snapshots = config.get_usize("snapshots")?.unwrap_or(100);

    let cfg = FockConfig::with_budget(dim_a, dim_b, budget)?;
    let generator = build_generator(&rp, cfg)?;
    let rho0 = DensityMatrix::thermal(cfg, 0.0, rp.n_th);
    let run = evolve_rho(&rho0, &generator, &rp, t_final, dt, snapshots)?;

    if let Some(path) = config.get_str("dump_rho")? {
        dump_rho(path, run.snapshots.last().unwrap())
            .map_err(|e| CliError::Config(format!("dump_rho '{path}': {e}")))?;
    }

    let mut meta = base_meta("oracle", &rp, &si);
    meta.extend([
        ("t_final".to_string(), fmt_f64(t_final)),
        ("dim_a".to_string(), dim_a.to_string()),
        ("dim_b".to_string(), dim_b.to_string()),
        ("dt".to_string(), fmt_f64(dt)),
        (
            "trace_correction".to_string(),
            fmt_f64(run.trace_correction),
        ),
    ]);
    let mut table = Table::new(meta, TRAJECTORY_COLUMNS);
    for (t, rho) in run.times.iter().zip(&run.snapshots) {
        table.push_row(state_cells(*t, &moments_from_rho(rho)));
    }
    Ok(table)
}

/// Plain-text complex-matrix dump: a size header, then one `row col re im`
/// line per entry in row-major order (photon (x) phonon mode ordering).
fn dump_rho(path: &str, rho: &DensityMatrix) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let d = rho.cfg.dim();
    writeln!(f, "# optocool density matrix dump")?;
    writeln!(
        f,
        "# dim_a = {}, dim_b = {}, side = {d}",
        rho.cfg.dim_a, rho.cfg.dim_b
    )?;
    writeln!(
        f,
        "# index = photon * dim_b + phonon; entries: row col re im"
    )?;
    for r in 0..d {
        for c in 0..d {
            let v = rho.entries[r * d + c];
            writeln!(f, "{r} {c} {} {}", fmt_f64(v.re), fmt_f64(v.im))?;
        }
    }
    Ok(())
}

pub fn run_sweep(config: &Config) -> Result<Table, CliError> {
    let (rp, si) = config.resolve_system()?;
    let axis1 = parse_sweep_axis(config, "sweep1")?
        .ok_or_else(|| CliError::Config("sweep mode requires key 'sweep1'".into()))?;
    let axis2 = parse_sweep_axis(config, "sweep2")?;

    // Lexicographic point list: axis1 outer, axis2 inner.
    let points: Vec<(f64, Option<f64>)> = match &axis2 {
        None => axis1.values.iter().map(|&v| (v, None)).collect(),
        Some(a2) => axis1
            .values
            .iter()
            .flat_map(|&v1| a2.values.iter().map(move |&v2| (v1, Some(v2))))
            .collect(),
    };

    let apply_point = |v1: f64, v2: Option<f64>| -> Result<ReducedParams, ConfigError> {
        let rp1 = apply_axis(&rp, &axis1.name, v1)?;
        match (&axis2, v2) {
            (Some(a2), Some(v2)) => apply_axis(&rp1, &a2.name, v2),
            _ => Ok(rp1),
        }
    };

    // Parallel evaluation; collect preserves the deterministic point order.
    let rows: Vec<Result<Vec<Value>, ConfigError>> = points
        .par_iter()
        .map(|&(v1, v2)| {
            let rp_point = apply_point(v1, v2)?;
            let mut row = vec![num(v1)];
            if let Some(v2) = v2 {
                row.push(num(v2));
            }
            row.extend(limits_row(&rp_point).into_iter().map(|(_, value)| value));
            Ok(row)
        })
        .collect();

    let mut columns: Vec<String> = vec![axis1.name.clone()];
    if let Some(a2) = &axis2 {
        columns.push(a2.name.clone());
    }
    columns.extend(limits_row(&rp).iter().map(|(name, _)| name.to_string()));
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();

    let mut meta = base_meta("sweep", &rp, &si);
    meta.push((
        "sweep1".to_string(),
        format!("{} ({} points)", axis1.name, axis1.values.len()),
    ));
    if let Some(a2) = &axis2 {
        meta.push((
            "sweep2".to_string(),
            format!("{} ({} points)", a2.name, a2.values.len()),
        ));
    }
    let mut table = Table::new(meta, &column_refs);
    for row in rows {
        table.push_row(row?);
    }
    Ok(table)
}

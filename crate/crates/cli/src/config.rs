//! Flat key-value run configuration.
//!
//! One `key = value` pair per line, `#` starts a comment. Keys may repeat
//! only where documented (the `pulse` records). A file describes either an
//! SI system (detected by the presence of `omega_m`, all SI keys required)
//! or a reduced system (`kappa`, `gamma`, `g_eff`, `detuning`, `n_th` in
//! units of the mechanical frequency). `--set key=value` entries override
//! file values.

use std::collections::BTreeMap;
use std::fmt;

use optocool::{PhysicalParams, ReducedParams};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

const SI_KEYS: &[&str] = &[
    "omega_m",
    "omega_c",
    "omega_in",
    "kappa_0",
    "kappa_ex",
    "gamma",
    "g",
    "m_eff",
    "power",
    "phase",
    "temperature",
];
const REDUCED_KEYS: &[&str] = &["kappa", "gamma", "g_eff", "detuning", "n_th"];

/// Parsed configuration: ordered key -> values (repeats preserved in order).
#[derive(Debug, Default, Clone)]
pub struct Config {
    entries: BTreeMap<String, Vec<String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError(format!("line {}: empty key", lineno + 1)));
            }
            entries
                .entry(key.to_string())
                .or_default()
                .push(value.trim().to_string());
        }
        Ok(Self { entries })
    }

    /// Apply a `--set key=value` override, replacing any file value.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("--set '{assignment}': expected key=value")))?;
        self.entries
            .insert(key.trim().to_string(), vec![value.trim().to_string()]);
        Ok(())
    }

    fn single(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) if v.len() == 1 => Ok(Some(v[0].as_str())),
            Some(v) => Err(ConfigError(format!("key '{key}' given {} times", v.len()))),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.single(key)? {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| ConfigError(format!("key '{key}': '{s}' is not a number"))),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.get_f64(key)?
            .ok_or_else(|| ConfigError(format!("missing required key '{key}'")))
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.single(key)? {
            None => Ok(None),
            Some(s) => s
                .parse::<usize>()
                .map(Some)
                .map_err(|_| ConfigError(format!("key '{key}': '{s}' is not a count"))),
        }
    }

    pub fn get_str(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        self.single(key)
    }

    pub fn repeated(&self, key: &str) -> &[String] {
        self.entries.get(key).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// SI mode when `omega_m` is present; reduced mode otherwise.
    pub fn is_si(&self) -> bool {
        self.has("omega_m")
    }

    pub fn physical_params(&self) -> Result<PhysicalParams, ConfigError> {
        for key in SI_KEYS {
            if !self.has(key) {
                return Err(ConfigError(format!("SI system block: missing key '{key}'")));
            }
        }
        Ok(PhysicalParams {
            omega_m: self.require_f64("omega_m")?,
            omega_c: self.require_f64("omega_c")?,
            omega_in: self.require_f64("omega_in")?,
            kappa_0: self.require_f64("kappa_0")?,
            kappa_ex: self.require_f64("kappa_ex")?,
            gamma: self.require_f64("gamma")?,
            g: self.require_f64("g")?,
            m_eff: self.require_f64("m_eff")?,
            power: self.require_f64("power")?,
            phase: self.require_f64("phase")?,
            temperature: self.require_f64("temperature")?,
        })
    }

    pub fn reduced_params(&self) -> Result<ReducedParams, ConfigError> {
        for key in REDUCED_KEYS {
            if !self.has(key) {
                return Err(ConfigError(format!(
                    "reduced system block: missing key '{key}' (units of omega_m)"
                )));
            }
        }
        ReducedParams::new(
            self.require_f64("kappa")?,
            self.require_f64("gamma")?,
            self.require_f64("g_eff")?,
            self.require_f64("detuning")?,
            self.require_f64("n_th")?,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    /// Resolve the system description to reduced parameters, plus the SI
    /// block (when given) for the output header.
    pub fn resolve_system(&self) -> Result<(ReducedParams, Option<PhysicalParams>), ConfigError> {
        if self.is_si() {
            let p = self.physical_params()?;
            let rp = p.to_reduced().map_err(|e| ConfigError(e.to_string()))?;
            Ok((rp, Some(p)))
        } else {
            Ok((self.reduced_params()?, None))
        }
    }

    /// Pulse records `pulse = t_start,duration,kappa_pulse`, repeatable.
    pub fn pulse_records(&self) -> Result<Vec<(f64, f64, f64)>, ConfigError> {
        let mut out = Vec::new();
        for record in self.repeated("pulse") {
            let parts: Vec<&str> = record.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(ConfigError(format!(
                    "pulse record '{record}': expected t_start,duration,kappa_pulse"
                )));
            }
            let mut nums = [0.0; 3];
            for (slot, part) in nums.iter_mut().zip(&parts) {
                *slot = part.parse::<f64>().map_err(|_| {
                    ConfigError(format!("pulse record '{record}': bad number '{part}'"))
                })?;
            }
            out.push((nums[0], nums[1], nums[2]));
        }
        Ok(out)
    }
}

/// A single sweep axis: `sweep1 = name,min,max,points,linear|log`.
#[derive(Debug, Clone)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

pub fn parse_sweep_axis(config: &Config, key: &str) -> Result<Option<SweepAxis>, ConfigError> {
    let Some(descriptor) = config.get_str(key)? else {
        return Ok(None);
    };
    let parts: Vec<&str> = descriptor.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(ConfigError(format!(
            "key '{key}': expected name,min,max,points,linear|log"
        )));
    }
    let name = parts[0].to_string();
    if !REDUCED_KEYS.contains(&name.as_str()) {
        return Err(ConfigError(format!(
            "key '{key}': unknown sweep parameter '{name}' (one of {REDUCED_KEYS:?})"
        )));
    }
    let min: f64 = parts[1]
        .parse()
        .map_err(|_| ConfigError(format!("key '{key}': bad min '{}'", parts[1])))?;
    let max: f64 = parts[2]
        .parse()
        .map_err(|_| ConfigError(format!("key '{key}': bad max '{}'", parts[2])))?;
    let points: usize = parts[3]
        .parse()
        .map_err(|_| ConfigError(format!("key '{key}': bad point count '{}'", parts[3])))?;
    if points < 1 {
        return Err(ConfigError(format!("key '{key}': need at least 1 point")));
    }
    let values = match parts[4] {
        "linear" => (0..points)
            .map(|i| {
                if points == 1 {
                    min
                } else {
                    min + (max - min) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
        "log" => {
            if min <= 0.0 || max <= 0.0 {
                return Err(ConfigError(format!(
                    "key '{key}': log axis needs positive bounds"
                )));
            }
            (0..points)
                .map(|i| {
                    if points == 1 {
                        min
                    } else {
                        (min.ln() + (max.ln() - min.ln()) * i as f64 / (points - 1) as f64).exp()
                    }
                })
                .collect()
        }
        other => {
            return Err(ConfigError(format!(
                "key '{key}': spacing must be linear or log, got '{other}'"
            )))
        }
    };
    Ok(Some(SweepAxis { name, values }))
}

/// Apply a sweep-axis value to a parameter set.
pub fn apply_axis(
    rp: &ReducedParams,
    name: &str,
    value: f64,
) -> Result<ReducedParams, ConfigError> {
    let mut kappa = rp.kappa;
    let mut gamma = rp.gamma;
    let mut g_eff = rp.g_eff;
    let mut detuning = rp.detuning;
    let mut n_th = rp.n_th;
    match name {
        "kappa" => kappa = value,
        "gamma" => gamma = value,
        "g_eff" => g_eff = value,
        "detuning" => detuning = value,
        "n_th" => n_th = value,
        other => return Err(ConfigError(format!("unknown sweep parameter '{other}'"))),
    }
    ReducedParams::new(kappa, gamma, g_eff, detuning, n_th).map_err(|e| ConfigError(e.to_string()))
}

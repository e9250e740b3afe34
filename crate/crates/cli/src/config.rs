use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use qprobe::bath::{BathModel, SpectralDensity};
use qprobe::dynamics::OhmicConfig;
use qprobe::qfi::BlochState;

use crate::error::CliError;

/// Which dynamics drives the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// High-temperature, wide-cutoff Ohmic bath with the closed-form rate
    /// γ(t) = (λ/β) arctan(ω_c t).
    Ohmic,
    /// Full TCL2 generator with Γ(ς, t) computed by quadrature.
    Tcl2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub lambda: f64,
    pub beta: f64,
    pub omega_c: f64,
    pub omega0: f64,
    pub theta_coupling: f64,
    pub secular: bool,
    pub high_temperature: bool,
    pub wide_cutoff: bool,
    pub semigroup: bool,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub n: u64,
    pub n_min: u64,
    pub n_max: u64,
    pub n_per_decade: usize,
    pub fit_min: f64,
    pub fit_max: f64,
    pub state_theta: f64,
    pub state_phi: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: Model::Ohmic,
            lambda: 0.05,
            beta: 1.0,
            omega_c: 10.0,
            omega0: 1.0,
            theta_coupling: 0.0,
            secular: false,
            high_temperature: true,
            wide_cutoff: true,
            semigroup: false,
            t_min: 1e-4,
            t_max: 130.0,
            t_points: 400,
            n: 100,
            n_min: 10,
            n_max: 10_000,
            n_per_decade: 25,
            fit_min: 1e3,
            fit_max: 1e4,
            state_theta: PI / 2.0,
            state_phi: 0.0,
            seed: 0x5eed,
            output: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "model",
    "lambda",
    "beta",
    "lambda_over_beta",
    "omega_c",
    "omega0",
    "theta_coupling",
    "secular",
    "high_temperature",
    "wide_cutoff",
    "semigroup",
    "t_min",
    "t_max",
    "t_points",
    "n",
    "n_min",
    "n_max",
    "n_per_decade",
    "fit_min",
    "fit_max",
    "state_theta",
    "state_phi",
    "seed",
    "output",
];

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got {raw:?}", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses a `key=value` override from the command line.
pub fn parse_override(s: &str) -> Result<(String, String), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override must look like key=value, got {s:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// A real number, optionally written with `pi`: `0.3`, `pi/100`, `2*pi/3`, `-pi`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coef = match num {
        "pi" => 1.0,
        "-pi" => -1.0,
        _ => {
            let (c, p) = num.split_once('*')?;
            if p.trim() != "pi" {
                return None;
            }
            c.trim().parse::<f64>().ok()?
        }
    };
    Some(coef * PI / den)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

impl ExperimentConfig {
    /// Applies pairs in order; later pairs win. `lambda_over_beta` is applied
    /// last so it can be combined with any `beta`.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Config(format!("unknown key {k:?}")));
            }
            map.insert(k.as_str(), v.as_str());
        }
        let mut cfg = ExperimentConfig::default();
        let bad = |k: &str, v: &str| CliError::Config(format!("invalid value for {k}: {v:?}"));
        let real = |k: &str, v: &str| parse_real(v).ok_or_else(|| bad(k, v));
        let flag = |k: &str, v: &str| parse_bool(v).ok_or_else(|| bad(k, v));
        let count = |k: &str, v: &str| v.parse::<u64>().map_err(|_| bad(k, v));
        for (&k, &v) in &map {
            match k {
                "model" => {
                    cfg.model = match v {
                        "ohmic" => Model::Ohmic,
                        "tcl2" => Model::Tcl2,
                        _ => return Err(bad(k, v)),
                    }
                }
                "lambda" => cfg.lambda = real(k, v)?,
                "beta" => cfg.beta = real(k, v)?,
                "lambda_over_beta" => {}
                "omega_c" => cfg.omega_c = real(k, v)?,
                "omega0" => cfg.omega0 = real(k, v)?,
                "theta_coupling" => cfg.theta_coupling = real(k, v)?,
                "secular" => cfg.secular = flag(k, v)?,
                "high_temperature" => cfg.high_temperature = flag(k, v)?,
                "wide_cutoff" => cfg.wide_cutoff = flag(k, v)?,
                "semigroup" => cfg.semigroup = flag(k, v)?,
                "t_min" => cfg.t_min = real(k, v)?,
                "t_max" => cfg.t_max = real(k, v)?,
                "t_points" => cfg.t_points = count(k, v)? as usize,
                "n" => cfg.n = count(k, v)?,
                "n_min" => cfg.n_min = count(k, v)?,
                "n_max" => cfg.n_max = count(k, v)?,
                "n_per_decade" => cfg.n_per_decade = count(k, v)? as usize,
                "fit_min" => cfg.fit_min = real(k, v)?,
                "fit_max" => cfg.fit_max = real(k, v)?,
                "state_theta" => cfg.state_theta = real(k, v)?,
                "state_phi" => cfg.state_phi = real(k, v)?,
                "seed" => cfg.seed = count(k, v)?,
                "output" => cfg.output = Some(PathBuf::from(v)),
                _ => unreachable!("keys are checked above"),
            }
        }
        if let Some(&v) = map.get("lambda_over_beta") {
            cfg.lambda = real("lambda_over_beta", v)? * cfg.beta;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        let positive = [("beta", self.beta), ("omega_c", self.omega_c), ("t_min", self.t_min)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be non-negative, got {}", self.lambda));
        }
        for (name, v) in [("omega0", self.omega0), ("theta_coupling", self.theta_coupling), ("lambda", self.lambda)] {
            if !v.is_finite() {
                return fail(format!("{name} must be finite"));
            }
        }
        if !(self.t_max > self.t_min && self.t_max.is_finite()) {
            return fail(format!("need t_min < t_max, got [{}, {}]", self.t_min, self.t_max));
        }
        if self.t_points < 2 {
            return fail("t_points must be at least 2".into());
        }
        if self.n == 0 || self.n_min == 0 || self.n_max < self.n_min || self.n_per_decade == 0 {
            return fail("probe counts must satisfy 1 ≤ n, 1 ≤ n_min ≤ n_max, n_per_decade ≥ 1".into());
        }
        if !(self.fit_min > 0.0 && self.fit_max > self.fit_min) {
            return fail(format!("invalid fit window [{}, {}]", self.fit_min, self.fit_max));
        }
        if self.semigroup && !self.wide_cutoff {
            return fail("semigroup requires wide_cutoff".into());
        }
        if self.model == Model::Ohmic && !(self.high_temperature && self.wide_cutoff) {
            return fail("model = ohmic is the high-temperature wide-cutoff limit; use model = tcl2 otherwise".into());
        }
        if self.model == Model::Tcl2 && self.semigroup {
            return fail("semigroup is only available with model = ohmic".into());
        }
        if !(self.state_theta.is_finite() && self.state_phi.is_finite()) {
            return fail("state angles must be finite".into());
        }
        Ok(())
    }

    pub fn ohmic(&self) -> OhmicConfig {
        OhmicConfig {
            lambda_over_beta: self.lambda / self.beta,
            omega_c: self.omega_c,
            omega0: self.omega0,
            theta_coupling: self.theta_coupling,
            secular: self.secular,
            semigroup: self.semigroup,
        }
    }

    pub fn bath(&self) -> Result<BathModel, CliError> {
        let spectral = SpectralDensity::ohmic(self.lambda, self.omega_c)?;
        Ok(BathModel::new(spectral, self.beta)?
            .high_temperature(self.high_temperature)
            .wide_cutoff(self.wide_cutoff))
    }

    pub fn state(&self) -> BlochState {
        BlochState::pure(self.state_theta, self.state_phi)
    }

    /// The same experiment with the secular flag forced on.
    pub fn secular_counterpart(&self) -> Self {
        ExperimentConfig { secular: true, ..self.clone() }
    }

    /// Renders the configuration in the file format it was read from.
    pub fn to_text(&self) -> String {
        let model = match self.model {
            Model::Ohmic => "ohmic",
            Model::Tcl2 => "tcl2",
        };
        let mut out = format!("model = {model}\n");
        let reals = [
            ("lambda", self.lambda),
            ("beta", self.beta),
            ("omega_c", self.omega_c),
            ("omega0", self.omega0),
            ("theta_coupling", self.theta_coupling),
            ("t_min", self.t_min),
            ("t_max", self.t_max),
            ("fit_min", self.fit_min),
            ("fit_max", self.fit_max),
            ("state_theta", self.state_theta),
            ("state_phi", self.state_phi),
        ];
        for (k, v) in reals {
            out += &format!("{k} = {v:e}\n");
        }
        let flags = [
            ("secular", self.secular),
            ("high_temperature", self.high_temperature),
            ("wide_cutoff", self.wide_cutoff),
            ("semigroup", self.semigroup),
        ];
        for (k, v) in flags {
            out += &format!("{k} = {v}\n");
        }
        let counts = [
            ("t_points", self.t_points as u64),
            ("n", self.n),
            ("n_min", self.n_min),
            ("n_max", self.n_max),
            ("n_per_decade", self.n_per_decade as u64),
            ("seed", self.seed),
        ];
        for (k, v) in counts {
            out += &format!("{k} = {v}\n");
        }
        out
    }
}

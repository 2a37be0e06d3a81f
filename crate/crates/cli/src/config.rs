//! Experiment configuration: a flat `key = value` file, overridable from the
//! command line.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Caption pulse parameters of the half-gate figure.
pub const CAPTION_ALPHA: f64 = 1.0;
pub const CAPTION_WIDTH: f64 = 20.0;
pub const CAPTION_CENTERS: [f64; 4] = [50.0, 100.0, 140.0, 190.0];

/// Double loop with the caption amplitude and width.
pub const DOUBLE_FIRST_CENTER: f64 = 50.0;
pub const DOUBLE_SPACING: f64 = 55.0;

/// Full gate: the double-loop shape (centers at 2.5T + 2.75T·k) with α/ξ ≪ 1
/// at ξ = 16 and pulse area αT = 40, enough to keep the transfer adiabatic
/// under ±10% timing jitter.
pub const GATE_ALPHA: f64 = 5e-4;
pub const GATE_WIDTH: f64 = 8e4;
pub const GATE_FIRST_CENTER: f64 = 2e5;
pub const GATE_SPACING: f64 = 2.2e5;

pub const GATE_HALF_XI: f64 = 4.0;
pub const GATE_FULL_XI: f64 = 16.0;
pub const XI_SCAN: [f64; 5] = [4.0, 8.0, 16.0, 32.0, 64.0];
pub const ROBUSTNESS_RUNS: usize = 100;

pub const SPIN_J: f64 = 1.0;
pub const SPIN_OMEGA: f64 = 1.0;
pub const SPIN_SEGMENT: f64 = 100.0;
pub const SPIN_STEP: f64 = 0.05;

/// Largest relative jitter accepted.
pub const MAX_JITTER: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    SpinDemo,
    TripodCycle,
    TripodDouble,
    GateHalf,
    GateFull,
    XiScan,
    Robustness,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::SpinDemo,
        Experiment::TripodCycle,
        Experiment::TripodDouble,
        Experiment::GateHalf,
        Experiment::GateFull,
        Experiment::XiScan,
        Experiment::Robustness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SpinDemo => "spin-demo",
            Experiment::TripodCycle => "tripod-cycle",
            Experiment::TripodDouble => "tripod-double",
            Experiment::GateHalf => "gate-half",
            Experiment::GateFull => "gate-full",
            Experiment::XiScan => "xi-scan",
            Experiment::Robustness => "robustness",
        }
    }

    /// Experiments driven by the seven-pulse double loop.
    pub fn uses_full_cycle(self) -> bool {
        matches!(
            self,
            Experiment::TripodDouble | Experiment::GateFull | Experiment::Robustness
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::config(format!("unknown experiment `{s}`")))
    }
}

/// Initial state of the tripod experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TripodInitial {
    Two,
    Three,
    /// (|3⟩ + i|2⟩)/√2
    Plus,
    /// (|3⟩ − i|2⟩)/√2
    Minus,
}

impl TripodInitial {
    pub fn name(self) -> &'static str {
        match self {
            TripodInitial::Two => "2",
            TripodInitial::Three => "3",
            TripodInitial::Plus => "plus",
            TripodInitial::Minus => "minus",
        }
    }
}

impl FromStr for TripodInitial {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "2" => Ok(TripodInitial::Two),
            "3" => Ok(TripodInitial::Three),
            "plus" | "+" => Ok(TripodInitial::Plus),
            "minus" | "-" => Ok(TripodInitial::Minus),
            _ => Err(CliError::config(format!(
                "unknown initial state `{s}` (expected 2, 3, plus or minus)"
            ))),
        }
    }
}

/// Relative half-widths of the uniform multiplicative jitter. Timing jitter is
/// relative to the pulse spacing.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JitterSpec {
    pub amplitude: f64,
    pub timing: f64,
    pub width: f64,
    pub xi: f64,
}

impl JitterSpec {
    pub fn uniform(r: f64) -> Self {
        JitterSpec {
            amplitude: r,
            timing: r,
            width: r,
            xi: r,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == JitterSpec::default()
    }

    fn validate(&self) -> CliResult<()> {
        for (name, v) in self.fields() {
            if !(0.0..=MAX_JITTER).contains(&v) {
                return Err(CliError::config(format!(
                    "jitter `{name}` = {v} outside [0, {MAX_JITTER}]"
                )));
            }
        }
        Ok(())
    }

    pub fn fields(&self) -> [(&'static str, f64); 4] {
        [
            ("amplitude", self.amplitude),
            ("timing", self.timing),
            ("width", self.width),
            ("xi", self.xi),
        ]
    }
}

impl fmt::Display for JitterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .fields()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for JitterSpec {
    type Err = CliError;

    /// `0.1` (all four) or `amplitude=0.1,timing=0.05,...`; unnamed fields
    /// stay zero.
    fn from_str(s: &str) -> CliResult<Self> {
        let s = s.trim();
        let spec = if let Ok(r) = s.parse::<f64>() {
            JitterSpec::uniform(r)
        } else {
            let mut spec = JitterSpec::default();
            for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| CliError::config(format!("bad jitter entry `{part}`")))?;
                let v = parse_f64("jitter", v)?;
                match k.trim() {
                    "amplitude" => spec.amplitude = v,
                    "timing" => spec.timing = v,
                    "width" => spec.width = v,
                    "xi" => spec.xi = v,
                    other => {
                        return Err(CliError::config(format!("unknown jitter field `{other}`")))
                    }
                }
            }
            spec
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Every field is optional so that a file and command-line flags can be
/// layered; unset fields fall back to per-experiment defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub alpha: Option<f64>,
    pub pulse_width: Option<f64>,
    pub centers: Option<Vec<f64>>,
    pub first_center: Option<f64>,
    pub spacing: Option<f64>,
    pub xi: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub stride: Option<usize>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub jitter: Option<JitterSpec>,
    pub out: Option<PathBuf>,
    pub spin_j: Option<f64>,
    pub omega: Option<f64>,
    pub segment_duration: Option<f64>,
    pub initial: Option<TripodInitial>,
    pub convergence_check: Option<bool>,
}

fn parse_f64(key: &str, v: &str) -> CliResult<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| CliError::config(format!("`{key}`: not a number: `{}`", v.trim())))
}

pub fn parse_list(key: &str, v: &str) -> CliResult<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}

fn parse_int<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| CliError::config(format!("`{key}`: not an integer: `{}`", v.trim())))
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(CliError::config(format!(
            "`{key}`: not a boolean: `{other}`"
        ))),
    }
}

impl ExperimentConfig {
    pub fn for_experiment(e: Experiment) -> Self {
        ExperimentConfig {
            experiment: Some(e),
            ..Default::default()
        }
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> CliResult<()> {
        match key {
            "experiment" => self.experiment = Some(v.parse()?),
            "alpha" => self.alpha = Some(parse_f64(key, v)?),
            "pulse_width" | "T" => self.pulse_width = Some(parse_f64(key, v)?),
            "centers" => self.centers = Some(parse_list(key, v)?),
            "first_center" => self.first_center = Some(parse_f64(key, v)?),
            "spacing" => self.spacing = Some(parse_f64(key, v)?),
            "xi" => self.xi = Some(parse_list(key, v)?),
            "step" => self.step = Some(parse_f64(key, v)?),
            "stride" => self.stride = Some(parse_int(key, v)?),
            "seed" => self.seed = Some(parse_int(key, v)?),
            "runs" => self.runs = Some(parse_int(key, v)?),
            "jitter" => self.jitter = Some(v.parse()?),
            "out" => self.out = Some(PathBuf::from(v)),
            "j" => self.spin_j = Some(parse_f64(key, v)?),
            "omega" => self.omega = Some(parse_f64(key, v)?),
            "segment_duration" => self.segment_duration = Some(parse_f64(key, v)?),
            "initial" => self.initial = Some(v.parse()?),
            "convergence_check" => self.convergence_check = Some(parse_bool(key, v)?),
            _ => return Err(CliError::config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if top.$f.is_some() { self.$f = top.$f; } )* };
        }
        take!(
            experiment,
            alpha,
            pulse_width,
            centers,
            first_center,
            spacing,
            xi,
            step,
            stride,
            seed,
            runs,
            jitter,
            out,
            spin_j,
            omega,
            segment_duration,
            initial,
            convergence_check
        );
        self
    }

    pub fn experiment(&self) -> CliResult<Experiment> {
        self.experiment
            .ok_or_else(|| CliError::config("no experiment selected"))
    }

    pub fn alpha(&self) -> CliResult<f64> {
        let e = self.experiment()?;
        let default = if matches!(e, Experiment::GateFull | Experiment::Robustness) {
            GATE_ALPHA
        } else {
            CAPTION_ALPHA
        };
        let a = self.alpha.unwrap_or(default);
        if !(a >= 0.0) || !a.is_finite() {
            return Err(CliError::config(format!(
                "alpha must be finite and ≥ 0, got {a}"
            )));
        }
        Ok(a)
    }

    pub fn pulse_width(&self) -> CliResult<f64> {
        let e = self.experiment()?;
        let default = if matches!(e, Experiment::GateFull | Experiment::Robustness) {
            GATE_WIDTH
        } else {
            CAPTION_WIDTH
        };
        positive("pulse_width", self.pulse_width.unwrap_or(default))
    }

    /// Pulse centers: explicit, or a uniform layout for the double loop.
    pub fn centers(&self) -> CliResult<Vec<f64>> {
        let e = self.experiment()?;
        let needed = if e.uses_full_cycle() { 7 } else { 4 };
        let centers = match &self.centers {
            Some(c) => c.clone(),
            None if e.uses_full_cycle() => {
                let (first, spacing) = self.uniform_layout()?;
                (0..7).map(|k| first + k as f64 * spacing).collect()
            }
            None => CAPTION_CENTERS.to_vec(),
        };
        if centers.len() != needed {
            return Err(CliError::config(format!(
                "{e} needs {needed} pulse centers, got {}",
                centers.len()
            )));
        }
        if centers.iter().any(|c| !c.is_finite()) || centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config(
                "pulse centers must be finite and strictly increasing",
            ));
        }
        Ok(centers)
    }

    fn uniform_layout(&self) -> CliResult<(f64, f64)> {
        let gate = matches!(
            self.experiment()?,
            Experiment::GateFull | Experiment::Robustness
        );
        let (f, s) = if gate {
            (GATE_FIRST_CENTER, GATE_SPACING)
        } else {
            (DOUBLE_FIRST_CENTER, DOUBLE_SPACING)
        };
        let first = self.first_center.unwrap_or(f);
        if !first.is_finite() {
            return Err(CliError::config("first_center must be finite"));
        }
        Ok((first, positive("spacing", self.spacing.unwrap_or(s))?))
    }

    /// Mean gap between consecutive centers; the unit of timing jitter.
    pub fn mean_spacing(&self) -> CliResult<f64> {
        let c = self.centers()?;
        Ok((c[c.len() - 1] - c[0]) / (c.len() - 1) as f64)
    }

    pub fn xi_list(&self) -> CliResult<Vec<f64>> {
        let e = self.experiment()?;
        let xs = match (&self.xi, e) {
            (Some(x), _) => x.clone(),
            (None, Experiment::XiScan) => XI_SCAN.to_vec(),
            (None, Experiment::GateHalf) => vec![GATE_HALF_XI],
            (None, _) => vec![GATE_FULL_XI],
        };
        if xs.is_empty() {
            return Err(CliError::config("xi list is empty"));
        }
        for &x in &xs {
            positive("xi", x)?;
        }
        if e == Experiment::XiScan && xs.len() < 3 {
            return Err(CliError::config(format!(
                "xi-scan needs ≥ 3 values, got {}",
                xs.len()
            )));
        }
        Ok(xs)
    }

    /// The single ξ of gate experiments.
    pub fn xi(&self) -> CliResult<f64> {
        let xs = self.xi_list()?;
        if xs.len() != 1 {
            return Err(CliError::config(format!(
                "{} takes a single xi, got {}",
                self.experiment()?,
                xs.len()
            )));
        }
        Ok(xs[0])
    }

    pub fn step(&self) -> CliResult<f64> {
        let default = if self.experiment()? == Experiment::SpinDemo {
            SPIN_STEP
        } else {
            self.pulse_width()? / 40.0
        };
        positive("step", self.step.unwrap_or(default))
    }

    pub fn stride(&self) -> CliResult<usize> {
        match self.stride.unwrap_or(1) {
            0 => Err(CliError::config("stride must be ≥ 1")),
            s => Ok(s),
        }
    }

    pub fn runs(&self) -> CliResult<usize> {
        match self.runs.unwrap_or(ROBUSTNESS_RUNS) {
            0 => Err(CliError::config("runs must be ≥ 1")),
            r => Ok(r),
        }
    }

    pub fn jitter(&self) -> JitterSpec {
        self.jitter.unwrap_or_default()
    }

    /// A seed is required as soon as any jitter is enabled.
    pub fn seed(&self) -> CliResult<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None if self.jitter().is_zero() => Ok(0),
            None => Err(CliError::config("jitter is enabled but no seed was given")),
        }
    }

    pub fn spin_j(&self) -> CliResult<f64> {
        let j = self.spin_j.unwrap_or(SPIN_J);
        if !(j > 0.0) {
            return Err(CliError::config(format!("j must be > 0, got {j}")));
        }
        Ok(j)
    }

    pub fn omega(&self) -> CliResult<f64> {
        positive("omega", self.omega.unwrap_or(SPIN_OMEGA))
    }

    pub fn segment_duration(&self) -> CliResult<f64> {
        positive(
            "segment_duration",
            self.segment_duration.unwrap_or(SPIN_SEGMENT),
        )
    }

    pub fn initial(&self) -> TripodInitial {
        self.initial.unwrap_or(match self.experiment {
            Some(Experiment::TripodDouble) => TripodInitial::Two,
            _ => TripodInitial::Plus,
        })
    }

    pub fn convergence_check(&self) -> bool {
        self.convergence_check.unwrap_or(false)
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let cfg = ExperimentConfig::parse(
            "# gate\nexperiment = gate-full\nxi = 16\nalpha=0.5 # inline\njitter = amplitude=0.1,xi=0.05\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, Some(Experiment::GateFull));
        assert_eq!(cfg.xi, Some(vec![16.0]));
        assert_eq!(cfg.alpha, Some(0.5));
        assert_eq!(cfg.jitter().amplitude, 0.1);
        assert_eq!(cfg.jitter().xi, 0.05);
        assert_eq!(cfg.jitter().timing, 0.0);
        assert_eq!(cfg.seed().unwrap(), 7);
    }

    #[test]
    fn defaults_per_experiment() {
        let half = ExperimentConfig::for_experiment(Experiment::GateHalf);
        assert_eq!(half.centers().unwrap(), CAPTION_CENTERS.to_vec());
        assert_eq!(half.step().unwrap(), 0.5);
        assert_eq!(half.xi().unwrap(), 4.0);
        let double = ExperimentConfig::for_experiment(Experiment::TripodDouble);
        assert_eq!(double.centers().unwrap()[6], 50.0 + 6.0 * 55.0);
        let gate = ExperimentConfig::for_experiment(Experiment::GateFull);
        assert_eq!(gate.alpha().unwrap() * gate.pulse_width().unwrap(), 40.0);
        assert_eq!(gate.xi().unwrap(), 16.0);
        assert_eq!(gate.mean_spacing().unwrap(), GATE_SPACING);
    }

    #[test]
    fn overlay_prefers_top() {
        let base = ExperimentConfig::parse("experiment = xi-scan\nxi = 1,2,3\n").unwrap();
        let top = ExperimentConfig {
            xi: Some(vec![5.0, 6.0, 7.0, 8.0]),
            ..Default::default()
        };
        let merged = base.overlay(top);
        assert_eq!(merged.experiment, Some(Experiment::XiScan));
        assert_eq!(merged.xi_list().unwrap().len(), 4);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::parse("nonsense").is_err());
        assert!(ExperimentConfig::parse("colour = blue").is_err());
        assert!(ExperimentConfig::parse("experiment = warp-drive").is_err());
        assert!("0.5".parse::<JitterSpec>().is_err());
        let mut c = ExperimentConfig::for_experiment(Experiment::XiScan);
        c.xi = Some(vec![4.0, 8.0]);
        assert!(c.xi_list().is_err());
        c.xi = Some(vec![4.0, -8.0, 3.0]);
        assert!(c.xi_list().is_err());
        let mut r = ExperimentConfig::for_experiment(Experiment::Robustness);
        r.jitter = Some(JitterSpec::uniform(0.1));
        assert!(r.seed().is_err());
        let mut h = ExperimentConfig::for_experiment(Experiment::GateHalf);
        h.centers = Some(vec![50.0, 40.0, 140.0, 190.0]);
        assert!(h.centers().is_err());
    }
}

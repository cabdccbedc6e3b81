//! Experiment configuration, one TOML file per experiment.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupKind, IrreducibleCharacter};
use crate::hamiltonian::{HamiltonianModel, Potential};
use crate::quantum::GridPolicy;
use crate::verify::{geometric_h, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Weyl,
    Weak,
    Gutzwiller,
    Oracle,
    Classical,
    All,
}

impl Suite {
    pub const CONCRETE: [Suite; 5] = [Suite::Weyl, Suite::Weak, Suite::Gutzwiller, Suite::Oracle, Suite::Classical];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Weyl => "weyl",
            Suite::Weak => "weak",
            Suite::Gutzwiller => "gutzwiller",
            Suite::Oracle => "oracle",
            Suite::Classical => "classical",
            Suite::All => "all",
        }
    }

    pub fn is_quantum(self) -> bool {
        matches!(self, Suite::Weyl | Suite::Weak | Suite::Gutzwiller | Suite::Oracle)
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::CONCRETE
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::config("suite", format!("unknown suite `{s}` (weyl, weak, gutzwiller, oracle, classical, all)")))
    }
}

/// Geometric list of h values from `h_max` down to `h_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub h_max: f64,
    pub h_min: f64,
    pub count: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        geometric_h(self.h_max, self.h_min, self.count)
    }

    fn validate(&self, field: &str) -> Result<()> {
        if !(self.h_min > 0.0 && self.h_max > self.h_min && self.h_max.is_finite()) {
            return Err(Error::config(field, "need 0 < h_min < h_max"));
        }
        if self.count < 2 {
            return Err(Error::config(format!("{field}.count"), "need at least two values of h"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GutzwillerSettings {
    /// h for the time signal |Y(t; h)|.
    pub h: f64,
    /// Upper end of the time window, in units of the flow time.
    pub t_max: f64,
    pub action_sweep: Sweep,
    /// Fraction of the Weyl amplitude below which a windowed trace is noise.
    pub noise_floor: f64,
}

impl Default for GutzwillerSettings {
    fn default() -> Self {
        Self {
            h: 0.01,
            t_max: 5.0,
            action_sweep: Sweep {
                h_max: 0.02,
                h_min: 0.004,
                count: 401,
            },
            noise_floor: crate::verify::NOISE_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSettings {
    pub h: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub levels: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            h: 0.1,
            n_r: 160,
            n_theta: 32,
            levels: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalSettings {
    pub trajectories: usize,
    /// Flow time per trajectory.
    pub t_end: f64,
    /// Integrator energy tolerance.
    pub tol: f64,
    pub monte_carlo_samples: usize,
    /// Energies in the window at which periods and actions are tabulated.
    pub energies: usize,
}

impl Default for ClassicalSettings {
    fn default() -> Self {
        Self {
            trajectories: 100,
            t_end: 3.0,
            tol: 1e-10,
            monte_carlo_samples: 200_000,
            energies: 9,
        }
    }
}

fn default_suites() -> Vec<Suite> {
    vec![Suite::All]
}

fn default_output() -> PathBuf {
    PathBuf::from("redspec-out")
}

pub fn default_cache_dir() -> PathBuf {
    PathBuf::from(".redspec-cache")
}

/// Energies are in the units of H, times in units of the flow parameter, h
/// is dimensionless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub group: GroupKind,
    pub sectors: Vec<i64>,
    pub potential: Potential,
    /// Energy window I = [lower, upper].
    pub window: [f64; 2],
    /// Energy E for the smoothed traces; defaults to the window centre.
    #[serde(default)]
    pub energy: Option<f64>,
    pub sweep: Sweep,
    #[serde(default = "default_suites")]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; defaults to the available cores.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default)]
    pub grid: GridPolicy,
    #[serde(default)]
    pub gutzwiller: GutzwillerSettings,
    #[serde(default)]
    pub oracle: OracleSettings,
    #[serde(default)]
    pub classical: ClassicalSettings,
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn energy(&self) -> f64 {
        self.energy.unwrap_or(0.5 * (self.window[0] + self.window[1]))
    }

    /// Concrete suites to run, in a fixed order.
    pub fn resolved_suites(&self) -> Vec<Suite> {
        let all = self.suites.contains(&Suite::All);
        let mut out: Vec<Suite> = Suite::CONCRETE
            .into_iter()
            .filter(|s| all || self.suites.contains(s))
            .filter(|s| !all || self.supports(*s))
            .collect();
        out.dedup();
        out
    }

    pub fn supports(&self, suite: Suite) -> bool {
        match suite {
            Suite::Oracle => self.group == GroupKind::So2Planar,
            s if s.is_quantum() => self.group != GroupKind::So2Axial,
            _ => true,
        }
    }

    pub fn sorted_sectors(&self) -> Vec<i64> {
        let mut s = self.sectors.clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        if self.sectors.is_empty() {
            return Err(Error::config("sectors", "list at least one sector"));
        }
        for &n in &self.sectors {
            IrreducibleCharacter::new(self.group, n).map_err(|e| Error::config("sectors", e.to_string()))?;
        }
        self.potential
            .validate()
            .map_err(|e| Error::config("potential", e.to_string()))?;
        let [lo, hi] = self.window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::config("window", "need lower < upper"));
        }
        HamiltonianModel::for_group(self.group, self.potential)
            .check_window(lo, hi)
            .map_err(|e| Error::config("window", e.to_string()))?;
        if let Some(e) = self.energy {
            if !(lo..=hi).contains(&e) {
                return Err(Error::config("energy", format!("{e} lies outside the window [{lo}, {hi}]")));
            }
        }
        self.sweep.validate("sweep")?;
        self.gutzwiller.action_sweep.validate("gutzwiller.action_sweep")?;
        if self.suites.is_empty() {
            return Err(Error::config("suites", "list at least one suite"));
        }
        for s in &self.suites {
            if *s != Suite::All && !self.supports(*s) {
                return Err(Error::config(
                    "suites",
                    format!("suite `{}` is not available for group {}", s.name(), self.group),
                ));
            }
        }
        if self.jobs == Some(0) {
            return Err(Error::config("jobs", "must be at least 1"));
        }
        if !(self.tolerances.coefficient_rel > 0.0 && self.tolerances.exponent_abs > 0.0) {
            return Err(Error::config("tolerances", "must be positive"));
        }
        if self.grid.floor_points_per_wavelength > self.grid.points_per_wavelength {
            return Err(Error::config("grid", "floor_points_per_wavelength exceeds points_per_wavelength"));
        }
        if self.gutzwiller.h <= 0.0 || self.gutzwiller.t_max <= 0.0 {
            return Err(Error::config("gutzwiller", "h and t_max must be positive"));
        }
        if self.classical.trajectories == 0 || self.classical.tol <= 0.0 || self.classical.energies == 0 {
            return Err(Error::config("classical", "trajectories, energies and tol must be positive"));
        }
        Ok(())
    }
}

/// Names the key on the line a TOML error points at.
fn toml_error(text: &str, err: &toml::de::Error) -> Error {
    let message = err.message().to_string();
    if let Some(field) = message
        .strip_prefix("configuration error in `")
        .and_then(|rest| rest.split('`').next())
    {
        return Error::config(field, message.clone());
    }
    let field = err
        .span()
        .and_then(|span| {
            let start = text[..span.start].rfind('\n').map_or(0, |i| i + 1);
            let line = &text[start..];
            let line = line.split('\n').next().unwrap_or("");
            line.split_once('=').map(|(k, _)| k.trim().to_string())
        })
        .or_else(|| {
            message
                .strip_prefix("unknown field `")
                .and_then(|rest| rest.split('`').next())
                .map(str::to_string)
        })
        .or_else(|| {
            message
                .strip_prefix("missing field `")
                .and_then(|rest| rest.split('`').next())
                .map(str::to_string)
        })
        .unwrap_or_else(|| "config".to_string());
    Error::config(field, message)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
group = "so2"
sectors = [0]
window = [1.0, 2.0]

[potential]
kind = "harmonic"
k = 1.0

[sweep]
h_max = 0.05
h_min = 0.005
count = 6
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.energy(), 1.5);
        assert_eq!(c.resolved_suites(), Suite::CONCRETE.to_vec());
        assert_eq!(c.classical.trajectories, 100);
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_group_names_the_field() {
        let text = MINIMAL.replace("\"so2\"", "\"so5\"");
        match ExperimentConfig::from_toml(&text).unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "group"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = MINIMAL.replace("sectors = [0]", "sectors = [0]\nsector = 1");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn critical_window_is_rejected() {
        let text = MINIMAL
            .replace("kind = \"harmonic\"\nk = 1.0", "kind = \"double_well\"\na = 1.0")
            .replace("[1.0, 2.0]", "[0.5, 1.5]");
        match ExperimentConfig::from_toml(&text).unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "window"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn quantum_suites_need_a_quantum_model() {
        let text = MINIMAL
            .replace("\"so2\"", "\"so2_axial\"")
            .replace("sectors = [0]", "sectors = [0]\nsuites = [\"weyl\"]");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config { .. })));
        let all = MINIMAL.replace("\"so2\"", "\"so2_axial\"");
        let c = ExperimentConfig::from_toml(&all).unwrap();
        assert_eq!(c.resolved_suites(), vec![Suite::Classical]);
    }
}

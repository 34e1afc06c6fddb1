//! Scenario configuration files: a TOML document with `[physics]`, `[ris]`,
//! `[bs]`, repeated `[[users]]`, and optional `[solver]` / `[quantize]`
//! sections. Loading validates every invariant and reports the offending
//! field; re-serializing a loaded file reproduces it semantically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use risbeam_core::{
    build_grid_layout, Direction, PathLossMode, Scenario, SolverOptions, Terminal, WeightedUser,
    SPEED_OF_LIGHT,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub physics: PhysicsSection,
    pub ris: RisSection,
    pub bs: TerminalSection,
    pub users: Vec<UserSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantize: Option<QuantizeSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_m: Option<f64>,
    #[serde(default = "default_tx_power")]
    pub tx_power: f64,
}

fn default_tx_power() -> f64 {
    1.0
}

/// Unit spacing: either meters or the keyword `"half_wavelength"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spacing {
    Meters(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisSection {
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: Spacing,
    #[serde(default)]
    pub path_loss_mode: PathLossModeField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PathLossModeField {
    #[default]
    AsWritten,
    Standard,
}

impl From<PathLossModeField> for PathLossMode {
    fn from(f: PathLossModeField) -> Self {
        match f {
            PathLossModeField::AsWritten => PathLossMode::AsWritten,
            PathLossModeField::Standard => PathLossMode::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalSection {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSection {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub distance_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_ratio: Option<f64>,
    /// Receiver noise variance, carried as documentation only: the design
    /// objective is the noise-free received power, so this never enters the
    /// optimization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_grad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizeSection {
    pub bits: u32,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("scenario file: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario files serialize")
    }

    /// Resolved carrier wavelength in meters.
    pub fn wavelength(&self) -> Result<f64, CliError> {
        match (self.physics.frequency_hz, self.physics.wavelength_m) {
            (Some(_), Some(_)) | (None, None) => Err(CliError::Validation(
                "[physics]: exactly one of frequency_hz or wavelength_m".into(),
            )),
            (Some(f), None) => {
                if !(f.is_finite() && f > 0.0) {
                    return Err(CliError::Validation(format!(
                        "[physics].frequency_hz: {f} must be > 0"
                    )));
                }
                Ok(SPEED_OF_LIGHT / f)
            }
            (None, Some(w)) => {
                if !(w.is_finite() && w > 0.0) {
                    return Err(CliError::Validation(format!(
                        "[physics].wavelength_m: {w} must be > 0"
                    )));
                }
                Ok(w)
            }
        }
    }

    /// Build the physical scenario, re-validating every field.
    pub fn build_scenario(&self) -> Result<Scenario, CliError> {
        let wavelength = self.wavelength()?;
        let spacing = match &self.ris.spacing_m {
            Spacing::Meters(v) => *v,
            Spacing::Keyword(k) if k == "half_wavelength" => wavelength / 2.0,
            Spacing::Keyword(k) => {
                return Err(CliError::Validation(format!(
                    "[ris].spacing_m: unknown keyword {k:?} (expected \"half_wavelength\")"
                )))
            }
        };
        let ris = build_grid_layout(self.ris.rows, self.ris.cols, spacing)
            .map_err(|e| CliError::Validation(format!("[ris]: {e}")))?;
        let bs = terminal_from(&self.bs, "[bs]")?;

        if self.users.is_empty() {
            return Err(CliError::Validation(
                "[[users]]: at least one user required".into(),
            ));
        }
        let weights = self.weights()?;
        let mut users = Vec::with_capacity(self.users.len());
        for (i, (u, w)) in self.users.iter().zip(&weights).enumerate() {
            let term = terminal_from(
                &TerminalSection {
                    theta_deg: u.theta_deg,
                    phi_deg: u.phi_deg,
                    distance_m: u.distance_m,
                },
                &format!("[[users]][{i}]"),
            )?;
            users.push(
                WeightedUser::new(term, *w)
                    .map_err(|e| CliError::Validation(format!("[[users]][{i}]: {e}")))?,
            );
        }

        Scenario::new(
            wavelength,
            self.physics.tx_power,
            bs,
            users,
            ris,
            self.ris.path_loss_mode.into(),
        )
        .map_err(|e| CliError::Validation(format!("[physics]: {e}")))
    }

    /// Per-user weights: taken directly in weight mode, or `1/target_ratio`
    /// in ratio mode. Mixing modes across users is rejected.
    pub fn weights(&self) -> Result<Vec<f64>, CliError> {
        let mut weights = Vec::with_capacity(self.users.len());
        let mut mode: Option<bool> = None; // true = weight mode
        for (i, u) in self.users.iter().enumerate() {
            let this_mode = match (u.weight, u.target_ratio) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(CliError::Validation(format!(
                        "[[users]][{i}]: exactly one of weight or target_ratio"
                    )))
                }
                (Some(_), None) => true,
                (None, Some(_)) => false,
            };
            if *mode.get_or_insert(this_mode) != this_mode {
                return Err(CliError::Validation(
                    "[[users]]: weight and target_ratio must not be mixed across users".into(),
                ));
            }
            let w = if this_mode {
                u.weight.unwrap()
            } else {
                let r = u.target_ratio.unwrap();
                if !(r.is_finite() && r > 0.0) {
                    return Err(CliError::Validation(format!(
                        "[[users]][{i}].target_ratio: {r} must be > 0"
                    )));
                }
                1.0 / r
            };
            if !(w.is_finite() && w > 0.0) {
                return Err(CliError::Validation(format!(
                    "[[users]][{i}].weight: {w} must be > 0"
                )));
            }
            weights.push(w);
        }
        Ok(weights)
    }

    /// Solver options from the `[solver]` section with CLI overrides applied.
    pub fn solver_options(&self, overrides: &SolverOverrides) -> Result<SolverOptions, CliError> {
        let section = self.solver.clone().unwrap_or_default();
        let mut opts = SolverOptions {
            tau: overrides.tau.or(section.tau),
            ..SolverOptions::default()
        };
        if let Some(v) = overrides.lambda0.or(section.lambda0) {
            opts.lambda0 = v;
        }
        if let Some(v) = overrides.inner_max_iters.or(section.inner_max_iters) {
            opts.inner_max_iters = v;
        }
        if let Some(v) = section.inner_grad_tol {
            opts.inner_grad_tol = v;
        }
        if let Some(v) = overrides.outer_max_iters.or(section.outer_max_iters) {
            opts.outer_max_iters = v;
        }
        if let Some(v) = overrides.restarts.or(section.restarts) {
            opts.restarts = v;
        }
        if let Some(v) = overrides.seed.or(section.seed) {
            opts.seed = v;
        }
        opts.validate()
            .map_err(|e| CliError::Validation(format!("[solver]: {e}")))?;
        Ok(opts)
    }
}

/// CLI-level overrides for `[solver]` values.
#[derive(Debug, Clone, Default)]
pub struct SolverOverrides {
    pub tau: Option<f64>,
    pub lambda0: Option<f64>,
    pub inner_max_iters: Option<usize>,
    pub outer_max_iters: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
}

fn terminal_from(t: &TerminalSection, field: &str) -> Result<Terminal, CliError> {
    let dir = Direction::new(t.theta_deg, t.phi_deg)
        .map_err(|e| CliError::Validation(format!("{field}.theta_deg/phi_deg: {e}")))?;
    Terminal::new(dir, t.distance_m)
        .map_err(|e| CliError::Validation(format!("{field}.distance_m: {e}")))
}

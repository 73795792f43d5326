//! Run configuration: a JSON document, optionally patched by dotted
//! `key=value` overrides, validated into a [`RunConfig`].

use std::path::{Path, PathBuf};

use anyonvlasov::kernels::RadialGrid;
use anyonvlasov::{ExternalField, Grid2D, ScalingRegime, Trap};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub regime: ScalingRegime,
    /// Reject `η` outside `(0, 1/4)`.
    #[serde(default = "yes")]
    pub enforce_regime: bool,
    pub trap: Trap,
    #[serde(default)]
    pub external: ExternalField,
    /// Position grid shared by every verb.
    pub grid: Grid2D,
    /// Momentum grid for `vlasov-energy` and `momentum-dist`.
    #[serde(default)]
    pub momentum_grid: Option<Grid2D>,
    #[serde(default)]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub tf: TfParams,
    #[serde(default)]
    pub husimi: HusimiParams,
    #[serde(default)]
    pub hf: HfParams,
    #[serde(default)]
    pub df: DfParams,
    #[serde(default)]
    pub pauli_mc: PauliMcParams,
}

fn yes() -> bool {
    true
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSpec {
    /// Largest exponent in the bridge profile family.
    pub max_exponent: f64,
    pub radial_grid: RadialGrid,
    /// Use `w_R` with `R = N^{-η}` in the mean-field verbs instead of the
    /// pointlike kernel. `hf-energy` always smears.
    pub smear_mean_field: bool,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { max_exponent: 8.0, radial_grid: RadialGrid::default(), smear_mean_field: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TfParams {
    pub mass: f64,
    pub tol: f64,
}

impl Default for TfParams {
    fn default() -> Self {
        Self { mass: 1.0, tol: 1e-12 }
    }
}

/// A Slater state built from orthonormalised Hermite functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitalSpec {
    pub modes: Vec<(usize, usize)>,
    pub sigma: f64,
    pub center: [f64; 2],
}

impl Default for OrbitalSpec {
    fn default() -> Self {
        Self { modes: vec![(0, 0), (1, 0)], sigma: 0.8, center: [0.0, 0.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HusimiParams {
    pub state: OrbitalSpec,
    /// Defaults to `ħ` of the regime.
    pub hbar_x: Option<f64>,
    pub hbar_p: Option<f64>,
    /// Position of the momentum slice.
    pub x: [f64; 2],
    pub p_grid: Grid2D,
}

impl Default for HusimiParams {
    fn default() -> Self {
        Self {
            state: OrbitalSpec { sigma: 0.5, ..OrbitalSpec::default() },
            hbar_x: None,
            hbar_p: None,
            x: [0.0, 0.0],
            p_grid: Grid2D { n: 32, half_width: 2.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HfParams {
    /// One orbital per particle, so `modes.len()` must equal `regime.n`.
    pub state: OrbitalSpec,
    /// Monte Carlo samples for the direct-evaluation cross-check; 0 skips it.
    pub oracle_samples: usize,
}

impl Default for HfParams {
    fn default() -> Self {
        Self { state: OrbitalSpec::default(), oracle_samples: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DfParams {
    pub n_particles: usize,
    pub atoms: usize,
    /// Raw configuration weights are drawn uniformly from `0..max_weight`.
    pub max_weight: u64,
}

impl Default for DfParams {
    fn default() -> Self {
        Self { n_particles: 3, atoms: 3, max_weight: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PauliMcParams {
    /// Tiles have volume `N^{-tiling_exponent}`.
    pub tiling_exponent: f64,
    pub n_per_axis: usize,
    pub eps: Vec<f64>,
    pub trials: usize,
    /// Largest moment order tried in the union bound.
    pub n_max: usize,
}

impl Default for PauliMcParams {
    fn default() -> Self {
        Self { tiling_exponent: 0.75, n_per_axis: 9, eps: vec![0.5, 1.0, 2.0], trials: 1000, n_max: 64 }
    }
}

/// Set `path = value` inside a JSON object, creating objects along the way.
/// The value is parsed as JSON when possible and kept as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{assignment}` is not of the form key=value")))?;
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(CliError::Usage(format!("override `{assignment}` has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let Value::Object(map) = node else {
            return Err(CliError::Usage(format!("override `{path}`: `{}` is not an object", keys[..i].join("."))));
        };
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("loop returns on the last key")
}

/// Deserialise and validate, reporting the path of the offending field.
pub fn from_value(doc: Value) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Config(e.inner().to_string())
        } else {
            CliError::Config(format!("{path}: {}", e.inner()))
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    if !doc.is_object() {
        return Err(CliError::Config("configuration must be a JSON object".into()));
    }
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    from_value(doc)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, e: anyonvlasov::Error| CliError::Config(format!("{name}: {e}"));
        ScalingRegime::new(self.regime.n, self.regime.beta_stat, self.regime.eta, self.enforce_regime)
            .map_err(|e| field("regime", e))?;
        self.trap.validate().map_err(|e| field("trap", e))?;
        Grid2D::new(self.grid.n, self.grid.half_width).map_err(|e| field("grid", e))?;
        if let Some(g) = self.momentum_grid {
            Grid2D::new(g.n, g.half_width).map_err(|e| field("momentum_grid", e))?;
        }
        Grid2D::new(self.husimi.p_grid.n, self.husimi.p_grid.half_width).map_err(|e| field("husimi.p_grid", e))?;
        if !(self.tf.mass > 0.0 && self.tf.tol > 0.0) {
            return Err(CliError::Config("tf: mass and tol must be positive".into()));
        }
        for (name, s) in [("husimi.state", &self.husimi.state), ("hf.state", &self.hf.state)] {
            if s.modes.is_empty() || !(s.sigma > 0.0) {
                return Err(CliError::Config(format!("{name}: need at least one mode and sigma > 0")));
            }
        }
        if self.pauli_mc.eps.is_empty() {
            return Err(CliError::Config("pauli_mc.eps: need at least one value".into()));
        }
        Ok(())
    }
}

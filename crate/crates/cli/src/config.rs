//! Run configuration: JSON on disk, tolerances overridable from the command line.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cryamabe::deform::{glued_deformation, rossi_deformation, Deformation, GluingSpec};
use cryamabe::heis::HPoint;
use cryamabe::quad::RuleSpec;
use cryamabe::reduce::grid::GridSpec;
use cryamabe::reduce::ls::LsOptions;
use cryamabe::reduce::scan::ScanWindow;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DeformationSpec {
    Flat,
    Rossi { s: f64 },
    Constant { re: f64, im: f64 },
    Glued(GluingSpec),
}

impl Default for DeformationSpec {
    fn default() -> Self {
        DeformationSpec::Glued(GluingSpec::single(HPoint::IDENTITY, 0.1, 0.05))
    }
}

impl DeformationSpec {
    pub fn build(&self) -> cryamabe::Result<Deformation> {
        match self {
            DeformationSpec::Flat => Ok(Deformation::zero()),
            DeformationSpec::Rossi { s } => rossi_deformation(*s),
            DeformationSpec::Constant { re, im } => Deformation::constant(Complex64::new(*re, *im)),
            DeformationSpec::Glued(g) => glued_deformation(g),
        }
    }

    /// The same family with amplitude s (every ball, for glued structures).
    pub fn with_amplitude(&self, s: f64) -> Self {
        match self {
            DeformationSpec::Glued(g) => {
                DeformationSpec::Glued(GluingSpec { amplitudes: vec![s; g.amplitudes.len()], ..g.clone() })
            }
            DeformationSpec::Constant { re, im } => {
                let m = re.hypot(*im);
                if m == 0.0 {
                    DeformationSpec::Constant { re: s, im: 0.0 }
                } else {
                    DeformationSpec::Constant { re: s * re / m, im: s * im / m }
                }
            }
            _ => DeformationSpec::Rossi { s },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSpec {
    /// Amplitudes for the s-sweep, at λ = `lambda_at`.
    #[serde(default = "default_s")]
    pub s: Vec<f64>,
    #[serde(default = "default_lambda_at")]
    pub lambda_at: f64,
    /// Scales for the λ-sweep, at s = `s_at`.
    #[serde(default = "default_lambda")]
    pub lambda: Vec<f64>,
    #[serde(default = "default_s_at")]
    pub s_at: f64,
    /// `rossi` uses the global structure sφ, `deformation` the configured family.
    #[serde(default = "default_structure")]
    pub structure: String,
}

fn default_s() -> Vec<f64> {
    vec![0.02, 0.04, 0.08]
}
fn default_lambda() -> Vec<f64> {
    vec![4.0, 8.0, 16.0]
}
fn default_lambda_at() -> f64 {
    8.0
}
fn default_s_at() -> f64 {
    0.05
}
fn default_structure() -> String {
    "rossi".into()
}

impl Default for ExpansionSpec {
    fn default() -> Self {
        Self {
            s: default_s(),
            lambda_at: default_lambda_at(),
            lambda: default_lambda(),
            s_at: default_s_at(),
            structure: default_structure(),
        }
    }
}

pub fn default_window() -> ScanWindow {
    ScanWindow {
        center: HPoint::IDENTITY,
        big_r: 1.0,
        small_r: 0.1,
        alpha: 1.0,
        beta: 3.0,
        n_x: 9,
        n_t: 5,
        n_lambda: 7,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub quadrature: RuleSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub deformation: DeformationSpec,
    #[serde(default = "default_window")]
    pub window: ScanWindow,
    #[serde(default)]
    pub ls: LsOptions,
    #[serde(default)]
    pub expansion: ExpansionSpec,
    /// Overrides of the named tolerances; see [`Tolerances`].
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_out")]
    pub out: String,
}

fn default_out() -> String {
    "out".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            quadrature: RuleSpec::default(),
            grid: GridSpec::default(),
            deformation: DeformationSpec::default(),
            window: default_window(),
            ls: LsOptions::default(),
            expansion: ExpansionSpec::default(),
            tolerances: BTreeMap::new(),
            out: default_out(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Schema { path, message: e.into_inner().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let schema = |path: &str, e: cryamabe::Error| CliError::Schema { path: path.into(), message: e.to_string() };
        self.quadrature.validate().map_err(|e| schema("quadrature", e))?;
        self.grid.validate().map_err(|e| schema("grid", e))?;
        self.window.validate().map_err(|e| schema("window", e))?;
        if let DeformationSpec::Glued(g) = &self.deformation {
            g.validate().map_err(|e| schema("deformation", e))?;
        }
        if !(self.ls.tol > 0.0 && self.ls.newton_tol > 0.0) || self.ls.max_outer == 0 {
            return Err(CliError::Schema {
                path: "ls".into(),
                message: "tolerances must be positive and max_outer at least 1".into(),
            });
        }
        Tolerances::default().merged(&self.tolerances)?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    /// Digest of every numerical input. The output directory is excluded.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("out");
        }
        let bytes = serde_json::to_vec(&v).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Named acceptance thresholds. Every value must be positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances(pub BTreeMap<String, f64>);

pub const TOLERANCE_DEFAULTS: &[(&str, f64)] = &[
    ("bubble_identity", 1e-8),
    ("cayley_spurious", 1e-7),
    ("curvature_slope", 0.1),
    ("fd_gradient", 1e-3),
    ("gradient_floor", 5e-3),
    ("l4_default", 1e-3),
    ("l4_refined", 5e-4),
    ("lambda_slope", 0.3),
    ("mms_order", 0.2),
    ("orthogonality", 1e-6),
    ("s_slope", 0.2),
    ("structure", 1e-8),
    ("sublaplacian", 1e-8),
    ("symmetry", 1e-8),
    ("v_slope", 0.2),
];

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(TOLERANCE_DEFAULTS.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn merged(&self, over: &BTreeMap<String, f64>) -> Result<Self, CliError> {
        let mut out = self.clone();
        for (k, &v) in over {
            if !out.0.contains_key(k) {
                return Err(CliError::Usage(format!("unknown tolerance '{k}'")));
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("tolerance '{k}' must be positive, got {v}")));
            }
            out.0.insert(k.clone(), v);
        }
        Ok(out)
    }
}

/// Parses NAME=VAL.
pub fn parse_tol(arg: &str) -> Result<(String, f64), String> {
    let (k, v) = arg.split_once('=').ok_or_else(|| format!("expected NAME=VAL, got '{arg}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("tolerance '{k}': {e}"))?;
    Ok((k.trim().to_string(), v))
}

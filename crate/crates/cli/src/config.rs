//! Run configuration: a TOML document with every field defaulted.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spdc_core::decomposition::MAX_TABLE_ORDER;
use spdc_core::hom::{effective_waist, DEFAULT_GRID_POINTS, DEFAULT_GRID_WAISTS};
use spdc_core::modes::MAX_MODE_ORDER;
use spdc_core::{
    BeamSpec, BeamSplitterSpec, BiphotonModel, CrystalParams, LGIndex, PumpSpec, Regime, ScanGrid,
    TransversePoint,
};

/// Largest accepted grid size per axis.
pub const MAX_GRID_POINTS: usize = 4096;
/// Truncation orders above this are rejected for the CLI tables.
pub const MAX_CLI_N_MAX: u32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub pump: PumpConfig,
    pub crystal: CrystalConfig,
    pub detection: DetectionConfig,
    pub beamsplitter: BeamSplitterConfig,
    pub scan: ScanConfig,
    pub d2: D2Config,
    pub regime: RegimeName,
    pub decomposition: DecompositionConfig,
    pub apertures: ApertureConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            pump: PumpConfig::default(),
            crystal: CrystalConfig::default(),
            detection: DetectionConfig::default(),
            beamsplitter: BeamSplitterConfig::default(),
            scan: ScanConfig::default(),
            d2: D2Config::default(),
            regime: RegimeName::Balanced,
            decomposition: DecompositionConfig::default(),
            apertures: ApertureConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpConfig {
    pub p: u32,
    pub l: i32,
    pub wavelength_nm: f64,
    pub waist_mm: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self { p: 0, l: 1, wavelength_nm: 351.1, waist_mm: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalConfig {
    pub length_mm: f64,
}

impl Default for CrystalConfig {
    fn default() -> Self {
        Self { length_mm: 7.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionConfig {
    #[serde(rename = "Z_m")]
    pub z_m: f64,
    pub thin_crystal: bool,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self { z_m: 1.0, thin_crystal: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamSplitterConfig {
    pub t: f64,
    pub r: f64,
}

impl Default for BeamSplitterConfig {
    fn default() -> Self {
        Self { t: 0.67f64.sqrt(), r: 0.33f64.sqrt() }
    }
}

/// Scan window; bounds left out fall back to the default pattern-centred grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_min_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_max_mm: Option<f64>,
    pub nx: usize,
    pub ny: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { x_min_mm: None, x_max_mm: None, y_min_mm: None, y_max_mm: None, nx: DEFAULT_GRID_POINTS, ny: DEFAULT_GRID_POINTS }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct D2Config {
    pub x_mm: f64,
    pub y_mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeName {
    Balanced,
    Unbalanced,
}

impl From<RegimeName> for Regime {
    fn from(r: RegimeName) -> Self {
        match r {
            RegimeName::Balanced => Regime::Balanced,
            RegimeName::Unbalanced => Regime::Unbalanced,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecompositionConfig {
    pub n_max: u32,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self { n_max: spdc_core::decomposition::DEFAULT_N_MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApertureConfig {
    pub d1_radius_mm: f64,
    pub d2_radius_mm: f64,
    pub enabled: bool,
}

impl Default for ApertureConfig {
    fn default() -> Self {
        Self { d1_radius_mm: 0.25, d2_radius_mm: 0.5, enabled: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Pgm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("spdc-out"), formats: vec![OutputFormat::Csv] }
    }
}

/// One invalid field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

impl ConfigError {
    pub fn fields(&self) -> &[FieldError] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Parse(_) => &[],
        }
    }
}

struct Checker(Vec<FieldError>);

impl Checker {
    fn fail(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(FieldError { path: path.to_string(), message: message.into() });
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.fail(path, format!("must be a positive finite number, got {v}"));
        }
    }

    fn non_negative(&mut self, path: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.fail(path, format!("must be a non-negative finite number, got {v}"));
        }
    }

    fn finite(&mut self, path: &str, v: f64) {
        if !v.is_finite() {
            self.fail(path, format!("must be finite, got {v}"));
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut c = Checker(Vec::new());
        let order = 2 * u64::from(self.pump.p) + u64::from(self.pump.l.unsigned_abs());
        if order > u64::from(MAX_MODE_ORDER) {
            c.fail("pump.l", format!("mode order 2p+|l| = {order} exceeds {MAX_MODE_ORDER}"));
        }
        c.positive("pump.wavelength_nm", self.pump.wavelength_nm);
        c.positive("pump.waist_mm", self.pump.waist_mm);
        c.positive("crystal.length_mm", self.crystal.length_mm);
        c.finite("detection.Z_m", self.detection.z_m);
        if self.detection.thin_crystal {
            c.non_negative("detection.Z_m", self.detection.z_m);
        } else if !(self.detection.z_m > 0.0) {
            c.fail("detection.Z_m", "must be positive when thin_crystal = false");
        }

        let (t, r) = (self.beamsplitter.t, self.beamsplitter.r);
        for (path, v) in [("beamsplitter.t", t), ("beamsplitter.r", r)] {
            if !(0.0..=1.0).contains(&v) {
                c.fail(path, format!("must lie in [0, 1], got {v}"));
            }
        }
        if (t * t + r * r - 1.0).abs() > 1e-12 {
            c.fail("beamsplitter", format!("t² + r² must equal 1, got {}", t * t + r * r));
        }

        let s = &self.scan;
        let bounds = [
            ("scan.x_min_mm", s.x_min_mm),
            ("scan.x_max_mm", s.x_max_mm),
            ("scan.y_min_mm", s.y_min_mm),
            ("scan.y_max_mm", s.y_max_mm),
        ];
        let given = bounds.iter().filter(|b| b.1.is_some()).count();
        if given != 0 && given != 4 {
            for (path, v) in bounds {
                if v.is_none() {
                    c.fail(path, "required when any scan bound is given");
                }
            }
        }
        for (path, v) in bounds {
            if let Some(v) = v {
                c.finite(path, v);
            }
        }
        if let (Some(a), Some(b)) = (s.x_min_mm, s.x_max_mm) {
            if !(b > a) {
                c.fail("scan.x_max_mm", format!("must exceed scan.x_min_mm ({a}), got {b}"));
            }
        }
        if let (Some(a), Some(b)) = (s.y_min_mm, s.y_max_mm) {
            if !(b > a) {
                c.fail("scan.y_max_mm", format!("must exceed scan.y_min_mm ({a}), got {b}"));
            }
        }
        for (path, n) in [("scan.nx", s.nx), ("scan.ny", s.ny)] {
            if !(2..=MAX_GRID_POINTS).contains(&n) {
                c.fail(path, format!("must lie in [2, {MAX_GRID_POINTS}], got {n}"));
            }
        }

        c.finite("d2.x_mm", self.d2.x_mm);
        c.finite("d2.y_mm", self.d2.y_mm);
        if self.decomposition.n_max > MAX_CLI_N_MAX.min(MAX_TABLE_ORDER) {
            c.fail("decomposition.n_max", format!("must not exceed {MAX_CLI_N_MAX}, got {}", self.decomposition.n_max));
        }
        c.non_negative("apertures.d1_radius_mm", self.apertures.d1_radius_mm);
        c.non_negative("apertures.d2_radius_mm", self.apertures.d2_radius_mm);
        if self.output.formats.is_empty() {
            c.fail("output.formats", "must name at least one format");
        }

        if c.0.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(c.0))
        }
    }

    /// SHA-256 over the canonical TOML of every field that affects computed values.
    pub fn hash(&self) -> String {
        let mut physics = self.clone();
        physics.output = OutputConfig::default();
        let canonical = toml::to_string(&physics).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn beam(&self) -> BeamSpec {
        BeamSpec { wavelength: self.pump.wavelength_nm * 1e-9, waist: self.pump.waist_mm * 1e-3, waist_plane_z: 0.0 }
    }

    pub fn pump_spec(&self) -> PumpSpec {
        PumpSpec::lg(LGIndex { p: self.pump.p, l: self.pump.l }, self.beam())
    }

    pub fn crystal_params(&self) -> spdc_core::Result<CrystalParams> {
        CrystalParams::for_pump(self.crystal.length_mm * 1e-3, &self.beam())
    }

    pub fn model(&self) -> spdc_core::Result<BiphotonModel> {
        BiphotonModel::new(self.pump_spec(), self.crystal_params()?, self.detection.z_m, self.detection.thin_crystal)
    }

    pub fn beamsplitter_spec(&self) -> spdc_core::Result<BeamSplitterSpec> {
        BeamSplitterSpec::new(self.beamsplitter.t, self.beamsplitter.r)
    }

    pub fn d2_point(&self) -> TransversePoint {
        TransversePoint::new(self.d2.x_mm * 1e-3, self.d2.y_mm * 1e-3)
    }

    /// Explicit scan window, or `±3` effective waists around `-d2`.
    pub fn scan_grid(&self, model: &BiphotonModel) -> spdc_core::Result<ScanGrid> {
        let s = &self.scan;
        match (s.x_min_mm, s.x_max_mm, s.y_min_mm, s.y_max_mm) {
            (Some(x0), Some(x1), Some(y0), Some(y1)) => {
                ScanGrid::new(x0 * 1e-3, x1 * 1e-3, y0 * 1e-3, y1 * 1e-3, s.nx, s.ny)
            }
            _ => {
                let c = -self.d2_point();
                let h = DEFAULT_GRID_WAISTS * effective_waist(model);
                ScanGrid::new(c.x - h, c.x + h, c.y - h, c.y + h, s.nx, s.ny)
            }
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime.into()
    }
}

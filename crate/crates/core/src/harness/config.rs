//! Experiment configuration: TOML sections, `--set` overrides and validation.
//!
//! Every section and key has a default, so an empty file is a valid config.
//! Unknown keys are rejected. Errors name the dotted key path and, when the
//! value came from a file, its line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Boundary;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub lattice: LatticeSection,
    pub mass: MassSection,
    pub initial: InitialSection,
    pub curved: CurvedSection,
    pub equilibrium: EquilibriumSection,
    pub grid: GridSection,
    pub packet2d: Packet2dSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impurity: Option<ImpuritySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub njl: Option<NjlSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Split,
    Qlb,
    Naive,
    Equilibrium,
    Curved,
    Walk2d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Defaults per subcommand: `qlb` for run1d, `curved`, `walk2d`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    pub steps: u64,
    /// Snapshot stride in steps.
    pub stride: u64,
    pub seed: u64,
    /// Where results go. Not part of the canonical config, so moving the
    /// output does not change the config hash.
    #[serde(skip_serializing)]
    pub output: PathBuf,
    pub checkpoint: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            scheme: None,
            steps: 100,
            stride: 100,
            seed: 0,
            output: PathBuf::from("out"),
            checkpoint: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryChoice {
    #[default]
    Periodic,
    Reflecting,
}

impl From<BoundaryChoice> for Boundary {
    fn from(b: BoundaryChoice) -> Self {
        match b {
            BoundaryChoice::Periodic => Boundary::Periodic,
            BoundaryChoice::Reflecting => Boundary::Reflecting,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    pub n: usize,
    pub dz: f64,
    /// Defaults to `dz`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub boundary: BoundaryChoice,
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection {
            n: 512,
            dz: 1.0,
            dt: None,
            boundary: BoundaryChoice::Periodic,
        }
    }
}

impl LatticeSection {
    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(self.dz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MassKind {
    /// `M₀ I + M·σ` from `m0, mx, my, mz`.
    #[default]
    Constant,
    /// Per-site table from `file` (columns `j,m0,mx,my,mz`).
    Sampled,
    /// `My(z) = my·tanh((z − center)/width)`, other components constant.
    Kink,
    /// `M₀ = m0 + v` inside `|z − center| < width/2`, `m0` outside.
    Barrier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MassSection {
    pub kind: MassKind,
    pub m0: f64,
    pub mx: f64,
    /// Also accepted as `m`: the Majorana mass.
    #[serde(alias = "m")]
    pub my: f64,
    pub mz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    pub v: f64,
    /// Defaults to the middle of the lattice.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    pub width: f64,
}

impl Default for MassSection {
    fn default() -> Self {
        MassSection {
            kind: MassKind::Constant,
            m0: 0.0,
            mx: 0.0,
            my: 0.0,
            mz: 0.0,
            file: None,
            v: 0.0,
            center: None,
            width: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    #[default]
    Gaussian,
    Plane,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub kind: InitialKind,
    pub sigma: f64,
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    pub site: usize,
    /// `[re ψ₁, im ψ₁, re ψ₂, im ψ₂]`
    pub weights: [f64; 4],
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            kind: InitialKind::Gaussian,
            sigma: 8.0,
            k: 0.0,
            center: None,
            site: 0,
            weights: [1.0, 0.0, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AKind {
    #[default]
    Constant,
    Linear,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    /// `Q = −iM` from the `[mass]` section.
    #[default]
    Mass,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvedSection {
    pub a: AKind,
    /// Defaults to `c = dz/dt`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    pub eps: f64,
    pub depth: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    pub width: f64,
    pub source: SourceKind,
}

impl Default for CurvedSection {
    fn default() -> Self {
        CurvedSection {
            a: AKind::Constant,
            a0: None,
            eps: 0.0,
            depth: 0.0,
            center: None,
            width: 1.0,
            source: SourceKind::Mass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FormChoice {
    #[default]
    Exact,
    Paper,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquilibriumSection {
    /// Defaults to `dt`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub form: FormChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub nz: usize,
    pub ny: usize,
    pub h: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { nz: 256, ny: 256, h: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Packet2dSection {
    pub sigma: f64,
    pub kz: f64,
    pub ky: f64,
    pub cu: f64,
    pub cd: f64,
    /// Defaults to the middle of the grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_y: Option<f64>,
}

impl Default for Packet2dSection {
    fn default() -> Self {
        Packet2dSection {
            sigma: 12.0,
            kz: 0.0,
            ky: 0.0,
            cu: 0.5,
            cd: 0.5,
            center_z: None,
            center_y: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpuritySection {
    pub concentration: f64,
    pub v: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NjlSection {
    pub g: f64,
    pub m: f64,
}

/// Parsed configuration plus the text it came from, for line lookups.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    source: String,
    /// Directory that relative paths in the file are resolved against.
    pub base_dir: PathBuf,
    overridden: Vec<String>,
}

impl LoadedConfig {
    /// Config error for `path`, with the line it was set on when known.
    pub fn error(&self, path: &str, message: impl Into<String>) -> Error {
        let line = if self.overridden.iter().any(|p| p == path) {
            None
        } else {
            locate(&self.source, path)
        };
        Error::Config {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Canonical TOML of the effective config, used for the hash and metadata.
    pub fn canonical(&self) -> String {
        toml::to_string(&self.config).expect("config serialises")
    }

    /// The flat 1-D schemes stream exactly one site per step.
    pub fn require_cfl_one(&self) -> Result<()> {
        let l = &self.config.lattice;
        if (l.dt() - l.dz).abs() > 1e-12 * l.dz {
            return Err(self.error(
                "lattice.dt",
                format!("CFL = 1 required (dt = dz), got dz = {}, dt = {}", l.dz, l.dt()),
            ));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Section name in effect at byte `offset`.
fn section_at(text: &str, offset: usize) -> String {
    let mut section = String::new();
    for line in text[..offset.min(text.len())].lines() {
        let t = line.trim();
        if t.starts_with('[') && t.ends_with(']') {
            section = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
    }
    section
}

/// Line on which dotted `path` is assigned, if it appears in `text`.
fn locate(text: &str, path: &str) -> Option<usize> {
    let (section, key) = path.rsplit_once('.').unwrap_or(("", path));
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') && t.ends_with(']') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn from_toml_error(text: &str, e: &toml::de::Error) -> Error {
    let message = e.message().to_string();
    let Some(span) = e.span() else {
        return Error::Config {
            path: "<config>".into(),
            line: None,
            message,
        };
    };
    let line = line_of(text, span.start);
    let section = section_at(text, span.start);
    let key = text
        .lines()
        .nth(line - 1)
        .and_then(|l| l.split_once('='))
        .map(|(k, _)| k.trim().to_string());
    let path = match key {
        Some(k) if section.is_empty() => k,
        Some(k) => format!("{section}.{k}"),
        None if section.is_empty() => "<config>".into(),
        None => section,
    };
    Error::Config {
        path,
        line: Some(line),
        message,
    }
}

/// Parse one `--set key.path=value` override into the table.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<String> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| Error::Config {
        path: spec.to_string(),
        line: None,
        message: "override must look like section.key=value".into(),
    })?;
    let path = path.trim();
    // Bare words that are not valid TOML values are taken as strings.
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let mut parts: Vec<&str> = path.split('.').collect();
    let key = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| Error::Config {
        path: path.to_string(),
        line: None,
        message: "empty key in override".into(),
    })?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| Error::Config {
            path: path.to_string(),
            line: None,
            message: format!("`{p}` is not a section"),
        })?;
    }
    cur.insert(key.to_string(), value);
    Ok(path.to_string())
}

/// Parse `text` (as read from `base_dir`), apply overrides and validate.
pub fn parse_config(text: &str, base_dir: &Path, overrides: &[String]) -> Result<LoadedConfig> {
    // Parsing the raw text first gives file errors their line numbers.
    let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| from_toml_error(text, &e))?;
    let mut overridden = Vec::new();
    if !overrides.is_empty() {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| from_toml_error(text, &e))?;
        for o in overrides {
            overridden.push(apply_override(&mut table, o)?);
        }
        config = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config {
            path: overridden.join(", "),
            line: None,
            message: e.message().to_string(),
        })?;
    }
    let loaded = LoadedConfig {
        config,
        source: text.to_string(),
        base_dir: base_dir.to_path_buf(),
        overridden,
    };
    validate(&loaded)?;
    Ok(loaded)
}

pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<LoadedConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            parse_config(&text, &base, overrides)
        }
        None => parse_config("", Path::new("."), overrides),
    }
}

fn positive(cfg: &LoadedConfig, path: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(cfg.error(path, format!("must be positive and finite, got {x}")))
    }
}

fn finite(cfg: &LoadedConfig, path: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(cfg.error(path, format!("must be finite, got {x}")))
    }
}

fn validate(cfg: &LoadedConfig) -> Result<()> {
    let c = &cfg.config;
    if c.run.stride == 0 {
        return Err(cfg.error("run.stride", "must be at least 1"));
    }
    if c.lattice.n < 4 {
        return Err(cfg.error("lattice.n", format!("needs at least 4 sites, got {}", c.lattice.n)));
    }
    positive(cfg, "lattice.dz", c.lattice.dz)?;
    positive(cfg, "lattice.dt", c.lattice.dt())?;
    if matches!(
        c.run.scheme,
        Some(Scheme::Split | Scheme::Qlb | Scheme::Naive | Scheme::Equilibrium)
    ) {
        cfg.require_cfl_one()?;
    }
    let m = &c.mass;
    for (k, x) in [("m0", m.m0), ("mx", m.mx), ("my", m.my), ("mz", m.mz), ("v", m.v)] {
        finite(cfg, &format!("mass.{k}"), x)?;
    }
    if matches!(m.kind, MassKind::Kink | MassKind::Barrier) {
        positive(cfg, "mass.width", m.width)?;
    }
    if m.kind == MassKind::Sampled {
        let file = m
            .file
            .as_ref()
            .ok_or_else(|| cfg.error("mass.file", "sampled mass needs a file"))?;
        if !cfg.resolve(file).is_file() {
            return Err(cfg.error("mass.file", format!("no such file: {}", cfg.resolve(file).display())));
        }
    }
    let i = &c.initial;
    if i.kind == InitialKind::Gaussian {
        positive(cfg, "initial.sigma", i.sigma)?;
    }
    if i.kind == InitialKind::Delta && i.site >= c.lattice.n {
        return Err(cfg.error("initial.site", format!("site {} outside {} sites", i.site, c.lattice.n)));
    }
    if i.weights.iter().all(|w| *w == 0.0) || i.weights.iter().any(|w| !w.is_finite()) {
        return Err(cfg.error("initial.weights", "weights must be finite and not all zero"));
    }
    if let Some(a0) = c.curved.a0 {
        positive(cfg, "curved.a0", a0)?;
    }
    if c.curved.a == AKind::Bump {
        positive(cfg, "curved.width", c.curved.width)?;
    }
    if let Some(tau) = c.equilibrium.tau {
        positive(cfg, "equilibrium.tau", tau)?;
    }
    let g = &c.grid;
    if g.nz < 4 || g.ny < 4 {
        return Err(cfg.error("grid.nz", format!("2-D grid needs at least 4×4 sites, got {}×{}", g.nz, g.ny)));
    }
    positive(cfg, "grid.h", g.h)?;
    let p = &c.packet2d;
    positive(cfg, "packet2d.sigma", p.sigma)?;
    let norm = 2.0 * p.cu * p.cu + 2.0 * p.cd * p.cd;
    if (norm - 1.0).abs() > 1e-12 {
        return Err(cfg.error("packet2d.cu", format!("2·cu² + 2·cd² must equal 1, got {norm}")));
    }
    if let Some(imp) = &c.impurity {
        if !(0.0..=1.0).contains(&imp.concentration) {
            return Err(cfg.error(
                "impurity.concentration",
                format!("must lie in [0, 1], got {}", imp.concentration),
            ));
        }
        finite(cfg, "impurity.v", imp.v)?;
        finite(cfg, "impurity.mass", imp.mass)?;
    }
    if let Some(njl) = &c.njl {
        finite(cfg, "njl.g", njl.g)?;
        finite(cfg, "njl.m", njl.m)?;
        if c.impurity.is_some() {
            return Err(cfg.error("njl", "choose either [impurity] or [njl], not both"));
        }
    }
    Ok(())
}

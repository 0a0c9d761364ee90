//! Run configuration: TOML tree, presets, `--set` overrides.

use std::path::{Path, PathBuf};

use rotcool::coupling::PrefactorUnits;
use rotcool::lindblad::JumpConvention;
use rotcool::microwave::{Envelope, MixingConvention};
use rotcool::rotor::MoleculeSpec;
use rotcool::trap::{MassScaling, ReferenceSpecies};
use rotcool::{presets, FieldAxis};
use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::CliError;

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Preset the file was expanded from, kept for the record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub molecule: Option<MoleculeConfig>,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub levels: LevelsConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub cooling: CoolingConfig,
    #[serde(default)]
    pub pulses: Vec<PulseConfig>,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
}

/// A bundled molecule name, explicit constants, or a name with some fields overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_c: Option<f64>,
}

impl MoleculeConfig {
    fn from_spec(preset: Option<String>, spec: &MoleculeSpec) -> Self {
        Self {
            preset,
            name: Some(spec.name.clone()),
            mass: Some(spec.mass),
            a: Some(spec.a),
            b: Some(spec.b),
            c: Some(spec.c),
            mu_a: Some(spec.mu_a),
            mu_b: Some(spec.mu_b),
            mu_c: Some(spec.mu_c),
        }
    }

    pub fn spec(&self) -> Result<MoleculeSpec, CliError> {
        let base = match &self.preset {
            Some(name) => Some(presets::molecule(name).map_err(|_| CliError::UnknownPreset(name.clone()))?),
            None => None,
        };
        let pick = |field: &str, own: Option<f64>, from: Option<f64>| {
            own.or(from)
                .ok_or_else(|| CliError::Config(format!("molecule.{field} is required without a preset")))
        };
        let b = base.as_ref();
        let spec = MoleculeSpec {
            name: self
                .name
                .clone()
                .or_else(|| b.map(|s| s.name.clone()))
                .unwrap_or_else(|| "molecule".into()),
            mass: pick("mass", self.mass, b.map(|s| s.mass))?,
            a: pick("a", self.a, b.map(|s| s.a))?,
            b: pick("b", self.b, b.map(|s| s.b))?,
            c: pick("c", self.c, b.map(|s| s.c))?,
            mu_a: self.mu_a.or(b.map(|s| s.mu_a)).unwrap_or(0.0),
            mu_b: self.mu_b.or(b.map(|s| s.mu_b)).unwrap_or(0.0),
            mu_c: self.mu_c.or(b.map(|s| s.mu_c)).unwrap_or(0.0),
        };
        spec.validate().map_err(CliError::from_core_config)?;
        Ok(spec)
    }
}

/// Atom–molecule–atom chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub atom_mass: f64,
    pub axial_mhz: f64,
    pub radial_mhz: f64,
    /// Mode carrying the cooled transition.
    pub mode: String,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            atom_mass: presets::YB172_MASS,
            axial_mhz: 1.0,
            radial_mhz: 8.87,
            mode: "zigzag".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelsConfig {
    pub jmax: i64,
}

impl Default for LevelsConfig {
    fn default() -> Self {
        Self { jmax: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub molecules: Vec<String>,
    pub mass_min: f64,
    pub mass_max: f64,
    pub mass_points: usize,
    pub radial_min_mhz: f64,
    pub radial_max_mhz: f64,
    pub radial_points: usize,
    pub jmax: i64,
    pub tolerance_khz: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            molecules: presets::MOLECULE_NAMES.iter().map(|s| s.to_string()).collect(),
            mass_min: 70.0,
            mass_max: 270.0,
            mass_points: 200,
            radial_min_mhz: 0.1,
            radial_max_mhz: 20.0,
            radial_points: 200,
            jmax: 10,
            tolerance_khz: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoolingConfig {
    /// Cooled pair (j₁, j₂) as level labels, j₁ lower.
    pub lower: String,
    pub upper: String,
    pub rabi_mhz: f64,
    pub gamma_mhz: f64,
    pub eta: f64,
    pub atom_displacements: Vec<f64>,
    /// Ẽ₀ in kHz indexed by |M|; empty means computed from the chain.
    pub coupling_khz: Vec<f64>,
    /// Mode frequency in MHz; absent means the cooled transition frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_mhz: Option<f64>,
    pub phases: Vec<f64>,
    pub duration_ms: f64,
    pub record_every_ms: f64,
    /// Initial phonon distribution; empty means uniform over 0..=n_max.
    pub initial_phonons: Vec<f64>,
    /// Initial (j₁, j₂) populations of every block.
    pub initial_rotor: [f64; 2],
    /// M blocks to propagate; empty means all.
    pub blocks: Vec<i64>,
}

impl Default for CoolingConfig {
    fn default() -> Self {
        Self {
            lower: "3_31".into(),
            upper: "3_30".into(),
            rabi_mhz: 0.2,
            gamma_mhz: 0.1,
            eta: 0.012,
            atom_displacements: vec![1.0, 1.0],
            coupling_khz: vec![0.0, 2.7, 5.7, 8.4],
            mode_mhz: None,
            detuning_mhz: None,
            phases: vec![0.0, 0.0],
            duration_ms: 8.0,
            record_every_ms: 0.1,
            initial_phonons: Vec::new(),
            initial_rotor: [0.5, 0.5],
            blocks: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    /// Design transition "level:M", e.g. "2_21:1"; with `upper` it fixes carrier and duration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_us: Option<f64>,
    pub polarization: FieldAxis,
    pub admixture: f64,
    pub admixed: FieldAxis,
    pub rabi_per_debye_khz: f64,
    pub envelope: Envelope,
    /// Pulse area on the design transition, rad.
    pub area: f64,
    /// Pulses with the same group are applied jointly; groups run in order of first appearance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            lower: None,
            upper: None,
            carrier_mhz: None,
            duration_us: None,
            polarization: FieldAxis::X,
            admixture: 0.0,
            admixed: FieldAxis::Z,
            rabi_per_debye_khz: 10.0,
            envelope: Envelope::default(),
            area: std::f64::consts::PI,
            group: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveConfig {
    pub levels: Vec<String>,
    /// CSV with columns level,m,population; absent means uniform.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            levels: vec!["2_21".into(), "3_31".into(), "3_30".into()],
            input: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Depletion,
    SingleState,
    /// Steps listed in `protocol.steps` over the `drive.levels` subspace.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    /// z admixture (depletion) or σ₋ admixture (single state).
    pub admixture: f64,
    pub iterations: usize,
    pub stage_every: usize,
    /// Error at or below which the run counts as converged.
    pub threshold: f64,
    pub record_steps: bool,
    /// Custom plans: "cool" or "pulse:<group>".
    pub steps: Vec<String>,
    /// Custom plans: target "level" or "level:M".
    pub target: String,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            kind: ProtocolKind::Depletion,
            admixture: 0.0,
            iterations: 10,
            stage_every: 3,
            threshold: 1e-2,
            record_steps: false,
            steps: Vec::new(),
            target: "3_31".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: bool,
    pub json: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            csv: true,
            json: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub rtol: f64,
    pub atol: f64,
    pub phonon_cutoff: usize,
    pub atoms: usize,
    pub secular: bool,
    pub jump: JumpConvention,
    pub mass_scaling: MassScaling,
    pub mass_reference: ReferenceSpecies,
    pub mixing: MixingConvention,
    pub prefactor_units: PrefactorUnits,
    pub coupling_cutoff_mhz: f64,
    pub segments: usize,
    pub resonance_tolerance_mhz: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            phonon_cutoff: 2,
            atoms: 2,
            secular: true,
            jump: JumpConvention::Rate,
            mass_scaling: MassScaling::None,
            mass_reference: ReferenceSpecies::Molecule,
            mixing: MixingConvention::Intensity,
            prefactor_units: PrefactorUnits::HzOverTwoPi,
            coupling_cutoff_mhz: 100.0,
            segments: 400,
            resonance_tolerance_mhz: 1e-3,
        }
    }
}

impl NumericsConfig {
    /// One line naming every convention, for output metadata.
    pub fn conventions(&self) -> String {
        format!(
            "secular={} jump={} mass_scaling={} mass_reference={} mixing={} prefactor_units={} phonon_cutoff={} rtol={:e} atol={:e}",
            self.secular,
            enum_name(&self.jump),
            enum_name(&self.mass_scaling),
            enum_name(&self.mass_reference),
            enum_name(&self.mixing),
            enum_name(&self.prefactor_units),
            self.phonon_cutoff,
            self.rtol,
            self.atol
        )
    }
}

/// Serialized name of a unit enum variant.
pub fn enum_name<T: Serialize>(value: &T) -> String {
    match Value::try_from(value) {
        Ok(Value::String(s)) => s,
        _ => "?".into(),
    }
}

pub const PRESET_NAMES: [&str; 6] = [
    "propanediol-depletion",
    "propanediol-single-state",
    "glutamine-2_21",
    "glutamine-3_22",
    "scan-window",
    "propanediol",
];

/// Preset as a TOML tree, merged underneath the user's file.
pub fn preset(name: &str) -> Result<Value, CliError> {
    let text = match name {
        "propanediol-depletion" | "propanediol" => {
            r#"
            [molecule]
            preset = "propanediol"
            mu_b = 1.0
            [chain]
            radial_mhz = 8.87
            [cooling]
            lower = "3_31"
            upper = "3_30"
            rabi_mhz = 0.2
            gamma_mhz = 0.1
            eta = 0.012
            coupling_khz = [0.0, 2.7, 5.7, 8.4]
            duration_ms = 8.0
            [protocol]
            kind = "depletion"
            iterations = 10
            "#
        }
        "propanediol-single-state" => {
            r#"
            [molecule]
            preset = "propanediol"
            mu_b = 1.0
            [chain]
            radial_mhz = 8.87
            [cooling]
            lower = "3_31"
            upper = "3_30"
            rabi_mhz = 0.2
            gamma_mhz = 0.1
            eta = 0.012
            coupling_khz = [0.0, 2.7, 5.7, 8.4]
            duration_ms = 8.0
            [protocol]
            kind = "single_state"
            iterations = 30
            stage_every = 3
            threshold = 1e-3
            "#
        }
        "glutamine-2_21" => {
            r#"
            [molecule]
            preset = "glutamine"
            [chain]
            radial_mhz = 3.76
            [cooling]
            lower = "2_21"
            upper = "2_20"
            rabi_mhz = 0.05
            gamma_mhz = 0.05
            eta = 0.033
            coupling_khz = [0.0, 0.38, 0.8]
            duration_ms = 30.0
            [drive]
            levels = ["2_21", "2_20"]
            "#
        }
        "glutamine-3_22" => {
            r#"
            [molecule]
            preset = "glutamine"
            [chain]
            radial_mhz = 16.95
            [cooling]
            lower = "3_22"
            upper = "3_21"
            rabi_mhz = 0.2
            gamma_mhz = 0.1
            eta = 0.015
            coupling_khz = [0.0, 2.2, 4.3, 6.6]
            duration_ms = 10.0
            [drive]
            levels = ["3_22", "3_21"]
            "#
        }
        "scan-window" => {
            r#"
            [molecule]
            preset = "propanediol"
            [chain]
            axial_mhz = 1.0
            [scan]
            mass_min = 70.0
            mass_max = 270.0
            radial_max_mhz = 20.0
            "#
        }
        other => return Err(CliError::UnknownPreset(other.to_string())),
    };
    let mut value: Value = toml::from_str(text).map_err(|e| CliError::Parse(format!("preset {name}: {e}")))?;
    if let Value::Table(t) = &mut value {
        t.insert("preset".into(), Value::String(name.into()));
    }
    Ok(value)
}

/// Recursive table merge; `over` wins.
pub fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(existing) if existing.is_table() && v.is_table() => merge(existing, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies `a.b.c=value`; the value is read as a TOML literal, else as a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let keys: Vec<&str> = path.trim().split('.').collect();
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override `{path}`: `{key}` is not a table")))?;
        node = table
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(Default::default()));
    }
    node.as_table_mut()
        .ok_or_else(|| CliError::Config(format!("override `{path}` does not address a table entry")))?
        .insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Sources of one configuration, lowest precedence first.
#[derive(Debug, Clone, Default)]
pub struct ConfigSources<'a> {
    pub preset: Option<&'a str>,
    pub path: Option<&'a Path>,
    pub overrides: &'a [String],
}

pub fn load(sources: &ConfigSources<'_>) -> Result<RunConfig, CliError> {
    let mut root = Value::Table(Default::default());
    let file = match sources.path {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Some(toml::from_str::<Value>(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let named = sources.preset.map(str::to_string).or_else(|| {
        file.as_ref()
            .and_then(|f| f.get("preset"))
            .and_then(|v| v.as_str())
            .map(str::to_string)
    });
    if let Some(name) = named {
        merge(&mut root, preset(&name)?);
    }
    if let Some(f) = file {
        merge(&mut root, f);
    }
    for o in sources.overrides {
        apply_override(&mut root, o)?;
    }
    resolve(root)
}

pub fn load_str(text: &str) -> Result<RunConfig, CliError> {
    let value: Value = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut root = Value::Table(Default::default());
    if let Some(name) = value.get("preset").and_then(|v| v.as_str()) {
        merge(&mut root, preset(name)?);
    }
    merge(&mut root, value);
    resolve(root)
}

fn resolve(root: Value) -> Result<RunConfig, CliError> {
    let mut config: RunConfig = root
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    let molecule = config
        .molecule
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `molecule` block".into()))?;
    let spec = molecule.spec()?;
    config.molecule = Some(MoleculeConfig::from_spec(molecule.preset.clone(), &spec));
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn molecule_spec(&self) -> Result<MoleculeSpec, CliError> {
        self.molecule
            .as_ref()
            .ok_or_else(|| CliError::Config("missing `molecule` block".into()))?
            .spec()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, reason: &str| Err(CliError::Config(format!("`{field}`: {reason}")));
        if self.levels.jmax < 0 {
            return bad("levels.jmax", "must be non-negative");
        }
        if self.scan.mass_points < 1 || self.scan.radial_points < 2 {
            return bad("scan", "needs at least one mass and two radial points");
        }
        if !(self.scan.mass_min > 0.0 && self.scan.mass_max >= self.scan.mass_min) {
            return bad("scan.mass_min", "mass range must be positive and ordered");
        }
        if !(self.scan.radial_min_mhz > 0.0 && self.scan.radial_max_mhz > self.scan.radial_min_mhz) {
            return bad("scan.radial_min_mhz", "radial range must be positive and ordered");
        }
        if !(self.cooling.record_every_ms > 0.0) {
            return bad("cooling.record_every_ms", "must be positive");
        }
        if !(self.protocol.threshold >= 0.0) {
            return bad("protocol.threshold", "must be non-negative");
        }
        if self.protocol.stage_every == 0 {
            return bad("protocol.stage_every", "must be at least 1");
        }
        for (i, p) in self.pulses.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.admixture) {
                return bad(&format!("pulses[{i}].admixture"), "must lie in [0, 1]");
            }
            let designed = p.lower.is_some() && p.upper.is_some();
            let explicit = p.carrier_mhz.is_some() && p.duration_us.is_some();
            if !designed && !explicit {
                return bad(&format!("pulses[{i}]"), "needs lower+upper or carrier_mhz+duration_us");
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

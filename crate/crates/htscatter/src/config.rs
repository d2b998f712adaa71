//! JSON run configuration with line-precise validation errors.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use htscatter_core::evolution::{Propagation, RampSchedule};
use htscatter_core::fock::{EnumerationOptions, ModelParams, TruncationSpec};
use htscatter_core::wavepacket::WavepacketSpec;

/// A configuration problem, located in the source text when possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    #[serde(rename = "M")]
    pub mass: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub g: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            mass: 1.0,
            length: 16.0,
            g: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TruncationMode {
    /// Keep the `2^value` lowest states.
    Qubits,
    /// Keep every state with free energy `<= value`.
    Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct TruncationSection {
    pub mode: TruncationMode,
    pub value: f64,
    pub even_particle_number_only: bool,
}

impl Default for TruncationSection {
    fn default() -> Self {
        Self {
            mode: TruncationMode::Qubits,
            value: 10.0,
            even_particle_number_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketSection {
    pub p0: f64,
    pub delta: f64,
}

impl Default for PacketSection {
    fn default() -> Self {
        Self { p0: 2.5, delta: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RampPropagation {
    Exact,
    Trotter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct ScheduleSection {
    pub free_displacement_time: f64,
    pub ramp_tau: f64,
    pub ramp_steps: usize,
    /// Split factors of the ramp: `trotter` uses steps of `dt`.
    pub ramp_propagation: RampPropagation,
    pub dt: f64,
    pub t_max: f64,
    /// Time between samples; a whole number of `dt`.
    pub sample_every: f64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            free_displacement_time: 1.5,
            ramp_tau: 1.0,
            ramp_steps: 100,
            ramp_propagation: RampPropagation::Trotter,
            dt: 0.01,
            t_max: 6.0,
            sample_every: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct ObservablesSection {
    pub grid_size: usize,
    /// Peaks below this fraction of the maximum are ignored for fringes.
    pub fringe_fraction: f64,
}

impl Default for ObservablesSection {
    fn default() -> Self {
        Self {
            grid_size: 512,
            fringe_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsSection {
    pub directory: String,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            formats: vec![OutputFormat::Csv],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "g")]
    Coupling,
    #[serde(rename = "p0")]
    Momentum,
    #[serde(rename = "delta")]
    Width,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Coupling => "g",
            SweepParameter::Momentum => "p0",
            SweepParameter::Width => "delta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct ResourcesSection {
    pub epsilons: Vec<f64>,
    pub emax_from: f64,
    pub emax_to: f64,
    pub emax_step: f64,
    pub nq_per_site: u32,
    pub sqrt_s: f64,
    /// Coupling of the precision comparison, in units of `M²`.
    pub precision_coupling: f64,
    pub sparsity_qubits: Vec<u32>,
    pub max_resolution: usize,
}

impl Default for ResourcesSection {
    fn default() -> Self {
        Self {
            epsilons: vec![0.2, 0.1, 0.05, 0.02, 0.01],
            emax_from: 2.0,
            emax_to: 14.0,
            emax_step: 0.5,
            nq_per_site: 2,
            sqrt_s: 5.0,
            precision_coupling: 1.0,
            sparsity_qubits: (1..=12).collect(),
            max_resolution: 1 << 15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct CircuitSection {
    /// Split step of the ramp and time-step circuits.
    pub dt: f64,
    pub drop_threshold: f64,
    pub reorder: bool,
    /// Time steps appended after the ramp in the self-check.
    pub trotter_steps: usize,
    /// Penalty on padding states; `None` picks one above the spectrum.
    pub penalty: Option<f64>,
}

impl Default for CircuitSection {
    fn default() -> Self {
        Self {
            dt: 0.2,
            drop_threshold: 0.0,
            reorder: true,
            trotter_steps: 0,
            penalty: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub truncation: TruncationSection,
    pub packet: PacketSection,
    pub schedule: ScheduleSection,
    pub observables: ObservablesSection,
    pub outputs: OutputsSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub resources: ResourcesSection,
    pub circuit: CircuitSection,
}

/// A parsed configuration together with its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub source: String,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: 0,
            column: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_source(source)
    }

    pub fn from_source(source: String) -> Result<Self, ConfigError> {
        let config = parse(&source)?;
        Ok(Self { config, source })
    }
}

/// Parses and validates a configuration.
pub fn parse(source: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = serde_json::from_str(source).map_err(|e| ConfigError {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    validate(&config).map_err(|issue| {
        let (line, column) = locate(source, &issue.path).unwrap_or((0, 0));
        ConfigError {
            line,
            column,
            message: format!("{}: {}", issue.path.join("."), issue.message),
        }
    })?;
    Ok(config)
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

/// A semantic problem at a key path.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub path: Vec<&'static str>,
    pub message: String,
}

fn issue(path: &[&'static str], message: impl Into<String>) -> Issue {
    Issue {
        path: path.to_vec(),
        message: message.into(),
    }
}

fn is_multiple(x: f64, unit: f64) -> bool {
    let r = x / unit;
    (r - r.round()).abs() < 1e-9 * r.abs().max(1.0)
}

pub fn validate(c: &RunConfig) -> Result<(), Issue> {
    let m = &c.model;
    if !(m.mass > 0.0 && m.mass.is_finite()) {
        return Err(issue(&["model", "M"], "mass must be positive"));
    }
    if !(m.length > 0.0 && m.length.is_finite()) {
        return Err(issue(&["model", "L"], "volume must be positive"));
    }
    if !(m.g >= 0.0 && m.g.is_finite()) {
        return Err(issue(&["model", "g"], "coupling must be non-negative"));
    }
    let t = &c.truncation;
    match t.mode {
        TruncationMode::Qubits => {
            if !(t.value >= 1.0 && t.value <= 20.0 && t.value.fract() == 0.0) {
                return Err(issue(&["truncation", "value"], "qubit count must be an integer in 1..=20"));
            }
        }
        TruncationMode::Energy => {
            if !(t.value >= 0.0 && t.value.is_finite()) {
                return Err(issue(&["truncation", "value"], "energy cutoff must be non-negative"));
            }
        }
    }
    if !(c.packet.p0 > 0.0 && c.packet.p0.is_finite()) {
        return Err(issue(&["packet", "p0"], "packet momentum must be positive"));
    }
    if !(c.packet.delta > 0.0 && c.packet.delta.is_finite()) {
        return Err(issue(&["packet", "delta"], "packet width must be positive"));
    }
    let s = &c.schedule;
    for (key, v) in [
        ("freeDisplacementTime", s.free_displacement_time),
        ("rampTau", s.ramp_tau),
        ("tMax", s.t_max),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(issue(&["schedule", key], "times must be non-negative"));
        }
    }
    if s.ramp_steps == 0 {
        return Err(issue(&["schedule", "rampSteps"], "ramp needs at least one step"));
    }
    if !(s.dt > 0.0 && s.dt.is_finite()) {
        return Err(issue(&["schedule", "dt"], "time step must be positive"));
    }
    if !(s.sample_every > 0.0) || !is_multiple(s.sample_every, s.dt) {
        return Err(issue(&["schedule", "sampleEvery"], "must be a positive whole number of dt"));
    }
    if !is_multiple(s.t_max, s.sample_every) {
        return Err(issue(&["schedule", "tMax"], "must be a whole number of sampleEvery"));
    }
    if c.observables.grid_size < 2 {
        return Err(issue(&["observables", "gridSize"], "need at least 2 grid points"));
    }
    if !(c.observables.fringe_fraction > 0.0 && c.observables.fringe_fraction < 1.0) {
        return Err(issue(&["observables", "fringeFraction"], "must lie in (0, 1)"));
    }
    if c.outputs.directory.is_empty() {
        return Err(issue(&["outputs", "directory"], "must not be empty"));
    }
    if c.outputs.formats.is_empty() {
        return Err(issue(&["outputs", "formats"], "list at least one format"));
    }
    if let Some(sw) = &c.sweep {
        if sw.values.is_empty() {
            return Err(issue(&["sweep", "values"], "list at least one value"));
        }
        let ok = |v: f64| match sw.parameter {
            SweepParameter::Coupling => v >= 0.0 && v.is_finite(),
            _ => v > 0.0 && v.is_finite(),
        };
        if !sw.values.iter().all(|&v| ok(v)) {
            return Err(issue(&["sweep", "values"], "values out of range for the parameter"));
        }
    }
    let r = &c.resources;
    if r.epsilons.is_empty() {
        return Err(issue(&["resources", "epsilons"], "list at least one epsilon"));
    }
    if !r.epsilons.iter().all(|&e| e > 0.0 && e < 1.0) {
        return Err(issue(&["resources", "epsilons"], "epsilon values must lie in (0, 1)"));
    }
    if !(r.emax_from > 0.0 && r.emax_to >= r.emax_from && r.emax_step > 0.0) {
        return Err(issue(&["resources", "emaxStep"], "need 0 < emaxFrom <= emaxTo and emaxStep > 0"));
    }
    if r.nq_per_site == 0 {
        return Err(issue(&["resources", "nqPerSite"], "must be positive"));
    }
    if !(r.sqrt_s > 2.0 * m.mass) {
        return Err(issue(&["resources", "sqrtS"], "must exceed 2M"));
    }
    if !(r.precision_coupling > 0.0) {
        return Err(issue(&["resources", "precisionCoupling"], "must be positive"));
    }
    if r.sparsity_qubits.iter().any(|&q| q == 0 || q > 14) {
        return Err(issue(&["resources", "sparsityQubits"], "qubit counts must lie in 1..=14"));
    }
    if r.max_resolution < 64 {
        return Err(issue(&["resources", "maxResolution"], "must be at least 64"));
    }
    let k = &c.circuit;
    if !(k.dt > 0.0 && k.dt.is_finite()) {
        return Err(issue(&["circuit", "dt"], "time step must be positive"));
    }
    if k.dt > s.ramp_tau {
        return Err(issue(&["circuit", "dt"], "time step exceeds the ramp time"));
    }
    if !(k.drop_threshold >= 0.0) {
        return Err(issue(&["circuit", "dropThreshold"], "must be non-negative"));
    }
    if let Some(p) = k.penalty {
        if !p.is_finite() {
            return Err(issue(&["circuit", "penalty"], "must be finite"));
        }
    }
    Ok(())
}

/// 1-based line and column of the last key in `path`, searching for each
/// key after the previous one.
pub fn locate(source: &str, path: &[&str]) -> Option<(usize, usize)> {
    let mut from = 0;
    let mut at = None;
    for key in path {
        let needle = format!("\"{key}\"");
        let mut search = from;
        loop {
            let i = source[search..].find(&needle)? + search;
            let rest = source[i + needle.len()..].trim_start();
            if rest.starts_with(':') {
                at = Some(i);
                from = i + needle.len();
                break;
            }
            search = i + needle.len();
        }
    }
    let i = at?;
    let line = source[..i].matches('\n').count() + 1;
    let column = i - source[..i].rfind('\n').map_or(0, |p| p + 1) + 1;
    Some((line, column))
}

impl RunConfig {
    pub fn model_params(&self) -> htscatter_core::Result<ModelParams> {
        ModelParams::new(self.model.mass, self.model.length, self.model.g)
    }

    pub fn truncation_spec(&self) -> TruncationSpec {
        match self.truncation.mode {
            TruncationMode::Qubits => TruncationSpec::QubitCount(self.truncation.value as u32),
            TruncationMode::Energy => TruncationSpec::EnergyCutoff(self.truncation.value),
        }
    }

    pub fn enumeration_options(&self) -> EnumerationOptions {
        EnumerationOptions {
            even_particle_number_only: self.truncation.even_particle_number_only,
            ..EnumerationOptions::default()
        }
    }

    pub fn packet_spec(&self) -> htscatter_core::Result<WavepacketSpec> {
        WavepacketSpec::new(self.packet.p0, self.packet.delta)
    }

    pub fn ramp_schedule(&self) -> htscatter_core::Result<RampSchedule> {
        RampSchedule::new(self.schedule.ramp_tau, self.schedule.ramp_steps)
    }

    pub fn ramp_propagation(&self) -> Propagation {
        match self.schedule.ramp_propagation {
            RampPropagation::Exact => Propagation::Exact,
            RampPropagation::Trotter => Propagation::Trotter { dt: self.schedule.dt },
        }
    }

    /// `E_max` grid of the qubit comparison, endpoints included.
    pub fn emax_grid(&self) -> Vec<f64> {
        let r = &self.resources;
        let n = ((r.emax_to - r.emax_from) / r.emax_step + 1e-9).floor() as usize;
        (0..=n).map(|i| r.emax_from + i as f64 * r.emax_step).collect()
    }

    /// The configuration with one sweep value applied.
    pub fn with_sweep_value(&self, parameter: SweepParameter, value: f64) -> Self {
        let mut c = self.clone();
        match parameter {
            SweepParameter::Coupling => c.model.g = value,
            SweepParameter::Momentum => c.packet.p0 = value,
            SweepParameter::Width => c.packet.delta = value,
        }
        c.sweep = None;
        c
    }
}

//! Strict JSON run configurations.
//!
//! Unknown fields are rejected everywhere so a typo in a config cannot
//! silently change an experiment.

use serde::{Deserialize, Serialize};

use ising_ring::lattice::ModelParams;
use ising_ring::schedule::{DriveSchedule, ModulatedFlip};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ModelConfig {
    pub n_sites: usize,
    #[serde(default = "one")]
    pub j: f64,
    pub h_x: f64,
    pub h_z: f64,
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn params(&self) -> Result<ModelParams, ising_ring::Error> {
        ModelParams::new(self.n_sites, self.j, self.h_x, self.h_z)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Evolve(EvolveConfig),
    Scan(ScanConfig),
    Collapse(CollapseConfig),
    Redfield(RedfieldConfig),
    Tebd(TebdConfig),
    TwoBubble(TwoBubbleConfig),
    Sample(SampleConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Evolve(_) => "evolve",
            Experiment::Scan(_) => "scan",
            Experiment::Collapse(_) => "collapse",
            Experiment::Redfield(_) => "redfield",
            Experiment::Tebd(_) => "tebd",
            Experiment::TwoBubble(_) => "two-bubble",
            Experiment::Sample(_) => "sample",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    ExactDense,
    ExactKrylov,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleConfig {
    /// Hold the model fields for a fixed duration.
    Constant { duration: f64 },
    /// The four-segment decay-observation protocol.
    Protocol {
        irt: f64,
        pause: f64,
        mt: f64,
        h_z_initial: f64,
        flip: FlipConfig,
    },
    /// Explicit segment list (see the schedule module's serde format).
    Segments { segments: Vec<ising_ring::schedule::Segment> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FlipConfig {
    pub target_hz: f64,
    /// Crossing time as `k · h_z²`.
    pub crossing_scale: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_decay")]
    pub decay_time: f64,
    #[serde(default)]
    pub frequency: f64,
}

fn default_decay() -> f64 {
    ising_ring::schedule::DEFAULT_SETTLING_TIME / 100f64.ln()
}

impl ScheduleConfig {
    pub fn build(&self, model: &ModelConfig) -> Result<DriveSchedule, ising_ring::Error> {
        match self {
            ScheduleConfig::Constant { duration } => {
                Ok(DriveSchedule::constant(model.h_x, model.h_z, *duration))
            }
            ScheduleConfig::Protocol {
                irt,
                pause,
                mt,
                h_z_initial,
                flip,
            } => {
                let flip = ModulatedFlip::with_crossing_scale(
                    flip.target_hz,
                    flip.crossing_scale,
                    flip.amplitude,
                    flip.decay_time,
                    flip.frequency,
                )?;
                DriveSchedule::decay_protocol(*irt, *pause, *mt, model.h_x, *h_z_initial, flip)
            }
            ScheduleConfig::Segments { segments } => DriveSchedule::new(segments.clone()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvolveConfig {
    pub model: ModelConfig,
    pub schedule: ScheduleConfig,
    pub dt: f64,
    pub record_every: f64,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    #[serde(default)]
    pub strict: bool,
}

fn default_backend() -> Backend {
    Backend::ExactKrylov
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScanConfig {
    pub model: ModelConfig,
    /// Strictly monotone grid: `start`, `stop` inclusive, `steps` points.
    pub h_z_start: f64,
    pub h_z_stop: f64,
    pub h_z_steps: usize,
    /// Flip-then-pause template: crossing `max(scale·h_z², floor)`.
    pub crossing_scale: f64,
    #[serde(default = "default_crossing_floor")]
    pub crossing_floor: f64,
    pub h_z_initial: f64,
    pub pause: f64,
    pub dt: f64,
    pub record_every: f64,
}

fn default_crossing_floor() -> f64 {
    2.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CollapseConfig {
    pub model: ModelConfig,
    /// Transverse-field values labelling the curves (h_z stays fixed).
    pub h_x_values: Vec<f64>,
    /// Common window in `h_x² t`.
    pub x_max: f64,
    pub samples: usize,
    /// Exponents to tabulate.
    pub exponents: Vec<f64>,
    /// Optional exponent search range `(lo, hi, steps)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<(f64, f64, usize)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RedfieldConfig {
    pub model: ModelConfig,
    pub eta: f64,
    pub omega_c: f64,
    /// "paper-literal", "cutoff-corrected", or thermal with a temperature.
    pub spectrum: SpectrumConfig,
    #[serde(default = "default_true")]
    pub secular: bool,
    pub total_time: f64,
    pub record_every: f64,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectrumConfig {
    PaperLiteral,
    CutoffCorrected,
    Thermal { temperature: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TebdConfig {
    pub model: ModelConfig,
    pub chi: usize,
    pub dt: f64,
    pub cutoff: f64,
    #[serde(default = "default_discard")]
    pub boundary_discard: usize,
    pub total_time: f64,
    pub record_every: f64,
    /// Initial product state, site 1 first; all-up when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(default)]
    pub strict: bool,
}

fn default_discard() -> usize {
    ising_ring::mps::DEFAULT_BOUNDARY_DISCARD
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TwoBubbleConfig {
    pub model: ModelConfig,
    pub n1: usize,
    pub n2: usize,
    pub total_time: f64,
    pub record_every: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SampleConfig {
    pub model: ModelConfig,
    /// Evolve first when present, otherwise sample the initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub count: usize,
    /// Initial product state, site 1 first; all-up when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
}

fn default_dt() -> f64 {
    0.05
}

/// FNV-1a over the canonical serialization; changes iff any field changes.
pub fn config_hash(config: &RunConfig) -> u64 {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let mut hash = 0xcbf29ce484222325u64;
    for b in canonical.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

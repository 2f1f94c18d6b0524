//! JSON scenario files.
//!
//! Every field is optional in the document. With `use_paper_defaults: true`
//! omitted values fall back to the reference deployment; without it the
//! deployment itself (scheme, transmitters, receive gain, geometry,
//! rectifier, node) must be spelled out. All violations are reported
//! together.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wpt_core::node::ConsumptionCase;
use wpt_core::presets;
use wpt_core::units::db_to_linear;
use wpt_core::RectifierModel;
use wpt_core::{GainConvention, Geometry, LinkBudget, NodeConfig, Scenario, Scheme, Transmitter};

use crate::error::HarnessError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub use_paper_defaults: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeName>,
    /// Carrier of every transmitter that does not set its own.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_frequency_hz: Option<f64>,
    /// Added as `i * offset` to the i-th transmitter's default carrier under
    /// `mpcsd` only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency_offset_hz: Option<f64>,
    /// Applies to defaulted antenna gains only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_convention: Option<GainConventionName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_gain_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_gain_linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transmitters: Option<Vec<TransmitterEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rectifier: Option<RectifierSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Sp1,
    Sp2,
    Mp,
    Mpcsd,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Sp1 => Scheme::Sp1,
            SchemeName::Sp2 => Scheme::Sp2,
            SchemeName::Mp => Scheme::Mp,
            SchemeName::Mpcsd => Scheme::Mpcsd,
        }
    }
}

impl From<Scheme> for SchemeName {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Sp1 => SchemeName::Sp1,
            Scheme::Sp2 => SchemeName::Sp2,
            Scheme::Mp => SchemeName::Mp,
            Scheme::Mpcsd => SchemeName::Mpcsd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainConventionName {
    #[default]
    DbExact,
    Rounded,
}

impl From<GainConventionName> for GainConvention {
    fn from(g: GainConventionName) -> Self {
        match g {
            GainConventionName::DbExact => GainConvention::DbExact,
            GainConventionName::Rounded => GainConvention::Rounded,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmitterEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antenna_gain_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antenna_gain_linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_frequency_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_phase_rad: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line_length_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_interval_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard_band_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum RectifierSection {
    /// Give either `threshold_power_w` or the calibration anchor pair.
    Threshold {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        peak_efficiency: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold_power_w: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anchor_input_w: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anchor_output_w: Option<f64>,
    },
    Tabulated {
        points: Vec<EfficiencyPoint>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyPoint {
    pub input_power_w: f64,
    pub efficiency: f64,
}

/// A consumption preset with optional per-field overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sleep_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_mode_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duty_cycle_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_duration_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacitance_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub typical_voltage_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_voltage_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resume_voltage_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensor_init_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub judgment_window_s: Option<f64>,
}

/// Log-spaced required-power range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub start_w: f64,
    pub stop_w: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<PathBuf>,
}

/// Collects missing-field and invariant problems while resolving defaults.
struct Resolver {
    defaults: bool,
    problems: Vec<String>,
}

impl Resolver {
    fn missing(&mut self, field: &str) {
        if !self.defaults {
            self.problems.push(format!("{field}: missing (set it or enable use_paper_defaults)"));
        }
    }

    fn value<T>(&mut self, given: Option<T>, default: T, field: &str) -> T {
        given.unwrap_or_else(|| {
            self.missing(field);
            default
        })
    }

    fn gain(&mut self, dbi: Option<f64>, linear: Option<f64>, default: f64, field: &str) -> f64 {
        match (dbi, linear) {
            (Some(_), Some(_)) => {
                self.problems.push(format!("{field}: give either the dBi or the linear value, not both"));
                default
            }
            (Some(db), None) => db_to_linear(db),
            (None, Some(g)) => g,
            (None, None) => self.value(None, default, field),
        }
    }
}

impl ScenarioFile {
    pub fn reference_defaults() -> Self {
        ScenarioFile { use_paper_defaults: true, ..Default::default() }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::json(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        ScenarioFile::parse(&text, path)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario file serializes");
        s.push('\n');
        s
    }

    /// Applies defaults and checks every invariant.
    pub fn resolve(&self) -> Result<Scenario, HarnessError> {
        let mut r = Resolver { defaults: self.use_paper_defaults, problems: Vec::new() };
        let conv: GainConvention = self.gain_convention.unwrap_or_default().into();

        let scheme: Scheme = r.value(self.scheme, SchemeName::Mpcsd, "scheme").into();

        let g = self.geometry.clone().unwrap_or_default();
        if self.geometry.is_none() {
            r.missing("geometry");
        }
        let geometry = Geometry {
            line_length: r.value(g.line_length_m, presets::LINE_LENGTH_M, "geometry.line_length_m"),
            sample_interval: r.value(g.sample_interval_m, presets::SAMPLE_INTERVAL_M, "geometry.sample_interval_m"),
            guard_band: g.guard_band_m.unwrap_or(0.0),
        };

        let base_carrier = self.carrier_frequency_hz.unwrap_or(presets::CARRIER_FREQUENCY_HZ);
        let entries = match &self.transmitters {
            Some(list) => list.clone(),
            None => {
                r.missing("transmitters");
                vec![
                    TransmitterEntry { position_m: Some(0.0), ..Default::default() },
                    TransmitterEntry { position_m: Some(geometry.line_length), ..Default::default() },
                ]
            }
        };
        let needs_offset = scheme == Scheme::Mpcsd && entries.iter().any(|e| e.carrier_frequency_hz.is_none());
        let offset = if needs_offset {
            r.value(self.frequency_offset_hz, presets::FREQUENCY_OFFSET_HZ, "frequency_offset_hz")
        } else {
            0.0
        };
        if self.carrier_frequency_hz.is_none() && entries.iter().any(|e| e.carrier_frequency_hz.is_none()) {
            r.missing("carrier_frequency_hz");
        }
        let mut transmitters = Vec::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            let field = |name: &str| format!("transmitters[{i}].{name}");
            let position = match e.position_m {
                Some(p) => p,
                None => {
                    r.problems.push(format!("{}: missing", field("position_m")));
                    0.0
                }
            };
            let tx_power = r.value(e.tx_power_w, presets::TX_POWER_W, &field("tx_power_w"));
            let antenna_gain =
                r.gain(e.antenna_gain_dbi, e.antenna_gain_linear, conv.reference_tx_gain(), &field("antenna_gain"));
            let carrier_frequency = e.carrier_frequency_hz.unwrap_or(base_carrier + offset * i as f64);
            let initial_phase = e.initial_phase_rad.unwrap_or(0.0);
            transmitters.push(Transmitter { position, tx_power, antenna_gain, carrier_frequency, initial_phase });
        }

        let rx_gain = r.gain(self.rx_gain_dbi, self.rx_gain_linear, conv.reference_rx_gain(), "rx_gain");

        let rectifier = match &self.rectifier {
            None => r.value(None, RectifierModel::default(), "rectifier"),
            Some(section) => match section.build(&mut r) {
                Ok(m) => m,
                Err(e) => {
                    r.problems.push(format!("rectifier: {e}"));
                    RectifierModel::default()
                }
            },
        };

        let node = match &self.node {
            None => r.value(None, NodeConfig::default(), "node"),
            Some(section) => section.build(&mut r.problems),
        };

        let required_power = match self.required_power_w {
            Some(p) => Some(p),
            None if r.defaults => Some(presets::REQUIRED_POWER_W),
            None => None,
        };

        if let Some(sweep) = &self.sweep {
            if let Err(e) = sweep.validate() {
                r.problems.push(e);
            }
        }

        if !(rx_gain > 0.0 && rx_gain.is_finite()) {
            r.problems.push(format!("rx_gain: must be positive, got {rx_gain}"));
        }
        if transmitters.is_empty() {
            r.problems.push("transmitters: at least one is required".into());
        }
        // A broken first transmitter is reported by scenario validation; the
        // placeholder budget only lets the remaining checks run.
        let budget = transmitters.first().and_then(|first| LinkBudget::new(first, rx_gain).ok()).unwrap_or_else(|| {
            let reference = presets::reference_transmitter(0.0, conv);
            LinkBudget::new(&reference, conv.reference_rx_gain()).expect("reference budget is valid")
        });

        let mut problems = r.problems;
        let scenario = Scenario { geometry, budget, transmitters, scheme, rectifier, node, required_power };
        if let Err(more) = scenario.validate() {
            problems.extend(more);
        }
        if problems.is_empty() {
            return Ok(scenario);
        }
        Err(HarnessError::Invalid(problems))
    }

    /// Fully explicit file that reloads to `scenario`. The link budget is
    /// rebuilt from the first transmitter on load.
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let transmitters = scenario
            .transmitters
            .iter()
            .map(|tx| TransmitterEntry {
                position_m: Some(tx.position),
                tx_power_w: Some(tx.tx_power),
                antenna_gain_dbi: None,
                antenna_gain_linear: Some(tx.antenna_gain),
                carrier_frequency_hz: Some(tx.carrier_frequency),
                initial_phase_rad: Some(tx.initial_phase),
            })
            .collect();
        let rectifier = match &scenario.rectifier {
            RectifierModel::Threshold { peak_efficiency, threshold_power } => RectifierSection::Threshold {
                peak_efficiency: Some(*peak_efficiency),
                threshold_power_w: Some(*threshold_power),
                anchor_input_w: None,
                anchor_output_w: None,
            },
            RectifierModel::Tabulated(table) => RectifierSection::Tabulated {
                points: table
                    .points()
                    .map(|(input_power_w, efficiency)| EfficiencyPoint { input_power_w, efficiency })
                    .collect(),
            },
        };
        let n = &scenario.node;
        ScenarioFile {
            use_paper_defaults: false,
            scheme: Some(scenario.scheme.into()),
            rx_gain_linear: Some(scenario.budget.rx_gain),
            required_power_w: scenario.required_power,
            transmitters: Some(transmitters),
            geometry: Some(GeometrySection {
                line_length_m: Some(scenario.geometry.line_length),
                sample_interval_m: Some(scenario.geometry.sample_interval),
                guard_band_m: Some(scenario.geometry.guard_band),
            }),
            rectifier: Some(rectifier),
            node: Some(NodeSection {
                preset: None,
                sleep_power_w: Some(n.sleep_power),
                tx_mode_power_w: Some(n.tx_mode_power),
                duty_cycle_s: Some(n.duty_cycle),
                tx_duration_s: Some(n.tx_duration),
                capacitance_f: Some(n.capacitance),
                typical_voltage_v: Some(n.typical_voltage),
                min_voltage_v: Some(n.min_voltage),
                resume_voltage_v: Some(n.resume_voltage),
                sensor_init_time_s: Some(n.sensor_init_time),
                judgment_window_s: Some(n.judgment_window),
            }),
            ..Default::default()
        }
    }
}

impl RectifierSection {
    fn build(&self, r: &mut Resolver) -> wpt_core::Result<RectifierModel> {
        match self {
            RectifierSection::Threshold { peak_efficiency, threshold_power_w, anchor_input_w, anchor_output_w } => {
                let peak = r.value(*peak_efficiency, presets::PEAK_EFFICIENCY, "rectifier.peak_efficiency");
                match (threshold_power_w, anchor_input_w, anchor_output_w) {
                    (Some(th), None, None) => RectifierModel::threshold(peak, *th),
                    (None, Some(a_in), Some(a_out)) => RectifierModel::calibrated(peak, *a_in, *a_out),
                    (None, None, None) if r.defaults => {
                        RectifierModel::calibrated(peak, presets::REQUIRED_POWER_W, presets::CONSUMED_POWER_W)
                    }
                    _ => Err(wpt_core::Error::Invalid {
                        field: "rectifier",
                        reason: "threshold model needs threshold_power_w or both anchor_input_w and anchor_output_w"
                            .into(),
                    }),
                }
            }
            RectifierSection::Tabulated { points } => {
                let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.input_power_w, p.efficiency)).collect();
                RectifierModel::tabulated(&pairs)
            }
        }
    }
}

impl NodeSection {
    fn build(&self, problems: &mut Vec<String>) -> NodeConfig {
        let case = match self.preset.as_deref() {
            None => ConsumptionCase::default(),
            Some(name) => ConsumptionCase::from_name(name).unwrap_or_else(|| {
                problems.push(format!("node.preset: unknown preset `{name}`, expected case0..case4"));
                ConsumptionCase::default()
            }),
        };
        let base = NodeConfig::preset(case);
        NodeConfig {
            sleep_power: self.sleep_power_w.unwrap_or(base.sleep_power),
            tx_mode_power: self.tx_mode_power_w.unwrap_or(base.tx_mode_power),
            duty_cycle: self.duty_cycle_s.unwrap_or(base.duty_cycle),
            tx_duration: self.tx_duration_s.unwrap_or(base.tx_duration),
            capacitance: self.capacitance_f.unwrap_or(base.capacitance),
            typical_voltage: self.typical_voltage_v.unwrap_or(base.typical_voltage),
            min_voltage: self.min_voltage_v.unwrap_or(base.min_voltage),
            resume_voltage: self.resume_voltage_v.unwrap_or(base.resume_voltage),
            sensor_init_time: self.sensor_init_time_s.unwrap_or(base.sensor_init_time),
            judgment_window: self.judgment_window_s.unwrap_or(base.judgment_window),
        }
    }
}

impl SweepSection {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.start_w > 0.0 && self.stop_w > self.start_w && self.stop_w.is_finite()) {
            return Err(format!("sweep: need 0 < start_w < stop_w, got {} and {}", self.start_w, self.stop_w));
        }
        if self.points < 2 {
            return Err(format!("sweep: points must be at least 2, got {}", self.points));
        }
        Ok(())
    }
}

/// Loads a scenario file and resolves it.
pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    ScenarioFile::read(path)?.resolve()
}

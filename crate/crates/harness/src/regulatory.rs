//! Radio-law limits checked against a scenario.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wpt_core::Scenario;

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegulatoryProfile {
    pub name: String,
    /// `P_t * G_t` ceiling per transmitter.
    pub max_eirp_w: f64,
    pub max_tx_power_w: f64,
    pub band_min_hz: f64,
    pub band_max_hz: f64,
    pub carrier_sense_required: bool,
}

impl RegulatoryProfile {
    /// 920 MHz band, Japan: 1 W conducted, 4 W (36 dBm) EIRP, continuous
    /// transmission without carrier sensing.
    pub fn japan_920mhz() -> Self {
        RegulatoryProfile {
            name: "japan-920mhz".into(),
            max_eirp_w: 4.0,
            max_tx_power_w: 1.0,
            band_min_hz: 915.7e6,
            band_max_hz: 921.5e6,
            carrier_sense_required: false,
        }
    }

    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut problems = Vec::new();
        if !(self.max_eirp_w > 0.0) {
            problems.push(format!("max_eirp_w must be positive, got {}", self.max_eirp_w));
        }
        if !(self.max_tx_power_w > 0.0) {
            problems.push(format!("max_tx_power_w must be positive, got {}", self.max_tx_power_w));
        }
        if !(self.band_min_hz < self.band_max_hz) {
            problems.push(format!("band [{}, {}] Hz is empty", self.band_min_hz, self.band_max_hz));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let profile: RegulatoryProfile = serde_json::from_str(&text).map_err(|e| HarnessError::json(path, e))?;
        profile.validate().map_err(HarnessError::Invalid)?;
        Ok(profile)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Eirp { transmitter: usize, eirp_w: f64, limit_w: f64 },
    TxPower { transmitter: usize, tx_power_w: f64, limit_w: f64 },
    OutOfBand { transmitter: usize, frequency_hz: f64, band: (f64, f64) },
    CarrierSense,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Eirp { transmitter, eirp_w, limit_w } => {
                write!(f, "transmitter {transmitter}: EIRP {eirp_w:.6} W exceeds {limit_w} W")
            }
            Violation::TxPower { transmitter, tx_power_w, limit_w } => {
                write!(f, "transmitter {transmitter}: transmit power {tx_power_w} W exceeds {limit_w} W")
            }
            Violation::OutOfBand { transmitter, frequency_hz, band } => {
                write!(f, "transmitter {transmitter}: carrier {frequency_hz} Hz outside [{}, {}] Hz", band.0, band.1)
            }
            Violation::CarrierSense => write!(f, "profile requires carrier sensing; transmission is continuous"),
        }
    }
}

/// Every limit the radiating transmitters break. Empty means compliant.
pub fn validate_regulatory(scenario: &Scenario, profile: &RegulatoryProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    let offset = match scenario.scheme {
        wpt_core::Scheme::Sp2 => 1,
        _ => 0,
    };
    for (k, tx) in scenario.active_transmitters().iter().enumerate() {
        let transmitter = k + offset;
        if tx.tx_power > profile.max_tx_power_w {
            out.push(Violation::TxPower { transmitter, tx_power_w: tx.tx_power, limit_w: profile.max_tx_power_w });
        }
        if tx.eirp() > profile.max_eirp_w {
            out.push(Violation::Eirp { transmitter, eirp_w: tx.eirp(), limit_w: profile.max_eirp_w });
        }
        if !(profile.band_min_hz..=profile.band_max_hz).contains(&tx.carrier_frequency) {
            out.push(Violation::OutOfBand {
                transmitter,
                frequency_hz: tx.carrier_frequency,
                band: (profile.band_min_hz, profile.band_max_hz),
            });
        }
    }
    if profile.carrier_sense_required {
        out.push(Violation::CarrierSense);
    }
    out
}

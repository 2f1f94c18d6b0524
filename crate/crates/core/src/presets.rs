//! Reference deployment and node parameters.
//!
//! These are the values of the two-transmitter 920 MHz deployment and the
//! prototype battery-less node the models are calibrated against.

use crate::propagation::{GainConvention, Transmitter};
use crate::scalar::Scalar;

pub const TX_POWER_W: f64 = 1.0;
pub const TX_ANTENNA_GAIN_DBI: f64 = 6.0;
pub const RX_ANTENNA_GAIN_DBI: f64 = 2.15;
pub const CARRIER_FREQUENCY_HZ: f64 = 916.8e6;
pub const FREQUENCY_OFFSET_HZ: f64 = 1e3;
pub const LINE_LENGTH_M: f64 = 6.0;
/// Measurement point interval, roughly a tenth of a wavelength.
pub const SAMPLE_INTERVAL_M: f64 = 0.03;
pub const REQUIRED_POWER_W: f64 = 400e-6;
/// Average consumption of the node that `REQUIRED_POWER_W` activates.
pub const CONSUMED_POWER_W: f64 = 142e-6;
/// Peak RF/DC efficiency of the default threshold rectifier.
pub const PEAK_EFFICIENCY: f64 = 0.55;

pub const SLEEP_POWER_W: f64 = 4.23e-6;
pub const TX_MODE_POWER_W: f64 = 13.8e-3;
pub const DUTY_CYCLE_S: f64 = 1.0;
pub const TX_DURATION_S: f64 = 10e-3;
/// Capacitor fitted on the rectifier board.
pub const CAPACITANCE_F: f64 = 50e-3;
pub const TYPICAL_VOLTAGE_V: f64 = 2.3;
pub const MIN_VOLTAGE_V: f64 = 2.2;
pub const SENSOR_INIT_TIME_S: f64 = 15.0;
pub const JUDGMENT_WINDOW_S: f64 = 20.0;

/// The reference transmitter (1 W, 6 dBi, 916.8 MHz, zero phase) at `position`.
pub fn reference_transmitter<T: Scalar>(position: T, gains: GainConvention) -> Transmitter<T> {
    Transmitter {
        position,
        tx_power: T::lit(TX_POWER_W),
        antenna_gain: gains.reference_tx_gain(),
        carrier_frequency: T::lit(CARRIER_FREQUENCY_HZ),
        initial_phase: T::zero(),
    }
}

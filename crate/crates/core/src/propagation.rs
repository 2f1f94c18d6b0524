//! Free-space channel model and superposed received power along a 1-D line.
//!
//! Every transmitter contributes a phasor `h_i * s_i` where `h_i` is the
//! free-space channel `lambda / (4 pi d) * exp(-j 2 pi d / lambda)` and `s_i`
//! is its transmit signal. Received power is the squared magnitude of the sum.
//! A single wavelength, taken from the reference carrier, is used for every
//! transmitter; carrier offsets only enter through the time-varying phase.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::units;

/// One energy transmitter on the deployment line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmitter<T> {
    /// Position along the line, meters.
    pub position: T,
    /// Conducted transmit power, watts.
    pub tx_power: T,
    /// Transmit antenna gain, linear.
    pub antenna_gain: T,
    pub carrier_frequency: T,
    /// Initial phase of the transmit signal, radians.
    pub initial_phase: T,
}

impl<T: Scalar> Transmitter<T> {
    pub fn new(position: T, tx_power: T, antenna_gain: T, carrier_frequency: T, initial_phase: T) -> Result<Self> {
        let tx = Transmitter { position, tx_power, antenna_gain, carrier_frequency, initial_phase };
        tx.validate()?;
        Ok(tx)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::invalid("position", "must be finite"));
        }
        if !(self.tx_power > T::zero() && self.tx_power.is_finite()) {
            return Err(Error::invalid("tx_power", format!("must be positive, got {}", self.tx_power)));
        }
        if !(self.antenna_gain > T::zero() && self.antenna_gain.is_finite()) {
            return Err(Error::invalid("antenna_gain", format!("must be positive, got {}", self.antenna_gain)));
        }
        if !(self.carrier_frequency > T::zero() && self.carrier_frequency.is_finite()) {
            return Err(Error::invalid(
                "carrier_frequency",
                format!("must be positive, got {}", self.carrier_frequency),
            ));
        }
        if !self.initial_phase.is_finite() {
            return Err(Error::invalid("initial_phase", "must be finite"));
        }
        Ok(())
    }

    /// Equivalent isotropic radiated power `P_t * G_t`, watts.
    pub fn eirp(&self) -> T {
        self.tx_power * self.antenna_gain
    }

    pub fn distance_to(&self, position: T) -> T {
        (position - self.position).abs()
    }
}

/// How antenna gains quoted in dBi are turned into linear ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainConvention {
    /// `10^(dBi/10)`: 6 dBi -> 3.981, 2.15 dBi -> 1.641.
    #[default]
    DbExact,
    /// The rounded linear values of the reference deployment: 4 and 1.6.
    Rounded,
}

impl GainConvention {
    pub fn reference_tx_gain<T: Scalar>(self) -> T {
        match self {
            GainConvention::DbExact => units::db_to_linear(T::lit(crate::presets::TX_ANTENNA_GAIN_DBI)),
            GainConvention::Rounded => T::lit(4.0),
        }
    }

    pub fn reference_rx_gain<T: Scalar>(self) -> T {
        match self {
            GainConvention::DbExact => units::db_to_linear(T::lit(crate::presets::RX_ANTENNA_GAIN_DBI)),
            GainConvention::Rounded => T::lit(1.6),
        }
    }
}

/// Receiver-side link parameters shared by all transmitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<T> {
    /// `P_t * G_t * G_r` of the reference transmitter, watts. Used by the
    /// deployment design formulas.
    pub equivalent_tx_power: T,
    /// Receive antenna gain, linear.
    pub rx_gain: T,
    /// Carrier the single wavelength is derived from, hertz.
    pub reference_frequency: T,
    pub wavelength: T,
}

impl<T: Scalar> LinkBudget<T> {
    /// Builds the budget around `reference`, whose carrier fixes the wavelength.
    pub fn new(reference: &Transmitter<T>, rx_gain: T) -> Result<Self> {
        reference.validate()?;
        if !(rx_gain > T::zero() && rx_gain.is_finite()) {
            return Err(Error::invalid("rx_gain", format!("must be positive, got {rx_gain}")));
        }
        Ok(LinkBudget {
            equivalent_tx_power: reference.tx_power * reference.antenna_gain * rx_gain,
            rx_gain,
            reference_frequency: reference.carrier_frequency,
            wavelength: units::wavelength(reference.carrier_frequency),
        })
    }

    /// `P_t * G_t * G_r` for an arbitrary transmitter under this receiver.
    pub fn equivalent_power(&self, tx: &Transmitter<T>) -> T {
        tx.tx_power * tx.antenna_gain * self.rx_gain
    }

    /// `lambda / (4 pi)`, the distance-free part of the channel amplitude.
    pub fn aperture_length(&self) -> T {
        self.wavelength / (T::lit(4.0) * T::PI())
    }
}

/// Complex channel coefficient in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGain<T> {
    pub amplitude: T,
    /// Radians in `[0, 2 pi)`.
    pub phase: T,
}

impl<T: Scalar> ComplexGain<T> {
    pub fn to_complex(self) -> Complex<T> {
        Complex::from_polar(self.amplitude, self.phase)
    }
}

/// `2 pi * frac(x)`, avoiding the precision loss of reducing a large angle.
fn turns_to_radians<T: Scalar>(turns: T) -> T {
    let frac = turns - turns.floor();
    T::TAU() * frac
}

fn checked_distance<T: Scalar>(tx: &Transmitter<T>, position: T) -> Result<T> {
    let d = tx.distance_to(position);
    if d > T::zero() {
        Ok(d)
    } else {
        Err(Error::ZeroDistance { position: position.as_f64() })
    }
}

/// Free-space channel from `tx` to a receiver at `position`.
pub fn channel_gain<T: Scalar>(tx: &Transmitter<T>, position: T, budget: &LinkBudget<T>) -> Result<ComplexGain<T>> {
    let d = checked_distance(tx, position)?;
    let amplitude = budget.aperture_length() / d;
    // -2 pi d / lambda, wrapped into [0, 2 pi)
    let phase = turns_to_radians(-(d / budget.wavelength));
    let phase = if phase >= T::TAU() { T::zero() } else { phase };
    Ok(ComplexGain { amplitude, phase })
}

/// Received power from a single transmitter: `P_t^e (lambda / 4 pi d)^2`.
pub fn received_power_single<T: Scalar>(tx: &Transmitter<T>, position: T, budget: &LinkBudget<T>) -> Result<T> {
    let d = checked_distance(tx, position)?;
    let a = budget.aperture_length() / d;
    Ok(budget.equivalent_power(tx) * a * a)
}

/// Phasor sum at a fixed receiver position, evaluated at arbitrary times.
///
/// The common carrier `exp(j 2 pi f_ref t)` is factored out; it does not
/// change the magnitude, so only each transmitter's offset from the reference
/// carrier rotates with time.
#[derive(Debug, Clone)]
pub struct SuperposedField<T> {
    terms: Vec<(Complex<T>, T)>,
}

impl<T: Scalar> SuperposedField<T> {
    pub fn new(txs: &[Transmitter<T>], position: T, budget: &LinkBudget<T>) -> Result<Self> {
        if txs.is_empty() {
            return Err(Error::NoTransmitters);
        }
        let terms = txs
            .iter()
            .map(|tx| {
                let h = channel_gain(tx, position, budget)?;
                let amplitude = h.amplitude * budget.equivalent_power(tx).sqrt();
                let phase = h.phase + tx.initial_phase;
                Ok((Complex::from_polar(amplitude, phase), tx.carrier_frequency - budget.reference_frequency))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SuperposedField { terms })
    }

    pub fn amplitude_at(&self, t: T) -> Complex<T> {
        self.terms
            .iter()
            .map(|&(base, offset)| {
                if offset == T::zero() {
                    base
                } else {
                    base * Complex::from_polar(T::one(), turns_to_radians(offset * t))
                }
            })
            .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
    }

    pub fn power_at(&self, t: T) -> T {
        self.amplitude_at(t).norm_sqr()
    }

    /// Powers each transmitter would deliver alone.
    pub fn constituent_powers(&self) -> impl Iterator<Item = T> + '_ {
        self.terms.iter().map(|(z, _)| z.norm_sqr())
    }
}

/// `|sum_i h_i s_i(t)|^2` for any number of transmitters.
pub fn instantaneous_power<T: Scalar>(txs: &[Transmitter<T>], position: T, t: T, budget: &LinkBudget<T>) -> Result<T> {
    Ok(SuperposedField::new(txs, position, budget)?.power_at(t))
}

/// Time-independent received power when all transmitters share one carrier.
pub fn received_power_mp<T: Scalar>(txs: &[Transmitter<T>], position: T, budget: &LinkBudget<T>) -> Result<T> {
    let first = txs.first().ok_or(Error::NoTransmitters)?;
    if let Some(i) = txs.iter().position(|tx| tx.carrier_frequency != first.carrier_frequency) {
        return Err(Error::FrequencyMismatch { first: 0, second: i });
    }
    instantaneous_power(txs, position, T::zero(), budget)
}

/// Average received power under carrier shift diversity.
///
/// With pairwise distinct carriers every cross term averages out, leaving the
/// sum of the single-transmitter powers.
pub fn mean_power_mpcsd<T: Scalar>(txs: &[Transmitter<T>], position: T, budget: &LinkBudget<T>) -> Result<T> {
    if txs.is_empty() {
        return Err(Error::NoTransmitters);
    }
    check_distinct_carriers(txs)?;
    txs.iter().map(|tx| received_power_single(tx, position, budget)).sum()
}

pub(crate) fn check_distinct_carriers<T: Scalar>(txs: &[Transmitter<T>]) -> Result<()> {
    for (i, a) in txs.iter().enumerate() {
        for (j, b) in txs.iter().enumerate().skip(i + 1) {
            if a.carrier_frequency == b.carrier_frequency {
                return Err(Error::DuplicateFrequency { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// Period after which the superposed field repeats, `1 / gcd(offsets)`.
///
/// Returns `None` when every transmitter uses the same carrier (static
/// field) or when the offsets are incommensurate within `1e-9` relative.
pub fn fading_period<T: Scalar>(txs: &[Transmitter<T>]) -> Option<T> {
    let first = txs.first()?.carrier_frequency;
    let tol = T::lit(1e-9);
    let mut common: Option<T> = None;
    for tx in txs {
        let offset = (tx.carrier_frequency - first).abs();
        if offset == T::zero() {
            continue;
        }
        common = Some(match common {
            None => offset,
            Some(g) => float_gcd(g, offset, tol)?,
        });
    }
    common.map(|g| T::one() / g)
}

fn float_gcd<T: Scalar>(a: T, b: T, rel_tol: T) -> Option<T> {
    let scale = a.max(b);
    let (mut a, mut b) = (a.max(b), a.min(b));
    for _ in 0..64 {
        if b <= scale * rel_tol {
            return Some(a);
        }
        let r = a % b;
        let r = if b - r <= scale * rel_tol { T::zero() } else { r };
        a = b;
        b = r;
    }
    None
}

/// Result of a numeric time average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAverage<T> {
    pub power: T,
    /// False when the duration is not an integer number of fading periods,
    /// in which case the average can be biased by the partial cycle.
    pub whole_periods: bool,
}

/// Trapezoidal mean of [`instantaneous_power`] over `[0, duration]`.
///
/// `step` is rounded down so the duration splits into equal intervals. When
/// the field fades, `step` must not exceed a hundredth of the fading period.
pub fn time_averaged_power<T: Scalar>(
    txs: &[Transmitter<T>],
    position: T,
    duration: T,
    step: T,
    budget: &LinkBudget<T>,
) -> Result<TimeAverage<T>> {
    if !(duration > T::zero() && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("must be positive, got {duration}")));
    }
    if !(step > T::zero()) {
        return Err(Error::invalid("step", format!("must be positive, got {step}")));
    }
    let field = SuperposedField::new(txs, position, budget)?;
    let period = fading_period(txs);
    let whole_periods = match period {
        None => true,
        Some(p) => {
            let limit = p / T::lit(100.0);
            if step > limit {
                return Err(Error::StepTooCoarse { step: step.as_f64(), limit: limit.as_f64() });
            }
            let cycles = duration / p;
            (cycles - cycles.round()).abs() <= T::lit(1e-6) * cycles.max(T::one()) && cycles.round() >= T::one()
        }
    };
    if period.is_none() {
        // static field, the integrand is constant
        return Ok(TimeAverage { power: field.power_at(T::zero()), whole_periods });
    }
    let intervals = (duration / step).ceil().to_usize().unwrap_or(1).max(1);
    let h = duration / T::lit(intervals as f64);
    let mut acc = (field.power_at(T::zero()) + field.power_at(duration)) / T::lit(2.0);
    for k in 1..intervals {
        acc = acc + field.power_at(h * T::lit(k as f64));
    }
    Ok(TimeAverage { power: acc / T::lit(intervals as f64), whole_periods })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;

    fn budget() -> LinkBudget<f64> {
        let reference = presets::reference_transmitter(0.0, GainConvention::DbExact);
        LinkBudget::new(&reference, GainConvention::DbExact.reference_rx_gain()).unwrap()
    }

    fn tx_at(position: f64, frequency: f64, phase: f64) -> Transmitter<f64> {
        Transmitter {
            position,
            carrier_frequency: frequency,
            initial_phase: phase,
            ..presets::reference_transmitter(0.0, GainConvention::DbExact)
        }
    }

    #[test]
    fn channel_gain_at_one_wavelength() {
        let b = budget();
        let tx = tx_at(0.0, presets::CARRIER_FREQUENCY_HZ, 0.0);
        let h = channel_gain(&tx, b.wavelength, &b).unwrap();
        assert_relative_eq!(h.amplitude, 1.0 / (4.0 * std::f64::consts::PI), max_relative = 1e-12);
        let wrapped = h.phase.min(std::f64::consts::TAU - h.phase);
        assert!(wrapped < 1e-9, "phase {}", h.phase);
    }

    #[test]
    fn channel_gain_at_half_wavelength() {
        let b = budget();
        let tx = tx_at(0.0, presets::CARRIER_FREQUENCY_HZ, 0.0);
        let h = channel_gain(&tx, b.wavelength / 2.0, &b).unwrap();
        assert_relative_eq!(h.phase, std::f64::consts::PI, max_relative = 1e-9);
    }

    #[test]
    fn channel_gain_three_meters() {
        let b = budget();
        assert_relative_eq!(b.wavelength, 0.32700, max_relative = 1e-4);
        let tx = tx_at(0.0, presets::CARRIER_FREQUENCY_HZ, 0.0);
        let h = channel_gain(&tx, 3.0, &b).unwrap();
        assert_relative_eq!(h.amplitude, 8.674e-3, max_relative = 1e-3);
    }

    #[test]
    fn zero_distance_is_rejected() {
        let b = budget();
        let tx = tx_at(1.5, presets::CARRIER_FREQUENCY_HZ, 0.0);
        assert_eq!(channel_gain(&tx, 1.5, &b), Err(Error::ZeroDistance { position: 1.5 }));
        assert!(received_power_single(&tx, 1.5, &b).is_err());
    }

    #[test]
    fn single_power_reference_values() {
        let b = budget();
        let tx = tx_at(0.0, presets::CARRIER_FREQUENCY_HZ, 0.0);
        let p1 = received_power_single(&tx, 1.0, &b).unwrap();
        assert_relative_eq!(p1, 4.42e-3, max_relative = 1e-2);
        let p2 = received_power_single(&tx, 2.0, &b).unwrap();
        assert_relative_eq!(p2, p1 / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn interference_limits() {
        let b = budget();
        let f = presets::CARRIER_FREQUENCY_HZ;
        let tx1 = tx_at(0.0, f, 0.0);
        let tx2 = tx_at(6.0, f, 0.0);
        let single = received_power_single(&tx1, 3.0, &b).unwrap();
        let mp = received_power_mp(&[tx1, tx2], 3.0, &b).unwrap();
        assert_relative_eq!(mp, 4.0 * single, max_relative = 1e-12);

        let out_of_phase = tx_at(6.0, f, std::f64::consts::PI);
        let dead = received_power_mp(&[tx1, out_of_phase], 3.0, &b).unwrap();
        assert!(dead < single * 1e-12, "{dead}");
    }

    #[test]
    fn mp_rejects_offset_carriers() {
        let b = budget();
        let f = presets::CARRIER_FREQUENCY_HZ;
        let txs = [tx_at(0.0, f, 0.0), tx_at(6.0, f + 1e3, 0.0)];
        assert_eq!(received_power_mp(&txs, 2.0, &b), Err(Error::FrequencyMismatch { first: 0, second: 1 }));
        assert_eq!(instantaneous_power::<f64>(&[], 2.0, 0.0, &b), Err(Error::NoTransmitters));
    }

    #[test]
    fn mpcsd_rejects_duplicate_carriers() {
        let b = budget();
        let f = presets::CARRIER_FREQUENCY_HZ;
        let txs = [tx_at(0.0, f, 0.0), tx_at(6.0, f, 0.0)];
        assert_eq!(mean_power_mpcsd(&txs, 2.0, &b), Err(Error::DuplicateFrequency { first: 0, second: 1 }));
    }

    #[test]
    fn mpcsd_midpoint_matches_design_formula() {
        let b = budget();
        let f = presets::CARRIER_FREQUENCY_HZ;
        let txs = [tx_at(0.0, f, 0.0), tx_at(6.0, f + 1e3, 0.0)];
        let mid = mean_power_mpcsd(&txs, 3.0, &b).unwrap();
        let a = b.aperture_length();
        assert_relative_eq!(mid, b.equivalent_tx_power * a * a * 8.0 / 36.0, max_relative = 1e-12);
        assert_relative_eq!(mid, 9.8e-4, max_relative = 5e-3);
    }

    #[test]
    fn fading_period_of_offsets() {
        let f = presets::CARRIER_FREQUENCY_HZ;
        assert_eq!(fading_period(&[tx_at(0.0, f, 0.0), tx_at(6.0, f, 0.0)]), None);
        let p = fading_period(&[tx_at(0.0, f, 0.0), tx_at(6.0, f + 1e3, 0.0)]).unwrap();
        assert_relative_eq!(p, 1e-3, max_relative = 1e-12);
        let p = fading_period(&[tx_at(0.0, f, 0.0), tx_at(3.0, f + 1e3, 0.0), tx_at(6.0, f + 2e3, 0.0)]).unwrap();
        assert_relative_eq!(p, 1e-3, max_relative = 1e-9);
    }

    #[test]
    fn time_average_flags_partial_cycles() {
        let b = budget();
        let f = presets::CARRIER_FREQUENCY_HZ;
        let txs = [tx_at(0.0, f, 0.0), tx_at(6.0, f + 1e3, 0.0)];
        let avg = time_averaged_power(&txs, 2.2, 1.5e-3, 1e-6, &b).unwrap();
        assert!(!avg.whole_periods);
        let avg = time_averaged_power(&txs, 2.2, 2e-3, 1e-6, &b).unwrap();
        assert!(avg.whole_periods);
        assert!(matches!(time_averaged_power(&txs, 2.2, 1e-3, 2e-5, &b), Err(Error::StepTooCoarse { .. })));
    }

    #[test]
    fn time_average_degenerate_cases() {
        let b = budget();
        let f = presets::CARRIER_FREQUENCY_HZ;
        let same = [tx_at(0.0, f, 0.3), tx_at(6.0, f, 0.0)];
        let avg = time_averaged_power(&same, 2.2, 0.37, 1e-3, &b).unwrap();
        assert_eq!(avg.power, received_power_mp(&same, 2.2, &b).unwrap());
        let single = [tx_at(0.0, f, 0.0)];
        let avg = time_averaged_power(&single, 2.2, 0.37, 1e-3, &b).unwrap();
        assert_relative_eq!(avg.power, received_power_single(&single[0], 2.2, &b).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let reference = presets::reference_transmitter(0.0_f32, GainConvention::DbExact);
        let b = LinkBudget::new(&reference, GainConvention::DbExact.reference_rx_gain()).unwrap();
        let p = received_power_single(&reference, 2.0_f32, &b).unwrap();
        assert_relative_eq!(
            p as f64,
            received_power_single(&tx_at(0.0, presets::CARRIER_FREQUENCY_HZ, 0.0), 2.0, &budget()).unwrap(),
            max_relative = 1e-5
        );
    }
}

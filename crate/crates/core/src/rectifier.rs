//! RF/DC conversion efficiency models.
//!
//! The rectifier maps received RF power to harvested DC power through a
//! nonlinear efficiency curve. Activation analysis relies on the DC output
//! being nondecreasing and convex at low input power, where the diode
//! threshold dominates.

use crate::error::{Error, Result};
use crate::presets;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum RectifierModel<T> {
    /// `eta_max * (1 - P_th / P)` above the dead-zone threshold, zero below.
    Threshold {
        peak_efficiency: T,
        threshold_power: T,
    },
    Tabulated(EfficiencyTable<T>),
}

/// Measured efficiency anchors. The DC output (not the efficiency) is
/// interpolated linearly between anchors, and extrapolated linearly through
/// the origin below the first anchor and at constant efficiency above the
/// last one.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyTable<T> {
    input_power: Vec<T>,
    efficiency: Vec<T>,
    output_power: Vec<T>,
}

impl<T: Scalar> EfficiencyTable<T> {
    /// `points` are `(input power W, efficiency)` pairs with strictly
    /// increasing input power.
    pub fn new(points: &[(T, T)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("efficiency table", "needs at least one point"));
        }
        for (i, &(p, g)) in points.iter().enumerate() {
            if !(p > T::zero() && p.is_finite()) {
                return Err(Error::invalid("efficiency table", format!("point {i}: input power must be positive")));
            }
            if !(g >= T::zero() && g <= T::one()) {
                return Err(Error::invalid("efficiency table", format!("point {i}: efficiency {g} outside [0, 1]")));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(
                    "efficiency table",
                    format!("input power must be strictly increasing at point {}", i + 1),
                ));
            }
            if w[1].0 * w[1].1 < w[0].0 * w[0].1 {
                return Err(Error::invalid("efficiency table", format!("DC output decreases at point {}", i + 1)));
            }
        }
        Ok(EfficiencyTable {
            input_power: points.iter().map(|p| p.0).collect(),
            efficiency: points.iter().map(|p| p.1).collect(),
            output_power: points.iter().map(|p| p.0 * p.1).collect(),
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.input_power.iter().copied().zip(self.efficiency.iter().copied())
    }

    fn output(&self, p: T) -> T {
        let n = self.input_power.len();
        let (first_in, first_out) = (self.input_power[0], self.output_power[0]);
        if p <= first_in {
            return first_out * p / first_in;
        }
        if p >= self.input_power[n - 1] {
            let last = self.efficiency[n - 1];
            return if last == T::zero() { self.output_power[n - 1] } else { last * p };
        }
        let k = self.input_power.partition_point(|&x| x <= p);
        let (x0, x1) = (self.input_power[k - 1], self.input_power[k]);
        let (y0, y1) = (self.output_power[k - 1], self.output_power[k]);
        y0 + (y1 - y0) * (p - x0) / (x1 - x0)
    }
}

impl<T: Scalar> RectifierModel<T> {
    pub fn threshold(peak_efficiency: T, threshold_power: T) -> Result<Self> {
        if !(peak_efficiency > T::zero() && peak_efficiency <= T::one()) {
            return Err(Error::invalid("peak_efficiency", format!("must lie in (0, 1], got {peak_efficiency}")));
        }
        if !(threshold_power >= T::zero() && threshold_power.is_finite()) {
            return Err(Error::invalid("threshold_power", format!("must be nonnegative, got {threshold_power}")));
        }
        Ok(RectifierModel::Threshold { peak_efficiency, threshold_power })
    }

    /// Threshold model whose output at `anchor_input` equals `anchor_output`.
    pub fn calibrated(peak_efficiency: T, anchor_input: T, anchor_output: T) -> Result<Self> {
        if !(anchor_input > T::zero() && anchor_output >= T::zero()) {
            return Err(Error::invalid("calibration anchor", "input must be positive and output nonnegative"));
        }
        let threshold_power = anchor_input - anchor_output / peak_efficiency;
        if threshold_power < T::zero() {
            return Err(Error::invalid(
                "calibration anchor",
                format!("output {anchor_output} W needs efficiency above {peak_efficiency}"),
            ));
        }
        Self::threshold(peak_efficiency, threshold_power)
    }

    pub fn tabulated(points: &[(T, T)]) -> Result<Self> {
        Ok(RectifierModel::Tabulated(EfficiencyTable::new(points)?))
    }

    /// Conversion efficiency `Gamma[P_in]`.
    pub fn efficiency(&self, input_power: T) -> Result<T> {
        if !(input_power > T::zero()) {
            return Err(Error::NonPositivePower(input_power.as_f64()));
        }
        Ok(match self {
            RectifierModel::Threshold { peak_efficiency, threshold_power } => {
                (*peak_efficiency * (T::one() - *threshold_power / input_power)).max(T::zero())
            }
            RectifierModel::Tabulated(table) => {
                if input_power.is_infinite() {
                    table.efficiency[table.efficiency.len() - 1]
                } else {
                    table.output(input_power) / input_power
                }
            }
        })
    }

    /// Harvested DC power `Gamma[P_in] * P_in`.
    pub fn dc_output(&self, input_power: T) -> Result<T> {
        if !(input_power > T::zero()) {
            return Err(Error::NonPositivePower(input_power.as_f64()));
        }
        Ok(match self {
            RectifierModel::Threshold { peak_efficiency, threshold_power } => {
                (*peak_efficiency * (input_power - *threshold_power)).max(T::zero())
            }
            RectifierModel::Tabulated(table) => table.output(input_power),
        })
    }

    /// Like [`dc_output`](Self::dc_output) but maps zero input to zero output.
    pub fn dc_output_or_zero(&self, input_power: T) -> Result<T> {
        if input_power == T::zero() {
            Ok(T::zero())
        } else {
            self.dc_output(input_power)
        }
    }

    /// Upper end of the region where the convex-output assumption is used.
    pub fn convex_region(&self) -> (T, T) {
        let lo = match self {
            RectifierModel::Threshold { threshold_power, .. } if *threshold_power > T::zero() => *threshold_power,
            RectifierModel::Threshold { .. } => T::lit(1e-6),
            RectifierModel::Tabulated(table) => table.input_power[0],
        };
        (lo, T::lit(1e-3).max(lo * T::lit(2.0)))
    }
}

impl<T: Scalar> Default for RectifierModel<T> {
    /// Threshold model with a 0.55 peak, calibrated so that 400 uW of RF
    /// yields the 142 uW the prototype node consumes.
    fn default() -> Self {
        RectifierModel::calibrated(
            T::lit(presets::PEAK_EFFICIENCY),
            T::lit(presets::REQUIRED_POWER_W),
            T::lit(presets::CONSUMED_POWER_W),
        )
        .expect("reference calibration is valid")
    }
}

/// Capacitor voltage record of a constant-input charging run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyTrace<T> {
    pub capacitance: T,
    pub duration: T,
    pub v_start: T,
    pub v_end: T,
    /// Load drawn by the sleeping node during the run, watts.
    pub sleep_power: T,
    pub input_power: T,
}

impl<T: Scalar> EfficiencyTrace<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacitance > T::zero()) {
            return Err(Error::invalid("capacitance", "must be positive"));
        }
        if !(self.duration > T::zero()) {
            return Err(Error::invalid("duration", "must be positive"));
        }
        if !(self.v_start >= T::zero() && self.v_end >= T::zero()) {
            return Err(Error::invalid("voltage", "must be nonnegative"));
        }
        if !(self.sleep_power >= T::zero()) {
            return Err(Error::invalid("sleep_power", "must be nonnegative"));
        }
        if !(self.input_power > T::zero()) {
            return Err(Error::NonPositivePower(self.input_power.as_f64()));
        }
        Ok(())
    }
}

/// Efficiency implied by the stored energy of a charging trace:
/// `((C / 2T) (V_end^2 - V_start^2) + P_s) / P_in`.
pub fn recover_efficiency<T: Scalar>(trace: &EfficiencyTrace<T>) -> Result<T> {
    trace.validate()?;
    let stored = trace.capacitance / (T::lit(2.0) * trace.duration)
        * (trace.v_end * trace.v_end - trace.v_start * trace.v_start);
    let gamma = (stored + trace.sleep_power) / trace.input_power;
    // small negative values are rounding noise around a zero-efficiency trace
    if gamma < -T::lit(1e-9) || gamma > T::lit(1.05) {
        return Err(Error::InconsistentTrace(gamma.as_f64()));
    }
    Ok(gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityCheck<T> {
    pub convex: bool,
    /// Magnitude of the most negative second difference, watts (zero if none).
    pub max_violation: T,
    /// Input power where the worst violation was found.
    pub located_at: Option<T>,
}

const CONVEXITY_GRID: usize = 2000;

/// Checks that the DC output has nonnegative second differences on a
/// uniform grid over `[lo, hi]`.
pub fn check_convex_output<T: Scalar>(model: &RectifierModel<T>, lo: T, hi: T) -> Result<ConvexityCheck<T>> {
    if !(lo > T::zero() && hi > lo && hi.is_finite()) {
        return Err(Error::invalid("convexity region", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let h = (hi - lo) / T::lit(CONVEXITY_GRID as f64);
    let outputs =
        (0..=CONVEXITY_GRID).map(|k| model.dc_output(lo + h * T::lit(k as f64))).collect::<Result<Vec<_>>>()?;
    let scale = outputs.iter().copied().fold(T::zero(), T::max);
    let tolerance = T::lit(1e-12).max(T::lit(16.0) * T::epsilon() * scale);
    let mut worst = T::zero();
    let mut located_at = None;
    for (k, w) in outputs.windows(3).enumerate() {
        let second = w[0] - T::lit(2.0) * w[1] + w[2];
        if second < -tolerance && -second > worst {
            worst = -second;
            located_at = Some(lo + h * T::lit((k + 1) as f64));
        }
    }
    Ok(ConvexityCheck { convex: located_at.is_none(), max_violation: worst, located_at })
}

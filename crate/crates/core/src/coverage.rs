//! Activation coverage along the line between transmitters, plus the
//! closed-form deployment design rules.
//!
//! A position counts as covered when the rectified average received power
//! meets the node's average consumption. For the carrier-shift scheme this
//! uses the DC output of the *mean* power, which by Jensen's inequality is a
//! lower bound on the mean DC output whenever the rectifier output is convex.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::node::{self, NodeConfig, NodeState, Schedule};
use crate::presets;
use crate::propagation::{self, GainConvention, LinkBudget, SuperposedField, Transmitter};
use crate::rectifier::RectifierModel;
use crate::scalar::Scalar;

/// Energy transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Single point, first transmitter only.
    Sp1,
    /// Single point, second transmitter only.
    Sp2,
    /// All transmitters on one carrier.
    Mp,
    /// All transmitters on distinct, shifted carriers.
    Mpcsd,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Sp1, Scheme::Sp2, Scheme::Mp, Scheme::Mpcsd];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Sp1 => "sp1",
            Scheme::Sp2 => "sp2",
            Scheme::Mp => "mp",
            Scheme::Mpcsd => "mpcsd",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Sampling of the deployment line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<T> {
    pub line_length: T,
    pub sample_interval: T,
    /// Distance excluded at each end of the line.
    pub guard_band: T,
}

impl<T: Scalar> Geometry<T> {
    pub fn new(line_length: T, sample_interval: T, guard_band: T) -> Result<Self> {
        let g = Geometry { line_length, sample_interval, guard_band };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.line_length > T::zero() && self.line_length.is_finite()) {
            return Err(Error::invalid("line_length", "must be positive"));
        }
        if !(self.sample_interval > T::zero() && self.sample_interval < self.line_length) {
            return Err(Error::invalid("sample_interval", "must lie in (0, line_length)"));
        }
        if !(self.guard_band >= T::zero() && T::lit(2.0) * self.guard_band < self.line_length) {
            return Err(Error::invalid("guard_band", "must be nonnegative and leave part of the line"));
        }
        Ok(())
    }

    /// `floor((L - 2 guard) / interval) + 1`.
    pub fn sample_count(&self) -> usize {
        let span = self.line_length - T::lit(2.0) * self.guard_band;
        let cells = span / self.sample_interval;
        // absorb rounding when the span is a whole number of cells
        let cells = (cells + T::lit(1e-9) * cells.max(T::one())).floor();
        cells.to_usize().unwrap_or(0) + 1
    }

    /// `guard + k * interval` for every sample, ascending.
    pub fn positions(&self) -> Vec<T> {
        (0..self.sample_count()).map(|k| self.guard_band + self.sample_interval * T::lit(k as f64)).collect()
    }
}

impl<T: Scalar> Default for Geometry<T> {
    fn default() -> Self {
        Geometry {
            line_length: T::lit(presets::LINE_LENGTH_M),
            sample_interval: T::lit(presets::SAMPLE_INTERVAL_M),
            guard_band: T::zero(),
        }
    }
}

/// A complete deployment to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub geometry: Geometry<T>,
    pub budget: LinkBudget<T>,
    /// Every deployed transmitter; `scheme` decides which ones radiate.
    pub transmitters: Vec<Transmitter<T>>,
    pub scheme: Scheme,
    pub rectifier: RectifierModel<T>,
    pub node: NodeConfig<T>,
    /// RF power needed for activation. When absent it is derived from the
    /// node's average consumption through the rectifier.
    pub required_power: Option<T>,
}

impl<T: Scalar> Scenario<T> {
    /// Validates and assembles a scenario.
    pub fn new(
        geometry: Geometry<T>,
        budget: LinkBudget<T>,
        transmitters: Vec<Transmitter<T>>,
        scheme: Scheme,
        rectifier: RectifierModel<T>,
        node: NodeConfig<T>,
        required_power: Option<T>,
    ) -> Result<Self> {
        let s = Scenario { geometry, budget, transmitters, scheme, rectifier, node, required_power };
        s.validate().map_err(|problems| Error::invalid("scenario", problems.join("; ")))?;
        Ok(s)
    }

    /// Every invariant violation, not just the first.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut problems = Vec::new();
        if let Err(e) = self.geometry.validate() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.node.validate() {
            problems.push(e.to_string());
        }
        for (i, tx) in self.transmitters.iter().enumerate() {
            if let Err(e) = tx.validate() {
                problems.push(format!("transmitter {i}: {e}"));
            }
            if !(tx.position >= T::zero() && tx.position <= self.geometry.line_length) {
                problems.push(format!("transmitter {i}: position {} m outside [0, L]", tx.position));
            }
        }
        if let Some(p) = self.required_power {
            if !(p > T::zero()) {
                problems.push(format!("required power must be positive, got {p}"));
            }
        }
        match self.scheme {
            Scheme::Sp1 if self.transmitters.is_empty() => problems.push("sp1 needs a first transmitter".into()),
            Scheme::Sp2 if self.transmitters.len() < 2 => problems.push("sp2 needs a second transmitter".into()),
            Scheme::Mp | Scheme::Mpcsd if self.transmitters.len() < 2 => {
                problems.push(format!("{} needs at least two transmitters", self.scheme.name()))
            }
            Scheme::Mp => {
                if let Err(e) = self.check_shared_carrier() {
                    problems.push(format!("mp requires one shared carrier: {e}"));
                }
            }
            Scheme::Mpcsd => {
                if let Err(e) = propagation::check_distinct_carriers(&self.transmitters) {
                    problems.push(format!("mpcsd requires a nonzero carrier offset: {e}"));
                }
            }
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    fn check_shared_carrier(&self) -> Result<()> {
        let f = self.transmitters[0].carrier_frequency;
        match self.transmitters.iter().position(|tx| tx.carrier_frequency != f) {
            Some(i) => Err(Error::FrequencyMismatch { first: 0, second: i }),
            None => Ok(()),
        }
    }

    /// Two transmitters at either end of the line, the second shifted by
    /// `frequency_offset` when the scheme is MPCSD.
    pub fn two_point(
        geometry: Geometry<T>,
        template: Transmitter<T>,
        rx_gain: T,
        scheme: Scheme,
        frequency_offset: T,
        phase_offset: T,
    ) -> Result<Self> {
        let offset = if scheme == Scheme::Mpcsd { frequency_offset } else { T::zero() };
        let tx1 = Transmitter { position: T::zero(), initial_phase: phase_offset, ..template };
        let tx2 = Transmitter {
            position: geometry.line_length,
            initial_phase: T::zero(),
            carrier_frequency: template.carrier_frequency + offset,
            ..template
        };
        let budget = LinkBudget::new(&template, rx_gain)?;
        Scenario::new(
            geometry,
            budget,
            vec![tx1, tx2],
            scheme,
            RectifierModel::default(),
            NodeConfig::default(),
            Some(T::lit(presets::REQUIRED_POWER_W)),
        )
    }

    /// The reference two-transmitter deployment over a 6 m line.
    pub fn reference(scheme: Scheme, gains: GainConvention) -> Self {
        let template = presets::reference_transmitter(T::zero(), gains);
        Scenario::two_point(
            Geometry::default(),
            template,
            gains.reference_rx_gain(),
            scheme,
            T::lit(presets::FREQUENCY_OFFSET_HZ),
            T::zero(),
        )
        .expect("reference scenario is valid")
    }

    /// Same deployment under another scheme; carriers are reassigned as
    /// `f1 + i * offset` for MPCSD and `f1` otherwise.
    pub fn with_scheme(&self, scheme: Scheme, frequency_offset: T) -> Result<Self> {
        let f1 = self.transmitters.first().ok_or(Error::NoTransmitters)?.carrier_frequency;
        let offset = if scheme == Scheme::Mpcsd { frequency_offset } else { T::zero() };
        let transmitters = self
            .transmitters
            .iter()
            .enumerate()
            .map(|(i, tx)| Transmitter { carrier_frequency: f1 + offset * T::lit(i as f64), ..*tx })
            .collect();
        Scenario::new(
            self.geometry,
            self.budget,
            transmitters,
            scheme,
            self.rectifier.clone(),
            self.node,
            self.required_power,
        )
    }

    /// Sets `theta_1 - theta_2 = phase_offset` (first transmitter carries it).
    pub fn with_phase_offset(&self, phase_offset: T) -> Self {
        let mut s = self.clone();
        for (i, tx) in s.transmitters.iter_mut().enumerate() {
            tx.initial_phase = if i == 0 { phase_offset } else { T::zero() };
        }
        s
    }

    pub fn with_geometry(&self, geometry: Geometry<T>) -> Result<Self> {
        geometry.validate()?;
        Ok(Scenario { geometry, ..self.clone() })
    }

    /// `f2 - f1`.
    pub fn frequency_offset(&self) -> T {
        match self.transmitters.as_slice() {
            [a, b, ..] => b.carrier_frequency - a.carrier_frequency,
            _ => T::zero(),
        }
    }

    /// `theta_1 - theta_2`.
    pub fn phase_offset(&self) -> T {
        match self.transmitters.as_slice() {
            [a, b, ..] => a.initial_phase - b.initial_phase,
            _ => T::zero(),
        }
    }

    /// Transmitters radiating under the scheme.
    pub fn active_transmitters(&self) -> &[Transmitter<T>] {
        match self.scheme {
            Scheme::Sp1 => &self.transmitters[..1],
            Scheme::Sp2 => &self.transmitters[1..2],
            Scheme::Mp | Scheme::Mpcsd => &self.transmitters,
        }
    }

    /// Average DC power the node must harvest, `P_csp`.
    pub fn consumption_threshold(&self) -> Result<T> {
        match self.required_power {
            Some(p) => self.rectifier.dc_output(p),
            None => Ok(node::average_consumed_power(&self.node)),
        }
    }

    /// RF power at which the rectified output equals `P_csp`.
    pub fn required_power(&self) -> Result<T> {
        match self.required_power {
            Some(p) => Ok(p),
            None => required_power(&self.rectifier, self.consumption_threshold()?),
        }
    }

    /// Time-averaged received power at `position`; `+inf` on a transmitter.
    pub fn average_power_at(&self, position: T) -> Result<T> {
        let txs = self.active_transmitters();
        if txs.iter().any(|tx| tx.position == position) {
            return Ok(T::infinity());
        }
        match self.scheme {
            Scheme::Sp1 | Scheme::Sp2 => propagation::received_power_single(&txs[0], position, &self.budget),
            Scheme::Mp => propagation::received_power_mp(txs, position, &self.budget),
            Scheme::Mpcsd => propagation::mean_power_mpcsd(txs, position, &self.budget),
        }
    }

    /// Average received power at every grid position.
    pub fn power_field(&self) -> Result<Vec<(T, T)>> {
        self.geometry.positions().into_iter().map(|l| Ok((l, self.average_power_at(l)?))).collect()
    }
}

/// Activation condition: rectified average power covers consumption.
pub fn activation<T: Scalar>(avg_power: T, rectifier: &RectifierModel<T>, consumption: T) -> Result<bool> {
    if !(avg_power >= T::zero()) {
        return Err(Error::invalid("average power", format!("must be nonnegative, got {avg_power}")));
    }
    Ok(rectifier.dc_output_or_zero(avg_power)? >= consumption)
}

/// Smallest RF input whose DC output exceeds `consumption`, by bisection.
pub fn required_power<T: Scalar>(rectifier: &RectifierModel<T>, consumption: T) -> Result<T> {
    if !(consumption >= T::zero()) {
        return Err(Error::invalid("consumption", "must be nonnegative"));
    }
    let above = |p: T| rectifier.dc_output(p).map(|out| out > consumption);
    let mut hi = T::lit(1e-6);
    while !above(hi)? {
        hi = hi * T::lit(2.0);
        if hi > T::lit(1e6) {
            return Err(Error::Unreachable(consumption.as_f64()));
        }
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport<T> {
    pub scheme: Scheme,
    pub positions: Vec<T>,
    pub avg_power: Vec<T>,
    pub active: Vec<bool>,
    /// Fraction of samples that are active.
    pub coverage: T,
    /// Coverage counting only samples with finite power (excludes samples
    /// on top of a transmitter).
    pub coverage_finite_only: T,
    pub required_power: T,
    pub consumption: T,
    /// Set when coverage is a lower bound (time-varying field rectified
    /// through its mean).
    pub lower_bound: bool,
}

impl<T: Scalar> CoverageReport<T> {
    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

fn fraction<T: Scalar>(count: usize, total: usize) -> T {
    if total == 0 {
        T::zero()
    } else {
        T::lit(count as f64) / T::lit(total as f64)
    }
}

pub fn compute_coverage<T: Scalar>(scenario: &Scenario<T>) -> Result<CoverageReport<T>> {
    let consumption = scenario.consumption_threshold()?;
    let field = scenario.power_field()?;
    let active =
        field.iter().map(|&(_, p)| activation(p, &scenario.rectifier, consumption)).collect::<Result<Vec<_>>>()?;
    let finite: Vec<bool> = field.iter().map(|(_, p)| p.is_finite()).collect();
    let finite_total = finite.iter().filter(|&&f| f).count();
    let finite_active = active.iter().zip(&finite).filter(|(&a, &f)| a && f).count();
    let count = active.iter().filter(|&&a| a).count();
    Ok(CoverageReport {
        scheme: scenario.scheme,
        coverage: fraction(count, active.len()),
        coverage_finite_only: fraction(finite_active, finite_total),
        positions: field.iter().map(|f| f.0).collect(),
        avg_power: field.iter().map(|f| f.1).collect(),
        active,
        required_power: scenario.required_power()?,
        consumption,
        lower_bound: scenario.scheme == Scheme::Mpcsd,
    })
}

/// Coverage obtained by thresholding the power field at each required power.
pub fn coverage_curve<T: Scalar>(scenario: &Scenario<T>, required_powers: &[T]) -> Result<Vec<(T, T)>> {
    if required_powers.iter().any(|&p| !(p > T::zero())) {
        return Err(Error::invalid("required powers", "must be positive"));
    }
    if required_powers.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("required powers", "must be sorted ascending"));
    }
    let field = scenario.power_field()?;
    Ok(required_powers
        .iter()
        .map(|&threshold| {
            let covered = field.iter().filter(|&&(_, p)| p >= threshold).count();
            (threshold, fraction(covered, field.len()))
        })
        .collect())
}

/// `count` log-spaced values from `start` to `stop` inclusive.
pub fn log_space<T: Scalar>(start: T, stop: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), stop.ln());
            let step = (b - a) / T::lit((count - 1) as f64);
            (0..count).map(|k| if k == count - 1 { stop } else { (a + step * T::lit(k as f64)).exp() }).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingScheme {
    SinglePoint,
    CarrierShift,
}

/// Largest transmitter spacing that still reaches `required_power`
/// everywhere: `lambda/4pi * sqrt(P_t^e / P_req)` for a single transmitter,
/// `2 sqrt 2` times that between two shifted-carrier transmitters.
pub fn max_spacing<T: Scalar>(scheme: SpacingScheme, budget: &LinkBudget<T>, required_power: T) -> Result<T> {
    if !(required_power > T::zero()) {
        return Err(Error::NonPositivePower(required_power.as_f64()));
    }
    let single = budget.aperture_length() * (budget.equivalent_tx_power / required_power).sqrt();
    Ok(match scheme {
        SpacingScheme::SinglePoint => single,
        SpacingScheme::CarrierShift => T::lit(2.0) * T::SQRT_2() * single,
    })
}

/// Spread (max - min) of coverage as the transmitters' phase difference
/// sweeps `samples` uniform values over `[0, 2 pi)`.
pub fn coverage_phase_sensitivity<T: Scalar>(scenario: &Scenario<T>, samples: usize) -> Result<T> {
    if samples == 0 {
        return Err(Error::invalid("samples", "must be positive"));
    }
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for k in 0..samples {
        let theta = T::TAU() * T::lit(k as f64) / T::lit(samples as f64);
        let c = compute_coverage(&scenario.with_phase_offset(theta))?.coverage;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    Ok(hi - lo)
}

/// Mean of the rectified power over one fading cycle next to the rectified
/// mean power, sampled at `samples` uniform instants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenPair<T> {
    pub mean_of_dc: T,
    pub dc_of_mean: T,
}

pub fn jensen_pair<T: Scalar>(scenario: &Scenario<T>, position: T, samples: usize) -> Result<JensenPair<T>> {
    let txs = scenario.active_transmitters();
    let field = SuperposedField::new(txs, position, &scenario.budget)?;
    let period = propagation::fading_period(txs).unwrap_or(T::one());
    let n = T::lit(samples.max(1) as f64);
    let mut mean_power = T::zero();
    let mut mean_dc = T::zero();
    for k in 0..samples.max(1) {
        let p = field.power_at(period * T::lit(k as f64) / n);
        mean_power = mean_power + p / n;
        mean_dc = mean_dc + scenario.rectifier.dc_output_or_zero(p)? / n;
    }
    Ok(JensenPair { mean_of_dc: mean_dc, dc_of_mean: scenario.rectifier.dc_output_or_zero(mean_power)? })
}

/// Per-position activation judged by simulating the node in the time domain
/// with the instantaneous rectified field as input.
///
/// Positions on top of a radiating transmitter are reported active without
/// simulation (unbounded input power).
pub fn verify_by_simulation<T: Scalar>(scenario: &Scenario<T>, schedule: Option<Schedule<T>>) -> Result<Vec<bool>> {
    let cfg = &scenario.node;
    let state = NodeState::warm(cfg);
    let schedule = schedule.unwrap_or_else(|| Schedule::for_state(cfg, &state));
    let txs = scenario.active_transmitters();
    scenario
        .geometry
        .positions()
        .into_par_iter()
        .map(|l| {
            if txs.iter().any(|tx| tx.position == l) {
                return Ok(true);
            }
            let field = SuperposedField::new(txs, l, &scenario.budget)?;
            let rectifier = &scenario.rectifier;
            let input = |t: T| rectifier.dc_output_or_zero(field.power_at(t)).unwrap_or(T::zero());
            Ok(node::simulate(cfg, &state, input, &schedule)?.active)
        })
        .collect()
}

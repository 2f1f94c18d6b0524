//! Duty-cycled battery-less sensor node with capacitor storage.
//!
//! The node sleeps with only its sensor powered for `T_s = T_d - T_Tx`, then
//! wakes the MCU and radio for `T_Tx`. Energy flows through a storage
//! capacitor: `C/2 * d(V^2)/dt = P_dc(t) - P_consumed(t)`. Consumption is
//! modeled as independent of the capacitor voltage.

use crate::error::{Error, Result};
use crate::presets;
use crate::rectifier::{EfficiencyTrace, RectifierModel};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeConfig<T> {
    /// Consumption with MCU and radio asleep, watts.
    pub sleep_power: T,
    /// Consumption while transmitting (including carrier sensing), watts.
    pub tx_mode_power: T,
    pub duty_cycle: T,
    pub tx_duration: T,
    pub capacitance: T,
    /// Voltage the capacitor is pre-charged to before a judgment.
    pub typical_voltage: T,
    /// Cutoff voltage; below it the node browns out.
    pub min_voltage: T,
    /// Voltage at which a browned-out node restarts.
    pub resume_voltage: T,
    pub sensor_init_time: T,
    /// Window over which the voltage trend decides activation.
    pub judgment_window: T,
}

/// Measured consumption variants of the prototype node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConsumptionCase {
    /// MCU and radio both sleep between transmissions.
    #[default]
    Case0,
    /// Neither MCU nor radio sleeps.
    Case1,
    /// Only the MCU sleeps.
    Case2,
    /// Only the radio sleeps.
    Case3,
    /// Case 0 transmitting at +13 dBm instead of -13 dBm.
    Case4,
}

impl ConsumptionCase {
    pub const ALL: [ConsumptionCase; 5] = [Self::Case0, Self::Case1, Self::Case2, Self::Case3, Self::Case4];

    pub fn name(self) -> &'static str {
        match self {
            Self::Case0 => "case0",
            Self::Case1 => "case1",
            Self::Case2 => "case2",
            Self::Case3 => "case3",
            Self::Case4 => "case4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl<T: Scalar> NodeConfig<T> {
    pub fn preset(case: ConsumptionCase) -> Self {
        let base = NodeConfig {
            sleep_power: T::lit(presets::SLEEP_POWER_W),
            tx_mode_power: T::lit(presets::TX_MODE_POWER_W),
            duty_cycle: T::lit(presets::DUTY_CYCLE_S),
            tx_duration: T::lit(presets::TX_DURATION_S),
            capacitance: T::lit(presets::CAPACITANCE_F),
            typical_voltage: T::lit(presets::TYPICAL_VOLTAGE_V),
            min_voltage: T::lit(presets::MIN_VOLTAGE_V),
            resume_voltage: T::lit(presets::TYPICAL_VOLTAGE_V),
            sensor_init_time: T::lit(presets::SENSOR_INIT_TIME_S),
            judgment_window: T::lit(presets::JUDGMENT_WINDOW_S),
        };
        // Only the averages of cases 1-3 are known; the base (sleep) power is
        // solved so the duty-cycle average matches.
        let with_average = |average: f64| {
            let t_tx = presets::TX_DURATION_S;
            let t_d = presets::DUTY_CYCLE_S;
            let sleep = (average * t_d - presets::TX_MODE_POWER_W * t_tx) / (t_d - t_tx);
            NodeConfig { sleep_power: T::lit(sleep), ..base }
        };
        match case {
            ConsumptionCase::Case0 => base,
            ConsumptionCase::Case1 => with_average(5.89e-3),
            ConsumptionCase::Case2 => with_average(2.35e-3),
            ConsumptionCase::Case3 => with_average(3.72e-3),
            // ~35 mA extra for the 4 ms data burst at 2.3 V, spread over the Tx mode
            ConsumptionCase::Case4 => NodeConfig {
                tx_mode_power: T::lit(presets::TX_MODE_POWER_W + 35e-3 * 2.3 * 4e-3 / presets::TX_DURATION_S),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.sleep_power >= T::zero()) {
            problems.push("sleep_power must be nonnegative".to_string());
        }
        if !(self.sleep_power < self.tx_mode_power) {
            problems.push("sleep_power must be below tx_mode_power".to_string());
        }
        if !(self.tx_duration > T::zero() && self.tx_duration < self.duty_cycle) {
            problems.push("tx_duration must lie in (0, duty_cycle)".to_string());
        }
        if !(self.capacitance > T::zero()) {
            problems.push("capacitance must be positive".to_string());
        }
        if !(self.min_voltage >= T::zero() && self.min_voltage < self.typical_voltage) {
            problems.push("min_voltage must lie in [0, typical_voltage)".to_string());
        }
        if !(self.resume_voltage > self.min_voltage) {
            problems.push("resume_voltage must exceed min_voltage".to_string());
        }
        if !(self.sensor_init_time >= T::zero()) {
            problems.push("sensor_init_time must be nonnegative".to_string());
        }
        if !(self.judgment_window > T::zero()) {
            problems.push("judgment_window must be positive".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("node config", problems.join("; ")))
        }
    }

    /// Sleep portion of the duty cycle, `T_d - T_Tx`.
    pub fn sleep_duration(&self) -> T {
        self.duty_cycle - self.tx_duration
    }

    /// Energy drawn over one full duty cycle, joules.
    pub fn cycle_energy(&self) -> T {
        self.sleep_power * self.sleep_duration() + self.tx_mode_power * self.tx_duration
    }
}

impl<T: Scalar> Default for NodeConfig<T> {
    fn default() -> Self {
        Self::preset(ConsumptionCase::Case0)
    }
}

/// Instantaneous consumption at time `t` since the start of the cycle:
/// sleep power on `(0, T_s]`, Tx power on `(T_s, T_d]`, repeating.
pub fn consumed_power_at<T: Scalar>(cfg: &NodeConfig<T>, t: T) -> T {
    let mut phase = t % cfg.duty_cycle;
    if phase <= T::zero() {
        phase = phase + cfg.duty_cycle;
    }
    if phase <= cfg.sleep_duration() {
        cfg.sleep_power
    } else {
        cfg.tx_mode_power
    }
}

/// Energy drawn since the start of the cycle, as an exact integral.
fn cumulative_energy<T: Scalar>(cfg: &NodeConfig<T>, t: T) -> T {
    let cycles = (t / cfg.duty_cycle).floor();
    let phase = t - cycles * cfg.duty_cycle;
    let sleep = cfg.sleep_duration();
    let partial = if phase <= sleep {
        cfg.sleep_power * phase
    } else {
        cfg.sleep_power * sleep + cfg.tx_mode_power * (phase - sleep)
    };
    cycles * cfg.cycle_energy() + partial
}

/// Energy consumed over `[from, to]`, joules.
pub fn consumed_energy<T: Scalar>(cfg: &NodeConfig<T>, from: T, to: T) -> T {
    cumulative_energy(cfg, to) - cumulative_energy(cfg, from)
}

/// Duty-cycle average `(P_s T_s + P_Tx T_Tx) / T_d`.
pub fn average_consumed_power<T: Scalar>(cfg: &NodeConfig<T>) -> T {
    cfg.cycle_energy() / cfg.duty_cycle
}

/// Smallest capacitor that carries a Tx burst from `V_typ` down to `V_min`
/// while the rectifier delivers `P_req * Gamma[P_req]`.
pub fn min_capacitance<T: Scalar>(cfg: &NodeConfig<T>, required_power: T, efficiency_at_required: T) -> Result<T> {
    let (v_hi, v_lo) = (cfg.typical_voltage, cfg.min_voltage);
    if !(v_hi > v_lo) {
        return Err(Error::invalid("voltage window", format!("typical {v_hi} V must exceed minimum {v_lo} V")));
    }
    let harvested = required_power * efficiency_at_required;
    let deficit = (cfg.tx_mode_power - harvested).max(T::zero());
    Ok(T::lit(2.0) * cfg.tx_duration * deficit / (v_hi * v_hi - v_lo * v_lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SleepSensorOnly,
    TxActive,
    /// Browned out below the cutoff; draws nothing until it restarts.
    Dead,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState<T> {
    /// Mode for the interval starting at `clock`.
    pub mode: Mode,
    pub capacitor_voltage: T,
    pub clock: T,
    /// Clock value at which the current duty-cycle sequence started.
    pub cycle_origin: T,
    /// Remaining sensor initialization time after a (re)start.
    pub init_remaining: T,
}

impl<T: Scalar> NodeState<T> {
    /// Initialized node pre-charged to `V_typ` at the start of a cycle.
    pub fn warm(cfg: &NodeConfig<T>) -> Self {
        NodeState {
            mode: Mode::SleepSensorOnly,
            capacitor_voltage: cfg.typical_voltage,
            clock: T::zero(),
            cycle_origin: T::zero(),
            init_remaining: T::zero(),
        }
    }

    /// Freshly powered node: the sensor still has to initialize.
    pub fn cold(cfg: &NodeConfig<T>) -> Self {
        NodeState { init_remaining: cfg.sensor_init_time, ..Self::warm(cfg) }
    }

    /// Time into the current duty cycle.
    pub fn cycle_phase(&self, cfg: &NodeConfig<T>) -> T {
        let elapsed = self.clock - self.cycle_origin;
        elapsed - (elapsed / cfg.duty_cycle).floor() * cfg.duty_cycle
    }
}

fn scheduled_mode<T: Scalar>(cfg: &NodeConfig<T>, state: &NodeState<T>) -> Mode {
    let phase = state.cycle_phase(cfg);
    let tol = T::lit(1e-9) * cfg.duty_cycle;
    if phase >= cfg.sleep_duration() - tol && phase < cfg.duty_cycle - tol {
        Mode::TxActive
    } else {
        Mode::SleepSensorOnly
    }
}

/// Advances the node's clock by `dt` and applies mode transitions.
///
/// The capacitor voltage is taken as already integrated up to the new clock.
/// Carrier sensing always finds the channel clear, so every cycle transmits.
pub fn step_state_machine<T: Scalar>(cfg: &NodeConfig<T>, state: &NodeState<T>, dt: T) -> NodeState<T> {
    let mut next = NodeState { clock: state.clock + dt, ..*state };
    if state.mode == Mode::Dead {
        if next.capacitor_voltage >= cfg.resume_voltage {
            next.mode = Mode::SleepSensorOnly;
            next.cycle_origin = next.clock;
            next.init_remaining = cfg.sensor_init_time;
        }
        return next;
    }
    if next.capacitor_voltage < cfg.min_voltage {
        next.mode = Mode::Dead;
        return next;
    }
    next.init_remaining = (state.init_remaining - dt).max(T::zero());
    next.mode = scheduled_mode(cfg, &next);
    next
}

/// Fixed-step integration settings for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule<T> {
    pub duration: T,
    pub step: T,
    /// Spacing of the recorded trajectory samples.
    pub record_interval: T,
}

impl<T: Scalar> Schedule<T> {
    /// Judgment window (plus the init hold-off for a cold node) at
    /// `T_Tx / 100`, recording every 10 ms.
    pub fn for_state(cfg: &NodeConfig<T>, state: &NodeState<T>) -> Self {
        Schedule {
            duration: state.init_remaining + cfg.judgment_window,
            step: cfg.tx_duration / T::lit(100.0),
            record_interval: T::lit(1e-2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationVerdict<T> {
    /// Capacitor voltage did not drop over the judgment window.
    pub active: bool,
    pub delta_v: T,
    pub window_start: T,
    pub window_end: T,
    /// `(elapsed seconds, volts)` samples.
    pub trajectory: Vec<(T, T)>,
    pub min_voltage: T,
    pub browned_out: bool,
    pub final_state: NodeState<T>,
}

/// Integrates the node's capacitor under a DC input and judges activation.
///
/// `dc_input` receives the time elapsed since the start of the run. The
/// judgment window opens once sensor initialization has finished (right
/// away for a warm node) and lasts `cfg.judgment_window`.
pub fn simulate<T, F>(
    cfg: &NodeConfig<T>,
    initial: &NodeState<T>,
    dc_input: F,
    schedule: &Schedule<T>,
) -> Result<ActivationVerdict<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    cfg.validate()?;
    let h = schedule.step;
    let limit = cfg.tx_duration / T::lit(10.0);
    if !(h > T::zero()) || h > limit {
        return Err(Error::StepTooCoarse { step: h.as_f64(), limit: limit.as_f64() });
    }
    let steps = |span: T| (span / h).round().to_usize().unwrap_or(0);
    let window_open = (initial.init_remaining / h).ceil().to_usize().unwrap_or(0);
    let window_close = window_open + steps(cfg.judgment_window);
    let total = steps(schedule.duration);
    if total < window_close {
        return Err(Error::DurationTooShort {
            duration: schedule.duration.as_f64(),
            required: (h * T::lit(window_close as f64)).as_f64(),
        });
    }
    let record_every = steps(schedule.record_interval).max(1);

    let two_over_c = T::lit(2.0) / cfg.capacitance;
    let start = initial.clock;
    let mut state = *initial;
    let mut v_squared = state.capacitor_voltage * state.capacitor_voltage;
    let mut trajectory = vec![(T::zero(), state.capacitor_voltage)];
    let mut min_voltage = state.capacitor_voltage;
    let mut browned_out = state.mode == Mode::Dead;
    let mut v_open = state.capacitor_voltage;
    let mut v_close = state.capacitor_voltage;
    let mut p_prev = dc_input(T::zero());

    for k in 0..total {
        let t0 = h * T::lit(k as f64);
        let t1 = h * T::lit((k + 1) as f64);
        let p_next = dc_input(t1);
        let harvested = (p_prev + p_next) / T::lit(2.0) * h;
        let consumed = if state.mode == Mode::Dead {
            T::zero()
        } else {
            let origin = state.cycle_origin - start;
            consumed_energy(cfg, t0 - origin, t1 - origin)
        };
        v_squared = (v_squared + two_over_c * (harvested - consumed)).max(T::zero());
        p_prev = p_next;

        state.capacitor_voltage = v_squared.sqrt();
        state = step_state_machine(cfg, &state, h);
        state.clock = start + t1;

        min_voltage = min_voltage.min(state.capacitor_voltage);
        browned_out |= state.mode == Mode::Dead;
        if k + 1 == window_open {
            v_open = state.capacitor_voltage;
        }
        if k + 1 == window_close {
            v_close = state.capacitor_voltage;
        }
        if (k + 1) % record_every == 0 {
            trajectory.push((t1, state.capacitor_voltage));
        }
    }

    Ok(ActivationVerdict {
        active: v_close >= v_open,
        delta_v: v_close - v_open,
        window_start: h * T::lit(window_open as f64),
        window_end: h * T::lit(window_close as f64),
        trajectory,
        min_voltage,
        browned_out,
        final_state: state,
    })
}

/// Bench setup for measuring rectifier efficiency with a sleeping node as load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSetup<T> {
    pub capacitance: T,
    pub duration: T,
    pub v_start: T,
    pub sleep_power: T,
    pub step: T,
}

impl<T: Scalar> Default for BenchSetup<T> {
    fn default() -> Self {
        BenchSetup {
            capacitance: T::lit(presets::CAPACITANCE_F),
            duration: T::lit(presets::JUDGMENT_WINDOW_S),
            v_start: T::lit(presets::TYPICAL_VOLTAGE_V),
            sleep_power: T::lit(presets::SLEEP_POWER_W),
            step: T::lit(1e-3),
        }
    }
}

/// Charges the bench capacitor from a constant RF input through `model`
/// and returns the resulting voltage trace.
pub fn measure_efficiency_trace<T: Scalar>(
    model: &RectifierModel<T>,
    input_power: T,
    bench: &BenchSetup<T>,
) -> Result<EfficiencyTrace<T>> {
    if !(bench.step > T::zero() && bench.duration > T::zero() && bench.capacitance > T::zero()) {
        return Err(Error::invalid("bench setup", "step, duration and capacitance must be positive"));
    }
    let dc = model.dc_output(input_power)?;
    let steps = (bench.duration / bench.step).round().to_usize().unwrap_or(1).max(1);
    let h = bench.duration / T::lit(steps as f64);
    let two_over_c = T::lit(2.0) / bench.capacitance;
    let mut v_squared = bench.v_start * bench.v_start;
    for _ in 0..steps {
        v_squared = (v_squared + two_over_c * (dc - bench.sleep_power) * h).max(T::zero());
    }
    Ok(EfficiencyTrace {
        capacitance: bench.capacitance,
        duration: bench.duration,
        v_start: bench.v_start,
        v_end: v_squared.sqrt(),
        sleep_power: bench.sleep_power,
        input_power,
    })
}

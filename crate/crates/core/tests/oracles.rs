//! Cross-checks of the models against independent formulations.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use wpt_core::node::{self, Schedule};
use wpt_core::{coverage, propagation};
use wpt_core::{GainConvention, Geometry, LinkBudget, NodeConfig, NodeState, Scenario, Scheme, Transmitter};

/// Two transmitters at 0 and L in closed form:
/// `P_t^e (lambda/4pi)^2 [1/l^2 + 1/(L-l)^2 + 2 cos(2 pi df t + dtheta + 2 pi (L-2l)/lambda) / (l (L-l))]`.
fn closed_form(pte: f64, lambda: f64, line: f64, l: f64, df: f64, t: f64, dtheta: f64) -> f64 {
    let a = lambda / (4.0 * PI);
    let arg = 2.0 * PI * df * t + dtheta + 2.0 * PI * (line - 2.0 * l) / lambda;
    pte * a * a * (1.0 / (l * l) + 1.0 / ((line - l) * (line - l)) + 2.0 * arg.cos() / (l * (line - l)))
}

fn reference(scheme: Scheme) -> Scenario {
    Scenario::reference(scheme, GainConvention::DbExact)
}

#[test]
fn mp_field_matches_closed_form_on_grid() {
    for dtheta in [0.0, 0.7, PI] {
        let s = reference(Scheme::Mp).with_phase_offset(dtheta);
        let pte = s.budget.equivalent_tx_power;
        let lambda = s.budget.wavelength;
        for (l, p) in s.power_field().unwrap() {
            if !p.is_finite() {
                continue;
            }
            let expected = closed_form(pte, lambda, 6.0, l, 0.0, 0.0, dtheta);
            // relative to the constructive envelope; near a deadspot the
            // closed form itself loses digits to cancellation
            let p1 = pte * (lambda / (4.0 * PI * l)).powi(2);
            let p2 = pte * (lambda / (4.0 * PI * (6.0 - l))).powi(2);
            let envelope = (p1.sqrt() + p2.sqrt()).powi(2);
            assert!((p - expected).abs() <= 1e-12 * envelope, "l={l} got {p} want {expected}");
            let direct = propagation::instantaneous_power(&s.transmitters, l, 0.0, &s.budget).unwrap();
            assert_relative_eq!(p, direct, max_relative = 1e-12);
        }
    }
}

#[test]
fn mpcsd_instantaneous_matches_closed_form() {
    let s = reference(Scheme::Mpcsd).with_phase_offset(0.4);
    let pte = s.budget.equivalent_tx_power;
    let lambda = s.budget.wavelength;
    for &l in &[0.5, 1.234, 2.9, 3.0, 4.75] {
        for &t in &[0.0, 1.3e-4, 5e-4, 7.77e-4] {
            let p = propagation::instantaneous_power(&s.transmitters, l, t, &s.budget).unwrap();
            // the second carrier is f1 + df, so its phase advances: the cross
            // term rotates as -2 pi df t relative to the first transmitter
            let expected = closed_form(pte, lambda, 6.0, l, -1e3, t, 0.4);
            let a = lambda / (4.0 * PI);
            let envelope = pte * a * a * (1.0 / l + 1.0 / (6.0 - l)).powi(2);
            assert!((p - expected).abs() <= 1e-10 * envelope, "l={l} t={t} got {p} want {expected}");
        }
    }
}

#[test]
fn midpoint_constructive_is_four_times_single() {
    let s = reference(Scheme::Mp);
    let single = propagation::received_power_single(&s.transmitters[0], 3.0, &s.budget).unwrap();
    let both = propagation::instantaneous_power(&s.transmitters, 3.0, 0.0, &s.budget).unwrap();
    assert_relative_eq!(both, 4.0 * single, max_relative = 1e-12);
}

#[test]
fn deadspot_reaches_destructive_bound() {
    let s = reference(Scheme::Mp);
    let lambda = s.budget.wavelength;
    // 2 pi (L - 2l) / lambda = pi
    let l = 3.0 - lambda / 4.0;
    let p = propagation::received_power_mp(&s.transmitters, l, &s.budget).unwrap();
    let p1 = propagation::received_power_single(&s.transmitters[0], l, &s.budget).unwrap();
    let p2 = propagation::received_power_single(&s.transmitters[1], l, &s.budget).unwrap();
    assert_relative_eq!(p, (p1.sqrt() - p2.sqrt()).powi(2), max_relative = 1e-8);
}

/// Simpson's rule over one fading period, written independently of the
/// library's trapezoidal averager.
fn simpson_mean(f: impl Fn(f64) -> f64, period: f64, intervals: usize) -> f64 {
    let h = period / intervals as f64;
    let mut acc = f(0.0) + f(period);
    for k in 1..intervals {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    acc * h / 3.0 / period
}

#[test]
fn csd_average_equals_sum_of_single_powers() {
    let s = reference(Scheme::Mpcsd);
    let pte = s.budget.equivalent_tx_power;
    let lambda = s.budget.wavelength;
    for &l in &[0.2, 1.0, 2.918, 3.0, 5.5] {
        let oracle = simpson_mean(|t| closed_form(pte, lambda, 6.0, l, 1e3, t, 0.0), 1e-3, 400);
        let analytic = propagation::mean_power_mpcsd(&s.transmitters, l, &s.budget).unwrap();
        let numeric = propagation::time_averaged_power(&s.transmitters, l, 1e-3, 1e-5, &s.budget).unwrap();
        assert_relative_eq!(oracle, analytic, max_relative = 1e-9);
        assert_relative_eq!(numeric.power, analytic, max_relative = 1e-9);
        assert!(numeric.whole_periods);
    }
}

#[test]
fn sp_coverage_matches_analytic_boundary() {
    for (scheme, line) in [(Scheme::Sp1, 6.0), (Scheme::Sp1, 3.0), (Scheme::Sp2, 6.0)] {
        let base = reference(scheme);
        let g = Geometry { line_length: line, ..base.geometry };
        let template = base.transmitters[0];
        let s = Scenario::two_point(g, template, base.budget.rx_gain, scheme, 1e3, 0.0).unwrap();
        let report = coverage::compute_coverage(&s).unwrap();
        // P_t^e (lambda / 4 pi l)^2 = P_req
        let boundary = s.budget.aperture_length() * (s.budget.equivalent_tx_power / 400e-6).sqrt();
        let analytic = boundary.min(line) / line;
        let cell = g.sample_interval / line;
        assert!(
            (report.coverage - analytic).abs() <= cell + 1.0 / report.positions.len() as f64,
            "{scheme:?} L={line}: {} vs {analytic}",
            report.coverage
        );
    }
}

#[test]
fn mpcsd_coverage_equals_threshold_at_required_power() {
    for required in [None, Some(400e-6), Some(2e-3)] {
        let mut s = reference(Scheme::Mpcsd);
        s.required_power = required;
        let report = coverage::compute_coverage(&s).unwrap();
        let p_req = s.required_power().unwrap();
        let thresholded = report.avg_power.iter().filter(|&&p| p >= p_req).count();
        assert_eq!(report.active_count(), thresholded, "required {required:?}");
    }
}

#[test]
fn dominance_over_single_point() {
    for p_req in [1e-4, 4e-4, 1e-3, 5e-3] {
        let mut csd = reference(Scheme::Mpcsd);
        csd.required_power = Some(p_req);
        let c = coverage::compute_coverage(&csd).unwrap().coverage;
        for scheme in [Scheme::Sp1, Scheme::Sp2] {
            let mut sp = reference(scheme);
            sp.required_power = Some(p_req);
            assert!(c >= coverage::compute_coverage(&sp).unwrap().coverage);
        }
    }
}

#[test]
fn spacing_substitutes_back_into_midpoint_power() {
    let s = reference(Scheme::Mpcsd);
    let l_max = coverage::max_spacing(wpt_core::SpacingScheme::CarrierShift, &s.budget, 400e-6).unwrap();
    let tx1 = s.transmitters[0];
    let tx2 = Transmitter { position: l_max, ..s.transmitters[1] };
    let mid = propagation::mean_power_mpcsd(&[tx1, tx2], l_max / 2.0, &s.budget).unwrap();
    assert_relative_eq!(mid, 400e-6, max_relative = 1e-9);
}

/// Trapezoid reference over a fine grid with the consumption profile
/// sampled pointwise, independent of the simulator's exact step integral.
fn reference_energy(cfg: &NodeConfig, input: impl Fn(f64) -> f64, t0: f64, t1: f64, n: usize) -> f64 {
    let h = (t1 - t0) / n as f64;
    let g = |t: f64| input(t) - node::consumed_power_at(cfg, t);
    let mut acc = (g(t0) + g(t1)) / 2.0;
    for k in 1..n {
        acc += g(t0 + k as f64 * h);
    }
    acc * h
}

#[test]
fn capacitor_energy_is_conserved() {
    let cfg = NodeConfig { capacitance: 5e-3, ..NodeConfig::default() };
    let state = NodeState::warm(&cfg);
    let input = |t: f64| 150e-6 * (1.0 + 0.5 * (2.0 * PI * 0.7 * t).sin());
    let schedule = Schedule { duration: 20.0, step: 1e-4, record_interval: 1e-2 };
    let v = node::simulate(&cfg, &state, input, &schedule).unwrap();
    assert!(!v.browned_out);
    for &(t1, t2) in &[(0.0, 3.0), (2.5, 11.2), (0.0, 20.0)] {
        let at = |t: f64| v.trajectory.iter().find(|s| (s.0 - t).abs() < 1e-9).unwrap().1;
        let stored = cfg.capacitance / 2.0 * (at(t2).powi(2) - at(t1).powi(2));
        let expected = reference_energy(&cfg, input, t1, t2, ((t2 - t1) * 1e5) as usize);
        let scale = reference_energy(&cfg, |_| 0.0, t1, t2, ((t2 - t1) * 1e5) as usize).abs();
        assert!((stored - expected).abs() <= 1e-3 * scale, "[{t1},{t2}] stored {stored} expected {expected}");
    }
}

#[test]
fn min_capacitance_separates_brownout() {
    let base = NodeConfig::default();
    let p_csp = 142e-6;
    let c_min = node::min_capacitance(&base, 400e-6, p_csp / 400e-6).unwrap();
    let run = |factor: f64| {
        let cfg = NodeConfig { capacitance: factor * c_min, ..base };
        // start of the Tx burst, capacitor at V_typ
        let state = NodeState { clock: cfg.sleep_duration(), ..NodeState::warm(&cfg) };
        let mut schedule = Schedule::for_state(&cfg, &state);
        schedule.duration = cfg.judgment_window;
        node::simulate(&cfg, &state, |_| p_csp, &schedule).unwrap()
    };
    let small = run(0.9);
    assert!(small.browned_out && small.min_voltage < base.min_voltage);
    let large = run(1.1);
    assert!(!large.browned_out && large.min_voltage >= base.min_voltage, "{}", large.min_voltage);
}

#[test]
fn average_consumption_is_long_run_mean() {
    let cfg = NodeConfig::default();
    // midpoint rule with the Tx window split into whole cells
    let n = 100_000 * 7;
    let h = 7.0 / n as f64;
    let mean = (0..n).map(|k| node::consumed_power_at(&cfg, (k as f64 + 0.5) * h)).sum::<f64>() / n as f64;
    assert_relative_eq!(mean, node::average_consumed_power(&cfg), max_relative = 1e-9);
}

#[test]
fn single_precision_reference_coverage() {
    let s = wpt_core::Scenario32::reference(Scheme::Mpcsd, GainConvention::DbExact);
    assert_eq!(coverage::compute_coverage(&s).unwrap().coverage, 1.0);
    let budget: LinkBudget = Scenario::reference(Scheme::Mp, GainConvention::DbExact).budget;
    assert_relative_eq!(s.budget.wavelength as f64, budget.wavelength, max_relative = 1e-6);
}

use proptest::prelude::*;

use wpt_core::coverage::{self, log_space};
use wpt_core::node::{self, BenchSetup, Schedule};
use wpt_core::propagation;
use wpt_core::rectifier::{self, check_convex_output};
use wpt_core::{GainConvention, NodeConfig, NodeState, RectifierModel, Scenario, Scheme, Transmitter};

fn reference(scheme: Scheme) -> Scenario {
    Scenario::reference(scheme, GainConvention::DbExact)
}

fn interior() -> impl Strategy<Value = f64> {
    0.01..5.99f64
}

proptest! {
    #[test]
    fn single_power_is_mirror_symmetric(l in interior()) {
        let s = reference(Scheme::Mp);
        let a = propagation::received_power_single(&s.transmitters[0], l, &s.budget).unwrap();
        let b = propagation::received_power_single(&s.transmitters[1], 6.0 - l, &s.budget).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn single_power_decreases_with_distance(d in 0.01..10.0f64, extra in 1e-3..5.0f64) {
        let s = reference(Scheme::Sp1);
        let tx = s.transmitters[0];
        let near = propagation::received_power_single(&tx, d, &s.budget).unwrap();
        let far = propagation::received_power_single(&tx, d + extra, &s.budget).unwrap();
        prop_assert!(far < near);
    }

    #[test]
    fn interference_stays_within_bounds(l in interior(), t in 0.0..1e-2f64, dtheta in 0.0..6.3f64) {
        let s = reference(Scheme::Mpcsd).with_phase_offset(dtheta);
        let p1 = propagation::received_power_single(&s.transmitters[0], l, &s.budget).unwrap();
        let p2 = propagation::received_power_single(&s.transmitters[1], l, &s.budget).unwrap();
        let p = propagation::instantaneous_power(&s.transmitters, l, t, &s.budget).unwrap();
        let lo = (p1.sqrt() - p2.sqrt()).powi(2);
        let hi = (p1.sqrt() + p2.sqrt()).powi(2);
        prop_assert!(p >= lo - 1e-12 * hi && p <= hi * (1.0 + 1e-12), "{lo} <= {p} <= {hi}");
    }

    #[test]
    fn field_repeats_every_fading_period(l in interior(), t in 0.0..1e-2f64) {
        let s = reference(Scheme::Mpcsd);
        let a = propagation::instantaneous_power(&s.transmitters, l, t, &s.budget).unwrap();
        let b = propagation::instantaneous_power(&s.transmitters, l, t + 1e-3, &s.budget).unwrap();
        let hi = propagation::mean_power_mpcsd(&s.transmitters, l, &s.budget).unwrap() * 2.0;
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-9 * hi), "{a} vs {b}");
    }

    #[test]
    fn csd_average_independent_of_phase(l in interior(), t1 in -10.0..10.0f64, t2 in -10.0..10.0f64) {
        let mut s = reference(Scheme::Mpcsd);
        let base = propagation::mean_power_mpcsd(&s.transmitters, l, &s.budget).unwrap();
        s.transmitters[0].initial_phase = t1;
        s.transmitters[1].initial_phase = t2;
        prop_assert_eq!(propagation::mean_power_mpcsd(&s.transmitters, l, &s.budget).unwrap(), base);
    }

    #[test]
    fn csd_average_covers_each_transmitter(l in interior()) {
        let s = reference(Scheme::Mpcsd);
        let sum = propagation::mean_power_mpcsd(&s.transmitters, l, &s.budget).unwrap();
        for tx in &s.transmitters {
            prop_assert!(sum >= propagation::received_power_single(tx, l, &s.budget).unwrap());
        }
    }

    #[test]
    fn numeric_average_matches_csd_mean(l in interior(), periods in 1usize..4) {
        let s = reference(Scheme::Mpcsd);
        let avg = propagation::time_averaged_power(&s.transmitters, l, periods as f64 * 1e-3, 1e-5, &s.budget).unwrap();
        let exact = propagation::mean_power_mpcsd(&s.transmitters, l, &s.budget).unwrap();
        prop_assert!(avg.whole_periods);
        prop_assert!(((avg.power - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn static_mp_field_equals_instantaneous(l in interior(), dtheta in 0.0..6.3f64) {
        let s = reference(Scheme::Mp).with_phase_offset(dtheta);
        let a = propagation::received_power_mp(&s.transmitters, l, &s.budget).unwrap();
        let b = propagation::time_averaged_power(&s.transmitters, l, 0.0123, 1e-4, &s.budget).unwrap();
        prop_assert_eq!(a, b.power);
    }

    #[test]
    fn dc_output_nondecreasing(p in 1e-7..1e-2f64, q in 1e-7..1e-2f64) {
        let r = RectifierModel::default();
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(r.dc_output(lo).unwrap() <= r.dc_output(hi).unwrap());
        let g = r.efficiency(p).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn jensen_holds_for_convex_output(l in interior(), dtheta in 0.0..6.3f64) {
        let s = reference(Scheme::Mpcsd).with_phase_offset(dtheta);
        let pair = coverage::jensen_pair(&s, l, 256).unwrap();
        prop_assert!(pair.mean_of_dc >= pair.dc_of_mean * (1.0 - 1e-12));
    }

    #[test]
    fn efficiency_recovery_inverts_bench_charging(p in 156e-6..1e-3f64) {
        let r = RectifierModel::default();
        let trace = node::measure_efficiency_trace(&r, p, &BenchSetup::default()).unwrap();
        let recovered = rectifier::recover_efficiency(&trace).unwrap();
        let truth = r.efficiency(p).unwrap();
        prop_assert!(((recovered - truth) / truth).abs() < 1e-3);
    }

    #[test]
    fn coverage_curve_is_nonincreasing(dtheta in 0.0..6.3f64, scheme_idx in 0usize..4) {
        let scheme = Scheme::ALL[scheme_idx];
        let s = reference(scheme).with_phase_offset(dtheta);
        let grid = log_space(1e-6, 1e-1, 41);
        let curve = coverage::coverage_curve(&s, &grid).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn constant_input_verdict_follows_energy_balance(ratio in 0.5..1.5f64) {
        prop_assume!((ratio - 1.0).abs() > 0.005);
        let cfg = NodeConfig::default();
        let state = NodeState::warm(&cfg);
        let p = node::average_consumed_power(&cfg) * ratio;
        let v = node::simulate(&cfg, &state, |_| p, &Schedule::for_state(&cfg, &state)).unwrap();
        prop_assert_eq!(v.active, ratio >= 1.0);
    }

    #[test]
    fn tabulated_convex_tables_pass_check(slopes in proptest::collection::vec(0.01..0.2f64, 3..6)) {
        // cumulative, sorted slopes make a convex piecewise-linear output
        let mut slopes = slopes;
        slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut points = Vec::new();
        let (mut p, mut out) = (100e-6, 0.0);
        for s in &slopes {
            let next = p + 200e-6;
            out += s * 200e-6;
            p = next;
            points.push((p, out / p));
        }
        let model = RectifierModel::tabulated(&points).unwrap();
        let check = check_convex_output(&model, points[0].0, points.last().unwrap().0).unwrap();
        prop_assert!(check.convex, "{:?}", check);
    }
}

#[test]
fn mpcsd_requires_offset_transmitters() {
    let s = reference(Scheme::Mp);
    let txs: Vec<Transmitter> = s.transmitters.clone();
    assert!(propagation::mean_power_mpcsd(&txs, 2.0, &s.budget).is_err());
}

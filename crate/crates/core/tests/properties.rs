// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skyrmion_core::analysis::{pareto_curve, sum_energy, sum_precision, EnergyModel, EnergyPreset};
use skyrmion_core::crossbar::{expected_sum, CrossbarConfig, InputVector, ReadoutMode};
use skyrmion_core::device::{
    velocity_from_current, weight_from_field, weight_scale_current, weight_scale_duration, DeviceCalibration,
    FieldSetting, Polarity, PulseTrain,
};
use skyrmion_core::netmap::{field_for_weight, infer, quantize, Activation, InferMode, Matrix};
use skyrmion_core::nucleation::{sample_pulse_count, StochasticModel};
use skyrmion_core::readout::{drift_correct, hall_voltage, mtj_output, MeasurementTrace, MtjConfig, Phase};
use skyrmion_core::transport::{DetectionZone, Notch, SkyrmionPopulation};

fn cal() -> DeviceCalibration {
    DeviceCalibration::paper2024()
}

proptest! {
    #[test]
    fn field_law_is_affine(h in 20.0f64..25.9, dh in 0.01f64..0.1) {
        let c = cal();
        let a = weight_from_field(&c, FieldSetting::new(h)).unwrap().weight;
        let b = weight_from_field(&c, FieldSetting::new(h + dh)).unwrap().weight;
        let slope = (b - a) / dh;
        prop_assert!((slope / c.weight_field_slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn field_inverse_round_trip(w in 0.0f64..3.42) {
        let c = cal();
        let f = field_for_weight(w, &c).unwrap();
        let back = weight_from_field(&c, f).unwrap().weight;
        prop_assert!((back - w).abs() <= 1e-12 * w.max(1.0));
    }

    #[test]
    fn control_laws_are_monotone(a in 141.0f64..300.0, b in 141.0f64..300.0, t in 31.0f64..100.0, u in 31.0f64..100.0) {
        let c = cal();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(weight_scale_current(&c, lo).unwrap() <= weight_scale_current(&c, hi).unwrap());
        let (lo, hi) = if t < u { (t, u) } else { (u, t) };
        prop_assert!(weight_scale_duration(&c, lo).unwrap() <= weight_scale_duration(&c, hi).unwrap());
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (lo, hi) = (lo.clamp(150.0, 200.0), hi.clamp(150.0, 200.0));
        prop_assert!(velocity_from_current(&c, lo).unwrap() <= velocity_from_current(&c, hi).unwrap());
    }

    #[test]
    fn nucleation_support(w in 0.0f64..4.0, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let model = StochasticModel::new(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = sample_pulse_count(w, &model, &mut rng).unwrap();
        let base = w.floor() as u32;
        prop_assert!(n + 1 >= base && n <= base + 2);
        if w == 0.0 {
            prop_assert_eq!(n, 0);
        }
    }

    #[test]
    fn hall_voltage_is_additive(a in 0u32..10_000, b in 0u32..10_000) {
        let c = cal();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sum = hall_voltage(a + b, &c, None, &mut rng);
        let parts = hall_voltage(a, &c, None, &mut rng) + hall_voltage(b, &c, None, &mut rng);
        prop_assert_eq!(sum, parts);
    }

    #[test]
    fn mtj_monotone_and_convex(tmr in 0.01f64..5.0, r_p in 10.0f64..1e5, i in 1.0f64..100.0) {
        let mtj = MtjConfig { r_parallel: r_p, tmr, junction_area: 36.0, read_current: i };
        let xs: Vec<f64> = (0..=50).map(|k| f64::from(k) / 50.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| mtj_output(x, &mtj)).collect();
        for w in ys.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        for w in ys.windows(3) {
            prop_assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-12 * w[2].abs());
        }
        prop_assert_eq!(mtj_output(1.0, &mtj), i * r_p * (1.0 + tmr) * 1e-3);
    }

    #[test]
    fn forward_reverse_round_trip(n in 1u32..20, pulses in 1u32..40) {
        let c = cal();
        let mut pop = SkyrmionPopulation::new(0, &c);
        pop.nucleate(n, Notch::for_calibration(&c));
        // Advance first so the retrace stops short of the notch.
        let fwd = PulseTrain::forward(pulses, 150.0, 50.0).unwrap();
        pop.advance(&fwd, &c).unwrap();
        let before: Vec<(f64, f64)> = pop.alive().map(|s| (s.x, s.y)).collect();
        pop.advance(&fwd, &c).unwrap();
        let rev = PulseTrain::new(pulses, 150.0, 50.0, Polarity::Reverse).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        pop.reverse_erase(&rev, &c, 0.0, &mut rng).unwrap();
        let after: Vec<(f64, f64)> = pop.alive().map(|s| (s.x, s.y)).collect();
        prop_assert_eq!(before.len(), after.len());
        for (p, q) in before.iter().zip(&after) {
            prop_assert!((p.0 - q.0).abs() < 1e-9 && (p.1 - q.1).abs() < 1e-9);
        }
    }

    #[test]
    fn motion_never_creates_skyrmions(n in 0u32..50, pulses in 0u32..500) {
        let c = cal();
        let mut pop = SkyrmionPopulation::new(0, &c);
        pop.nucleate(n, Notch::for_calibration(&c));
        let before = pop.alive_count();
        pop.advance(&PulseTrain::forward(pulses, 200.0, 50.0).unwrap(), &c).unwrap();
        prop_assert!(pop.alive_count() <= before);
    }

    #[test]
    fn zone_count_grows_while_pulsing(per_pulse in 1u32..4, pulses in 1u32..30) {
        let c = cal();
        let zone = DetectionZone::starting_at(5.0, &c);
        let mut pop = SkyrmionPopulation::new(0, &c);
        let one = PulseTrain::forward(1, 150.0, 50.0).unwrap();
        let mut last = 0;
        for _ in 0..pulses {
            pop.nucleate(per_pulse, Notch::for_calibration(&c));
            pop.advance(&one, &c).unwrap();
            pop.apply_capacity(&zone);
            let now = pop.count_in_zone(&zone);
            prop_assert!(now >= last);
            last = now;
        }
    }

    #[test]
    fn drift_correction_is_idempotent(offset in -100.0f64..100.0, drift in -2.0f64..2.0, noise in prop::collection::vec(-10.0f64..10.0, 12)) {
        let mut t = MeasurementTrace::new(100.0);
        for (k, e) in noise.iter().enumerate() {
            let phase = if k < 6 { Phase::Baseline } else { Phase::Post };
            t.push(phase, offset + drift * k as f64 + e, 0);
        }
        let once = drift_correct(&t).unwrap();
        let twice = drift_correct(&once).unwrap();
        for (a, b) in once.samples.iter().zip(&twice.samples) {
            prop_assert!((a.delta_v - b.delta_v).abs() < 1e-9);
        }
    }

    #[test]
    fn expected_sum_is_bilinear(w in prop::collection::vec(0.0f64..3.0, 3), x in prop::collection::vec(0u32..50, 3), k in 1u32..5) {
        let c = cal();
        let shape = PulseTrain::forward(1, 150.0, 50.0).unwrap();
        let rows: Vec<Vec<f64>> = w.iter().map(|&v| vec![v]).collect();
        let base = CrossbarConfig::new(c.clone(), rows.clone(), ReadoutMode::LinearAhe).unwrap();
        let input = InputVector::from_counts(&x, shape);
        let y = expected_sum(&base, &input, 0).unwrap();
        let scaled: Vec<u32> = x.iter().map(|v| v * k).collect();
        let y_in = expected_sum(&base, &InputVector::from_counts(&scaled, shape), 0).unwrap();
        prop_assert!((y_in - f64::from(k) * y).abs() <= 1e-9 * y_in.abs().max(1.0));
        let half: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0] / 2.0]).collect();
        let y_w = expected_sum(&CrossbarConfig::new(c, half, ReadoutMode::LinearAhe).unwrap(), &input, 0).unwrap();
        prop_assert!((2.0 * y_w - y).abs() <= 1e-9 * y.abs().max(1.0));
    }

    #[test]
    fn quantization_error_bound(
        rows in 1usize..6,
        cols in 1usize..6,
        states in 2u32..40,
        seed in prop::collection::vec(-5.0f64..5.0, 36),
    ) {
        let data: Vec<Vec<f64>> = (0..rows).map(|i| seed[i * 6..i * 6 + cols].to_vec()).collect();
        let m = Matrix::from_rows(&data).unwrap();
        let q = quantize(&m, states).unwrap();
        let half = q.step() / 2.0;
        for i in 0..rows {
            for j in 0..cols {
                let level = q.quantized(i, j) / q.step();
                prop_assert!((level - level.round()).abs() < 1e-9);
                prop_assert!(level.abs() <= f64::from(states - 1) + 1e-9);
                prop_assert!((q.quantized(i, j) - m.get(i, j)).abs() <= half * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn expected_inference_is_matvec(
        data in prop::collection::vec(-2.0f64..2.0, 6),
        x in prop::collection::vec(0u32..30, 3),
    ) {
        let c = cal();
        let m = Matrix::from_rows(&[data[0..2].to_vec(), data[2..4].to_vec(), data[4..6].to_vec()]).unwrap();
        let q = quantize(&m, 15).unwrap();
        let y = infer(&q, &x, InferMode::Expected, &Activation::Identity, &c).unwrap();
        let xf: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
        let exact = q.quantized_matrix().transpose_mul(&xf);
        for (a, b) in y.iter().zip(&exact) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn precision_and_energy_tradeoff(m in 1u32..20, n in 1u32..200, p in 0.0f64..=1.0) {
        let prec = sum_precision(m, n, p).unwrap();
        prop_assert_eq!(prec, sum_precision(1, m * n, p).unwrap());
        for preset in EnergyPreset::ALL {
            let model = EnergyModel::from(preset);
            prop_assert_eq!(sum_energy(m, n, &model).unwrap(), f64::from(m) * f64::from(n) * preset.joules());
            let curve = pareto_curve(m, p, &model, 1..=n).unwrap();
            for w in curve.windows(2) {
                prop_assert!(w[1].energy > w[0].energy && w[1].precision >= w[0].precision);
            }
        }
    }
}

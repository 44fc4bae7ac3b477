mod common;

use plateau_lab::ansatz::ParameterVector as Params;
use plateau_lab::gradient::shifted_jacobian;
use plateau_lab::{
    cross_entropy, dense_softmax, finite_difference_jacobian, forward, loss_and_gradients,
    parameter_shift_jacobian, AnsatzSpec, Encoding, Entanglement, ModelParameters, StateVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn sample(rng: &mut ChaCha8Rng, enc: Encoding, n: usize) -> Vec<f64> {
    match enc {
        Encoding::Amplitude => (0..(1usize << n).min(64)).map(|_| rng.gen_range(0.0..16.0)).collect(),
        Encoding::Angle => (0..n).map(|_| rng.gen_range(0.0..PI)).collect(),
    }
}

fn scalar_loss(x: &[f64], label: usize, model: &ModelParameters, spec: &AnsatzSpec, enc: Encoding) -> f64 {
    let prep = enc.prepare(x, spec.width).unwrap();
    let e = forward(&prep, spec, &model.theta).unwrap();
    cross_entropy(&dense_softmax(&e, &model.dense).unwrap(), label).unwrap()
}

#[test]
fn parameter_shift_matches_finite_differences_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..24 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(1..=4);
        let ent = if case % 2 == 0 { Entanglement::Ring } else { Entanglement::Unentangled };
        let enc = if (case / 2) % 2 == 0 { Encoding::Amplitude } else { Encoding::Angle };
        let spec = AnsatzSpec::new(n, m, ent).unwrap();
        let theta: Params<f64> = spec.init_parameters(rng.gen());
        let prep = enc.prepare(&sample(&mut rng, enc, n), n).unwrap();
        let h = 1e-5;
        let ps = parameter_shift_jacobian(&prep, &spec, &theta).unwrap();
        let fd = finite_difference_jacobian(&prep, &spec, &theta, h).unwrap();
        let tol = f64::max(1e-6, 10.0 * h * h);
        for (a, b) in ps.entries().iter().zip(fd.entries()) {
            assert!((a - b).abs() <= tol, "case {case}: {a} vs {b}");
            assert!(a.abs() <= 1.0 + 1e-12);
        }
        let alt = shifted_jacobian(&prep, &spec, &theta, -1.5 * PI, 1.5 * PI).unwrap();
        for (a, b) in ps.entries().iter().zip(alt.entries()) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn full_loss_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let h = 1e-5;
    for case in 0..20 {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(1..=3);
        let ent = if case % 2 == 0 { Entanglement::Ring } else { Entanglement::Unentangled };
        let enc = if case % 3 == 0 { Encoding::Angle } else if n >= 3 { Encoding::Amplitude } else { Encoding::Angle };
        let spec = AnsatzSpec::new(n, m, ent).unwrap();
        let mut model = ModelParameters::init(&spec, rng.gen());
        for b in model.dense.biases.iter_mut() {
            *b = rng.gen_range(-0.5..0.5);
        }
        let x = sample(&mut rng, enc, n);
        let x = if enc == Encoding::Amplitude { x[..(1 << n)].to_vec() } else { x };
        let label = rng.gen_range(0..10);
        let (loss, g) = loss_and_gradients(&x, label, &model, &spec, enc).unwrap();
        assert!((loss - scalar_loss(&x, label, &model, &spec, enc)).abs() < 1e-14);

        let check = |analytic: f64, numeric: f64, what: &str| {
            let ok = (analytic - numeric).abs() <= 1e-7 || (analytic - numeric).abs() <= 1e-5 * numeric.abs();
            assert!(ok, "case {case} {what}: analytic {analytic} vs numeric {numeric}");
        };
        for j in 0..model.theta.len() {
            let mut p = model.clone();
            p.theta.as_mut_slice()[j] += h;
            let up = scalar_loss(&x, label, &p, &spec, enc);
            p.theta.as_mut_slice()[j] -= 2.0 * h;
            let down = scalar_loss(&x, label, &p, &spec, enc);
            check(g.d_theta[j], (up - down) / (2.0 * h), "theta");
        }
        for j in 0..model.dense.weights.len() {
            let mut p = model.clone();
            p.dense.weights[j] += h;
            let up = scalar_loss(&x, label, &p, &spec, enc);
            p.dense.weights[j] -= 2.0 * h;
            let down = scalar_loss(&x, label, &p, &spec, enc);
            check(g.d_weights[j], (up - down) / (2.0 * h), "weight");
        }
        for j in 0..10 {
            let mut p = model.clone();
            p.dense.biases[j] += h;
            let up = scalar_loss(&x, label, &p, &spec, enc);
            p.dense.biases[j] -= 2.0 * h;
            let down = scalar_loss(&x, label, &p, &spec, enc);
            check(g.d_biases[j], (up - down) / (2.0 * h), "bias");
        }
        assert!(g.d_biases.iter().sum::<f64>().abs() < 1e-12);
        assert!(loss >= 0.0);
    }
}

#[test]
fn single_precision_jacobian_tracks_double() {
    let spec = AnsatzSpec::new(3, 2, Entanglement::Ring).unwrap();
    let theta64: Params<f64> = spec.init_parameters(9);
    let theta32 = plateau_lab::ansatz::ParameterVector::<f32>::from_vec(
        theta64.as_slice().iter().map(|&t| t as f32).collect(),
    );
    let prep64 = StateVector::zero(3).unwrap();
    let prep32 = plateau_lab::simulator::StateVector::<f32>::zero(3).unwrap();
    let a = parameter_shift_jacobian(&prep64, &spec, &theta64).unwrap();
    let b = parameter_shift_jacobian(&prep32, &spec, &theta32).unwrap();
    for (x, y) in a.entries().iter().zip(b.entries()) {
        assert!((x - f64::from(*y)).abs() < 1e-5);
    }
}

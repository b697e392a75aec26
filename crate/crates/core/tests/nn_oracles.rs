mod common;

use proptest::prelude::*;
use sensorimotor_core::model::{train_step, ModelOptimizer};
use sensorimotor_core::nn::{mse_loss, Activation, AdamState, LinearDecay, Matrix, Mlp, NetworkCheckpoint};
use sensorimotor_core::rng::Rng;

use common::{gradient_check, random_matrix, small_instance};

#[test]
fn siamese_gradients_match_central_differences() {
    for seed in 0..20 {
        let (model, batch) = small_instance(seed);
        let err = gradient_check(&model, &batch, 1e-5, 1e-6);
        assert!(err < 1e-4, "instance {seed}: relative error {err:e}");
    }
}

/// Loss of a plain network against a fixed target, for finite differences.
fn mlp_loss(mlp: &Mlp, x: &Matrix, y: &Matrix) -> f64 {
    mse_loss(&mlp.infer(x).unwrap(), y).unwrap().0
}

fn random_mlp(seed: u64) -> (Mlp, Matrix, Matrix) {
    let mut rng = Rng::new(seed);
    let depth = 1 + rng.below(3);
    let sizes: Vec<usize> = (0..=depth).map(|_| 1 + rng.below(8)).collect();
    let act = [Activation::Selu, Activation::Linear][rng.below(2)];
    let mut mlp = Mlp::new(&sizes, act, &mut rng).unwrap();
    for l in mlp.layers_mut() {
        for b in &mut l.biases {
            *b = rng.uniform_in(-0.3, 0.3);
        }
    }
    let b = 1 + rng.below(5);
    let x = random_matrix(b, sizes[0], 1.0, &mut rng);
    let y = random_matrix(b, *sizes.last().unwrap(), 1.0, &mut rng);
    (mlp, x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mlp_gradients_match_central_differences(seed in 0u64..1_000_000) {
        let (mlp, x, y) = random_mlp(seed);
        let (out, cache) = mlp.forward(&x).unwrap();
        let (_, g) = mse_loss(&out, &y).unwrap();
        let (grads, _) = mlp.backward(&cache, &g).unwrap();
        let analytic: Vec<Vec<f64>> = grads.tensors().map(<[f64]>::to_vec).collect();
        let mut probe = mlp.clone();
        let h = 1e-5;
        for (ti, grad) in analytic.iter().enumerate() {
            for (k, &g) in grad.iter().enumerate() {
                probe.tensors_mut().nth(ti).unwrap()[k] += h;
                let plus = mlp_loss(&probe, &x, &y);
                probe.tensors_mut().nth(ti).unwrap()[k] -= 2.0 * h;
                let minus = mlp_loss(&probe, &x, &y);
                probe.tensors_mut().nth(ti).unwrap()[k] += h;
                let numeric = (plus - minus) / (2.0 * h);
                let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-6);
                prop_assert!(rel < 1e-4, "tensor {} entry {}: {} vs {}", ti, k, g, numeric);
            }
        }
    }

    #[test]
    fn input_gradient_matches_central_differences(seed in 0u64..1_000_000) {
        let (mlp, x, y) = random_mlp(seed);
        let (out, cache) = mlp.forward(&x).unwrap();
        let (_, g) = mse_loss(&out, &y).unwrap();
        let (_, dx) = mlp.backward(&cache, &g).unwrap();
        let h = 1e-5;
        for i in 0..x.as_slice().len() {
            let mut xp = x.clone();
            xp.as_mut_slice()[i] += h;
            let mut xm = x.clone();
            xm.as_mut_slice()[i] -= h;
            let numeric = (mlp_loss(&mlp, &xp, &y) - mlp_loss(&mlp, &xm, &y)) / (2.0 * h);
            let a = dx.as_slice()[i];
            prop_assert!((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6) < 1e-4);
        }
    }

    #[test]
    fn shapes_preserved_and_zero_grad_is_zero(seed in 0u64..1_000_000) {
        let (mlp, x, _) = random_mlp(seed);
        let (out, cache) = mlp.forward(&x).unwrap();
        prop_assert_eq!(out.rows(), x.rows());
        prop_assert!(out.is_finite());
        let (grads, dx) = mlp.backward(&cache, &Matrix::zeros(out.rows(), out.cols())).unwrap();
        prop_assert!(grads.is_zero());
        prop_assert_eq!(dx.rows(), x.rows());
        prop_assert!(dx.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn selu_is_monotone(a in -20.0f64..20.0, b in -20.0f64..20.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(Activation::Selu.apply(lo) <= Activation::Selu.apply(hi));
    }

    #[test]
    fn schedule_is_linear_then_flat(epoch in 0u64..3_000_000) {
        let s = LinearDecay::default();
        let lr = s.lr(epoch);
        let expected = if epoch >= 1_000_000 { 1e-5 } else { 1e-3 + (1e-5 - 1e-3) * epoch as f64 / 1e6 };
        prop_assert!((lr - expected).abs() < 1e-18);
    }
}

#[test]
fn selu_continuous_at_zero() {
    let s = Activation::Selu;
    assert_eq!(s.apply(0.0), 0.0);
    assert!(s.apply(-1e-12).abs() < 1e-11 && s.apply(1e-12).abs() < 1e-11);
    // sampled grid, strictly increasing
    let grid: Vec<f64> = (-400..=400).map(|k| k as f64 * 0.01).collect();
    assert!(grid.windows(2).all(|w| s.apply(w[0]) < s.apply(w[1])));
}

#[test]
fn mse_examples() {
    let (l, g) = mse_loss(&Matrix::from_rows(&[[1.0, 0.0]]).unwrap(), &Matrix::zeros(1, 2)).unwrap();
    assert_eq!(l, 1.0);
    assert_eq!(g.as_slice(), &[2.0, 0.0]);
    let (l, _) = mse_loss(&Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(), &Matrix::zeros(2, 2)).unwrap();
    assert_eq!(l, 1.0);
    assert!(mse_loss(&Matrix::zeros(1, 2), &Matrix::zeros(2, 1)).is_err());
}

#[test]
fn adam_first_step_hand_value() {
    let mut st = AdamState::new([1]);
    let mut p = vec![0.0];
    st.step([p.as_mut_slice()], [[1.0].as_slice()], 1e-3).unwrap();
    // m̂ = v̂ = 1, so θ = −lr/(1 + ε)
    assert!((p[0] - (-1e-3 / (1.0 + 1e-8))).abs() < 1e-18);
    let mut zero = vec![0.5];
    st.step([zero.as_mut_slice()], [[0.0].as_slice()], 1e-3).unwrap();
    assert_eq!(st.step_count, 2);
}

#[test]
fn adam_zero_gradient_leaves_parameters() {
    let mut st = AdamState::new([3]);
    let mut p = vec![0.1, -0.2, 0.3];
    st.step([p.as_mut_slice()], [[0.0, 0.0, 0.0].as_slice()], 1e-3).unwrap();
    assert_eq!(p, vec![0.1, -0.2, 0.3]);
    assert_eq!(st.step_count, 1);
    assert!(st.step([p.as_mut_slice()], [[0.0].as_slice()], 1e-3).is_err());
    assert!(st.step([p.as_mut_slice()], [[0.0, 0.0, 0.0].as_slice()], 0.0).is_err());
}

#[test]
fn training_is_bit_reproducible() {
    let run = || {
        let (mut model, batch) = small_instance(7);
        let mut opt = ModelOptimizer::new(&model);
        for _ in 0..50 {
            train_step(&mut model, &batch, &mut opt, 1e-3).unwrap();
        }
        (model, opt)
    };
    assert_eq!(run(), run());
}

#[test]
fn zero_error_batch_gives_zero_loss_and_gradients() {
    let (model, mut batch) = small_instance(3);
    batch.s_next = model.predict(&batch.m_t, &batch.s_t, &batch.m_next).unwrap();
    let (loss, grads) = model.loss_and_grads(&batch).unwrap();
    assert_eq!(loss, 0.0);
    assert!(grads.encoder.is_zero() && grads.predictor.is_zero());
}

#[test]
fn checkpoint_roundtrip_through_file() {
    let mut rng = Rng::new(5);
    let mlp = Mlp::new(&[3, 7, 2], Activation::Selu, &mut rng).unwrap();
    let mut adam = AdamState::new(mlp.tensors().map(<[f64]>::len));
    let mut trained = mlp.clone();
    let grads: Vec<Vec<f64>> = mlp.tensors().map(|t| t.iter().map(|v| v.sin()).collect()).collect();
    adam.step(trained.tensors_mut(), grads.iter().map(Vec::as_slice), 1e-3).unwrap();
    rng.uniform();
    let ck = NetworkCheckpoint::capture(&trained, Some(&adam), 1, Some(&rng));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    ck.save(&path).unwrap();
    let back = NetworkCheckpoint::load(&path).unwrap();
    assert_eq!(back, ck);
    assert_eq!(back.to_mlp().unwrap(), trained);
    let mut r1 = rng.clone();
    let mut r2 = back.rng.unwrap();
    assert_eq!(r1.next_u64(), r2.next_u64());
}

#[test]
fn checkpoint_version_checked() {
    let mlp = Mlp::new(&[2, 2], Activation::Linear, &mut Rng::new(0)).unwrap();
    let mut ck = NetworkCheckpoint::capture(&mlp, None, 0, None);
    ck.version = 99;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    ck.save(&path).unwrap();
    assert!(matches!(
        NetworkCheckpoint::load(&path),
        Err(sensorimotor_core::Error::Version { found: 99, .. })
    ));
}

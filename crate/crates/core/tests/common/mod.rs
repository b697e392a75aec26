//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use std::f64::consts::{PI, TAU};

use sensorimotor_core::env::arm::WALL_COLOR;
use sensorimotor_core::env::{ArmRoom, SceneObject, ShapeKind};
use sensorimotor_core::exploration::Batch;
use sensorimotor_core::model::PredictiveModel;
use sensorimotor_core::nn::{Activation, Matrix};
use sensorimotor_core::rng::Rng;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut Rng) -> Matrix {
    let v = (0..rows * cols).map(|_| rng.uniform_in(-scale, scale)).collect();
    Matrix::from_vec(rows, cols, v).unwrap()
}

pub fn random_batch(model: &PredictiveModel, b: usize, rng: &mut Rng) -> Batch {
    Batch {
        m_t: random_matrix(b, model.motor_dim(), 0.8, rng),
        s_t: random_matrix(b, model.sensory_dim(), 0.8, rng),
        m_next: random_matrix(b, model.motor_dim(), 0.8, rng),
        s_next: random_matrix(b, model.sensory_dim(), 0.8, rng),
    }
}

/// Composite loss computed with two separate encoder calls, as a plain
/// function of the parameters.
pub fn composite_loss(model: &PredictiveModel, batch: &Batch) -> f64 {
    let h_t = model.encode(&batch.m_t).unwrap();
    let h_n = model.encode(&batch.m_next).unwrap();
    let input = Matrix::hstack(&[&h_t, &h_n, &batch.s_t]).unwrap();
    let pred = model.predictor.infer(&input).unwrap();
    let mut total = 0.0;
    for r in 0..pred.rows() {
        for c in 0..pred.cols() {
            total += (pred[(r, c)] - batch.s_next[(r, c)]).powi(2);
        }
    }
    total / pred.rows() as f64
}

/// Worst relative error between analytic gradients and central differences
/// over every parameter of the model. Gradients smaller than `floor` are
/// compared in absolute terms.
pub fn gradient_check(model: &PredictiveModel, batch: &Batch, h: f64, floor: f64) -> f64 {
    let (_, grads) = model.loss_and_grads(batch).unwrap();
    let analytic: Vec<Vec<f64>> = grads
        .encoder
        .tensors()
        .chain(grads.predictor.tensors())
        .map(<[f64]>::to_vec)
        .collect();
    let mut probe = model.clone();
    let enc_tensors = model.encoder.tensors().count();
    let mut worst = 0.0f64;
    for (ti, grad) in analytic.iter().enumerate() {
        for k in 0..grad.len() {
            let nudge = |m: &mut PredictiveModel, delta: f64| {
                let t = if ti < enc_tensors {
                    m.encoder.tensors_mut().nth(ti).unwrap()
                } else {
                    m.predictor.tensors_mut().nth(ti - enc_tensors).unwrap()
                };
                t[k] += delta;
            };
            nudge(&mut probe, h);
            let plus = composite_loss(&probe, batch);
            nudge(&mut probe, -2.0 * h);
            let minus = composite_loss(&probe, batch);
            nudge(&mut probe, h);
            let numeric = (plus - minus) / (2.0 * h);
            let a = grad[k];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            worst = worst.max(err);
        }
    }
    worst
}

/// Small siamese model with random hidden widths and a random batch.
pub fn small_instance(seed: u64) -> (PredictiveModel, Batch) {
    let mut rng = Rng::new(seed);
    let enc_hidden = 1 + rng.below(8);
    let pred_hidden = 1 + rng.below(8);
    let dim_h = 1 + rng.below(2);
    let n_s = 1 + rng.below(2);
    let mut model =
        PredictiveModel::with_hidden(3, n_s, dim_h, &[enc_hidden], &[pred_hidden], Activation::Selu, &mut rng).unwrap();
    // non-zero biases so every code path is exercised
    for layer in model.encoder.layers_mut().iter_mut().chain(model.predictor.layers_mut()) {
        for b in &mut layer.biases {
            *b = rng.uniform_in(-0.5, 0.5);
        }
    }
    let b = 2 + rng.below(6);
    let batch = random_batch(&model, b, &mut rng);
    (model, batch)
}

/// Q_p and Q_h through an explicit pseudo-inverse and a double loop.
pub fn brute_force_q(h: &Matrix, p: &Matrix) -> (f64, f64) {
    fn project(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
        let n = x.nrows();
        let mut aug = DMatrix::from_element(n, x.ncols() + 1, 1.0);
        aug.view_mut((0, 0), (n, x.ncols())).copy_from(x);
        let pinv = aug.clone().pseudo_inverse(1e-12).unwrap();
        &aug * (pinv * y)
    }
    fn dist(m: &DMatrix<f64>, i: usize, j: usize) -> f64 {
        (m.row(i) - m.row(j)).norm()
    }
    fn q(projected: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
        let n = reference.nrows();
        let mut max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                max = max.max(dist(reference, i, j));
            }
        }
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                sum += (dist(projected, i, j) - dist(reference, i, j)).abs();
            }
        }
        sum / (n * n) as f64 / max
    }
    let (h, p) = (to_na(h), to_na(p));
    (q(&project(&h, &p), &p), q(&project(&p, &h), &h))
}

/// Distance along `origin + t·dir` to a circle, by projecting the centre onto the ray.
pub fn oracle_ray_circle(origin: [f64; 2], dir: [f64; 2], center: [f64; 2], r: f64) -> Option<f64> {
    let oc = [center[0] - origin[0], center[1] - origin[1]];
    let along = oc[0] * dir[0] + oc[1] * dir[1];
    let perp2 = (oc[0] * oc[0] + oc[1] * oc[1]) - along * along;
    if perp2 > r * r {
        return None;
    }
    let half = (r * r - perp2).sqrt();
    [along - half, along + half].into_iter().find(|&t| t >= 0.0)
}

/// Distance to a segment, solving the 2×2 system with nalgebra.
pub fn oracle_ray_segment(origin: [f64; 2], dir: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<f64> {
    let m = nalgebra::Matrix2::new(dir[0], a[0] - b[0], dir[1], a[1] - b[1]);
    let rhs = nalgebra::Vector2::new(a[0] - origin[0], a[1] - origin[1]);
    let sol = m.lu().solve(&rhs)?;
    let (t, u) = (sol[0], sol[1]);
    (t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u)).then_some(t)
}

/// Tip of the arm from a product of rotations applied to the segment vectors.
pub fn oracle_kinematics(m: [f64; 3]) -> [f64; 2] {
    use nalgebra::{Rotation2, Vector2};
    let mut rot = Rotation2::identity();
    let mut tip = Vector2::zeros();
    for a in m {
        rot *= Rotation2::new(a);
        tip += rot * Vector2::new(1.0, 0.0);
    }
    [tip[0], tip[1]]
}

/// Vertices built directly from the shape definition.
pub fn oracle_vertices(o: &SceneObject) -> Vec<[f64; 2]> {
    let (n, r, phase) = match o.kind {
        ShapeKind::Circle => return Vec::new(),
        ShapeKind::Square => (4, o.size * 2f64.sqrt(), PI / 4.0),
        ShapeKind::Triangle => (3, o.size, 0.0),
    };
    (0..n)
        .map(|k| {
            let a = o.orientation + phase + TAU * k as f64 / n as f64;
            [o.center[0] + r * a.cos(), o.center[1] + r * a.sin()]
        })
        .collect()
}

/// Nearest hit among walls and objects.
pub fn oracle_raycast(room: &ArmRoom, origin: [f64; 2], dir: [f64; 2]) -> (f64, [f64; 3]) {
    let w = room.room_width;
    let mut best = (f64::INFINITY, WALL_COLOR);
    // walls: axis-aligned, solved per coordinate
    for (axis, bound) in [(0, 0.0), (0, w), (1, 0.0), (1, w)] {
        if dir[axis] != 0.0 {
            let t = (bound - origin[axis]) / dir[axis];
            if t >= 0.0 && t < best.0 {
                best = (t, WALL_COLOR);
            }
        }
    }
    for o in &room.objects {
        let t = match o.kind {
            ShapeKind::Circle => oracle_ray_circle(origin, dir, o.center, o.size),
            _ => {
                let v = oracle_vertices(o);
                (0..v.len())
                    .filter_map(|i| oracle_ray_segment(origin, dir, v[i], v[(i + 1) % v.len()]))
                    .min_by(f64::total_cmp)
            }
        };
        if let Some(t) = t {
            if t < best.0 {
                best = (t, o.color);
            }
        }
    }
    best
}

/// Random invertible map: a well-conditioned perturbation of a scaled identity.
pub fn invertible(dim: usize, rng: &mut Rng) -> Matrix {
    let mut a = random_matrix(dim, dim, 0.5, rng);
    for i in 0..dim {
        a[(i, i)] += 1.5 * if rng.below(2) == 0 { 1.0 } else { -1.0 };
    }
    a
}

pub fn affine_image(x: &Matrix, a: &Matrix, b: &[f64]) -> Matrix {
    let mut y = x.matmul(a).unwrap();
    for r in 0..y.rows() {
        for (v, o) in y.row_mut(r).iter_mut().zip(b) {
            *v += o;
        }
    }
    y
}

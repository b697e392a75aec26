//! Comparing a learned representation with ground-truth sensor positions.
//!
//! A representation `h` can only be expected to match the position `p` up to
//! an affine transformation, so each cloud is first projected into the other's
//! space by least-squares affine regression. The dissimilarities then compare
//! pairwise distances:
//!
//! ```text
//! Q_p = 1/N² Σᵢⱼ |D(H→P)ᵢⱼ − D(P)ᵢⱼ| / max D(P)
//! Q_h = 1/N² Σᵢⱼ |D(P→H)ᵢⱼ − D(H)ᵢⱼ| / max D(H)
//! ```

pub mod lstsq;

use serde::{Deserialize, Serialize};

use crate::env::{MotorGrid, MotorState};
use crate::error::{Error, Result};
use crate::exploration::Normalization;
use crate::model::PredictiveModel;
use crate::nn::Matrix;

/// Points as rows, with optional group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Matrix,
    pub labels: Option<Vec<usize>>,
}

impl PointSet {
    pub fn new(points: Matrix) -> Self {
        Self { points, labels: None }
    }

    pub fn with_labels(points: Matrix, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != points.rows() {
            return Err(Error::Shape(format!("{} labels for {} points", labels.len(), points.rows())));
        }
        Ok(Self { points, labels: Some(labels) })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }
}

/// `y = x·linear + offset` for row vectors `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    /// `dim_in × dim_out`
    pub linear: Matrix,
    pub offset: Vec<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        let mut y = x.matmul(&self.linear)?;
        for i in 0..y.rows() {
            for (v, o) in y.row_mut(i).iter_mut().zip(&self.offset) {
                *v += o;
            }
        }
        Ok(y)
    }
}

/// Least-squares affine map from `x` to `y` (minimum-norm when rank deficient).
pub fn affine_fit(x: &Matrix, y: &Matrix) -> Result<AffineMap> {
    if x.rows() != y.rows() {
        return Err(Error::Shape(format!("{} source points but {} targets", x.rows(), y.rows())));
    }
    if x.rows() < x.cols() + 1 {
        return Err(Error::Underdetermined { points: x.rows(), dim: x.cols() });
    }
    let ones = Matrix::from_vec(x.rows(), 1, vec![1.0; x.rows()])?;
    let design = Matrix::hstack(&[x, &ones])?;
    let (coef, _) = lstsq::solve_min_norm(&design, y);
    let dx = x.cols();
    Ok(AffineMap { linear: coef.slice_rows(0, dx), offset: coef.row(dx).to_vec() })
}

/// Euclidean distance matrix between rows.
pub fn pairwise_distances(points: &Matrix) -> Matrix {
    let n = points.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let dist = points
                .row(i)
                .iter()
                .zip(points.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d[(i, j)] = dist;
            d[(j, i)] = dist;
        }
    }
    d
}

fn max_entry(d: &Matrix) -> f64 {
    d.as_slice().iter().copied().fold(0.0, f64::max)
}

/// Mean absolute discrepancy between two distance matrices, relative to the
/// largest reference distance. The diagonal is included (it contributes zero).
fn distance_discrepancy(projected: &Matrix, reference: &Matrix) -> Result<f64> {
    let scale = max_entry(reference);
    if scale == 0.0 {
        return Err(Error::DegenerateCloud);
    }
    let n = reference.rows() as f64;
    let sum: f64 = projected
        .as_slice()
        .iter()
        .zip(reference.as_slice())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / (n * n) / scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityReport {
    pub q_p: f64,
    pub q_h: f64,
    pub map_h_to_p: AffineMap,
    pub map_p_to_h: AffineMap,
    /// `H` projected into the position space.
    pub h_proj_p: Matrix,
    /// `P` projected into the representation space.
    pub p_proj_h: Matrix,
}

pub fn dissimilarity(h: &Matrix, p: &Matrix) -> Result<DissimilarityReport> {
    if h.rows() != p.rows() {
        return Err(Error::Shape(format!("{} representations but {} positions", h.rows(), p.rows())));
    }
    let map_h_to_p = affine_fit(h, p)?;
    let map_p_to_h = affine_fit(p, h)?;
    let h_proj_p = map_h_to_p.apply(h)?;
    let p_proj_h = map_p_to_h.apply(p)?;
    let d_p = pairwise_distances(p);
    let d_h = pairwise_distances(h);
    let q_p = distance_discrepancy(&pairwise_distances(&h_proj_p), &d_p)?;
    let q_h = distance_discrepancy(&pairwise_distances(&p_proj_h), &d_h)?;
    Ok(DissimilarityReport { q_p, q_h, map_h_to_p, map_p_to_h, h_proj_p, p_proj_h })
}

/// Mean over redundancy groups (points sharing a label, at least two members)
/// of the group diameter, relative to the diameter of the whole cloud.
pub fn collapse_ratio(h: &Matrix, labels: &[usize]) -> Result<f64> {
    if labels.len() != h.rows() {
        return Err(Error::Shape(format!("{} labels for {} points", labels.len(), h.rows())));
    }
    let d = pairwise_distances(h);
    let overall = max_entry(&d);
    let groups = labels.iter().max().map_or(0, |&l| l + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); groups];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let diameters: Vec<f64> = members
        .iter()
        .filter(|g| g.len() > 1)
        .map(|g| {
            let mut best = 0.0f64;
            for (a, &i) in g.iter().enumerate() {
                for &j in &g[a + 1..] {
                    best = best.max(d[(i, j)]);
                }
            }
            best
        })
        .collect();
    if diameters.is_empty() {
        return Err(Error::NotApplicable("every redundancy group has a single member".into()));
    }
    if overall == 0.0 {
        return Err(Error::DegenerateCloud);
    }
    Ok(diameters.iter().sum::<f64>() / diameters.len() as f64 / overall)
}

/// The regular motor sampling prepared for evaluation: motors normalized with
/// the training normalization, positions in the egocentric frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub raw_motors: Vec<MotorState>,
    pub motors: Matrix,
    pub positions: Matrix,
    pub labels: Vec<usize>,
    pub norm: Normalization,
}

impl EvalGrid {
    pub fn new(grid: &MotorGrid, norm: &Normalization) -> Result<Self> {
        let motors: Vec<Vec<f64>> = grid.motors.iter().map(|m| norm.apply_motor(m)).collect();
        Ok(Self {
            raw_motors: grid.motors.clone(),
            motors: Matrix::from_rows(&motors)?,
            positions: Matrix::from_rows(&grid.positions)?,
            labels: grid.labels.clone(),
            norm: norm.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.raw_motors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw_motors.is_empty()
    }
}

/// Point clouds behind the projection figures, plus both affine maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudExport {
    pub q_p: f64,
    pub q_h: f64,
    /// Normalized motor sampling.
    pub m: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub h_proj_p: Vec<Vec<f64>>,
    pub p_proj_h: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub map_h_to_p: AffineMap,
    pub map_p_to_h: AffineMap,
    pub norm: Normalization,
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: DissimilarityReport,
    pub h: Matrix,
}

impl Evaluation {
    pub fn clouds(&self, grid: &EvalGrid) -> CloudExport {
        CloudExport {
            q_p: self.report.q_p,
            q_h: self.report.q_h,
            m: rows_of(&grid.motors),
            h: rows_of(&self.h),
            p: rows_of(&grid.positions),
            h_proj_p: rows_of(&self.report.h_proj_p),
            p_proj_h: rows_of(&self.report.p_proj_h),
            labels: grid.labels.clone(),
            map_h_to_p: self.report.map_h_to_p.clone(),
            map_p_to_h: self.report.map_p_to_h.clone(),
            norm: grid.norm.clone(),
        }
    }
}

/// Encodes the regular motor sampling and compares it with the ground truth.
pub fn evaluate(model: &PredictiveModel, grid: &EvalGrid) -> Result<Evaluation> {
    let h = model.encode(&grid.motors)?;
    let report = dissimilarity(&h, &grid.positions)?;
    Ok(Evaluation { report, h })
}

/// Collapse ratio of the model's encoding of the regular sampling.
pub fn redundancy_collapse(model: &PredictiveModel, grid: &EvalGrid) -> Result<f64> {
    collapse_ratio(&model.encode(&grid.motors)?, &grid.labels)
}

//! Least squares through a complete orthogonal decomposition.
//!
//! `A·P = Q·[R11 R12; 0 0]` comes from Householder QR with column pivoting.
//! When `A` has full column rank the solution is read off by back
//! substitution; otherwise `[R11 R12]ᵀ` is factored once more so that the
//! minimum-norm solution can be recovered.

use crate::nn::Matrix;

/// Householder reflector `I − 2·u·uᵀ/(uᵀu)` acting on rows `start..`.
struct Reflector {
    start: usize,
    u: Vec<f64>,
    uu: f64,
}

impl Reflector {
    /// Reflector mapping `x` onto a multiple of the first unit vector.
    /// Returns the reflector (if `x` is non-zero) and the resulting leading value.
    fn new(start: usize, x: &[f64]) -> (Option<Self>, f64) {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (None, 0.0);
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut u = x.to_vec();
        u[0] -= alpha;
        let uu: f64 = u.iter().map(|v| v * v).sum();
        if uu == 0.0 {
            return (None, x[0]);
        }
        (Some(Self { start, u, uu }), alpha)
    }

    /// Applies the reflector to column `col` of `m`.
    fn apply_col(&self, m: &mut Matrix, col: usize) {
        let dot: f64 = self.u.iter().enumerate().map(|(i, u)| u * m[(self.start + i, col)]).sum();
        let f = 2.0 * dot / self.uu;
        for (i, u) in self.u.iter().enumerate() {
            m[(self.start + i, col)] -= f * u;
        }
    }

    fn apply_vec(&self, v: &mut [f64]) {
        let dot: f64 = self.u.iter().enumerate().map(|(i, u)| u * v[self.start + i]).sum();
        let f = 2.0 * dot / self.uu;
        for (i, u) in self.u.iter().enumerate() {
            v[self.start + i] -= f * u;
        }
    }
}

/// Minimum-norm solution `X` of `min ‖A·X − B‖_F`, plus the numerical rank of `A`.
pub fn solve_min_norm(a: &Matrix, b: &Matrix) -> (Matrix, usize) {
    assert_eq!(a.rows(), b.rows(), "A and B must have equally many rows");
    let (n, k) = (a.rows(), a.cols());
    let d = b.cols();
    let mut r = a.clone();
    let mut c = b.clone();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut col_norms: Vec<f64> = (0..k).map(|j| (0..n).map(|i| r[(i, j)].powi(2)).sum()).collect();

    let steps = n.min(k);
    for j in 0..steps {
        // pivot: largest remaining column norm (recomputed, cheap at these sizes)
        for (jj, cn) in col_norms.iter_mut().enumerate().skip(j) {
            *cn = (j..n).map(|i| r[(i, jj)].powi(2)).sum();
        }
        let p = (j..k).max_by(|&x, &y| col_norms[x].total_cmp(&col_norms[y])).unwrap();
        if p != j {
            for i in 0..n {
                let tmp = r[(i, j)];
                r[(i, j)] = r[(i, p)];
                r[(i, p)] = tmp;
            }
            perm.swap(j, p);
            col_norms.swap(j, p);
        }
        let x: Vec<f64> = (j..n).map(|i| r[(i, j)]).collect();
        let (refl, lead) = Reflector::new(j, &x);
        if let Some(h) = refl {
            for col in j + 1..k {
                h.apply_col(&mut r, col);
            }
            for col in 0..d {
                h.apply_col(&mut c, col);
            }
        }
        r[(j, j)] = lead;
        for i in j + 1..n {
            r[(i, j)] = 0.0;
        }
    }

    let r00 = if steps > 0 { r[(0, 0)].abs() } else { 0.0 };
    let tol = (n.max(k) as f64) * f64::EPSILON * r00;
    let rank = (0..steps).take_while(|&j| r[(j, j)].abs() > tol).count();

    let mut y = Matrix::zeros(k, d);
    if rank == 0 {
        return (y, 0);
    }

    if rank == k {
        for col in 0..d {
            for i in (0..k).rev() {
                let mut s = c[(i, col)];
                for jj in i + 1..k {
                    s -= r[(i, jj)] * y[(jj, col)];
                }
                y[(i, col)] = s / r[(i, i)];
            }
        }
    } else {
        // Factor Mᵀ = Z·[T; 0] with M = [R11 R12] (rank × k).
        let mut mt = Matrix::zeros(k, rank);
        for i in 0..rank {
            for j in 0..k {
                mt[(j, i)] = r[(i, j)];
            }
        }
        let mut reflectors = Vec::with_capacity(rank);
        for j in 0..rank {
            let x: Vec<f64> = (j..k).map(|i| mt[(i, j)]).collect();
            let (refl, lead) = Reflector::new(j, &x);
            if let Some(h) = &refl {
                for col in j + 1..rank {
                    h.apply_col(&mut mt, col);
                }
            }
            mt[(j, j)] = lead;
            for i in j + 1..k {
                mt[(i, j)] = 0.0;
            }
            reflectors.push(refl);
        }
        // M·y = c₁ with M = [Tᵀ 0]·Zᵀ: solve Tᵀ·w = c₁, then y = Z·[w; 0].
        for col in 0..d {
            let mut w = vec![0.0; k];
            for i in 0..rank {
                let mut s = c[(i, col)];
                for (jj, wj) in w.iter().enumerate().take(i) {
                    s -= mt[(jj, i)] * wj;
                }
                w[i] = s / mt[(i, i)];
            }
            for h in reflectors.iter().rev().flatten() {
                h.apply_vec(&mut w);
            }
            for (i, v) in w.into_iter().enumerate() {
                y[(i, col)] = v;
            }
        }
    }

    let mut x = Matrix::zeros(k, d);
    for (i, &pi) in perm.iter().enumerate() {
        x.row_mut(pi).copy_from_slice(y.row(i));
    }
    (x, rank)
}

//! Ordinary least squares with an intercept.

use serde::{Deserialize, Serialize};

use super::{check_matrix, ModelError};
use crate::stats;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub training_rms: f64,
    /// Numerical rank of the standardized design matrix.
    pub rank: usize,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.coefficients.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.coefficients.len(),
                actual: x.len(),
            });
        }
        Ok(self.intercept + x.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.coefficients.len()
    }
}

/// Fits `y ≈ b0 + X b` by singular value decomposition of the centered,
/// unit-scaled design. Collinear or constant columns get the minimum-norm
/// solution and a logged warning.
pub fn fit_ols(x: &[Vec<f64>], y: &[f64]) -> Result<LinearModel, ModelError> {
    let p = check_matrix(x, y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    let n = x.len();
    let y_mean = stats::mean(y);
    let mut means = vec![0.0; p];
    let mut scales = vec![0.0; p];
    for j in 0..p {
        let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
        means[j] = stats::mean(&col);
        let sd = stats::sample_stdev(&col);
        scales[j] = if sd > 0.0 { sd } else { 0.0 };
    }

    let z: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            x.iter()
                .map(|r| if scales[j] > 0.0 { (r[j] - means[j]) / scales[j] } else { 0.0 })
                .collect()
        })
        .collect();
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let (beta_scaled, rank) = min_norm_solve(z, &yc);
    if rank < p {
        log::info!("design matrix has rank {rank} < {p} columns; using minimum-norm solution");
    }

    let coefficients: Vec<f64> = beta_scaled
        .iter()
        .zip(&scales)
        .map(|(b, s)| if *s > 0.0 { b / s } else { 0.0 })
        .collect();
    let intercept = y_mean - coefficients.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    let mut model = LinearModel {
        intercept,
        coefficients,
        training_rms: 0.0,
        rank,
    };
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(row, t)| (model.predict(row).expect("dimension checked") - t).powi(2))
        .sum();
    model.training_rms = (sse / n as f64).sqrt();
    Ok(model)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum-norm least-squares solution of `Z b = y` for column-major `Z`,
/// via one-sided Jacobi SVD. Returns the solution and the numerical rank.
fn min_norm_solve(mut cols: Vec<Vec<f64>>, y: &[f64]) -> (Vec<f64>, usize) {
    let p = cols.len();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..p).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for j in 0..p {
            for k in j + 1..p {
                let alpha = dot(&cols[j], &cols[j]);
                let beta = dot(&cols[k], &cols[k]);
                let gamma = dot(&cols[j], &cols[k]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut cols, &mut v] {
                    let (left, right) = m.split_at_mut(k);
                    for (a, b) in left[j].iter_mut().zip(right[0].iter_mut()) {
                        let (x, w) = (*a, *b);
                        *a = c * x - s * w;
                        *b = s * x + c * w;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigmas: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let smax = sigmas.iter().copied().fold(0.0, f64::max);
    let tol = smax * RANK_TOLERANCE;
    let mut beta = vec![0.0; p];
    let mut rank = 0;
    for (j, &sigma) in sigmas.iter().enumerate() {
        if smax > 0.0 && sigma > tol {
            rank += 1;
            let coef = dot(&cols[j], y) / (sigma * sigma);
            for (b, vj) in beta.iter_mut().zip(&v[j]) {
                *b += vj * coef;
            }
        }
    }
    (beta, rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Solves the normal equations `[1 X]ᵀ[1 X] b = [1 X]ᵀ y` by Gaussian
    /// elimination with partial pivoting.
    fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let p = x[0].len() + 1;
        let row = |r: &Vec<f64>| std::iter::once(1.0).chain(r.iter().copied()).collect::<Vec<_>>();
        let mut a = vec![vec![0.0; p + 1]; p];
        for (r, &t) in x.iter().zip(y) {
            let xr = row(r);
            for i in 0..p {
                for j in 0..p {
                    a[i][j] += xr[i] * xr[j];
                }
                a[i][p] += xr[i] * t;
            }
        }
        for c in 0..p {
            let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, piv);
            for r in 0..p {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=p {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        (0..p).map(|i| a[i][p] / a[i][i]).collect()
    }

    fn random_system(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let y = x
            .iter()
            .map(|r| 0.5 + r.iter().enumerate().map(|(j, v)| (j as f64 - 2.0) * v).sum::<f64>() + rng.random_range(-1.0..1.0))
            .collect();
        (x, y)
    }

    #[test]
    fn noiseless_line() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let m = fit_ols(&x, &y).unwrap();
        assert!((m.intercept - 1.0).abs() < 1e-9);
        assert!((m.coefficients[0] - 2.0).abs() < 1e-9);
        assert!(m.training_rms < 1e-9);
        assert!((m.predict(&[4.0]).unwrap() - 9.0).abs() < 1e-9);
    }

    #[test]
    fn constant_target_has_zero_slopes() {
        let (x, _) = random_system(1, 20, 3);
        let m = fit_ols(&x, &[4.0; 20]).unwrap();
        assert!(m.coefficients.iter().all(|c| c.abs() < 1e-12));
        assert!((m.intercept - 4.0).abs() < 1e-12);
    }

    #[test]
    fn prediction_arithmetic() {
        let m = LinearModel {
            intercept: 1.0,
            coefficients: vec![2.0],
            training_rms: 0.0,
            rank: 1,
        };
        assert_eq!(m.predict(&[3.0]), Ok(7.0));
        assert_eq!(m.predict(&[0.0]), Ok(1.0));
        assert!(m.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let (x, y) = random_system(42, 50, 5);
        let m = fit_ols(&x, &y).unwrap();
        let oracle = normal_equations(&x, &y);
        assert!((m.intercept - oracle[0]).abs() < 1e-8);
        for (c, o) in m.coefficients.iter().zip(&oracle[1..]) {
            assert!((c - o).abs() < 1e-8, "{c} vs {o}");
        }
    }

    #[test]
    fn errors() {
        assert_eq!(fit_ols(&[], &[]), Err(ModelError::EmptyData));
        assert!(matches!(fit_ols(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 2.0]), Err(ModelError::DimensionMismatch { .. })));
        assert!(matches!(fit_ols(&[vec![1.0]], &[1.0, 2.0]), Err(ModelError::LengthMismatch { .. })));
    }

    #[test]
    fn constant_column_is_rank_deficient() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 3.0]).collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let m = fit_ols(&x, &y).unwrap();
        assert!(m.is_rank_deficient());
        assert_eq!(m.coefficients[1], 0.0);
        assert!(m.training_rms < 1e-9);
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_columns(seed in 0u64..1000, n in 8usize..40, p in 1usize..5) {
            let (x, y) = random_system(seed, n, p);
            let m = fit_ols(&x, &y).unwrap();
            let resid: Vec<f64> = x.iter().zip(&y).map(|(r, t)| t - m.predict(r).unwrap()).collect();
            for j in 0..p {
                let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
                let sd = stats::sample_stdev(&col);
                let dot: f64 = col.iter().zip(&resid).map(|(a, e)| a / sd * e).sum();
                prop_assert!(dot.abs() < 1e-8, "column {j}: {dot}");
            }
            prop_assert!(resid.iter().sum::<f64>().abs() < 1e-8);
        }

        #[test]
        fn duplicated_column_keeps_predictions(seed in 0u64..1000, n in 10usize..40, p in 1usize..4, dup in 0usize..4) {
            let (x, y) = random_system(seed, n, p);
            let dup = dup % p;
            let x2: Vec<Vec<f64>> = x.iter().map(|r| { let mut r = r.clone(); r.push(r[dup]); r }).collect();
            let m1 = fit_ols(&x, &y).unwrap();
            let m2 = fit_ols(&x2, &y).unwrap();
            prop_assert!(m2.is_rank_deficient());
            for (r1, r2) in x.iter().zip(&x2) {
                prop_assert!((m1.predict(r1).unwrap() - m2.predict(r2).unwrap()).abs() < 1e-8);
            }
        }
    }
}

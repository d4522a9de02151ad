//! Least-squares helpers: Levenberg–Marquardt and linear regression, both
//! returning the parameter covariance σ²(JᵀJ)⁻¹ at the optimum.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct LsqFit {
    pub params: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// Root-mean-square residual.
    pub rms: f64,
    pub iterations: usize,
}

impl LsqFit {
    pub fn std_err(&self, i: usize) -> f64 {
        self.covariance[i][i].max(0.0).sqrt()
    }
}

fn covariance(jac: &DMatrix<f64>, ssr: f64) -> Result<Vec<Vec<f64>>> {
    let (m, n) = jac.shape();
    let jtj = jac.transpose() * jac;
    let inv = jtj.try_inverse().ok_or_else(|| Error::Degenerate("singular normal matrix".into()))?;
    let dof = (m as f64 - n as f64).max(1.0);
    let s2 = ssr / dof;
    Ok((0..n).map(|i| (0..n).map(|j| inv[(i, j)] * s2).collect()).collect())
}

/// Minimise Σ rᵢ(p)² given residuals and their Jacobian.
pub fn levenberg_marquardt(residuals: impl Fn(&[f64]) -> Vec<f64>, jacobian: impl Fn(&[f64]) -> Vec<Vec<f64>>, p0: &[f64], max_iter: usize) -> Result<LsqFit> {
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut r = DVector::from_vec(residuals(&p));
    let m = r.len();
    if m < n {
        return Err(Error::InsufficientData(format!("{m} residuals for {n} parameters")));
    }
    let mut ssr = r.norm_squared();
    let mut mu = 1e-3;
    let to_mat = |rows: Vec<Vec<f64>>| DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    for it in 1..=max_iter {
        let jac = to_mat(jacobian(&p));
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = DVector::from_vec(residuals(&trial));
            let st = rt.norm_squared();
            if st.is_finite() && st <= ssr {
                let small = step.norm() <= 1e-13 * (1.0 + DVector::from_vec(p.clone()).norm());
                let flat = ssr - st <= 1e-15 * ssr.max(1e-300);
                p = trial;
                r = rt;
                ssr = st;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                if small || flat {
                    let jac = to_mat(jacobian(&p));
                    return Ok(LsqFit {
                        covariance: covariance(&jac, ssr)?,
                        rms: (ssr / m as f64).sqrt(),
                        params: p,
                        iterations: it,
                    });
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            // no downhill step at any damping: stationary point
            let jac = to_mat(jacobian(&p));
            return Ok(LsqFit {
                covariance: covariance(&jac, ssr)?,
                rms: (ssr / m as f64).sqrt(),
                params: p,
                iterations: it,
            });
        }
    }
    Err(Error::FitDiverged { iterations: max_iter })
}

/// Ordinary least squares y ≈ X·β.
pub fn linear_lsq(rows: &[Vec<f64>], y: &[f64]) -> Result<LsqFit> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if m < n || n == 0 {
        return Err(Error::InsufficientData(format!("{m} points for {n} coefficients")));
    }
    let x = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * max_sv {
        return Err(Error::Degenerate("collinear design matrix".into()));
    }
    let beta = svd.solve(&yv, 1e-14 * max_sv).map_err(|e| Error::Degenerate(e.to_string()))?;
    let r = &x * &beta - &yv;
    let ssr = r.norm_squared();
    Ok(LsqFit {
        covariance: covariance(&x, ssr)?,
        rms: (ssr / m as f64).sqrt(),
        params: beta.iter().copied().collect(),
        iterations: 1,
    })
}

/// Coefficient of determination of a fitted straight line.
pub fn r_squared(x: &[f64], y: &[f64], intercept: f64, slope: f64) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.2).collect();
        let model = |p: &[f64], t: f64| p[0] * (-p[1] * t).exp();
        let data: Vec<f64> = t.iter().map(|&x| model(&[2.0, 0.7], x)).collect();
        let fit = levenberg_marquardt(
            |p| t.iter().zip(&data).map(|(&x, y)| model(p, x) - y).collect(),
            |p| t.iter().map(|&x| vec![(-p[1] * x).exp(), -p[0] * x * (-p[1] * x).exp()]).collect(),
            &[1.0, 0.2],
            200,
        )
        .unwrap();
        assert!((fit.params[0] - 2.0).abs() < 1e-10);
        assert!((fit.params[1] - 0.7).abs() < 1e-10);
    }

    #[test]
    fn line_fit_and_covariance() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.1, 4.9, 7.0];
        let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![1.0, v]).collect();
        let fit = linear_lsq(&rows, &y).unwrap();
        assert!((fit.params[1] - 1.98).abs() < 1e-12);
        assert!(fit.std_err(1) > 0.0);
        assert!(r_squared(&x, &y, fit.params[0], fit.params[1]) > 0.99);
        assert!(linear_lsq(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]], &[1.0, 2.0, 3.0]).is_err());
    }
}

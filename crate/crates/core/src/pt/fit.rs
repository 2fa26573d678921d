//! Polynomial least squares over a λ grid.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::protocol::EstimateRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Coefficient of each requested power, in order.
    pub coeffs: Vec<f64>,
    pub residual_norm: f64,
}

impl FitResult {
    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }
}

/// Least-squares fit of `y ≈ Σ c_j x^{p_j}`.
pub fn least_squares(xs: &[f64], ys: &[f64], powers: &[i32]) -> Result<FitResult> {
    let mut distinct = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < powers.len() || xs.len() != ys.len() {
        return Err(Error::RankDeficient {
            points: distinct.len(),
            params: powers.len(),
        });
    }
    let a = DMatrix::from_fn(xs.len(), powers.len(), |i, j| xs[i].powi(powers[j]));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= smax * 1e-14 {
        return Err(Error::RankDeficient {
            points: distinct.len(),
            params: powers.len(),
        });
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual_norm = (a * &x - b).norm();
    Ok(FitResult {
        coeffs: x.iter().copied().collect(),
        residual_norm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    pub e1: FitResult,
    pub e2: FitResult,
    /// Leading coefficient of `λ·ψ¹_m` for each label.
    pub psi1: Vec<Complex64>,
    /// Residual norm over all labels, real and imaginary parts together.
    pub psi1_residual: f64,
}

/// Fit `λ·E1`, `λ·ψ¹` against `λ, λ², …` and `λ²·E2` against `λ², λ³, …`,
/// each with `extra_terms` powers beyond the leading one.
pub fn fit_corrections(records: &[EstimateRecord], extra_terms: usize) -> Result<FitSummary> {
    if records.len() < 3 {
        return Err(Error::RankDeficient {
            points: records.len(),
            params: 3,
        });
    }
    let xs: Vec<f64> = records.iter().map(|r| r.lambda).collect();
    let first: Vec<i32> = (1..=1 + extra_terms as i32).collect();
    let second: Vec<i32> = (2..=2 + extra_terms as i32).collect();
    let y1: Vec<f64> = records.iter().map(|r| r.lambda * r.e1_est).collect();
    let y2: Vec<f64> = records
        .iter()
        .map(|r| r.lambda * r.lambda * r.e2_est)
        .collect();
    let e1 = least_squares(&xs, &y1, &first)?;
    let e2 = least_squares(&xs, &y2, &second)?;
    let labels = records[0].psi1_est.len();
    let mut psi1 = Vec::with_capacity(labels);
    let mut res2 = 0.0;
    for m in 0..labels {
        let re: Vec<f64> = records.iter().map(|r| r.lambda * r.psi1_est[m].re).collect();
        let im: Vec<f64> = records.iter().map(|r| r.lambda * r.psi1_est[m].im).collect();
        let fr = least_squares(&xs, &re, &first)?;
        let fi = least_squares(&xs, &im, &first)?;
        res2 += fr.residual_norm.powi(2) + fi.residual_norm.powi(2);
        psi1.push(Complex64::new(fr.leading(), fi.leading()));
    }
    Ok(FitSummary {
        e1,
        e2,
        psi1,
        psi1_residual: res2.sqrt(),
    })
}

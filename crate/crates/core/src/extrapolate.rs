//! Least-squares polynomial extrapolation to `h → 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolation {
    pub limit: f64,
    /// Standard error of the intercept from the fit residuals and data errors.
    pub std_error: f64,
    /// Difference between the fit on all points and on the finest `order + 1` points.
    pub model_spread: f64,
    pub coefficients: Vec<f64>,
}

impl Extrapolation {
    pub fn error_bar(&self) -> f64 {
        self.std_error.hypot(self.model_spread)
    }
}

fn fit(h: &[f64], v: &[f64], w: &[f64], order: usize) -> Result<(Vec<f64>, f64)> {
    let n = h.len();
    let p = order + 1;
    let mut a = DMatrix::zeros(n, p);
    let mut b = DVector::zeros(n);
    for i in 0..n {
        for j in 0..p {
            a[(i, j)] = w[i] * h[i].powi(j as i32);
        }
        b[i] = w[i] * v[i];
    }
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::NonConvergence(format!("extrapolation fit: {e}")))?;
    // covariance of the intercept, (AᵀA)⁻¹₀₀ scaled by the residual variance when over-determined
    let ata = a.transpose() * &a;
    let inv = ata
        .try_inverse()
        .ok_or_else(|| Error::NonConvergence("singular extrapolation design".into()))?;
    let resid = &a * &c - &b;
    let dof = n.saturating_sub(p);
    let s2 = if dof > 0 { resid.norm_squared() / dof as f64 } else { 0.0 };
    let var = inv[(0, 0)] * s2.max(if w.iter().all(|x| *x == 1.0) { 0.0 } else { 1.0 });
    Ok((c.iter().cloned().collect(), var.max(0.0).sqrt()))
}

/// Fits `v ≈ Σ_{j≤order} c_j h^j` and returns `c_0`. With `errors` the fit is weighted by
/// `1/σ` and the intercept error includes the data errors.
pub fn extrapolate(h: &[f64], v: &[f64], errors: Option<&[f64]>, order: usize) -> Result<Extrapolation> {
    if h.len() != v.len() || h.len() < order + 1 {
        return Err(Error::NonConvergence(format!(
            "need at least {} points to extrapolate at order {order}",
            order + 1
        )));
    }
    let w: Vec<f64> = match errors {
        Some(e) => e.iter().map(|s| if *s > 0.0 { 1.0 / s } else { 1.0 }).collect(),
        None => vec![1.0; h.len()],
    };
    let (c, se) = fit(h, v, &w, order)?;
    // finest points: smallest h
    let mut idx: Vec<usize> = (0..h.len()).collect();
    idx.sort_by(|a, b| h[*a].partial_cmp(&h[*b]).expect("finite h"));
    let k = order + 1;
    let hs: Vec<f64> = idx[..k].iter().map(|i| h[*i]).collect();
    let vs: Vec<f64> = idx[..k].iter().map(|i| v[*i]).collect();
    let ws: Vec<f64> = idx[..k].iter().map(|i| w[*i]).collect();
    let (c2, _) = fit(&hs, &vs, &ws, order)?;
    Ok(Extrapolation {
        limit: c[0],
        std_error: se,
        model_spread: (c[0] - c2[0]).abs(),
        coefficients: c,
    })
}

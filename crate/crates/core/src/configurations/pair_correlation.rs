use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::matern::{for_each_close_pair, MaternSample};
use crate::error::{Error, Result};

/// Piecewise-constant radial pair correlation `r(s)`: zero below the hardcore radius,
/// equal to `asymptote` (the squared intensity) beyond the decorrelation radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialPairCorrelation {
    /// Bin edges on `[0, decorrelation_radius]`.
    pub edges: Vec<f64>,
    pub values: Vec<f64>,
    /// Monte Carlo standard errors per bin (zero for prescribed profiles).
    pub std_errors: Vec<f64>,
    pub hardcore_radius: f64,
    pub decorrelation_radius: f64,
    pub asymptote: f64,
}

impl RadialPairCorrelation {
    /// `r = 0` below `hardcore`, `m2` above.
    pub fn step(m2: f64, hardcore: f64) -> Self {
        Self {
            edges: vec![0.0, hardcore],
            values: vec![0.0],
            std_errors: vec![0.0],
            hardcore_radius: hardcore,
            decorrelation_radius: hardcore,
            asymptote: m2,
        }
    }

    /// Samples a profile on `bins` equal bins of `[0, decorrelation]`.
    pub fn from_profile<F: Fn(f64) -> f64>(
        profile: F,
        m2: f64,
        hardcore: f64,
        decorrelation: f64,
        bins: usize,
    ) -> Self {
        let w = decorrelation / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * w).collect();
        let values = (0..bins)
            .map(|k| {
                let mid = (k as f64 + 0.5) * w;
                if mid < hardcore { 0.0 } else { profile(mid) }
            })
            .collect();
        Self {
            edges,
            values,
            std_errors: vec![0.0; bins],
            hardcore_radius: hardcore,
            decorrelation_radius: decorrelation,
            asymptote: m2,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s < self.hardcore_radius {
            return 0.0;
        }
        if s >= self.decorrelation_radius {
            return self.asymptote;
        }
        let k = self.edges.partition_point(|e| *e <= s).saturating_sub(1);
        self.values[k.min(self.values.len() - 1)]
    }

    pub fn scaled(&self, f: f64) -> Self {
        let mut c = self.clone();
        c.values.iter_mut().for_each(|v| *v *= f);
        c.std_errors.iter_mut().for_each(|v| *v *= f);
        c.asymptote *= f;
        c
    }

    /// Bins `(lo, hi, r/m²)` on `[0, decorrelation_radius]`, split at the hardcore radius.
    pub fn normalized_bins(&self) -> Vec<(f64, f64, f64)> {
        let m2 = self.asymptote;
        let mut out = Vec::new();
        for k in 0..self.values.len() {
            let (lo, hi) = (self.edges[k], self.edges[k + 1]);
            if hi <= self.hardcore_radius {
                out.push((lo, hi, 0.0));
            } else if lo < self.hardcore_radius {
                out.push((lo, self.hardcore_radius, 0.0));
                out.push((self.hardcore_radius, hi, self.values[k] / m2));
            } else {
                out.push((lo, hi, self.values[k] / m2));
            }
        }
        out
    }
}

/// Binned estimator of the pair correlation averaged over samples: ordered pair counts in
/// each shell divided by `V · |shell|`. Beyond `decorrelation` the profile is set to the
/// squared intensity estimate `N(N-1)/V²`.
pub fn estimate_pair_correlation(
    samples: &[MaternSample],
    decorrelation: f64,
    bins: usize,
) -> Result<RadialPairCorrelation> {
    if samples.is_empty() || bins == 0 {
        return Err(Error::Config("pair correlation needs samples and bins".into()));
    }
    let hardcore = samples[0].hardcore;
    let w = decorrelation / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * w).collect();
    let mut per_sample: Vec<Vec<f64>> = Vec::with_capacity(samples.len());
    let mut m2s = Vec::with_capacity(samples.len());
    for smp in samples {
        let v = smp.box_side.powi(3);
        let mut counts = vec![0.0; bins];
        for_each_close_pair(&smp.points, decorrelation, smp.box_side, |_, _, d| {
            let k = ((d / w) as usize).min(bins - 1);
            counts[k] += 2.0;
        });
        let est: Vec<f64> = counts
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let shell = 4.0 * PI / 3.0 * (edges[k + 1].powi(3) - edges[k].powi(3));
                c / (v * shell)
            })
            .collect();
        per_sample.push(est);
        let n = smp.points.len() as f64;
        m2s.push(n * (n - 1.0).max(0.0) / (v * v));
    }
    let ns = samples.len() as f64;
    let mut values = vec![0.0; bins];
    let mut errs = vec![0.0; bins];
    for k in 0..bins {
        let mean = per_sample.iter().map(|e| e[k]).sum::<f64>() / ns;
        let var = if ns > 1.0 {
            per_sample.iter().map(|e| (e[k] - mean).powi(2)).sum::<f64>() / (ns - 1.0)
        } else {
            0.0
        };
        values[k] = mean;
        errs[k] = (var / ns).sqrt();
    }
    let mut out = RadialPairCorrelation {
        edges,
        values,
        std_errors: errs,
        hardcore_radius: hardcore,
        decorrelation_radius: decorrelation,
        asymptote: m2s.iter().sum::<f64>() / ns,
    };
    for k in 0..bins {
        if out.edges[k + 1] <= hardcore {
            out.values[k] = 0.0;
        }
    }
    Ok(out)
}

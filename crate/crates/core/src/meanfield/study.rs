//! Convergence of the contracted pairing along a sequence of configurations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    background_integral, discrete_pair_sum_contracted, BackgroundResolution, Density, PairingTestFunction,
    SmoothScalar, PAIRING_PREFACTOR,
};
use crate::configurations::{cubic_lattice, gen_matern2, scale_to_domain, Domain, MaternSample, ParticleConfig, PeriodicPattern};
use crate::error::{Error, Result};
use crate::estimate::{Mu2Estimate, Route, Sample};
use crate::extrapolate::{extrapolate, Extrapolation};
use crate::tensor::TraceFreeSym3;

/// How configurations of (roughly) `n` points are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// `k³` cell-centred lattice points in the unit cube; `n` must be a cube.
    Lattice { lambda: f64 },
    /// Periodic pattern rescaled into the domain with `ε = (m/n)^{1/3}`.
    Periodic { pattern: PeriodicPattern, domain: Domain, lambda: f64 },
    /// Matérn II samples (hardcore `h` in box units) rescaled into the unit cube.
    Matern { primary_intensity: f64, hardcore: f64, lambda: f64, seeds: Vec<u64> },
}

impl GeneratorSpec {
    pub fn domain(&self) -> Domain {
        match self {
            GeneratorSpec::Periodic { domain, .. } => *domain,
            _ => Domain::UnitCube,
        }
    }

    /// Configurations for the nominal size `n` (one per seed for Matérn).
    pub fn generate(&self, n: usize) -> Result<Vec<ParticleConfig>> {
        match self {
            GeneratorSpec::Lattice { lambda } => {
                let k = (n as f64).cbrt().round() as usize;
                if k * k * k != n {
                    return Err(Error::Config(format!("lattice size {n} is not a cube")));
                }
                Ok(vec![cubic_lattice(k, *lambda)])
            }
            GeneratorSpec::Periodic { pattern, domain, lambda } => {
                let eps = (pattern.m() as f64 / n as f64).cbrt();
                Ok(vec![scale_to_domain(pattern, eps, *domain, *lambda)?])
            }
            GeneratorSpec::Matern { primary_intensity, hardcore, lambda, seeds } => {
                let m = MaternSample::expected_intensity(*primary_intensity, *hardcore);
                let side = (n as f64 / m).cbrt();
                seeds
                    .iter()
                    .map(|seed| {
                        let smp = gen_matern2(*primary_intensity, *hardcore, side, *seed)?;
                        matern_to_cube(&smp, *lambda)
                    })
                    .collect()
            }
        }
    }
}

/// `x = p/L - 1/2`, with the hardcore constant set from the sample.
pub fn matern_to_cube(smp: &MaternSample, lambda: f64) -> Result<ParticleConfig> {
    let l = smp.box_side;
    let lim = 0.5 - 1e-15;
    let pts: Vec<_> = smp
        .points
        .iter()
        .map(|p| p.map(|v| (v / l - 0.5).clamp(-lim, lim)))
        .collect();
    let n = pts.len().max(1) as f64;
    let c = smp.hardcore / l * n.cbrt() * (1.0 - 1e-9);
    ParticleConfig::new(pts, Domain::UnitCube, lambda, c)
}

/// What is paired: `F = 1` or `F = φ ⊗ φ`, contracted with each strain.
#[derive(Clone, Debug)]
pub struct StudyTarget {
    pub strains: Vec<TraceFreeSym3<f64>>,
    pub phi: Option<SmoothScalar>,
    pub mu: f64,
    /// Order of the polynomial fit in `n^{-1/3}`.
    pub order: usize,
}

impl StudyTarget {
    pub fn one(strains: Vec<TraceFreeSym3<f64>>) -> Self {
        Self { strains, phi: None, mu: 1.0, order: 1 }
    }

    fn test_function(&self) -> PairingTestFunction {
        match &self.phi {
            None => PairingTestFunction::One,
            Some(p) => PairingTestFunction::square(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// Mean particle count.
    pub n: f64,
    pub value: f64,
    pub std_error: f64,
    pub cauchy_diff: Option<f64>,
    pub extrapolated: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub s: TraceFreeSym3<f64>,
    pub rows: Vec<ConvergenceRow>,
    pub limit: Extrapolation,
    /// `true` when the Cauchy differences do not grow along the sequence (beyond noise).
    pub converging: bool,
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value,cauchy_diff,extrapolated\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt17(r.n),
                fmt17(r.value),
                r.cauchy_diff.map(fmt17).unwrap_or_default(),
                r.extrapolated.map(fmt17).unwrap_or_default()
            );
        }
        out
    }

    /// Whitespace-separated `n value std_error`.
    pub fn to_dat(&self) -> String {
        let mut out = String::from("# n value std_error\n");
        for r in &self.rows {
            let _ = writeln!(out, "{} {} {}", fmt17(r.n), fmt17(r.value), fmt17(r.std_error));
        }
        out
    }
}

/// Contracted pairing for each `n` in `n_list`, Cauchy differences and the extrapolated limit
/// in `h = n^{-1/3}`.
pub fn convergence_study(spec: &GeneratorSpec, n_list: &[usize], target: &StudyTarget) -> Result<Vec<ConvergenceTable>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("n_list must be increasing".into()));
    }
    if n_list.len() < target.order + 1 {
        return Err(Error::Config(format!("need at least {} sizes", target.order + 1)));
    }
    let f = target.test_function();
    let rho = Density::indicator(spec.domain());
    let bg = background_integral(&rho, &f, &BackgroundResolution::default())?;
    let ns = target.strains.len();
    let mut per_n: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for &n in n_list {
        let configs = spec.generate(n)?;
        let mut vals = vec![Vec::new(); ns];
        let mut count = 0.0;
        for cfg in &configs {
            count += cfg.n() as f64;
            for (k, s) in target.strains.iter().enumerate() {
                let d = discrete_pair_sum_contracted(cfg, &f, s);
                vals[k].push(PAIRING_PREFACTOR * target.mu * (d - bg.value.contract(s, s)));
            }
        }
        let stats = vals
            .iter()
            .map(|v| {
                let k = v.len() as f64;
                let mean = v.iter().sum::<f64>() / k;
                let se = if v.len() > 1 {
                    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
                } else {
                    0.0
                };
                (mean, se)
            })
            .collect();
        per_n.push((count / configs.len() as f64, stats));
    }
    let h: Vec<f64> = per_n.iter().map(|(n, _)| n.powf(-1.0 / 3.0)).collect();
    let mut tables = Vec::with_capacity(ns);
    for (k, s) in target.strains.iter().enumerate() {
        let v: Vec<f64> = per_n.iter().map(|(_, st)| st[k].0).collect();
        let se: Vec<f64> = per_n.iter().map(|(_, st)| st[k].1).collect();
        let weighted = se.iter().all(|e| *e > 0.0);
        let errs = weighted.then_some(se.as_slice());
        let mut rows = Vec::with_capacity(v.len());
        for i in 0..v.len() {
            let extrapolated = if i >= target.order {
                let lo = i - target.order;
                extrapolate(&h[lo..=i], &v[lo..=i], errs.map(|e| &e[lo..=i]), target.order).ok().map(|e| e.limit)
            } else {
                None
            };
            rows.push(ConvergenceRow {
                n: per_n[i].0,
                value: v[i],
                std_error: se[i],
                cauchy_diff: (i > 0).then(|| v[i] - v[i - 1]),
                extrapolated,
            });
        }
        let limit = extrapolate(&h, &v, errs, target.order)?;
        let diffs: Vec<f64> = rows.iter().filter_map(|r| r.cauchy_diff.map(f64::abs)).collect();
        let noise = se.iter().cloned().fold(0.0, f64::max);
        let converging = diffs.len() < 2 || diffs[diffs.len() - 1] <= diffs[0] + 3.0 * noise;
        tables.push(ConvergenceTable { s: *s, rows, limit, converging });
    }
    Ok(tables)
}

/// Limits of the tables as a pairing-route estimate.
pub fn study_estimate(tables: &[ConvergenceTable], n_list: &[usize]) -> Mu2Estimate {
    let samples = tables.iter().map(|t| Sample { s: t.s, value: t.limit.limit }).collect();
    let err = tables.iter().map(|t| t.limit.error_bar()).fold(0.0, f64::max);
    Mu2Estimate::samples(Route::Pairing, samples, err).with_param("n_list", serde_json::json!(n_list))
}
